//! Exact arithmetic in the cyclotomic fields Q(ζ_N).
//!
//! An element is a rational polynomial in ζ_N of degree below φ(N), kept
//! reduced modulo the cyclotomic polynomial Φ_N. Elements with different
//! conductors are lifted to the lcm before combining.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

fn phi_cache() -> &'static Mutex<HashMap<u32, Arc<Vec<i64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Vec<i64>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Coefficients of Φ_n, lowest degree first.
pub fn cyclotomic_polynomial(n: u32) -> Arc<Vec<i64>> {
    assert!(n >= 1, "conductor must be positive");
    if let Some(p) = phi_cache().lock().unwrap().get(&n) {
        return p.clone();
    }
    let mut poly = vec![0i64; n as usize + 1];
    poly[0] = -1;
    poly[n as usize] = 1;
    for d in 1..n {
        if n % d == 0 {
            let div = cyclotomic_polynomial(d);
            poly = div_monic(&poly, &div);
        }
    }
    let arc = Arc::new(poly);
    phi_cache().lock().unwrap().insert(n, arc.clone());
    arc
}

fn div_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let mut quot = vec![0i64; num.len() - dn];
    for k in (0..quot.len()).rev() {
        let c = rem[k + dn];
        quot[k] = c;
        if c != 0 {
            for (i, &d) in den.iter().enumerate() {
                rem[k + i] -= c * d;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    quot
}

/// Euler's totient.
pub fn euler_phi(n: u32) -> usize {
    cyclotomic_polynomial(n).len() - 1
}

pub fn lcm(a: u32, b: u32) -> u32 {
    a.lcm(&b)
}

/// Hashable canonical form of a scalar.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScalarKey(pub u32, pub Vec<BigRational>);

#[derive(Clone, Debug)]
pub struct CyclotomicScalar {
    conductor: u32,
    coeffs: Vec<BigRational>,
}

fn reduce_in_place(n: u32, poly: &mut Vec<BigRational>) {
    let phi = cyclotomic_polynomial(n);
    let deg = phi.len() - 1;
    if poly.len() > n as usize {
        let mut folded = vec![BigRational::zero(); n as usize];
        for (k, c) in poly.drain(..).enumerate() {
            if !c.is_zero() {
                folded[k % n as usize] += c;
            }
        }
        *poly = folded;
    }
    for k in (deg..poly.len()).rev() {
        if poly[k].is_zero() {
            continue;
        }
        let c = poly[k].clone();
        for (i, &p) in phi.iter().enumerate() {
            if p != 0 {
                poly[k - deg + i] -= &c * BigInt::from(p);
            }
        }
    }
    poly.resize(deg, BigRational::zero());
}

impl CyclotomicScalar {
    /// Builds an element from coefficients of 1, ζ, ζ², ... of any length.
    pub fn from_coeffs(conductor: u32, mut coeffs: Vec<BigRational>) -> Self {
        reduce_in_place(conductor, &mut coeffs);
        CyclotomicScalar { conductor, coeffs }
    }

    pub fn zero(conductor: u32) -> Self {
        Self::from_coeffs(conductor, Vec::new())
    }

    pub fn one(conductor: u32) -> Self {
        Self::from_rational(conductor, BigRational::one())
    }

    pub fn from_integer(conductor: u32, v: i64) -> Self {
        Self::from_rational(conductor, BigRational::from_integer(BigInt::from(v)))
    }

    pub fn from_ratio(conductor: u32, num: i64, den: i64) -> Self {
        Self::from_rational(
            conductor,
            BigRational::new(BigInt::from(num), BigInt::from(den)),
        )
    }

    pub fn from_rational(conductor: u32, v: BigRational) -> Self {
        Self::from_coeffs(conductor, vec![v])
    }

    /// ζ_N^k for any integer k.
    pub fn root_of_unity(conductor: u32, k: i64) -> Self {
        let e = k.rem_euclid(conductor as i64) as usize;
        let mut v = vec![BigRational::zero(); e + 1];
        v[e] = BigRational::one();
        Self::from_coeffs(conductor, v)
    }

    /// √2 as an element of Q(ζ_8), via ζ_8 + ζ_8^{-1}.
    pub fn sqrt2() -> Self {
        &Self::root_of_unity(8, 1) + &Self::root_of_unity(8, -1)
    }

    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(k, c)| if k == 0 { c.is_one() } else { c.is_zero() })
    }

    /// The value if the element lies in Q.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.coeffs.iter().skip(1).all(|c| c.is_zero()) {
            Some(self.coeffs.first().cloned().unwrap_or_else(BigRational::zero))
        } else {
            None
        }
    }

    /// Re-expresses the element in Q(ζ_L); requires N | L.
    pub fn lift(&self, target: u32) -> Result<Self> {
        if target % self.conductor != 0 {
            return Err(Error::Conductor(format!(
                "cannot lift conductor {} to {}",
                self.conductor, target
            )));
        }
        if target == self.conductor {
            return Ok(self.clone());
        }
        let step = (target / self.conductor) as usize;
        let mut v = vec![BigRational::zero(); self.coeffs.len() * step + 1];
        for (k, c) in self.coeffs.iter().enumerate() {
            v[k * step] = c.clone();
        }
        Ok(Self::from_coeffs(target, v))
    }

    fn lift_pair(&self, other: &Self) -> (Self, Self) {
        if self.conductor == other.conductor {
            return (self.clone(), other.clone());
        }
        let l = lcm(self.conductor, other.conductor);
        (self.lift(l).unwrap(), other.lift(l).unwrap())
    }

    /// Complex conjugate, sending ζ to ζ^{-1}.
    pub fn conj(&self) -> Self {
        let n = self.conductor as usize;
        let mut v = vec![BigRational::zero(); n];
        for (k, c) in self.coeffs.iter().enumerate() {
            if !c.is_zero() {
                v[(n - k) % n] += c;
            }
        }
        Self::from_coeffs(self.conductor, v)
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        CyclotomicScalar {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|c| c * r).collect(),
        }
    }

    /// Multiplicative inverse by the extended Euclidean algorithm in Q[x].
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let phi: Vec<BigRational> = cyclotomic_polynomial(self.conductor)
            .iter()
            .map(|&c| BigRational::from_integer(BigInt::from(c)))
            .collect();
        let mut r0 = phi;
        let mut r1 = trim(self.coeffs.clone());
        let mut s0: Vec<BigRational> = Vec::new();
        let mut s1 = vec![BigRational::one()];
        while !r1.is_empty() {
            let (q, r) = poly_divrem(&r0, &r1);
            let s2 = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
        }
        debug_assert_eq!(r0.len(), 1);
        let c = r0[0].clone();
        let inv: Vec<BigRational> = s0.into_iter().map(|x| x / &c).collect();
        Some(Self::from_coeffs(self.conductor, inv))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.conductor);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn to_complex(&self) -> Complex64 {
        let n = self.conductor as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let ang = 2.0 * std::f64::consts::PI * k as f64 / n;
            acc += Complex64::from_polar(rational_to_f64(c), ang);
        }
        acc
    }

    pub fn key(&self) -> ScalarKey {
        ScalarKey(self.conductor, self.coeffs.clone())
    }

    /// Exponent k with self = ζ_M^k, where ζ_M is a root of unity in the field.
    pub fn root_exponent(&self, m: u32) -> Option<u32> {
        (0..m).find(|&k| root_in_field(self.conductor, m, k as i64) == *self)
    }
}

/// ζ_M^k written in Q(ζ_N), for M = N, or M = 2N with N odd.
pub fn root_in_field(n: u32, m: u32, k: i64) -> CyclotomicScalar {
    if m == n {
        return CyclotomicScalar::root_of_unity(n, k);
    }
    assert!(m == 2 * n && n % 2 == 1, "ζ_{m} does not lie in Q(ζ_{n})");
    let r = CyclotomicScalar::root_of_unity(n, k * ((n as i64 + 1) / 2));
    if k.rem_euclid(2) == 1 {
        -r
    } else {
        r
    }
}

/// Order of the group of roots of unity in Q(ζ_N).
pub fn roots_of_unity_order(n: u32) -> u32 {
    if n % 2 == 0 {
        n
    } else {
        2 * n
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => {
            let shift = r.denom().bits().max(r.numer().bits()) as i64 - 60;
            let sh = shift.max(0) as u32;
            let a = (r.numer() >> sh).to_f64().unwrap_or(0.0);
            let b = (r.denom() >> sh).to_f64().unwrap_or(1.0);
            a / b
        }
    }
}

fn trim(mut v: Vec<BigRational>) -> Vec<BigRational> {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
    v
}

fn poly_mul(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                out[i + j] += x * y;
            }
        }
    }
    trim(out)
}

fn poly_sub(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    trim(out)
}

fn poly_divrem(a: &[BigRational], b: &[BigRational]) -> (Vec<BigRational>, Vec<BigRational>) {
    let mut rem = trim(a.to_vec());
    let db = b.len() - 1;
    let lead = &b[db];
    if rem.len() < b.len() {
        return (Vec::new(), rem);
    }
    let mut quot = vec![BigRational::zero(); rem.len() - db];
    while rem.len() >= b.len() {
        let k = rem.len() - 1 - db;
        let c = rem.last().unwrap() / lead;
        for (i, y) in b.iter().enumerate() {
            rem[k + i] -= &c * y;
        }
        quot[k] = c;
        rem = trim(rem);
    }
    (trim(quot), rem)
}

impl PartialEq for CyclotomicScalar {
    fn eq(&self, other: &Self) -> bool {
        if self.conductor == other.conductor {
            return self.coeffs == other.coeffs;
        }
        let (a, b) = self.lift_pair(other);
        a.coeffs == b.coeffs
    }
}

impl Eq for CyclotomicScalar {}

impl<'a> Add<&'a CyclotomicScalar> for &'a CyclotomicScalar {
    type Output = CyclotomicScalar;
    fn add(self, rhs: &CyclotomicScalar) -> CyclotomicScalar {
        let (a, b) = self.lift_pair(rhs);
        CyclotomicScalar {
            conductor: a.conductor,
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect(),
        }
    }
}

impl<'a> Sub<&'a CyclotomicScalar> for &'a CyclotomicScalar {
    type Output = CyclotomicScalar;
    fn sub(self, rhs: &CyclotomicScalar) -> CyclotomicScalar {
        let (a, b) = self.lift_pair(rhs);
        CyclotomicScalar {
            conductor: a.conductor,
            coeffs: a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x - y).collect(),
        }
    }
}

impl<'a> Mul<&'a CyclotomicScalar> for &'a CyclotomicScalar {
    type Output = CyclotomicScalar;
    fn mul(self, rhs: &CyclotomicScalar) -> CyclotomicScalar {
        let (a, b) = self.lift_pair(rhs);
        let mut out = vec![BigRational::zero(); a.coeffs.len() * 2];
        for (i, x) in a.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.coeffs.iter().enumerate() {
                if !y.is_zero() {
                    out[i + j] += x * y;
                }
            }
        }
        CyclotomicScalar::from_coeffs(a.conductor, out)
    }
}

impl Neg for &CyclotomicScalar {
    type Output = CyclotomicScalar;
    fn neg(self) -> CyclotomicScalar {
        CyclotomicScalar {
            conductor: self.conductor,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for CyclotomicScalar {
            type Output = CyclotomicScalar;
            fn $m(self, rhs: CyclotomicScalar) -> CyclotomicScalar {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for CyclotomicScalar {
    type Output = CyclotomicScalar;
    fn neg(self) -> CyclotomicScalar {
        -&self
    }
}

impl fmt::Display for CyclotomicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut terms = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            terms.push(match k {
                0 => format!("{c}"),
                1 => format!("({c})ζ{}", self.conductor),
                _ => format!("({c})ζ{}^{k}", self.conductor),
            });
        }
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawScalar {
    conductor: u32,
    coeffs: Vec<[i64; 2]>,
}

impl Serialize for CyclotomicScalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for c in &self.coeffs {
            let num = c.numer().to_i64();
            let den = c.denom().to_i64();
            match (num, den) {
                (Some(n), Some(d)) => coeffs.push([n, d]),
                _ => {
                    return Err(serde::ser::Error::custom(
                        "coefficient does not fit in 64-bit integers",
                    ))
                }
            }
        }
        RawScalar {
            conductor: self.conductor,
            coeffs,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CyclotomicScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawScalar::deserialize(d)?;
        if raw.conductor == 0 {
            return Err(serde::de::Error::custom("conductor must be positive"));
        }
        let mut v = Vec::with_capacity(raw.coeffs.len());
        for [n, den] in raw.coeffs {
            if den == 0 {
                return Err(serde::de::Error::custom("zero denominator"));
            }
            v.push(BigRational::new(BigInt::from(n), BigInt::from(den)));
        }
        Ok(CyclotomicScalar::from_coeffs(raw.conductor, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(*cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(*cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(*cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(*cyclotomic_polynomial(8), vec![1, 0, 0, 0, 1]);
        assert_eq!(*cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
        assert!(cyclotomic_polynomial(105).contains(&-2));
    }

    #[test]
    fn totient_values() {
        let expected = [1, 1, 2, 2, 4, 2, 6, 4, 6, 4, 10, 4];
        for (n, &e) in (1..=12).zip(expected.iter()) {
            assert_eq!(euler_phi(n), e);
        }
    }

    #[test]
    fn roots_multiply_and_wrap() {
        for n in 1..=12u32 {
            let z = CyclotomicScalar::root_of_unity(n, 1);
            assert!(z.pow(n).is_one());
            let a = CyclotomicScalar::root_of_unity(n, 3);
            let b = CyclotomicScalar::root_of_unity(n, 5);
            assert_eq!(&a * &b, CyclotomicScalar::root_of_unity(n, 8));
            assert_eq!(a.conj(), CyclotomicScalar::root_of_unity(n, -3));
        }
    }

    #[test]
    fn sqrt2_squares_to_two() {
        let s = CyclotomicScalar::sqrt2();
        assert_eq!(&s * &s, CyclotomicScalar::from_integer(8, 2));
        assert!((s.to_complex().re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn mixed_conductors_lift() {
        let i = CyclotomicScalar::root_of_unity(4, 1);
        let w = CyclotomicScalar::root_of_unity(3, 1);
        let p = &i * &w;
        assert_eq!(p.conductor(), 12);
        assert_eq!(p, CyclotomicScalar::root_of_unity(12, 3 + 4));
        assert_eq!(CyclotomicScalar::root_of_unity(6, 2), w);
    }

    #[test]
    fn inverse_of_one_minus_zeta() {
        let x = &CyclotomicScalar::one(7) - &CyclotomicScalar::root_of_unity(7, 1);
        let y = x.inverse().unwrap();
        assert!((&x * &y).is_one());
        assert!(CyclotomicScalar::zero(7).inverse().is_none());
    }

    #[test]
    fn odd_conductor_roots() {
        let z = root_in_field(3, 6, 1);
        assert!(z.pow(6).is_one());
        assert!(!z.pow(3).is_one());
        assert_eq!(z.root_exponent(6), Some(1));
        assert_eq!(roots_of_unity_order(3), 6);
    }

    #[test]
    fn json_round_trip() {
        let x = &CyclotomicScalar::from_ratio(5, 3, 7) + &CyclotomicScalar::root_of_unity(5, 2);
        let s = serde_json::to_string(&x).unwrap();
        let y: CyclotomicScalar = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn evaluation_matches_floats() {
        let n = 9;
        let x = &CyclotomicScalar::root_of_unity(n, 2) + &CyclotomicScalar::root_of_unity(n, 7);
        let a = 2.0 * std::f64::consts::PI / n as f64;
        let expect = Complex64::from_polar(1.0, 2.0 * a) + Complex64::from_polar(1.0, 7.0 * a);
        assert!((x.to_complex() - expect).norm() < 1e-14);
    }
}
