//! Polynomial invariants of finite subgroups of U(2): Molien series, the
//! Reynolds operator, fundamental invariants of reflection groups and
//! per-degree bases used for invariant embeddings.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Serialize, Serializer};

use crate::cyclotomic::CyclotomicScalar;
use crate::error::{Error, Result};
use crate::groups::UnitaryGroup;
use crate::unitary::Mat2;

/// Polynomial in z, w with cyclotomic coefficients. Keys are (deg_z, deg_w).
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly2 {
    terms: BTreeMap<(u32, u32), CyclotomicScalar>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Poly2::default()
    }

    pub fn monomial(i: u32, j: u32, c: CyclotomicScalar) -> Self {
        let mut p = Poly2::zero();
        p.add_term(i, j, c);
        p
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: CyclotomicScalar) {
        if c.is_zero() {
            return;
        }
        let key = (i, j);
        let merged = match self.terms.remove(&key) {
            Some(old) => &old + &c,
            None => c,
        };
        if !merged.is_zero() {
            self.terms.insert(key, merged);
        }
    }

    pub fn terms(&self) -> &BTreeMap<(u32, u32), CyclotomicScalar> {
        &self.terms
    }

    pub fn coeff(&self, i: u32, j: u32) -> Option<&CyclotomicScalar> {
        self.terms.get(&(i, j))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lex-leading monomial with z > w.
    pub fn leading(&self) -> Option<((u32, u32), &CyclotomicScalar)> {
        self.terms.iter().next_back().map(|(k, v)| (*k, v))
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|(i, j)| i + j).max()
    }

    pub fn add(&self, o: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for ((i, j), c) in &o.terms {
            out.add_term(*i, *j, c.clone());
        }
        out
    }

    pub fn sub(&self, o: &Poly2) -> Poly2 {
        self.add(&o.scale(&CyclotomicScalar::from_integer(1, -1)))
    }

    pub fn scale(&self, s: &CyclotomicScalar) -> Poly2 {
        let mut out = Poly2::zero();
        for ((i, j), c) in &self.terms {
            out.add_term(*i, *j, c * s);
        }
        out
    }

    pub fn mul(&self, o: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for ((i, j), a) in &self.terms {
            for ((k, l), b) in &o.terms {
                out.add_term(i + k, j + l, a * b);
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Poly2 {
        let mut acc = Poly2::monomial(0, 0, CyclotomicScalar::one(1));
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn d_dz(&self) -> Poly2 {
        let mut out = Poly2::zero();
        for ((i, j), c) in &self.terms {
            if *i > 0 {
                out.add_term(i - 1, *j, c * &CyclotomicScalar::from_integer(1, *i as i64));
            }
        }
        out
    }

    pub fn d_dw(&self) -> Poly2 {
        let mut out = Poly2::zero();
        for ((i, j), c) in &self.terms {
            if *j > 0 {
                out.add_term(*i, j - 1, c * &CyclotomicScalar::from_integer(1, *j as i64));
            }
        }
        out
    }

    pub fn eval(&self, z: Complex64, w: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|((i, j), c)| c.to_complex() * z.powu(*i) * w.powu(*j))
            .sum()
    }

    /// p(g·x), where g acts on column vectors (z, w).
    pub fn substitute(&self, g: &Mat2) -> Poly2 {
        let deg = self.degree().unwrap_or(0);
        let lin1 = linear(&g.e[0][0], &g.e[0][1]);
        let lin2 = linear(&g.e[1][0], &g.e[1][1]);
        let p1 = powers(&lin1, deg);
        let p2 = powers(&lin2, deg);
        let mut out = Poly2::zero();
        for ((i, j), c) in &self.terms {
            out = out.add(&p1[*i as usize].mul(&p2[*j as usize]).scale(c));
        }
        out
    }

    /// Coefficients of the degree d part in the order z^d, z^{d-1}w, ..., w^d.
    fn homogeneous_vector(&self, d: u32, conductor: u32) -> Vec<CyclotomicScalar> {
        (0..=d)
            .map(|k| {
                self.coeff(d - k, k)
                    .cloned()
                    .unwrap_or_else(|| CyclotomicScalar::zero(conductor))
            })
            .collect()
    }
}

fn linear(a: &CyclotomicScalar, b: &CyclotomicScalar) -> Poly2 {
    let mut p = Poly2::zero();
    p.add_term(1, 0, a.clone());
    p.add_term(0, 1, b.clone());
    p
}

fn powers(p: &Poly2, n: u32) -> Vec<Poly2> {
    let mut out = vec![Poly2::monomial(0, 0, CyclotomicScalar::one(1))];
    for k in 1..=n as usize {
        out.push(out[k - 1].mul(p));
    }
    out
}

pub fn jacobian(f: &Poly2, g: &Poly2) -> Poly2 {
    f.d_dz().mul(&g.d_dw()).sub(&f.d_dw().mul(&g.d_dz()))
}

impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for ((i, j), c) in self.terms.iter().rev() {
            let mono = match (i, j) {
                (0, 0) => String::new(),
                _ => {
                    let pz = match i {
                        0 => String::new(),
                        1 => "z".into(),
                        _ => format!("z^{i}"),
                    };
                    let pw = match j {
                        0 => String::new(),
                        1 => "w".into(),
                        _ => format!("w^{j}"),
                    };
                    format!("{pz}{pw}")
                }
            };
            if c.is_one() && !mono.is_empty() {
                parts.push(mono);
            } else {
                parts.push(format!("({c}){mono}"));
            }
        }
        write!(f, "{}", parts.join(" + "))
    }
}

#[derive(Serialize)]
struct TermOut<'a> {
    ze: u32,
    we: u32,
    coeff: &'a CyclotomicScalar,
}

impl Serialize for Poly2 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let terms: Vec<TermOut> = self
            .terms
            .iter()
            .rev()
            .map(|((i, j), c)| TermOut { ze: *i, we: *j, coeff: c })
            .collect();
        terms.serialize(s)
    }
}

/// (1/|G|) Σ_g p∘g.
pub fn reynolds(g: &UnitaryGroup, p: &Poly2) -> Poly2 {
    let mut acc = Poly2::zero();
    for e in g.elements() {
        acc = acc.add(&p.substitute(e.matrix.mat()));
    }
    let inv = BigRational::new(BigInt::one(), BigInt::from(g.order()));
    acc.scale(&CyclotomicScalar::from_rational(1, inv))
}

/// Coefficients c_0..c_D of the Molien series, computed from the
/// recursion h_d = tr·h_{d-1} − det·h_{d-2} for each element.
pub fn molien_series(g: &UnitaryGroup, max_degree: usize) -> Result<Vec<u64>> {
    let n = g.conductor();
    let mut sums = vec![CyclotomicScalar::zero(n); max_degree + 1];
    for e in g.elements() {
        let tr = e.matrix.mat().trace();
        let det = e.matrix.mat().det();
        let mut prev2 = CyclotomicScalar::zero(n);
        let mut prev = CyclotomicScalar::one(n);
        sums[0] = &sums[0] + &prev;
        for s in sums.iter_mut().skip(1) {
            let h = &(&tr * &prev) - &(&det * &prev2);
            *s = &*s + &h;
            prev2 = prev;
            prev = h;
        }
    }
    let order = BigInt::from(g.order());
    sums.into_iter()
        .enumerate()
        .map(|(d, s)| {
            let r = s
                .as_rational()
                .ok_or_else(|| Error::CertificateFailed(format!("Molien coefficient {d} is irrational")))?;
            let v = r / BigRational::from_integer(order.clone());
            if !v.is_integer() {
                return Err(Error::CertificateFailed(format!("Molien coefficient {d} = {v} is not an integer")));
            }
            v.to_integer()
                .to_u64()
                .ok_or_else(|| Error::CertificateFailed(format!("Molien coefficient {d} is negative")))
        })
        .collect()
}

/// Rank over Q(ζ_N) of a list of vectors, by Gaussian elimination.
pub fn rank(vectors: &[Vec<CyclotomicScalar>]) -> usize {
    independent_rows(vectors).len()
}

/// Indices of a maximal independent prefix-greedy subset of the rows.
fn independent_rows(vectors: &[Vec<CyclotomicScalar>]) -> Vec<usize> {
    let mut basis: Vec<(usize, Vec<CyclotomicScalar>)> = Vec::new();
    let mut chosen = Vec::new();
    for (idx, v) in vectors.iter().enumerate() {
        let mut r = v.clone();
        for (pivot, b) in &basis {
            if r[*pivot].is_zero() {
                continue;
            }
            let f = r[*pivot].clone();
            for (x, y) in r.iter_mut().zip(b) {
                *x = &*x - &(&f * y);
            }
        }
        if let Some(p) = r.iter().position(|x| !x.is_zero()) {
            let inv = r[p].inverse().expect("nonzero pivot");
            let r: Vec<CyclotomicScalar> = r.iter().map(|x| x * &inv).collect();
            for (_, b) in basis.iter_mut() {
                if !b[p].is_zero() {
                    let f = b[p].clone();
                    for (x, y) in b.iter_mut().zip(&r) {
                        *x = &*x - &(&f * y);
                    }
                }
            }
            basis.push((p, r));
            chosen.push(idx);
        }
    }
    chosen
}

fn reynolds_images(g: &UnitaryGroup, d: u32) -> Vec<Poly2> {
    (0..=d)
        .map(|k| reynolds(g, &Poly2::monomial(d - k, k, CyclotomicScalar::one(g.conductor()))))
        .collect()
}

/// Dimension of the degree d invariants as the rank of the Reynolds image
/// of all monomials of degree d.
pub fn reynolds_rank(g: &UnitaryGroup, d: u32) -> usize {
    let n = g.conductor();
    let vecs: Vec<Vec<CyclotomicScalar>> = reynolds_images(g, d)
        .iter()
        .map(|p| p.homogeneous_vector(d, n))
        .collect();
    rank(&vecs)
}

/// A basis of the invariants in each degree 1..=D.
pub fn embedding_basis(g: &UnitaryGroup, max_degree: u32) -> Result<Vec<Vec<Poly2>>> {
    let n = g.conductor();
    let molien = molien_series(g, max_degree as usize)?;
    let mut out = Vec::new();
    for d in 1..=max_degree {
        let imgs = reynolds_images(g, d);
        let vecs: Vec<Vec<CyclotomicScalar>> = imgs.iter().map(|p| p.homogeneous_vector(d, n)).collect();
        let basis: Vec<Poly2> = independent_rows(&vecs)
            .into_iter()
            .map(|i| normalize_leading(&imgs[i]))
            .collect();
        if basis.len() as u64 != molien[d as usize] {
            return Err(Error::CertificateFailed(format!(
                "degree {d}: {} independent invariants but Molien gives {}",
                basis.len(),
                molien[d as usize]
            )));
        }
        out.push(basis);
    }
    Ok(out)
}

fn normalize_leading(p: &Poly2) -> Poly2 {
    match p.leading() {
        Some((_, c)) => p.scale(&c.inverse().expect("leading coefficient is nonzero")),
        None => p.clone(),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FundamentalInvariants {
    pub f: Poly2,
    pub g: Poly2,
    pub degrees: (u32, u32),
}

/// H(z, w) = (f(z, w), g(z, w)).
pub fn h_map_eval(basis: &FundamentalInvariants, z: Complex64, w: Complex64) -> (Complex64, Complex64) {
    (basis.f.eval(z, w), basis.g.eval(z, w))
}

/// Generators of the invariant ring of a group generated by reflections.
/// Both are normalized to leading coefficient 1 and ordered so that the
/// lex-leading monomial of f is larger (z > w).
pub fn fundamental_invariants(grp: &UnitaryGroup) -> Result<FundamentalInvariants> {
    if grp.gamma_star().order() != grp.order() {
        return Err(Error::Precondition(
            "group is not generated by complex reflections".into(),
        ));
    }
    let order = grp.order() as u32;
    let top = order.max(1) as usize;
    let c = molien_series(grp, top)?;
    let d1 = (1..=top).find(|&d| c[d] > 0).ok_or_else(|| Error::CertificateFailed("no invariants found".into()))? as u32;
    let d2 = if c[d1 as usize] >= 2 {
        d1
    } else {
        ((d1 as usize + 1)..=top)
            .find(|&d| c[d] > u64::from(d % d1 as usize == 0))
            .ok_or_else(|| Error::CertificateFailed("second degree not found".into()))? as u32
    };
    for (d, &cd) in c.iter().enumerate() {
        let expect = (0..=d / d1 as usize)
            .filter(|a| (d - a * d1 as usize) % d2 as usize == 0)
            .count() as u64;
        if expect != cd {
            return Err(Error::CertificateFailed(format!(
                "Molien series is not 1/((1-t^{d1})(1-t^{d2})) at degree {d}"
            )));
        }
    }
    let f = reynolds_images(grp, d1)
        .into_iter()
        .find(|p| !p.is_zero())
        .map(|p| normalize_leading(&p))
        .ok_or_else(|| Error::CertificateFailed("no invariant of minimal degree".into()))?;
    let mut g = reynolds_images(grp, d2)
        .into_iter()
        .find(|p| !jacobian(&f, p).is_zero())
        .ok_or_else(|| Error::CertificateFailed("no algebraically independent second invariant".into()))?;
    if d2 % d1 == 0 {
        let h = f.pow(d2 / d1);
        let ((i, j), lead) = h.leading().expect("power of nonzero polynomial");
        if let Some(cg) = g.coeff(i, j).cloned() {
            let factor = &cg * &lead.inverse().expect("nonzero");
            g = g.sub(&h.scale(&factor));
        }
    }
    let g = normalize_leading(&g);
    let (f, g, degrees) = if f.leading().map(|x| x.0) >= g.leading().map(|x| x.0) {
        (f, g, (d1, d2))
    } else {
        (g, f, (d2, d1))
    };
    let r = grp.reflections().len() as u32;
    if degrees.0 * degrees.1 != order || degrees.0 + degrees.1 != r + 2 {
        return Err(Error::CertificateFailed(format!(
            "degrees {degrees:?} violate d1·d2 = {order} or d1 + d2 = {}",
            r + 2
        )));
    }
    Ok(FundamentalInvariants { f, g, degrees })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::builtin;

    fn one() -> CyclotomicScalar {
        CyclotomicScalar::one(1)
    }

    #[test]
    fn h_map_on_klein_orbit() {
        let fi = fundamental_invariants(&builtin::klein_four()).unwrap();
        let c = |re: f64| Complex64::new(re, 0.0);
        assert_eq!(h_map_eval(&fi, c(1.0), c(2.0)), (c(1.0), c(4.0)));
        assert_eq!(h_map_eval(&fi, c(-1.0), c(2.0)), h_map_eval(&fi, c(1.0), c(2.0)));
        assert_eq!(h_map_eval(&fi, c(0.0), c(0.0)), (c(0.0), c(0.0)));
    }

    #[test]
    fn klein_four_invariants() {
        let g = builtin::klein_four();
        let fi = fundamental_invariants(&g).unwrap();
        assert_eq!(fi.degrees, (2, 2));
        assert_eq!(fi.f, Poly2::monomial(2, 0, one()));
        assert_eq!(fi.g, Poly2::monomial(0, 2, one()));
    }

    #[test]
    fn cyclic_reflection_invariants() {
        for m in 2..=6 {
            let g = builtin::cyclic(m, 0);
            let fi = fundamental_invariants(&g).unwrap();
            assert_eq!(fi.f, Poly2::monomial(m, 0, one()));
            assert_eq!(fi.g, Poly2::monomial(0, 1, one()));
        }
    }

    #[test]
    fn molien_of_minus_identity() {
        let g = builtin::minus_identity();
        let c = molien_series(&g, 6).unwrap();
        assert_eq!(c, vec![1, 0, 3, 0, 5, 0, 7]);
    }

    #[test]
    fn molien_matches_rank_for_quaternion() {
        let g = builtin::quaternion();
        let c = molien_series(&g, 8).unwrap();
        for d in 0..=8u32 {
            assert_eq!(c[d as usize] as usize, reynolds_rank(&g, d), "degree {d}");
        }
        assert_eq!(&c[..7], &[1, 0, 0, 0, 2, 0, 1]);
    }

    #[test]
    fn non_reflection_group_rejected() {
        let g = builtin::minus_identity();
        assert!(matches!(fundamental_invariants(&g), Err(Error::Precondition(_))));
    }

    #[test]
    fn dihedral_reflection_invariants() {
        let g = builtin::dihedral_reflections(3);
        let fi = fundamental_invariants(&g).unwrap();
        let mut d = [fi.degrees.0, fi.degrees.1];
        d.sort();
        assert_eq!(d, [2, 3]);
        for e in g.elements() {
            assert_eq!(fi.f.substitute(e.matrix.mat()), fi.f);
            assert_eq!(fi.g.substitute(e.matrix.mat()), fi.g);
        }
    }

    #[test]
    fn embedding_basis_for_cyclic() {
        let g = builtin::cyclic(3, 1);
        let b = embedding_basis(&g, 3).unwrap();
        assert_eq!(b[0].len(), 0);
        assert_eq!(b[1].len(), 0);
        assert_eq!(b[2].len(), 4);
    }

    #[test]
    fn substitution_composes() {
        let g = builtin::binary_dihedral(3);
        let p = Poly2::monomial(3, 1, one()).add(&Poly2::monomial(0, 2, CyclotomicScalar::root_of_unity(6, 1)));
        let a = g.element(1).matrix.mat();
        let b = g.element(2).matrix.mat();
        let lhs = p.substitute(&a.mul(b));
        let rhs = p.substitute(a).substitute(b);
        assert_eq!(lhs, rhs);
    }
}
