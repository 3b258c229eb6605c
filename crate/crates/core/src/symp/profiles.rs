//! One-variable profiles with closed-form first and second derivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smooth transition from 0 (s ≤ 0) to 1 (s ≥ 1) built from exp(−1/s),
/// returned with its first two derivatives.
pub fn smooth_step(s: f64) -> (f64, f64, f64) {
    if s <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if s >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let t = 1.0 - s;
    let u = (-1.0 / s).exp();
    let v = (-1.0 / t).exp();
    let du = u / (s * s);
    let dv = -v / (t * t);
    let ddu = u * (1.0 - 2.0 * s) / s.powi(4);
    let ddv = v * (2.0 * s - 1.0) / t.powi(4);
    let sum = u + v;
    let val = u / sum;
    let d1 = (du * v - u * dv) / (sum * sum);
    let d2 = (ddu * v - u * ddv) / (sum * sum) - 2.0 * (du * v - u * dv) * (du + dv) / sum.powi(3);
    (val, d1, d2)
}

/// Degree-7 smooth step 35s⁴ − 84s⁵ + 70s⁶ − 20s⁷ together with its
/// antiderivative from 0 and its derivative.
fn poly_step(s: f64) -> (f64, f64, f64) {
    let s = s.clamp(0.0, 1.0);
    let s4 = s.powi(4);
    let integral = s4 * s * (7.0 - 14.0 * s + 10.0 * s * s - 2.5 * s * s * s);
    let val = s4 * (35.0 - 84.0 * s + 70.0 * s * s - 20.0 * s * s * s);
    let deriv = 140.0 * (s * (1.0 - s)).powi(3);
    (integral, val, deriv)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum RadialProfile {
    Identity,
    Constant { c: f64 },
    /// (x^m + a²)^{1/m}.
    FRoot { m: u32, a: f64 },
    /// 0 below t0, t + const above t1, convex in between.
    HRamp { t0: f64, t1: f64 },
    /// 1 below `lower`, 0 above `upper`.
    RhoBump { lower: f64, upper: f64 },
    /// ρ(x/δ²)·(f(x) − x) with the bump equal to 1 on [0, 1] and 0 on [4, ∞).
    HProduct { m: u32, a: f64, delta2: f64 },
    /// x + HProduct: the smoothed profile that equals f near 0 and x far out.
    Glued { m: u32, a: f64, delta2: f64 },
}

impl RadialProfile {
    /// (value, first derivative, second derivative) at x.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        match *self {
            RadialProfile::Identity => (x, 1.0, 0.0),
            RadialProfile::Constant { c } => (c, 0.0, 0.0),
            RadialProfile::FRoot { m, a } => f_root(m, a, x),
            RadialProfile::HRamp { t0, t1 } => {
                let len = t1 - t0;
                if x <= t0 {
                    (0.0, 0.0, 0.0)
                } else if x >= t1 {
                    (0.5 * len + (x - t1), 1.0, 0.0)
                } else {
                    let (i, v, d) = poly_step((x - t0) / len);
                    (len * i, v, d / len)
                }
            }
            RadialProfile::RhoBump { lower, upper } => {
                let len = upper - lower;
                let (v, d1, d2) = smooth_step((x - lower) / len);
                (1.0 - v, -d1 / len, -d2 / (len * len))
            }
            RadialProfile::HProduct { m, a, delta2 } => h_product(m, a, delta2, x),
            RadialProfile::Glued { m, a, delta2 } => {
                let (h, h1, h2) = h_product(m, a, delta2, x);
                (x + h, 1.0 + h1, h2)
            }
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x).0
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |s: &str| Err(Error::ProfileViolation(s.to_string()));
        match *self {
            RadialProfile::FRoot { m, a } | RadialProfile::HProduct { m, a, .. } | RadialProfile::Glued { m, a, .. }
                if m == 0 || !(a >= 0.0) =>
            {
                bad("need m ≥ 1 and a ≥ 0")
            }
            RadialProfile::HProduct { delta2, .. } | RadialProfile::Glued { delta2, .. } if !(delta2 > 0.0) => {
                bad("need δ₂ > 0")
            }
            RadialProfile::HRamp { t0, t1 } if !(t1 > t0) => bad("need t0 < t1"),
            RadialProfile::RhoBump { lower, upper } if !(upper > lower) => bad("need lower < upper"),
            _ => Ok(()),
        }
    }

    /// Checks h′ ≥ 0 and h″ ≥ 0 at x.
    pub fn check_monotone_convex(&self, x: f64) -> Result<()> {
        let (_, d1, d2) = self.eval(x);
        if d1 < 0.0 || d2 < 0.0 {
            return Err(Error::ProfileViolation(format!(
                "h'({x:.6}) = {d1:.3e}, h''({x:.6}) = {d2:.3e}"
            )));
        }
        Ok(())
    }
}

/// f(x) = (x^m + a²)^{1/m} with closed-form derivatives
/// f′ = x^{m−1}(x^m + a²)^{1/m − 1} and f″ = a²(m − 1)x^{m−2}(x^m + a²)^{1/m − 2}.
pub fn f_root(m: u32, a: f64, x: f64) -> (f64, f64, f64) {
    let mf = m as f64;
    let base = x.powi(m as i32) + a * a;
    let val = base.powf(1.0 / mf);
    if m == 1 {
        return (val, 1.0, 0.0);
    }
    let d1 = x.powi(m as i32 - 1) * base.powf(1.0 / mf - 1.0);
    let d2 = a * a * (mf - 1.0) * x.powi(m as i32 - 2) * base.powf(1.0 / mf - 2.0);
    (val, d1, d2)
}

fn h_product(m: u32, a: f64, delta2: f64, x: f64) -> (f64, f64, f64) {
    let d = delta2 * delta2;
    let rho = RadialProfile::RhoBump { lower: d, upper: 4.0 * d };
    let (r, r1, r2) = rho.eval(x);
    if r == 0.0 && r1 == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let (f, f1, f2) = f_root(m, a, x);
    let g = f - x;
    let g1 = f1 - 1.0;
    (r * g, r1 * g + r * g1, r2 * g + 2.0 * r1 * g1 + r * f2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd(p: &RadialProfile, x: f64) -> (f64, f64) {
        let h = 1e-5;
        let (a, b, c) = (p.value(x - h), p.value(x), p.value(x + h));
        ((c - a) / (2.0 * h), (c - 2.0 * b + a) / (h * h))
    }

    #[test]
    fn derivatives_match_differences() {
        let profiles = [
            RadialProfile::FRoot { m: 2, a: 0.1 },
            RadialProfile::FRoot { m: 3, a: 0.2 },
            RadialProfile::HRamp { t0: 1.0, t1: 2.0 },
            RadialProfile::RhoBump { lower: 0.5, upper: 1.5 },
            RadialProfile::HProduct { m: 2, a: 0.1, delta2: 0.4 },
            RadialProfile::Glued { m: 3, a: 0.05, delta2: 0.3 },
        ];
        for p in &profiles {
            for k in 1..40 {
                let x = 0.05 * k as f64;
                let (_, d1, d2) = p.eval(x);
                let (n1, n2) = fd(p, x);
                assert!((d1 - n1).abs() < 1e-6 * (1.0 + d1.abs()), "{p:?} d1 at {x}");
                assert!((d2 - n2).abs() < 1e-3 * (1.0 + d2.abs()), "{p:?} d2 at {x}: {d2} vs {n2}");
            }
        }
    }

    #[test]
    fn ramp_shape() {
        let h = RadialProfile::HRamp { t0: 1.0, t1: 3.0 };
        assert_eq!(h.eval(0.5), (0.0, 0.0, 0.0));
        let (v, d1, d2) = h.eval(4.0);
        assert!((v - 2.0).abs() < 1e-15 && d1 == 1.0 && d2 == 0.0);
        for k in 0..=100 {
            assert!(h.check_monotone_convex(0.5 + 0.03 * k as f64).is_ok());
        }
    }

    #[test]
    fn bump_levels() {
        let r = RadialProfile::RhoBump { lower: 1.0, upper: 4.0 };
        assert_eq!(r.value(0.3), 1.0);
        assert_eq!(r.value(4.5), 0.0);
        assert!((r.value(2.5) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn glued_profile_regions() {
        let g = RadialProfile::Glued { m: 2, a: 0.1, delta2: 0.3 };
        let f = RadialProfile::FRoot { m: 2, a: 0.1 };
        assert!((g.value(0.05) - f.value(0.05)).abs() < 1e-15);
        assert_eq!(g.eval(0.5), (0.5, 1.0, 0.0));
    }

    #[test]
    fn f_root_vertical_positivity() {
        for &m in &[2u32, 3] {
            for &a in &[0.05, 0.2] {
                for k in 1..=200 {
                    let r = 0.15 * k as f64 / 200.0;
                    let (_, d1, d2) = f_root(m, a, r * r);
                    assert!(d1 > 0.0);
                    assert!(r * r * d2 + d1 > 0.0);
                }
            }
        }
    }
}
