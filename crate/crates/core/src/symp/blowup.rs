//! The total space of O(−m) → CP¹ in its two standard charts (s, t) and
//! (1/s, t sᵐ), with the form pulled back from the invariant embedding
//! (s, t) ↦ (t, ts, …, tsᵐ) plus λ times the Fubini–Study form of the base.

use nalgebra::Matrix4;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ddbar::{hermitian_to_form, Hermitian2};
use super::forms::{exterior_derivative_fd, Form2At, Point};
use super::tameness::{tameness_min, Region, TamenessCertificate};
use crate::error::{Error, Result};
use crate::unitary::{realify_complex, standard_j};

pub const OVERLAP_TOL: f64 = 1e-8;
pub const CLOSED_TOL: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlowupModel {
    pub m: u32,
    pub lambda: f64,
}

impl BlowupModel {
    pub fn new(m: u32, lambda: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::Precondition("the blow-up model needs m ≥ 2".into()));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::Precondition("λ must be positive".into()));
        }
        Ok(BlowupModel { m, lambda })
    }

    /// Complex Hessian of |t|²P(|s|²) + λ log(1 + |s|²), P(σ) = Σ_{k≤m} σᵏ.
    pub fn hermitian(&self, p: &Point) -> Hermitian2 {
        let s = Complex64::new(p[0], p[1]);
        let t = Complex64::new(p[2], p[3]);
        let sigma = s.norm_sqr();
        let tt = t.norm_sqr();
        let (mut pv, mut p1, mut p2) = (0.0, 0.0, 0.0);
        for k in 0..=self.m as i32 {
            let kf = k as f64;
            pv += sigma.powi(k);
            if k >= 1 {
                p1 += kf * sigma.powi(k - 1);
            }
            if k >= 2 {
                p2 += kf * (kf - 1.0) * sigma.powi(k - 2);
            }
        }
        let h_ss = tt * (p1 + sigma * p2) + self.lambda / (1.0 + sigma).powi(2);
        let h_st = t * s.conj() * p1;
        [[Complex64::new(h_ss, 0.0), h_st], [h_st.conj(), Complex64::new(pv, 0.0)]]
    }

    /// The form in either chart; both charts use the same expression.
    pub fn form(&self, p: &Point) -> Form2At {
        hermitian_to_form(*p, &self.hermitian(p))
    }

    pub fn transition(&self, p: &Point) -> Point {
        let s = Complex64::new(p[0], p[1]);
        let t = Complex64::new(p[2], p[3]);
        let s2 = s.inv();
        let t2 = t * s.powu(self.m);
        [s2.re, s2.im, t2.re, t2.im]
    }

    pub fn transition_jacobian(&self, p: &Point) -> Matrix4<f64> {
        let s = Complex64::new(p[0], p[1]);
        let t = Complex64::new(p[2], p[3]);
        let m = self.m;
        realify_complex(&nalgebra::Matrix2::new(
            -(s * s).inv(),
            Complex64::new(0.0, 0.0),
            t * s.powu(m - 1) * m as f64,
            s.powu(m),
        ))
    }

    /// Largest entry of Ω₁(p) − Dφᵀ Ω₂(φ(p)) Dφ.
    pub fn overlap_discrepancy(&self, p: &Point) -> f64 {
        let q = self.transition(p);
        let d = self.transition_jacobian(p);
        let pulled = d.transpose() * self.form(&q).matrix() * d;
        (self.form(p).matrix() - pulled).abs().max()
    }

    /// Area of the zero section by polar quadrature over |s| ≤ 1 in each chart.
    pub fn exceptional_area(&self, radial: usize, angular: usize) -> f64 {
        let mut per_chart = 0.0;
        let dr = 1.0 / radial as f64;
        for i in 0..=radial {
            let r = i as f64 * dr;
            let w = if i == 0 || i == radial { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let mut ring = 0.0;
            for k in 0..angular {
                let th = std::f64::consts::TAU * k as f64 / angular as f64;
                ring += self.form(&[r * th.cos(), r * th.sin(), 0.0, 0.0]).component(0, 1);
            }
            per_chart += w * r * ring * std::f64::consts::TAU / angular as f64;
        }
        2.0 * per_chart * dr / 3.0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BlowupReport {
    pub m: u32,
    pub lambda: f64,
    pub grid: usize,
    pub charts: [TamenessCertificate; 2],
    pub closedness: f64,
    pub overlap_discrepancy: f64,
    pub exceptional_area: f64,
    pub tame: bool,
}

pub fn blowup_model_check(m: u32, lambda: f64, grid: usize, seed: u64) -> Result<BlowupReport> {
    let model = BlowupModel::new(m, lambda)?;
    let eval = |p: &Point| -> Result<Form2At> { Ok(model.form(p)) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut overlap: f64 = 0.0;
    for _ in 0..200 {
        let r = rng.gen_range(0.5..2.0);
        let th = rng.gen_range(0.0..std::f64::consts::TAU);
        let p = [r * th.cos(), r * th.sin(), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let d = model.overlap_discrepancy(&p);
        if !(d <= OVERLAP_TOL) {
            return Err(Error::CertificateFailed(format!("chart overlap mismatch {d:.3e} at {p:?}")));
        }
        overlap = overlap.max(d);
    }

    let mut closedness: f64 = 0.0;
    for _ in 0..100 {
        let p: Point = [0; 4].map(|_| rng.gen_range(-0.9..0.9));
        let coarse = exterior_derivative_fd(&eval, &p, 1e-3)?;
        let fine = exterior_derivative_fd(&eval, &p, 5e-4)?;
        closedness = closedness.max(coarse).max(fine);
    }

    let region = Region::Box { lo: [-1.0; 4], hi: [1.0; 4] };
    let j = |_: &Point| standard_j();
    let first = tameness_min(&eval, &j, &region, grid)?;
    let second = tameness_min(&eval, &j, &region, grid)?;
    let tame = first.tame && second.tame && closedness <= CLOSED_TOL;
    Ok(BlowupReport {
        m,
        lambda,
        grid,
        charts: [first, second],
        closedness,
        overlap_discrepancy: overlap,
        exceptional_area: model.exceptional_area(200, 64),
        tame,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symp::ddbar::ddbar_raw;

    #[test]
    fn hermitian_matches_potential() {
        let model = BlowupModel::new(3, 0.2).unwrap();
        let pot = |p: &Point| {
            let sigma = p[0] * p[0] + p[1] * p[1];
            let tt = p[2] * p[2] + p[3] * p[3];
            tt * (0..=3).map(|k| sigma.powi(k)).sum::<f64>() + 0.2 * (1.0 + sigma).ln()
        };
        let p = [0.4, -0.3, 0.6, 0.2];
        assert!(model.form(&p).max_abs_diff(&ddbar_raw(&pot, &p, 1e-4)) < 1e-5);
    }

    #[test]
    fn charts_agree() {
        let model = BlowupModel::new(2, 0.1).unwrap();
        assert!(model.overlap_discrepancy(&[0.7, 0.4, -0.5, 0.3]) < 1e-12);
    }

    #[test]
    fn exceptional_area_is_lambda_pi() {
        let model = BlowupModel::new(2, 0.1).unwrap();
        assert!((model.exceptional_area(200, 32) - 0.1 * std::f64::consts::PI).abs() < 1e-8);
    }

    #[test]
    fn small_lambda_limit_is_linear() {
        let p = [0.3, 0.2, 0.5, -0.1];
        let base = BlowupModel { m: 2, lambda: 0.0 }.form(&p);
        let d1 = BlowupModel::new(2, 0.1).unwrap().form(&p).max_abs_diff(&base);
        let d2 = BlowupModel::new(2, 0.05).unwrap().form(&p).max_abs_diff(&base);
        assert!((d1 / d2 - 2.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BlowupModel::new(1, 0.1).is_err());
        assert!(BlowupModel::new(2, 0.0).is_err());
    }
}
