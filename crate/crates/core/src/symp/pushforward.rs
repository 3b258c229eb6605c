//! Comparison of ω_a with the manifold-side form through (z, w) ↦ (z, wᵐ).

use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::forms::{eval_omega_a, radial_form, Form2At, LocalModel, Point};
use crate::error::{Error, Result};

pub const PUSHFORWARD_TOL: f64 = 1e-8;
const DYADIC_BITS: u32 = 20;

/// φ̂(x′) = (x′ + a²)^{1/m} with its derivatives.
fn phi_hat(m: u32, a: f64, x: f64) -> (f64, f64, f64) {
    let e = 1.0 / m as f64;
    let base = x + a * a;
    (base.powf(e), e * base.powf(e - 1.0), e * (e - 1.0) * base.powf(e - 2.0))
}

/// Manifold model: connection ν′ = mν, curvature mκ, radial profile φ̂.
pub fn manifold_model(model: &LocalModel) -> LocalModel {
    LocalModel { connection: model.connection.scaled(model.m as f64), m: 1, ..*model }
}

/// ω̂_a at a manifold point q = (z, w′).
pub fn eval_omega_hat(model: &LocalModel, q: &Point) -> Result<Form2At> {
    if model.a == 0.0 && model.m > 1 {
        return Err(Error::Precondition("the manifold-side form needs a > 0".into()));
    }
    let x = q[2] * q[2] + q[3] * q[3];
    let (_, d1, d2) = phi_hat(model.m, model.a, x);
    Ok(radial_form(&manifold_model(model), q, x * d1, d1 + x * d2))
}

/// (z, w) ↦ (z, wᵐ) on real coordinates.
pub fn branch_map(m: u32, p: &Point) -> Point {
    let w = num_complex::Complex64::new(p[2], p[3]).powu(m);
    [p[0], p[1], w.re, w.im]
}

/// Real Jacobian of the branch map.
pub fn branch_jacobian(m: u32, p: &Point) -> Matrix4<f64> {
    let w = num_complex::Complex64::new(p[2], p[3]);
    let d = w.powu(m - 1) * m as f64;
    let mut jac = Matrix4::identity();
    jac[(2, 2)] = d.re;
    jac[(2, 3)] = -d.im;
    jac[(3, 2)] = d.im;
    jac[(3, 3)] = d.re;
    jac
}

/// Pullback of the manifold-side form to the orbifold chart.
pub fn pulled_back_hat(model: &LocalModel, p: &Point) -> Result<Form2At> {
    let q = branch_map(model.m, p);
    let omega = eval_omega_hat(model, &q)?.matrix();
    let jac = branch_jacobian(model.m, p);
    Ok(Form2At::from_matrix(*p, &(jac.transpose() * omega * jac)))
}

/// |wᵐ|² = (|w|²)ᵐ in exact integer arithmetic for w = (u + iv)/2^k.
fn radial_identity_exact(m: u32, u: i64, v: i64) -> bool {
    let mut re: i128 = 1;
    let mut im: i128 = 0;
    for _ in 0..m {
        let (r, i) = (re * u as i128 - im * v as i128, re * v as i128 + im * u as i128);
        re = r;
        im = i;
    }
    let lhs = re * re + im * im;
    let rhs = (u as i128 * u as i128 + v as i128 * v as i128).pow(m);
    lhs == rhs
}

#[derive(Clone, Debug, Serialize)]
pub struct PushforwardReport {
    pub m: u32,
    pub samples: usize,
    pub max_discrepancy: f64,
    pub worst_sample: Point,
    pub radial_exact: bool,
    pub tolerance: f64,
    pub passed: bool,
}

/// Samples base points in the disc and fiber points with
/// 0.05δ₂ ≤ |w| ≤ δ₂ on a dyadic lattice.
pub fn pushforward_check(model: &LocalModel, samples: usize, seed: u64) -> Result<PushforwardReport> {
    model.validate()?;
    let m = model.m;
    let scale = (1u64 << DYADIC_BITS) as f64;
    let fiber_bits_max = ((model.radii.delta2 * scale) as i64).max(1);
    let bits = (64 - fiber_bits_max.leading_zeros()) as u64;
    if (2 * bits + 1) * m as u64 > 126 {
        return Err(Error::Unsupported(format!("exact radial check overflows for m = {m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base_r = 0.9 * model.base_radius();
    let mut worst = (0.0f64, [0.0; 4]);
    let mut radial_exact = true;
    let mut taken = 0;
    while taken < samples {
        let (u, v) = (rng.gen_range(-fiber_bits_max..=fiber_bits_max), rng.gen_range(-fiber_bits_max..=fiber_bits_max));
        let p = [rng.gen_range(-base_r..base_r), rng.gen_range(-base_r..base_r), u as f64 / scale, v as f64 / scale];
        let rw = p[2].hypot(p[3]);
        if p[0].hypot(p[1]) > base_r || rw < 0.05 * model.radii.delta2 || rw > model.radii.delta2 {
            continue;
        }
        taken += 1;
        radial_exact &= radial_identity_exact(m, u, v);
        let d = pulled_back_hat(model, &p)?.max_abs_diff(&eval_omega_a(model, &p)?);
        if d > worst.0 || d.is_nan() {
            worst = (d, p);
        }
    }
    Ok(PushforwardReport {
        m,
        samples,
        max_discrepancy: worst.0,
        worst_sample: worst.1,
        radial_exact,
        tolerance: PUSHFORWARD_TOL,
        passed: radial_exact && worst.0 <= PUSHFORWARD_TOL,
    })
}
