//! (i/2)∂∂̄ of scalar potentials by central differences, and semipositive
//! composition with convex increasing profiles.

use num_complex::Complex64;
use serde::Serialize;

use super::forms::{Form2At, Point};
use super::profiles::RadialProfile;
use super::tameness::taming_quotient;
use crate::error::{Error, Result};
use crate::unitary::standard_j;

pub const PSD_TOL: f64 = -1e-8;
const STABILITY_TOL: f64 = 1e-4;

pub type Hermitian2 = [[Complex64; 2]; 2];

fn shifted(p: &Point, moves: &[(usize, f64)]) -> Point {
    let mut q = *p;
    for &(k, d) in moves {
        q[k] += d;
    }
    q
}

/// Real Hessian of F by central differences.
pub fn real_hessian_fd<F: Fn(&Point) -> f64 + ?Sized>(f: &F, p: &Point, h: f64) -> [[f64; 4]; 4] {
    let mut hess = [[0.0; 4]; 4];
    let f0 = f(p);
    for i in 0..4 {
        let fp = f(&shifted(p, &[(i, h)]));
        let fm = f(&shifted(p, &[(i, -h)]));
        hess[i][i] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in (i + 1)..4 {
            let pp = f(&shifted(p, &[(i, h), (j, h)]));
            let pm = f(&shifted(p, &[(i, h), (j, -h)]));
            let mp = f(&shifted(p, &[(i, -h), (j, h)]));
            let mm = f(&shifted(p, &[(i, -h), (j, -h)]));
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    hess
}

/// Matrix of ∂²F/∂z_j∂z̄_k from the real Hessian.
pub fn complex_hessian(r: &[[f64; 4]; 4]) -> Hermitian2 {
    let mut h = [[Complex64::new(0.0, 0.0); 2]; 2];
    for j in 0..2 {
        for k in 0..2 {
            let (xj, yj, xk, yk) = (2 * j, 2 * j + 1, 2 * k, 2 * k + 1);
            h[j][k] = Complex64::new(r[xj][xk] + r[yj][yk], r[xj][yk] - r[yj][xk]) * 0.25;
        }
    }
    h
}

/// The real 2-form (i/2)Σ h_jk dz_j∧dz̄_k.
pub fn hermitian_to_form(point: Point, h: &Hermitian2) -> Form2At {
    let unit = |a: usize| -> [Complex64; 2] {
        let mut v = [Complex64::new(0.0, 0.0); 2];
        v[a / 2] = if a % 2 == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
        v
    };
    let mut f = Form2At::zero(point);
    for a in 0..4 {
        for b in (a + 1)..4 {
            let (u, v) = (unit(a), unit(b));
            let mut s = Complex64::new(0.0, 0.0);
            for j in 0..2 {
                for k in 0..2 {
                    s += u[j] * h[j][k] * v[k].conj();
                }
            }
            f.add_pair(a, b, -s.im);
        }
    }
    f
}

/// (i/2)∂∂̄F at step h without a stability check.
pub fn ddbar_raw<F: Fn(&Point) -> f64 + ?Sized>(f: &F, p: &Point, h: f64) -> Form2At {
    hermitian_to_form(*p, &complex_hessian(&real_hessian_fd(f, p, h)))
}

/// (i/2)∂∂̄F, rejected when steps h and h/2 disagree by more than ten
/// times the stability tolerance.
pub fn ddbar_fd<F: Fn(&Point) -> f64 + ?Sized>(f: &F, p: &Point, h: f64) -> Result<Form2At> {
    if !(h > 0.0) {
        return Err(Error::Precondition("finite-difference step must be positive".into()));
    }
    let coarse = ddbar_raw(f, p, h);
    let fine = ddbar_raw(f, p, 0.5 * h);
    let disagreement = coarse.max_abs_diff(&fine);
    let scale = 1.0 + fine.max_abs();
    if !disagreement.is_finite() || disagreement > 10.0 * STABILITY_TOL * scale {
        return Err(Error::Unstable { h, disagreement });
    }
    Ok(fine)
}

/// Gradient ∂F/∂z_j = ½(F_x − iF_y).
pub fn dz_fd<F: Fn(&Point) -> f64 + ?Sized>(f: &F, p: &Point, h: f64) -> [Complex64; 2] {
    let g = |k: usize| (f(&shifted(p, &[(k, h)])) - f(&shifted(p, &[(k, -h)]))) / (2.0 * h);
    [Complex64::new(g(0), -g(1)) * 0.5, Complex64::new(g(2), -g(3)) * 0.5]
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Composition {
    pub form: Form2At,
    pub min_eigenvalue: f64,
    pub psd: bool,
}

/// (i/2)[h″(F)∂F∧∂̄F + h′(F)∂∂̄F] with the PSD flag measured against J₀.
pub fn semipositive_compose<F: Fn(&Point) -> f64 + ?Sized>(
    f: &F,
    profile: &RadialProfile,
    p: &Point,
    h: f64,
) -> Result<Composition> {
    let value = f(p);
    profile.check_monotone_convex(value)?;
    let (_, d1, d2) = profile.eval(value);
    let hess = ddbar_raw(f, p, h);
    let form = if d2 == 0.0 {
        hess.scale(d1)
    } else {
        let g = dz_fd(f, p, h);
        let mut outer = [[Complex64::new(0.0, 0.0); 2]; 2];
        for j in 0..2 {
            for k in 0..2 {
                outer[j][k] = g[j] * g[k].conj();
            }
        }
        hermitian_to_form(*p, &outer).scale(d2).add(&hess.scale(d1))
    };
    let min_eigenvalue = taming_quotient(&form.matrix(), &standard_j());
    Ok(Composition { form, min_eigenvalue, psd: min_eigenvalue >= PSD_TOL })
}

pub fn euclidean_potential(p: &Point) -> f64 {
    p.iter().map(|v| v * v).sum()
}

/// |z|² + |w|² + H(|w|²) with H the cut-off correction of the f profile.
pub fn kahler_potential(m: u32, a: f64, delta2: f64) -> impl Fn(&Point) -> f64 + Sync + Copy {
    move |p: &Point| {
        let x = p[2] * p[2] + p[3] * p[3];
        p[0] * p[0] + p[1] * p[1] + RadialProfile::Glued { m, a, delta2 }.value(x)
    }
}

/// |z|² + (|w|^{2/m} + a)^{1/m}.
pub fn fhat_inline(m: u32, a: f64) -> impl Fn(&Point) -> f64 + Sync + Copy {
    move |p: &Point| {
        let y = p[2] * p[2] + p[3] * p[3];
        p[0] * p[0] + p[1] * p[1] + (y.powf(1.0 / m as f64) + a).powf(1.0 / m as f64)
    }
}

/// |z|² + (|w|² + a)^{1/m}.
pub fn fhat_display(m: u32, a: f64) -> impl Fn(&Point) -> f64 + Sync + Copy {
    move |p: &Point| {
        let y = p[2] * p[2] + p[3] * p[3];
        p[0] * p[0] + p[1] * p[1] + (y + a).powf(1.0 / m as f64)
    }
}
