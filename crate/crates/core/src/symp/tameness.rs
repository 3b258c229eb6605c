//! Sampled tameness certificates: min over a grid of the smallest eigenvalue
//! of ½(ΩJ + (ΩJ)ᵀ).

use nalgebra::Matrix4;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::forms::{Form2At, Point};
use crate::error::{Error, Result};

pub const TAME_TOL: f64 = 1e-12;
const ACS_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Region {
    Box { lo: Point, hi: Point },
    Ball { center: Point, radius: f64 },
    Shell { center: Point, inner: f64, outer: f64 },
    /// Points with base coordinates in a disc and 0 < |w| ≤ fiber_radius.
    FiberTube { base_radius: f64, fiber_radius: f64 },
    /// Like FiberTube but with inner ≤ |w| ≤ outer.
    FiberShell { base_radius: f64, inner: f64, outer: f64 },
}

impl Region {
    /// Deterministic samples for resolution `n` per axis.
    pub fn samples(&self, n: usize) -> Vec<Point> {
        let n = n.max(1);
        let cell = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * (k as f64 + 0.5) / n as f64;
        match *self {
            Region::Box { lo, hi } => cube(n, |i, k| cell(lo[i], hi[i], k)).collect(),
            Region::Ball { center, radius } => cube(n, |i, k| cell(center[i] - radius, center[i] + radius, k))
                .filter(|p| dist(p, &center) <= radius)
                .collect(),
            Region::Shell { center, inner, outer } => {
                let mut pts: Vec<Point> = cube(n, |i, k| cell(center[i] - outer, center[i] + outer, k))
                    .filter(|p| (inner..=outer).contains(&dist(p, &center)))
                    .collect();
                if pts.is_empty() {
                    pts = shell_sphere_points(center, 0.5 * (inner + outer), n);
                }
                pts
            }
            Region::FiberTube { base_radius, fiber_radius } => tube(n, base_radius, |k| fiber_radius * (k as f64 + 1.0) / n as f64),
            Region::FiberShell { base_radius, inner, outer } => tube(n, base_radius, |k| {
                if n == 1 {
                    outer
                } else {
                    inner + (outer - inner) * k as f64 / (n - 1) as f64
                }
            }),
        }
    }
}

fn dist(p: &Point, c: &Point) -> f64 {
    p.iter().zip(c.iter()).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

fn cube<'a, F: Fn(usize, usize) -> f64 + 'a>(n: usize, coord: F) -> impl Iterator<Item = Point> + 'a {
    (0..n.pow(4)).map(move |idx| {
        let ks = [idx % n, (idx / n) % n, (idx / (n * n)) % n, idx / (n * n * n)];
        [coord(0, ks[0]), coord(1, ks[1]), coord(2, ks[2]), coord(3, ks[3])]
    })
}

fn shell_sphere_points(center: Point, r: f64, n: usize) -> Vec<Point> {
    let mut pts = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let a = std::f64::consts::FRAC_PI_2 * (i as f64 + 0.5) / n as f64;
            let t = std::f64::consts::TAU * j as f64 / n as f64;
            pts.push([
                center[0] + r * a.cos() * t.cos(),
                center[1] + r * a.cos() * t.sin(),
                center[2] + r * a.sin() * t.cos(),
                center[3] + r * a.sin() * t.sin(),
            ]);
        }
    }
    pts
}

/// Base grid of n² cell centres filtered to the disc, times a polar fiber
/// grid with n radii and n angles.
fn tube(n: usize, base_radius: f64, radius: impl Fn(usize) -> f64) -> Vec<Point> {
    let mut pts = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let x = base_radius * (2.0 * (i as f64 + 0.5) / n as f64 - 1.0);
            let y = base_radius * (2.0 * (j as f64 + 0.5) / n as f64 - 1.0);
            if x.hypot(y) > base_radius {
                continue;
            }
            for k in 0..n {
                let r = radius(k);
                for l in 0..n {
                    let t = std::f64::consts::TAU * l as f64 / n as f64;
                    pts.push([x, y, r * t.cos(), r * t.sin()]);
                }
            }
        }
    }
    pts
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TamenessCertificate {
    pub region: Region,
    pub grid: usize,
    pub samples: usize,
    pub min_quotient: f64,
    pub tame: bool,
    pub tolerance: f64,
    pub worst_sample: Point,
}

/// Smallest eigenvalue of the symmetric part of ΩJ.
pub fn taming_quotient(omega: &Matrix4<f64>, j: &Matrix4<f64>) -> f64 {
    let s = omega * j;
    let sym = (s + s.transpose()) * 0.5;
    sym.symmetric_eigenvalues().min()
}

pub fn check_acs(j: &Matrix4<f64>, index: usize) -> Result<()> {
    let residual = (j * j + Matrix4::identity()).abs().max();
    if residual > ACS_TOL || !residual.is_finite() {
        return Err(Error::NotAlmostComplex { index, residual });
    }
    Ok(())
}

/// Certifies tameness on an explicit list of samples.
pub fn tameness_on_points<W, J>(omega: &W, acs: &J, points: &[Point]) -> Result<(f64, usize)>
where
    W: Fn(&Point) -> Result<Form2At> + Sync + ?Sized,
    J: Fn(&Point) -> Matrix4<f64> + Sync + ?Sized,
{
    if points.is_empty() {
        return Err(Error::Precondition("empty sample set".into()));
    }
    let quotients: Vec<Result<f64>> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let j = acs(p);
            check_acs(&j, i)?;
            let q = taming_quotient(&omega(p)?.matrix(), &j);
            Ok(if q.is_nan() { f64::NEG_INFINITY } else { q })
        })
        .collect();
    let mut best = (f64::INFINITY, 0usize);
    for (i, q) in quotients.into_iter().enumerate() {
        let q = q?;
        if q < best.0 {
            best = (q, i);
        }
    }
    Ok(best)
}

pub fn tameness_min<W, J>(omega: &W, acs: &J, region: &Region, grid: usize) -> Result<TamenessCertificate>
where
    W: Fn(&Point) -> Result<Form2At> + Sync + ?Sized,
    J: Fn(&Point) -> Matrix4<f64> + Sync + ?Sized,
{
    let points = region.samples(grid);
    let (min_quotient, idx) = tameness_on_points(omega, acs, &points)?;
    Ok(TamenessCertificate {
        region: *region,
        grid,
        samples: points.len(),
        min_quotient,
        tame: min_quotient > TAME_TOL,
        tolerance: TAME_TOL,
        worst_sample: points[idx],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symp::forms::{eval_omega_a, model_acs, LocalModel};
    use crate::unitary::standard_j;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn omega0(p: &Point) -> Result<Form2At> {
        let mut f = Form2At::zero(*p);
        f.add_pair(0, 1, 1.0);
        f.add_pair(2, 3, 1.0);
        Ok(f)
    }

    #[test]
    fn standard_pair_has_quotient_one() {
        let region = Region::Ball { center: [0.0; 4], radius: 1.0 };
        let c = tameness_min(&omega0, &|_: &Point| standard_j(), &region, 6).unwrap();
        assert!((c.min_quotient - 1.0).abs() < 1e-14);
        assert!(c.tame);
    }

    #[test]
    fn rank_two_form_is_not_tame() {
        let dxdy = |p: &Point| -> Result<Form2At> {
            let mut f = Form2At::zero(*p);
            f.add_pair(0, 1, 1.0);
            Ok(f)
        };
        let region = Region::Box { lo: [-1.0; 4], hi: [1.0; 4] };
        let c = tameness_min(&dxdy, &|_: &Point| standard_j(), &region, 3).unwrap();
        assert!(c.min_quotient.abs() < 1e-14);
        assert!(!c.tame);
    }

    #[test]
    fn non_almost_complex_rejected() {
        let region = Region::Box { lo: [0.0; 4], hi: [1.0; 4] };
        let r = tameness_min(&omega0, &|_: &Point| Matrix4::identity(), &region, 2);
        assert!(matches!(r, Err(Error::NotAlmostComplex { index: 0, .. })));
    }

    #[test]
    fn eigenvalue_matches_direct_minimisation() {
        let model = LocalModel::curved(2, 0.1, 0.5);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for k in 0..10 {
            let p = [0.1 * k as f64 - 0.5, 0.2, 0.05 + 0.01 * k as f64, -0.03];
            let om = eval_omega_a(&model, &p).unwrap().matrix();
            let j = model_acs(&model, &p);
            let q = taming_quotient(&om, &j);
            let mut best = f64::INFINITY;
            for _ in 0..1000 {
                let u = nalgebra::Vector4::from_fn(|_, _| rng.gen_range(-1.0..1.0)).normalize();
                best = best.min((u.transpose() * om * j * u)[0]);
            }
            assert!(best >= q - 1e-12);
            assert!(best <= q + 0.2 * q.abs().max(1.0));
        }
    }

    #[test]
    fn tube_excludes_surface() {
        let pts = Region::FiberTube { base_radius: 1.0, fiber_radius: 0.1 }.samples(4);
        assert!(pts.iter().all(|p| p[2].hypot(p[3]) > 0.0 && p[0].hypot(p[1]) <= 1.0));
        assert_eq!(pts.len(), 4 * 16 * 3);
    }
}
