//! Gluing ω₁ (vanishing near the origin) to a form ω₂ = dβ through a bump
//! ρ(|x|): ω = ω₁ + δ(dρ∧β + ρω₂).

use serde::{Deserialize, Serialize};

use super::ddbar::{ddbar_raw, PSD_TOL};
use super::forms::{d_one_form_fd, wedge, Form2At, Point};
use super::profiles::RadialProfile;
use super::tameness::{taming_quotient, tameness_min, Region, TamenessCertificate, TAME_TOL};
use crate::error::{Error, Result};
use crate::unitary::standard_j;

pub type FormFn = Box<dyn Fn(&Point) -> Result<Form2At> + Send + Sync>;
pub type OneFormFn = Box<dyn Fn(&Point) -> [f64; 4] + Send + Sync>;

const VANISH_TOL: f64 = 1e-12;
const PRIMITIVE_TOL: f64 = 1e-5;
const PRIMITIVE_SAMPLES: usize = 200;

pub struct GluingProblem {
    pub radii: [f64; 3],
    pub omega1: FormFn,
    pub omega2: FormFn,
    pub beta: OneFormFn,
}

#[derive(Clone, Debug, Serialize)]
pub struct GluingOutcome {
    pub radii: [f64; 3],
    pub grid: usize,
    pub c_estimate: f64,
    pub norm_estimate: f64,
    pub delta: f64,
    pub certificate: TamenessCertificate,
}

/// δ = C / (2(N + 1)).
pub fn choose_delta(c: f64, norm: f64) -> f64 {
    c / (2.0 * (norm + 1.0))
}

pub fn standard_primitive(p: &Point) -> [f64; 4] {
    [-0.5 * p[1], 0.5 * p[0], -0.5 * p[3], 0.5 * p[2]]
}

pub fn standard_form(p: &Point) -> Result<Form2At> {
    let mut f = Form2At::zero(*p);
    f.add_pair(0, 1, 1.0);
    f.add_pair(2, 3, 1.0);
    Ok(f)
}

fn norm(p: &Point) -> f64 {
    p.iter().map(|v| v * v).sum::<f64>().sqrt()
}

impl GluingProblem {
    pub fn validate(&self) -> Result<()> {
        let [e1, e2, e3] = self.radii;
        if !(0.0 < e1 && e1 < e2 && e2 < e3) {
            return Err(Error::InvalidSpec("radii must satisfy 0 < ε₁ < ε₂ < ε₃".into()));
        }
        Ok(())
    }

    fn rho(&self) -> RadialProfile {
        RadialProfile::RhoBump { lower: self.radii[1], upper: self.radii[2] }
    }

    /// dρ∧β at p.
    pub fn bump_term(&self, p: &Point) -> Form2At {
        let r = norm(p);
        let (_, d1, _) = self.rho().eval(r);
        if d1 == 0.0 || r == 0.0 {
            return Form2At::zero(*p);
        }
        let drho = p.map(|v| d1 * v / r);
        wedge(*p, &drho, &(self.beta)(p))
    }

    pub fn glued(&self, delta: f64, p: &Point) -> Result<Form2At> {
        let rho = self.rho().value(norm(p));
        let mut inner = self.bump_term(p);
        if rho != 0.0 {
            inner = inner.add(&(self.omega2)(p)?.scale(rho));
        }
        Ok((self.omega1)(p)?.add(&inner.scale(delta)))
    }
}

fn quotient(f: &Form2At) -> f64 {
    taming_quotient(&f.matrix(), &standard_j())
}

fn fail(check: &str, p: &Point, value: f64) -> Error {
    Error::Gluing { check: check.to_string(), point: *p, value }
}

pub fn glue_forms(problem: &GluingProblem, grid: usize) -> Result<GluingOutcome> {
    problem.validate()?;
    let [e1, e2, e3] = problem.radii;
    let origin = [0.0; 4];

    for p in (Region::Ball { center: origin, radius: e1 }).samples(grid) {
        let v = (problem.omega1)(&p)?.max_abs();
        if v > VANISH_TOL {
            return Err(fail("omega1 vanishes on the inner ball", &p, v));
        }
    }
    for p in (Region::Shell { center: origin, inner: e1, outer: e2 }).samples(grid) {
        let q = quotient(&(problem.omega1)(&p)?);
        if q < PSD_TOL {
            return Err(fail("omega1 semipositive on the middle annulus", &p, q));
        }
    }
    let outer = Region::Shell { center: origin, inner: e2, outer: e3 }.samples(grid);
    let mut c = f64::INFINITY;
    let mut n: f64 = 0.0;
    for p in &outer {
        let q = quotient(&(problem.omega1)(p)?);
        if !(q > TAME_TOL) {
            return Err(fail("omega1 positive on the outer annulus", p, q));
        }
        c = c.min(q);
        n = n.max(problem.bump_term(p).operator_norm());
    }
    let ball = Region::Ball { center: origin, radius: e3 };
    let ball_pts = ball.samples(grid);
    let stride = (ball_pts.len() / PRIMITIVE_SAMPLES).max(1);
    for p in ball_pts.iter().step_by(stride) {
        let d = d_one_form_fd(&*problem.beta, p, 1e-3);
        let v = d.max_abs_diff(&(problem.omega2)(p)?);
        if v > PRIMITIVE_TOL {
            return Err(fail("d beta equals omega2", p, v));
        }
    }

    let delta = choose_delta(c, n);
    let glued = |p: &Point| problem.glued(delta, p);
    let certificate = tameness_min(&glued, &|_: &Point| standard_j(), &ball, grid)?;
    Ok(GluingOutcome { radii: problem.radii, grid, c_estimate: c, norm_estimate: n, delta, certificate })
}

/// The ω₁ = (i/2)∂∂̄(h∘F̂) instance near a corner point, where
/// F̂ = Σ G_j(|ζ_j|²) is the smoothed flat potential written in manifold
/// coordinates ζ_j = w_j^{m_j}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub orders: [u32; 2],
    pub a: f64,
    pub delta2: f64,
    pub t0: f64,
    pub t1: f64,
    pub radii: [f64; 3],
    #[serde(default = "default_step")]
    pub step: f64,
}

fn default_step() -> f64 {
    5e-4
}

impl PipelineConfig {
    pub fn standard(radii: [f64; 3]) -> Self {
        PipelineConfig { orders: [2, 2], a: 0.01, delta2: 0.3, t0: 1.5625, t1: 3.0625, radii, step: default_step() }
    }

    pub fn configurations() -> [PipelineConfig; 3] {
        [Self::standard([0.8, 3.3, 4.0]), Self::standard([1.0, 3.5, 4.5]), Self::standard([0.6, 3.2, 3.8])]
    }

    pub fn potential(&self, p: &Point) -> f64 {
        let mut total = 0.0;
        for (j, &m) in self.orders.iter().enumerate() {
            let y = p[2 * j] * p[2 * j] + p[2 * j + 1] * p[2 * j + 1];
            let x = y.powf(1.0 / m as f64);
            total += RadialProfile::Glued { m, a: self.a, delta2: self.delta2 }.value(x);
        }
        total
    }

    pub fn omega1(&self, p: &Point) -> Form2At {
        let h = RadialProfile::HRamp { t0: self.t0, t1: self.t1 };
        let composite = |q: &Point| h.value(self.potential(q));
        ddbar_raw(&composite, p, self.step)
    }

    pub fn problem(&self) -> Result<GluingProblem> {
        if self.orders.contains(&0) || !(self.a > 0.0) || !(self.delta2 > 0.0) || !(self.t1 > self.t0) {
            return Err(Error::InvalidSpec("pipeline needs positive orders, a, δ₂ and t0 < t1".into()));
        }
        let cfg = *self;
        Ok(GluingProblem {
            radii: self.radii,
            omega1: Box::new(move |p| Ok(cfg.omega1(p))),
            omega2: Box::new(standard_form),
            beta: Box::new(standard_primitive),
        })
    }
}

/// ω₁ = (i/2)∂∂̄h(|x|²) for a ramp that is linear beyond ε₂².
pub fn ramp_problem(radii: [f64; 3]) -> GluingProblem {
    let [e1, e2, _] = radii;
    let h = RadialProfile::HRamp { t0: e1 * e1 * 1.05, t1: e2 * e2 * 0.95 };
    GluingProblem {
        radii,
        omega1: Box::new(move |p| {
            let t: f64 = p.iter().map(|v| v * v).sum();
            let (_, d1, d2) = h.eval(t);
            let mut f = Form2At::zero(*p);
            f.add_pair(0, 1, d1);
            f.add_pair(2, 3, d1);
            let grad = p.map(|v| 2.0 * v);
            let jgrad = [-grad[1], grad[0], -grad[3], grad[2]];
            Ok(f.add(&wedge(*p, &grad, &jgrad).scale(0.25 * d2)))
        }),
        omega2: Box::new(standard_form),
        beta: Box::new(standard_primitive),
    }
}

/// A gluing problem as read from disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemFile {
    Pipeline(PipelineConfig),
    Ramp { radii: [f64; 3] },
}

impl ProblemFile {
    pub fn radii(&self) -> [f64; 3] {
        match self {
            ProblemFile::Pipeline(cfg) => cfg.radii,
            ProblemFile::Ramp { radii } => *radii,
        }
    }

    pub fn build(&self) -> Result<GluingProblem> {
        let problem = match self {
            ProblemFile::Pipeline(cfg) => cfg.problem()?,
            ProblemFile::Ramp { radii } => ramp_problem(*radii),
        };
        problem.validate()?;
        Ok(problem)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_formula() {
        assert_eq!(choose_delta(1.0, 1.0), 0.25);
        assert_eq!(choose_delta(1.0, 3.0), 0.5 * choose_delta(1.0, 1.0));
    }

    #[test]
    fn ramp_gluing_succeeds() {
        let problem = ramp_problem([1.0, 1.5, 2.0]);
        let out = glue_forms(&problem, 10).unwrap();
        assert!(out.delta * (out.norm_estimate + 1.0) < out.c_estimate);
        assert!(out.certificate.tame, "{:?}", out.certificate);
    }

    #[test]
    fn ramp_form_matches_ddbar() {
        let problem = ramp_problem([1.0, 1.5, 2.0]);
        let h = RadialProfile::HRamp { t0: 1.05, t1: 1.5 * 1.5 * 0.95 };
        let pot = |q: &Point| h.value(q.iter().map(|v| v * v).sum());
        let p = [0.9, 0.4, -0.3, 0.5];
        let fd = ddbar_raw(&pot, &p, 1e-4);
        assert!((problem.omega1)(&p).unwrap().max_abs_diff(&fd) < 1e-5);
    }

    #[test]
    fn non_vanishing_inner_form_rejected() {
        let mut problem = ramp_problem([1.0, 1.5, 2.0]);
        problem.omega1 = Box::new(standard_form);
        assert!(matches!(glue_forms(&problem, 6), Err(Error::Gluing { .. })));
    }

    #[test]
    fn primitive_is_exact() {
        let p = [0.3, -0.7, 1.1, 0.2];
        let d = d_one_form_fd(&standard_primitive, &p, 1e-3);
        assert!(d.max_abs_diff(&standard_form(&p).unwrap()) < 1e-12);
    }

    #[test]
    fn problem_file_round_trip() {
        let text = r#"{"kind":"pipeline","orders":[2,2],"a":0.01,"delta2":0.3,"t0":1.5625,"t1":3.0625,"radii":[0.8,3.3,4.0]}"#;
        let file: ProblemFile = serde_json::from_str(text).unwrap();
        assert_eq!(file, ProblemFile::Pipeline(PipelineConfig::standard([0.8, 3.3, 4.0])));
        let ramp: ProblemFile = serde_json::from_str(r#"{"kind":"ramp","radii":[2.0,1.0,3.0]}"#).unwrap();
        assert!(matches!(ramp.build(), Err(Error::InvalidSpec(_))));
    }
}
