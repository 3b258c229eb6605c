use std::path::Path;

use clap::{Args, ValueEnum};
use serde::Serialize;
use serde_json::json;

use orbires::symp::blowup::blowup_model_check;
use orbires::symp::ddbar::PSD_TOL;
use orbires::symp::forms::{eval_omega0, eval_omega_a, eval_omega_a_glued, model_acs, Form2At, LocalModel, Point};
use orbires::symp::gluing::{glue_forms, ProblemFile};
use orbires::symp::pushforward::{eval_omega_hat, manifold_model, pushforward_check};
use orbires::symp::tameness::{tameness_min, Region, TamenessCertificate};
use orbires::unitary::standard_j;

use crate::report::{Check, Outcome};
use crate::Inputs;

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FormKind {
    /// The smoothed orbifold form ω_a.
    OmegaA,
    /// The flat cone form ω⁰.
    Omega0,
    /// ω_a glued back to ω⁰ beyond δ₂.
    Glued,
    /// The manifold-side form ω̂_a.
    Hat,
}

#[derive(Args, Serialize)]
pub struct TamenessArgs {
    /// flat, curved, degenerate-fixture, or a model JSON file.
    #[arg(long)]
    model: String,
    #[arg(long, default_value_t = 2)]
    m: u32,
    #[arg(long, default_value_t = 0.1)]
    a: f64,
    /// Curvature of the curved model.
    #[arg(long, default_value_t = 0.7)]
    kappa: f64,
    #[arg(long, value_enum, default_value = "omega-a")]
    form: FormKind,
    /// Samples per axis.
    #[arg(long, default_value_t = 20)]
    grid: usize,
}

fn certificate_check(name: &str, cert: &TamenessCertificate) -> Check {
    let region = serde_json::to_value(cert.region).ok().and_then(|v| v["type"].as_str().map(String::from));
    Check::new(
        name,
        cert.tame,
        format!("{} samples, grid {} on {}", cert.samples, cert.grid, region.unwrap_or_default()),
    )
    .number("min_quotient", cert.min_quotient)
    .number("worst_sample", cert.worst_sample)
    .tolerance(cert.tolerance)
}

fn degenerate_fixture(grid: usize) -> anyhow::Result<TamenessCertificate> {
    let omega = |p: &Point| {
        let mut f = Form2At::zero(*p);
        f.add_pair(0, 1, 1.0);
        Ok(f)
    };
    let region = Region::Box { lo: [-1.0; 4], hi: [1.0; 4] };
    Ok(tameness_min(&omega, &|_: &Point| standard_j(), &region, grid)?)
}

fn model_certificate(model: &LocalModel, form: FormKind, grid: usize) -> anyhow::Result<TamenessCertificate> {
    model.validate()?;
    let base_radius = model.base_radius();
    let d2 = model.radii.delta2;
    let cert = match form {
        FormKind::Hat => {
            let manifold = manifold_model(model);
            let region = Region::FiberTube { base_radius, fiber_radius: d2.powi(model.m as i32) };
            tameness_min(&|q: &Point| eval_omega_hat(model, q), &|q: &Point| model_acs(&manifold, q), &region, grid)?
        }
        _ => {
            let eval = |p: &Point| match form {
                FormKind::Omega0 => eval_omega0(model, p),
                FormKind::Glued => eval_omega_a_glued(model, p),
                _ => eval_omega_a(model, p),
            };
            let fiber_radius = if matches!(form, FormKind::Glued) { model.radii.delta0 * 0.9 } else { d2 };
            let region = Region::FiberTube { base_radius, fiber_radius };
            tameness_min(&eval, &|p: &Point| model_acs(model, p), &region, grid)?
        }
    };
    Ok(cert)
}

pub fn tameness(args: &TamenessArgs, inputs: &mut Inputs) -> anyhow::Result<Outcome> {
    let (label, cert) = match args.model.as_str() {
        "degenerate-fixture" => ("degenerate rank-2 fixture".to_string(), degenerate_fixture(args.grid)?),
        "flat" => ("flat".to_string(), model_certificate(&LocalModel::flat(args.m, args.a), args.form, args.grid)?),
        "curved" => (
            format!("curved, κ = {}", args.kappa),
            model_certificate(&LocalModel::curved(args.m, args.a, args.kappa), args.form, args.grid)?,
        ),
        path => {
            let model: LocalModel = inputs.read_json(Path::new(path))?;
            (format!("model file, m = {}, a = {}", model.m, model.a), model_certificate(&model, args.form, args.grid)?)
        }
    };
    let summary = vec![
        format!("model: {label}"),
        format!(
            "{} on {} samples: min quotient {:.6e} (worst at {:?})",
            if cert.tame { "tame" } else { "not tame" },
            cert.samples,
            cert.min_quotient,
            cert.worst_sample
        ),
    ];
    let checks = vec![certificate_check("J-tame on the sampled region", &cert)];
    Ok(Outcome { payload: json!({ "model": label, "certificate": cert }), checks, summary })
}

pub fn gluing(file: &ProblemFile, grid: usize) -> anyhow::Result<Outcome> {
    let problem = file.build()?;
    let out = glue_forms(&problem, grid)?;
    let bound = out.delta * (out.norm_estimate + 1.0);
    let shell = format!("grid {grid} on the ε₂..ε₃ shell");
    let checks = vec![
        Check::new("δ(‖dρ∧β‖ + 1) < C", bound < out.c_estimate, shell)
            .number("delta", out.delta)
            .number("c_estimate", out.c_estimate)
            .number("norm_estimate", out.norm_estimate),
        Check::new("ω₁ vanishes on the ε₁ ball and is semipositive out to ε₂", true, format!("grid {grid} on the ε₂ ball"))
            .tolerance(PSD_TOL),
        certificate_check("glued form J-tame", &out.certificate),
    ];
    let summary = vec![
        format!("radii {:?}", out.radii),
        format!("C = {:.6e}, ‖dρ∧β‖ = {:.6e}, δ = {:.6e}", out.c_estimate, out.norm_estimate, out.delta),
        format!(
            "glued form {} (min quotient {:.6e})",
            if out.certificate.tame { "tame" } else { "not tame" },
            out.certificate.min_quotient
        ),
    ];
    Ok(Outcome { payload: json!({ "problem": file, "outcome": out }), checks, summary })
}

pub fn pushforward(m: u32, a: f64, samples: usize, seed: u64) -> anyhow::Result<Outcome> {
    let report = pushforward_check(&LocalModel::flat(m, a), samples, seed)?;
    let provenance = format!("{samples} seeded samples (seed {seed})");
    let checks = vec![
        Check::new("|w′| = |w|^m on dyadic samples", report.radial_exact, provenance.clone()),
        Check::new("pullback of ω̂_a equals ω_a", report.passed, provenance)
            .number("max_discrepancy", report.max_discrepancy)
            .number("worst_sample", report.worst_sample)
            .tolerance(report.tolerance),
    ];
    let summary = vec![format!("m = {m}, a = {a}: max discrepancy {:.3e}", report.max_discrepancy)];
    Ok(Outcome { payload: json!(report), checks, summary })
}

pub fn blowup(m: u32, lambda: f64, grid: usize, seed: u64) -> anyhow::Result<Outcome> {
    let report = blowup_model_check(m, lambda, grid, seed)?;
    let checks = vec![
        Check::new("closed", report.closedness <= 1e-5, format!("seeded samples (seed {seed})"))
            .number("max_d_omega", report.closedness)
            .tolerance(1e-5),
        Check::new("charts agree on the overlap", report.overlap_discrepancy <= 1e-8, format!("seeded samples (seed {seed})"))
            .number("max_discrepancy", report.overlap_discrepancy)
            .tolerance(1e-8),
        certificate_check("first chart J-tame", &report.charts[0]),
        certificate_check("second chart J-tame", &report.charts[1]),
    ];
    let summary = vec![
        format!("m = {m}, λ = {lambda}: exceptional area {:.6e}", report.exceptional_area),
        format!("closedness {:.3e}, overlap {:.3e}", report.closedness, report.overlap_discrepancy),
    ];
    Ok(Outcome { payload: json!(report), checks, summary })
}
