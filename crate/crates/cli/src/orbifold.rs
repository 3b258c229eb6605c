use anyhow::anyhow;
use serde_json::json;

use orbires::groups::stratum_class;
use orbires::isotropy::{builtin_mapping_torus, builtin_product, validate_spec, OrbifoldSpec, OrbifoldSpecFile};
use orbires::resolution::{abelianize, euler_char_resolution, hj_resolve, mapping_torus_pi1, resolution_betti};

use crate::report::{Check, Outcome};
use crate::{Example, Inputs, OrbifoldArgs};

/// Monodromy of the mapping-torus example.
const MINUS_IDENTITY: [[i64; 2]; 2] = [[-1, 0], [0, -1]];

pub fn singularity(m: u64, q: u64) -> anyhow::Result<Outcome> {
    let chain = hj_resolve(m, q)?;
    let curves = chain.curves();
    let payload = json!({
        "m": m,
        "q": q,
        "chain": chain.coeffs,
        "curves": curves,
        "intersection_matrix": chain.intersection_matrix(),
        "leading_minors": chain.negated_minors().iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "exceptional_betti": [1, 0, curves],
    });
    let checks = vec![
        Check::exact("chain reconstructs m/q", chain.reconstruct() == (m, q)),
        Check::exact("intersection matrix negative definite", chain.is_negative_definite()),
    ];
    let summary = vec![
        format!("1/{m}({}, {q}): chain {:?}", 1, chain.coeffs),
        format!("{curves} exceptional curves"),
    ];
    Ok(Outcome { payload, checks, summary })
}

fn load(args: &OrbifoldArgs, inputs: &mut Inputs) -> anyhow::Result<OrbifoldSpec> {
    match (&args.source.spec, args.source.example) {
        (Some(path), _) => {
            let file: OrbifoldSpecFile = inputs.read_json(path)?;
            Ok(file.build()?)
        }
        (None, Some(Example::MappingTorus)) => Ok(builtin_mapping_torus()),
        (None, Some(Example::Product)) => Ok(builtin_product(&args.m, &args.m2, args.symmetric)?),
        (None, None) => Err(anyhow!("give --spec or --example")),
    }
}

pub fn resolve(args: &OrbifoldArgs, inputs: &mut Inputs) -> anyhow::Result<Outcome> {
    let spec = load(args, inputs)?;
    let validation = validate_spec(&spec);
    if !validation.valid {
        let issues = [validation.structural.as_slice(), validation.semantic.as_slice()].concat();
        return Err(anyhow!(orbires::Error::InvalidSpec(issues.join("; "))));
    }
    let report = resolution_betti(&spec)?;
    let euler = euler_char_resolution(&spec)?;
    let b = report.profile.betti;
    let mut payload = json!({
        "base_betti": spec.base_betti,
        "isolated_points": spec.isolated_points.iter().map(|p| json!({ "label": p.label, "group_order": p.group.order() })).collect::<Vec<_>>(),
        "corner_points": spec.corner_points.iter().map(|p| json!({
            "label": p.label,
            "group_order": p.group.order(),
            "stratum": stratum_class(&p.group),
            "incident_surfaces": p.incident_surfaces,
        })).collect::<Vec<_>>(),
        "surfaces": spec.surfaces,
        "delta": report.delta,
        "contributions": report.contributions,
        "profile": report.profile,
        "euler_characteristic": euler,
        "validation": validation,
    });
    let checks = vec![Check::exact("specification valid", validation.valid)];
    let mut summary = vec![
        format!(
            "{} isolated points, {} surfaces, {} corner points",
            spec.isolated_points.len(),
            spec.surfaces.len(),
            spec.corner_points.len()
        ),
        format!("Δ = {:?}", report.delta),
        format!("{} contributing points", report.contributions.len()),
    ];
    for c in &report.contributions {
        let (e0, e1, e2) = c.exceptional_betti;
        summary.push(format!("  {} ({}, |G| = {}): b(E) = ({e0}, {e1}, {e2})", c.label, c.kind, c.group_order));
    }
    summary.push(format!("Betti numbers of the resolution {b:?}"));
    if matches!(args.source.example, Some(Example::MappingTorus)) && args.source.spec.is_none() {
        let h1 = abelianize(&mapping_torus_pi1(MINUS_IDENTITY)?);
        payload["orbifold_h1"] = json!({ "free_rank": h1.free_rank, "torsion": h1.torsion, "text": h1.to_string() });
        summary.push(format!("H1 of the mapping torus of -I: {h1}"));
    }
    Ok(Outcome { payload, checks, summary })
}
