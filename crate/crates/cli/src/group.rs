use anyhow::anyhow;
use serde_json::{json, Value};

use orbires::groups::{builtin, generate_group, stratum_class, ElementClass, GroupSpec, UnitaryGroup, DEFAULT_MAX_ORDER};
use orbires::invariants::{fundamental_invariants, molien_series, reynolds_rank};
use orbires::isotropy::induced_cyclic_data;

use crate::report::{Check, Outcome};
use crate::{GroupSource, Inputs};

/// Highest degree for the Molien versus Reynolds-rank cross-check.
const RANK_CHECK_DEGREE: usize = 8;

pub fn load(src: &GroupSource, inputs: &mut Inputs) -> anyhow::Result<UnitaryGroup> {
    if let Some(name) = &src.builtin {
        return builtin::by_name(name).ok_or_else(|| {
            let known = [builtin::NAMES.as_slice(), builtin::FAMILIES.as_slice()].concat().join(", ");
            anyhow!(orbires::Error::InvalidSpec(format!("unknown built-in group '{name}' (known: {known})")))
        });
    }
    let path = src.file.as_ref().ok_or_else(|| anyhow!("no group given"))?;
    let spec: GroupSpec = inputs.read_json(path)?;
    Ok(spec.build()?)
}

/// Γ* as a group in its own right.
fn reflection_group(g: &UnitaryGroup) -> orbires::Result<UnitaryGroup> {
    let gens: Vec<_> = g.reflections().into_iter().map(|i| g.element(i).matrix.clone()).collect();
    generate_group(&gens, DEFAULT_MAX_ORDER)
}

fn structure(g: &UnitaryGroup) -> (Value, Vec<Check>, Vec<String>) {
    let classes = g.classes();
    let count = |f: fn(&ElementClass) -> bool| classes.iter().filter(|c| f(c)).count();
    let reflections = count(|c| c.is_reflection());
    let free = count(|c| matches!(c, ElementClass::FreeActing));
    let star = g.gamma_star();
    let prime = g.gamma_prime();
    let stratum = stratum_class(g);
    let cyclic = induced_cyclic_data(g);
    let payload = json!({
        "order": g.order(),
        "conductor": g.conductor(),
        "abelian": g.is_abelian(),
        "special_unitary": g.in_special_unitary(),
        "stratum": stratum,
        "elements": { "identity": 1, "reflections": reflections, "free_acting": free },
        "reflection_lines": g.reflection_lines().len(),
        "gamma_star": { "order": star.order(), "normal": star.normal, "whole_group": star.order() == g.order() },
        "gamma_prime": {
            "order": prime.order(),
            "trivial": prime.is_trivial(),
            "abelian": prime.abelian,
            "cyclic": prime.is_cyclic(),
            "invariant_factors": prime.invariant_factors,
        },
        "cyclic_data": match &cyclic {
            Ok(d) => json!(d),
            Err(e) => json!({ "unavailable": e.to_string() }),
        },
    });
    let checks = vec![
        Check::exact("lagrange |G| = |Γ*|·|Γ'|", g.order() == star.order() * prime.order())
            .number("group", g.order())
            .number("gamma_star", star.order())
            .number("gamma_prime", prime.order()),
        Check::exact("Γ* is normal", star.normal),
        Check::exact("element classes partition the group", 1 + reflections + free == g.order()),
    ];
    let summary = vec![
        format!("order {} (conductor {}), stratum {}", g.order(), g.conductor(), json!(stratum).as_str().unwrap_or("?")),
        format!("{reflections} reflections on {} lines, {free} free-acting elements", g.reflection_lines().len()),
        format!(
            "Γ* of order {}{}, Γ' of order {}{}",
            star.order(),
            if star.order() == g.order() { " (whole group)" } else { "" },
            prime.order(),
            if prime.is_trivial() { " (trivial)" } else { "" }
        ),
    ];
    (payload, checks, summary)
}

pub fn classify(g: &UnitaryGroup) -> anyhow::Result<Outcome> {
    let (payload, checks, summary) = structure(g);
    Ok(Outcome { payload, checks, summary })
}

pub fn invariants(g: &UnitaryGroup, degree: usize) -> anyhow::Result<Outcome> {
    let (mut payload, mut checks, mut summary) = structure(g);
    let molien = molien_series(g, degree)?;
    let star = reflection_group(g)?;
    let basis = fundamental_invariants(&star)?;
    let (d1, d2) = basis.degrees;
    let r = star.reflections().len() as u32;
    payload["molien"] = json!(molien);
    payload["invariants"] = json!({
        "of": "gamma_star",
        "f": basis.f,
        "g": basis.g,
        "f_text": basis.f.to_string(),
        "g_text": basis.g.to_string(),
        "degrees": [d1, d2],
    });
    checks.push(
        Check::exact("d1·d2 = |Γ*|", d1 * d2 == star.order() as u32)
            .number("d1", d1)
            .number("d2", d2)
            .number("gamma_star", star.order()),
    );
    checks.push(Check::exact("d1 + d2 = reflections + 2", d1 + d2 == r + 2).number("reflections", r));
    let top = degree.min(RANK_CHECK_DEGREE);
    let ranks: Vec<usize> = (0..=top as u32).map(|d| reynolds_rank(g, d)).collect();
    let agree = ranks.iter().zip(&molien).all(|(&k, &c)| k as u64 == c);
    checks.push(
        Check::new("Molien coefficients equal Reynolds ranks", agree, format!("degrees 0..={top}"))
            .number("reynolds_ranks", &ranks),
    );
    summary.push(format!("invariants of Γ*: f = {}, g = {} (degrees {d1}, {d2})", basis.f, basis.g));
    summary.push(format!("Molien series of G to degree {degree}: {molien:?}"));
    Ok(Outcome { payload, checks, summary })
}
