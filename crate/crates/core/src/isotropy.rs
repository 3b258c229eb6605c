//! Isotropy data of a 4-orbifold: isolated points, isotropy surfaces and
//! their intersection points, with validation against the stratification
//! of finite subgroups of U(2) and the set Δ of corner points whose local
//! group is not generated by reflections.

use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::cyclotomic::{root_in_field, roots_of_unity_order, CyclotomicScalar};
use crate::error::{Error, Result};
use crate::groups::{builtin, stratum_class, ElementClass, GroupSpec, Stratum, UnitaryGroup};
use crate::unitary::Mat2;

/// Normal form (m, q) of the action induced by Γ' on the invariant
/// coordinates (z^a, w^b) of Γ*. The sentinel m = 1, q = 0 marks a
/// manifold point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct CyclicActionData {
    pub m: u64,
    pub q: u64,
    /// Orders of the reflection subgroups acting on each eigen-axis.
    pub weights: (u64, u64),
}

fn complex_matrix_diagonalizer(g: &UnitaryGroup) -> Result<Mat2> {
    let n = g.conductor();
    if g.generators().iter().all(|&i| g.element(i).matrix.mat().is_diagonal()) {
        return Ok(Mat2::identity(n));
    }
    let m = roots_of_unity_order(n);
    for e in g.elements() {
        let x = e.matrix.mat();
        if x.is_scalar() {
            continue;
        }
        let eig: Vec<CyclotomicScalar> = (0..m as i64)
            .map(|k| root_in_field(n, m, k))
            .filter(|l| x.sub(&Mat2::identity(n).scale(l)).det().is_zero())
            .collect();
        if eig.len() != 2 {
            continue;
        }
        let cols: Vec<[CyclotomicScalar; 2]> = eig
            .iter()
            .map(|l| {
                let d = x.sub(&Mat2::identity(n).scale(l));
                let row = if !d.e[0][0].is_zero() || !d.e[0][1].is_zero() {
                    &d.e[0]
                } else {
                    &d.e[1]
                };
                [row[1].clone(), -&row[0]]
            })
            .collect();
        return Ok(Mat2::new(
            cols[0][0].clone(),
            cols[1][0].clone(),
            cols[0][1].clone(),
            cols[1][1].clone(),
        ));
    }
    Err(Error::Unsupported(format!(
        "abelian group of order {} is not diagonalizable over Q(ζ_{n})",
        g.order()
    )))
}

/// Exponent pairs (α, β) with P⁻¹ g P = diag(ζ_M^α, ζ_M^β) for each element.
fn diagonal_characters(g: &UnitaryGroup) -> Result<(u64, Vec<(u64, u64)>)> {
    let p = complex_matrix_diagonalizer(g)?;
    let pinv = p.inverse().expect("eigenvector basis is invertible");
    let n = g.conductor();
    let m = roots_of_unity_order(n);
    let mut out = Vec::with_capacity(g.order());
    for e in g.elements() {
        let d = pinv.mul(e.matrix.mat()).mul(&p);
        if !d.is_diagonal() {
            return Err(Error::Unsupported("group is not simultaneously diagonalizable".into()));
        }
        let a = d.e[0][0].root_exponent(m);
        let b = d.e[1][1].root_exponent(m);
        match (a, b) {
            (Some(a), Some(b)) => out.push((a as u64, b as u64)),
            _ => return Err(Error::Unsupported("eigenvalue outside the roots of unity of the field".into())),
        }
    }
    Ok((m as u64, out))
}

fn exponent_order(k: u64, m: u64) -> u64 {
    m / k.gcd(&m)
}

/// The cyclic data of the Γ'-action induced on the invariant coordinates of Γ*.
pub fn induced_cyclic_data(g: &UnitaryGroup) -> Result<CyclicActionData> {
    if !g.is_abelian() {
        return Err(Error::Unsupported(format!(
            "non-abelian group of order {}",
            g.order()
        )));
    }
    if g.order() == 1 {
        return Ok(CyclicActionData { m: 1, q: 0, weights: (1, 1) });
    }
    let (big_m, chars) = diagonal_characters(g)?;
    let a = chars.iter().filter(|&&(_, b)| b == 0).count() as u64;
    let b = chars.iter().filter(|&&(a, _)| a == 0).count() as u64;
    if (a * b) as usize != g.gamma_star().order() {
        return Err(Error::CertificateFailed(format!(
            "reflection subgroup order {} differs from axis weights {a}·{b}",
            g.gamma_star().order()
        )));
    }
    let images: BTreeSet<(u64, u64)> = chars
        .iter()
        .map(|&(x, y)| ((a * x) % big_m, (b * y) % big_m))
        .collect();
    let m = images.len() as u64;
    if m as usize != g.gamma_prime().order() {
        return Err(Error::CertificateFailed("image of Γ' has the wrong order".into()));
    }
    if m == 1 {
        return Ok(CyclicActionData { m: 1, q: 0, weights: (a, b) });
    }
    let gen = images
        .iter()
        .find(|&&(s, t)| exponent_order(s, big_m).lcm(&exponent_order(t, big_m)) == m)
        .ok_or_else(|| Error::Unsupported("Γ' is not cyclic, so it does not act freely".into()))?;
    let s = gen.0 * m / big_m;
    let t = gen.1 * m / big_m;
    if s.gcd(&m) != 1 || t.gcd(&m) != 1 {
        return Err(Error::Unsupported(format!(
            "Γ' acts with weights ({s}, {t}) mod {m}, which is not free off the origin"
        )));
    }
    let s_inv = mod_inverse(s, m).expect("coprime");
    Ok(CyclicActionData {
        m,
        q: (t * s_inv) % m,
        weights: (a, b),
    })
}

pub fn mod_inverse(x: u64, m: u64) -> Option<u64> {
    let e = (x as i64).extended_gcd(&(m as i64));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i64) as u64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Published,
    Computed,
    UserAsserted,
    /// A placeholder value nobody vouched for.
    UserDefault,
}

#[derive(Clone, Debug)]
pub struct IsolatedPoint {
    pub label: String,
    pub group: UnitaryGroup,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Surface {
    pub label: String,
    pub genus: u32,
    #[serde(default = "default_true")]
    pub compact: bool,
    pub isotropy_order: u32,
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug)]
pub struct CornerPoint {
    pub label: String,
    pub group: UnitaryGroup,
    pub incident_surfaces: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct OrbifoldSpec {
    pub base_betti: [u64; 5],
    pub betti_provenance: [Provenance; 5],
    pub isolated_points: Vec<IsolatedPoint>,
    pub surfaces: Vec<Surface>,
    pub corner_points: Vec<CornerPoint>,
}

/// A group given inline or by a built-in name.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupRef {
    Builtin { builtin: String },
    Inline(GroupSpec),
}

impl GroupRef {
    pub fn build(&self) -> Result<UnitaryGroup> {
        match self {
            GroupRef::Builtin { builtin: name } => builtin::by_name(name)
                .ok_or_else(|| Error::InvalidSpec(format!("unknown built-in group '{name}'"))),
            GroupRef::Inline(spec) => spec.build(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PointFile {
    pub label: String,
    pub group: GroupRef,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CornerFile {
    pub label: String,
    pub group: GroupRef,
    pub incident_surfaces: Vec<String>,
}

/// JSON form of an orbifold description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OrbifoldSpecFile {
    pub base_betti: [u64; 5],
    #[serde(default)]
    pub betti_provenance: Option<[Provenance; 5]>,
    #[serde(default)]
    pub isolated_points: Vec<PointFile>,
    #[serde(default)]
    pub surfaces: Vec<Surface>,
    #[serde(default)]
    pub corner_points: Vec<CornerFile>,
}

impl OrbifoldSpecFile {
    pub fn build(&self) -> Result<OrbifoldSpec> {
        let with_label = |label: &str, e: Error| match e {
            Error::Unsupported(s) => Error::Unsupported(format!("{label}: {s}")),
            other => Error::InvalidSpec(format!("{label}: {other}")),
        };
        let isolated_points = self
            .isolated_points
            .iter()
            .map(|p| {
                Ok(IsolatedPoint {
                    label: p.label.clone(),
                    group: p.group.build().map_err(|e| with_label(&p.label, e))?,
                })
            })
            .collect::<Result<_>>()?;
        let corner_points = self
            .corner_points
            .iter()
            .map(|p| {
                Ok(CornerPoint {
                    label: p.label.clone(),
                    group: p.group.build().map_err(|e| with_label(&p.label, e))?,
                    incident_surfaces: p.incident_surfaces.clone(),
                })
            })
            .collect::<Result<_>>()?;
        Ok(OrbifoldSpec {
            base_betti: self.base_betti,
            betti_provenance: self.betti_provenance.unwrap_or([Provenance::UserAsserted; 5]),
            isolated_points,
            surfaces: self.surfaces.clone(),
            corner_points,
        })
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    /// Malformed input such as unknown or duplicate labels.
    pub structural: Vec<String>,
    /// Well-formed input that contradicts the isotropy trichotomy.
    pub semantic: Vec<String>,
}

/// Orders of the pointwise stabilizers of the distinct reflection lines.
fn line_stabilizer_orders(g: &UnitaryGroup) -> Vec<usize> {
    let lines = g.reflection_lines();
    lines
        .iter()
        .map(|l| {
            1 + g
                .classes()
                .iter()
                .filter(|c| matches!(c, ElementClass::ComplexReflection { fixed_line } if fixed_line.same_line(l)))
                .count()
        })
        .collect()
}

pub fn validate_spec(spec: &OrbifoldSpec) -> ValidationReport {
    let mut r = ValidationReport::default();
    let mut labels = BTreeSet::new();
    let all_labels = spec
        .isolated_points
        .iter()
        .map(|p| &p.label)
        .chain(spec.surfaces.iter().map(|s| &s.label))
        .chain(spec.corner_points.iter().map(|c| &c.label));
    for l in all_labels {
        if !labels.insert(l.clone()) {
            r.structural.push(format!("duplicate label '{l}'"));
        }
    }
    let surfaces: BTreeMap<&str, &Surface> = spec.surfaces.iter().map(|s| (s.label.as_str(), s)).collect();
    for s in &spec.surfaces {
        if s.isotropy_order < 2 {
            r.semantic.push(format!("surface '{}' has isotropy order {} < 2", s.label, s.isotropy_order));
        }
        if !s.compact {
            r.semantic.push(format!("surface '{}' does not have compact closure", s.label));
        }
    }
    for p in &spec.isolated_points {
        let st = stratum_class(&p.group);
        if st != Stratum::Sigma0 {
            r.semantic.push(format!("isolated point '{}' has stratum {:?}, expected Sigma0", p.label, st));
        }
    }
    for c in &spec.corner_points {
        let st = stratum_class(&c.group);
        if st == Stratum::SigmaStar {
            r.semantic.push(format!(
                "corner point '{}': all reflections share a single line, so it is not a meeting point of two surfaces",
                c.label
            ));
        } else if st != Stratum::Sigma1 {
            r.semantic.push(format!("corner point '{}' has stratum {:?}, expected Sigma1", c.label, st));
        }
        let mut stabs = line_stabilizer_orders(&c.group);
        if stabs.len() < c.incident_surfaces.len() {
            r.semantic.push(format!(
                "corner point '{}' has {} reflection lines but {} incident surfaces",
                c.label,
                stabs.len(),
                c.incident_surfaces.len()
            ));
        }
        let distinct: BTreeSet<&String> = c.incident_surfaces.iter().collect();
        if distinct.len() != c.incident_surfaces.len() {
            r.structural.push(format!("corner point '{}' lists a surface twice", c.label));
        }
        for s in &c.incident_surfaces {
            match surfaces.get(s.as_str()) {
                None => r.structural.push(format!("corner point '{}' references unknown surface '{s}'", c.label)),
                Some(surf) => {
                    let want = surf.isotropy_order as usize;
                    match stabs.iter().position(|&k| k == want) {
                        Some(i) => {
                            stabs.remove(i);
                        }
                        None => r.semantic.push(format!(
                            "corner point '{}' has no reflection line with stabilizer Z_{want} for surface '{s}'",
                            c.label
                        )),
                    }
                }
            }
        }
    }
    r.valid = r.structural.is_empty() && r.semantic.is_empty();
    r
}

/// Labels of the corner points whose group is not generated by reflections.
pub fn delta_set(spec: &OrbifoldSpec) -> Vec<String> {
    spec.corner_points
        .iter()
        .filter(|c| !c.group.gamma_prime().is_trivial())
        .map(|c| c.label.clone())
        .collect()
}

/// The quotient of the product of a mapping torus of a genus 2 surface with
/// a circle, with its 5 isolated points C₂ = ⟨−I⟩ and 4 Klein-four corners.
pub fn builtin_mapping_torus() -> OrbifoldSpec {
    let minus = builtin::minus_identity();
    let klein = builtin::klein_four();
    let isolated_points = ["C1", "D1", "E1", "F1", "G1"]
        .iter()
        .map(|l| IsolatedPoint {
            label: l.to_string(),
            group: minus.clone(),
        })
        .collect();
    let surface = |label: &str, genus| Surface {
        label: label.into(),
        genus,
        compact: true,
        isotropy_order: 2,
    };
    let corner = |label: &str, other: &str| CornerPoint {
        label: label.into(),
        group: klein.clone(),
        incident_surfaces: vec!["S_phi".into(), other.into()],
    };
    OrbifoldSpec {
        base_betti: [1, 0, 2, 0, 1],
        betti_provenance: [
            Provenance::Published,
            Provenance::Published,
            Provenance::Published,
            Provenance::UserDefault,
            Provenance::Published,
        ],
        isolated_points,
        surfaces: vec![surface("S_phi", 0), surface("S_xi_1", 1), surface("S_xi_2", 1)],
        corner_points: vec![
            corner("A0", "S_xi_1"),
            corner("B0", "S_xi_1"),
            corner("A1", "S_xi_2"),
            corner("B1", "S_xi_2"),
        ],
    }
}

/// Product of two spheres with cone points, or its symmetric square when
/// `symmetric` is set (then only the first list is used).
pub fn builtin_product(cone_points_s: &[u32], cone_points_s2: &[u32], symmetric: bool) -> Result<OrbifoldSpec> {
    if cone_points_s.iter().chain(cone_points_s2).any(|&m| m < 2) {
        return Err(Error::InvalidSpec("cone point orders must be at least 2".into()));
    }
    let surface = |label: String, m: u32| Surface {
        label,
        genus: 0,
        compact: true,
        isotropy_order: m,
    };
    let mut surfaces = Vec::new();
    let mut corners = Vec::new();
    if !symmetric {
        for (j, &m) in cone_points_s.iter().enumerate() {
            surfaces.push(surface(format!("p{j}xS2"), m));
        }
        for (k, &m) in cone_points_s2.iter().enumerate() {
            surfaces.push(surface(format!("Sxq{k}"), m));
        }
        for (j, &m) in cone_points_s.iter().enumerate() {
            for (k, &m2) in cone_points_s2.iter().enumerate() {
                corners.push(CornerPoint {
                    label: format!("p{j}q{k}"),
                    group: builtin::reflection_product(m, m2),
                    incident_surfaces: vec![format!("p{j}xS2"), format!("Sxq{k}")],
                });
            }
        }
        return Ok(OrbifoldSpec {
            base_betti: [1, 0, 2, 0, 1],
            betti_provenance: [Provenance::Computed; 5],
            isolated_points: Vec::new(),
            surfaces,
            corner_points: corners,
        });
    }
    surfaces.push(surface("diagonal".into(), 2));
    for (j, &m) in cone_points_s.iter().enumerate() {
        surfaces.push(surface(format!("p{j}xS"), m));
    }
    for (j, &m) in cone_points_s.iter().enumerate() {
        corners.push(CornerPoint {
            label: format!("p{j}p{j}"),
            group: wreath_group(m),
            incident_surfaces: vec!["diagonal".into(), format!("p{j}xS")],
        });
        for (k, &m2) in cone_points_s.iter().enumerate().skip(j + 1) {
            corners.push(CornerPoint {
                label: format!("p{j}p{k}"),
                group: builtin::reflection_product(m, m2),
                incident_surfaces: vec![format!("p{j}xS"), format!("p{k}xS")],
            });
        }
    }
    Ok(OrbifoldSpec {
        base_betti: [1, 0, 1, 0, 1],
        betti_provenance: [Provenance::Computed; 5],
        isolated_points: Vec::new(),
        surfaces,
        corner_points: corners,
    })
}

/// The group of order 2m² generated by diag(ζ_m, 1), diag(1, ζ_m) and the swap.
pub fn wreath_group(m: u32) -> UnitaryGroup {
    let swap = Mat2::new(
        CyclotomicScalar::zero(m),
        CyclotomicScalar::one(m),
        CyclotomicScalar::one(m),
        CyclotomicScalar::zero(m),
    );
    let gens = [Mat2::diag_roots(m, 1, 0), Mat2::diag_roots(m, 0, 1), swap];
    let gens: Vec<_> = gens
        .into_iter()
        .map(|g| crate::unitary::UMat2::new(g).expect("unitary"))
        .collect();
    crate::groups::generate_group(&gens, crate::groups::DEFAULT_MAX_ORDER).expect("finite")
}
