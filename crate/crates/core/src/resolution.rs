//! Topology of resolutions: Hirzebruch–Jung chains, exceptional Betti
//! numbers (cyclic chains and McKay counting), Betti assembly for resolved
//! orbifolds, mapping-torus fundamental groups and Smith normal form.

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::groups::UnitaryGroup;
use crate::isotropy::{delta_set, induced_cyclic_data, validate_spec, OrbifoldSpec, Provenance};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HJChain {
    pub m: u64,
    pub q: u64,
    /// Continued fraction entries; curve i has self-intersection −coeffs[i].
    pub coeffs: Vec<u64>,
}

impl HJChain {
    pub fn curves(&self) -> usize {
        self.coeffs.len()
    }

    /// Tridiagonal matrix with −a_i on the diagonal and 1 between neighbours.
    pub fn intersection_matrix(&self) -> Vec<Vec<i64>> {
        let k = self.coeffs.len();
        let mut out = vec![vec![0i64; k]; k];
        for i in 0..k {
            out[i][i] = -(self.coeffs[i] as i64);
            if i + 1 < k {
                out[i][i + 1] = 1;
                out[i + 1][i] = 1;
            }
        }
        out
    }

    /// Leading principal minors of the negated matrix, all positive exactly
    /// when the intersection form is negative definite.
    pub fn negated_minors(&self) -> Vec<i128> {
        let mut out = Vec::with_capacity(self.coeffs.len());
        let (mut prev2, mut prev) = (0i128, 1i128);
        for (i, &a) in self.coeffs.iter().enumerate() {
            let d = if i == 0 { a as i128 } else { a as i128 * prev - prev2 };
            out.push(d);
            prev2 = prev;
            prev = d;
        }
        out
    }

    pub fn is_negative_definite(&self) -> bool {
        self.negated_minors().iter().all(|&d| d > 0)
    }

    /// Numerator and denominator of a₁ − 1/(a₂ − 1/(…)).
    pub fn reconstruct(&self) -> (u64, u64) {
        let mut p = *self.coeffs.last().unwrap_or(&1) as i128;
        let mut q = 1i128;
        for &a in self.coeffs.iter().rev().skip(1) {
            let np = a as i128 * p - q;
            q = p;
            p = np;
        }
        let g = p.gcd(&q);
        ((p / g) as u64, (q / g) as u64)
    }
}

pub fn hj_resolve(m: u64, q: u64) -> Result<HJChain> {
    if m < 2 || q < 1 || q >= m || m.gcd(&q) != 1 {
        return Err(Error::InvalidCyclicData {
            m,
            q,
            reason: "need m ≥ 2, 1 ≤ q < m and gcd(m, q) = 1".into(),
        });
    }
    let mut coeffs = Vec::new();
    let (mut num, mut den) = (m, q);
    while den != 0 {
        let a = num.div_ceil(den);
        coeffs.push(a);
        let rem = a * den - num;
        num = den;
        den = rem;
    }
    Ok(HJChain { m, q, coeffs })
}

/// Betti numbers (b₀, b₁, b₂) of the exceptional set over a point with
/// isotropy G.
pub fn exceptional_betti(g: &UnitaryGroup) -> Result<(u64, u64, u64)> {
    if g.order() == 1 {
        return Ok((1, 0, 0));
    }
    if g.is_abelian() {
        let d = induced_cyclic_data(g)?;
        if d.m == 1 {
            return Ok((1, 0, 0));
        }
        let chain = hj_resolve(d.m, d.q)?;
        return Ok((1, 0, chain.curves() as u64));
    }
    if g.gamma_star().order() == 1 && g.in_special_unitary() {
        let irreducibles = g.conjugacy_classes().len() as u64;
        return Ok((1, 0, irreducibles - 1));
    }
    Err(Error::Unsupported(format!(
        "exceptional set for a non-abelian group of order {} outside SU(2) (abelian: false)",
        g.order()
    )))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CohomologyProfile {
    pub betti: [u64; 5],
    pub provenance: [Provenance; 5],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Contribution {
    pub label: String,
    pub kind: &'static str,
    pub group_order: usize,
    pub exceptional_betti: (u64, u64, u64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResolutionReport {
    pub delta: Vec<String>,
    pub contributions: Vec<Contribution>,
    pub profile: CohomologyProfile,
}

/// Betti numbers of the resolution: every isolated point and every point of
/// Δ adds the Betti numbers of its exceptional set in degrees 1 and 2.
pub fn resolution_betti(spec: &OrbifoldSpec) -> Result<ResolutionReport> {
    let report = validate_spec(spec);
    if !report.valid {
        let mut reasons = report.structural;
        reasons.extend(report.semantic);
        return Err(Error::InvalidSpec(reasons.join("; ")));
    }
    let delta = delta_set(spec);
    let mut contributions = Vec::new();
    let labelled = |label: &str, e: Error| match e {
        Error::Unsupported(s) => Error::Unsupported(format!("point '{label}': {s}")),
        other => other,
    };
    for p in &spec.isolated_points {
        let b = exceptional_betti(&p.group).map_err(|e| labelled(&p.label, e))?;
        contributions.push(Contribution {
            label: p.label.clone(),
            kind: "isolated",
            group_order: p.group.order(),
            exceptional_betti: b,
        });
    }
    for c in spec.corner_points.iter().filter(|c| delta.contains(&c.label)) {
        let b = exceptional_betti(&c.group).map_err(|e| labelled(&c.label, e))?;
        contributions.push(Contribution {
            label: c.label.clone(),
            kind: "corner",
            group_order: c.group.order(),
            exceptional_betti: b,
        });
    }
    let mut betti = spec.base_betti;
    let mut provenance = spec.betti_provenance;
    for c in &contributions {
        betti[1] += c.exceptional_betti.1;
        betti[2] += c.exceptional_betti.2;
    }
    if !contributions.is_empty() {
        for k in [1, 2] {
            if provenance[k] != Provenance::UserDefault {
                provenance[k] = Provenance::Computed;
            }
        }
    }
    Ok(ResolutionReport {
        delta,
        contributions,
        profile: CohomologyProfile { betti, provenance },
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum EulerCharacteristic {
    Value { chi: i64 },
    Incomplete { missing: Vec<usize> },
}

pub fn euler_char_resolution(spec: &OrbifoldSpec) -> Result<EulerCharacteristic> {
    let missing: Vec<usize> = (0..5)
        .filter(|&k| spec.betti_provenance[k] == Provenance::UserDefault)
        .collect();
    if !missing.is_empty() {
        return Ok(EulerCharacteristic::Incomplete { missing });
    }
    let r = resolution_betti(spec)?;
    let chi = r
        .profile
        .betti
        .iter()
        .enumerate()
        .map(|(k, &b)| if k % 2 == 0 { b as i64 } else { -(b as i64) })
        .sum();
    Ok(EulerCharacteristic::Value { chi })
}

/// A finite presentation whose relators are words of (generator, exponent).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupPresentation {
    pub generators: Vec<String>,
    pub relators: Vec<Vec<(usize, i64)>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AbelianInvariants {
    pub free_rank: usize,
    /// Torsion factors, each dividing the next.
    pub torsion: Vec<u64>,
}

impl std::fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = (0..self.free_rank).map(|_| "Z".to_string()).collect();
        parts.extend(self.torsion.iter().map(|t| format!("Z{t}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// π₁ of the mapping torus of the torus with monodromy A, where the column
/// convention sends a to a^{A₁₁} b^{A₂₁} and b to a^{A₁₂} b^{A₂₂}.
pub fn mapping_torus_pi1(a: [[i64; 2]; 2]) -> Result<GroupPresentation> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() != 1 {
        return Err(Error::NonUnimodular { det });
    }
    let (t, ga, gb) = (0, 1, 2);
    let image_inv = |col: usize| -> Vec<(usize, i64)> {
        vec![(gb, -a[1][col]), (ga, -a[0][col])]
    };
    let mut r_a = vec![(t, 1), (ga, 1), (t, -1)];
    r_a.extend(image_inv(0));
    let mut r_b = vec![(t, 1), (gb, 1), (t, -1)];
    r_b.extend(image_inv(1));
    let clean = |w: Vec<(usize, i64)>| w.into_iter().filter(|&(_, e)| e != 0).collect();
    Ok(GroupPresentation {
        generators: vec!["t".into(), "a".into(), "b".into()],
        relators: vec![
            vec![(ga, 1), (gb, 1), (ga, -1), (gb, -1)],
            clean(r_a),
            clean(r_b),
        ],
    })
}

/// Free presentation of Z^n, with all commutators as relators.
pub fn free_abelian_presentation(n: usize) -> GroupPresentation {
    let mut relators = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            relators.push(vec![(i, 1), (j, 1), (i, -1), (j, -1)]);
        }
    }
    GroupPresentation {
        generators: (0..n).map(|i| format!("x{i}")).collect(),
        relators,
    }
}

/// Diagonal of the Smith normal form of an integer matrix.
pub fn smith_normal_form(mat: &[Vec<i64>]) -> Vec<i64> {
    let rows = mat.len();
    let cols = mat.first().map_or(0, |r| r.len());
    let mut a: Vec<Vec<i128>> = mat.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let pivot = (t..rows)
            .flat_map(|i| (t..cols).map(move |j| (i, j)))
            .filter(|&(i, j)| a[i][j] != 0)
            .min_by_key(|&(i, j)| a[i][j].abs());
        let Some((pi, pj)) = pivot else { break };
        a.swap(t, pi);
        for r in a.iter_mut() {
            r.swap(t, pj);
        }
        loop {
            let mut done = true;
            for i in t + 1..rows {
                let q = Integer::div_floor(&a[i][t], &a[t][t]);
                if q != 0 {
                    for j in t..cols {
                        a[i][j] -= q * a[t][j];
                    }
                }
                if a[i][t] != 0 {
                    done = false;
                }
            }
            for j in t + 1..cols {
                let q = Integer::div_floor(&a[t][j], &a[t][t]);
                if q != 0 {
                    for row in a.iter_mut().skip(t) {
                        row[j] -= q * row[t];
                    }
                }
                if a[t][j] != 0 {
                    done = false;
                }
            }
            if done {
                let bad = (t + 1..rows)
                    .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                    .find(|&(i, j)| a[i][j] % a[t][t] != 0);
                match bad {
                    None => break,
                    Some((i, _)) => {
                        for j in t..cols {
                            a[t][j] += a[i][j];
                        }
                        continue;
                    }
                }
            }
            let best = (t..rows)
                .flat_map(|i| (t..cols).map(move |j| (i, j)))
                .filter(|&(i, j)| (i == t || j == t) && a[i][j] != 0)
                .min_by_key(|&(i, j)| a[i][j].abs())
                .expect("pivot row or column is nonzero");
            a.swap(t, best.0);
            for r in a.iter_mut() {
                r.swap(t, best.1);
            }
        }
        diag.push(a[t][t].abs() as i64);
        t += 1;
    }
    diag
}

/// Abelianization through the exponent-sum matrix.
pub fn abelianize(p: &GroupPresentation) -> AbelianInvariants {
    let n = p.generators.len();
    let mat: Vec<Vec<i64>> = p
        .relators
        .iter()
        .map(|w| {
            let mut row = vec![0i64; n];
            for &(g, e) in w {
                row[g] += e;
            }
            row
        })
        .collect();
    let diag = smith_normal_form(&mat);
    let rank = diag.iter().filter(|&&d| d != 0).count();
    AbelianInvariants {
        free_rank: n - rank,
        torsion: diag.iter().filter(|&&d| d > 1).map(|&d| d as u64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::builtin;
    use crate::isotropy::{builtin_mapping_torus, builtin_product, IsolatedPoint};

    #[test]
    fn small_chains() {
        assert_eq!(hj_resolve(2, 1).unwrap().coeffs, vec![2]);
        assert_eq!(hj_resolve(4, 1).unwrap().coeffs, vec![4]);
        assert_eq!(hj_resolve(5, 2).unwrap().coeffs, vec![3, 2]);
        assert_eq!(hj_resolve(7, 3).unwrap().coeffs, vec![3, 2, 2]);
        assert!(hj_resolve(6, 2).is_err());
        assert!(hj_resolve(1, 0).is_err());
    }

    #[test]
    fn a_series_chains() {
        for m in 2..=12 {
            let c = hj_resolve(m, m - 1).unwrap();
            assert_eq!(c.coeffs, vec![2; (m - 1) as usize]);
            assert!(c.is_negative_definite());
        }
    }

    #[test]
    fn intersection_matrix_shape() {
        let c = hj_resolve(7, 3).unwrap();
        assert_eq!(c.intersection_matrix(), vec![vec![-3, 1, 0], vec![1, -2, 1], vec![0, 1, -2]]);
        assert_eq!(c.negated_minors(), vec![3, 5, 7]);
    }

    #[test]
    fn exceptional_sets() {
        assert_eq!(exceptional_betti(&builtin::minus_identity()).unwrap(), (1, 0, 1));
        assert_eq!(exceptional_betti(&builtin::cyclic(4, 3)).unwrap(), (1, 0, 3));
        assert_eq!(exceptional_betti(&builtin::quaternion()).unwrap(), (1, 0, 4));
        assert_eq!(exceptional_betti(&builtin::binary_dihedral(3)).unwrap(), (1, 0, 5));
        assert_eq!(exceptional_betti(&builtin::klein_four()).unwrap(), (1, 0, 0));
    }

    #[test]
    fn non_abelian_reflection_corner_unsupported() {
        let g = crate::isotropy::wreath_group(3);
        assert!(matches!(exceptional_betti(&g), Err(Error::Unsupported(_))));
    }

    #[test]
    fn mapping_torus_betti() {
        let r = resolution_betti(&builtin_mapping_torus()).unwrap();
        assert!(r.delta.is_empty());
        assert_eq!(r.contributions.len(), 5);
        assert_eq!(r.profile.betti[2], 7);
        assert_eq!(r.profile.betti[1], 0);
        assert_eq!(
            euler_char_resolution(&builtin_mapping_torus()).unwrap(),
            EulerCharacteristic::Incomplete { missing: vec![3] }
        );
    }

    #[test]
    fn euler_characteristic_counts_curves() {
        let mut spec = builtin_product(&[], &[], false).unwrap();
        assert_eq!(euler_char_resolution(&spec).unwrap(), EulerCharacteristic::Value { chi: 4 });
        spec.isolated_points.push(IsolatedPoint {
            label: "P".into(),
            group: builtin::minus_identity(),
        });
        assert_eq!(euler_char_resolution(&spec).unwrap(), EulerCharacteristic::Value { chi: 5 });
    }

    #[test]
    fn product_resolution() {
        let r = resolution_betti(&builtin_product(&[3], &[4], false).unwrap()).unwrap();
        assert_eq!(r.profile.betti[2], 2);
        assert!(r.contributions.is_empty());
    }

    #[test]
    fn mapping_torus_abelianizations() {
        let minus = abelianize(&mapping_torus_pi1([[-1, 0], [0, -1]]).unwrap());
        assert_eq!(minus, AbelianInvariants { free_rank: 1, torsion: vec![2, 2] });
        let id = abelianize(&mapping_torus_pi1([[1, 0], [0, 1]]).unwrap());
        assert_eq!(id, AbelianInvariants { free_rank: 3, torsion: vec![] });
        let shear = abelianize(&mapping_torus_pi1([[1, 1], [0, 1]]).unwrap());
        assert_eq!(shear, AbelianInvariants { free_rank: 2, torsion: vec![] });
        assert!(mapping_torus_pi1([[2, 0], [0, 1]]).is_err());
    }

    #[test]
    fn smith_examples() {
        assert_eq!(smith_normal_form(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]), vec![2, 6, 12]);
        assert_eq!(smith_normal_form(&[vec![0, 1], vec![0, 0]]), vec![1]);
        assert_eq!(smith_normal_form(&[vec![4, 0], vec![0, 6]]), vec![2, 12]);
    }
}
