//! Finite subgroups of U(2) with exact closure, element classification, the
//! reflection subgroup Γ* and the quotient Γ' = G/Γ*.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::cyclotomic::{lcm, CyclotomicScalar, ScalarKey};
use crate::error::{Error, Result};
use crate::unitary::{Mat2, UMat2};

pub const DEFAULT_MAX_ORDER: usize = 512;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupElement {
    pub matrix: UMat2,
    pub order: u32,
}

/// A point of CP¹, normalized so that the first nonzero coordinate is 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProjectiveLine {
    pub z: CyclotomicScalar,
    pub w: CyclotomicScalar,
}

impl ProjectiveLine {
    pub fn new(z: CyclotomicScalar, w: CyclotomicScalar) -> Option<Self> {
        if !z.is_zero() {
            let inv = z.inverse()?;
            let n = lcm(z.conductor(), w.conductor());
            Some(ProjectiveLine {
                z: CyclotomicScalar::one(n),
                w: &w * &inv,
            })
        } else if !w.is_zero() {
            Some(ProjectiveLine {
                z: CyclotomicScalar::zero(w.conductor()),
                w: CyclotomicScalar::one(w.conductor()),
            })
        } else {
            None
        }
    }

    /// Exact projective equality via the 2×2 determinant.
    pub fn same_line(&self, o: &ProjectiveLine) -> bool {
        (&(&self.z * &o.w) - &(&self.w * &o.z)).is_zero()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum ElementClass {
    Identity,
    ComplexReflection { fixed_line: ProjectiveLine },
    FreeActing,
}

impl ElementClass {
    pub fn is_reflection(&self) -> bool {
        matches!(self, ElementClass::ComplexReflection { .. })
    }
}

/// Identity, complex reflection (γ ≠ I with det(γ − I) = 0), or free on C² \ {0}.
pub fn classify_element(g: &UMat2) -> ElementClass {
    let m = g.mat();
    if m.is_identity() {
        return ElementClass::Identity;
    }
    let n = m.conductor();
    let d = m.sub(&Mat2::identity(n));
    if !d.det().is_zero() {
        return ElementClass::FreeActing;
    }
    let row = if !d.e[0][0].is_zero() || !d.e[0][1].is_zero() {
        &d.e[0]
    } else {
        &d.e[1]
    };
    let line = ProjectiveLine::new(row[1].clone(), -&row[0]).expect("nonzero row has a kernel line");
    ElementClass::ComplexReflection { fixed_line: line }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Subgroup {
    /// Sorted indices into the parent group.
    pub members: Vec<usize>,
    pub normal: bool,
}

impl Subgroup {
    pub fn order(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }
}

/// An abstract finite group given by its multiplication table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QuotientGroup {
    /// Coset index of each element of the parent group.
    pub coset_of: Vec<usize>,
    /// A parent element in each coset.
    pub representatives: Vec<usize>,
    pub table: Vec<Vec<usize>>,
    pub abelian: bool,
    /// Invariant factors d1 | d2 | ... when abelian; empty for the trivial group.
    pub invariant_factors: Vec<u64>,
}

impl QuotientGroup {
    pub fn order(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 1
    }

    pub fn is_cyclic(&self) -> bool {
        self.abelian && self.invariant_factors.len() <= 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    Manifold,
    Sigma0,
    SigmaStar,
    Sigma1,
}

#[derive(Clone, Debug)]
pub struct UnitaryGroup {
    conductor: u32,
    elements: Vec<GroupElement>,
    index: HashMap<Vec<ScalarKey>, usize>,
    generators: Vec<usize>,
    table: Vec<Vec<usize>>,
    inverse: Vec<usize>,
    classes: Vec<ElementClass>,
    gamma_star: Subgroup,
    gamma_prime: QuotientGroup,
}

/// On-disk description of a group.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupSpec {
    pub conductor: u32,
    pub generators: Vec<Mat2>,
    #[serde(default = "default_max_order")]
    pub max_order: usize,
}

fn default_max_order() -> usize {
    DEFAULT_MAX_ORDER
}

impl GroupSpec {
    pub fn build(&self) -> Result<UnitaryGroup> {
        let mut gens = Vec::with_capacity(self.generators.len());
        for m in &self.generators {
            if self.conductor % m.conductor() != 0 {
                return Err(Error::Conductor(format!(
                    "generator needs conductor {} which does not divide {}",
                    m.conductor(),
                    self.conductor
                )));
            }
            gens.push(UMat2::new(m.lift(self.conductor)?)?);
        }
        generate_group_with_conductor(&gens, self.max_order, self.conductor)
    }
}

/// Closes a finite set of unitary matrices under multiplication.
pub fn generate_group(generators: &[UMat2], max_order: usize) -> Result<UnitaryGroup> {
    let n = generators.iter().fold(1, |acc, g| lcm(acc, g.mat().conductor()));
    generate_group_with_conductor(generators, max_order, n)
}

fn generate_group_with_conductor(
    generators: &[UMat2],
    max_order: usize,
    conductor: u32,
) -> Result<UnitaryGroup> {
    let gens: Vec<UMat2> = generators
        .iter()
        .map(|g| g.lift(conductor))
        .collect::<Result<_>>()?;
    let id = UMat2::identity(conductor);
    let mut mats = vec![id.clone()];
    let mut index = HashMap::new();
    index.insert(id.mat().key(), 0usize);
    let mut right: Vec<Vec<usize>> = Vec::new();
    let mut parent: Vec<Option<(usize, usize)>> = vec![None];
    let mut queue = VecDeque::from([0usize]);
    while let Some(g) = queue.pop_front() {
        let mut row = Vec::with_capacity(gens.len());
        for (si, s) in gens.iter().enumerate() {
            let h = mats[g].mul(s);
            let key = h.mat().key();
            let idx = match index.get(&key) {
                Some(&i) => i,
                None => {
                    let i = mats.len();
                    if i >= max_order {
                        return Err(Error::NotFinite { bound: max_order });
                    }
                    index.insert(key, i);
                    mats.push(h);
                    parent.push(Some((g, si)));
                    queue.push_back(i);
                    i
                }
            };
            row.push(idx);
        }
        if right.len() <= g {
            right.resize(g + 1, Vec::new());
        }
        right[g] = row;
    }
    let size = mats.len();
    let words: Vec<Vec<usize>> = (0..size)
        .map(|i| {
            let mut w = Vec::new();
            let mut cur = i;
            while let Some((p, s)) = parent[cur] {
                w.push(s);
                cur = p;
            }
            w.reverse();
            w
        })
        .collect();
    let table: Vec<Vec<usize>> = (0..size)
        .map(|i| {
            words
                .iter()
                .map(|w| w.iter().fold(i, |x, &s| right[x][s]))
                .collect()
        })
        .collect();
    let inverse: Vec<usize> = (0..size)
        .map(|i| table[i].iter().position(|&x| x == 0).expect("finite group element has an inverse"))
        .collect();
    let elements: Vec<GroupElement> = mats
        .into_iter()
        .enumerate()
        .map(|(i, m)| {
            let mut x = i;
            let mut k = 1;
            while x != 0 {
                x = table[x][i];
                k += 1;
            }
            GroupElement { matrix: m, order: k }
        })
        .collect();
    let classes: Vec<ElementClass> = elements.iter().map(|e| classify_element(&e.matrix)).collect();
    let generator_idx: Vec<usize> = gens.iter().map(|g| index[&g.mat().key()]).collect();
    let mut group = UnitaryGroup {
        conductor,
        elements,
        index,
        generators: generator_idx,
        table,
        inverse,
        classes,
        gamma_star: Subgroup {
            members: vec![0],
            normal: true,
        },
        gamma_prime: QuotientGroup {
            coset_of: Vec::new(),
            representatives: Vec::new(),
            table: Vec::new(),
            abelian: true,
            invariant_factors: Vec::new(),
        },
    };
    group.gamma_star = reflection_subgroup(&group);
    group.gamma_prime = group.quotient(&group.gamma_star)?;
    Ok(group)
}

impl UnitaryGroup {
    pub fn conductor(&self) -> u32 {
        self.conductor
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[GroupElement] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &GroupElement {
        &self.elements[i]
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn mul(&self, i: usize, j: usize) -> usize {
        self.table[i][j]
    }

    pub fn inv(&self, i: usize) -> usize {
        self.inverse[i]
    }

    pub fn index_of(&self, m: &UMat2) -> Option<usize> {
        let m = m.lift(self.conductor).ok()?;
        self.index.get(&m.mat().key()).copied()
    }

    pub fn class(&self, i: usize) -> &ElementClass {
        &self.classes[i]
    }

    pub fn classes(&self) -> &[ElementClass] {
        &self.classes
    }

    pub fn reflections(&self) -> Vec<usize> {
        (0..self.order()).filter(|&i| self.classes[i].is_reflection()).collect()
    }

    pub fn gamma_star(&self) -> &Subgroup {
        &self.gamma_star
    }

    pub fn gamma_prime(&self) -> &QuotientGroup {
        &self.gamma_prime
    }

    pub fn is_abelian(&self) -> bool {
        self.generators.iter().all(|&a| {
            self.generators
                .iter()
                .all(|&b| self.mul(a, b) == self.mul(b, a))
        })
    }

    /// True when every element has determinant 1.
    pub fn in_special_unitary(&self) -> bool {
        self.elements.iter().all(|e| e.matrix.mat().det().is_one())
    }

    pub fn conjugacy_classes(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.order()];
        let mut out = Vec::new();
        for x in 0..self.order() {
            if seen[x] {
                continue;
            }
            let mut class: Vec<usize> = (0..self.order())
                .map(|g| self.mul(self.mul(g, x), self.inv(g)))
                .collect();
            class.sort_unstable();
            class.dedup();
            for &c in &class {
                seen[c] = true;
            }
            out.push(class);
        }
        out
    }

    /// The subgroup generated by a set of element indices.
    pub fn subgroup_generated(&self, gens: &[usize]) -> Vec<usize> {
        let mut inside = vec![false; self.order()];
        inside[0] = true;
        let mut members = vec![0];
        let mut k = 0;
        while k < members.len() {
            let g = members[k];
            for &s in gens {
                let h = self.mul(g, s);
                if !inside[h] {
                    inside[h] = true;
                    members.push(h);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        members
    }

    pub fn is_normal(&self, members: &[usize]) -> bool {
        let mut inside = vec![false; self.order()];
        for &m in members {
            inside[m] = true;
        }
        (0..self.order()).all(|g| {
            members
                .iter()
                .all(|&n| inside[self.mul(self.mul(g, n), self.inv(g))])
        })
    }

    /// The quotient by a normal subgroup, with invariant factors when abelian.
    pub fn quotient(&self, h: &Subgroup) -> Result<QuotientGroup> {
        if !h.normal {
            return Err(Error::Precondition("quotient by a non-normal subgroup".into()));
        }
        let mut coset_of = vec![usize::MAX; self.order()];
        let mut reps = Vec::new();
        for g in 0..self.order() {
            if coset_of[g] != usize::MAX {
                continue;
            }
            let c = reps.len();
            reps.push(g);
            for &n in &h.members {
                coset_of[self.mul(g, n)] = c;
            }
        }
        let table: Vec<Vec<usize>> = reps
            .iter()
            .map(|&a| reps.iter().map(|&b| coset_of[self.mul(a, b)]).collect())
            .collect();
        let k = reps.len();
        let abelian = (0..k).all(|a| (0..k).all(|b| table[a][b] == table[b][a]));
        let invariant_factors = if abelian {
            abelian_invariants(&table)
        } else {
            Vec::new()
        };
        Ok(QuotientGroup {
            coset_of,
            representatives: reps,
            table,
            abelian,
            invariant_factors,
        })
    }

    /// Reflection lines of the group, without repetition.
    pub fn reflection_lines(&self) -> Vec<ProjectiveLine> {
        let mut lines: Vec<ProjectiveLine> = Vec::new();
        for c in &self.classes {
            if let ElementClass::ComplexReflection { fixed_line } = c {
                if !lines.iter().any(|l| l.same_line(fixed_line)) {
                    lines.push(fixed_line.clone());
                }
            }
        }
        lines
    }
}

fn table_order(table: &[Vec<usize>], x: usize) -> u64 {
    let mut k = 1;
    let mut y = x;
    while y != 0 {
        y = table[y][x];
        k += 1;
    }
    k
}

fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            out.push(p);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Invariant factors of an abelian group from its table (identity at 0),
/// recovered by counting elements of each prime power order.
fn abelian_invariants(table: &[Vec<usize>]) -> Vec<u64> {
    let n = table.len() as u64;
    if n == 1 {
        return Vec::new();
    }
    let orders: Vec<u64> = (0..table.len()).map(|x| table_order(table, x)).collect();
    let mut per_prime: Vec<(u64, Vec<u32>)> = Vec::new();
    for p in prime_factors(n) {
        let mut f = vec![0u32];
        let mut pk = 1u64;
        loop {
            pk *= p;
            let count = orders.iter().filter(|&&o| pk % o == 0).count() as u64;
            let e = count.ilog(p);
            if e == *f.last().unwrap() {
                break;
            }
            f.push(e);
        }
        // f[k] - f[k-1] = #{i : e_i >= k}; transpose the partition.
        let cols: Vec<u32> = f.windows(2).map(|w| w[1] - w[0]).collect();
        let parts = cols[0] as usize;
        let mut exps: Vec<u32> = (0..parts)
            .map(|i| cols.iter().filter(|&&c| c as usize > i).count() as u32)
            .collect();
        exps.sort_unstable_by(|a, b| b.cmp(a));
        per_prime.push((p, exps));
    }
    let len = per_prime.iter().map(|(_, e)| e.len()).max().unwrap_or(0);
    let mut factors: Vec<u64> = (0..len)
        .map(|j| {
            per_prime
                .iter()
                .map(|(p, e)| e.get(j).map_or(1, |&x| p.pow(x)))
                .product()
        })
        .collect();
    factors.reverse();
    factors
}

/// The subgroup generated by all complex reflections, with its normality
/// checked over every element.
pub fn reflection_subgroup(g: &UnitaryGroup) -> Subgroup {
    let refl = g.reflections();
    let members = g.subgroup_generated(&refl);
    let normal = g.is_normal(&members);
    Subgroup { members, normal }
}

/// Stratum of a point with isotropy G, read from the reflection lines.
pub fn stratum_class(g: &UnitaryGroup) -> Stratum {
    if g.order() == 1 {
        return Stratum::Manifold;
    }
    match g.reflection_lines().len() {
        0 => Stratum::Sigma0,
        1 => Stratum::SigmaStar,
        _ => Stratum::Sigma1,
    }
}

/// Named groups used by the command line and the tests.
pub mod builtin {
    use super::*;

    fn u(m: Mat2) -> UMat2 {
        UMat2::new(m).expect("builtin generator is unitary")
    }

    fn build(gens: Vec<UMat2>) -> UnitaryGroup {
        generate_group(&gens, DEFAULT_MAX_ORDER).expect("builtin group is finite")
    }

    /// Looks up a fixed group, or a family member written `family:arg[:arg]`
    /// such as `cyclic:5:2` or `binary_dihedral:3`.
    pub fn by_name(name: &str) -> Option<UnitaryGroup> {
        match name {
            "klein_four" => return Some(klein_four()),
            "minus_identity" => return Some(minus_identity()),
            "trivial" => return Some(trivial()),
            "quaternion" => return Some(quaternion()),
            _ => {}
        }
        let mut parts = name.split(':');
        let family = parts.next()?;
        let args: Vec<u32> = parts.map(|a| a.parse().ok()).collect::<Option<_>>()?;
        let bound = DEFAULT_MAX_ORDER as u32;
        match (family, args.as_slice()) {
            ("cyclic", &[m, q]) if (1..=bound).contains(&m) => Some(cyclic(m, q % m)),
            ("reflection_product", &[m, k]) if m >= 1 && k >= 1 && m * k <= bound => Some(reflection_product(m, k)),
            ("binary_dihedral", &[n]) if n >= 1 && 4 * n <= bound => Some(binary_dihedral(n)),
            ("dihedral_reflections", &[n]) if n >= 2 && 2 * n <= bound => Some(dihedral_reflections(n)),
            _ => None,
        }
    }

    pub const FAMILIES: [&str; 4] = ["cyclic:M:Q", "reflection_product:M:K", "binary_dihedral:N", "dihedral_reflections:N"];

    pub const NAMES: [&str; 4] = ["klein_four", "minus_identity", "trivial", "quaternion"];

    pub fn trivial() -> UnitaryGroup {
        build(Vec::new())
    }

    /// ⟨diag(-1, 1), diag(1, -1)⟩.
    pub fn klein_four() -> UnitaryGroup {
        build(vec![u(Mat2::diag_roots(2, 1, 0)), u(Mat2::diag_roots(2, 0, 1))])
    }

    pub fn minus_identity() -> UnitaryGroup {
        build(vec![u(Mat2::diag_roots(2, 1, 1))])
    }

    /// ⟨diag(ζ_m, ζ_m^q)⟩.
    pub fn cyclic(m: u32, q: u32) -> UnitaryGroup {
        build(vec![u(Mat2::diag_roots(m, 1, q as i64))])
    }

    /// ⟨diag(ζ_m, 1), diag(1, ζ_k)⟩.
    pub fn reflection_product(m: u32, k: u32) -> UnitaryGroup {
        build(vec![u(Mat2::diag_roots(m, 1, 0)), u(Mat2::diag_roots(k, 0, 1))])
    }

    /// Binary dihedral group of order 4n inside SU(2).
    pub fn binary_dihedral(n: u32) -> UnitaryGroup {
        let c = 2 * n;
        let j = Mat2::new(
            CyclotomicScalar::zero(c),
            CyclotomicScalar::one(c),
            CyclotomicScalar::from_integer(c, -1),
            CyclotomicScalar::zero(c),
        );
        build(vec![u(Mat2::diag_roots(c, 1, -1)), u(j)])
    }

    /// The quaternion group Q8.
    pub fn quaternion() -> UnitaryGroup {
        binary_dihedral(2)
    }

    /// Two reflections of order two with distinct lines, generating the
    /// dihedral group of order 2n.
    pub fn dihedral_reflections(n: u32) -> UnitaryGroup {
        let c = n;
        let swap = Mat2::new(
            CyclotomicScalar::zero(c),
            CyclotomicScalar::one(c),
            CyclotomicScalar::one(c),
            CyclotomicScalar::zero(c),
        );
        let twisted = Mat2::new(
            CyclotomicScalar::zero(c),
            CyclotomicScalar::root_of_unity(n, 1),
            CyclotomicScalar::root_of_unity(n, -1),
            CyclotomicScalar::zero(c),
        );
        build(vec![u(swap), u(twisted)])
    }
}
