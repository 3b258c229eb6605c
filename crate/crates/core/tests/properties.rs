use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use orbires::cyclotomic::CyclotomicScalar;
use orbires::groups::{builtin, classify_element, stratum_class, ElementClass, ProjectiveLine, Stratum, UnitaryGroup};
use orbires::invariants::{fundamental_invariants, h_map_eval, molien_series, reynolds_rank};
use orbires::resolution::{abelianize, free_abelian_presentation, hj_resolve};
use orbires::symp::gluing::{glue_forms, ramp_problem};
use orbires::symp::tameness::taming_quotient;
use orbires::unitary::{
    compatible_acs, realify, retract_equivariance_check, standard_j, standard_omega, Mat2, SympMat4, UMat2,
};

fn rotation8() -> UMat2 {
    let h = CyclotomicScalar::sqrt2().inverse().unwrap();
    UMat2::new(Mat2::new(h.clone(), h.clone(), -&h, h)).unwrap()
}

fn word(letters: &[(u8, i64, i64)]) -> UMat2 {
    let mut acc = UMat2::identity(8);
    for &(kind, j, k) in letters {
        let next = if kind % 2 == 0 {
            UMat2::new(Mat2::diag_roots(8, j, k)).unwrap()
        } else {
            rotation8()
        };
        acc = acc.mul(&next);
    }
    acc
}

fn letters() -> impl Strategy<Value = Vec<(u8, i64, i64)>> {
    prop::collection::vec((0u8..4, 0i64..8, 0i64..8), 0..5)
}

fn max_abs(m: &Matrix4<f64>) -> f64 {
    m.abs().max()
}

fn sl2(a: f64, b: f64, c: f64) -> Matrix2<f64> {
    Matrix2::new(a, b, c, (1.0 + b * c) / a)
}

fn block_diag(s1: &Matrix2<f64>, s2: &Matrix2<f64>) -> Matrix4<f64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(s1);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(s2);
    m
}

fn scalar(n: u32, coeffs: &[i64]) -> CyclotomicScalar {
    let mut acc = CyclotomicScalar::zero(n);
    for (k, &c) in coeffs.iter().enumerate() {
        acc = &acc + &(&CyclotomicScalar::from_integer(n, c) * &CyclotomicScalar::root_of_unity(n, k as i64));
    }
    acc
}

fn test_family() -> Vec<UnitaryGroup> {
    let mut out = vec![
        builtin::trivial(),
        builtin::klein_four(),
        builtin::minus_identity(),
        builtin::quaternion(),
        builtin::binary_dihedral(3),
        builtin::dihedral_reflections(3),
        builtin::dihedral_reflections(4),
    ];
    for m in 2..=8 {
        out.push(builtin::cyclic(m, 0));
        out.push(builtin::cyclic(m, 1));
        out.push(builtin::cyclic(m, m - 1));
    }
    for (m, k) in [(2, 3), (2, 4), (3, 3), (2, 6), (4, 4)] {
        out.push(builtin::reflection_product(m, k));
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn realify_is_a_homomorphism(a in letters(), b in letters()) {
        let (ua, ub) = (word(&a), word(&b));
        let lhs = realify(&ua.mul(&ub));
        prop_assert!(max_abs(&(lhs - realify(&ua) * realify(&ub))) < 1e-12);
        let ra = realify(&ua);
        prop_assert!(max_abs(&(ra.transpose() * standard_omega() * ra - standard_omega())) < 1e-12);
        prop_assert!(max_abs(&(ra * standard_j() - standard_j() * ra)) < 1e-12);
    }

    #[test]
    fn classification_is_conjugation_invariant(g in letters(), h in letters()) {
        let (ug, uh) = (word(&g), word(&h));
        let conj = uh.mul(&ug).mul(&uh.inverse());
        match (classify_element(&ug), classify_element(&conj)) {
            (ElementClass::Identity, ElementClass::Identity) => {}
            (ElementClass::FreeActing, ElementClass::FreeActing) => {}
            (ElementClass::ComplexReflection { fixed_line: l1 }, ElementClass::ComplexReflection { fixed_line: l2 }) => {
                let moved = uh.mat().apply(&[l1.z.clone(), l1.w.clone()]);
                let [z, w] = moved;
                prop_assert!(ProjectiveLine::new(z, w).unwrap().same_line(&l2));
            }
            (a, b) => prop_assert!(false, "{a:?} vs {b:?}"),
        }
    }

    #[test]
    fn cyclotomic_field_axioms(
        n in prop::sample::select(vec![3u32, 4, 5, 8, 12]),
        a in prop::collection::vec(-3i64..4, 1..5),
        b in prop::collection::vec(-3i64..4, 1..5),
        c in prop::collection::vec(-3i64..4, 1..5),
    ) {
        let (x, y, z) = (scalar(n, &a), scalar(n, &b), scalar(n, &c));
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
        prop_assert_eq!(&x * &(&y + &z), &(&x * &y) + &(&x * &z));
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(x.conj().conj(), x.clone());
        if !x.is_zero() {
            prop_assert!((&x * &x.inverse().unwrap()).is_one());
        }
        let prod = (&x * &y).to_complex();
        prop_assert!((prod - x.to_complex() * y.to_complex()).norm() < 1e-9);
    }

    #[test]
    fn hj_chain_round_trip(m in 2u64..=200, q in 1u64..200) {
        let q = 1 + q % (m - 1);
        prop_assume!(num_integer::gcd(m, q) == 1);
        let chain = hj_resolve(m, q).unwrap();
        prop_assert_eq!(chain.reconstruct(), (m, q));
        prop_assert!(chain.coeffs.iter().all(|&a| a >= 2));
        prop_assert!(chain.is_negative_definite());
    }

    #[test]
    fn hj_duality_reverses_chain(m in 2u64..=50, q in 1u64..50) {
        let q = 1 + q % (m - 1);
        prop_assume!(num_integer::gcd(m, q) == 1);
        let qi = orbires::isotropy::mod_inverse(q, m).unwrap();
        let mut forward = hj_resolve(m, q).unwrap().coeffs;
        forward.reverse();
        prop_assert_eq!(forward, hj_resolve(m, qi).unwrap().coeffs);
    }

    #[test]
    fn retract_is_equivariant(a in 0.3f64..3.0, b in -2.0f64..2.0, c in -2.0f64..2.0,
                              d in 0.3f64..3.0, e in -2.0f64..2.0, f in -2.0f64..2.0) {
        let (s1, s2) = (sl2(a, b, c), sl2(d, e, f));
        let flip = UMat2::new(Mat2::diag_roots(2, 0, 1)).unwrap();
        let bd = SympMat4::new(block_diag(&s1, &s2)).unwrap();
        prop_assert!(retract_equivariance_check(&flip, &flip, &bd).unwrap() < 1e-10);

        let other = UMat2::new(Mat2::diag_roots(2, 1, 0)).unwrap();
        let mut swap = Matrix4::zeros();
        swap.fixed_view_mut::<2, 2>(0, 2).copy_from(&s2);
        swap.fixed_view_mut::<2, 2>(2, 0).copy_from(&s1);
        let sw = SympMat4::new(swap).unwrap();
        prop_assert!(retract_equivariance_check(&flip, &other, &sw).unwrap() < 1e-10);
    }

    #[test]
    fn abelianization_of_free_abelian(n in 0usize..=5) {
        let inv = abelianize(&free_abelian_presentation(n));
        prop_assert_eq!(inv.free_rank, n);
        prop_assert!(inv.torsion.is_empty());
    }

    #[test]
    fn taming_quotient_is_rotation_invariant(entries in prop::collection::vec(-1.0f64..1.0, 16), seed in 0u64..1000) {
        let q = Matrix4::from_iterator(entries).qr().q();
        let om = standard_omega() + Matrix4::from_fn(|i, j| ((i * 4 + j) as f64 + seed as f64).sin() * 0.1);
        let om = (om - om.transpose()) * 0.5;
        let j = standard_j();
        let lhs = taming_quotient(&om, &j);
        let rhs = taming_quotient(&(q.transpose() * om * q), &(q.transpose() * j * q));
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn gluing_inequality_holds(e1 in 0.6f64..1.2, gap in 0.5f64..1.0, width in 0.30f64..1.0) {
        let radii = [e1, e1 + gap, e1 + gap + width];
        let out = glue_forms(&ramp_problem(radii), 8).unwrap();
        prop_assert!(out.delta * (out.norm_estimate + 1.0) < out.c_estimate);
        prop_assert!(out.certificate.tame);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn compatible_acs_postconditions(g in prop::collection::vec(-1.0f64..1.0, 16), b in prop::collection::vec(-1.0f64..1.0, 16)) {
        let a = Matrix4::from_iterator(g);
        let metric = a.transpose() * a + Matrix4::identity();
        let bm = Matrix4::from_iterator(b) + Matrix4::identity() * 2.5;
        prop_assume!(bm.determinant().abs() > 0.1);
        let omega = bm.transpose() * standard_omega() * bm;
        let j = compatible_acs(&metric, &omega).unwrap();
        let scale = 1.0 + max_abs(&omega);
        prop_assert!(max_abs(&(j * j + Matrix4::identity())) < 1e-8);
        prop_assert!(max_abs(&(j.transpose() * omega * j - omega)) < 1e-8 * scale * scale);
        let tame = omega * j;
        let sym = (tame + tame.transpose()) * 0.5;
        prop_assert!(sym.symmetric_eigenvalues().min() > 0.0);
    }
}

#[test]
fn lagrange_for_reflection_quotient() {
    for g in test_family() {
        assert_eq!(g.order(), g.gamma_star().order() * g.gamma_prime().order());
    }
}

#[test]
fn cyclic_reflection_groups_are_sigma_star() {
    for m in 2..=12 {
        assert_eq!(stratum_class(&builtin::cyclic(m, 0)), Stratum::SigmaStar, "order {m}");
    }
}

#[test]
fn molien_agrees_with_reynolds_rank() {
    for g in test_family().into_iter().filter(|g| g.order() <= 16) {
        let c = molien_series(&g, 8).unwrap();
        for d in 0..=8u32 {
            assert_eq!(c[d as usize] as usize, reynolds_rank(&g, d));
        }
    }
}

#[test]
fn h_map_is_constant_on_orbits() {
    let groups = [builtin::klein_four(), builtin::cyclic(3, 0), builtin::reflection_product(2, 3), builtin::dihedral_reflections(3)];
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut next = || rng.gen_range(-1.0..1.0);
    for g in &groups {
        let basis = fundamental_invariants(g).unwrap();
        for _ in 0..100 {
            let x = Vector4::new(next(), next(), next(), next());
            let (z, w) = (Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]));
            let base = h_map_eval(&basis, z, w);
            for e in g.elements() {
                let m = e.matrix.mat().to_complex();
                let (gz, gw) = (m[(0, 0)] * z + m[(0, 1)] * w, m[(1, 0)] * z + m[(1, 1)] * w);
                let moved = h_map_eval(&basis, gz, gw);
                assert!((moved.0 - base.0).norm() <= 1e-9 && (moved.1 - base.1).norm() <= 1e-9);
            }
        }
    }
}
