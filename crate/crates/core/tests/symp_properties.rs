use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use orbires::symp::blowup::BlowupModel;
use orbires::symp::ddbar::{ddbar_raw, euclidean_potential, fhat_display, kahler_potential};
use orbires::symp::forms::{eval_omega0, eval_omega_a, eval_omega_a_glued, exterior_derivative_fd, LocalModel, Point};
use orbires::symp::gluing::{ramp_problem, PipelineConfig};
use orbires::symp::pushforward::eval_omega_hat;
use orbires::Result;
use orbires::symp::Form2At;

fn interior_points(model: &LocalModel, seed: u64, count: usize) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r_max = 0.9 * model.radii.delta0;
    let b = 0.6 * model.base_radius();
    (0..count)
        .map(|_| {
            let r = rng.gen_range(0.02..r_max);
            let t = rng.gen_range(0.0..std::f64::consts::TAU);
            [rng.gen_range(-b..b), rng.gen_range(-b..b), r * t.cos(), r * t.sin()]
        })
        .collect()
}

fn assert_closed(name: &str, eval: &dyn Fn(&Point) -> Result<Form2At>, points: &[Point]) {
    for p in points {
        for h in [1e-3, 5e-4] {
            let d = exterior_derivative_fd(eval, p, h).unwrap();
            assert!(d <= 1e-5, "{name}: |dω| = {d:e} at {p:?} (h = {h})");
        }
    }
}

#[test]
fn every_evaluator_is_closed() {
    for model in [LocalModel::flat(2, 0.1), LocalModel::curved(3, 0.05, 0.7), LocalModel::curved(2, 0.2, -1.1)] {
        let pts = interior_points(&model, 17, 100);
        assert_closed("omega0", &|p| eval_omega0(&model, p), &pts);
        assert_closed("omega_a", &|p| eval_omega_a(&model, p), &pts);
        assert_closed("omega_a glued", &|p| eval_omega_a_glued(&model, p), &pts);
        assert_closed("omega hat", &|p| eval_omega_hat(&model, p), &pts);
    }
    let blow = BlowupModel::new(2, 0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pts: Vec<Point> = (0..100).map(|_| [0; 4].map(|_| rng.gen_range(-1.0..1.0))).collect();
    assert_closed("blow-up", &|p| Ok(blow.form(p)), &pts);
    let glue = ramp_problem([1.0, 1.5, 2.0]);
    let pts: Vec<Point> = (0..100).map(|_| [0; 4].map(|_| rng.gen_range(-1.0..1.0))).collect();
    assert_closed("ramp glued", &|p| glue.glued(0.1, p), &pts);
}

#[test]
fn omega_a_tends_to_omega0_as_a_shrinks() {
    let mut previous = f64::INFINITY;
    for k in 0..4 {
        let a = 0.2 / 2f64.powi(k);
        let model = LocalModel::flat(2, a);
        let d2 = model.radii.delta2;
        let mut worst: f64 = 0.0;
        for i in 0..=20 {
            let r = d2 * (0.5 + 0.5 * i as f64 / 20.0);
            let p = [0.1, -0.2, r, 0.0];
            worst = worst.max(eval_omega_a(&model, &p).unwrap().max_abs_diff(&eval_omega0(&model, &p).unwrap()));
        }
        assert!(worst < previous, "a = {a}: {worst} ≥ {previous}");
        previous = worst;
    }
}

#[test]
fn ddbar_converges_at_second_order() {
    let fixtures: [(&str, Box<dyn Fn(&Point) -> f64>); 3] = [
        ("euclidean quartic", Box::new(|p: &Point| euclidean_potential(p).powi(2))),
        ("kahler potential", Box::new(kahler_potential(2, 0.1, 0.3))),
        ("fhat display", Box::new(fhat_display(3, 0.2))),
    ];
    for (name, f) in &fixtures {
        for p in [[0.3, 0.1, 0.2, -0.15], [0.5, -0.4, 0.1, 0.35]] {
            let reference = ddbar_raw(f.as_ref(), &p, 2e-4);
            let e1 = ddbar_raw(f.as_ref(), &p, 4e-2).max_abs_diff(&reference);
            let e2 = ddbar_raw(f.as_ref(), &p, 2e-2).max_abs_diff(&reference);
            assert!(e1 >= 3.0 * e2, "{name} at {p:?}: {e1:e} vs {e2:e}");
        }
    }
}

#[test]
fn pipeline_form_vanishes_near_origin() {
    let cfg = PipelineConfig::standard([0.8, 3.3, 4.0]);
    for p in [[0.5, 0.2, 0.1, -0.3], [0.0; 4], [0.0, 0.0, 0.79, 0.0]] {
        assert_eq!(cfg.omega1(&p).max_abs(), 0.0);
    }
    assert!(cfg.omega1(&[3.5, 0.0, 0.1, 0.0]).max_abs() > 0.0);
}
