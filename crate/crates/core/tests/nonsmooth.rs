use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shcgm::linalg::{DenseMap, DenseMatrix, LinearMap};
use shcgm::nonsmooth::{
    project_l1_ball, prox, smoothed_grad_term, smoothed_value, ConvexSet, LipschitzFn,
    NonsmoothTerm,
};
use shcgm::reference::{exact_projection_l1, finite_diff_check};

fn vec_strategy(max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-5.0f64..5.0, 1..max)
}

fn l1(dim: usize, weight: f64) -> NonsmoothTerm {
    NonsmoothTerm::Lipschitz(LipschitzFn::L1Norm { dim, weight })
}

#[test]
fn sort_and_bisection_projections_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut out = Vec::new();
    for _ in 0..10_000 {
        let d = rng.random_range(1..40);
        let spread: f64 = rng.random_range(0.1..10.0);
        let y: Vec<f64> = (0..d).map(|_| rng.random_range(-spread..spread)).collect();
        let r = rng.random_range(1e-3..2.0 * spread);
        out.resize(d, 0.0);
        project_l1_ball(&y, r, &mut out);
        let b = exact_projection_l1(&y, r);
        for (a, b) in out.iter().zip(&b) {
            assert!((a - b).abs() <= 1e-9, "{y:?} r={r}");
        }
    }
}

#[test]
fn l1_projection_examples() {
    let mut out = vec![0.0; 2];
    project_l1_ball(&[2.0, 1.0], 1.0, &mut out);
    assert_eq!(out, vec![1.0, 0.0]);
    project_l1_ball(&[0.2, -0.3], 1.0, &mut out);
    assert_eq!(out, vec![0.2, -0.3]);
}

proptest! {
    #[test]
    fn moreau_identity_l1_linf_pair(y in vec_strategy(20), beta in 1e-3f64..10.0, lambda in 1e-2f64..3.0) {
        let d = y.len();
        // λ‖·‖₁ and the indicator of the λ-ball in ∞-norm are conjugate
        let p = prox(&l1(d, lambda), beta, &y).unwrap();
        for (i, yi) in y.iter().enumerate() {
            let dual = (yi / beta).clamp(-lambda, lambda);
            prop_assert!((p[i] + beta * dual - yi).abs() <= 1e-10);
        }
        let ball = NonsmoothTerm::Indicator(ConvexSet::LinfBall { dim: d, radius: lambda });
        let p = prox(&ball, beta, &y).unwrap();
        for (i, yi) in y.iter().enumerate() {
            let w = yi / beta;
            let dual = (w.abs() - lambda / beta).max(0.0).copysign(w);
            prop_assert!((p[i] + beta * dual - yi).abs() <= 1e-10);
        }
    }

    #[test]
    fn envelope_sandwich(z in vec_strategy(15), beta in 1e-4f64..5.0, lambda in 1e-2f64..3.0) {
        let g = l1(z.len(), lambda);
        let gap = g.evaluate(&z) - smoothed_value(&g, &z, beta).unwrap();
        let lg = g.lipschitz_const().unwrap();
        prop_assert!(gap >= -1e-12);
        prop_assert!(gap <= 0.5 * beta * lg * lg + 1e-12);
    }

    #[test]
    fn homotopy_is_monotone(z in vec_strategy(15), b1 in 1e-3f64..5.0, frac in 0.01f64..1.0, lambda in 1e-2f64..3.0) {
        let b2 = b1 * frac;
        let g = l1(z.len(), lambda);
        let v1 = smoothed_value(&g, &z, b1).unwrap();
        let v2 = smoothed_value(&g, &z, b2).unwrap();
        prop_assert!(v1 <= v2 + 1e-12);
        prop_assert!(v2 <= g.evaluate(&z) + 1e-12);
    }

    #[test]
    fn projections_are_idempotent_and_land_in_the_set(y in vec_strategy(20), r in 0.05f64..4.0) {
        let d = y.len();
        for set in [
            ConvexSet::L1Ball { dim: d, radius: r },
            ConvexSet::LinfBall { dim: d, radius: r },
            ConvexSet::Interval { dim: d, lo: -r, hi: 0.5 * r },
            ConvexSet::nonnegative_orthant(d),
        ] {
            let p = set.project(&y);
            prop_assert!(set.distance(&p) <= 1e-12);
            let pp = set.project(&p);
            for (a, b) in p.iter().zip(&pp) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn projection_is_nonexpansive(a in prop::collection::vec(-5.0f64..5.0, 8), b in prop::collection::vec(-5.0f64..5.0, 8), r in 0.05f64..4.0) {
        let set = ConvexSet::L1Ball { dim: 8, radius: r };
        let (pa, pb) = (set.project(&a), set.project(&b));
        let d = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        prop_assert!(d(&pa, &pb) <= d(&a, &b) + 1e-12);
    }
}

#[test]
fn smoothed_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for trial in 0..20 {
        let (m, n) = (6, 5);
        let a = DenseMatrix::from_fn(m, n, |_, _| rng.random_range(-1.0..1.0));
        let map = DenseMap::new(a);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let beta = rng.random_range(0.05..2.0);
        let term = if trial % 2 == 0 {
            NonsmoothTerm::Indicator(ConvexSet::Interval { dim: m, lo: -0.3, hi: 0.3 })
        } else {
            NonsmoothTerm::Indicator(ConvexSet::Point(vec![0.5; m]))
        };
        let composed = |p: &[f64]| smoothed_value(&term, &map.apply_vec(p), beta).unwrap();
        let grad = smoothed_grad_term(&term, &map, &x, beta).unwrap();
        // skip points sitting on a face of the box, where the penalty is not twice differentiable
        let z = map.apply_vec(&x);
        if z.iter().any(|v| (v.abs() - 0.3).abs() < 1e-3) {
            continue;
        }
        assert!(finite_diff_check(&composed, &grad, &x, 1e-5) <= 1e-5, "trial {trial}");
    }
}
