use std::f64::consts::PI;

use nalgebra::Complex;
use proptest::prelude::*;
use tsketch::leverage::universal_tau_bounds;
use tsketch::recovery::{solve_sampled_regression, SampledProblem};
use tsketch::structure::{bucketize, heavy_light_split};
use tsketch::toeplitz::{fold_frequency, normalize_pairs};
use tsketch::*;

fn column() -> impl Strategy<Value = Vec<f64>> {
    (2usize..40).prop_flat_map(|d| prop::collection::vec(-5.0f64..5.0, d))
}

fn pairs(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((1e-3f64..0.499, 0.1f64..2.0), 1..=max)
}

fn factor(d: usize, p: &[(f64, f64)]) -> FourierFactor {
    FourierFactor::from_pairs(d, p, 0.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weighted_column_norm_is_frobenius(a in column(), seed in any::<u64>()) {
        let d = a.len();
        let b: Vec<f64> = (0..d).map(|t| ((seed.wrapping_mul(t as u64 + 1) % 1000) as f64) / 250.0 - 2.0).collect();
        let (a, b) = (SymToeplitz::new(a).unwrap(), SymToeplitz::new(b).unwrap());
        let dense = (a.to_dense() - b.to_dense()).norm();
        let fast = frobenius_via_weighted_column(&a, &b).unwrap();
        prop_assert!((fast - dense).abs() <= 1e-10 * dense.max(1e-300));
    }

    #[test]
    fn synthesis_matches_cosine_sum_and_trace(d in 2usize..64, p in pairs(6)) {
        let f = factor(d, &p);
        let t = vandermonde_synthesize(&f);
        for (lag, &c) in t.first_column().iter().enumerate() {
            let want: f64 = f.pairs().map(|(fr, a)| 2.0 * a * (2.0 * PI * fr * lag as f64).cos()).sum();
            prop_assert!((c - want).abs() <= 1e-9 * f.total_weight());
        }
        let tr = 2.0 * d as f64 * f.total_weight();
        prop_assert!((t.trace() - tr).abs() <= 1e-10 * tr);
    }

    #[test]
    fn inner_product_closed_form(d in 1usize..200, f in -0.5f64..0.5, g in -0.5f64..0.5) {
        let direct: Complex<f64> = (0..d).map(|t| Complex::from_polar(1.0, 2.0 * PI * (g - f) * t as f64)).sum();
        prop_assert!((direct.norm() - inner_product_magnitude(f, g, d)).abs() <= 1e-9);
    }

    #[test]
    fn wrap_distance_is_symmetric_and_bounded(f in -2.0f64..2.0, g in -2.0f64..2.0) {
        let w = wrap_distance(f, g);
        prop_assert!((0.0..=0.5).contains(&w));
        prop_assert_eq!(w, wrap_distance(g, f));
    }

    #[test]
    fn weyl_perturbation(a in prop::collection::vec(-3.0f64..3.0, 12), b in prop::collection::vec(-1.0f64..1.0, 12)) {
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        let (ta, tb, ts) = (SymToeplitz::new(a).unwrap(), SymToeplitz::new(b).unwrap(), SymToeplitz::new(sum).unwrap());
        let (ea, es) = (eig_sym(&ta).unwrap(), eig_sym(&ts).unwrap());
        let nb = eig_sym(&tb).unwrap().eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
        for (x, y) in ea.eigenvalues.iter().zip(&es.eigenvalues) {
            prop_assert!((x - y).abs() <= nb + 1e-10);
        }
    }

    #[test]
    fn best_rank_k_error_is_nonincreasing(c in prop::collection::vec(-3.0f64..3.0, 10)) {
        let t = SymToeplitz::new(c).unwrap();
        let errs: Vec<f64> = (0..=10).map(|k| best_rank_k(&t, k).unwrap().error).collect();
        prop_assert!(errs.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        prop_assert!(errs[10] <= 1e-9 * t.frobenius_norm().max(1.0));
        prop_assert!((errs[0] - t.frobenius_norm()).abs() <= 1e-9 * t.frobenius_norm());
    }

    #[test]
    fn buckets_partition_and_heavy_light_rebuild(d in 4usize..256, p in pairs(12), frac in 0.0f64..1.5) {
        let f = factor(d, &p);
        let b = bucketize(&f);
        prop_assert_eq!(b.buckets.values().map(|x| x.entries.len()).sum::<usize>(), f.len());
        prop_assert!((b.total_weight() - f.total_weight()).abs() <= 1e-12 * f.total_weight());
        let (h, l) = heavy_light_split(&f, frac * b.max_weight()).unwrap();
        prop_assert_eq!(h.len() + l.len(), f.len());
        let full = f.first_column();
        for ((x, y), z) in h.first_column().iter().zip(l.first_column()).zip(&full) {
            prop_assert!((x + y - z).abs() <= 1e-12 * f.total_weight() * 2.0);
        }
    }

    #[test]
    fn normalization_is_idempotent(raw in prop::collection::vec((-3.0f64..3.0, 0.1f64..1.0), 1..10)) {
        let once = normalize_pairs(&raw, 1e-9);
        prop_assert!(once.iter().all(|&(f, _)| (0.0..=0.5).contains(&f)));
        prop_assert!(once.windows(2).all(|w| w[0].0 < w[1].0));
        prop_assert_eq!(normalize_pairs(&once, 1e-9), once.clone());
        let mass: f64 = raw.iter().map(|p| p.1).sum();
        prop_assert!((once.iter().map(|p| p.1).sum::<f64>() - mass).abs() <= 1e-12 * mass);
        for &(f, _) in &raw {
            prop_assert!((0.0..=0.5).contains(&fold_frequency(f)));
        }
    }

    #[test]
    fn sampling_plans_are_deterministic(d in 8usize..300, m in 1usize..64, seed in any::<u64>()) {
        let b = universal_tau_bounds(d, 4.min(d)).unwrap();
        let p1 = draw_sampling_plan(&b, m, seed).unwrap();
        prop_assert_eq!(&p1, &draw_sampling_plan(&b, m, seed).unwrap());
        prop_assert!(p1.indices.iter().all(|&i| i < d));
        prop_assert!(p1.probabilities.iter().all(|&q| q > 0.0 && q <= 1.0));
    }

    #[test]
    fn regression_scales_with_target(d in 16usize..80, p in pairs(3), c in 0.1f64..10.0, seed in any::<u64>()) {
        let f = factor(d, &p);
        let col = f.first_column();
        let b = universal_tau_bounds(d, 8).unwrap();
        let plan = draw_sampling_plan(&b, d, seed).unwrap();
        let sb: Vec<f64> = plan.indices.iter().map(|&i| col[i]).collect();
        let sc: Vec<f64> = sb.iter().map(|x| x * c).collect();
        let r1 = solve_sampled_regression(f.frequencies(), &plan, &sb, 1e-12).unwrap();
        let r2 = solve_sampled_regression(f.frequencies(), &plan, &sc, 1e-12).unwrap();
        let n1: f64 = r1.coefficients.iter().map(|x| x * x).sum::<f64>().sqrt();
        for (x, y) in r1.coefficients.iter().zip(&r2.coefficients) {
            prop_assert!((x * c - y).abs() <= 1e-8 * c * n1.max(1.0));
        }
        prop_assert!((r1.sampled_residual * c - r2.sampled_residual).abs() <= 1e-8 * c * f.total_weight() * d as f64);
    }

    #[test]
    fn full_plan_residual_is_true_error(c in column(), p in pairs(4)) {
        let d = c.len();
        let t = SymToeplitz::new(c).unwrap();
        let f = factor(d, &p);
        let plan = SamplingPlan::full(d);
        let prob = SampledProblem::new(&plan, t.first_column(), 1e-12).unwrap();
        let truth = evaluate_true_error(&t, &f).unwrap();
        prop_assert!((prob.residual_of(&f) - truth).abs() <= 1e-9 * truth.max(1.0));
    }

    #[test]
    fn circulant_eigenvalues_are_weights_times_d(d in 4usize..48, k in 1usize..3, seed in any::<u64>()) {
        let spec = InstanceSpec { family: Family::Circulant, d, k: k.min((d - 1) / 2), sigma: 0.0, seed };
        let inst = gen_instance(&spec).unwrap();
        let mut want: Vec<f64> = inst.factor.weights().iter().flat_map(|&a| [a * d as f64, a * d as f64]).collect();
        want.resize(d, 0.0);
        want.sort_by(|a, b| b.total_cmp(a));
        let got = eig_sym(&inst.matrix).unwrap().eigenvalues;
        for (x, y) in got.iter().zip(&want) {
            prop_assert!((x - y).abs() <= 1e-9 * want[0]);
        }
    }

    #[test]
    fn json_round_trips(c in column(), d in 2usize..64, p in pairs(5)) {
        let t = SymToeplitz::new(c).unwrap();
        let back: SymToeplitz = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
        prop_assert_eq!(back, t);
        let f = factor(d, &p);
        let back: FourierFactor = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        prop_assert_eq!(back, f);
    }
}
