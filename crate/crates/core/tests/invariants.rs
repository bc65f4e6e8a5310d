use attrmean::moments::{self, Formulation};
use attrmean::weights::{build_system_single, build_system_two_phase};
use attrmean::{
    solve_weights, summarize_microdata, DesignConstants, PopulationSummary, Record, SummaryMode,
};
use proptest::prelude::*;

fn records() -> impl Strategy<Value = Vec<Record>> {
    prop::collection::vec((-50.0f64..50.0, any::<bool>()), 3..60)
        .prop_filter("attribute must vary", |v| {
            v.iter().any(|r| r.1) && v.iter().any(|r| !r.1)
        })
        .prop_map(|v| v.into_iter().map(|(y, p)| Record::new(y, p)).collect())
}

fn population() -> impl Strategy<Value = PopulationSummary> {
    (
        30usize..500,
        0.05f64..0.95,
        0.05f64..1.5,
        0.2f64..3.0,
        -0.99f64..0.99,
        -100.0f64..100.0,
        0.05f64..0.5,
        0.1f64..1.0,
    )
        .prop_filter("nonzero mean", |t| t.5.abs() > 0.1)
        .prop_map(|(big_n, p, cy, cp, rho, y, fn_, ff)| {
            let n_prime = ((big_n as f64 * ff) as usize).clamp(4, big_n);
            let n = ((n_prime as f64 * fn_) as usize).max(2);
            PopulationSummary {
                population_size: big_n,
                sample_size: n,
                first_phase_size: Some(n_prime),
                y_mean: y,
                proportion: p,
                cv_y: cy,
                cv_p: cp,
                rho_pb: rho,
                beta2_phi: None,
            }
        })
}

fn constants() -> impl Strategy<Value = DesignConstants> {
    (
        0.2f64..4.0,
        0.0f64..2.0,
        0.2f64..4.0,
        0.0f64..2.0,
        -2.0f64..2.0,
        -2.0f64..2.0,
        -2.0f64..2.0,
    )
        .prop_map(|(k1, k3, k4, k5, alpha, beta, lambda)| DesignConstants {
            k1,
            k3,
            k4,
            k5,
            alpha,
            beta,
            lambda,
            m: alpha,
            q: beta,
            gamma: lambda,
            ..Default::default()
        })
}

proptest! {
    #[test]
    fn microdata_permutation_invariant(recs in records(), seed in any::<u64>()) {
        let a = summarize_microdata(&recs, SummaryMode::Population).unwrap();
        let mut shuffled = recs.clone();
        let k = shuffled.len();
        shuffled.rotate_left((seed % k as u64) as usize);
        shuffled.reverse();
        let b = summarize_microdata(&shuffled, SummaryMode::Population).unwrap();
        prop_assert_eq!(a.proportion, b.proportion);
        prop_assert!((a.y_mean - b.y_mean).abs() <= 1e-12 * (1.0 + a.y_mean.abs()));
        prop_assert!((a.s_y2 - b.s_y2).abs() <= 1e-9 * (1.0 + a.s_y2));
        prop_assert!((a.rho_pb - b.rho_pb).abs() <= 1e-9);
    }

    #[test]
    fn attribute_variance_is_binary(recs in records()) {
        let s = summarize_microdata(&recs, SummaryMode::Population).unwrap();
        let nf = recs.len() as f64;
        let want = nf * s.proportion * (1.0 - s.proportion) / (nf - 1.0);
        prop_assert!((s.s_phi2 - want).abs() <= 1e-12 * want);
    }

    #[test]
    fn scaling_y_keeps_correlation(recs in records(), c in 0.01f64..100.0) {
        let a = summarize_microdata(&recs, SummaryMode::Population).unwrap();
        let scaled: Vec<Record> = recs.iter().map(|r| Record::new(c * r.y, r.phi)).collect();
        let b = summarize_microdata(&scaled, SummaryMode::Population).unwrap();
        prop_assert!((b.s_y2.sqrt() - c * a.s_y2.sqrt()).abs() <= 1e-9 * (1.0 + c * a.s_y2.sqrt()));
        prop_assert!((b.s_yphi - c * a.s_yphi).abs() <= 1e-9 * (1.0 + (c * a.s_yphi).abs()));
        prop_assert!((b.rho_pb - a.rho_pb).abs() <= 1e-9);
    }

    #[test]
    fn fpc_split(pop in population()) {
        let (f1, f2, f3) = (pop.f1(), pop.f2().unwrap(), pop.f3().unwrap());
        prop_assert_eq!(f3, f1 - f2);
        prop_assert!((f2 + f3 - f1).abs() <= 2.0 * f64::EPSILON * f1);
        prop_assert!(f3 >= 0.0);
    }

    #[test]
    fn optimum_bounds_every_member(pop in population(), dc in constants()) {
        let single = PopulationSummary { first_phase_size: None, ..pop };
        let best = moments::mse_p_min(&single).unwrap().mse;
        let slack = 1e-12 * best.abs().max(1e-300);
        if let Ok(m) = moments::mse_s1(&single, &dc) {
            prop_assert!(best <= m + slack);
        }
        if let Ok(m) = moments::mse_s2(&single, &dc) {
            prop_assert!(best <= m + slack);
        }
    }

    #[test]
    fn two_phase_optimum_costs_information(pop in population()) {
        let single = PopulationSummary { first_phase_size: None, ..pop };
        let one = moments::mse_p_min(&single).unwrap().mse;
        let two = moments::mse_pd_min(&pop).unwrap().mse;
        prop_assert!(two >= one * (1.0 - 1e-12));
        let census = PopulationSummary { first_phase_size: Some(pop.population_size), ..pop };
        let two = moments::mse_pd_min(&census).unwrap().mse;
        prop_assert!((two - one).abs() <= 1e-10 * one);
    }

    #[test]
    fn solver_weights_are_unbiased_and_optimal(pop in population(), dc in constants()) {
        let single = PopulationSummary { first_phase_size: None, ..pop };
        if let Ok(sol) = build_system_single(&single, &dc).and_then(|s| solve_weights(&s)) {
            let w = &sol.weights;
            let bias = moments::bias_p(&single, &dc, w).unwrap();
            let b1 = moments::bias_s1(&single, &dc).unwrap() * w.w1;
            let b2 = moments::bias_s2(&single, &dc).unwrap() * w.w2;
            prop_assert!(bias.abs() <= 1e-9 * single.y_mean.abs(), "{} {} {}", bias, b1, b2);
            prop_assert!(sol.residual <= 1e-10 * (1.0 + sol.condition) * single.k_p().abs().max(1.0));
        }
        if let Ok(sol) =
            build_system_two_phase(&pop, &dc, Formulation::Rederived).and_then(|s| solve_weights(&s))
        {
            let h = &sol.weights;
            let b1 = moments::bias_1d(&pop, &dc, Formulation::Rederived).unwrap() * h.w1;
            let b2 = moments::bias_2d(&pop, &dc, Formulation::Rederived).unwrap() * h.w2;
            let bias = moments::bias_pd(&pop, &dc, h, Formulation::Rederived).unwrap();
            prop_assert!(bias.abs() <= 1e-9 * pop.y_mean.abs(), "{} {} {}", bias, b1, b2);
        }
    }
}
