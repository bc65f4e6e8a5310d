//! Independent check of the closed-form bias and MSE.
//!
//! Each estimator is treated as a black box `t(ybar, p[, p'])`. Its gradient
//! and Hessian at the truth are taken by central differences and combined with
//! the covariance of the sample quantities under (nested) SRSWOR:
//! `bias ~ tr(H S) / 2`, `mse ~ g' S g`.

use attrmean::moments::{self, Formulation};
use attrmean::{
    evaluate, DesignConstants, EstimatorKind, EstimatorSpec, PopulationSummary, SampleQuantities,
    Sign, WeightVector,
};
use proptest::prelude::*;

struct Taylor {
    grad: Vec<f64>,
    hess: Vec<Vec<f64>>,
}

fn taylor(f: impl Fn(&[f64]) -> f64, x0: &[f64]) -> Taylor {
    let d = x0.len();
    let h: Vec<f64> = x0.iter().map(|v| 1e-4 * v.abs().max(1e-3)).collect();
    let at = |shifts: &[(usize, f64)]| {
        let mut x = x0.to_vec();
        for &(i, s) in shifts {
            x[i] += s;
        }
        f(&x)
    };
    let f0 = f(x0);
    let mut grad = vec![0.0; d];
    let mut hess = vec![vec![0.0; d]; d];
    for i in 0..d {
        let (fp, fm) = (at(&[(i, h[i])]), at(&[(i, -h[i])]));
        grad[i] = (fp - fm) / (2.0 * h[i]);
        hess[i][i] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in 0..i {
            let v = (at(&[(i, h[i]), (j, h[j])])
                - at(&[(i, h[i]), (j, -h[j])])
                - at(&[(i, -h[i]), (j, h[j])])
                + at(&[(i, -h[i]), (j, -h[j])]))
                / (4.0 * h[i] * h[j]);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    Taylor { grad, hess }
}

/// Covariance of `(ybar, p)` or `(ybar, p, p')`.
fn covariance(pop: &PopulationSummary, two_phase: bool) -> Vec<Vec<f64>> {
    let (y, p) = (pop.y_mean, pop.proportion);
    let f1 = 1.0 / pop.sample_size as f64 - 1.0 / pop.population_size as f64;
    let sy = pop.cv_y * y;
    let sp = pop.cv_p * p;
    let syp = pop.rho_pb * sy * sp;
    if !two_phase {
        return vec![vec![f1 * sy * sy, f1 * syp], vec![f1 * syp, f1 * sp * sp]];
    }
    let f2 = 1.0 / pop.first_phase_size.unwrap() as f64 - 1.0 / pop.population_size as f64;
    vec![
        vec![f1 * sy * sy, f1 * syp, f2 * syp],
        vec![f1 * syp, f1 * sp * sp, f2 * sp * sp],
        vec![f2 * syp, f2 * sp * sp, f2 * sp * sp],
    ]
}

#[allow(clippy::needless_range_loop)]
fn linearized(spec: &EstimatorSpec, pop: &PopulationSummary) -> (f64, f64) {
    let two = spec.kind.is_two_phase();
    let x0: Vec<f64> = if two {
        vec![pop.y_mean, pop.proportion, pop.proportion]
    } else {
        vec![pop.y_mean, pop.proportion]
    };
    let t = taylor(
        |x| {
            let s = if two {
                SampleQuantities::two_phase(x[0], x[1], x[2])
            } else {
                SampleQuantities::single(x[0], x[1])
            };
            evaluate(spec, pop, &s).unwrap()
        },
        &x0,
    );
    let s = covariance(pop, two);
    let d = x0.len();
    let mut bias = 0.0;
    let mut mse = 0.0;
    for i in 0..d {
        for j in 0..d {
            bias += 0.5 * t.hess[i][j] * s[i][j];
            mse += t.grad[i] * t.grad[j] * s[i][j];
        }
    }
    (bias, mse)
}

fn closed(spec: &EstimatorSpec, pop: &PopulationSummary) -> (f64, f64) {
    let dc = &spec.constants;
    let f = Formulation::Rederived;
    match spec.kind {
        EstimatorKind::S1 => (
            moments::bias_s1(pop, dc).unwrap(),
            moments::mse_s1(pop, dc).unwrap(),
        ),
        EstimatorKind::S2 => (
            moments::bias_s2(pop, dc).unwrap(),
            moments::mse_s2(pop, dc).unwrap(),
        ),
        EstimatorKind::PCombined => {
            let w = spec.weights.as_ref().unwrap();
            (
                moments::bias_p(pop, dc, w).unwrap(),
                moments::mse_p(pop, dc, w).unwrap(),
            )
        }
        EstimatorKind::D1 => (
            moments::bias_1d(pop, dc, f).unwrap(),
            moments::mse_1d(pop, dc).unwrap(),
        ),
        EstimatorKind::D2 => (
            moments::bias_2d(pop, dc, f).unwrap(),
            moments::mse_2d(pop, dc, f).unwrap(),
        ),
        EstimatorKind::PdCombined => {
            let h = spec.weights.as_ref().unwrap();
            (
                moments::bias_pd(pop, dc, h, f).unwrap(),
                moments::mse_pd(pop, dc, h).unwrap(),
            )
        }
        _ => unreachable!(),
    }
}

fn assert_close(kind: EstimatorKind, what: &str, got: f64, want: f64, scale: f64) {
    assert!(
        (got - want).abs() <= 1e-5 * scale,
        "{kind:?} {what}: closed form {want}, linearized {got}"
    );
}

fn check(spec: &EstimatorSpec, pop: &PopulationSummary) {
    let (b_lin, m_lin) = linearized(spec, pop);
    let (b, m) = closed(spec, pop);
    let var = moments::var_mean(pop);
    assert_close(spec.kind, "mse", m_lin, m, m.abs().max(var));
    assert_close(
        spec.kind,
        "bias",
        b_lin,
        b,
        b.abs().max(var / pop.y_mean.abs()),
    );
}

fn population() -> impl Strategy<Value = PopulationSummary> {
    (
        40usize..400,
        0.05f64..0.9,
        0.1f64..1.2,
        0.3f64..3.0,
        -0.95f64..0.95,
        1.0f64..100.0,
        0.05f64..0.45,
        0.2f64..0.9,
    )
        .prop_map(|(big_n, p, cy, cp, rho, y, frac_n, frac_first)| {
            let n_prime = ((big_n as f64 * frac_first) as usize).max(6);
            let n = ((n_prime as f64 * frac_n) as usize).max(3);
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
        (0.2f64..5.0, any::<bool>(), 0.0f64..2.0),
        (0.2f64..5.0, 0.0f64..2.0),
        (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0),
        (-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0),
    )
        .prop_map(
            |((k1, plus, k3), (k4, k5), (alpha, beta, lambda), (m, q, gamma))| DesignConstants {
                k1,
                k2: if plus { Sign::Plus } else { Sign::Minus },
                k3,
                k4,
                k5,
                alpha,
                beta,
                lambda,
                m,
                q,
                gamma,
            },
        )
}

fn denominators_clear(pop: &PopulationSummary, dc: &DesignConstants) -> bool {
    let p = pop.proportion;
    (dc.k1 * p + dc.shift()).abs() > 0.05 * dc.k1 * p && (dc.k4 * p + dc.k5).abs() > 1e-3
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn single_phase_forms_match_linearization(
        pop in population(), dc in constants(), w1 in -3.0f64..3.0, w2 in -3.0f64..3.0,
    ) {
        prop_assume!(denominators_clear(&pop, &dc));
        let single = PopulationSummary { first_phase_size: None, ..pop };
        check(&EstimatorSpec::new(EstimatorKind::S1, dc), &single);
        check(&EstimatorSpec::new(EstimatorKind::S2, dc), &single);
        let w = WeightVector::from([1.0 - w1 - w2, w1, w2]);
        check(&EstimatorSpec::combined(EstimatorKind::PCombined, dc, w), &single);
    }

    #[test]
    fn two_phase_forms_match_linearization(
        pop in population(), dc in constants(), h1 in -3.0f64..3.0, h2 in -3.0f64..3.0,
    ) {
        prop_assume!(denominators_clear(&pop, &dc));
        check(&EstimatorSpec::new(EstimatorKind::D1, dc), &pop);
        check(&EstimatorSpec::new(EstimatorKind::D2, dc), &pop);
        let h = WeightVector::from([1.0 - h1 - h2, h1, h2]);
        check(&EstimatorSpec::combined(EstimatorKind::PdCombined, dc, h), &pop);
    }
}

#[test]
fn literal_two_phase_bias_disagrees_with_linearization() {
    let pop = PopulationSummary {
        population_size: 89,
        sample_size: 23,
        first_phase_size: Some(45),
        y_mean: 1322.0,
        proportion: 0.1304,
        cv_y: 0.69144,
        cv_p: 2.7005,
        rho_pb: 0.408,
        beta2_phi: None,
    };
    let dc = DesignConstants::default();
    let spec = EstimatorSpec::new(EstimatorKind::D1, dc);
    let (b_lin, _) = linearized(&spec, &pop);
    let literal = moments::bias_1d(&pop, &dc, Formulation::PaperLiteral).unwrap();
    let rederived = moments::bias_1d(&pop, &dc, Formulation::Rederived).unwrap();
    assert!((b_lin - rederived).abs() < 1e-5 * rederived.abs());
    assert!((b_lin - literal).abs() > 1e-2 * rederived.abs());
}
