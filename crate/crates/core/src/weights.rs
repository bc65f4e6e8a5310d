//! Bias-cancelling weights for the combined estimators.
//!
//! Three conditions pin the weights `(w0, w1, w2)`:
//!
//! 1. they sum to one,
//! 2. the combined slope equals `K_p` (minimum MSE),
//! 3. the weighted first-order biases cancel.
//!
//! The system is assembled from these conditions directly and solved by
//! Gaussian elimination with partial pivoting.

use serde::{Deserialize, Serialize};

use crate::error::{Degeneracy, Error, Result};
use crate::estimators::{DesignConstants, EstimatorKind, EstimatorSpec, ShapeConstants};
use crate::moments::{self, Formulation};
use crate::population::PopulationSummary;

/// Tolerance on `w0 + w1 + w2 - 1` for externally supplied weights. Published
/// weights are rounded to a few decimals; solver output meets `1e-10`.
pub const INPUT_SUM_TOLERANCE: f64 = 1e-4;

/// Relative determinant threshold below which a system counts as singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct WeightVector {
    pub w0: f64,
    pub w1: f64,
    pub w2: f64,
}

impl WeightVector {
    pub const fn new(w0: f64, w1: f64, w2: f64) -> Self {
        WeightVector { w0, w1, w2 }
    }

    pub fn sum(&self) -> f64 {
        self.w0 + self.w1 + self.w2
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.w0, self.w1, self.w2]
    }

    pub fn validate(&self) -> Result<()> {
        if !self.as_array().iter().all(|w| w.is_finite()) {
            return Err(Error::InvalidConstants("weights must be finite".into()));
        }
        if (self.sum() - 1.0).abs() > INPUT_SUM_TOLERANCE {
            return Err(Error::InvalidConstants(format!(
                "weights sum to {}, expected 1",
                self.sum()
            )));
        }
        Ok(())
    }
}

impl From<[f64; 3]> for WeightVector {
    fn from(a: [f64; 3]) -> Self {
        WeightVector::new(a[0], a[1], a[2])
    }
}

impl From<WeightVector> for [f64; 3] {
    fn from(w: WeightVector) -> Self {
        w.as_array()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Single,
    Two,
}

/// Constraint rows: sum, slope, bias; right-hand side `(1, K_p, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSystem {
    pub phase: Phase,
    pub row_sum: [f64; 3],
    pub row_slope: [f64; 3],
    pub row_bias: [f64; 3],
    pub rhs: [f64; 3],
}

impl WeightSystem {
    pub fn matrix(&self) -> [[f64; 3]; 3] {
        [self.row_sum, self.row_slope, self.row_bias]
    }

    pub fn k_p(&self) -> f64 {
        self.rhs[1]
    }

    /// `max_i |(M w - rhs)_i|`.
    pub fn residual(&self, w: &WeightVector) -> f64 {
        let x = w.as_array();
        self.matrix()
            .iter()
            .zip(self.rhs.iter())
            .map(|(row, b)| (dot(row, &x) - b).abs())
            .fold(0.0, f64::max)
    }

    /// Determinant of the lower-right 2x2 block (equal to the full determinant).
    pub fn determinant(&self) -> f64 {
        self.row_slope[1] * self.row_bias[2] - self.row_slope[2] * self.row_bias[1]
    }

    /// Same system with the roles of the two non-trivial estimators exchanged.
    pub fn swapped(&self) -> Self {
        let sw = |r: [f64; 3]| [r[0], r[2], r[1]];
        WeightSystem {
            row_sum: sw(self.row_sum),
            row_slope: sw(self.row_slope),
            row_bias: sw(self.row_bias),
            ..*self
        }
    }
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Single-phase system over `(ybar, t_s1, t_s2)`.
///
/// The bias row holds the brackets `A1`, `A2`; their common factor
/// `Ybar f1 C_p^2` is divided out.
pub fn build_system_single(pop: &PopulationSummary, dc: &DesignConstants) -> Result<WeightSystem> {
    pop.validate()?;
    dc.validate()?;
    let sc = ShapeConstants::new(pop.proportion, dc)?;
    let k_p = pop.k_p();
    Ok(WeightSystem {
        phase: Phase::Single,
        row_sum: [1.0, 1.0, 1.0],
        row_slope: [0.0, dc.alpha * sc.v1, dc.beta - dc.lambda * sc.v2 / 2.0],
        row_bias: [
            0.0,
            moments::bracket_s1(dc.alpha, sc.v1, k_p),
            moments::bracket_s2(dc.beta, dc.lambda, sc.v2, k_p),
        ],
        rhs: [1.0, k_p, 0.0],
    })
}

/// Two-phase system over `(ybar, t_1d, t_2d)`; bias row is `B(t_id) / Ybar`.
pub fn build_system_two_phase(
    pop: &PopulationSummary,
    dc: &DesignConstants,
    form: Formulation,
) -> Result<WeightSystem> {
    pop.validate()?;
    dc.validate()?;
    let sc = ShapeConstants::new(pop.proportion, dc)?;
    Ok(WeightSystem {
        phase: Phase::Two,
        row_sum: [1.0, 1.0, 1.0],
        row_slope: [0.0, dc.m * sc.r1, moments::slope_l1(&sc, dc)],
        row_bias: [
            0.0,
            moments::bias_ratio_1d(pop, dc, form)?,
            moments::bias_ratio_2d(pop, dc, form)?,
        ],
        rhs: [1.0, pop.k_p(), 0.0],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightSolution {
    pub weights: WeightVector,
    /// `max_i |(M w - rhs)_i|`.
    pub residual: f64,
    /// Infinity-norm condition number of the constraint matrix.
    pub condition: f64,
    pub determinant: f64,
}

/// Solves the constraint system, rejecting singular or infeasible systems.
pub fn solve_weights(sys: &WeightSystem) -> Result<WeightSolution> {
    let [_, s1, s2] = sys.row_slope;
    let [_, b1, b2] = sys.row_bias;
    let det = sys.determinant();

    if s1 == 0.0 && s2 == 0.0 && sys.k_p() != 0.0 {
        return Err(Error::Infeasible { k_p: sys.k_p() });
    }
    let scale = s1.hypot(s2) * b1.hypot(b2);
    if scale == 0.0 || det.abs() < SINGULAR_THRESHOLD * scale {
        let degeneracy = if (s1 == 0.0 && b1 == 0.0) || (s2 == 0.0 && b2 == 0.0) {
            Degeneracy::CollinearEstimators
        } else if s1 == 0.0 && s2 == 0.0 {
            Degeneracy::ZeroSlopes
        } else {
            Degeneracy::DependentRows
        };
        return Err(Error::SingularSystem {
            determinant: det,
            degeneracy,
        });
    }

    let m = sys.matrix();
    let x = gauss_solve(m, sys.rhs).ok_or(Error::SingularSystem {
        determinant: det,
        degeneracy: Degeneracy::DependentRows,
    })?;
    let weights = WeightVector::from(x);
    Ok(WeightSolution {
        weights,
        residual: sys.residual(&weights),
        condition: condition_inf(m).unwrap_or(f64::INFINITY),
        determinant: det,
    })
}

/// The weighted estimator of `phase` with solver weights for `dc`.
pub fn optimum_spec(
    pop: &PopulationSummary,
    dc: &DesignConstants,
    phase: Phase,
    form: Formulation,
) -> Result<EstimatorSpec> {
    let (sys, kind) = match phase {
        Phase::Single => (build_system_single(pop, dc)?, EstimatorKind::PCombined),
        Phase::Two => (
            build_system_two_phase(pop, dc, form)?,
            EstimatorKind::PdCombined,
        ),
    };
    let sol = solve_weights(&sys)?;
    Ok(EstimatorSpec::combined(kind, *dc, sol.weights))
}

/// Gaussian elimination with partial pivoting on a 3x3 system.
#[allow(clippy::needless_range_loop)]
fn gauss_solve(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    const N: usize = 3;
    for col in 0..N {
        let pivot = (col..N)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot][col] == 0.0 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..N {
            let factor = a[row][col] / a[col][col];
            for k in col..N {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; N];
    for row in (0..N).rev() {
        let tail: f64 = (row + 1..N).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

fn norm_inf(m: &[[f64; 3]; 3]) -> f64 {
    m.iter()
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn condition_inf(m: [[f64; 3]; 3]) -> Option<f64> {
    let mut inv = [[0.0; 3]; 3];
    for j in 0..3 {
        let mut e = [0.0; 3];
        e[j] = 1.0;
        let col = gauss_solve(m, e)?;
        for i in 0..3 {
            inv[i][j] = col[i];
        }
    }
    Some(norm_inf(&m) * norm_inf(&inv))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pop_one() -> PopulationSummary {
        PopulationSummary {
            population_size: 89,
            sample_size: 20,
            first_phase_size: None,
            y_mean: 3.360,
            proportion: 0.1236,
            cv_y: 0.60400,
            cv_p: 2.19012,
            rho_pb: 0.766,
            beta2_phi: Some(6.2381),
        }
    }

    /// Cramer's rule on the block structure; independent of the elimination path.
    fn cramer(sys: &WeightSystem) -> [f64; 3] {
        let [_, s1, s2] = sys.row_slope;
        let [_, b1, b2] = sys.row_bias;
        let k = sys.rhs[1];
        let det = s1 * b2 - s2 * b1;
        let w1 = k * b2 / det;
        let w2 = -k * b1 / det;
        [1.0 - w1 - w2, w1, w2]
    }

    #[test]
    fn pop_one_system_entries() {
        let sys = build_system_single(&pop_one(), &DesignConstants::default()).unwrap();
        assert!((sys.row_bias[1] - (-0.011138)).abs() < 1e-6);
        assert!((sys.row_bias[2] - (-0.149168)).abs() < 1e-6);
        assert!((sys.row_slope[1] - 0.110004).abs() < 1e-6);
        assert!((sys.rhs[1] - 0.2112505).abs() < 1e-7);
    }

    #[test]
    fn pop_one_weights_match_published() {
        let sys = build_system_single(&pop_one(), &DesignConstants::default()).unwrap();
        let sol = solve_weights(&sys).unwrap();
        let w = sol.weights;
        assert!((w.w0 - -3.95624).abs() < 1e-3);
        assert!((w.w1 - 5.356173).abs() < 1e-3);
        assert!((w.w2 - -0.39993).abs() < 1e-3);
        assert!((w.sum() - 1.0).abs() < 1e-12);
        assert!(sol.residual < 1e-12);
        let c = cramer(&sys);
        for (a, b) in w.as_array().iter().zip(c.iter()) {
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn uncorrelated_population_keeps_the_mean() {
        let mut p = pop_one();
        p.rho_pb = 0.0;
        let sys = build_system_single(&p, &DesignConstants::default()).unwrap();
        assert_eq!(sys.rhs, [1.0, 0.0, 0.0]);
        let w = solve_weights(&sys).unwrap().weights;
        assert!((w.w0 - 1.0).abs() < 1e-15 && w.w1.abs() < 1e-15 && w.w2.abs() < 1e-15);

        let mut p2 = p.clone();
        p2.first_phase_size = Some(45);
        let sys = build_system_two_phase(&p2, &DesignConstants::default(), Formulation::Rederived)
            .unwrap();
        let h = solve_weights(&sys).unwrap().weights;
        assert!((h.w0 - 1.0).abs() < 1e-15 && h.w1.abs() < 1e-15 && h.w2.abs() < 1e-15);
    }

    #[test]
    fn alpha_zero_is_collinear() {
        let dc = DesignConstants {
            alpha: 0.0,
            ..Default::default()
        };
        let sys = build_system_single(&pop_one(), &dc).unwrap();
        assert_eq!(sys.row_slope[1], 0.0);
        assert_eq!(sys.row_bias[1], 0.0);
        match solve_weights(&sys) {
            Err(Error::SingularSystem { degeneracy, .. }) => {
                assert_eq!(degeneracy, Degeneracy::CollinearEstimators)
            }
            other => panic!("expected singular, got {other:?}"),
        }
    }

    #[test]
    fn zero_slopes_are_infeasible() {
        let dc = DesignConstants {
            alpha: 0.0,
            beta: 0.0,
            lambda: 0.0,
            ..Default::default()
        };
        let sys = build_system_single(&pop_one(), &dc).unwrap();
        assert!(matches!(solve_weights(&sys), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn census_first_phase_reduces_to_single_phase() {
        let mut p = pop_one();
        p.first_phase_size = Some(p.population_size);
        let dc = DesignConstants {
            k4: 2.0,
            k5: 0.5,
            ..Default::default()
        };
        let single = solve_weights(&build_system_single(&p, &dc).unwrap()).unwrap();
        let two = solve_weights(&build_system_two_phase(&p, &dc, Formulation::Rederived).unwrap())
            .unwrap();
        for (a, b) in single.weights.as_array().iter().zip(two.weights.as_array()) {
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0));
        }
    }

    #[test]
    fn two_phase_pop_one_residuals() {
        let p = PopulationSummary {
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
        let sys = build_system_two_phase(&p, &dc, Formulation::Rederived).unwrap();
        let sol = solve_weights(&sys).unwrap();
        assert!((sol.weights.sum() - 1.0).abs() < 1e-10);
        assert!(sol.residual < 1e-10);
        let sc = ShapeConstants::new(p.proportion, &dc).unwrap();
        let l2 = moments::slope_l2(&sc, &dc, &sol.weights);
        assert!((l2 - p.k_p()).abs() < 1e-10);
        assert!(
            moments::bias_pd(&p, &dc, &sol.weights, Formulation::Rederived)
                .unwrap()
                .abs()
                < 1e-9 * p.y_mean
        );
    }

    #[test]
    fn weight_json_is_an_array() {
        let w = WeightVector::new(0.25, 0.5, 0.25);
        assert_eq!(serde_json::to_string(&w).unwrap(), "[0.25,0.5,0.25]");
        let back: WeightVector = serde_json::from_str("[0.25,0.5,0.25]").unwrap();
        assert_eq!(back, w);
        assert!(WeightVector::new(0.5, 0.5, 0.5).validate().is_err());
    }

    proptest! {
        #[test]
        fn swapping_estimators_swaps_weights(
            rho in -0.95f64..0.95, p in 0.05f64..0.95, cp in 0.2f64..3.0, cy in 0.1f64..2.0,
            k3 in 0.1f64..3.0, k5 in 0.1f64..3.0,
        ) {
            let pop = PopulationSummary {
                population_size: 200, sample_size: 30, first_phase_size: None,
                y_mean: 10.0, proportion: p, cv_y: cy, cv_p: cp, rho_pb: rho, beta2_phi: None,
            };
            let dc = DesignConstants { k3, k5, ..Default::default() };
            let sys = build_system_single(&pop, &dc).unwrap();
            if let (Ok(a), Ok(b)) = (solve_weights(&sys), solve_weights(&sys.swapped())) {
                let tol = 1e-8 * (1.0 + a.weights.w1.abs() + a.weights.w2.abs());
                prop_assert!((a.weights.w0 - b.weights.w0).abs() < tol);
                prop_assert!((a.weights.w1 - b.weights.w2).abs() < tol);
                prop_assert!((a.weights.w2 - b.weights.w1).abs() < tol);
            }
        }

        #[test]
        fn solution_satisfies_every_row(
            rho in -0.95f64..0.95, p in 0.05f64..0.95, cp in 0.2f64..3.0,
            alpha in -2.0f64..2.0, beta in -2.0f64..2.0, lambda in -2.0f64..2.0,
        ) {
            let pop = PopulationSummary {
                population_size: 120, sample_size: 25, first_phase_size: None,
                y_mean: 4.0, proportion: p, cv_y: 0.5, cv_p: cp, rho_pb: rho, beta2_phi: None,
            };
            let dc = DesignConstants { alpha, beta, lambda, ..Default::default() };
            let sys = build_system_single(&pop, &dc).unwrap();
            if let Ok(sol) = solve_weights(&sys) {
                if sol.condition < 1e4 {
                    prop_assert!(sol.residual < 1e-10 * sys.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs())));
                }
            }
        }
    }
}
