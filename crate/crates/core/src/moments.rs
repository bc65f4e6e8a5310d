//! First-order bias and MSE of every estimator class, single- and two-phase.
//!
//! All formulas are Taylor expansions to order `1/n` in the relative errors
//! `e_y = (ybar - Ybar)/Ybar`, `e_phi = (p - P)/P` and, for two-phase designs,
//! `e_phi' = (p' - P)/P`, with the nested-SRSWOR moments
//!
//! ```text
//! E(e_y^2) = f1 C_y^2     E(e_phi^2) = f1 C_p^2     E(e_y e_phi) = f1 K_p C_p^2
//! E(e_phi'^2) = E(e_phi e_phi') = f2 C_p^2          E(e_y e_phi') = f2 K_p C_p^2
//! ```
//!
//! Every class is linear in the errors at first order, `t - Ybar ~ Ybar (e_y - s * d)`,
//! where `d` is `e_phi` (single phase) or `e_phi - e_phi'` (two phase) and `s`
//! is the class slope. The MSE is then `Ybar^2 (f1 C_y^2 + s^2 f C_p^2 - 2 s f K_p C_p^2)`
//! with `f = f1` or `f3`, minimised at `s = K_p`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{DesignConstants, EstimatorKind, EstimatorSpec, ShapeConstants};
use crate::population::PopulationSummary;
use crate::weights::WeightVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub bias: f64,
    pub mse: f64,
    /// Percent relative efficiency against the sample mean.
    pub pre: f64,
}

impl MomentReport {
    pub fn new(pop: &PopulationSummary, bias: f64, mse: f64) -> Result<Self> {
        Ok(MomentReport {
            bias,
            mse,
            pre: pre(mse, pop)?,
        })
    }

    /// Copy with every field rounded to `decimals` places, for display only.
    pub fn rounded(&self, decimals: u32) -> Self {
        MomentReport {
            bias: round_to(self.bias, decimals),
            mse: round_to(self.mse, decimals),
            pre: round_to(self.pre, decimals),
        }
    }
}

pub fn round_to(x: f64, decimals: u32) -> f64 {
    let s = 10f64.powi(decimals as i32);
    (x * s).round() / s
}

/// Which printed form of the two-phase bias and `t_2d` MSE to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Formulation {
    /// Forms obtained by expanding the estimators with the nested-SRSWOR moments.
    #[default]
    Rederived,
    /// Forms as typeset in the source tables, kept for comparison.
    PaperLiteral,
}

/// Slopes of the combined estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CombinedSlope {
    /// `w1 alpha V1 + w2 (beta - lambda V2 / 2)`.
    #[serde(rename = "Q")]
    pub q: f64,
    /// `h1 m R1 + h2 (q - gamma R2)`.
    #[serde(rename = "L2")]
    pub l2: f64,
    /// `q - gamma R2`.
    #[serde(rename = "L1")]
    pub l1: f64,
}

impl CombinedSlope {
    pub fn new(shape: &ShapeConstants, dc: &DesignConstants, w: &WeightVector) -> Self {
        CombinedSlope {
            q: slope_q(shape, dc, w),
            l2: slope_l2(shape, dc, w),
            l1: slope_l1(shape, dc),
        }
    }
}

/// Exact variance of the sample mean under SRSWOR, `f1 S_y^2`.
pub fn var_mean(pop: &PopulationSummary) -> f64 {
    pop.f1() * pop.s_y() * pop.s_y()
}

/// `100 * Var(ybar) / mse`.
// NaN must fail the positivity check.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn pre(mse: f64, pop: &PopulationSummary) -> Result<f64> {
    if !(mse > 0.0) {
        if pop.sample_size == pop.population_size {
            return Err(Error::Census);
        }
        return Err(Error::Undefined("PRE at non-positive MSE"));
    }
    Ok(100.0 * var_mean(pop) / mse)
}

fn shape(pop: &PopulationSummary, dc: &DesignConstants) -> Result<ShapeConstants> {
    dc.validate()?;
    ShapeConstants::new(pop.proportion, dc)
}

fn two_phase_fpc(pop: &PopulationSummary) -> Result<(f64, f64, f64)> {
    match (pop.f2(), pop.f3()) {
        (Some(f2), Some(f3)) => Ok((pop.f1(), f2, f3)),
        _ => Err(Error::MissingParameter("n_prime")),
    }
}

/// First-order MSE of a single-phase estimator with linear slope `s`.
fn mse_linear_single(pop: &PopulationSummary, s: f64) -> f64 {
    let y2 = pop.y_mean * pop.y_mean;
    let cp2 = pop.cv_p * pop.cv_p;
    y2 * pop.f1() * (pop.cv_y * pop.cv_y + cp2 * (s * s - 2.0 * s * pop.k_p()))
}

/// First-order MSE of a two-phase estimator with linear slope `s` on `e_phi - e_phi'`.
fn mse_linear_two_phase(pop: &PopulationSummary, s: f64) -> Result<f64> {
    let (f1, _, f3) = two_phase_fpc(pop)?;
    let y2 = pop.y_mean * pop.y_mean;
    let cp2 = pop.cv_p * pop.cv_p;
    Ok(y2 * (f1 * pop.cv_y * pop.cv_y + s * s * f3 * cp2 - 2.0 * s * f3 * pop.k_p() * cp2))
}

// ---------------------------------------------------------------------------
// single phase

/// Bias bracket of the ratio-type class: `alpha (alpha+1) V1^2 / 2 - alpha V1 K_p`.
pub fn bracket_s1(alpha: f64, v1: f64, k_p: f64) -> f64 {
    alpha * (alpha + 1.0) * v1 * v1 / 2.0 - alpha * v1 * k_p
}

/// Bias bracket of the exponential class.
pub fn bracket_s2(beta: f64, lambda: f64, v2: f64, k_p: f64) -> f64 {
    lambda * v2 * beta / 2.0
        - beta * (beta - 1.0) / 2.0
        - lambda * (lambda + 2.0) * v2 * v2 / 8.0
        - beta * k_p
        + lambda * v2 * k_p / 2.0
}

pub fn bias_s1(pop: &PopulationSummary, dc: &DesignConstants) -> Result<f64> {
    let sc = shape(pop, dc)?;
    let cp2 = pop.cv_p * pop.cv_p;
    Ok(pop.y_mean * pop.f1() * cp2 * bracket_s1(dc.alpha, sc.v1, pop.k_p()))
}

pub fn mse_s1(pop: &PopulationSummary, dc: &DesignConstants) -> Result<f64> {
    let sc = shape(pop, dc)?;
    let a = dc.alpha;
    let v = sc.v1;
    let cp2 = pop.cv_p * pop.cv_p;
    let y2 = pop.y_mean * pop.y_mean;
    Ok(y2 * pop.f1() * (pop.cv_y * pop.cv_y + cp2 * (a * a * v * v - 2.0 * v * a * pop.k_p())))
}

pub fn report_s1(pop: &PopulationSummary, dc: &DesignConstants) -> Result<MomentReport> {
    MomentReport::new(pop, bias_s1(pop, dc)?, mse_s1(pop, dc)?)
}

pub fn bias_s2(pop: &PopulationSummary, dc: &DesignConstants) -> Result<f64> {
    let sc = shape(pop, dc)?;
    let cp2 = pop.cv_p * pop.cv_p;
    Ok(pop.y_mean * pop.f1() * cp2 * bracket_s2(dc.beta, dc.lambda, sc.v2, pop.k_p()))
}

pub fn mse_s2(pop: &PopulationSummary, dc: &DesignConstants) -> Result<f64> {
    let sc = shape(pop, dc)?;
    let (b, l, v) = (dc.beta, dc.lambda, sc.v2);
    let cp2 = pop.cv_p * pop.cv_p;
    let y2 = pop.y_mean * pop.y_mean;
    let quad = b * b + l * l * v * v / 4.0 - b * l * v;
    let cross = 2.0 * pop.k_p() * cp2 * (b - l * v / 2.0);
    Ok(y2 * pop.f1() * (pop.cv_y * pop.cv_y + cp2 * quad - cross))
}

pub fn report_s2(pop: &PopulationSummary, dc: &DesignConstants) -> Result<MomentReport> {
    MomentReport::new(pop, bias_s2(pop, dc)?, mse_s2(pop, dc)?)
}

pub fn slope_q(shape: &ShapeConstants, dc: &DesignConstants, w: &WeightVector) -> f64 {
    w.w1 * dc.alpha * shape.v1 + w.w2 * (dc.beta - dc.lambda * shape.v2 / 2.0)
}

pub fn bias_p(pop: &PopulationSummary, dc: &DesignConstants, w: &WeightVector) -> Result<f64> {
    let sc = shape(pop, dc)?;
    let k_p = pop.k_p();
    let a1 = bracket_s1(dc.alpha, sc.v1, k_p);
    let a2 = bracket_s2(dc.beta, dc.lambda, sc.v2, k_p);
    let cp2 = pop.cv_p * pop.cv_p;
    Ok(pop.y_mean * pop.f1() * cp2 * (w.w1 * a1 + w.w2 * a2))
}

pub fn mse_p(pop: &PopulationSummary, dc: &DesignConstants, w: &WeightVector) -> Result<f64> {
    let sc = shape(pop, dc)?;
    Ok(mse_linear_single(pop, slope_q(&sc, dc, w)))
}

pub fn report_p(
    pop: &PopulationSummary,
    dc: &DesignConstants,
    w: &WeightVector,
) -> Result<MomentReport> {
    MomentReport::new(pop, bias_p(pop, dc, w)?, mse_p(pop, dc, w)?)
}

/// Minimum MSE over the weighted family, `Ybar^2 f1 C_y^2 (1 - rho^2)`, with zero bias.
pub fn mse_p_min(pop: &PopulationSummary) -> Result<MomentReport> {
    let mse =
        pop.y_mean * pop.y_mean * pop.f1() * pop.cv_y * pop.cv_y * (1.0 - pop.rho_pb * pop.rho_pb);
    MomentReport::new(pop, 0.0, mse)
}

// ---------------------------------------------------------------------------
// two phase

pub fn slope_l1(shape: &ShapeConstants, dc: &DesignConstants) -> f64 {
    dc.q - dc.gamma * shape.r2
}

pub fn slope_l2(shape: &ShapeConstants, dc: &DesignConstants, h: &WeightVector) -> f64 {
    h.w1 * dc.m * shape.r1 + h.w2 * slope_l1(shape, dc)
}

/// `B(t_1d) / Ybar`.
pub fn bias_ratio_1d(
    pop: &PopulationSummary,
    dc: &DesignConstants,
    form: Formulation,
) -> Result<f64> {
    let sc = shape(pop, dc)?;
    let (f1, f2, f3) = two_phase_fpc(pop)?;
    let (m, r1, k_p) = (dc.m, sc.r1, pop.k_p());
    let cp2 = pop.cv_p * pop.cv_p;
    Ok(match form {
        Formulation::Rederived => f3 * cp2 * (m * (m + 1.0) * r1 * r1 / 2.0 - m * r1 * k_p),
        Formulation::PaperLiteral => {
            m * (m - 1.0) * r1 * r1 * f2 * cp2 / 2.0 + m * (m + 1.0) * r1 * r1 * f1 * cp2 / 2.0
                - m * m * r1 * r1 * f2 * cp2
                + m * r1 * f3 * k_p * cp2
        }
    })
}

/// `B(t_2d) / Ybar`.
pub fn bias_ratio_2d(
    pop: &PopulationSummary,
    dc: &DesignConstants,
    form: Formulation,
) -> Result<f64> {
    let sc = shape(pop, dc)?;
    let (f1, f2, f3) = two_phase_fpc(pop)?;
    let (q, g, r2, k_p) = (dc.q, dc.gamma, sc.r2, pop.k_p());
    let cp2 = pop.cv_p * pop.cv_p;
    Ok(match form {
        Formulation::Rederived => {
            f3 * cp2
                * (q * g * r2
                    - q * (q - 1.0) / 2.0
                    - g * (g + 2.0) * r2 * r2 / 2.0
                    - (q - g * r2) * k_p)
        }
        Formulation::PaperLiteral => {
            -q * (q - 1.0) * f1 * cp2 / 2.0
                + q * (q + 1.0) * f2 * cp2 / 2.0
                + q * f2 * k_p * cp2
                + q * q * f2 * cp2
                + f3 * g * r2 * k_p * cp2
                + f3 * g * r2 * q * cp2
        }
    })
}

pub fn bias_1d(pop: &PopulationSummary, dc: &DesignConstants, form: Formulation) -> Result<f64> {
    Ok(pop.y_mean * bias_ratio_1d(pop, dc, form)?)
}

pub fn mse_1d(pop: &PopulationSummary, dc: &DesignConstants) -> Result<f64> {
    let sc = shape(pop, dc)?;
    mse_linear_two_phase(pop, dc.m * sc.r1)
}

pub fn report_1d(
    pop: &PopulationSummary,
    dc: &DesignConstants,
    form: Formulation,
) -> Result<MomentReport> {
    MomentReport::new(pop, bias_1d(pop, dc, form)?, mse_1d(pop, dc)?)
}

pub fn bias_2d(pop: &PopulationSummary, dc: &DesignConstants, form: Formulation) -> Result<f64> {
    Ok(pop.y_mean * bias_ratio_2d(pop, dc, form)?)
}

/// MSE of `t_2d`. The literal form omits the cross term `-2 L1 f3 K_p C_p^2`.
pub fn mse_2d(pop: &PopulationSummary, dc: &DesignConstants, form: Formulation) -> Result<f64> {
    let sc = shape(pop, dc)?;
    let l1 = slope_l1(&sc, dc);
    match form {
        Formulation::Rederived => mse_linear_two_phase(pop, l1),
        Formulation::PaperLiteral => {
            let (f1, _, f3) = two_phase_fpc(pop)?;
            let cp2 = pop.cv_p * pop.cv_p;
            Ok(pop.y_mean * pop.y_mean * (f1 * pop.cv_y * pop.cv_y + l1 * l1 * f3 * cp2))
        }
    }
}

pub fn report_2d(
    pop: &PopulationSummary,
    dc: &DesignConstants,
    form: Formulation,
) -> Result<MomentReport> {
    MomentReport::new(pop, bias_2d(pop, dc, form)?, mse_2d(pop, dc, form)?)
}

/// `h1 B(t_1d) + h2 B(t_2d)`.
pub fn bias_pd(
    pop: &PopulationSummary,
    dc: &DesignConstants,
    h: &WeightVector,
    form: Formulation,
) -> Result<f64> {
    Ok(h.w1 * bias_1d(pop, dc, form)? + h.w2 * bias_2d(pop, dc, form)?)
}

pub fn mse_pd(pop: &PopulationSummary, dc: &DesignConstants, h: &WeightVector) -> Result<f64> {
    let sc = shape(pop, dc)?;
    mse_linear_two_phase(pop, slope_l2(&sc, dc, h))
}

pub fn report_pd(
    pop: &PopulationSummary,
    dc: &DesignConstants,
    h: &WeightVector,
    form: Formulation,
) -> Result<MomentReport> {
    MomentReport::new(pop, bias_pd(pop, dc, h, form)?, mse_pd(pop, dc, h)?)
}

/// `Ybar^2 C_y^2 (f1 - f3 rho^2)`, with zero bias.
pub fn mse_pd_min(pop: &PopulationSummary) -> Result<MomentReport> {
    let (f1, _, f3) = two_phase_fpc(pop)?;
    let mse = pop.y_mean * pop.y_mean * pop.cv_y * pop.cv_y * (f1 - f3 * pop.rho_pb * pop.rho_pb);
    MomentReport::new(pop, 0.0, mse)
}

// ---------------------------------------------------------------------------

/// Closed-form report for any estimator spec.
pub fn report_for(
    spec: &EstimatorSpec,
    pop: &PopulationSummary,
    form: Formulation,
) -> Result<MomentReport> {
    spec.validate()?;
    let dc = &spec.constants;
    let ng = |alpha: f64| DesignConstants {
        k1: 1.0,
        k3: 0.0,
        alpha,
        ..*dc
    };
    match spec.kind {
        EstimatorKind::Mean => MomentReport::new(pop, 0.0, var_mean(pop)),
        EstimatorKind::NGRatio => report_s1(pop, &ng(1.0)),
        EstimatorKind::NGProduct => report_s1(pop, &ng(-1.0)),
        EstimatorKind::S1 => report_s1(pop, dc),
        EstimatorKind::S2 => report_s2(pop, dc),
        EstimatorKind::PCombined => {
            report_p(pop, dc, spec.weights.as_ref().ok_or(Error::MissingWeights)?)
        }
        EstimatorKind::D1 => report_1d(pop, dc, form),
        EstimatorKind::D2 => report_2d(pop, dc, form),
        EstimatorKind::PdCombined => report_pd(
            pop,
            dc,
            spec.weights.as_ref().ok_or(Error::MissingWeights)?,
            form,
        ),
    }
}
