//! Point estimators of the population mean built from `ybar`, `p` and, in
//! two-phase designs, the first-phase proportion `p'`.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::population::PopulationSummary;
use crate::weights::WeightVector;

/// The `K2` constant; only `+1` and `-1` are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Sign {
    #[default]
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

impl TryFrom<i64> for Sign {
    type Error = Error;

    fn try_from(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            _ => Err(Error::InvalidConstants(format!(
                "K2 must be +1 or -1, got {v}"
            ))),
        }
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i64(self.value() as i64)
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = i64::deserialize(d)?;
        Sign::try_from(v).map_err(serde::de::Error::custom)
    }
}

fn one() -> f64 {
    1.0
}

/// Tunable scalars selecting one member of the estimator classes.
///
/// Every field defaults to 1 (`K2 = +1`), the configuration used for the
/// optimum weighted estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignConstants {
    #[serde(rename = "K1", default = "one")]
    pub k1: f64,
    #[serde(rename = "K2", default)]
    pub k2: Sign,
    #[serde(rename = "K3", default = "one")]
    pub k3: f64,
    #[serde(rename = "K4", default = "one")]
    pub k4: f64,
    #[serde(rename = "K5", default = "one")]
    pub k5: f64,
    #[serde(default = "one")]
    pub alpha: f64,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default = "one")]
    pub lambda: f64,
    #[serde(default = "one")]
    pub m: f64,
    #[serde(default = "one")]
    pub q: f64,
    #[serde(default = "one")]
    pub gamma: f64,
}

impl Default for DesignConstants {
    fn default() -> Self {
        DesignConstants {
            k1: 1.0,
            k2: Sign::Plus,
            k3: 1.0,
            k4: 1.0,
            k5: 1.0,
            alpha: 1.0,
            beta: 1.0,
            lambda: 1.0,
            m: 1.0,
            q: 1.0,
            gamma: 1.0,
        }
    }
}

impl DesignConstants {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("K1", self.k1),
            ("K3", self.k3),
            ("K4", self.k4),
            ("K5", self.k5),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("lambda", self.lambda),
            ("m", self.m),
            ("q", self.q),
            ("gamma", self.gamma),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidConstants(format!(
                    "{name} = {v} is not finite"
                )));
            }
        }
        Ok(())
    }

    /// `K2 * K3`, the additive shift in the ratio-type class.
    pub fn shift(&self) -> f64 {
        self.k2.value() * self.k3
    }
}

/// Shape constants of the two classes at population proportion `P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeConstants {
    #[serde(rename = "V1")]
    pub v1: f64,
    #[serde(rename = "V2")]
    pub v2: f64,
    /// Two-phase counterpart of `V1` (same expression).
    #[serde(rename = "R1")]
    pub r1: f64,
    /// `V2 / 2`.
    #[serde(rename = "R2")]
    pub r2: f64,
}

impl ShapeConstants {
    pub fn new(proportion: f64, dc: &DesignConstants) -> Result<Self> {
        let d1 = dc.k1 * proportion + dc.shift();
        if d1 == 0.0 {
            return Err(Error::ZeroDenominator("K1*P + K2*K3"));
        }
        let d2 = dc.k4 * proportion + dc.k5;
        if d2 == 0.0 {
            return Err(Error::ZeroDenominator("K4*P + K5"));
        }
        let v1 = dc.k1 * proportion / d1;
        let v2 = dc.k4 * proportion / d2;
        Ok(ShapeConstants {
            v1,
            v2,
            r1: v1,
            r2: dc.k4 * proportion / (2.0 * d2),
        })
    }
}

/// Sample-side inputs of an estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleQuantities {
    pub y_bar: f64,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_prime: Option<f64>,
}

impl SampleQuantities {
    pub fn single(y_bar: f64, p: f64) -> Self {
        SampleQuantities {
            y_bar,
            p,
            p_prime: None,
        }
    }

    pub fn two_phase(y_bar: f64, p: f64, p_prime: f64) -> Self {
        SampleQuantities {
            y_bar,
            p,
            p_prime: Some(p_prime),
        }
    }

    fn check(&self) -> Result<()> {
        check_proportion("p", self.p)?;
        if let Some(pp) = self.p_prime {
            check_proportion("p_prime", pp)?;
        }
        Ok(())
    }
}

fn check_proportion(name: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::ProportionOutOfRange { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EstimatorKind {
    /// Sample mean.
    Mean,
    /// `ybar * P / p`.
    NGRatio,
    /// `ybar * p / P`.
    NGProduct,
    /// Ratio-type power class.
    S1,
    /// Exponential class.
    S2,
    /// Weighted combination of mean, `S1`, `S2` with weights summing to one.
    PCombined,
    /// Two-phase ratio-type class.
    D1,
    /// Two-phase exponential class.
    D2,
    /// Weighted combination of mean, `D1`, `D2`.
    PdCombined,
}

impl EstimatorKind {
    pub fn is_two_phase(self) -> bool {
        matches!(
            self,
            EstimatorKind::D1 | EstimatorKind::D2 | EstimatorKind::PdCombined
        )
    }

    pub fn is_combined(self) -> bool {
        matches!(self, EstimatorKind::PCombined | EstimatorKind::PdCombined)
    }

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Mean => "Mean",
            EstimatorKind::NGRatio => "NGRatio",
            EstimatorKind::NGProduct => "NGProduct",
            EstimatorKind::S1 => "S1",
            EstimatorKind::S2 => "S2",
            EstimatorKind::PCombined => "PCombined",
            EstimatorKind::D1 => "D1",
            EstimatorKind::D2 => "D2",
            EstimatorKind::PdCombined => "PdCombined",
        }
    }
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One estimator: kind, constants and (for combined kinds) weights.
///
/// Serialized as a flat JSON object:
/// `{"kind": "S1", "K1": 1, "K2": -1, "K3": 0.5, ..., "weights": [w0, w1, w2]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorSpec {
    pub kind: EstimatorKind,
    #[serde(flatten)]
    pub constants: DesignConstants,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl EstimatorSpec {
    pub fn new(kind: EstimatorKind, constants: DesignConstants) -> Self {
        EstimatorSpec {
            kind,
            constants,
            weights: None,
            label: None,
        }
    }

    pub fn mean() -> Self {
        Self::new(EstimatorKind::Mean, DesignConstants::default())
    }

    pub fn combined(
        kind: EstimatorKind,
        constants: DesignConstants,
        weights: WeightVector,
    ) -> Self {
        EstimatorSpec {
            kind,
            constants,
            weights: Some(weights),
            label: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn display_name(&self) -> String {
        self.label
            .clone()
            .unwrap_or_else(|| self.kind.name().to_string())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let spec: EstimatorSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        match (self.kind.is_combined(), &self.weights) {
            (true, None) => Err(Error::MissingWeights),
            (false, Some(_)) => Err(Error::UnexpectedWeights),
            (true, Some(w)) => w.validate(),
            (false, None) => Ok(()),
        }
    }
}

/// Ratio-type factor `((K1*num + K2*K3) / (K1*den + K2*K3))^power`.
fn ratio_factor(dc: &DesignConstants, num: f64, den: f64, power: f64) -> Result<f64> {
    let top = dc.k1 * num + dc.shift();
    let bottom = dc.k1 * den + dc.shift();
    if bottom == 0.0 {
        return Err(Error::ZeroDenominator("K1*p + K2*K3"));
    }
    let base = top / bottom;
    if base == 0.0 && power < 0.0 {
        return Err(Error::ZeroDenominator("K1*P + K2*K3"));
    }
    if base < 0.0 && power.fract() != 0.0 {
        return Err(Error::Undefined(
            "ratio factor raised to a fractional power",
        ));
    }
    Ok(base.powf(power))
}

/// Exponential bracket `2 - (p/reference)^power * exp(scale * (Dr - Dp)/(Dr + Dp))`
/// with `Dx = K4*x + K5`.
fn exp_bracket(
    dc: &DesignConstants,
    reference: f64,
    p: f64,
    power: f64,
    scale: f64,
) -> Result<f64> {
    if reference == 0.0 {
        return Err(Error::ZeroDenominator("reference proportion"));
    }
    let base = p / reference;
    if base == 0.0 && power < 0.0 {
        return Err(Error::ZeroDenominator("p"));
    }
    let d_ref = dc.k4 * reference + dc.k5;
    let d_p = dc.k4 * p + dc.k5;
    let sum = d_ref + d_p;
    if sum == 0.0 {
        return Err(Error::ZeroDenominator("(K4*P + K5) + (K4*p + K5)"));
    }
    Ok(2.0 - base.powf(power) * (scale * (d_ref - d_p) / sum).exp())
}

fn single_phase_value(
    kind: EstimatorKind,
    dc: &DesignConstants,
    pop: &PopulationSummary,
    s: &SampleQuantities,
) -> Result<f64> {
    let big_p = pop.proportion;
    let y = s.y_bar;
    match kind {
        EstimatorKind::Mean => Ok(y),
        EstimatorKind::NGRatio => {
            if s.p == 0.0 {
                return Err(Error::ZeroDenominator("p"));
            }
            Ok(y * big_p / s.p)
        }
        EstimatorKind::NGProduct => Ok(y * s.p / big_p),
        EstimatorKind::S1 => Ok(y * ratio_factor(dc, big_p, s.p, dc.alpha)?),
        EstimatorKind::S2 => Ok(y * exp_bracket(dc, big_p, s.p, dc.beta, dc.lambda)?),
        _ => Err(Error::WrongPhase(kind.name())),
    }
}

fn two_phase_value(kind: EstimatorKind, dc: &DesignConstants, s: &SampleQuantities) -> Result<f64> {
    let pp = s.p_prime.ok_or(Error::MissingFirstPhase)?;
    let y = s.y_bar;
    match kind {
        EstimatorKind::D1 => Ok(y * ratio_factor(dc, pp, s.p, dc.m)?),
        EstimatorKind::D2 => Ok(y * exp_bracket(dc, pp, s.p, dc.q, dc.gamma)?),
        _ => Err(Error::WrongPhase(kind.name())),
    }
}

/// Evaluates any estimator; two-phase kinds are delegated to [`evaluate_two_phase`].
pub fn evaluate(
    spec: &EstimatorSpec,
    pop: &PopulationSummary,
    s: &SampleQuantities,
) -> Result<f64> {
    if spec.kind.is_two_phase() {
        return evaluate_two_phase(spec, pop, s);
    }
    s.check()?;
    let dc = &spec.constants;
    match spec.kind {
        EstimatorKind::PCombined => {
            let w = spec.weights.ok_or(Error::MissingWeights)?;
            let t1 = single_phase_value(EstimatorKind::S1, dc, pop, s)?;
            let t2 = single_phase_value(EstimatorKind::S2, dc, pop, s)?;
            Ok(w.w0 * s.y_bar + w.w1 * t1 + w.w2 * t2)
        }
        kind => single_phase_value(kind, dc, pop, s),
    }
}

pub fn evaluate_two_phase(
    spec: &EstimatorSpec,
    _pop: &PopulationSummary,
    s: &SampleQuantities,
) -> Result<f64> {
    if !spec.kind.is_two_phase() {
        return Err(Error::WrongPhase(spec.kind.name()));
    }
    s.check()?;
    if s.p_prime.is_none() {
        return Err(Error::MissingFirstPhase);
    }
    let dc = &spec.constants;
    match spec.kind {
        EstimatorKind::PdCombined => {
            let h = spec.weights.ok_or(Error::MissingWeights)?;
            let t1 = two_phase_value(EstimatorKind::D1, dc, s)?;
            let t2 = two_phase_value(EstimatorKind::D2, dc, s)?;
            Ok(h.w0 * s.y_bar + h.w1 * t1 + h.w2 * t2)
        }
        kind => two_phase_value(kind, dc, s),
    }
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

    fn dc(f: impl FnOnce(&mut DesignConstants)) -> DesignConstants {
        let mut d = DesignConstants::default();
        f(&mut d);
        d
    }

    #[test]
    fn mean_is_identity() {
        let s = SampleQuantities::single(3.1, 0.4);
        assert_eq!(
            evaluate(&EstimatorSpec::mean(), &pop_one(), &s).unwrap(),
            3.1
        );
    }

    #[test]
    fn ratio_is_identity_at_truth() {
        let pop = pop_one();
        let s = SampleQuantities::single(2.7, pop.proportion);
        let spec = EstimatorSpec::new(EstimatorKind::NGRatio, DesignConstants::default());
        assert_eq!(evaluate(&spec, &pop, &s).unwrap(), 2.7);
    }

    #[test]
    fn s2_collapses_at_truth() {
        let pop = pop_one();
        let c = dc(|d| {
            d.beta = 1.0;
            d.lambda = -1.0;
            d.k4 = 1.0;
            d.k5 = pop.cv_p;
        });
        let s = SampleQuantities::single(4.2, pop.proportion);
        let v = evaluate(&EstimatorSpec::new(EstimatorKind::S2, c), &pop, &s).unwrap();
        assert_eq!(v, 4.2);
    }

    #[test]
    fn combined_hand_value() {
        // w0*ybar + w1*t_s1 + w2*t_s2 computed term by term.
        let pop = pop_one();
        let w = WeightVector::new(-3.95624, 5.356173, -0.39993);
        let spec = EstimatorSpec::combined(EstimatorKind::PCombined, DesignConstants::default(), w);
        let s = SampleQuantities::single(3.5, 0.15);
        let t1 = 3.5 * (1.1236 / 1.15);
        let t2 = 3.5 * (2.0 - (0.15 / 0.1236) * ((1.1236 - 1.15) / (1.1236 + 1.15f64)).exp());
        let want = -3.95624 * 3.5 + 5.356173 * t1 - 0.39993 * t2;
        let got = evaluate(&spec, &pop, &s).unwrap();
        assert!((got - want).abs() < 1e-12);
    }

    #[test]
    fn d1_on_published_sample_values() {
        let pop = pop_one();
        let c = dc(|d| {
            d.m = 1.0;
            d.k3 = 0.0;
        });
        let s = SampleQuantities::two_phase(1322.0, 0.1304, 0.13336);
        let v = evaluate(&EstimatorSpec::new(EstimatorKind::D1, c), &pop, &s).unwrap();
        assert!((v - 1322.0 * 0.13336 / 0.1304).abs() < 1e-9);
        assert!((v - 1352.01).abs() < 0.01);
    }

    #[test]
    fn two_phase_identity_when_phases_agree() {
        let pop = pop_one();
        let s = SampleQuantities::two_phase(5.0, 0.3, 0.3);
        for kind in [EstimatorKind::D1, EstimatorKind::D2] {
            let v = evaluate(
                &EstimatorSpec::new(kind, DesignConstants::default()),
                &pop,
                &s,
            );
            assert_eq!(v.unwrap(), 5.0);
        }
    }

    #[test]
    fn error_paths() {
        let pop = pop_one();
        let ratio = EstimatorSpec::new(EstimatorKind::NGRatio, DesignConstants::default());
        assert!(matches!(
            evaluate(&ratio, &pop, &SampleQuantities::single(1.0, 0.0)),
            Err(Error::ZeroDenominator("p"))
        ));
        assert!(matches!(
            evaluate(&ratio, &pop, &SampleQuantities::single(1.0, 1.5)),
            Err(Error::ProportionOutOfRange { .. })
        ));
        let d1 = EstimatorSpec::new(EstimatorKind::D1, DesignConstants::default());
        assert!(matches!(
            evaluate(&d1, &pop, &SampleQuantities::single(1.0, 0.2)),
            Err(Error::MissingFirstPhase)
        ));
        let comb = EstimatorSpec::new(EstimatorKind::PCombined, DesignConstants::default());
        assert!(matches!(
            evaluate(&comb, &pop, &SampleQuantities::single(1.0, 0.2)),
            Err(Error::MissingWeights)
        ));
        let s1 = EstimatorSpec::new(
            EstimatorKind::S1,
            dc(|d| {
                d.k2 = Sign::Minus;
                d.k3 = 0.25;
            }),
        );
        assert!(matches!(
            evaluate(&s1, &pop, &SampleQuantities::single(1.0, 0.25)),
            Err(Error::ZeroDenominator(_))
        ));
    }

    #[test]
    fn k2_only_accepts_unit_signs() {
        let ok = r#"{"kind":"S1","K2":-1}"#;
        let spec = EstimatorSpec::from_json_str(ok).unwrap();
        assert_eq!(spec.constants.k2, Sign::Minus);
        assert!(EstimatorSpec::from_json_str(r#"{"kind":"S1","K2":2}"#).is_err());
        assert!(EstimatorSpec::from_json_str(r#"{"kind":"S1","K2":0.5}"#).is_err());
    }

    #[test]
    fn spec_json_shape() {
        let spec = EstimatorSpec::combined(
            EstimatorKind::PCombined,
            DesignConstants::default(),
            WeightVector::new(0.5, 0.25, 0.25),
        );
        let v: serde_json::Value = serde_json::to_value(&spec).unwrap();
        assert_eq!(v["kind"], "PCombined");
        assert_eq!(v["K2"], 1);
        assert_eq!(v["weights"], serde_json::json!([0.5, 0.25, 0.25]));
        let back: EstimatorSpec = serde_json::from_value(v).unwrap();
        assert_eq!(back, spec);
        assert!(matches!(
            EstimatorSpec::from_json_str(r#"{"kind":"Mean","weights":[1,0,0]}"#),
            Err(Error::UnexpectedWeights)
        ));
    }

    #[test]
    fn shape_constants_relation() {
        let sc = ShapeConstants::new(0.3, &dc(|d| d.k5 = 0.7)).unwrap();
        assert_eq!(sc.r2, sc.v2 / 2.0);
        assert_eq!(sc.r1, sc.v1);
    }

    proptest! {
        #[test]
        fn s1_reduces_to_ratio(y in -100.0f64..100.0, p in 0.01f64..1.0) {
            let pop = pop_one();
            let c = dc(|d| { d.alpha = 1.0; d.k1 = 1.0; d.k3 = 0.0; });
            let s = SampleQuantities::single(y, p);
            let a = evaluate(&EstimatorSpec::new(EstimatorKind::S1, c), &pop, &s).unwrap();
            let b = evaluate(&EstimatorSpec::new(EstimatorKind::NGRatio, c), &pop, &s).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }

        #[test]
        fn s1_power_signs_are_reciprocal(
            y in 0.1f64..100.0, p in 0.0f64..1.0, k1 in 0.5f64..10.0, k3 in 0.1f64..5.0,
        ) {
            let pop = pop_one();
            let plus = dc(|d| { d.k1 = k1; d.k3 = k3; d.alpha = 1.0; });
            let minus = DesignConstants { alpha: -1.0, ..plus };
            let s = SampleQuantities::single(y, p);
            let a = evaluate(&EstimatorSpec::new(EstimatorKind::S1, plus), &pop, &s).unwrap();
            let b = evaluate(&EstimatorSpec::new(EstimatorKind::S1, minus), &pop, &s).unwrap();
            prop_assert!((a * b - y * y).abs() <= 1e-10 * y * y);
        }

        #[test]
        fn homogeneous_in_ybar(
            y in -50.0f64..50.0, c in -5.0f64..5.0, p in 0.05f64..1.0, pp in 0.05f64..1.0,
        ) {
            let pop = pop_one();
            let w = WeightVector::new(0.2, 0.5, 0.3);
            let specs = [
                EstimatorSpec::mean(),
                EstimatorSpec::new(EstimatorKind::NGRatio, DesignConstants::default()),
                EstimatorSpec::new(EstimatorKind::NGProduct, DesignConstants::default()),
                EstimatorSpec::new(EstimatorKind::S1, DesignConstants::default()),
                EstimatorSpec::new(EstimatorKind::S2, DesignConstants::default()),
                EstimatorSpec::combined(EstimatorKind::PCombined, DesignConstants::default(), w),
                EstimatorSpec::new(EstimatorKind::D1, DesignConstants::default()),
                EstimatorSpec::new(EstimatorKind::D2, DesignConstants::default()),
                EstimatorSpec::combined(EstimatorKind::PdCombined, DesignConstants::default(), w),
            ];
            for spec in &specs {
                let base = evaluate(spec, &pop, &SampleQuantities::two_phase(y, p, pp)).unwrap();
                let scaled = evaluate(spec, &pop, &SampleQuantities::two_phase(c * y, p, pp)).unwrap();
                prop_assert!((scaled - c * base).abs() <= 1e-10 * (c * base).abs().max(1.0));
            }
        }

        #[test]
        fn every_kind_is_exact_at_reference(y in -50.0f64..50.0, pp in 0.05f64..0.95) {
            let pop = pop_one();
            let w = WeightVector::new(-1.0, 1.5, 0.5);
            let single = [
                EstimatorSpec::new(EstimatorKind::NGRatio, DesignConstants::default()),
                EstimatorSpec::new(EstimatorKind::NGProduct, DesignConstants::default()),
                EstimatorSpec::new(EstimatorKind::S1, DesignConstants::default()),
                EstimatorSpec::new(EstimatorKind::S2, DesignConstants::default()),
                EstimatorSpec::combined(EstimatorKind::PCombined, DesignConstants::default(), w),
            ];
            let at_p = SampleQuantities::single(y, pop.proportion);
            for spec in &single {
                let v = evaluate(spec, &pop, &at_p).unwrap();
                prop_assert!((v - y).abs() <= 1e-12 * y.abs().max(1.0));
            }
            let two = [
                EstimatorSpec::new(EstimatorKind::D1, DesignConstants::default()),
                EstimatorSpec::new(EstimatorKind::D2, DesignConstants::default()),
                EstimatorSpec::combined(EstimatorKind::PdCombined, DesignConstants::default(), w),
            ];
            let at_pp = SampleQuantities::two_phase(y, pp, pp);
            for spec in &two {
                let v = evaluate(spec, &pop, &at_pp).unwrap();
                prop_assert!((v - y).abs() <= 1e-12 * y.abs().max(1.0));
            }
        }
    }
}
