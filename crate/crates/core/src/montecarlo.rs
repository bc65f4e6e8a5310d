//! Finite-population Monte Carlo: synthetic populations with prescribed
//! summaries, SRSWOR and nested two-phase draws, and empirical moments of any
//! estimator.
//!
//! Replication `r` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `r`,
//! and partial results are merged in replication order, so output does not
//! depend on the number of worker threads.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{evaluate, EstimatorSpec, SampleQuantities};
use crate::moments::{self, Formulation};
use crate::population::{
    summarize_microdata, MicrodataSummary, PopulationSummary, Record, SummaryMode,
};

pub const RNG_ALGORITHM: &str =
    "ChaCha8Rng (rand_chacha), seed_from_u64(seed), stream = replication index";

/// Replications per reduction block.
const CHUNK: u64 = 4096;

/// Share of degenerate draws above which an estimator is flagged unstable.
pub const UNSTABLE_SHARE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualShape {
    #[default]
    Gaussian,
    /// Student t with 3 degrees of freedom.
    HeavyTail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticPopulation {
    pub units: Vec<Record>,
    /// Summary recomputed from `units`, carrying the target's design sizes.
    pub achieved: PopulationSummary,
    pub microdata: MicrodataSummary,
}

impl SyntheticPopulation {
    pub fn from_units(units: Vec<Record>, n: usize, n_prime: Option<usize>) -> Result<Self> {
        let microdata = summarize_microdata(&units, SummaryMode::Population)?;
        let achieved = microdata.to_population_summary(n, n_prime)?;
        Ok(SyntheticPopulation {
            units,
            achieved,
            microdata,
        })
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    fn quantities(&self, idx: &[usize]) -> (f64, f64) {
        if idx.len() == self.units.len() {
            return (self.achieved.y_mean, self.achieved.proportion);
        }
        let k = idx.len() as f64;
        let (sy, sp) = idx.iter().fold((0.0, 0usize), |(sy, sp), &i| {
            let u = &self.units[i];
            (sy + u.y, sp + usize::from(u.phi))
        });
        (sy / k, sp as f64 / k)
    }
}

/// Builds `N` units whose summary reproduces `target`'s mean, `C_y` and
/// `rho_pb`, with `round(N P)` attribute holders.
pub fn build_population(
    target: &PopulationSummary,
    seed: u64,
    shape: ResidualShape,
) -> Result<SyntheticPopulation> {
    target.validate()?;
    let big_n = target.population_size;
    let attr = (big_n as f64 * target.proportion).round() as usize;
    if attr == 0 || attr == big_n {
        return Err(Error::InfeasibleTarget {
            reason: format!(
                "round(N P) = {attr} leaves no variation in the attribute (N = {big_n})"
            ),
        });
    }
    let rho = target.rho_pb;
    let s_y = target.s_y().abs();
    let nf = big_n as f64;
    let pa = attr as f64 / nf;
    let s_phi = (nf / (nf - 1.0) * pa * (1.0 - pa)).sqrt();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phi = vec![false; big_n];
    for i in index::sample(&mut rng, big_n, attr) {
        phi[i] = true;
    }

    let mut eps: Vec<f64> = match shape {
        ResidualShape::Gaussian => (0..big_n).map(|_| rng.sample(StandardNormal)).collect(),
        ResidualShape::HeavyTail => {
            let t = StudentT::new(3.0).expect("valid degrees of freedom");
            (0..big_n).map(|_| t.sample(&mut rng)).collect()
        }
    };
    // Centre within each group so the residuals carry no attribute signal.
    for group in [true, false] {
        let members: Vec<usize> = (0..big_n).filter(|&i| phi[i] == group).collect();
        let m = members.iter().map(|&i| eps[i]).sum::<f64>() / members.len() as f64;
        for &i in &members {
            eps[i] -= m;
        }
    }
    let ss: f64 = eps.iter().map(|e| e * e).sum();
    let want_ss = (1.0 - rho * rho) * (nf - 1.0) * s_y * s_y;
    let scale = if want_ss == 0.0 {
        0.0
    } else if ss > 0.0 {
        (want_ss / ss).sqrt()
    } else {
        return Err(Error::InfeasibleTarget {
            reason: format!(
                "with {attr} of {big_n} units holding the attribute no within-group spread exists; \
                 only |rho_pb| = 1 is attainable"
            ),
        });
    };

    let delta = rho * s_y / s_phi;
    let mu0 = target.y_mean - delta * pa;
    let mut y: Vec<f64> = (0..big_n)
        .map(|i| mu0 + delta * f64::from(u8::from(phi[i])) + scale * eps[i])
        .collect();

    // Affine recalibration pins the mean and spread to machine precision.
    let mean = y.iter().sum::<f64>() / nf;
    let sd = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt();
    let k = if sd > 0.0 { s_y / sd } else { 0.0 };
    for v in &mut y {
        *v = target.y_mean + (*v - mean) * k;
    }

    let units = y
        .into_iter()
        .zip(phi)
        .map(|(y, phi)| Record::new(y, phi))
        .collect();
    SyntheticPopulation::from_units(units, target.sample_size, target.first_phase_size)
}

/// Indices of an SRSWOR sample of size `n` from `0..big_n`.
pub fn draw_srswor_indices<R: Rng + ?Sized>(rng: &mut R, big_n: usize, n: usize) -> Vec<usize> {
    index::sample(rng, big_n, n).into_vec()
}

/// Nested draw: SRSWOR of size `n_prime`, then SRSWOR of size `n` from it.
pub fn draw_two_phase_indices<R: Rng + ?Sized>(
    rng: &mut R,
    big_n: usize,
    n_prime: usize,
    n: usize,
) -> (Vec<usize>, Vec<usize>) {
    let first = draw_srswor_indices(rng, big_n, n_prime);
    let second = index::sample(rng, n_prime, n)
        .into_iter()
        .map(|j| first[j])
        .collect();
    (first, second)
}

fn check_sizes(popn: &SyntheticPopulation, n_prime: Option<usize>, n: usize) -> Result<()> {
    let big_n = popn.len();
    let upper = n_prime.unwrap_or(big_n);
    if n == 0 || n > upper || upper > big_n {
        return Err(Error::InvalidSummary(format!(
            "design sizes must satisfy 1 <= n <= n' <= N (n = {n}, n' = {upper}, N = {big_n})"
        )));
    }
    Ok(())
}

pub fn draw_srswor<R: Rng + ?Sized>(
    popn: &SyntheticPopulation,
    n: usize,
    rng: &mut R,
) -> Result<SampleQuantities> {
    check_sizes(popn, None, n)?;
    let idx = draw_srswor_indices(rng, popn.len(), n);
    let (y, p) = popn.quantities(&idx);
    Ok(SampleQuantities::single(y, p))
}

pub fn draw_two_phase<R: Rng + ?Sized>(
    popn: &SyntheticPopulation,
    n_prime: usize,
    n: usize,
    rng: &mut R,
) -> Result<SampleQuantities> {
    check_sizes(popn, Some(n_prime), n)?;
    let (first, second) = draw_two_phase_indices(rng, popn.len(), n_prime, n);
    let (_, p_prime) = popn.quantities(&first);
    let (y, p) = popn.quantities(&second);
    Ok(SampleQuantities::two_phase(y, p, p_prime))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Design {
    Single { n: usize },
    TwoPhase { n_prime: usize, n: usize },
}

impl Design {
    pub fn n(self) -> usize {
        match self {
            Design::Single { n } | Design::TwoPhase { n, .. } => n,
        }
    }

    pub fn n_prime(self) -> Option<usize> {
        match self {
            Design::Single { .. } => None,
            Design::TwoPhase { n_prime, .. } => Some(n_prime),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationPlan {
    pub replications: u64,
    pub seed: u64,
    pub design: Design,
    pub estimators: Vec<EstimatorSpec>,
}

impl SimulationPlan {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let plan: SimulationPlan = serde_json::from_str(s)?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::InvalidSummary(
                "replications must be at least 1".into(),
            ));
        }
        if self.estimators.is_empty() {
            return Err(Error::InvalidSummary("plan lists no estimators".into()));
        }
        if let Design::TwoPhase { n_prime, n } = self.design {
            if n > n_prime {
                return Err(Error::InvalidSummary(format!(
                    "second-phase size {n} exceeds first-phase size {n_prime}"
                )));
            }
        }
        for spec in &self.estimators {
            spec.validate()?;
            if spec.kind.is_two_phase() && self.design.n_prime().is_none() {
                return Err(Error::WrongPhase(spec.kind.name()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMoments {
    pub mean_estimate: f64,
    pub emp_bias: f64,
    pub emp_mse: f64,
    pub std_error_of_bias: f64,
    pub std_error_of_mse: f64,
}

/// Running moments of `d = t - Ybar` and `d^2`, mergeable in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
struct Acc {
    count: u64,
    degenerate: u64,
    mean_d: f64,
    m2_d: f64,
    mean_d2: f64,
    m2_d2: f64,
}

impl Acc {
    fn push(&mut self, d: f64) {
        self.count += 1;
        let k = self.count as f64;
        let delta = d - self.mean_d;
        self.mean_d += delta / k;
        self.m2_d += delta * (d - self.mean_d);
        let d2 = d * d;
        let delta2 = d2 - self.mean_d2;
        self.mean_d2 += delta2 / k;
        self.m2_d2 += delta2 * (d2 - self.mean_d2);
    }

    fn merge(&mut self, o: &Acc) {
        self.degenerate += o.degenerate;
        if o.count == 0 {
            return;
        }
        if self.count == 0 {
            let degenerate = self.degenerate;
            *self = *o;
            self.degenerate = degenerate;
            return;
        }
        let (a, b) = (self.count as f64, o.count as f64);
        let t = a + b;
        let dd = o.mean_d - self.mean_d;
        self.mean_d += dd * b / t;
        self.m2_d += o.m2_d + dd * dd * a * b / t;
        let dd2 = o.mean_d2 - self.mean_d2;
        self.mean_d2 += dd2 * b / t;
        self.m2_d2 += o.m2_d2 + dd2 * dd2 * a * b / t;
        self.count += o.count;
    }

    fn moments(&self, y_mean: f64) -> Option<EmpiricalMoments> {
        if self.count == 0 {
            return None;
        }
        let k = self.count as f64;
        let se = |m2: f64| {
            if self.count < 2 {
                f64::NAN
            } else {
                (m2 / (k - 1.0) / k).sqrt()
            }
        };
        Some(EmpiricalMoments {
            mean_estimate: y_mean + self.mean_d,
            emp_bias: self.mean_d,
            emp_mse: self.mean_d2,
            std_error_of_bias: se(self.m2_d),
            std_error_of_mse: se(self.m2_d2),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub bias: f64,
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub name: String,
    pub spec: EstimatorSpec,
    pub empirical: Option<EmpiricalMoments>,
    pub closed_form: Option<ClosedForm>,
    /// `(emp_bias - bias) / std_error_of_bias`.
    pub z_bias: Option<f64>,
    /// `(emp_mse - mse) / std_error_of_mse`.
    pub z_mse: Option<f64>,
    pub used_draws: u64,
    pub degenerate_draws: u64,
    pub unstable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    pub rng: String,
    pub seed: u64,
    pub replications: u64,
    pub design: Design,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub metadata: RunMetadata,
    /// Summary of the simulated population with the plan's design attached.
    pub population: PopulationSummary,
    pub estimators: Vec<EstimatorResult>,
}

impl SimulationReport {
    pub fn get(&self, name: &str) -> Option<&EstimatorResult> {
        self.estimators.iter().find(|e| e.name == name)
    }
}

fn closed_form(spec: &EstimatorSpec, pop: &PopulationSummary) -> Option<ClosedForm> {
    use crate::estimators::EstimatorKind as K;
    let dc = &spec.constants;
    let form = Formulation::Rederived;
    let w = spec.weights.as_ref();
    let ng = |alpha: f64| crate::estimators::DesignConstants {
        k1: 1.0,
        k3: 0.0,
        alpha,
        ..*dc
    };
    let pair = match spec.kind {
        K::Mean => Ok((0.0, moments::var_mean(pop))),
        K::NGRatio => {
            moments::bias_s1(pop, &ng(1.0)).and_then(|b| Ok((b, moments::mse_s1(pop, &ng(1.0))?)))
        }
        K::NGProduct => {
            moments::bias_s1(pop, &ng(-1.0)).and_then(|b| Ok((b, moments::mse_s1(pop, &ng(-1.0))?)))
        }
        K::S1 => moments::bias_s1(pop, dc).and_then(|b| Ok((b, moments::mse_s1(pop, dc)?))),
        K::S2 => moments::bias_s2(pop, dc).and_then(|b| Ok((b, moments::mse_s2(pop, dc)?))),
        K::PCombined => w
            .ok_or(Error::MissingWeights)
            .and_then(|w| Ok((moments::bias_p(pop, dc, w)?, moments::mse_p(pop, dc, w)?))),
        K::D1 => moments::bias_1d(pop, dc, form).and_then(|b| Ok((b, moments::mse_1d(pop, dc)?))),
        K::D2 => {
            moments::bias_2d(pop, dc, form).and_then(|b| Ok((b, moments::mse_2d(pop, dc, form)?)))
        }
        K::PdCombined => w.ok_or(Error::MissingWeights).and_then(|h| {
            Ok((
                moments::bias_pd(pop, dc, h, form)?,
                moments::mse_pd(pop, dc, h)?,
            ))
        }),
    };
    pair.ok().map(|(bias, mse)| ClosedForm { bias, mse })
}

/// Runs `plan` on `popn`.
pub fn run(plan: &SimulationPlan, popn: &SyntheticPopulation) -> Result<SimulationReport> {
    plan.validate()?;
    let design = plan.design;
    check_sizes(popn, design.n_prime(), design.n())?;
    let pop = popn.achieved.with_design(design.n(), design.n_prime())?;
    let y_mean = pop.y_mean;
    let k = plan.estimators.len();

    let chunks = plan.replications.div_ceil(CHUNK);
    let partials: Vec<Vec<Acc>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut accs = vec![Acc::default(); k];
            let end = ((c + 1) * CHUNK).min(plan.replications);
            for r in c * CHUNK..end {
                let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
                rng.set_stream(r);
                let s = match design {
                    Design::Single { n } => draw_srswor(popn, n, &mut rng),
                    Design::TwoPhase { n_prime, n } => draw_two_phase(popn, n_prime, n, &mut rng),
                }
                .expect("design sizes checked");
                for (acc, spec) in accs.iter_mut().zip(&plan.estimators) {
                    match evaluate(spec, &pop, &s) {
                        Ok(t) if t.is_finite() => acc.push(t - y_mean),
                        _ => acc.degenerate += 1,
                    }
                }
            }
            accs
        })
        .collect();

    let mut totals = vec![Acc::default(); k];
    for part in &partials {
        for (t, p) in totals.iter_mut().zip(part) {
            t.merge(p);
        }
    }

    let estimators = plan
        .estimators
        .iter()
        .zip(&totals)
        .map(|(spec, acc)| {
            let empirical = acc.moments(y_mean);
            let closed = closed_form(spec, &pop);
            let z = |emp: f64, th: f64, se: f64| (se > 0.0).then(|| (emp - th) / se);
            let (z_bias, z_mse) = match (&empirical, &closed) {
                (Some(e), Some(c)) => (
                    z(e.emp_bias, c.bias, e.std_error_of_bias),
                    z(e.emp_mse, c.mse, e.std_error_of_mse),
                ),
                _ => (None, None),
            };
            EstimatorResult {
                name: spec.display_name(),
                spec: spec.clone(),
                empirical,
                closed_form: closed,
                z_bias,
                z_mse,
                used_draws: acc.count,
                degenerate_draws: acc.degenerate,
                unstable: acc.degenerate as f64 > UNSTABLE_SHARE * plan.replications as f64,
            }
        })
        .collect();

    Ok(SimulationReport {
        metadata: RunMetadata {
            rng: RNG_ALGORITHM.to_string(),
            seed: plan.seed,
            replications: plan.replications,
            design,
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
        population: pop,
        estimators,
    })
}
