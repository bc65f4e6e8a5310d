//! Population-level parameters and the constants every moment formula consumes.
//!
//! A [`PopulationSummary`] is the published (or recomputed) profile of a finite
//! population with a study variable `y` and a binary attribute `phi`. The
//! [`DerivedConstants`] carry the finite-population corrections, the optimum
//! slope `K_p = rho_pb * C_y / C_p` and the exact variance of the sample mean.

use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSummary {
    #[serde(rename = "N")]
    pub population_size: usize,
    #[serde(rename = "n")]
    pub sample_size: usize,
    #[serde(rename = "n_prime", default, skip_serializing_if = "Option::is_none")]
    pub first_phase_size: Option<usize>,
    pub y_mean: f64,
    #[serde(rename = "P")]
    pub proportion: f64,
    #[serde(rename = "C_y")]
    pub cv_y: f64,
    #[serde(rename = "C_p")]
    pub cv_p: f64,
    pub rho_pb: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta2_phi: Option<f64>,
}

impl PopulationSummary {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let pop: PopulationSummary = serde_json::from_str(s)?;
        pop.validate()?;
        Ok(pop)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Checks the ordering and range constraints.
    ///
    /// `n' = n` is accepted; it describes a first phase that carries no extra
    /// information (`f3 = 0`).
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSummary(msg));
        let big_n = self.population_size;
        let n = self.sample_size;
        if big_n < 2 {
            return bad(format!("N = {big_n} must be at least 2"));
        }
        if n < 2 || n > big_n {
            return bad(format!("n = {n} must satisfy 2 <= n <= N = {big_n}"));
        }
        if let Some(np) = self.first_phase_size {
            if np < n || np > big_n {
                return bad(format!(
                    "n' = {np} must satisfy n = {n} <= n' <= N = {big_n}"
                ));
            }
        }
        if !(self.proportion > 0.0 && self.proportion < 1.0) {
            return bad(format!(
                "P = {} must lie strictly inside (0, 1)",
                self.proportion
            ));
        }
        if !self.y_mean.is_finite() || self.y_mean == 0.0 {
            return bad(format!(
                "y_mean = {} must be finite and nonzero",
                self.y_mean
            ));
        }
        if !(self.cv_y >= 0.0 && self.cv_y.is_finite()) {
            return bad(format!(
                "C_y = {} must be finite and non-negative",
                self.cv_y
            ));
        }
        if !(self.cv_p > 0.0 && self.cv_p.is_finite()) {
            return bad(format!("C_p = {} must be finite and positive", self.cv_p));
        }
        if !(self.rho_pb.abs() <= 1.0) {
            return bad(format!("rho_pb = {} must lie in [-1, 1]", self.rho_pb));
        }
        if let Some(b) = self.beta2_phi {
            if !b.is_finite() {
                return bad(format!("beta2_phi = {b} must be finite"));
            }
        }
        Ok(())
    }

    /// Same population with a different sampling design.
    pub fn with_design(&self, n: usize, n_prime: Option<usize>) -> Result<Self> {
        let pop = PopulationSummary {
            sample_size: n,
            first_phase_size: n_prime,
            ..self.clone()
        };
        pop.validate()?;
        Ok(pop)
    }

    pub fn f1(&self) -> f64 {
        1.0 / self.sample_size as f64 - 1.0 / self.population_size as f64
    }

    pub fn f2(&self) -> Option<f64> {
        self.first_phase_size
            .map(|np| 1.0 / np as f64 - 1.0 / self.population_size as f64)
    }

    /// `f1 - f2 = 1/n - 1/n'`, the extra variance added by the second phase.
    pub fn f3(&self) -> Option<f64> {
        self.f2().map(|f2| self.f1() - f2)
    }

    pub fn k_p(&self) -> f64 {
        self.rho_pb * self.cv_y / self.cv_p
    }

    pub fn s_y(&self) -> f64 {
        self.cv_y * self.y_mean
    }

    /// Attribute standard deviation implied by `C_p`, i.e. `C_p * P`.
    pub fn s_phi(&self) -> f64 {
        self.cv_p * self.proportion
    }

    /// Attribute standard deviation implied by the 0/1 structure alone,
    /// `sqrt(N P (1 - P) / (N - 1))`.
    pub fn s_phi_binary(&self) -> f64 {
        let big_n = self.population_size as f64;
        let p = self.proportion;
        (big_n * p * (1.0 - p) / (big_n - 1.0)).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    pub f1: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f3: Option<f64>,
    #[serde(rename = "K_p")]
    pub k_p: f64,
    #[serde(rename = "S_phi")]
    pub s_phi: f64,
    /// `sqrt(N P (1-P)/(N-1))`; differs from `S_phi` when the published `C_p`
    /// is not the 0/1-consistent value.
    #[serde(rename = "S_phi_binary")]
    pub s_phi_binary: f64,
    /// Sampling fraction `n/N`.
    pub f: f64,
    /// `1 - f`.
    pub g: f64,
    pub var_ybar: f64,
    /// `n = N`: all designs degenerate.
    pub census: bool,
}

impl DerivedConstants {
    /// Relative gap between `S_phi^2 = C_p^2 P^2` and the 0/1-structure value.
    pub fn attribute_inconsistency(&self) -> f64 {
        let a = self.s_phi * self.s_phi;
        let b = self.s_phi_binary * self.s_phi_binary;
        (a - b).abs() / b
    }
}

pub fn derive_constants(pop: &PopulationSummary) -> Result<DerivedConstants> {
    pop.validate()?;
    let f1 = pop.f1();
    let f = pop.sample_size as f64 / pop.population_size as f64;
    Ok(DerivedConstants {
        f1,
        f2: pop.f2(),
        f3: pop.f3(),
        k_p: pop.k_p(),
        s_phi: pop.s_phi(),
        s_phi_binary: pop.s_phi_binary(),
        f,
        g: 1.0 - f,
        var_ybar: f1 * pop.s_y() * pop.s_y(),
        census: pop.sample_size == pop.population_size,
    })
}

/// One unit: study value and attribute indicator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub y: f64,
    pub phi: bool,
}

impl Record {
    pub fn new(y: f64, phi: bool) -> Self {
        Record { y, phi }
    }

    #[inline]
    pub fn phi_value(&self) -> f64 {
        if self.phi {
            1.0
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SummaryMode {
    Population,
    Sample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MicrodataSummary {
    pub mode: SummaryMode,
    pub count: usize,
    pub y_mean: f64,
    #[serde(rename = "P")]
    pub proportion: f64,
    #[serde(rename = "S_y2")]
    pub s_y2: f64,
    #[serde(rename = "S_phi2")]
    pub s_phi2: f64,
    #[serde(rename = "S_yphi")]
    pub s_yphi: f64,
    pub rho_pb: f64,
}

impl MicrodataSummary {
    pub fn cv_y(&self) -> f64 {
        self.s_y2.sqrt() / self.y_mean
    }

    pub fn cv_p(&self) -> f64 {
        self.s_phi2.sqrt() / self.proportion
    }

    /// Population kurtosis of the attribute, `mu4 / mu2^2` with divisor `count`.
    pub fn beta2_phi(&self) -> f64 {
        let p = self.proportion;
        let mu2 = p * (1.0 - p);
        let mu4 = p * (1.0 - p).powi(4) + (1.0 - p) * p.powi(4);
        mu4 / (mu2 * mu2)
    }

    /// Treat these records as the whole population and attach a design.
    pub fn to_population_summary(
        &self,
        n: usize,
        n_prime: Option<usize>,
    ) -> Result<PopulationSummary> {
        let pop = PopulationSummary {
            population_size: self.count,
            sample_size: n,
            first_phase_size: n_prime,
            y_mean: self.y_mean,
            proportion: self.proportion,
            cv_y: self.cv_y(),
            cv_p: self.cv_p(),
            rho_pb: self.rho_pb,
            beta2_phi: Some(self.beta2_phi()),
        };
        pop.validate()?;
        Ok(pop)
    }
}

/// Moments of `(y, phi)` records with divisor `count - 1` in both modes.
pub fn summarize_microdata(records: &[Record], mode: SummaryMode) -> Result<MicrodataSummary> {
    let count = records.len();
    if count < 2 {
        return Err(Error::TooFewRecords(count));
    }
    if let Some(r) = records.iter().find(|r| !r.y.is_finite()) {
        return Err(Error::Parse(format!("non-finite y value {}", r.y)));
    }
    let nf = count as f64;
    let y_mean = records.iter().map(|r| r.y).sum::<f64>() / nf;
    let attr = records.iter().filter(|r| r.phi).count();
    if attr == 0 || attr == count {
        return Err(Error::DegenerateAttribute);
    }
    let proportion = attr as f64 / nf;

    let (mut syy, mut spp, mut syp) = (0.0, 0.0, 0.0);
    for r in records {
        let dy = r.y - y_mean;
        let dp = r.phi_value() - proportion;
        syy += dy * dy;
        spp += dp * dp;
        syp += dy * dp;
    }
    let s_y2 = syy / (nf - 1.0);
    let s_phi2 = spp / (nf - 1.0);
    let s_yphi = syp / (nf - 1.0);
    let rho_pb = if s_y2 == 0.0 {
        0.0
    } else {
        (s_yphi / (s_y2.sqrt() * s_phi2.sqrt())).clamp(-1.0, 1.0)
    };

    Ok(MicrodataSummary {
        mode,
        count,
        y_mean,
        proportion,
        s_y2,
        s_phi2,
        s_yphi,
        rho_pb,
    })
}

/// Reads `y,phi` CSV microdata. `phi` must be exactly 0 or 1.
pub fn read_microdata_csv<R: Read>(reader: R) -> Result<Vec<Record>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    if headers.len() != 2 || &headers[0] != "y" || &headers[1] != "phi" {
        return Err(Error::Parse(format!(
            "expected header `y,phi`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }

    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = line + 2;
        if rec.len() != 2 {
            return Err(Error::Parse(format!("row {row}: expected 2 fields")));
        }
        let y: f64 = rec[0]
            .parse()
            .map_err(|_| Error::Parse(format!("row {row}: bad y value `{}`", &rec[0])))?;
        if !y.is_finite() {
            return Err(Error::Parse(format!("row {row}: non-finite y")));
        }
        let phi = match &rec[1] {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::Parse(format!(
                    "row {row}: phi must be 0 or 1, found `{other}`"
                )))
            }
        };
        out.push(Record { y, phi });
    }
    Ok(out)
}
