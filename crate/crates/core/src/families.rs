//! Named members of the ratio-type and exponential classes, built from known
//! population parameters, with their reference efficiencies.
//!
//! Appendix A holds ratio-type members (`alpha = 1`), appendix B the
//! product-type members of the same class (`alpha = -1`), appendix C the
//! exponential members (`beta = 1`, `lambda = -1`). All three share one list
//! of 25 `(K1, K3)` (resp. `(K4, K5)`) assignments.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{DesignConstants, Sign};
use crate::moments;
use crate::population::PopulationSummary;

/// A known population quantity used as a design constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Param {
    One,
    Beta2,
    Cp,
    Rho,
    SPhi,
    /// Sampling fraction `n/N`.
    F,
    /// `1 - f`.
    G,
    Kp,
    P,
    /// `N * P`.
    NP,
    /// Population size.
    N,
    /// Sample size.
    SmallN,
}

impl Param {
    pub fn value(self, pop: &PopulationSummary) -> Result<f64> {
        let big_n = pop.population_size as f64;
        let f = pop.sample_size as f64 / big_n;
        Ok(match self {
            Param::One => 1.0,
            Param::Beta2 => pop.beta2_phi.ok_or(Error::MissingParameter("beta2_phi"))?,
            Param::Cp => pop.cv_p,
            Param::Rho => pop.rho_pb,
            Param::SPhi => pop.s_phi(),
            Param::F => f,
            Param::G => 1.0 - f,
            Param::Kp => pop.k_p(),
            Param::P => pop.proportion,
            Param::NP => big_n * pop.proportion,
            Param::N => big_n,
            Param::SmallN => pop.sample_size as f64,
        })
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Param::One => "1",
            Param::Beta2 => "beta2(phi)",
            Param::Cp => "C_p",
            Param::Rho => "rho_pb",
            Param::SPhi => "S_phi",
            Param::F => "f",
            Param::G => "g",
            Param::Kp => "K_pb",
            Param::P => "P",
            Param::NP => "NP",
            Param::N => "N",
            Param::SmallN => "n",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// One row of the shared assignment list.
#[derive(Debug, Clone, Copy)]
struct Row {
    scale: Param,
    shift: Param,
    note: Option<&'static str>,
}

const SMALL_N_NOTE: &str = "K1 column prints N; the formula uses n, which is used here";
const ROW18_NOTE: &str =
    "formula prints rho_pb where the column label says S_phi; the label is used here";

const fn row(scale: Param, shift: Param) -> Row {
    Row {
        scale,
        shift,
        note: None,
    }
}

const fn noted(scale: Param, shift: Param, note: &'static str) -> Row {
    Row {
        scale,
        shift,
        note: Some(note),
    }
}

use Param::*;

const ROWS: [Row; 25] = [
    row(One, Cp),
    row(One, Beta2),
    row(Beta2, Cp),
    row(Cp, Beta2),
    row(One, Rho),
    row(NP, SPhi),
    row(NP, F),
    row(Beta2, Kp),
    row(NP, Kp),
    row(N, One),
    row(N, Cp),
    row(N, Rho),
    row(N, SPhi),
    row(N, F),
    row(N, G),
    row(N, Kp),
    noted(SmallN, Rho, SMALL_N_NOTE),
    noted(SmallN, SPhi, ROW18_NOTE),
    noted(SmallN, F, SMALL_N_NOTE),
    noted(SmallN, G, SMALL_N_NOTE),
    noted(SmallN, Kp, SMALL_N_NOTE),
    row(Beta2, P),
    row(NP, P),
    row(N, P),
    noted(SmallN, P, SMALL_N_NOTE),
];

/// Printed efficiencies for Population I: `(K2 = +1, K2 = -1)`.
const APPENDIX_A_PRE: [(f64, f64); 25] = [
    (134.99, 72.50),
    (111.62, 89.34),
    (226.28, 12.99),
    (126.66, 77.93),
    (207.46, 39.13),
    (18.14, 6.86),
    (13.79, 10.85),
    (24.15, 5.40),
    (18.62, 7.78),
    (15.93, 9.26),
    (19.79, 6.86),
    (15.18, 9.78),
    (12.34, 10.96),
    (12.99, 11.54),
    (15.81, 9.34),
    (13.52, 11.10),
    (25.13, 4.86),
    (14.98, 8.81),
    (13.38, 11.20),
    (29.13, 3.68),
    (15.87, 9.39),
    (16.80, 7.63),
    (15.93, 9.26),
    (13.23, 11.32),
    (14.51, 10.28),
];

const APPENDIX_B_PRE: [(f64, f64); 25] = [
    (35.54, 9.93),
    (110.12, 101.54),
    (6.09, 0.127),
    (99.38, 82.52),
    (0.00135, 5.42),
    (2.53, 1.23),
    (2.03, 1.52),
    (1.83, 1.68),
    (1.89, 1.63),
    (2.37, 1.30),
    (2.50, 1.23),
    (1.79, 1.70),
    (2.16, 1.44),
    (1.98, 1.56),
    (2.34, 1.32),
    (1.93, 1.60),
    (1.49, 1.96),
    (2.65, 1.14),
    (2.06, 1.51),
    (3.29, 0.84),
    (1.88, 1.63),
    (2.99, 0.97),
    (2.37, 1.30),
    (2.11, 1.47),
    (2.49, 1.23),
];

const APPENDIX_C_PRE: [f64; 25] = [
    12.42, 11.92, 16.29, 12.53, 13.86, 44.46, 61.84, 40.17, 48.09, 54.10, 44.84, 56.48, 62.40,
    65.67, 54.47, 63.21, 38.59, 52.19, 63.74, 35.33, 54.68, 47.53, 54.10, 64.43, 58.91,
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Appendix {
    A,
    B,
    C,
}

impl std::str::FromStr for Appendix {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" | "a" => Ok(Appendix::A),
            "B" | "b" => Ok(Appendix::B),
            "C" | "c" => Ok(Appendix::C),
            _ => Err(Error::Parse(format!("unknown appendix `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub name: String,
    pub appendix: Appendix,
    pub constants: DesignConstants,
    /// Symbolic `(K1, K3)` or `(K4, K5)` assignment.
    pub assignment: (Param, Param),
    pub description: String,
    pub pre_paper: Option<f64>,
    pub pre_computed: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

fn term(scale: Param, var: &str) -> String {
    match scale {
        Param::One => var.to_string(),
        s => format!("{s}*{var}"),
    }
}

fn render_ratio(scale: Param, shift: Param, sign: Sign, alpha: f64) -> String {
    let op = if sign == Sign::Plus { "+" } else { "-" };
    let top = format!("{} {op} {shift}", term(scale, "P"));
    let bottom = format!("{} {op} {shift}", term(scale, "p"));
    if alpha > 0.0 {
        format!("ybar * [({top}) / ({bottom})]")
    } else {
        format!("ybar * [({bottom}) / ({top})]")
    }
}

fn render_exp(scale: Param, shift: Param) -> String {
    let inner = match scale {
        Param::One => format!("(p - P) / ((p + P) + 2*{shift})"),
        s => format!("{s}*(p - P) / ({s}*(p + P) + 2*{shift})"),
    };
    format!("ybar * (2 - (p/P) * exp[{inner}])")
}

fn ratio_members(
    pop: &PopulationSummary,
    appendix: Appendix,
    alpha: f64,
    printed: &[(f64, f64); 25],
) -> Result<Vec<FamilyMember>> {
    let (plus_tag, minus_tag) = match appendix {
        Appendix::A => ("t_1a", "t_1b"),
        _ => ("t_1c", "t_1d"),
    };
    let mut out = Vec::with_capacity(50);
    for (i, (r, &(pre_plus, pre_minus))) in ROWS.iter().zip(printed.iter()).enumerate() {
        for (sign, tag, pre_paper) in [
            (Sign::Plus, plus_tag, pre_plus),
            (Sign::Minus, minus_tag, pre_minus),
        ] {
            let constants = DesignConstants {
                k1: r.scale.value(pop)?,
                k2: sign,
                k3: r.shift.value(pop)?,
                alpha,
                ..Default::default()
            };
            let pre_computed = moments::report_s1(pop, &constants)?.pre;
            let mut notes: Vec<&str> = r.note.into_iter().collect();
            if appendix == Appendix::B && (1..=3).contains(&i) {
                notes.push("row printed twice in the source table; generated once");
            }
            if appendix == Appendix::B && i == 7 && sign == Sign::Minus {
                notes.push("printed formula is the inverted (ratio-type) form");
            }
            out.push(FamilyMember {
                name: format!("{tag}{}", i + 1),
                appendix,
                constants,
                assignment: (r.scale, r.shift),
                description: render_ratio(r.scale, r.shift, sign, alpha),
                pre_paper: Some(pre_paper),
                pre_computed,
                note: (!notes.is_empty()).then(|| notes.join("; ")),
            });
        }
    }
    Ok(out)
}

/// Ratio-type members, `alpha = 1`, both signs of `K2`.
pub fn generate_appendix_a(pop: &PopulationSummary) -> Result<Vec<FamilyMember>> {
    ratio_members(pop, Appendix::A, 1.0, &APPENDIX_A_PRE)
}

/// Product-type members of the ratio class, `alpha = -1`.
pub fn generate_appendix_b(pop: &PopulationSummary) -> Result<Vec<FamilyMember>> {
    ratio_members(pop, Appendix::B, -1.0, &APPENDIX_B_PRE)
}

/// Exponential members with `beta = 1`, `lambda = -1`.
pub fn generate_appendix_c(pop: &PopulationSummary) -> Result<Vec<FamilyMember>> {
    let mut out = Vec::with_capacity(25);
    for (i, (r, &pre_paper)) in ROWS.iter().zip(APPENDIX_C_PRE.iter()).enumerate() {
        let constants = DesignConstants {
            k4: r.scale.value(pop)?,
            k5: r.shift.value(pop)?,
            beta: 1.0,
            lambda: -1.0,
            ..Default::default()
        };
        let pre_computed = moments::report_s2(pop, &constants)?.pre;
        out.push(FamilyMember {
            name: format!("t_2{}", i + 1),
            appendix: Appendix::C,
            constants,
            assignment: (r.scale, r.shift),
            description: render_exp(r.scale, r.shift),
            pre_paper: Some(pre_paper),
            pre_computed,
            note: r.note.map(str::to_string),
        });
    }
    Ok(out)
}

pub fn generate(appendix: Appendix, pop: &PopulationSummary) -> Result<Vec<FamilyMember>> {
    match appendix {
        Appendix::A => generate_appendix_a(pop),
        Appendix::B => generate_appendix_b(pop),
        Appendix::C => generate_appendix_c(pop),
    }
}

/// `|computed - printed| <= max(0.05, 1% of printed)`.
pub fn within_tolerance(computed: f64, printed: f64) -> bool {
    (computed - printed).abs() <= 0.05f64.max(0.01 * printed.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MatchFlag {
    Match,
    Discrepant,
    NoReference,
}

impl fmt::Display for MatchFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MatchFlag::Match => "MATCH",
            MatchFlag::Discrepant => "DISCREPANT",
            MatchFlag::NoReference => "-",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconcileEntry {
    pub name: String,
    pub pre_paper: Option<f64>,
    pub pre_computed: f64,
    pub abs_delta: Option<f64>,
    pub flag: MatchFlag,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReconcileSummary {
    pub compared: usize,
    pub within_abs_0_05: usize,
    pub within_abs_0_5: usize,
    pub within_rel_1pct: usize,
    /// Within `max(0.05, 1%)`.
    pub matched: usize,
}

impl ReconcileSummary {
    pub fn match_rate(&self) -> f64 {
        if self.compared == 0 {
            0.0
        } else {
            self.matched as f64 / self.compared as f64
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReconcileReport {
    /// Sorted by increasing `|delta|`; entries without a reference come last.
    pub entries: Vec<ReconcileEntry>,
    pub summary: ReconcileSummary,
}

impl ReconcileReport {
    pub fn discrepant(&self) -> impl Iterator<Item = &ReconcileEntry> {
        self.entries
            .iter()
            .filter(|e| e.flag == MatchFlag::Discrepant)
    }
}

pub fn reconcile(members: &[FamilyMember]) -> ReconcileReport {
    let mut summary = ReconcileSummary::default();
    let mut entries: Vec<ReconcileEntry> = members
        .iter()
        .map(|m| {
            let abs_delta = m.pre_paper.map(|p| (m.pre_computed - p).abs());
            let flag = match m.pre_paper {
                None => MatchFlag::NoReference,
                Some(p) => {
                    let d = (m.pre_computed - p).abs();
                    summary.compared += 1;
                    summary.within_abs_0_05 += usize::from(d <= 0.05);
                    summary.within_abs_0_5 += usize::from(d <= 0.5);
                    summary.within_rel_1pct += usize::from(d <= 0.01 * p.abs());
                    if within_tolerance(m.pre_computed, p) {
                        summary.matched += 1;
                        MatchFlag::Match
                    } else {
                        MatchFlag::Discrepant
                    }
                }
            };
            ReconcileEntry {
                name: m.name.clone(),
                pre_paper: m.pre_paper,
                pre_computed: m.pre_computed,
                abs_delta,
                flag,
            }
        })
        .collect();
    entries.sort_by(|a, b| match (a.abs_delta, b.abs_delta) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    ReconcileReport { entries, summary }
}
