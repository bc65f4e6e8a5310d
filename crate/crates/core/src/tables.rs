//! Efficiency tables for the built-in populations: computed values next to
//! the published ones, with per-row differences and match flags.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{self, BuiltinPopulation};
use crate::error::{Error, Result};
use crate::estimators::{DesignConstants, EstimatorKind, EstimatorSpec};
use crate::families::{self, Appendix};
use crate::moments::{self, round_to, Formulation, MomentReport};
use crate::population::PopulationSummary;
use crate::weights::{self, Phase, WeightVector};

/// Published weights for the single-phase populations, all constants 1.
pub const PUBLISHED_WEIGHTS: [(u32, [f64; 3]); 2] = [
    (1, [-3.95624, 5.356173, -0.39993]),
    (2, [1.124182, 0.020794, -0.14498]),
];

const SINGLE_PHASE_PRE: [(u32, [f64; 10]); 2] = [
    (
        1,
        [
            100.0, 11.63, 5.075, 12.88, 5.43, 73.59, 4.94, 14.95, 73.48, 241.98,
        ],
    ),
    (
        2,
        [
            100.0, 1.59, 1.94, 1.59, 1.95, 0.84, 8.25, 8.25, 5.58, 117.61,
        ],
    ),
];

const TWO_PHASE_PRE: [(u32, [f64; 10]); 2] = [
    (
        1,
        [
            100.0, 11.13, 7.48, 26.84, 23.75, 82.55, 8.56, 22.54, 82.56, 112.55,
        ],
    ),
    (
        2,
        [
            100.0, 8.85, 12.15, 5.42, 5.87, 1.23, 8.46, 6.57, 7.45, 106.89,
        ],
    ),
];

/// Absolute tolerance for an exact match.
pub const MATCH_TOLERANCE: f64 = 0.05;
/// Absolute tolerance for a near match.
pub const NEAR_TOLERANCE: f64 = 0.5;

pub fn published_weights(pop_id: u32) -> Option<WeightVector> {
    PUBLISHED_WEIGHTS
        .iter()
        .find(|(id, _)| *id == pop_id)
        .map(|(_, w)| WeightVector::from(*w))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TableId {
    SinglePhase,
    TwoPhase,
    AppendixA,
    AppendixB,
    AppendixC,
}

impl TableId {
    pub fn phase(self) -> Phase {
        match self {
            TableId::TwoPhase => Phase::Two,
            _ => Phase::Single,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TableId::SinglePhase => "3.2",
            TableId::TwoPhase => "5.1",
            TableId::AppendixA => "A",
            TableId::AppendixB => "B",
            TableId::AppendixC => "C",
        }
    }
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "3.2" | "single" | "single-phase" => Ok(TableId::SinglePhase),
            "5.1" | "two" | "two-phase" => Ok(TableId::TwoPhase),
            "A" | "a" => Ok(TableId::AppendixA),
            "B" | "b" => Ok(TableId::AppendixB),
            "C" | "c" => Ok(TableId::AppendixC),
            _ => Err(Error::Parse(format!(
                "unknown table `{s}` (expected 3.2, 5.1, A, B or C)"
            ))),
        }
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RowFlag {
    /// Within 0.05.
    Match,
    /// Within 0.5.
    #[serde(rename = "MATCH(0.5)")]
    Near,
    Discrepant,
    /// No published value to compare against.
    NoReference,
}

impl RowFlag {
    pub fn classify(computed: f64, printed: Option<f64>) -> Self {
        match printed {
            None => RowFlag::NoReference,
            Some(p) => {
                let d = (computed - p).abs();
                if d <= MATCH_TOLERANCE {
                    RowFlag::Match
                } else if d <= NEAR_TOLERANCE {
                    RowFlag::Near
                } else {
                    RowFlag::Discrepant
                }
            }
        }
    }
}

impl fmt::Display for RowFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RowFlag::Match => "MATCH",
            RowFlag::Near => "MATCH(0.5)",
            RowFlag::Discrepant => "DISCREPANT",
            RowFlag::NoReference => "-",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub label: String,
    /// Constants or assignment shown in the table's parameter column.
    pub parameters: String,
    pub pre_paper: Option<f64>,
    pub pre_computed: f64,
    pub bias: f64,
    pub mse: f64,
    pub abs_delta: Option<f64>,
    pub flag: RowFlag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl TableRow {
    fn new(
        label: impl Into<String>,
        parameters: impl Into<String>,
        report: MomentReport,
        printed: Option<f64>,
    ) -> Self {
        TableRow {
            label: label.into(),
            parameters: parameters.into(),
            pre_paper: printed,
            pre_computed: report.pre,
            bias: report.bias,
            mse: report.mse,
            abs_delta: printed.map(|p| (report.pre - p).abs()),
            flag: RowFlag::classify(report.pre, printed),
            note: None,
        }
    }

    pub fn is_optimum(&self) -> bool {
        self.label.ends_with("optimum")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub table: TableId,
    pub population: String,
    pub rows: Vec<TableRow>,
    /// Solved weights behind the optimum row, if the table has one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<WeightVector>,
}

impl TableReport {
    pub fn row(&self, label: &str) -> Option<&TableRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn discrepant(&self) -> impl Iterator<Item = &TableRow> {
        self.rows.iter().filter(|r| r.flag == RowFlag::Discrepant)
    }

    pub fn to_markdown(&self, decimals: u32) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Table {} ({})\n", self.table, self.population);
        out.push_str("| estimator | parameters | pre_paper | pre_computed | abs_delta | flag |\n");
        out.push_str("|---|---|---:|---:|---:|---|\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} |",
                r.label,
                r.parameters,
                fmt_opt(r.pre_paper, decimals),
                fmt_num(r.pre_computed, decimals),
                fmt_opt(r.abs_delta, decimals),
                r.flag
            );
        }
        out
    }

    pub fn to_csv(&self, decimals: u32) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let _ = w.write_record([
            "estimator",
            "parameters",
            "pre_paper",
            "pre_computed",
            "abs_delta",
            "flag",
        ]);
        for r in &self.rows {
            let _ = w.write_record([
                r.label.clone(),
                r.parameters.clone(),
                fmt_opt(r.pre_paper, decimals),
                fmt_num(r.pre_computed, decimals),
                fmt_opt(r.abs_delta, decimals),
                r.flag.to_string(),
            ]);
        }
        String::from_utf8(w.into_inner().unwrap_or_default()).unwrap_or_default()
    }
}

pub fn fmt_num(x: f64, decimals: u32) -> String {
    format!("{:.*}", decimals as usize, round_to(x, decimals))
}

fn fmt_opt(x: Option<f64>, decimals: u32) -> String {
    x.map(|v| fmt_num(v, decimals))
        .unwrap_or_else(|| "-".into())
}

fn lookup(table: &[(u32, [f64; 10])], id: u32) -> Option<[f64; 10]> {
    table.iter().find(|(i, _)| *i == id).map(|(_, v)| *v)
}

fn printed_at(printed: &Option<[f64; 10]>, i: usize) -> Option<f64> {
    printed.as_ref().map(|p| p[i])
}

/// Efficiency rows of the single-phase comparison for `pop`.
pub fn single_phase_table(
    pop: &PopulationSummary,
    label: &str,
    printed: Option<[f64; 10]>,
) -> Result<TableReport> {
    let s2 = |k4: f64, k5: f64, beta: f64, lambda: f64| DesignConstants {
        k4,
        k5,
        beta,
        lambda,
        ..Default::default()
    };
    let mut rows = Vec::with_capacity(10);
    let mean = moments::report_for(&EstimatorSpec::mean(), pop, Formulation::Rederived)?;
    rows.push(TableRow::new("ybar", "", mean, printed_at(&printed, 0)));
    let ng_r = moments::report_for(
        &EstimatorSpec::new(EstimatorKind::NGRatio, DesignConstants::default()),
        pop,
        Formulation::Rederived,
    )?;
    rows.push(TableRow::new("t_NGR", "", ng_r, printed_at(&printed, 1)));
    let ng_p = moments::report_for(
        &EstimatorSpec::new(EstimatorKind::NGProduct, DesignConstants::default()),
        pop,
        Formulation::Rederived,
    )?;
    rows.push(TableRow::new("t_NGP", "", ng_p, printed_at(&printed, 2)));

    for (i, beta) in [(3, 1.0), (4, -1.0)] {
        let dc = s2(1.0, 1.0, beta, 0.0);
        rows.push(TableRow::new(
            format!("t_1({beta},0)"),
            format!("beta={beta}, lambda=0"),
            moments::report_s2(pop, &dc)?,
            printed_at(&printed, i),
        ));
    }
    for (i, beta, lambda) in [(5, 1.0, 1.0), (6, 1.0, -1.0), (7, 0.0, 1.0), (8, 0.0, -1.0)] {
        let dc = s2(1.0, 0.0, beta, lambda);
        rows.push(TableRow::new(
            format!("t_2({beta},{lambda})"),
            format!("K4=1, K5=0, beta={beta}, lambda={lambda}"),
            moments::report_s2(pop, &dc)?,
            printed_at(&printed, i),
        ));
    }

    let dc = DesignConstants::default();
    let weights = weights::build_system_single(pop, &dc)
        .and_then(|s| weights::solve_weights(&s))
        .ok()
        .map(|s| s.weights);
    rows.push(TableRow::new(
        "t_P optimum",
        "all constants 1",
        moments::mse_p_min(pop)?,
        printed_at(&printed, 9),
    ));
    Ok(TableReport {
        table: TableId::SinglePhase,
        population: label.to_string(),
        rows,
        weights,
    })
}

/// Efficiency rows of the two-phase comparison for `pop`.
pub fn two_phase_table(
    pop: &PopulationSummary,
    label: &str,
    printed: Option<[f64; 10]>,
    form: Formulation,
) -> Result<TableReport> {
    let mut rows = Vec::with_capacity(10);
    let mean = moments::report_for(&EstimatorSpec::mean(), pop, form)?;
    rows.push(TableRow::new("ybar", "", mean, printed_at(&printed, 0)));

    for (i, name, m) in [(1, "t_NGR", 1.0), (2, "t_NGP", -1.0)] {
        let dc = DesignConstants {
            k1: 1.0,
            k3: 0.0,
            m,
            ..Default::default()
        };
        rows.push(TableRow::new(
            name,
            format!("two-phase, m={m}"),
            moments::report_1d(pop, &dc, form)?,
            printed_at(&printed, i),
        ));
    }
    for (i, q) in [(3, 1.0), (4, -1.0)] {
        let dc = DesignConstants {
            q,
            gamma: 0.0,
            ..Default::default()
        };
        rows.push(TableRow::new(
            format!("t_1d({q},0)"),
            format!("q={q}, gamma=0"),
            moments::report_2d(pop, &dc, form)?,
            printed_at(&printed, i),
        ));
    }
    for (i, q, gamma) in [(5, 1.0, 1.0), (6, 1.0, -1.0), (7, 0.0, 1.0), (8, 0.0, -1.0)] {
        let dc = DesignConstants {
            k4: 1.0,
            k5: 0.0,
            q,
            gamma,
            ..Default::default()
        };
        rows.push(TableRow::new(
            format!("t_2d({q},{gamma})"),
            format!("K4=1, K5=0, q={q}, gamma={gamma}"),
            moments::report_2d(pop, &dc, form)?,
            printed_at(&printed, i),
        ));
    }

    let dc = DesignConstants::default();
    let weights = weights::build_system_two_phase(pop, &dc, form)
        .and_then(|s| weights::solve_weights(&s))
        .ok()
        .map(|s| s.weights);
    rows.push(TableRow::new(
        "t_pd optimum",
        "all constants 1",
        moments::mse_pd_min(pop)?,
        printed_at(&printed, 9),
    ));
    Ok(TableReport {
        table: TableId::TwoPhase,
        population: label.to_string(),
        rows,
        weights,
    })
}

/// A family table; `with_reference` keeps the published column.
pub fn appendix_table(
    appendix: Appendix,
    pop: &PopulationSummary,
    label: &str,
    with_reference: bool,
) -> Result<TableReport> {
    let members = families::generate(appendix, pop)?;
    let rows = members
        .into_iter()
        .map(|m| {
            let printed = if with_reference { m.pre_paper } else { None };
            let report = match appendix {
                Appendix::C => moments::report_s2(pop, &m.constants),
                _ => moments::report_s1(pop, &m.constants),
            }?;
            let mut row = TableRow::new(
                m.name,
                format!("({}, {})", m.assignment.0, m.assignment.1),
                report,
                printed,
            );
            row.note = m.note;
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    let table = match appendix {
        Appendix::A => TableId::AppendixA,
        Appendix::B => TableId::AppendixB,
        Appendix::C => TableId::AppendixC,
    };
    Ok(TableReport {
        table,
        population: label.to_string(),
        rows,
        weights: None,
    })
}

/// Table `id` for built-in population `pop_id`, with published values where they exist.
pub fn builtin_table(id: TableId, pop_id: u32) -> Result<TableReport> {
    let BuiltinPopulation { label, summary, .. } = data::builtin(id.phase(), pop_id)?;
    match id {
        TableId::SinglePhase => {
            single_phase_table(&summary, &label, lookup(&SINGLE_PHASE_PRE, pop_id))
        }
        TableId::TwoPhase => two_phase_table(
            &summary,
            &label,
            lookup(&TWO_PHASE_PRE, pop_id),
            Formulation::Rederived,
        ),
        // Published family values exist for the first population only.
        TableId::AppendixA => appendix_table(Appendix::A, &summary, &label, pop_id == 1),
        TableId::AppendixB => appendix_table(Appendix::B, &summary, &label, pop_id == 1),
        TableId::AppendixC => appendix_table(Appendix::C, &summary, &label, pop_id == 1),
    }
}

/// Table `id` for an arbitrary summary; no published column.
pub fn summary_table(id: TableId, pop: &PopulationSummary, label: &str) -> Result<TableReport> {
    match id {
        TableId::SinglePhase => single_phase_table(pop, label, None),
        TableId::TwoPhase => two_phase_table(pop, label, None, Formulation::Rederived),
        TableId::AppendixA => appendix_table(Appendix::A, pop, label, false),
        TableId::AppendixB => appendix_table(Appendix::B, pop, label, false),
        TableId::AppendixC => appendix_table(Appendix::C, pop, label, false),
    }
}
