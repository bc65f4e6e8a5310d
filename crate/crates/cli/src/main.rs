use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use attrmean::families::{self, Appendix};
use attrmean::moments::{self, Formulation};
use attrmean::montecarlo::{self, Design, ResidualShape, SimulationPlan};
use attrmean::tables::{self, fmt_num, RowFlag, TableId, TableReport};
use attrmean::weights::{build_system_single, build_system_two_phase};
use attrmean::{
    data, derive_constants, evaluate, optimum_spec, read_microdata_csv, solve_weights,
    summarize_microdata, DesignConstants, Error, EstimatorKind, EstimatorSpec, Phase,
    PopulationSummary, SampleQuantities, SummaryMode,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod render;

use render::Format;

const EXIT_DOMAIN: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_DISCREPANT: u8 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "attrmean",
    version,
    about = "Mean estimation with a binary auxiliary attribute"
)]
struct Cli {
    /// Output format.
    #[arg(
        long,
        global = true,
        env = "ATTRMEAN_FORMAT",
        value_enum,
        default_value = "markdown"
    )]
    format: Format,

    /// Decimals shown in markdown and csv output; json is never rounded.
    #[arg(long, global = true, default_value_t = 2)]
    decimals: u32,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Summarize `y,phi` microdata.
    Summarize {
        /// CSV file with header `y,phi`.
        input: PathBuf,
        #[arg(long, value_enum, default_value = "population")]
        mode: Mode,
        /// Attach a design and emit the full population summary.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        n_prime: Option<usize>,
    },
    /// Derived design constants of a population.
    Derive {
        #[command(flatten)]
        pop: PopArgs,
    },
    /// Evaluate one estimator on sample quantities.
    Evaluate {
        #[command(flatten)]
        pop: PopArgs,
        /// Estimator spec file (JSON).
        #[arg(long)]
        estimator: PathBuf,
        #[arg(long)]
        ybar: f64,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        p_prime: Option<f64>,
        /// Replace the weights of a combined estimator with solver weights.
        #[arg(long)]
        solve_weights: bool,
        #[arg(long)]
        literal: bool,
    },
    /// Build and solve the weight constraint system.
    Weights {
        #[command(flatten)]
        pop: PopArgs,
        /// Design constants (JSON); all ones when omitted.
        #[arg(long)]
        constants: Option<PathBuf>,
        /// Use the printed two-phase bias forms.
        #[arg(long)]
        literal: bool,
    },
    /// Efficiency table with published and computed values.
    PreTable {
        /// 3.2 (single phase), 5.1 (two phase), A, B or C.
        #[arg(long, value_parser = parse_id::<TableId>)]
        table: TableId,
        /// Built-in population id.
        #[arg(long, default_value_t = 1)]
        pop: u32,
        /// Summary file to use instead of a built-in population.
        #[arg(long)]
        summary: Option<PathBuf>,
        /// Exit with status 5 when any row is DISCREPANT.
        #[arg(long)]
        strict: bool,
    },
    /// Named estimator family with reconciliation against published values.
    Families {
        /// A, B or C.
        #[arg(long, value_parser = parse_id::<Appendix>)]
        appendix: Appendix,
        #[arg(long, default_value_t = 1)]
        pop: u32,
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long)]
        strict: bool,
    },
    /// Monte Carlo study on a synthetic population.
    Simulate {
        #[command(flatten)]
        pop: PopArgs,
        /// Simulation plan (JSON); overrides the flags below.
        #[arg(long)]
        plan: Option<PathBuf>,
        #[arg(long, default_value_t = 10_000)]
        replications: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Estimator spec or array of specs (JSON). Defaults to the mean,
        /// both classes and the solver-weighted estimator.
        #[arg(long)]
        estimator_file: Option<PathBuf>,
        /// Seed used to build the synthetic population.
        #[arg(long, default_value_t = 1)]
        population_seed: u64,
        #[arg(long, value_enum, default_value = "gaussian")]
        shape: Shape,
    },
}

#[derive(Args, Debug)]
struct PopArgs {
    /// Built-in population id.
    #[arg(long, default_value_t = 1)]
    pop: u32,
    /// Built-in population set.
    #[arg(long, value_enum, default_value = "single")]
    phase: PhaseArg,
    /// Population summary (JSON) to use instead of a built-in one.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Override the sample size.
    #[arg(long)]
    n: Option<usize>,
    /// Override the first-phase size.
    #[arg(long)]
    n_prime: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Population,
    Sample,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PhaseArg {
    Single,
    Two,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Shape {
    Gaussian,
    HeavyTail,
}

enum Outcome {
    Ok(String),
    Discrepant(String),
}

fn parse_id<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn read(path: &Path) -> Result<String, Error> {
    Ok(fs::read_to_string(path)?)
}

fn load_summary(path: &Path) -> Result<PopulationSummary, Error> {
    PopulationSummary::from_json_str(&read(path)?)
}

impl PopArgs {
    fn resolve(&self) -> Result<(String, PopulationSummary), Error> {
        let (label, pop) = match &self.summary {
            Some(p) => (p.display().to_string(), load_summary(p)?),
            None => {
                let phase = match self.phase {
                    PhaseArg::Single => Phase::Single,
                    PhaseArg::Two => Phase::Two,
                };
                let b = data::builtin(phase, self.pop)?;
                (b.label, b.summary)
            }
        };
        if self.n.is_none() && self.n_prime.is_none() {
            return Ok((label, pop));
        }
        let n = self.n.unwrap_or(pop.sample_size);
        let n_prime = self.n_prime.or(pop.first_phase_size);
        Ok((label, pop.with_design(n, n_prime)?))
    }
}

fn formulation(literal: bool) -> Formulation {
    if literal {
        Formulation::PaperLiteral
    } else {
        Formulation::Rederived
    }
}

#[derive(Serialize)]
struct SummarizeReport {
    microdata: attrmean::MicrodataSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    population: Option<PopulationSummary>,
}

#[derive(Serialize)]
struct DeriveReport {
    population: String,
    summary: PopulationSummary,
    derived: attrmean::DerivedConstants,
    /// Relative gap between `C_p^2 P^2` and the 0/1-structure `S_phi^2`.
    attribute_inconsistency: f64,
}

#[derive(Serialize)]
struct EvaluateReport {
    estimator: EstimatorSpec,
    value: f64,
    closed_form: Option<moments::MomentReport>,
}

#[derive(Serialize)]
struct WeightsReport {
    population: String,
    system: attrmean::WeightSystem,
    determinant: f64,
    solution: Option<attrmean::WeightSolution>,
    error: Option<String>,
}

fn table_output(t: &TableReport, format: Format, decimals: u32, strict: bool) -> Outcome {
    let text = match format {
        Format::Json => render::json(t),
        Format::Csv => t.to_csv(decimals),
        Format::Markdown => t.to_markdown(decimals),
    };
    if strict && t.rows.iter().any(|r| r.flag == RowFlag::Discrepant) {
        Outcome::Discrepant(text)
    } else {
        Outcome::Ok(text)
    }
}

fn execute(cli: &Cli) -> Result<Outcome, Error> {
    let (format, decimals) = (cli.format, cli.decimals);
    match &cli.command {
        Command::Summarize {
            input,
            mode,
            n,
            n_prime,
        } => {
            let records = read_microdata_csv(fs::File::open(input)?)?;
            let mode = match mode {
                Mode::Population => SummaryMode::Population,
                Mode::Sample => SummaryMode::Sample,
            };
            let microdata = summarize_microdata(&records, mode)?;
            let population = match n {
                Some(n) => Some(microdata.to_population_summary(*n, *n_prime)?),
                None => None,
            };
            let rep = SummarizeReport {
                microdata,
                population,
            };
            Ok(Outcome::Ok(render::key_values(&rep, format, decimals)))
        }
        Command::Derive { pop } => {
            let (label, summary) = pop.resolve()?;
            let derived = derive_constants(&summary)?;
            let rep = DeriveReport {
                population: label,
                attribute_inconsistency: derived.attribute_inconsistency(),
                summary,
                derived,
            };
            Ok(Outcome::Ok(render::key_values(&rep, format, decimals)))
        }
        Command::Evaluate {
            pop,
            estimator,
            ybar,
            p,
            p_prime,
            solve_weights: solve,
            literal,
        } => {
            let (_, summary) = pop.resolve()?;
            let form = formulation(*literal);
            let mut spec: EstimatorSpec = serde_json::from_str(&read(estimator)?)?;
            if *solve {
                let phase = match spec.kind {
                    EstimatorKind::PCombined => Phase::Single,
                    EstimatorKind::PdCombined => Phase::Two,
                    other => return Err(Error::WrongPhase(other.name())),
                };
                let solved = optimum_spec(&summary, &spec.constants, phase, form)?;
                spec.weights = solved.weights;
            }
            spec.validate()?;
            let s = match p_prime {
                Some(pp) => SampleQuantities::two_phase(*ybar, *p, *pp),
                None => SampleQuantities::single(*ybar, *p),
            };
            let value = evaluate(&spec, &summary, &s)?;
            let closed_form = moments::report_for(&spec, &summary, form).ok();
            let rep = EvaluateReport {
                estimator: spec,
                value,
                closed_form,
            };
            Ok(Outcome::Ok(render::key_values(&rep, format, decimals)))
        }
        Command::Weights {
            pop,
            constants,
            literal,
        } => {
            let (label, summary) = pop.resolve()?;
            let dc: DesignConstants = match constants {
                Some(p) => serde_json::from_str(&read(p)?)?,
                None => DesignConstants::default(),
            };
            let system = match pop.phase {
                PhaseArg::Two => build_system_two_phase(&summary, &dc, formulation(*literal))?,
                PhaseArg::Single => build_system_single(&summary, &dc)?,
            };
            let (solution, error) = match solve_weights(&system) {
                Ok(s) => (Some(s), None),
                Err(e @ (Error::SingularSystem { .. } | Error::Infeasible { .. })) => {
                    (None, Some(e.to_string()))
                }
                Err(e) => return Err(e),
            };
            let rep = WeightsReport {
                population: label,
                determinant: system.determinant(),
                system,
                solution,
                error,
            };
            Ok(Outcome::Ok(render::key_values(&rep, format, decimals)))
        }
        Command::PreTable {
            table,
            pop,
            summary,
            strict,
        } => {
            let id = *table;
            let t = match summary {
                Some(p) => tables::summary_table(id, &load_summary(p)?, &p.display().to_string())?,
                None => tables::builtin_table(id, *pop)?,
            };
            Ok(table_output(&t, format, decimals, *strict))
        }
        Command::Families {
            appendix,
            pop,
            summary,
            strict,
        } => {
            let app = *appendix;
            let (summary, with_ref) = match summary {
                Some(p) => (load_summary(p)?, false),
                None => (data::builtin(Phase::Single, *pop)?.summary, *pop == 1),
            };
            let mut members = families::generate(app, &summary)?;
            if !with_ref {
                for m in &mut members {
                    m.pre_paper = None;
                }
            }
            let rep = families::reconcile(&members);
            let discrepant = rep.discrepant().next().is_some();
            let text = match format {
                Format::Json => render::json(&serde_json::json!({
                    "members": members,
                    "reconciliation": rep,
                })),
                _ => {
                    let rows: Vec<Vec<String>> = members
                        .iter()
                        .map(|m| {
                            let (k_a, k_b) = if app == Appendix::C {
                                ("K4", "K5")
                            } else {
                                ("K1", "K3")
                            };
                            let flag = rep
                                .entries
                                .iter()
                                .find(|e| e.name == m.name)
                                .map(|e| e.flag.to_string())
                                .unwrap_or_default();
                            vec![
                                m.name.clone(),
                                format!(
                                    "{k_a}={}, K2={}, {k_b}={}",
                                    m.assignment.0,
                                    m.constants.k2.value(),
                                    m.assignment.1
                                ),
                                m.pre_paper.map_or("-".into(), |v| fmt_num(v, decimals)),
                                fmt_num(m.pre_computed, decimals),
                                m.pre_paper.map_or("-".into(), |v| {
                                    fmt_num((m.pre_computed - v).abs(), decimals)
                                }),
                                flag,
                            ]
                        })
                        .collect();
                    let mut out = render::rows(
                        &[
                            "name",
                            "K-assignments",
                            "pre_paper",
                            "pre_computed",
                            "abs_delta",
                            "flag",
                        ],
                        &rows,
                        format,
                    );
                    if format == Format::Markdown {
                        let s = &rep.summary;
                        out.push_str(&format!(
                            "\nmatched {}/{} (within 0.05: {}, within 0.5: {}, within 1%: {})\n",
                            s.matched,
                            s.compared,
                            s.within_abs_0_05,
                            s.within_abs_0_5,
                            s.within_rel_1pct
                        ));
                    }
                    out
                }
            };
            Ok(if *strict && discrepant {
                Outcome::Discrepant(text)
            } else {
                Outcome::Ok(text)
            })
        }
        Command::Simulate {
            pop,
            plan,
            replications,
            seed,
            estimator_file,
            population_seed,
            shape,
        } => {
            let (_, target) = pop.resolve()?;
            let shape = match shape {
                Shape::Gaussian => ResidualShape::Gaussian,
                Shape::HeavyTail => ResidualShape::HeavyTail,
            };
            let popn = montecarlo::build_population(&target, *population_seed, shape)?;
            let plan = match plan {
                Some(p) => SimulationPlan::from_json_str(&read(p)?)?,
                None => {
                    let design = match (pop.phase, target.first_phase_size) {
                        (PhaseArg::Two, Some(n_prime)) => Design::TwoPhase {
                            n_prime,
                            n: target.sample_size,
                        },
                        (PhaseArg::Two, None) => return Err(Error::MissingParameter("n_prime")),
                        (PhaseArg::Single, _) => Design::Single {
                            n: target.sample_size,
                        },
                    };
                    let design_pop = popn.achieved.with_design(design.n(), design.n_prime())?;
                    let estimators = match estimator_file {
                        Some(p) => parse_specs(&read(p)?)?,
                        None => default_estimators(&design_pop, design)?,
                    };
                    SimulationPlan {
                        replications: *replications,
                        seed: *seed,
                        design,
                        estimators,
                    }
                }
            };
            let rep = montecarlo::run(&plan, &popn)?;
            let text = match format {
                Format::Json => render::json(&rep),
                _ => {
                    let opt = |x: Option<f64>| x.map_or("-".into(), |v| fmt_num(v, decimals));
                    let rows: Vec<Vec<String>> = rep
                        .estimators
                        .iter()
                        .map(|e| {
                            vec![
                                e.name.clone(),
                                opt(e.empirical.map(|m| m.emp_bias)),
                                opt(e.empirical.map(|m| m.std_error_of_bias)),
                                opt(e.empirical.map(|m| m.emp_mse)),
                                opt(e.closed_form.as_ref().map(|c| c.mse)),
                                opt(e.z_mse),
                                e.degenerate_draws.to_string(),
                                if e.unstable { "UNSTABLE" } else { "ok" }.into(),
                            ]
                        })
                        .collect();
                    render::rows(
                        &[
                            "estimator",
                            "emp_bias",
                            "se_bias",
                            "emp_mse",
                            "mse",
                            "z_mse",
                            "degenerate",
                            "status",
                        ],
                        &rows,
                        format,
                    )
                }
            };
            Ok(Outcome::Ok(text))
        }
    }
}

fn parse_specs(s: &str) -> Result<Vec<EstimatorSpec>, Error> {
    let value: serde_json::Value = serde_json::from_str(s)?;
    let specs: Vec<EstimatorSpec> = if value.is_array() {
        serde_json::from_value(value)?
    } else {
        vec![serde_json::from_value(value)?]
    };
    for spec in &specs {
        spec.validate()?;
    }
    Ok(specs)
}

fn default_estimators(
    pop: &PopulationSummary,
    design: Design,
) -> Result<Vec<EstimatorSpec>, Error> {
    let dc = DesignConstants::default();
    Ok(match design {
        Design::Single { .. } => vec![
            EstimatorSpec::mean(),
            EstimatorSpec::new(EstimatorKind::S1, dc),
            EstimatorSpec::new(EstimatorKind::S2, dc),
            optimum_spec(pop, &dc, Phase::Single, Formulation::Rederived)?,
        ],
        Design::TwoPhase { .. } => vec![
            EstimatorSpec::mean(),
            EstimatorSpec::new(EstimatorKind::D1, dc),
            EstimatorSpec::new(EstimatorKind::D2, dc),
            optimum_spec(pop, &dc, Phase::Two, Formulation::Rederived)?,
        ],
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(Outcome::Ok(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Ok(Outcome::Discrepant(text)) => {
            print!("{text}");
            eprintln!("attrmean: discrepant rows present (--strict)");
            ExitCode::from(EXIT_DISCREPANT)
        }
        Err(e) => {
            eprintln!("attrmean: {e}");
            ExitCode::from(if e.is_io() { EXIT_IO } else { EXIT_DOMAIN })
        }
    }
}
