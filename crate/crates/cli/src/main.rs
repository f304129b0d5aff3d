use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use growthlab::recipe::Recipe;
use growthlab::report::{Record, Report};
use growthlab::scenario::{run_op, run_scenario, Context, Op, Scenario};
use growthlab::suites::{run_suite, Suite, SuiteOptions};
use growthlab::{resolve_budget, CliError};
use growthlab_core::group::{parse_set, write_set};
use growthlab_core::pipeline::Corollary;
use growthlab_core::progressions::{enumerate_nilprogression, enumerate_ordered, ProgressionKind, ProgressionSpec};
use growthlab_core::{Budget, GSet};

#[derive(Parser)]
#[command(name = "growthlab", version, about = "Exact computations with approximate groups")]
struct Cli {
    /// Element budget (default: $GROWTHLAB_BUDGET, else 5000000).
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Seed for random recipes and suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Threads for suite cases.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// `SET` arguments are a recipe such as `"ball ut:3:0 radius=2"` or
/// `@file` holding a set in text form.
#[derive(Subcommand)]
enum Command {
    /// Print the set a recipe generates.
    Gen { set: String },
    /// Sizes of |A^m| and doubling/tripling ratios.
    Stats {
        set: String,
        #[arg(short, default_value_t = 5)]
        n: usize,
    },
    /// Greedy cover certificate with its growth law.
    Certify {
        set: String,
        #[arg(long, default_value_t = 5)]
        m_max: usize,
    },
    /// Covering lemmas.
    Cover {
        #[command(subcommand)]
        which: CoverCommand,
    },
    /// Progressions read from a text file.
    Prog {
        #[command(subcommand)]
        which: ProgCommand,
    },
    /// Coset progression search and the derived cover for abelian sets.
    Oracle {
        set: String,
        #[arg(long)]
        rank_max: Option<usize>,
    },
    /// Step-reduction pipeline.
    Pipeline {
        #[command(subcommand)]
        which: PipelineCommand,
    },
    /// Seeded verification suite.
    Suite { name: Suite },
    /// Run a JSON scenario file.
    Run { scenario: PathBuf },
}

#[derive(Subcommand)]
enum CoverCommand {
    Ruzsa {
        set: String,
        /// Second set (default: A).
        #[arg(long)]
        b: Option<String>,
    },
    Chang {
        set: String,
        /// Set inside A^m (default: A).
        #[arg(long)]
        b: Option<String>,
        #[arg(short, default_value_t = 1)]
        m: usize,
    },
}

#[derive(Subcommand)]
enum ProgCommand {
    /// Enumerate the progression.
    Build { spec: PathBuf },
    /// Check P_ord ⊆ P_nil ⊆ P̄ ⊆ P_ord^k.
    Verify { spec: PathBuf },
}

#[derive(Subcommand)]
enum PipelineCommand {
    Decompose {
        set: String,
        /// Also run a corollary cover.
        #[arg(long)]
        corollary: Option<Corollary>,
    },
    Factorize { set: String },
    Reduce {
        set: String,
        #[arg(short, default_value_t = 1)]
        m: usize,
    },
}

fn load_set(arg: &str, seed: u64, budget: &Budget) -> Result<GSet, CliError> {
    match arg.strip_prefix('@') {
        Some(path) => Ok(parse_set(&std::fs::read_to_string(path)?)?),
        None => arg.parse::<Recipe>()?.with_default_seed(seed).generate(budget),
    }
}

fn recipe_arg(arg: &Option<String>) -> Result<Option<Recipe>, CliError> {
    arg.as_deref().map(str::parse).transpose()
}

fn emit_text(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn render(report: &Report, format: Format) -> Result<String, CliError> {
    match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    }
}

fn ops_report(name: &str, set: GSet, ops: &[Op], budget: Budget, seed: u64) -> Report {
    let mut ctx = Context::for_set(set, budget, seed);
    let mut report = Report::new(name);
    for op in ops {
        report.push(run_op(op, &mut ctx).unwrap_or_else(|e| Record::failure(op.name(), &e)));
    }
    report
}

fn execute(cli: &Cli) -> Result<Option<Report>, CliError> {
    let budget = resolve_budget(cli.budget)?;
    let seed = cli.seed;
    let set_report = |name: &str, set: &str, ops: &[Op]| -> Result<Option<Report>, CliError> {
        let a = load_set(set, seed, &budget)?;
        Ok(Some(ops_report(name, a, ops, budget, seed)))
    };
    match &cli.command {
        Command::Gen { set } => {
            let a = load_set(set, seed, &budget)?;
            emit_text(&write_set(&a)?, cli.out.as_deref())?;
            Ok(None)
        }
        Command::Stats { set, n } => set_report("stats", set, &[Op::Stats { n: *n }]),
        Command::Certify { set, m_max } => {
            set_report("certify", set, &[Op::Certify, Op::GrowthLaw { m_max: *m_max }])
        }
        Command::Cover { which } => match which {
            CoverCommand::Ruzsa { set, b } => set_report("cover-ruzsa", set, &[Op::Ruzsa { b: recipe_arg(b)? }]),
            CoverCommand::Chang { set, b, m } => {
                set_report("cover-chang", set, &[Op::Chang { b: recipe_arg(b)?, m: *m }])
            }
        },
        Command::Prog { which } => match which {
            ProgCommand::Build { spec } => {
                let spec = ProgressionSpec::parse(&std::fs::read_to_string(spec)?)?;
                let set = match spec.kind {
                    ProgressionKind::Nil => enumerate_nilprogression(&spec, &budget)?,
                    _ => enumerate_ordered(&spec, &budget)?,
                };
                emit_text(&write_set(&set)?, cli.out.as_deref())?;
                Ok(None)
            }
            ProgCommand::Verify { spec } => {
                let spec = ProgressionSpec::parse(&std::fs::read_to_string(spec)?)?;
                let gens: Vec<String> = spec
                    .generators
                    .iter()
                    .map(|g| g.0.iter().map(i64::to_string).collect::<Vec<_>>().join(","))
                    .collect();
                let op = Op::Containment {
                    gens: Some(gens.join(";")),
                    bounds: spec.bounds.clone(),
                    step: Some(spec.step),
                };
                let mut ctx = Context::new(Some(spec.group().clone()), None, budget, seed);
                let mut report = Report::new("prog-verify");
                report.push(run_op(&op, &mut ctx).unwrap_or_else(|e| Record::failure(op.name(), &e)));
                Ok(Some(report))
            }
        },
        Command::Oracle { set, rank_max } => set_report(
            "oracle",
            set,
            &[Op::Oracle { rank_max: *rank_max }, Op::Sanders { rank_max: *rank_max }],
        ),
        Command::Pipeline { which } => match which {
            PipelineCommand::Decompose { set, corollary } => {
                let mut ops = vec![Op::Decompose];
                ops.extend(corollary.map(|which| Op::Corollary { which }));
                set_report("pipeline-decompose", set, &ops)
            }
            PipelineCommand::Factorize { set } => set_report("pipeline-factorize", set, &[Op::Factorize]),
            PipelineCommand::Reduce { set, m } => set_report("pipeline-reduce", set, &[Op::Reduce { m: *m }]),
        },
        Command::Suite { name } => {
            let opts = SuiteOptions {
                budget,
                seed,
                jobs: cli.jobs,
            };
            Ok(Some(run_suite(*name, &opts)?))
        }
        Command::Run { scenario } => {
            let s = Scenario::from_json(&std::fs::read_to_string(scenario)?)?;
            let report = run_scenario(&s, budget, seed)?;
            if let Some(p) = &s.outputs.json {
                std::fs::write(p, report.to_json()?)?;
            }
            if let Some(p) = &s.outputs.csv {
                std::fs::write(p, report.to_csv()?)?;
            }
            Ok(Some(report))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = execute(&cli).and_then(|report| {
        let Some(report) = report else { return Ok(true) };
        emit_text(&render(&report, cli.format)?, cli.out.as_deref())?;
        Ok(report.all_passed())
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
