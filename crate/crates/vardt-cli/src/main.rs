//! vardt: variable-level fault localization for MiniLang programs.
//!
//! Exit codes: 0 success, 1 unreadable or unparsable input, 2 the suite
//! failed a pipeline gate (nothing failing, or no analyzable method).

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vardt_core::evalkit::{
    evaluate_corpus, load_corpus, metrics_json, render_metrics, seed_corpus, write_corpus,
};
use vardt_core::lang::{parse_program, parse_suite, transform_gsa};
use vardt_core::patchfilter::{filter_json, filter_patches, parse_patches, render_filter, top_vars};
use vardt_core::pipeline::{localize_sources, LocalizeResult, PipelineConfig, PipelineError};
use vardt_core::runtime::{run_suite, write_traces, ObserveMode, RunConfig};
use vardt_core::sbfl::SbflFormula;

#[derive(Parser)]
#[command(
    name = "vardt",
    version,
    about = "Locate fault-relevant variables by profiling a failing test suite"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: ConfigArgs,
    /// Worker threads for test runs and corpus evaluation.
    #[arg(long, global = true, env = "VARDT_JOBS")]
    jobs: Option<usize>,
}

/// Pipeline knobs. Command-line flags win over `VARDT_*` environment
/// variables, which win over the built-in defaults.
#[derive(Args, Clone)]
struct ConfigArgs {
    /// Penalty factor applied once per variable depending on a candidate.
    #[arg(long, global = true, env = "VARDT_DEP_FACTOR", default_value_t = 0.8)]
    dep_factor: f64,
    /// How many suspicious methods to analyze.
    #[arg(long, global = true, env = "VARDT_TOP_K", default_value_t = 10)]
    top_k: usize,
    /// Formula for method suspiciousness: ochiai or dstar.
    #[arg(long, global = true, env = "VARDT_SBFL", default_value = "ochiai")]
    sbfl: String,
    /// Keep every occurrence the failures covered instead of slicing.
    #[arg(long, global = true, env = "VARDT_NO_SLICE")]
    no_slice: bool,
    /// Skip the decision-tree model; dependency scores carry the ranking.
    #[arg(long, global = true, env = "VARDT_NO_TREE")]
    no_tree: bool,
    /// Neutralize the dependency penalty.
    #[arg(long, global = true, env = "VARDT_NO_DEP")]
    no_dep: bool,
    /// Drop the method-suspiciousness weighting of variable scores.
    #[arg(long, global = true, env = "VARDT_NO_METHOD_SCORE")]
    no_method_score: bool,
    /// Analyze exactly this method, pinned to suspiciousness one.
    #[arg(long, global = true, env = "VARDT_METHOD_KNOWN")]
    method_known: Option<String>,
    /// Execution step budget per test.
    #[arg(long, global = true, env = "VARDT_BUDGET", default_value_t = 1_000_000)]
    budget: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Rank fault-relevant variables of a program under its test suite.
    Localize {
        program: PathBuf,
        tests: PathBuf,
        /// Directory for the ranking and per-stage artifacts.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the localizer over a bug corpus and report Top-N, MFR, and MAR.
    Eval {
        /// Corpus directory; defaults to the built-in seeded bugs.
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Re-evaluate under dependency factors 0.1 through 1.0.
        #[arg(long)]
        sweep_dep_factor: bool,
    },
    /// Split a candidate-patch file by whether patches touch top variables.
    Filter {
        program: PathBuf,
        tests: PathBuf,
        patches: PathBuf,
        /// Keep patches involving variables ranked at or above this cutoff.
        #[arg(long, default_value_t = 10)]
        top_n: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump executed lines and observed values for every test.
    Trace { program: PathBuf, tests: PathBuf },
    /// Print the failure slices of the analyzed methods.
    Slice { program: PathBuf, tests: PathBuf },
    /// Print the fitted decision trees of the analyzed methods.
    Tree { program: PathBuf, tests: PathBuf },
    /// Materialize the built-in bug corpus into a directory.
    Seed { out: PathBuf },
}

enum CliError {
    Parse(String),
    Gate(String),
    Other(anyhow::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Other(_) => 1,
            CliError::Gate(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) | CliError::Gate(m) => f.write_str(m),
            CliError::Other(e) => write!(f, "{e:#}"),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match e {
            PipelineError::Parse(p) => CliError::Parse(p.to_string()),
            PipelineError::Gate(g) => CliError::Gate(g),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Other(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn pipeline_config(args: &ConfigArgs) -> Result<PipelineConfig, CliError> {
    let sbfl_formula: SbflFormula = args.sbfl.parse().map_err(CliError::Parse)?;
    let config = PipelineConfig {
        dep_factor: args.dep_factor,
        top_k_methods: args.top_k,
        sbfl_formula,
        slicing: !args.no_slice,
        tree_model: !args.no_tree,
        dep_penalty: !args.no_dep,
        method_score: !args.no_method_score,
        method_known: args.method_known.clone(),
        budget: args.budget,
    };
    config.validate().map_err(CliError::Parse)?;
    Ok(config)
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

/// Write via a temp file in the target directory plus rename, so a crash
/// never leaves a half-written artifact behind.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut file = match dir {
        Some(d) => {
            fs::create_dir_all(d)?;
            tempfile::NamedTempFile::new_in(d)?
        }
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    use std::io::Write as _;
    file.write_all(contents.as_bytes())?;
    file.persist(path).map_err(|e| CliError::Other(e.into()))?;
    Ok(())
}

fn localize_files(
    program: &Path,
    tests: &Path,
    args: &ConfigArgs,
) -> Result<LocalizeResult, CliError> {
    let config = pipeline_config(args)?;
    let program_src = read(program)?;
    let tests_src = read(tests)?;
    Ok(localize_sources(&program_src, &tests_src, &config)?)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Localize {
            program,
            tests,
            out,
        } => {
            let result = localize_files(program, tests, &cli.config)?;
            if let Some(dir) = out {
                write_atomic(&dir.join("ranking.txt"), &result.ranking_text())?;
                write_atomic(&dir.join("ranking.json"), &result.ranking_json())?;
                write_atomic(&dir.join("methods.txt"), &result.method_ranking_text())?;
                write_atomic(&dir.join("slices.txt"), &result.slices_text())?;
                write_atomic(&dir.join("depgraph.txt"), &result.depgraph_text())?;
                write_atomic(&dir.join("trees.txt"), &result.trees_text())?;
                write_atomic(&dir.join("trace.txt"), &result.profile_trace_text())?;
                let stats =
                    serde_json::to_string_pretty(&result.stats).expect("stats serialize");
                write_atomic(&dir.join("stats.json"), &stats)?;
            }
            for d in &result.diagnostics {
                eprintln!("note: {d}");
            }
            print!("{}", result.ranking_text());
            Ok(())
        }
        Command::Eval {
            corpus,
            out,
            sweep_dep_factor,
        } => {
            let bugs = match corpus {
                Some(dir) => load_corpus(dir).map_err(CliError::Parse)?,
                None => seed_corpus(),
            };
            let config = pipeline_config(&cli.config)?;
            let report = evaluate_corpus(&bugs, &config);
            let text = render_metrics(&report);
            if let Some(dir) = out {
                write_atomic(&dir.join("metrics.txt"), &text)?;
                write_atomic(&dir.join("metrics.json"), &metrics_json(&report))?;
            }
            print!("{text}");
            if *sweep_dep_factor {
                let mut sweep = String::from("DEP-FACTOR TOP-1 TOP-3 TOP-5 TOP-10 MFR MAR\n");
                for i in 1..=10 {
                    let factor = i as f64 / 10.0;
                    let swept = PipelineConfig {
                        dep_factor: factor,
                        ..config.clone()
                    };
                    let r = evaluate_corpus(&bugs, &swept);
                    let opt = |v: Option<f64>| match v {
                        Some(x) => format!("{x:.4}"),
                        None => "undefined".into(),
                    };
                    sweep.push_str(&format!(
                        "{factor:.1} {} {} {} {} {} {}\n",
                        r.top_n[&1],
                        r.top_n[&3],
                        r.top_n[&5],
                        r.top_n[&10],
                        opt(r.mfr),
                        opt(r.mar),
                    ));
                }
                if let Some(dir) = out {
                    write_atomic(&dir.join("sweep.txt"), &sweep)?;
                }
                print!("{sweep}");
            }
            Ok(())
        }
        Command::Filter {
            program,
            tests,
            patches,
            top_n,
            out,
        } => {
            let result = localize_files(program, tests, &cli.config)?;
            let patch_text = read(patches)?;
            let parsed = parse_patches(&patch_text).map_err(|e| CliError::Parse(e.to_string()))?;
            let vars = top_vars(&result.ranking, f64::from(*top_n));
            let outcome =
                filter_patches(&parsed, &vars).map_err(|e| CliError::Gate(e.to_string()))?;
            let text = render_filter(&outcome);
            if let Some(dir) = out {
                write_atomic(&dir.join("filter.txt"), &text)?;
                write_atomic(&dir.join("filter.json"), &filter_json(&outcome))?;
            }
            print!("{text}");
            Ok(())
        }
        Command::Trace { program, tests } => {
            let program_src = read(program)?;
            let tests_src = read(tests)?;
            let parsed =
                parse_program(&program_src).map_err(|e| CliError::Parse(e.to_string()))?;
            let suite = parse_suite(&tests_src).map_err(|e| CliError::Parse(e.to_string()))?;
            let transformed = transform_gsa(&parsed);
            let config = RunConfig {
                budget: cli.config.budget,
                ..RunConfig::default()
            };
            let traces = run_suite(&transformed, &suite, &ObserveMode::All, &config);
            print!("{}", write_traces(&traces));
            Ok(())
        }
        Command::Slice { program, tests } => {
            let result = localize_files(program, tests, &cli.config)?;
            print!("{}", result.slices_text());
            Ok(())
        }
        Command::Tree { program, tests } => {
            let result = localize_files(program, tests, &cli.config)?;
            print!("{}", result.trees_text());
            Ok(())
        }
        Command::Seed { out } => {
            let bugs = seed_corpus();
            write_corpus(out, &bugs)?;
            println!("wrote {} bugs to {}", bugs.len(), out.display());
            Ok(())
        }
    }
}
