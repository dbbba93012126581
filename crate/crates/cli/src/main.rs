//! `congest` command line: run one experiment or a corpus sweep.
//!
//! Exit codes: 0 all checks passed, 1 verification or bound failure,
//! 2 usage or I/O error.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use congest_cli::{
    experiment::run_experiment, parse_bandwidth, sweep, Algorithm, CliError, ExperimentConfig,
    GenSpec, GraphSource,
};

#[derive(Parser, Debug)]
#[command(
    name = "congest",
    about = "Round-synchronous simulation of distributed shortest-path and centrality algorithms \
             with bound conformance checks"
)]
struct Args {
    /// Algorithm: apsp-unweighted | bc-unweighted | apsp-dag | bc-dag |
    /// source-detection | hk-ssp
    #[arg(long)]
    algo: String,

    /// Edge-list file: header "n m directed|dag weighted|unweighted", then one
    /// "u v" line per edge with a trailing weight in weighted mode
    #[arg(long, conflicts_with_all = ["gen", "fixture"])]
    graph: Option<PathBuf>,

    /// Generator spec kind:n:p with an optional :wmax suffix, e.g.
    /// random-dag:20:0.3:10
    #[arg(long, conflicts_with = "fixture")]
    gen: Option<String>,

    /// Fixture name: fig1-llt | fig2-congestion | diamond | p3
    #[arg(long)]
    fixture: Option<String>,

    /// Whether nodes know the vertex count a priori
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    know_n: bool,

    /// Run the diameter finalizer (unweighted algorithms)
    #[arg(long, default_value_t = false, action = clap::ArgAction::Set)]
    finalizer: bool,

    /// Bandwidth handling: account | enforce:BITS
    #[arg(long, default_value = "account")]
    bandwidth: String,

    /// Path-count representation: exact | float
    #[arg(long, default_value = "exact")]
    sigma: String,

    /// Compare outputs against the sequential oracles
    #[arg(long, default_value_t = false)]
    verify: bool,

    /// Generator seed
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Report file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Sweep spec kind=K,n=LO..HI,p=P,seeds=LO..HI[,wmax=W]; emits CSV
    #[arg(long, conflicts_with_all = ["graph", "gen", "fixture"])]
    sweep: Option<String>,

    /// Source ids (1-based) for source-detection / hk-ssp
    #[arg(long, value_delimiter = ',')]
    sources: Vec<u64>,

    /// Hop bound h for source-detection / hk-ssp
    #[arg(long)]
    hop_bound: Option<u64>,

    /// Result bound r for source-detection
    #[arg(long)]
    result_bound: Option<usize>,

    /// Include wall-clock time in the report (makes reruns non-identical)
    #[arg(long, default_value_t = false)]
    timing: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(args: Args) -> Result<bool, CliError> {
    let algorithm = Algorithm::parse(&args.algo)
        .ok_or_else(|| CliError::Usage(format!("unknown algorithm {:?}", args.algo)))?;
    let sigma_mode = match args.sigma.as_str() {
        "exact" => congest_core::numeric::SigmaMode::Exact,
        "float" => congest_core::numeric::SigmaMode::Float,
        other => {
            return Err(CliError::Usage(format!(
                "sigma must be exact|float, got {other:?}"
            )))
        }
    };
    let bandwidth = parse_bandwidth(&args.bandwidth).map_err(CliError::Usage)?;

    let source = if let Some(path) = args.graph {
        GraphSource::File(path)
    } else if let Some(spec) = &args.gen {
        GraphSource::Generated(GenSpec::parse(spec).map_err(CliError::Usage)?)
    } else if let Some(name) = &args.fixture {
        GraphSource::Fixture(name.clone())
    } else if args.sweep.is_none() {
        return Err(CliError::Usage(
            "one of --graph, --gen, --fixture, or --sweep is required".into(),
        ));
    } else {
        // Placeholder; sweeps generate their own instances.
        GraphSource::Fixture("p3".into())
    };

    let config = ExperimentConfig {
        algorithm,
        source,
        know_n: args.know_n,
        finalizer: args.finalizer,
        bandwidth,
        sigma_mode,
        verify: args.verify,
        seed: args.seed,
        sources: args.sources,
        hop_bound: args.hop_bound,
        result_bound: args.result_bound,
        timing: args.timing,
    };

    if let Some(spec_text) = &args.sweep {
        let spec = sweep::SweepSpec::parse(spec_text).map_err(CliError::Usage)?;
        let all_pass = match &args.out {
            Some(path) => {
                let mut file = std::fs::File::create(path)?;
                sweep::corpus_sweep(&spec, &config, &mut file)?
            }
            None => {
                let stdout = std::io::stdout();
                let mut lock = stdout.lock();
                sweep::corpus_sweep(&spec, &config, &mut lock)?
            }
        };
        return Ok(all_pass);
    }

    let outcome = run_experiment(&config)?;
    let text = serde_json::to_string_pretty(&outcome.report).expect("report serializes");
    match &args.out {
        Some(path) => {
            let mut file = std::fs::File::create(path)?;
            writeln!(file, "{text}")?;
        }
        None => println!("{text}"),
    }
    // An enforce-mode abort is a failed run regardless of --verify; with
    // --verify any oracle mismatch or bound violation also fails.
    Ok(!outcome.aborted && (!config.verify || outcome.all_pass))
}
