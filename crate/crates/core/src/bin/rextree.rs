use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rextree::dislocation::DiscreteDislocation;
use rextree::error::Error;
use rextree::harness::config::{parse_law, parse_list, ExperimentConfig, ModelSpec, OutputFormat};
use rextree::harness::runner::run_experiment;
use rextree::treemetric::TreeStatistic;

#[derive(Parser)]
#[command(name = "rextree", version, about = "Markov branching trees from restricted exchangeable partitions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact root-split law of a model.
    SplitTable(Opts),
    /// Sample trees and print them in Newick form.
    Grow(Opts),
    /// Sampling-consistency residuals of splitting rules.
    Consistency(Opts),
    /// Sweep of the skewed Poisson-Dirichlet family.
    SamplingConsistency(Opts),
    /// Record counts of the constrained paintbox.
    Gnedin(Opts),
    /// Moments of renewal counts.
    Renewal(Opts),
    /// Distinct values seen along a subordinator window.
    Pjs(Opts),
    /// Reduced continuum trees on k leaves.
    ReducedCrt(Opts),
    /// Height or depth scaling exponent.
    Exponent(Opts),
    /// Gromov-Hausdorff distance between coupled reduced trees.
    GhStabilize(Opts),
    /// Exchangeability class of a splitting rule.
    Classify(Opts),
}

#[derive(Args, Clone, Default)]
struct Opts {
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Replicates (or GH pairs, or paths).
    #[arg(long)]
    reps: Option<u64>,
    /// Directory receiving summary.json and table.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Format printed on stdout.
    #[arg(long, value_parser = ["json", "csv"])]
    format: Option<String>,
    /// alpha_gamma, skewed_pd, single_atom, star.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    theta: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// JSON file holding a discrete dislocation measure.
    #[arg(long)]
    model_file: Option<PathBuf>,
    /// Comma-separated sizes.
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    k: Option<usize>,
    /// Self-similarity or tail index.
    #[arg(long)]
    index: Option<f64>,
    #[arg(long)]
    window: Option<f64>,
    /// Comma-separated times.
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    p: Option<u32>,
    /// exp:RATE, pareto:INDEX[,SCALE] or det:VALUE.
    #[arg(long)]
    law: Option<String>,
    /// Comma-separated record multiplicities.
    #[arg(long)]
    psi: Option<String>,
    /// height or mean_depth.
    #[arg(long)]
    statistic: Option<String>,
}

impl Command {
    fn split(self) -> (&'static str, Opts) {
        match self {
            Command::SplitTable(o) => ("split-table", o),
            Command::Grow(o) => ("grow", o),
            Command::Consistency(o) => ("consistency", o),
            Command::SamplingConsistency(o) => ("sampling-consistency", o),
            Command::Gnedin(o) => ("gnedin", o),
            Command::Renewal(o) => ("renewal", o),
            Command::Pjs(o) => ("pjs", o),
            Command::ReducedCrt(o) => ("reduced-crt", o),
            Command::Exponent(o) => ("exponent", o),
            Command::GhStabilize(o) => ("gh-stabilize", o),
            Command::Classify(o) => ("classify", o),
        }
    }
}

fn need(v: Option<f64>, name: &str) -> Result<f64, Error> {
    v.ok_or_else(|| Error::InvalidArgument(format!("--{name} is required for this family")))
}

fn model(o: &Opts) -> Result<Option<ModelSpec>, Error> {
    if let Some(path) = &o.model_file {
        let text = std::fs::read_to_string(path)?;
        let d: DiscreteDislocation =
            serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("bad model file: {e}")))?;
        return Ok(Some(ModelSpec::Dislocation { model: d }));
    }
    let Some(family) = &o.family else { return Ok(None) };
    Ok(Some(match family.as_str() {
        "alpha_gamma" => ModelSpec::AlphaGamma {
            alpha: need(o.alpha, "alpha")?,
            gamma: need(o.gamma, "gamma")?,
        },
        "skewed_pd" => ModelSpec::SkewedPd {
            alpha: need(o.alpha, "alpha")?,
            theta: need(o.theta, "theta")?,
            lambda: need(o.lambda, "lambda")?,
        },
        "single_atom" => ModelSpec::SingleAtom,
        "star" => ModelSpec::Star,
        other => return Err(Error::InvalidArgument(format!("unknown family {other:?}"))),
    }))
}

fn build_config(tag: &str, o: &Opts) -> Result<ExperimentConfig, Error> {
    let mut c = match &o.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::new(tag),
    };
    if c.experiment != tag {
        return Err(Error::InvalidArgument(format!("config is for {:?}, not {tag:?}", c.experiment)));
    }
    if let Some(m) = model(o)? {
        c.model = Some(m);
    }
    if let Some(s) = o.seed {
        c.master_seed = s;
    }
    if let Some(r) = o.reps {
        c.reps = r;
    }
    if let Some(d) = &o.out {
        c.output = Some(d.clone());
    }
    if let Some(f) = &o.format {
        c.format = f.parse()?;
    }
    if let Some(n) = &o.n {
        c.n_grid = parse_list(n)?;
    }
    if let Some(t) = &o.t {
        c.t_grid = parse_list(t)?;
    }
    if let Some(p) = &o.psi {
        c.psi = Some(parse_list(p)?);
    }
    if let Some(l) = &o.law {
        c.law = Some(parse_law(l)?);
    }
    if let Some(s) = &o.statistic {
        c.statistic = Some(s.parse::<TreeStatistic>()?);
    }
    c.k = o.k.or(c.k);
    c.index = o.index.or(c.index);
    c.window = o.window.or(c.window);
    c.p = o.p.or(c.p);
    c.validate()?;
    Ok(c)
}

fn run(tag: &str, o: &Opts) -> Result<bool, Error> {
    let cfg = build_config(tag, o)?;
    let result = run_experiment(&cfg)?;
    if let Some(dir) = &cfg.output {
        result.write(dir)?;
    }
    match cfg.format {
        OutputFormat::Json => print!("{}", result.summary_json()?),
        OutputFormat::Csv => print!("{}", result.table.to_csv()?),
    }
    for g in result.gates.iter().filter(|g| !g.passed) {
        eprintln!("gate {} failed: {}", g.name, g.detail);
    }
    Ok(result.passed())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (tag, opts) = cli.command.split();
    match run(tag, &opts) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e @ (Error::InvalidArgument(_) | Error::Unsupported(_))) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
