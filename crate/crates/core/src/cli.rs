//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{config, Error, Result};
use crate::evd::{AttractionTriple, BaseDist, BaseLaw, Dependence, Marginal, MaxStableLaw};
use crate::harness::experiments::{self, DEFAULT_THETAS, POINCARE_S};
use crate::harness::report::{emit_csv, ExperimentReport, Table};
use crate::harness::DEFAULT_NS;
use crate::lt_families::{CountScheme, LaplaceFamily};
use crate::nmid::{MaxStrategy, DEFAULT_NODES};

const EXPERIMENTS: &str = "\
Experiments (verify):
  poincare   P_theta(phi(theta s)) = phi(s) for each family       (Poincare equation)
  lemma12    theta N_theta converges in law to the mixer U         (Lemma 1.2)
  thm23      closed form phi(-log H) against the mixture integral  (Theorem 2.3)
  definetti  Poisson-maximum and Laplace limits of n(1 - G_n)      (de Finetti-type limits, Sec. 2)
  thm24      deterministic and random maxima converge together     (Theorem 2.4)
  thm31      F = P_theta(F_theta) with F_theta of the same type    (Theorem 3.1)
  thm32      Y(Z) of an extremal process at a random time has d.f. F  (Theorem 3.2(iv))
  thm34      random domain of attraction follows the classical one (Theorem 3.4)

Exit status: 0 when every check passes, 1 on a failed check or I/O error,
2 on a usage or configuration error.";

#[derive(Debug, Parser)]
#[command(
    name = "randmax",
    version,
    about = "Random max-stable laws: evaluation, exact sampling and seeded verification",
    after_help = EXPERIMENTS,
    args_override_self = true
)]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Opts {
    /// Laplace family: geometric | degenerate | mittag-leffler:NU [default: geometric; poincare: all]
    #[arg(long, global = true, value_parser = parse_family)]
    family: Option<LaplaceFamily>,
    /// Max-stable marginal(s): frechet:A[:LOC:SCALE] | gumbel[:LOC:SCALE] | reverse-weibull:A[:LOC:SCALE]
    #[arg(long, global = true, value_delimiter = ',', default_value = "frechet:1")]
    marginal: Vec<String>,
    /// Dimension; a single marginal is repeated
    #[arg(long, global = true, default_value_t = 1)]
    dim: usize,
    /// Dependence: independence | complete | logistic:R
    #[arg(long, global = true, default_value = "independence", value_parser = parse_dependence)]
    dependence: Dependence,
    /// Base d.f.(s): pareto:A | exponential | uniform [table doa: all three]
    #[arg(long, global = true, value_delimiter = ',')]
    base: Vec<String>,
    /// Single theta for sampling [default: 0.5]
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Theta list [default: 0.5,0.1,0.01; lemma12: 0.001]
    #[arg(long, global = true, value_delimiter = ',')]
    thetas: Vec<f64>,
    /// Index list n [default: 10,100,1000,10000; thm34: 10000]
    #[arg(long, global = true, value_delimiter = ',')]
    ns: Vec<u64>,
    /// Sample count or path count [default: 100000 for verify, 1000 for sample, 1 for paths]
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Time at which the extremal process is sampled
    #[arg(long, global = true, default_value_t = 1.0)]
    t: f64,
    /// Horizon of simulated extremal paths
    #[arg(long, global = true, default_value_t = 1.0)]
    horizon: f64,
    /// Path floor [default: level exceeded with probability 1e-3 at time horizon/1000]
    #[arg(long, global = true)]
    floor: Option<f64>,
    /// Random-maximum strategy
    #[arg(long, global = true, value_enum, default_value_t = StrategyArg::Loop)]
    strategy: StrategyArg,
    /// Sup-distance threshold for lemma12
    #[arg(long, global = true, default_value_t = 0.01)]
    threshold: f64,
    /// Quadrature nodes for thm23
    #[arg(long, global = true, default_value_t = DEFAULT_NODES)]
    nodes: usize,
    /// Evaluation grid override (one axis, repeated in every coordinate)
    #[arg(long, global = true, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    #[arg(long, global = true, env = "RANDMAX_SEED", default_value_t = 42)]
    seed: u64,
    /// Worker threads; results do not depend on it
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory for CSV files and the summary [default: stdout]
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// File of key = value lines mirroring the flags; flags given on the command line win
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Loop,
    Inversion,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a verification experiment
    Verify {
        #[command(subcommand)]
        experiment: Verify,
    },
    /// Draw samples and print them as CSV
    Sample {
        #[command(subcommand)]
        what: Sample,
    },
    /// Extremal-process paths
    Extremal {
        #[command(subcommand)]
        what: Extremal,
    },
    /// Analytic tables
    Table {
        #[command(subcommand)]
        what: TableKind,
    },
}

#[derive(Debug, Subcommand)]
enum Verify {
    /// Poincare equation residuals
    Poincare,
    /// theta N_theta -> U (Lemma 1.2)
    Lemma12,
    /// Composition vs mixture integral (Theorem 2.3)
    Thm23,
    /// de Finetti-type limits (Sec. 2)
    Definetti,
    /// Paired deterministic/random convergence (Theorem 2.4)
    Thm24,
    /// Same-type decomposition (Theorem 3.1)
    Thm31,
    /// Extremal process at a random time (Theorem 3.2(iv))
    Thm32,
    /// Random domain of attraction (Theorem 3.4)
    Thm34,
}

#[derive(Debug, Subcommand)]
enum Sample {
    /// max(X_1, ..., X_N) with N = N_theta
    Randmax,
    /// The mixer U
    Mixer,
    /// The count N_theta
    Count,
    /// Y(t) of the extremal process
    ExtremalMarginal,
}

#[derive(Debug, Subcommand)]
enum Extremal {
    /// Jump records (path_id, time, state)
    Path,
}

#[derive(Debug, Subcommand)]
enum TableKind {
    /// Domain-of-attraction gaps per base and n
    Doa,
}

fn parse_num(s: &str, what: &str) -> std::result::Result<f64, String> {
    s.parse::<f64>().map_err(|_| format!("invalid {what} `{s}`"))
}

fn parse_family(s: &str) -> std::result::Result<LaplaceFamily, String> {
    match s.split_once(':') {
        None if s == "geometric" => Ok(LaplaceFamily::Geometric),
        None if s == "degenerate" => Ok(LaplaceFamily::Degenerate),
        Some(("mittag-leffler", nu)) => {
            LaplaceFamily::mittag_leffler(parse_num(nu, "index")?).map_err(|e| e.to_string())
        }
        _ => Err(format!("unknown family `{s}`")),
    }
}

fn parse_dependence(s: &str) -> std::result::Result<Dependence, String> {
    match s.split_once(':') {
        None if s == "independence" => Ok(Dependence::Independence),
        None if s == "complete" => Ok(Dependence::CompleteDependence),
        Some(("logistic", r)) => Ok(Dependence::Logistic(parse_num(r, "logistic parameter")?)),
        _ => Err(format!("unknown dependence `{s}`")),
    }
}

fn parse_marginal(s: &str) -> Result<Marginal> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums = parts[1..]
        .iter()
        .map(|p| parse_num(p, "marginal parameter"))
        .collect::<std::result::Result<Vec<f64>, String>>()
        .map_err(config)?;
    match (parts[0], nums.as_slice()) {
        ("frechet", [a]) => Marginal::frechet(*a),
        ("frechet", [a, loc, scale]) => Marginal::frechet_with(*a, *loc, *scale),
        ("gumbel", []) => Ok(Marginal::gumbel()),
        ("gumbel", [loc, scale]) => Marginal::gumbel_with(*loc, *scale),
        ("reverse-weibull", [a]) => Marginal::reverse_weibull(*a),
        ("reverse-weibull", [a, loc, scale]) => Marginal::reverse_weibull_with(*a, *loc, *scale),
        _ => Err(config(format!("unknown marginal `{s}`"))),
    }
}

fn parse_base(s: &str) -> Result<BaseDist> {
    match s.split_once(':') {
        None if s == "exponential" => Ok(BaseDist::UnitExponential),
        None if s == "uniform" => Ok(BaseDist::Uniform),
        Some(("pareto", a)) => BaseDist::pareto(parse_num(a, "Pareto index").map_err(config)?),
        _ => Err(config(format!("unknown base `{s}`"))),
    }
}

impl Opts {
    fn family(&self) -> LaplaceFamily {
        self.family.unwrap_or(LaplaceFamily::Geometric)
    }

    fn law(&self) -> Result<MaxStableLaw> {
        let margs = self
            .marginal
            .iter()
            .map(|m| parse_marginal(m))
            .collect::<Result<Vec<_>>>()?;
        let margs = match (margs.len(), self.dim) {
            (1, d) => vec![margs[0]; d],
            (k, d) if k == d => margs,
            (k, d) => return Err(config(format!("{k} marginals given for dimension {d}"))),
        };
        MaxStableLaw::new(margs, self.dependence)
    }

    fn bases(&self) -> Result<Vec<BaseDist>> {
        self.base.iter().map(|b| parse_base(b)).collect()
    }

    fn base_law(&self) -> Result<BaseLaw> {
        let bases = self.bases()?;
        if bases.is_empty() {
            return Ok(BaseLaw::univariate(BaseDist::Pareto(1.0)));
        }
        BaseLaw::new(bases)
    }

    fn triple(&self) -> Result<AttractionTriple> {
        match self.bases()?.as_slice() {
            [] => Ok(AttractionTriple::new(BaseDist::Pareto(1.0))),
            [b] => Ok(AttractionTriple::new(*b)),
            _ => Err(config("this experiment takes a single univariate base")),
        }
    }

    fn thetas_or(&self, default: &[f64]) -> Vec<f64> {
        if self.thetas.is_empty() {
            default.to_vec()
        } else {
            self.thetas.clone()
        }
    }

    fn ns_or(&self, default: &[u64]) -> Vec<u64> {
        if self.ns.is_empty() {
            default.to_vec()
        } else {
            self.ns.clone()
        }
    }

    fn scheme(&self) -> Result<CountScheme> {
        CountScheme::new(self.family(), self.theta.unwrap_or(0.5))
    }

    fn strategy(&self) -> MaxStrategy {
        match self.strategy {
            StrategyArg::Loop => MaxStrategy::Loop,
            StrategyArg::Inversion => MaxStrategy::Inversion,
        }
    }
}

enum Output {
    Report(ExperimentReport),
    Samples(Table),
}

fn dispatch(cmd: &Command, o: &Opts) -> Result<Output> {
    let grid = o.grid.as_deref();
    let report = match cmd {
        Command::Verify { experiment } => match experiment {
            Verify::Poincare => {
                let families = match o.family {
                    Some(f) => vec![f],
                    None => LaplaceFamily::shipped().to_vec(),
                };
                experiments::poincare(&families, &o.thetas_or(&DEFAULT_THETAS), &POINCARE_S)?
            }
            Verify::Lemma12 => experiments::lemma12(
                &o.family(),
                &o.thetas_or(&[0.001]),
                o.n.unwrap_or(100_000),
                o.threshold,
                o.seed,
            )?,
            Verify::Thm23 => experiments::thm23(&o.family(), &o.law()?, o.nodes, grid)?,
            Verify::Definetti => experiments::definetti(&o.family(), &o.triple()?, &o.ns_or(&DEFAULT_NS), grid)?,
            Verify::Thm24 => experiments::thm24(&o.family(), &o.triple()?, &o.ns_or(&DEFAULT_NS), grid)?,
            Verify::Thm31 => experiments::thm31(&o.family(), &o.law()?, &o.thetas_or(&DEFAULT_THETAS), grid)?,
            Verify::Thm32 => experiments::thm32(&o.family(), &o.law()?, o.n.unwrap_or(100_000), o.seed)?,
            Verify::Thm34 => experiments::thm34(
                &o.family(),
                &o.triple()?,
                &o.ns_or(&[10_000]),
                o.n.unwrap_or(100_000),
                grid,
                o.seed,
            )?,
        },
        Command::Sample { what } => {
            let n = o.n.unwrap_or(1000);
            let table = match what {
                Sample::Randmax => experiments::sample_randmax(&o.scheme()?, &o.base_law()?, n, o.strategy(), o.seed),
                Sample::Mixer => experiments::sample_mixer_table(&o.family(), n, o.seed),
                Sample::Count => experiments::sample_count_table(&o.scheme()?, n, o.seed),
                Sample::ExtremalMarginal => experiments::sample_extremal_marginal(&o.law()?, o.t, n, o.seed)?,
            };
            return Ok(Output::Samples(table));
        }
        Command::Extremal { what: Extremal::Path } => {
            let t = experiments::extremal_paths(&o.law()?, o.horizon, o.floor, o.n.unwrap_or(1), o.seed)?;
            return Ok(Output::Samples(t));
        }
        Command::Table { what: TableKind::Doa } => {
            let triples = match o.bases()?.as_slice() {
                [] => AttractionTriple::shipped().to_vec(),
                bs => bs.iter().map(|b| AttractionTriple::new(*b)).collect(),
            };
            experiments::doa_table(&triples, &o.ns_or(&DEFAULT_NS), grid)?
        }
    };
    Ok(Output::Report(report))
}

/// Turns `key = value` lines into `--key value` arguments.
fn config_args(path: &Path) -> std::result::Result<Vec<OsString>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut args = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("{}:{}: expected key = value", path.display(), i + 1))?;
        let k = k.trim();
        if k == "config" {
            return Err(format!(
                "{}:{}: nested config files are not supported",
                path.display(),
                i + 1
            ));
        }
        args.push(format!("--{k}").into());
        args.push(v.trim().into());
    }
    Ok(args)
}

fn find_config(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter();
    let mut found = None;
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            found = it.next().map(PathBuf::from);
        } else if let Some(p) = s.strip_prefix("--config=") {
            found = Some(PathBuf::from(p));
        }
    }
    found
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Domain(_) | Error::Config(_) | Error::Unsupported(_) => 2,
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let mut args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    if let Some(path) = find_config(&args) {
        match config_args(&path) {
            Ok(extra) => {
                // config values first so command-line flags override them
                let rest = args.split_off(1.min(args.len()));
                args.extend(extra);
                args.extend(rest);
            }
            Err(msg) => {
                eprintln!("error: {msg}");
                return 2;
            }
        }
    }
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    if let Some(k) = cli.opts.threads {
        if k == 0 {
            eprintln!("error: --threads must be positive");
            return 2;
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    let output = match dispatch(&cli.command, &cli.opts) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    match emit(&output, cli.opts.out.as_deref(), stdout) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    }
    match output {
        Output::Report(r) if !r.pass() => 1,
        _ => 0,
    }
}

fn emit(output: &Output, out: Option<&Path>, stdout: &mut dyn Write) -> std::io::Result<()> {
    match (output, out) {
        (Output::Report(r), Some(dir)) => {
            emit_csv(r, dir)?;
            stdout.write_all(r.summary().as_bytes())
        }
        (Output::Report(r), None) => stdout.write_all(r.summary().as_bytes()),
        (Output::Samples(t), Some(dir)) => {
            fs::create_dir_all(dir)?;
            fs::write(dir.join(format!("{}.csv", t.name)), t.to_csv())
        }
        (Output::Samples(t), None) => stdout.write_all(t.to_csv().as_bytes()),
    }
}
