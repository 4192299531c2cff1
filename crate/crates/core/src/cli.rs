//! Command-line front end.
//!
//! Values are resolved in order: command-line flag, `ARTIFACT_<FLAG>`
//! environment variable, `--config` TOML file, built-in default. Exit codes
//! are 0 on success, 2 on usage or validation errors and 1 on runtime
//! errors. Output files are written to a temporary sibling and renamed, so
//! a failed run never leaves a partial table behind.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::ensembles::EntryDist;
use crate::error::Error;
use crate::harness::{
    self, exp_kernel_comparison, mp_comparison, ExpComparison, ExpRow, FitResult, Grid, MpComparison, MpRow,
    RunOptions, SpectrumRow, SweepRow, Tabulate,
};
use crate::kernels::{DomainTag, KernelFamily};
use crate::matrix::Limits;
use crate::mplaw::{asymptotic_eps_rank_ratio, asymptotic_ratio, best_k_error, rho_derivative, solve_quantile, MPParams};
use crate::spectra::sym_eig;
use crate::table::{Format, Report, Table};

#[derive(Debug, Parser)]
#[command(name = "kl-complexity", version, about = "Intrinsic complexity of random fields and vector ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalues of a discretized kernel matrix.
    Spectrum(SpectrumArgs),
    /// n_under, n_over and bounds for one kernel matrix.
    Complexity(KernelEpsArgs),
    /// Complexity against 1/sigma at fixed points per sigma, with log-log fits.
    SweepSigma(KernelEpsArgs),
    /// Complexity against the resolution r = sigma/h at fixed sigma.
    SweepRes(KernelEpsArgs),
    /// Complexity against eps for one kernel matrix, with polylog fits.
    SweepEps(KernelEpsArgs),
    /// Marchenko-Pastur embedding ratio, quantile and slope.
    Mp(MpArgs),
    /// Exponential covariance: closed-form ratio against finite-n spectra.
    ExpAnalytic(ExpArgs),
    /// Random ensembles against the Marchenko-Pastur predictions.
    Embed(EmbedArgs),
    /// Samples of a truncated Karhunen-Loeve expansion.
    FieldSample(FieldArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Output file; standard output if omitted.
    #[arg(long, short, global = true, env = "ARTIFACT_OUTPUT")]
    output: Option<PathBuf>,
    /// csv or json; inferred from the output extension when omitted.
    #[arg(long, global = true, env = "ARTIFACT_FORMAT")]
    format: Option<String>,
    /// TOML file with default values for any flag.
    #[arg(long, global = true, env = "ARTIFACT_CONFIG")]
    config: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true, env = "ARTIFACT_THREADS")]
    threads: Option<usize>,
    /// Lift the cap on dense problem sizes.
    #[arg(long, global = true, env = "ARTIFACT_ALLOW_LARGE")]
    allow_large: bool,
    /// Add per-row wall-clock times (makes output run-dependent).
    #[arg(long, global = true, env = "ARTIFACT_TIMING")]
    timing: bool,
}

#[derive(Debug, Args)]
struct KernelArgs {
    /// sq-exp, sq-exp-half or exp.
    #[arg(long, env = "ARTIFACT_KERNEL")]
    kernel: Option<String>,
    /// interval, square or sphere.
    #[arg(long, env = "ARTIFACT_DOMAIN")]
    domain: Option<String>,
    /// Correlation length (a comma-separated list for sweep-sigma).
    #[arg(long, env = "ARTIFACT_SIGMA", value_delimiter = ',')]
    sigma: Option<Vec<f64>>,
    /// Points per sigma (a list for sweep-res).
    #[arg(long, env = "ARTIFACT_R", value_delimiter = ',', conflicts_with = "h")]
    r: Option<Vec<f64>>,
    /// Grid spacing.
    #[arg(long, env = "ARTIFACT_H")]
    h: Option<f64>,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    kernel: KernelArgs,
}

#[derive(Debug, Args)]
struct KernelEpsArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    /// Comma-separated tolerances in (0, 1].
    #[arg(long, env = "ARTIFACT_EPS", value_delimiter = ',')]
    eps: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
struct MpArgs {
    /// Aspect ratio n/d.
    #[arg(long, env = "ARTIFACT_ALPHA")]
    alpha: Option<f64>,
    /// Entry variance.
    #[arg(long, env = "ARTIFACT_SIGMA2")]
    sigma2: Option<f64>,
    /// Comma-separated tolerances in (0, 1).
    #[arg(long, env = "ARTIFACT_EPS", value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Ambient dimension; adds the asymptotic eps-rank ratio.
    #[arg(long, env = "ARTIFACT_D")]
    d: Option<usize>,
}

#[derive(Debug, Args)]
struct ExpArgs {
    /// Matrix sizes.
    #[arg(long, env = "ARTIFACT_N", value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Decay rates, tau = 1/sigma in index units.
    #[arg(long, env = "ARTIFACT_TAU", value_delimiter = ',')]
    tau: Option<Vec<f64>>,
    #[arg(long, env = "ARTIFACT_EPS", value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Also decompose the dense matrix.
    #[arg(long, env = "ARTIFACT_DENSE")]
    dense: bool,
    /// Sample a correlated Gaussian ensemble with d = n * this ratio.
    #[arg(long, env = "ARTIFACT_D_OVER_N")]
    d_over_n: Option<f64>,
    #[arg(long, env = "ARTIFACT_SEED")]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct EmbedArgs {
    /// gaussian or rademacher.
    #[arg(long, env = "ARTIFACT_DIST")]
    dist: Option<String>,
    /// Numbers of vectors.
    #[arg(long, env = "ARTIFACT_N", value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Aspect ratio n/d.
    #[arg(long, env = "ARTIFACT_ALPHA")]
    alpha: Option<f64>,
    #[arg(long, env = "ARTIFACT_EPS", value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    /// Tolerances for the eps-rank of the unnormalized Gram matrix.
    #[arg(long, env = "ARTIFACT_RANK_EPS", value_delimiter = ',')]
    rank_eps: Option<Vec<f64>>,
    #[arg(long, env = "ARTIFACT_SEED")]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct FieldArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    /// Truncate at the fewest terms meeting this tolerance.
    #[arg(long, env = "ARTIFACT_EPS", conflicts_with = "terms")]
    eps: Option<f64>,
    /// Number of KL terms.
    #[arg(long, env = "ARTIFACT_TERMS")]
    terms: Option<usize>,
    /// Number of realizations.
    #[arg(long, env = "ARTIFACT_SAMPLES")]
    samples: Option<usize>,
    #[arg(long, env = "ARTIFACT_SEED")]
    seed: Option<u64>,
}

/// A number or a list of numbers in the config file.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v],
            OneOrMany::Many(v) => v,
        }
    }
}

/// Keys accepted in a `--config` file; names match the long flags with
/// dashes replaced by underscores.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    kernel: Option<String>,
    domain: Option<String>,
    sigma: Option<OneOrMany<f64>>,
    r: Option<OneOrMany<f64>>,
    h: Option<f64>,
    eps: Option<OneOrMany<f64>>,
    rank_eps: Option<OneOrMany<f64>>,
    n: Option<OneOrMany<usize>>,
    d: Option<usize>,
    alpha: Option<f64>,
    sigma2: Option<f64>,
    tau: Option<OneOrMany<f64>>,
    dist: Option<String>,
    seed: Option<u64>,
    terms: Option<usize>,
    samples: Option<usize>,
    d_over_n: Option<f64>,
    dense: Option<bool>,
    format: Option<String>,
    threads: Option<usize>,
    allow_large: Option<bool>,
    timing: Option<bool>,
}

/// Failure of a command, split by exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter { name, reason } => Failure::Usage(format!("invalid value for {}: {reason}", flag_name(name))),
            Error::MemoryCap { .. } => Failure::Usage(format!("{e}; pass --allow-large to lift the cap")),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn flag_name(param: &str) -> String {
    param
        .split(", ")
        .map(|p| format!("--{}", p.replace('_', "-")))
        .collect::<Vec<_>>()
        .join(", ")
}

fn usage(flag: &str, reason: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("invalid value for --{flag}: {reason}"))
}

/// Runs the command line `args` (including the program name) and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command, cli.common) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

/// Settings shared by every subcommand after merging all sources.
struct Resolved {
    file: FileConfig,
    output: Option<PathBuf>,
    format: Format,
    threads: Option<usize>,
    opts: RunOptions,
}

fn resolve_common(common: CommonArgs) -> Result<Resolved, Failure> {
    let file = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| usage("config", format!("cannot read {}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| usage("config", format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let format = match common.format.clone().or_else(|| file.format.clone()) {
        Some(f) => f.parse::<Format>().map_err(|_| usage("format", format!("expected csv or json, got `{f}`")))?,
        None => match common.output.as_deref().and_then(Path::extension) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        },
    };
    let threads = common.threads.or(file.threads);
    if threads == Some(0) {
        return Err(usage("threads", "must be at least 1"));
    }
    let allow_large = common.allow_large || file.allow_large.unwrap_or(false);
    let opts = RunOptions {
        limits: if allow_large { Limits::unlimited() } else { Limits::default() },
        timing: common.timing || file.timing.unwrap_or(false),
    };
    Ok(Resolved {
        file,
        output: common.output,
        format,
        threads,
        opts,
    })
}

fn parse_kernel(s: &str) -> Result<KernelFamily, Failure> {
    s.parse().map_err(|e| usage("kernel", e))
}

fn parse_domain(s: &str) -> Result<DomainTag, Failure> {
    s.parse().map_err(|e| usage("domain", e))
}

fn parse_dist(s: &str) -> Result<EntryDist, Failure> {
    s.parse::<EntryDist>().map_err(|e| usage("dist", e))
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn pick_list<T>(flag: Option<Vec<T>>, file: Option<OneOrMany<T>>, default: Vec<T>) -> Vec<T> {
    flag.or_else(|| file.map(OneOrMany::into_vec)).unwrap_or(default)
}

fn single<T: Copy + std::fmt::Debug>(flag: &str, v: &[T]) -> Result<T, Failure> {
    match v {
        [x] => Ok(*x),
        _ => Err(usage(flag, format!("expected one value, got {v:?}"))),
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Kernel flags after merging.
struct KernelSetup {
    kernel: KernelFamily,
    domain: DomainTag,
    sigma: Vec<f64>,
    r: Option<Vec<f64>>,
    h: Option<f64>,
}

impl KernelSetup {
    fn resolve(args: KernelArgs, file: &FileConfig) -> Result<Self, Failure> {
        let kernel = parse_kernel(&pick(args.kernel, file.kernel.clone(), "sq-exp".into()))?;
        let domain = parse_domain(&pick(args.domain, file.domain.clone(), "interval".into()))?;
        let sigma = pick_list(args.sigma, file.sigma.clone(), vec![0.1]);
        // a flag on the command line beats either spacing setting in the file
        let (r, h) = match (args.r, args.h) {
            (Some(r), _) => (Some(r), None),
            (None, Some(h)) => (None, Some(h)),
            (None, None) => match (file.r.clone(), file.h) {
                (Some(_), Some(_)) => return Err(usage("r", "config file sets both r and h")),
                (r, h) => (r.map(OneOrMany::into_vec), h),
            },
        };
        Ok(KernelSetup {
            kernel,
            domain,
            sigma,
            r,
            h,
        })
    }

    fn grid(&self) -> Result<Grid, Failure> {
        match (&self.r, self.h) {
            (_, Some(h)) => Ok(Grid::Spacing(h)),
            (Some(r), None) => Ok(Grid::PointsPerSigma(single("r", r)?)),
            (None, None) => Ok(Grid::PointsPerSigma(4.0)),
        }
    }

    fn describe(&self, report: Report) -> Report {
        let mut report = report
            .with_config("kernel", self.kernel.as_str())
            .with_config("domain", self.domain.as_str())
            .with_config("sigma", join(&self.sigma));
        if let Some(r) = &self.r {
            report = report.with_config("r", join(r));
        }
        if let Some(h) = self.h {
            report = report.with_config("h", h);
        }
        if self.r.is_none() && self.h.is_none() {
            report = report.with_config("r", "4");
        }
        report
    }
}

fn execute(command: Command, common: CommonArgs) -> Result<(), Failure> {
    let resolved = resolve_common(common)?;
    let job = || match command {
        Command::Spectrum(a) => spectrum(a.kernel, &resolved),
        Command::Complexity(a) => kernel_eps("complexity", a.kernel, a.eps, &resolved),
        Command::SweepSigma(a) => kernel_eps("sweep-sigma", a.kernel, a.eps, &resolved),
        Command::SweepRes(a) => kernel_eps("sweep-res", a.kernel, a.eps, &resolved),
        Command::SweepEps(a) => kernel_eps("sweep-eps", a.kernel, a.eps, &resolved),
        Command::Mp(a) => mp(a, &resolved),
        Command::ExpAnalytic(a) => exp_analytic(a, &resolved),
        Command::Embed(a) => embed(a, &resolved),
        Command::FieldSample(a) => field(a, &resolved),
    };
    let report = match resolved.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Failure::Runtime(format!("cannot start thread pool: {e}")))?
            .install(job)?,
        None => job()?,
    };
    let bytes = report
        .to_bytes(resolved.format)
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    emit(resolved.output.as_deref(), &bytes)
}

/// Writes to a temporary sibling of `path` and renames it into place.
fn emit(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    let Some(path) = path else {
        let mut out = std::io::stdout().lock();
        return out
            .write_all(bytes)
            .and_then(|_| out.flush())
            .map_err(|e| Failure::Runtime(format!("writing to stdout: {e}")));
    };
    let mut tmp_name = path.file_name().map(OsString::from).unwrap_or_else(|| "output".into());
    tmp_name.push(format!(".partial-{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = fs::write(&tmp, bytes).and_then(|_| fs::rename(&tmp, path));
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Failure::Runtime(format!("writing {}: {e}", path.display()))
    })
}

fn base_report(command: &str, rows: Table, opts: &RunOptions) -> Report {
    Report::new(rows)
        .with_config("command", command)
        .with_config("allow_large", opts.limits.max_points == usize::MAX)
        .with_config("timing", opts.timing)
}

fn spectrum(args: KernelArgs, res: &Resolved) -> Result<Report, Failure> {
    let setup = KernelSetup::resolve(args, &res.file)?;
    let sigma = single("sigma", &setup.sigma)?;
    let (_, c) = harness::kernel_matrix(setup.kernel, setup.domain, sigma, setup.grid()?, &res.opts.limits)?;
    let dec = sym_eig(&c, false)?;
    let rows = SpectrumRow::table(&harness::spectrum_rows(&dec));
    Ok(setup
        .describe(base_report("spectrum", rows, &res.opts))
        .with_config("n", dec.n())
        .with_config("trace_residual", dec.trace_residual)
        .with_config("frobenius_residual", dec.frobenius_residual))
}

fn kernel_eps(command: &str, args: KernelArgs, eps: Option<Vec<f64>>, res: &Resolved) -> Result<Report, Failure> {
    let file = &res.file;
    let mut setup = KernelSetup::resolve(args, file)?;
    let default_eps = if command == "sweep-eps" {
        vec![0.3, 0.1, 0.03, 0.01, 0.003]
    } else {
        vec![0.1]
    };
    let eps = pick_list(eps, file.eps.clone(), default_eps);
    let opts = &res.opts;
    let (rows, fits): (Vec<SweepRow>, Vec<FitResult>) = match command {
        "complexity" => {
            let sigma = single("sigma", &setup.sigma)?;
            let rows = harness::complexity_rows(command, setup.kernel, setup.domain, sigma, setup.grid()?, &eps, opts)?;
            (rows, Vec::new())
        }
        "sweep-sigma" => {
            let grid = setup.grid()?;
            harness::sigma_sweep(setup.kernel, setup.domain, grid, &setup.sigma, &eps, opts)?
        }
        "sweep-res" => {
            if setup.h.is_some() {
                return Err(usage("h", "sweep-res varies the resolution; give --r as a list instead"));
            }
            let r = setup.r.get_or_insert_with(|| vec![2.0, 4.0, 8.0]).clone();
            let sigma = single("sigma", &setup.sigma)?;
            (harness::resolution_sweep(setup.kernel, setup.domain, sigma, &r, &eps, opts)?, Vec::new())
        }
        "sweep-eps" => {
            let sigma = single("sigma", &setup.sigma)?;
            harness::eps_sweep(setup.kernel, setup.domain, sigma, setup.grid()?, &eps, opts)?
        }
        _ => unreachable!("unknown kernel command {command}"),
    };
    Ok(setup
        .describe(base_report(command, SweepRow::table(&rows), opts))
        .with_config("eps", join(&eps))
        .with_fits(FitResult::table(&fits)))
}

fn mp(a: MpArgs, res: &Resolved) -> Result<Report, Failure> {
    let file = &res.file;
    let alpha = pick(a.alpha, file.alpha, 0.25);
    let sigma2 = pick(a.sigma2, file.sigma2, 1.0);
    let eps = pick_list(a.eps, file.eps.clone(), vec![0.1]);
    let d = a.d.or(file.d);
    let p = MPParams::new(sigma2, alpha)?;
    let mut rows = Table::new(["eps", "y", "rho", "drho_deps", "best_k_error", "eps_rank_ratio"]);
    for &e in &eps {
        let y = solve_quantile(e, &p)?;
        let rho = asymptotic_ratio(e, &p)?;
        let slope = rho_derivative(e, &p)?;
        let back = best_k_error(rho, &p)?;
        let rank = d.map(|d| asymptotic_eps_rank_ratio(e, d, &p)).transpose()?;
        rows.push(vec![e.into(), y.into(), rho.into(), slope.into(), back.into(), rank.into()]);
    }
    let mut report = base_report("mp", rows, &res.opts)
        .with_config("alpha", alpha)
        .with_config("sigma2", sigma2)
        .with_config("eps", join(&eps))
        .with_config("lambda_minus", p.lambda_minus())
        .with_config("lambda_plus", p.lambda_plus())
        .with_config("atom", p.atom());
    if let Some(d) = d {
        report = report.with_config("d", d);
    }
    Ok(report)
}

fn exp_analytic(a: ExpArgs, res: &Resolved) -> Result<Report, Failure> {
    let file = &res.file;
    let cfg = ExpComparison {
        n_list: pick_list(a.n, file.n.clone(), vec![200]),
        tau_list: pick_list(a.tau, file.tau.clone(), vec![1.0]),
        eps_list: pick_list(a.eps, file.eps.clone(), vec![0.1]),
        d_over_n: a.d_over_n.or(file.d_over_n),
        dense: a.dense || file.dense.unwrap_or(false),
        seed: pick(a.seed, file.seed, 0),
    };
    let (rows, fits) = exp_kernel_comparison(&cfg, &res.opts)?;
    let mut report = base_report("exp-analytic", ExpRow::table(&rows), &res.opts)
        .with_config("n", join(&cfg.n_list))
        .with_config("tau", join(&cfg.tau_list))
        .with_config("eps", join(&cfg.eps_list))
        .with_config("dense", cfg.dense)
        .with_config("seed", cfg.seed.to_string());
    if let Some(r) = cfg.d_over_n {
        report = report.with_config("d_over_n", r);
    }
    Ok(report.with_fits(FitResult::table(&fits)))
}

fn embed(a: EmbedArgs, res: &Resolved) -> Result<Report, Failure> {
    let file = &res.file;
    let dist = parse_dist(&pick(a.dist, file.dist.clone(), "gaussian".into()))?;
    let n_list = pick_list(a.n, file.n.clone(), vec![500]);
    let alpha = pick(a.alpha, file.alpha, 0.25);
    let eps = pick_list(a.eps, file.eps.clone(), vec![0.05, 0.1, 0.2]);
    let rank_eps = pick_list(a.rank_eps, file.rank_eps.clone(), eps.clone());
    let seed = pick(a.seed, file.seed, 0);
    let cfg = MpComparison::new(dist, n_list, alpha, eps, seed).with_rank_eps(rank_eps);
    let rows = mp_comparison(&cfg, &res.opts)?;
    Ok(base_report("embed", MpRow::table(&rows), &res.opts)
        .with_config("dist", dist.as_str())
        .with_config("n", join(&cfg.n_list))
        .with_config("alpha", alpha)
        .with_config("eps", join(&cfg.eps_list))
        .with_config("rank_eps", join(&cfg.rank_eps_list))
        .with_config("seed", seed.to_string()))
}

fn field(a: FieldArgs, res: &Resolved) -> Result<Report, Failure> {
    let file = &res.file;
    let setup = KernelSetup::resolve(a.kernel, file)?;
    let sigma = single("sigma", &setup.sigma)?;
    let terms = a.terms.or(file.terms);
    let eps = if terms.is_some() {
        None
    } else {
        Some(pick(a.eps, file.eps.clone().map(|e| e.into_vec()[0]), 0.1))
    };
    let samples = pick(a.samples, file.samples, 1);
    let seed = pick(a.seed, file.seed, 0);
    let f = harness::field_sample(
        setup.kernel,
        setup.domain,
        sigma,
        setup.grid()?,
        eps,
        terms,
        samples,
        seed,
        &res.opts,
    )?;
    let mut report = setup
        .describe(base_report("field-sample", f.table(), &res.opts))
        .with_config("n", f.cloud.len())
        .with_config("terms", f.n_terms)
        .with_config("samples", samples)
        .with_config("seed", seed.to_string());
    if let Some(e) = eps {
        report = report.with_config("eps", e);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn help_exits_zero_and_bad_flag_exits_two() {
        assert_eq!(run(["kl-complexity", "--help"]), 0);
        assert_eq!(run(["kl-complexity", "complexity", "--bogus"]), 2);
        assert_eq!(run(["kl-complexity", "complexity", "--r", "4", "--h", "0.01"]), 2);
    }

    #[test]
    fn invalid_values_are_usage_errors() {
        assert_eq!(run(["kl-complexity", "complexity", "--eps", "1.5"]), 2);
        assert_eq!(run(["kl-complexity", "complexity", "--kernel", "matern"]), 2);
        assert_eq!(run(["kl-complexity", "mp", "--alpha", "-1"]), 2);
    }

    #[test]
    fn flag_names_follow_parameters() {
        assert_eq!(flag_name("rank_eps"), "--rank-eps");
        assert_eq!(flag_name("n, d"), "--n, --d");
    }
}
