//! Command-line front end: every pipeline reads and writes files only, and
//! all randomness flows from `--seed`.
//!
//! Exit codes: 0 on success, 1 on a usage error, 2 when an input cannot be
//! read or is inconsistent.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::confidence::{
    bootstrap_quantiles, ci_band, ci_mean_boundary, ci_mean_set, ci_sublevel, coverage_experiment, BandQuantiles,
    CoverageConfig, CoverageTarget, QuantileReport, QuantileSource, DEFAULT_BOOTSTRAP_REPLICATES,
    DEFAULT_GAUSSIAN_DRAWS,
};
use crate::distance::{hausdorff, oriented_distance};
use crate::error::Error;
use crate::grid::{read_field_csv, read_mask_pgm, write_field_csv, write_mask_pgm, BinaryMask, GridDomain};
use crate::levelset::{check_consistency, level_band, level_boundary, sublevel_set, LevelSpec};
use crate::meanset::{empirical_mean_boundary, empirical_mean_set, mean_odf, read_stack_dir, write_stack_dir, SampleStack, MANIFEST};
use crate::models::{sample_stack_with_draws, ModelConfig, RandomSetModel};
use crate::regress::{covariate_region, gaussian_field_quantiles, predict_field, read_table, RegressionSpec};

#[derive(Debug, Parser)]
#[command(name = "odfset", version, about = "Level sets, mean sets and their confidence regions on grids")]
pub struct Cli {
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Oriented distance function of a PGM mask, written as a field CSV.
    Odf {
        mask: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        domain: Option<GridDomain>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Hausdorff distance between two PGM masks.
    Hausdorff {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        domain: Option<GridDomain>,
    },
    /// Sublevel set or level band, level boundary and consistency report of a field.
    Levelset {
        field: PathBuf,
        #[command(flatten)]
        level: LevelArgs,
        /// Tolerance for the level boundary and the consistency check.
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Mean ODF, mean set and mean boundary of a stack directory or a
    /// directory of PGM masks, optionally with bootstrap confidence regions.
    Mean {
        input: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        domain: Option<GridDomain>,
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
        /// Also write bootstrap confidence regions (needs --seed).
        #[arg(long)]
        ci: bool,
        #[command(flatten)]
        boot: BootArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bootstrap confidence region for the expected set.
    CiMean {
        stack: PathBuf,
        #[command(flatten)]
        boot: BootArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bootstrap confidence region for the expected boundary.
    CiBoundary {
        stack: PathBuf,
        #[command(flatten)]
        boot: BootArgs,
        /// Use the asymmetric band built from the min/max quantiles.
        #[arg(long)]
        asymmetric: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Confidence region for a level set of an estimated field from given quantiles.
    CiLevelset {
        field: PathBuf,
        /// Sample size behind the estimate.
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        level: LevelArgs,
        #[arg(long)]
        q1: Option<f64>,
        #[arg(long)]
        q2: Option<f64>,
        /// A quantile report JSON supplying q1 and q2.
        #[arg(long)]
        quantiles: Option<PathBuf>,
        #[arg(long, default_value = "full")]
        window: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate a stack of ODFs from a model JSON.
    Simulate {
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        domain: GridDomain,
        /// Falls back to the model file's seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Coverage rate of the confidence region for a model's expected set or boundary.
    Coverage {
        model: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        trials: usize,
        #[arg(long, allow_hyphen_values = true)]
        domain: GridDomain,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = TargetArg::Boundary)]
        target: TargetArg,
        /// Quantiles from a bootstrap with this many replicates per trial.
        #[arg(long, conflicts_with = "limit_draws")]
        replicates: Option<usize>,
        /// Quantiles from this many draws of the model's limiting field.
        #[arg(long)]
        limit_draws: Option<usize>,
        #[arg(long, default_value = "full")]
        window: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit a linear model from CSV and estimate a covariate domain with its confidence region.
    Regress {
        data: PathBuf,
        /// Regression spec JSON (columns, feature terms, sign).
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        level: f64,
        #[arg(long, allow_hyphen_values = true)]
        domain: GridDomain,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Gaussian draws for the quantile.
        #[arg(long, default_value_t = DEFAULT_GAUSSIAN_DRAWS)]
        draws: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "full")]
        window: String,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Set,
    Boundary,
}

#[derive(Debug, Args)]
pub struct LevelArgs {
    /// Level for a sublevel set.
    #[arg(long, allow_hyphen_values = true, conflicts_with_all = ["p1", "p2"])]
    pub p: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "p2")]
    pub p1: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "p1")]
    pub p2: Option<f64>,
}

impl LevelArgs {
    fn levels(&self) -> Result<Level, CliError> {
        match (self.p, self.p1, self.p2) {
            (Some(p), None, None) => Ok(Level::Below(p)),
            (None, Some(a), Some(b)) => Ok(Level::Band(a, b)),
            _ => Err(CliError::Usage("give either --p or both --p1 and --p2".into())),
        }
    }
}

enum Level {
    Below(f64),
    Band(f64, f64),
}

#[derive(Debug, Args)]
pub struct BootArgs {
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP_REPLICATES)]
    pub replicates: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    /// `full` or a PGM mask on the stack's grid.
    #[arg(long, default_value = "full")]
    pub window: String,
}

impl BootArgs {
    fn seed(&self) -> Result<u64, CliError> {
        self.seed.ok_or_else(|| CliError::Usage("--seed is required for resampling".into()))
    }
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "error: {m}"),
        }
    }
}

/// Attach the offending input to a library error.
fn at(input: &Path) -> impl Fn(Error) -> CliError + '_ {
    move |e| match e {
        Error::Parse { .. } => CliError::Data(e.to_string()),
        e => CliError::Data(format!("{}: {e}", input.display())),
    }
}

fn data(e: Error) -> CliError {
    CliError::Data(e.to_string())
}

fn usage_check(alpha: f64) -> Result<(), CliError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CliError::Usage(format!("--alpha {alpha} must lie in (0, 1)")))
    }
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| dispatch(cli.command)),
        None => dispatch(cli.command),
    }
}

fn ensure_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::Data(format!("{}: {e}", out.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| data(e.into()))? + "\n";
    fs::write(path, text).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn read_window(spec: &str, domain: &GridDomain) -> Result<BinaryMask, CliError> {
    if spec == "full" {
        return Ok(BinaryMask::filled(*domain, true));
    }
    let path = Path::new(spec);
    read_mask_pgm(path, Some(*domain)).map_err(at(path))
}

fn read_model(path: &Path) -> Result<(RandomSetModel, Option<u64>), CliError> {
    let text = fs::read_to_string(path).map_err(|e| at(path)(e.into()))?;
    let cfg: ModelConfig = serde_json::from_str(&text).map_err(|e| at(path)(Error::parse(path, e.to_string())))?;
    let model = RandomSetModel::from_config(&cfg).map_err(at(path))?;
    Ok((model, cfg.seed))
}

/// A stack directory (with a manifest) or a directory of PGM masks whose
/// ODFs form the stack.
fn read_stack_input(input: &Path, domain: Option<GridDomain>) -> Result<SampleStack, CliError> {
    if input.join(MANIFEST).exists() {
        let stack = read_stack_dir(input).map_err(at(input))?;
        if let Some(d) = domain {
            d.ensure_same(stack.domain()).map_err(at(input))?;
        }
        return Ok(stack);
    }
    let mut files: Vec<PathBuf> = fs::read_dir(input)
        .map_err(|e| at(input)(e.into()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Data(format!("{}: no {MANIFEST} and no .pgm files", input.display())));
    }
    let mut fields = Vec::with_capacity(files.len());
    let mut grid = domain;
    for f in &files {
        let mask = read_mask_pgm(f, grid).map_err(at(f))?;
        grid = Some(*mask.domain());
        fields.push(oriented_distance(&mask).map_err(at(f))?);
    }
    SampleStack::new(fields).map_err(at(input))
}

#[derive(Serialize)]
struct SimulateOut<'a> {
    model: ModelConfig,
    n: usize,
    seed: u64,
    draws: &'a [crate::models::Draw],
}

#[derive(Serialize)]
struct RegressOut {
    fit: crate::regress::FitReport,
    level: f64,
    quantiles: QuantileReport,
    estimate_cells: usize,
    region_cells: usize,
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Odf { mask, domain, out } => {
            let m = read_mask_pgm(&mask, domain).map_err(at(&mask))?;
            let b = oriented_distance(&m).map_err(at(&mask))?;
            write_field_csv(&out, &b).map_err(at(&out))
        }
        Command::Hausdorff { a, b, domain } => {
            let ma = read_mask_pgm(&a, domain).map_err(at(&a))?;
            let mb = read_mask_pgm(&b, Some(domain.unwrap_or(*ma.domain()))).map_err(at(&b))?;
            let d = hausdorff(&ma, &mb).map_err(at(&b))?;
            println!("{d}");
            Ok(())
        }
        Command::Levelset { field, level, tol, out } => {
            let level = level.levels()?;
            let f = read_field_csv(&field).map_err(at(&field))?;
            ensure_dir(&out)?;
            let p = match level {
                Level::Below(p) => {
                    write_mask_pgm(&out.join("sublevel.pgm"), &sublevel_set(&f, p)).map_err(data)?;
                    p
                }
                Level::Band(p1, p2) => {
                    let spec = LevelSpec::new(p1, p2, tol).map_err(|e| CliError::Usage(e.to_string()))?;
                    write_mask_pgm(&out.join("band.pgm"), &level_band(&f, &spec)).map_err(data)?;
                    p1
                }
            };
            let bd = level_boundary(&f, p, tol).map_err(|e| CliError::Usage(e.to_string()))?;
            write_mask_pgm(&out.join("boundary.pgm"), &bd).map_err(data)?;
            let report = check_consistency(&f, p, tol).map_err(|e| CliError::Usage(e.to_string()))?;
            write_json(&out.join("consistency.json"), &report)
        }
        Command::Mean { input, domain, tol, ci, boot, out } => {
            usage_check(boot.alpha)?;
            let seed = if ci { Some(boot.seed()?) } else { None };
            let stack = read_stack_input(&input, domain)?;
            ensure_dir(&out)?;
            write_field_csv(&out.join("mean.csv"), &mean_odf(&stack)).map_err(data)?;
            write_mask_pgm(&out.join("mean_set.pgm"), &empirical_mean_set(&stack)).map_err(data)?;
            let bd = empirical_mean_boundary(&stack, tol).map_err(|e| CliError::Usage(e.to_string()))?;
            write_mask_pgm(&out.join("mean_boundary.pgm"), &bd).map_err(data)?;
            if let Some(seed) = seed {
                let w = read_window(&boot.window, stack.domain())?;
                let r = bootstrap_quantiles(&stack, &w, boot.alpha, boot.replicates, seed).map_err(at(&input))?;
                write_mask_pgm(&out.join("ci_set.pgm"), &ci_mean_set(&stack, r.q1, &w).map_err(data)?).map_err(data)?;
                let band = ci_mean_boundary(&stack, r.symmetric(), &w).map_err(data)?;
                write_mask_pgm(&out.join("ci_boundary.pgm"), &band).map_err(data)?;
                write_json(&out.join("quantiles.json"), &r)?;
            }
            Ok(())
        }
        Command::CiMean { stack, boot, out } => {
            usage_check(boot.alpha)?;
            let seed = boot.seed()?;
            let s = read_stack_input(&stack, None)?;
            let w = read_window(&boot.window, s.domain())?;
            let r = bootstrap_quantiles(&s, &w, boot.alpha, boot.replicates, seed).map_err(at(&stack))?;
            ensure_dir(&out)?;
            write_mask_pgm(&out.join("mean_set.pgm"), &empirical_mean_set(&s)).map_err(data)?;
            write_mask_pgm(&out.join("ci_set.pgm"), &ci_mean_set(&s, r.q1, &w).map_err(data)?).map_err(data)?;
            write_json(&out.join("quantiles.json"), &r)
        }
        Command::CiBoundary { stack, boot, asymmetric, out } => {
            usage_check(boot.alpha)?;
            let seed = boot.seed()?;
            let s = read_stack_input(&stack, None)?;
            let w = read_window(&boot.window, s.domain())?;
            let r = bootstrap_quantiles(&s, &w, boot.alpha, boot.replicates, seed).map_err(at(&stack))?;
            let q = if asymmetric { r.asymmetric() } else { r.symmetric() };
            ensure_dir(&out)?;
            let bd = empirical_mean_boundary(&s, 0.0).map_err(data)?;
            write_mask_pgm(&out.join("mean_boundary.pgm"), &bd).map_err(data)?;
            write_mask_pgm(&out.join("ci_boundary.pgm"), &ci_mean_boundary(&s, q, &w).map_err(data)?).map_err(data)?;
            write_json(&out.join("quantiles.json"), &r)
        }
        Command::CiLevelset { field, n, level, q1, q2, quantiles, window, out } => {
            let level = level.levels()?;
            let (q1, q2) = match quantiles {
                Some(path) => {
                    let text = fs::read_to_string(&path).map_err(|e| at(&path)(e.into()))?;
                    let r: QuantileReport =
                        serde_json::from_str(&text).map_err(|e| at(&path)(Error::parse(&path, e.to_string())))?;
                    (q1.or(Some(r.q1)), q2.or(Some(r.q2)))
                }
                None => (q1, q2),
            };
            let f = read_field_csv(&field).map_err(at(&field))?;
            let w = read_window(&window, f.domain())?;
            ensure_dir(&out)?;
            match level {
                Level::Below(p) => {
                    let q1 = q1.ok_or_else(|| CliError::Usage("a sublevel region needs --q1 or --quantiles".into()))?;
                    write_mask_pgm(&out.join("estimate.pgm"), &sublevel_set(&f, p)).map_err(data)?;
                    let r = ci_sublevel(&f, n, p, q1, &w).map_err(|e| CliError::Usage(e.to_string()))?;
                    write_mask_pgm(&out.join("ci_sublevel.pgm"), &r).map_err(data)
                }
                Level::Band(p1, p2) => {
                    let q2 = q2.ok_or_else(|| CliError::Usage("a band region needs --q2 or --quantiles".into()))?;
                    let r = ci_band(&f, n, p1, p2, BandQuantiles::Symmetric(q2), &w)
                        .map_err(|e| CliError::Usage(e.to_string()))?;
                    write_mask_pgm(&out.join("ci_band.pgm"), &r).map_err(data)
                }
            }
        }
        Command::Simulate { model, n, domain, seed, out } => {
            let (m, file_seed) = read_model(&model)?;
            let seed = seed.or(file_seed).ok_or_else(|| CliError::Usage("--seed is required".into()))?;
            let (stack, draws) = sample_stack_with_draws(&m, &domain, n, seed).map_err(at(&model))?;
            ensure_dir(&out)?;
            write_stack_dir(&out, &stack).map_err(at(&out))?;
            write_json(&out.join("draws.json"), &SimulateOut { model: m.to_config(Some(seed)), n, seed, draws: &draws })
        }
        Command::Coverage { model, n, trials, domain, alpha, seed, target, replicates, limit_draws, window, out } => {
            usage_check(alpha)?;
            let (m, _) = read_model(&model)?;
            let source = match (replicates, limit_draws) {
                (_, Some(draws)) => QuantileSource::Limit { draws },
                (Some(b), None) => QuantileSource::Bootstrap { replicates: b },
                (None, None) => QuantileSource::Bootstrap { replicates: DEFAULT_BOOTSTRAP_REPLICATES },
            };
            let target = match target {
                TargetArg::Set => CoverageTarget::MeanSet,
                TargetArg::Boundary => CoverageTarget::MeanBoundary,
            };
            let mut cfg = CoverageConfig::new(n, trials, alpha, source, target, seed);
            cfg.window = Some(read_window(&window, &domain)?);
            let report = coverage_experiment(&m, &domain, &cfg).map_err(at(&model))?;
            match out {
                Some(path) => write_json(&path, &report),
                None => {
                    println!("{}", serde_json::to_string_pretty(&report).map_err(|e| data(e.into()))?);
                    Ok(())
                }
            }
        }
        Command::Regress { data: csv, spec, level, domain, alpha, draws, seed, window, out } => {
            usage_check(alpha)?;
            let table = read_table(&csv).map_err(at(&csv))?;
            let text = fs::read_to_string(&spec).map_err(|e| at(&spec)(e.into()))?;
            let rs: RegressionSpec =
                serde_json::from_str(&text).map_err(|e| at(&spec)(Error::parse(&spec, e.to_string())))?;
            let fit = rs.fit(&table).map_err(at(&csv))?;
            let w = read_window(&window, &domain)?;
            let f = predict_field(&fit, &rs.terms, &domain, rs.sign()).map_err(at(&spec))?;
            let q = gaussian_field_quantiles(&fit, &rs.terms, &w, alpha, draws, seed).map_err(at(&spec))?;
            let est = ci_sublevel(&f, fit.n, level, 0.0, &w).map_err(data)?;
            let region = covariate_region(&fit, &rs.terms, rs.sign(), level, q.q1, &w).map_err(data)?;
            ensure_dir(&out)?;
            write_field_csv(&out.join("fitted.csv"), &f).map_err(data)?;
            write_mask_pgm(&out.join("estimate.pgm"), &est).map_err(data)?;
            write_mask_pgm(&out.join("region.pgm"), &region).map_err(data)?;
            let report = RegressOut {
                fit: fit.report(),
                level,
                estimate_cells: est.count(),
                region_cells: region.count(),
                quantiles: q,
            };
            write_json(&out.join("report.json"), &report)
        }
    }
}
