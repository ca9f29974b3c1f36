//! Desk-scale experiments on the Poisson process, driven from the command
//! line. [`run`] is the whole program; `main` only wires it to the process
//! streams and exit code.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use poisson_lab::dist::{poisson_limit_sweep, poisson_pmf_table, PoissonParams, NORMALIZATION_TOL};
use poisson_lab::gas::{
    conditional_binomial_experiment, conditioning_equivalence_experiment,
    multinomial_partition_experiment, thermodynamic_limit_sweep, Container, GasConfig, Population,
    Region,
};
use poisson_lab::process::{
    axiom_independence_check, axiom_rarity_check, conditional_uniformity_check, replicate_counts,
    GenerationMethod, Interval, ProcessConfig,
};
use poisson_lab::simplex::{
    orthant_volume_exact, orthant_volume_mc, orthant_volume_recursive_table, OrthantSpec,
};
use poisson_lab::stats::{chi_square_gof, empirical_moments, regularized_gamma_q, CountHistogram};
use thiserror::Error;

pub mod output;

use output::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] poisson_lab::Error),
    #[error("invalid `{name}`: {reason}")]
    Precondition { name: &'static str, reason: String },
    #[error("cannot write {}: {source}", path.display())]
    Create { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn precondition(name: &'static str, reason: impl Into<String>) -> CliError {
    CliError::Precondition {
        name,
        reason: reason.into(),
    }
}

#[derive(Debug, Parser)]
#[command(name = "poisson-lab", version, about = "Poisson process experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Replicate the process and write the count histogram as CSV.
    Simulate(SimulateArgs),
    /// Run a law or axiom check and write a JSON verdict.
    Verify {
        #[command(subcommand)]
        check: VerifyCommand,
    },
    /// Ordered-region volume: exact, recursive quadrature and Monte Carlo.
    Simplex(SimplexArgs),
    /// Exact TV distance between Binomial(n, mu/n) and Poisson(mu).
    Limit(LimitArgs),
    /// Ideal-gas experiments.
    Gas {
        #[command(subcommand)]
        experiment: GasCommand,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Interarrival,
    ConditionalUniform,
}

impl Method {
    fn model(self) -> GenerationMethod {
        match self {
            Method::Interarrival => GenerationMethod::Interarrival,
            Method::ConditionalUniform => GenerationMethod::ConditionalUniform,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Method::Interarrival => "interarrival",
            Method::ConditionalUniform => "conditional-uniform",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct ProcessArgs {
    #[arg(long)]
    rate: f64,
    #[arg(long)]
    horizon: f64,
    #[arg(long)]
    replicas: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Method::Interarrival)]
    method: Method,
}

impl ProcessArgs {
    fn config(&self) -> Result<ProcessConfig, CliError> {
        at_least("replicas", self.replicas, 1)?;
        Ok(ProcessConfig::new(
            self.rate,
            self.horizon,
            self.seed,
            self.method.model(),
        )?)
    }

    fn parameters(&self) -> ProcessParameters {
        ProcessParameters {
            rate: self.rate,
            horizon: self.horizon,
            replicas: self.replicas,
            seed: self.seed,
            method: self.method.name().to_string(),
        }
    }
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    process: ProcessArgs,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    #[command(flatten)]
    process: ProcessArgs,
    /// Significance level of the verdict.
    #[arg(long, default_value_t = 0.001)]
    alpha: f64,
    /// JSON destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum VerifyCommand {
    /// Chi-square of the total count against Poisson(rate * horizon).
    Poisson(VerifyArgs),
    /// Event times of replicas with a fixed total, tested for uniformity.
    Uniformity {
        #[command(flatten)]
        common: VerifyArgs,
        /// Total count to condition on; defaults to round(rate * horizon).
        #[arg(long)]
        total_count: Option<u64>,
        #[arg(long, default_value_t = 20)]
        bins: usize,
    },
    /// Ratio of multi-event to single-event bins against its exact value.
    Rarity {
        #[command(flatten)]
        common: VerifyArgs,
        /// Strictly decreasing bin widths.
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.05,0.005")]
        widths: Vec<f64>,
    },
    /// Correlation of counts in two disjoint intervals.
    Independence {
        #[command(flatten)]
        common: VerifyArgs,
        /// First interval as START,END; defaults to the first half.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        first: Option<Vec<f64>>,
        /// Second interval as START,END; defaults to the second half.
        #[arg(long, value_delimiter = ',', num_args = 2)]
        second: Option<Vec<f64>>,
    },
}

#[derive(Debug, Args)]
struct SimplexArgs {
    /// Largest dimension; rows run from 1 to this.
    #[arg(long)]
    dim: u64,
    #[arg(long)]
    extent: f64,
    #[arg(long)]
    mc_samples: u64,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    quad_steps: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LimitArgs {
    #[arg(long)]
    mu: f64,
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FixedGasArgs {
    #[arg(long)]
    particles: u64,
    /// Container volume V (a cube).
    #[arg(long)]
    volume: f64,
    #[arg(long)]
    replicas: u64,
    #[arg(long)]
    seed: u64,
    /// JSON report destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional CSV histogram destination.
    #[arg(long)]
    histogram: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum GasCommand {
    /// Counts in one sub-volume at fixed N against Binomial(N, v/V).
    Binomial {
        #[command(flatten)]
        common: FixedGasArgs,
        #[arg(long)]
        sub_volume: f64,
    },
    /// Joint counts in disjoint sub-volumes against the multinomial law.
    Multinomial {
        #[command(flatten)]
        common: FixedGasArgs,
        #[arg(long, value_delimiter = ',', required = true)]
        sub_volumes: Vec<f64>,
    },
    /// Fixed density given the total against fixed N at that total.
    Conditioning {
        #[arg(long)]
        density: f64,
        #[arg(long)]
        volume: f64,
        #[arg(long)]
        sub_volume: f64,
        /// Total particle number to condition on; defaults to round(density * volume).
        #[arg(long)]
        total: Option<u64>,
        #[arg(long)]
        density_replicas: u64,
        #[arg(long)]
        fixed_replicas: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact TV to Poisson(density * v) along N / V = density.
    Thermo {
        #[arg(long)]
        density: f64,
        #[arg(long)]
        sub_volume: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        particles: Vec<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` (program name first), runs the experiment and returns the
/// exit code. Results go to the `--out` files or `stdout`; the summary and
/// any error go to `stderr`.
///
/// ```
/// let mut out = Vec::new();
/// let code = poisson_lab_cli::run(
///     ["poisson-lab", "limit", "--mu", "1", "--n", "10,100"],
///     &mut out,
///     &mut std::io::sink(),
/// );
/// assert_eq!(code, poisson_lab_cli::EXIT_OK);
/// let points: Vec<poisson_lab_cli::output::LimitPoint> = serde_json::from_slice(&out).unwrap();
/// assert!(points[1].tv < points[0].tv);
/// ```
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let sink: &mut dyn Write = if code == 0 { stdout } else { stderr };
            let _ = write!(sink, "{}", e.render());
            return if code == 0 { EXIT_OK } else { EXIT_USAGE };
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}

/// `Ok(false)` means a check ran and failed.
fn dispatch(
    command: Command,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<bool, CliError> {
    match command {
        Command::Simulate(a) => simulate(a, stdout, stderr).map(|_| true),
        Command::Verify { check } => verify(check, stdout, stderr),
        Command::Simplex(a) => simplex(a, stdout, stderr).map(|_| true),
        Command::Limit(a) => limit(a, stdout, stderr).map(|_| true),
        Command::Gas { experiment } => gas(experiment, stdout, stderr).map(|_| true),
    }
}

fn at_least(name: &'static str, value: u64, min: u64) -> Result<(), CliError> {
    if value < min {
        return Err(precondition(name, format!("must be >= {min}, got {value}")));
    }
    Ok(())
}

/// Writes to `path`, or to `stdout` when no path is given.
fn emit(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    write: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|source| CliError::Create {
                path: p.to_path_buf(),
                source,
            })?;
            let mut w = BufWriter::new(file);
            write(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => write(stdout),
    }
}

fn simulate(
    a: SimulateArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    let config = a.process.config()?;
    let hist = replicate_counts(&config, a.process.replicas);
    emit(a.out.as_deref(), stdout, |w| {
        write_csv(w, &histogram_rows(&hist))
    })?;
    write!(
        stderr,
        "simulate: {} replicas, mu = {}",
        hist.total(),
        config.mu()
    )?;
    if let Ok((mean, var)) = empirical_moments(&hist) {
        write!(stderr, ", mean {mean:.6}, variance {var:.6}")?;
    }
    writeln!(stderr)?;
    Ok(())
}

/// Two-sided normal p-value `P(|Z| >= |z|) = Q(1/2, z^2 / 2)`.
fn normal_p_value(z: f64) -> Result<f64, CliError> {
    Ok(regularized_gamma_q(0.5, z * z / 2.0)?)
}

fn interval_arg(v: Option<Vec<f64>>, default: (f64, f64)) -> Result<Interval, CliError> {
    let (a, b) = match v.as_deref() {
        Some([a, b]) => (*a, *b),
        Some(_) => return Err(precondition("interval", "expects START,END")),
        None => default,
    };
    Ok(Interval::new(a, b)?)
}

fn verify(
    check: VerifyCommand,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<bool, CliError> {
    let common = match &check {
        VerifyCommand::Poisson(c) => c,
        VerifyCommand::Uniformity { common, .. }
        | VerifyCommand::Rarity { common, .. }
        | VerifyCommand::Independence { common, .. } => common,
    };
    let alpha = common.alpha;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(precondition(
            "alpha",
            format!("must lie in (0, 1), got {alpha}"),
        ));
    }
    let config = common.process.config()?;
    let replicas = common.process.replicas;
    let parameters = common.process.parameters();
    let out = common.out.clone();

    let (passed, outcome, summary) = match check {
        VerifyCommand::Poisson(_) => {
            let hist = replicate_counts(&config, replicas);
            let table = poisson_pmf_table(&PoissonParams::new(config.mu())?, NORMALIZATION_TOL)?;
            let gof = chi_square_gof(&hist, &table)?;
            let (mean, variance) = empirical_moments(&hist)?;
            let summary = format!(
                "poisson: chi2 {:.4} on {} dof, p = {:.4e}",
                gof.statistic, gof.dof, gof.p_value
            );
            let outcome = PoissonOutcome {
                mu: config.mu(),
                mean,
                variance,
                gof,
            };
            (!gof.rejects(alpha), CheckOutcome::Poisson(outcome), summary)
        }
        VerifyCommand::Uniformity {
            total_count, bins, ..
        } => {
            let total_count = total_count.unwrap_or_else(|| config.mu().round().max(1.0) as u64);
            at_least("bins", bins as u64, 2)?;
            let report = conditional_uniformity_check(&config, total_count, replicas, bins)?;
            let summary = format!(
                "uniformity: {} replicas with {total_count} events, chi2 {:.4} on {} dof, p = {:.4e}",
                report.matched_replicas, report.gof.statistic, report.gof.dof, report.gof.p_value
            );
            let outcome = UniformityOutcome {
                total_count,
                bins,
                matched_replicas: report.matched_replicas,
                pooled_times: report.pooled_times,
                gof: report.gof,
            };
            (
                !report.gof.rejects(alpha),
                CheckOutcome::Uniformity(outcome),
                summary,
            )
        }
        VerifyCommand::Rarity { widths, .. } => {
            let points = axiom_rarity_check(&config, &widths, replicas)?;
            let rows = points
                .into_iter()
                .map(|point| {
                    let z = point
                        .ratio
                        .map(|r| (r - point.reference_ratio) / point.std_error);
                    let p_value = z.map(normal_p_value).transpose()?;
                    Ok(RarityRow { point, z, p_value })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            let monotone = rows
                .windows(2)
                .all(|w| match (w[0].point.ratio, w[1].point.ratio) {
                    (Some(a), Some(b)) => b < a,
                    _ => false,
                });
            let within = rows.iter().all(|r| r.p_value.is_some_and(|p| p >= alpha));
            let summary = rows
                .iter()
                .map(|r| match r.point.ratio {
                    Some(ratio) => format!(
                        "width {}: ratio {ratio:.4e} vs {:.4e}",
                        r.point.width, r.point.reference_ratio
                    ),
                    None => format!("width {}: no single-event bins", r.point.width),
                })
                .collect::<Vec<_>>()
                .join("; ");
            (
                monotone && within,
                CheckOutcome::Rarity(RarityOutcome {
                    points: rows,
                    monotone,
                }),
                format!("rarity: {summary}"),
            )
        }
        VerifyCommand::Independence { first, second, .. } => {
            let t = config.horizon();
            let first = interval_arg(first, (0.0, t / 2.0))?;
            let second = interval_arg(second, (t / 2.0, t))?;
            let report = axiom_independence_check(&config, first, second, replicas)?;
            let z = report.correlation.map(|c| c / report.std_error);
            let p_value = z.map(normal_p_value).transpose()?;
            let summary = match report.correlation {
                Some(c) => format!(
                    "independence: correlation {c:.4e}, null sd {:.4e}",
                    report.std_error
                ),
                None => "independence: correlation undefined (constant counts)".to_string(),
            };
            let outcome = IndependenceOutcome {
                first: [first.start, first.end],
                second: [second.start, second.end],
                correlation: report.correlation,
                std_error: report.std_error,
                z,
                p_value,
            };
            (
                p_value.is_some_and(|p| p >= alpha),
                CheckOutcome::Independence(outcome),
                summary,
            )
        }
    };

    let report = VerifyReport {
        schema_version: SCHEMA_VERSION,
        alpha,
        passed,
        parameters,
        outcome,
    };
    emit(out.as_deref(), stdout, |w| write_json(w, &report))?;
    let verdict = if passed { "PASS" } else { "FAIL" };
    writeln!(stderr, "{summary} -> {verdict} at alpha = {alpha}")?;
    Ok(passed)
}

fn simplex(a: SimplexArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let top = OrthantSpec::new(a.dim, a.extent)?;
    let recursive = orthant_volume_recursive_table(&top, a.quad_steps)?;
    let rows = (1..=a.dim)
        .map(|x| {
            let spec = OrthantSpec::new(x, a.extent)?;
            let mc = orthant_volume_mc(&spec, a.mc_samples, a.seed)?;
            Ok(SimplexRow {
                dimension: x,
                exact: orthant_volume_exact(&spec),
                recursive: recursive[x as usize - 1],
                mc: mc.value,
                mc_std_error: mc.std_error,
                mc_hits: mc.hits,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    emit(a.out.as_deref(), stdout, |w| match a.format {
        Format::Csv => write_csv(w, &rows),
        Format::Json => write_json(
            w,
            &SimplexReport {
                schema_version: SCHEMA_VERSION,
                extent: a.extent,
                quad_steps: a.quad_steps,
                mc_samples: a.mc_samples,
                seed: a.seed,
                rows: rows.clone(),
            },
        ),
    })?;
    for r in &rows {
        writeln!(
            stderr,
            "x = {:>3}: exact {:.10e}  recursive {:.10e}  mc {:.6e} +- {:.2e}",
            r.dimension, r.exact, r.recursive, r.mc, r.mc_std_error
        )?;
    }
    Ok(())
}

fn limit(a: LimitArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let points: Vec<LimitPoint> = poisson_limit_sweep(a.mu, &a.n)?
        .into_iter()
        .map(|(n, tv)| LimitPoint { n, tv })
        .collect();
    emit(a.out.as_deref(), stdout, |w| write_json(w, &points))?;
    for p in &points {
        writeln!(stderr, "n = {}: TV = {:.6e}", p.n, p.tv)?;
    }
    Ok(())
}

/// Cube of volume `volume` with consecutive slabs along x of the given
/// volumes, starting at the origin.
fn slabs(volume: f64, sub_volumes: &[f64]) -> Result<(Container, Vec<Region>), CliError> {
    let container = Container::cube(volume)?;
    let [_, ly, lz] = container.extents();
    let mut start = 0.0;
    let mut regions = Vec::with_capacity(sub_volumes.len());
    for &v in sub_volumes {
        if !(v.is_finite() && v > 0.0) {
            return Err(precondition(
                "sub_volume",
                format!("must be finite and > 0, got {v}"),
            ));
        }
        let thickness = v / (ly * lz);
        regions.push(Region::slab_x(&container, start, thickness)?);
        start += thickness;
    }
    let total: f64 = sub_volumes.iter().sum();
    if total > volume {
        return Err(precondition(
            "sub_volume",
            format!("sub-volumes add up to {total}, more than V = {volume}"),
        ));
    }
    Ok((container, regions))
}

fn marginal(
    law_p: f64,
    hist: &CountHistogram,
    gof: poisson_lab::stats::GofResult,
) -> Result<MarginalOutcome, CliError> {
    let (mean, variance) = empirical_moments(hist)?;
    Ok(MarginalOutcome {
        p: law_p,
        mean,
        variance,
        gof,
    })
}

fn write_joint_csv(
    path: &Path,
    k: usize,
    joint: &poisson_lab::gas::JointHistogram,
) -> Result<(), CliError> {
    let file = File::create(path).map_err(|source| CliError::Create {
        path: path.to_path_buf(),
        source,
    })?;
    let mut w = csv::Writer::from_writer(BufWriter::new(file));
    let mut header: Vec<String> = (1..=k).map(|i| format!("region_{i}")).collect();
    header.push("frequency".into());
    w.write_record(&header)?;
    for (counts, freq) in joint {
        let mut record: Vec<String> = counts.iter().map(u64::to_string).collect();
        record.push(freq.to_string());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

fn write_histogram_csv(path: &Path, hist: &CountHistogram) -> Result<(), CliError> {
    emit(Some(path), &mut io::sink(), |w| {
        write_csv(w, &histogram_rows(hist))
    })
}

fn gas(
    experiment: GasCommand,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), CliError> {
    match experiment {
        GasCommand::Binomial { common, sub_volume } => {
            at_least("replicas", common.replicas, 1)?;
            let (container, regions) = slabs(common.volume, &[sub_volume])?;
            let config = GasConfig::new(
                Population::FixedCount(common.particles),
                container,
                regions,
                common.seed,
            )?;
            let e = conditional_binomial_experiment(&config, common.replicas)?;
            if let Some(path) = &common.histogram {
                write_histogram_csv(path, &e.histogram)?;
            }
            let report = GasBinomialReport {
                schema_version: SCHEMA_VERSION,
                parameters: GasParameters {
                    particles: common.particles,
                    volume: common.volume,
                    sub_volumes: vec![sub_volume],
                    replicas: common.replicas,
                    seed: common.seed,
                },
                outcome: marginal(e.law.p(), &e.histogram, e.gof)?,
            };
            emit(common.out.as_deref(), stdout, |w| write_json(w, &report))?;
            writeln!(
                stderr,
                "gas binomial: Binomial({}, {}) chi2 {:.4} on {} dof, p = {:.4e}",
                e.law.n(),
                e.law.p(),
                e.gof.statistic,
                e.gof.dof,
                e.gof.p_value
            )?;
        }
        GasCommand::Multinomial {
            common,
            sub_volumes,
        } => {
            at_least("replicas", common.replicas, 1)?;
            let (container, regions) = slabs(common.volume, &sub_volumes)?;
            let config = GasConfig::new(
                Population::FixedCount(common.particles),
                container,
                regions,
                common.seed,
            )?;
            let e = multinomial_partition_experiment(&config, common.replicas)?;
            if let Some(path) = &common.histogram {
                write_joint_csv(path, sub_volumes.len(), &e.joint)?;
            }
            let marginals = e
                .marginals
                .iter()
                .map(|m| marginal(m.law.p(), &m.histogram, m.gof))
                .collect::<Result<Vec<_>, CliError>>()?;
            let report = GasMultinomialReport {
                schema_version: SCHEMA_VERSION,
                parameters: GasParameters {
                    particles: common.particles,
                    volume: common.volume,
                    sub_volumes,
                    replicas: common.replicas,
                    seed: common.seed,
                },
                probabilities: e.law.probs().to_vec(),
                gof: e.gof,
                marginals,
            };
            emit(common.out.as_deref(), stdout, |w| write_json(w, &report))?;
            writeln!(
                stderr,
                "gas multinomial: joint chi2 {:.4} on {} dof, p = {:.4e}",
                e.gof.statistic, e.gof.dof, e.gof.p_value
            )?;
        }
        GasCommand::Conditioning {
            density,
            volume,
            sub_volume,
            total,
            density_replicas,
            fixed_replicas,
            seed,
            out,
        } => {
            at_least("density_replicas", density_replicas, 1)?;
            at_least("fixed_replicas", fixed_replicas, 1)?;
            let (container, regions) = slabs(volume, &[sub_volume])?;
            let config =
                GasConfig::new(Population::FixedDensity(density), container, regions, seed)?;
            let total = total.unwrap_or_else(|| (density * volume).round() as u64);
            let r = conditioning_equivalence_experiment(
                &config,
                total,
                density_replicas,
                fixed_replicas,
            )?;
            let report = ConditioningReportOut {
                schema_version: SCHEMA_VERSION,
                density,
                volume,
                sub_volume,
                total,
                density_replicas,
                fixed_replicas,
                seed,
                matched_replicas: r.matched_replicas,
                test: r.test,
            };
            emit(out.as_deref(), stdout, |w| write_json(w, &report))?;
            writeln!(
                stderr,
                "gas conditioning: {} matched replicas at N = {total}, chi2 {:.4} on {} dof, p = {:.4e}",
                r.matched_replicas, r.test.statistic, r.test.dof, r.test.p_value
            )?;
        }
        GasCommand::Thermo {
            density,
            sub_volume,
            particles,
            out,
        } => {
            if !(density.is_finite() && density > 0.0) {
                return Err(precondition(
                    "density",
                    format!("must be finite and > 0, got {density}"),
                ));
            }
            let pairs: Vec<(u64, f64)> =
                particles.iter().map(|&n| (n, n as f64 / density)).collect();
            let points = thermodynamic_limit_sweep(density, sub_volume, &pairs)?;
            let report = ThermoReport {
                schema_version: SCHEMA_VERSION,
                density,
                sub_volume,
                points,
            };
            emit(out.as_deref(), stdout, |w| write_json(w, &report))?;
            for p in &report.points {
                writeln!(
                    stderr,
                    "N = {}, V = {}: TV = {:.6e}",
                    p.particles, p.volume, p.tv
                )?;
            }
        }
    }
    Ok(())
}
