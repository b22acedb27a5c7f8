//! `magnitude`: validate spaces, sample and expand magnitude functions,
//! reconstruct spaces and run the experiment suite.
//!
//! Exit status: 0 when every check passes, 1 when a check fails, 2 for usage,
//! input and parse errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use magnitude_core::experiments::{
    all_experiments, default_k32_lengths, identities_experiment, k32_experiment, leinster_pair_experiment,
    roundtrip_experiment, summary_json, tetrahedra_experiment, ExperimentReport,
};
use magnitude_core::formal::{
    extract_series_from_samples, geometric_schedule, path_expansion, ExtractionOptions, ExtractionResult,
};
use magnitude_core::io::{read_space, read_text, space_to_json, to_json};
use magnitude_core::numeric::{magnitude_grid, magnitude_value, BigReal, SampleGrid, Spacing, DOUBLE_BITS};
use magnitude_core::rational::parse_rational;
use magnitude_core::reconstruction::{reconstruct, Mode, ReconstructionInput};
use magnitude_core::small_scale::AsymptoticDerivatives;
use magnitude_core::{GeneralizedSeries, MagnitudeError, Q};

#[derive(Parser)]
#[command(name = "magnitude", version, about = "Magnitude of finite metric spaces: values, series, reconstruction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Tsv,
}

#[derive(Args)]
struct Output {
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file (or directory, for commands with several outputs).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Grid {
    #[arg(long, default_value_t = 0.01)]
    tmin: f64,
    #[arg(long, default_value_t = 10.0)]
    tmax: f64,
    #[arg(long, default_value_t = 100)]
    tcount: usize,
    #[arg(long, value_enum, default_value_t = GridSpacing::Geometric)]
    spacing: GridSpacing,
    /// Mantissa bits; 53 or fewer uses hardware doubles.
    #[arg(long, default_value_t = DOUBLE_BITS)]
    precision_bits: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum GridSpacing {
    Linear,
    Geometric,
}

#[derive(Subcommand)]
enum Command {
    /// Check the metric axioms of a space file.
    Validate {
        path: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Sample M(t) on a grid as `t,M,cond` CSV.
    Magnitude {
        path: PathBuf,
        #[command(flatten)]
        grid: Grid,
        /// Digits after the decimal point.
        #[arg(long, default_value_t = 12)]
        decimals: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Formal series through the given d-index, in the series text format.
    Series {
        path: PathBuf,
        #[arg(long, default_value_t = 3)]
        dindex: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Peel exponents and coefficients off high-precision samples of M(t).
    Extract {
        path: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        tmin: f64,
        #[arg(long, default_value_t = 1500.0)]
        tmax: f64,
        #[arg(long, default_value_t = 1.15)]
        ratio: f64,
        #[arg(long, default_value_t = 4096)]
        precision_bits: usize,
        #[arg(long, default_value_t = 3)]
        terms: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Recover a space from a series file, a sample CSV or derivative limits.
    Reconstruct {
        #[arg(long, conflicts_with_all = ["samples", "derivatives"])]
        series: Option<PathBuf>,
        #[arg(long, conflicts_with = "derivatives")]
        samples: Option<PathBuf>,
        /// `M1,M2,M3` as exact rationals.
        #[arg(long)]
        derivatives: Option<String>,
        /// Exact M'(0+), used by the four-point route.
        #[arg(long)]
        m1: Option<String>,
        /// Expected number of points.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value = "auto")]
        mode: String,
        /// Directory for space.json and certificate.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct seeded random spaces from their own data.
    Roundtrip {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long)]
        mode: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Run a named experiment.
    Experiment {
        #[arg(value_enum)]
        which: Which,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Lengths for the k32 experiment, comma separated rationals.
        #[arg(long)]
        ell: Option<String>,
        /// Run independent experiments on separate threads.
        #[arg(long)]
        parallel: bool,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    LeinsterPair,
    Tetrahedra,
    K32,
    Identities,
    All,
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<MagnitudeError> for Failure {
    fn from(e: MagnitudeError) -> Self {
        match e {
            MagnitudeError::Io(_) | MagnitudeError::Parse { .. } | MagnitudeError::InvalidInput(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Check(other.to_string()),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Check(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn format_or(output: &Output, default: Format, allowed: &[Format]) -> Result<Format, Failure> {
    let f = output.format.unwrap_or(default);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        Err(Failure::Usage("this command does not support that --format".into()))
    }
}

fn run(command: Command) -> Outcome {
    match command {
        Command::Validate { path, output } => {
            let format = format_or(&output, Format::Json, &[Format::Json, Format::Tsv])?;
            let space = read_space(&path)?;
            let report = space.validate();
            let text = match format {
                Format::Tsv => {
                    let mut s = String::from("constraint\ti\tj\tvia\n");
                    for v in &report.violations {
                        let via = v.via.map(|x| x.to_string()).unwrap_or_else(|| "-".into());
                        s += &format!("{}\t{}\t{}\t{via}\n", v.constraint, v.pair.0, v.pair.1);
                    }
                    s
                }
                _ => to_json(&json!({
                    "ok": report.ok,
                    "n": space.n(),
                    "violations": report.violations.iter().map(|v| json!({
                        "constraint": v.constraint.to_string(),
                        "pair": [v.pair.0, v.pair.1],
                        "via": v.via,
                    })).collect::<Vec<_>>(),
                })),
            };
            emit(&output.out, &text)?;
            Ok(report.ok)
        }
        Command::Magnitude { path, grid, decimals, output } => {
            format_or(&output, Format::Csv, &[Format::Csv])?;
            let space = checked_space(&path)?;
            let spacing = match grid.spacing {
                GridSpacing::Linear => Spacing::Linear,
                GridSpacing::Geometric => Spacing::Geometric,
            };
            let samples = magnitude_grid(&space, grid.tmin, grid.tmax, grid.tcount, spacing, grid.precision_bits)?;
            for t in &samples.singular {
                eprintln!("warning: similarity matrix numerically singular at t = {t}");
            }
            emit(&output.out, &samples.to_csv(decimals))?;
            Ok(true)
        }
        Command::Series { path, dindex, output } => {
            format_or(&output, Format::Tsv, &[Format::Tsv])?;
            let space = checked_space(&path)?;
            emit(&output.out, &path_expansion(&space, dindex)?.series.to_string())?;
            Ok(true)
        }
        Command::Extract { path, tmin, tmax, ratio, precision_bits, terms, output } => {
            format_or(&output, Format::Tsv, &[Format::Tsv])?;
            let space = checked_space(&path)?;
            let schedule: Vec<BigReal> = geometric_schedule(tmin, tmax, ratio)?
                .into_iter()
                .map(|t| BigReal::from_f64(t, precision_bits))
                .collect();
            let opts = ExtractionOptions { max_terms: terms, ..Default::default() };
            let r = extract_series_from_samples(|t: &BigReal| magnitude_value(&space, t).map(|v| v.0), &schedule, &opts)?;
            emit(&output.out, &r.to_tsv())?;
            Ok(true)
        }
        Command::Reconstruct { series, samples, derivatives, m1, n, mode, out } => {
            let mode: Mode = mode.parse()?;
            let input = if let Some(p) = series {
                let series: GeneralizedSeries = read_text(&p)?.parse()?;
                let m1 = m1.as_deref().map(rational).transpose()?;
                ReconstructionInput::Series { series, m1 }
            } else if let Some(p) = derivatives.as_deref() {
                let v = p.split(',').map(rational).collect::<Result<Vec<_>, _>>()?;
                let [m1, m2, m3] = <[Q; 3]>::try_from(v)
                    .map_err(|_| Failure::Usage("--derivatives needs three values M1,M2,M3".into()))?;
                ReconstructionInput::Derivatives(AsymptoticDerivatives { m1, m2, m3 })
            } else if let Some(p) = samples {
                return from_samples(&p);
            } else {
                return Err(Failure::Usage("give --series, --samples or --derivatives".into()));
            };
            let r = reconstruct(&input, mode)?;
            if let Some(n) = n {
                if r.space.n() != n {
                    return Err(Failure::Check(format!("reconstructed {} points, expected {n}", r.space.n())));
                }
            }
            let (space_json, cert_json) = (space_to_json(&r.space), to_json(&r.certificate));
            match out {
                Some(dir) => {
                    write_in(&dir, "space.json", &space_json)?;
                    write_in(&dir, "certificate.json", &cert_json)?;
                }
                None => print!("{space_json}{cert_json}"),
            }
            Ok(r.certificate.all_passed())
        }
        Command::Roundtrip { n, count, mode, seed, output } => {
            let mode: Mode = mode.parse()?;
            let r = roundtrip_experiment(n, count, mode, seed)?;
            report(&[r], &output)
        }
        Command::Experiment { which, seed, ell, parallel, output } => {
            let ells = match ell {
                Some(list) => list.split(',').map(rational).collect::<Result<Vec<_>, _>>()?,
                None => default_k32_lengths(),
            };
            let reports = match which {
                Which::LeinsterPair => vec![leinster_pair_experiment()?],
                Which::Tetrahedra => vec![tetrahedra_experiment()?],
                Which::K32 => vec![k32_experiment(&ells)?],
                Which::Identities => vec![identities_experiment(seed)?],
                Which::All if parallel => run_parallel(seed, &ells)?,
                Which::All => {
                    let mut all = all_experiments(seed)?;
                    all[2] = k32_experiment(&ells)?;
                    all
                }
            };
            report(&reports, &output)
        }
    }
}

/// Each experiment on its own thread; results merged in the fixed order.
fn run_parallel(seed: u64, ells: &[Q]) -> Result<Vec<ExperimentReport>, Failure> {
    type Job<'a> = Box<dyn Fn() -> magnitude_core::Result<ExperimentReport> + Send + Sync + 'a>;
    let jobs: Vec<Job> = vec![
        Box::new(leinster_pair_experiment),
        Box::new(tetrahedra_experiment),
        Box::new(|| k32_experiment(ells)),
        Box::new(move || identities_experiment(seed)),
    ];
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs.iter().map(|j| s.spawn(j)).collect();
        handles.into_iter().map(|h| h.join().expect("experiment thread panicked")).collect()
    });
    Ok(results.into_iter().collect::<magnitude_core::Result<Vec<_>>>()?)
}

fn report(reports: &[ExperimentReport], output: &Output) -> Outcome {
    let format = format_or(output, Format::Json, &[Format::Json, Format::Tsv])?;
    let passed = reports.iter().all(ExperimentReport::passed);
    let text = match format {
        Format::Tsv => reports.iter().map(|r| format!("# {}: {}\n{}", r.name, status(r), r.to_tsv())).collect(),
        _ if reports.len() == 1 => reports[0].to_json(),
        _ => summary_json(reports),
    };
    match &output.out {
        Some(dir) if reports.iter().any(|r| !r.artifacts.is_empty()) || dir.is_dir() => {
            let ext = if format == Format::Tsv { "tsv" } else { "json" };
            write_in(dir, &format!("report.{ext}"), &text)?;
            for r in reports {
                for (name, body) in &r.artifacts {
                    write_in(dir, name, body)?;
                }
            }
        }
        other => emit(other, &text)?,
    }
    for r in reports {
        eprintln!("{}: {} ({:.2} s)", r.name, status(r), r.runtime.as_secs_f64());
    }
    Ok(passed)
}

fn status(r: &ExperimentReport) -> &'static str {
    if r.passed() {
        "pass"
    } else {
        "fail"
    }
}

fn write_in(dir: &Path, name: &str, text: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Usage(format!("{}: {e}", dir.display())))?;
    emit(&Some(dir.join(name)), text)
}

fn rational(s: &str) -> Result<Q, Failure> {
    parse_rational(s).map_err(|m| Failure::Usage(format!("{s:?}: {m}")))
}

fn checked_space(path: &Path) -> Result<magnitude_core::FiniteMetricSpace, Failure> {
    let space = read_space(path)?;
    let report = space.validate();
    if !report.ok {
        let v = &report.violations[0];
        return Err(Failure::Check(format!(
            "{}: not a metric ({} violated at {:?})",
            path.display(),
            v.constraint,
            v.pair
        )));
    }
    Ok(space)
}

/// Sampled values only give exponents to floating-point accuracy, so they
/// are fitted and reported but never rounded into a space.
fn from_samples(path: &Path) -> Outcome {
    let grid = SampleGrid::from_csv(&read_text(path)?)?;
    let ts: Vec<f64> = grid.samples.iter().map(|s| s.t).collect();
    let lookup = |t: &f64| {
        grid.samples
            .iter()
            .find(|s| s.t == *t)
            .map(|s| s.value)
            .ok_or(MagnitudeError::InvalidInput(format!("no sample at t = {t}")))
    };
    // the longest prefix of terms that still converges
    let mut fit = None;
    for terms in 1..=ExtractionOptions::default().max_terms {
        let opts = ExtractionOptions { max_terms: terms, ..Default::default() };
        match extract_series_from_samples(lookup, &ts, &opts) {
            Ok(r) if fit.as_ref().is_some_and(|f: &ExtractionResult| f.pairs.len() == r.pairs.len()) => break,
            Ok(r) => fit = Some(r),
            Err(e) if fit.is_none() => return Err(e.into()),
            Err(e) => {
                eprintln!("note: stopped after {} terms: {e}", terms - 1);
                break;
            }
        }
    }
    print!("{}", fit.expect("at least one fit").to_tsv());
    Err(Failure::Check(
        "exponents fitted from samples are approximate; exact reconstruction needs a series file or derivative limits"
            .into(),
    ))
}
