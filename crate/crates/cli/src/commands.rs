//! Subcommand implementations. Each writes its data files plus
//! `metadata.json` into the output directory.

use std::path::{Path, PathBuf};

use serde::Serialize;
use stereoboot_core::asymptotics::{coverage_study, mc_study, CoverageDesign, McDesign};
use stereoboot_core::bootstrap::{ci_curve, CurvePlan};
use stereoboot_core::estimators::fit;
use stereoboot_core::rng::substream;
use stereoboot_core::{Error, EstimatorKind, RadialModel, StepFunction};

use crate::config::{CommandName, OutputFormat, RunConfig};
use crate::error::{CliError, CliResult};
use crate::ingest::{ingest, Dataset, IngestOptions};
use crate::output::{Metadata, Writer};

/// Runs `config` on a pool of `threads` workers, or rayon's default pool
/// when `threads` is `None`. The thread count never changes the outputs.
pub fn run_with_threads(config: &RunConfig, out: &Path, threads: Option<usize>) -> CliResult<Vec<PathBuf>> {
    match threads {
        None => run(config, out),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| CliError::Config(format!("cannot start {t} threads: {e}")))?;
            pool.install(|| run(config, out))
        }
    }
}

pub fn run(config: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let config = config.clone().resolved();
    config.validate()?;
    match config.command {
        CommandName::Estimate => cmd_estimate(&config, out),
        CommandName::Ci => cmd_ci(&config, out),
        CommandName::Simulate => cmd_simulate(&config, out),
        CommandName::Mc => cmd_mc(&config, out),
        CommandName::Coverage => cmd_coverage(&config, out),
    }
}

fn load(config: &RunConfig) -> CliResult<Dataset> {
    let path = config.input.as_deref().ok_or_else(|| CliError::Config("--input is required".into()))?;
    let options =
        IngestOptions { columns: config.columns.clone(), recenter: config.recenter, max_rejected: config.max_rejected };
    ingest(path, &options)
}

fn model(config: &RunConfig) -> CliResult<RadialModel> {
    config.model.ok_or_else(|| CliError::Config("--model is required".into()))
}

fn data_name(kind: &str, prefix: &str, format: OutputFormat) -> String {
    let ext = match format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    format!("{prefix}_{kind}.{ext}")
}

fn write_rows<T: Serialize>(w: &mut Writer<'_>, name: &str, rows: &[T], format: OutputFormat) -> CliResult<()> {
    match format {
        OutputFormat::Csv => w.csv(name, rows),
        OutputFormat::Json => w.json(name, rows),
    }
}

#[derive(Serialize)]
struct StepRow {
    x: f64,
    value: f64,
}

/// Step function as `(x, value)` rows: `value` holds from `x` up to the next
/// row's `x`, and the last value holds to infinity.
fn step_rows(f: &StepFunction) -> Vec<StepRow> {
    let mut rows = Vec::with_capacity(f.knots().len() + 1);
    if f.knots().first() != Some(&f.domain_start()) {
        rows.push(StepRow { x: f.domain_start(), value: f.left_value() });
    }
    rows.extend(f.knots().iter().zip(f.values()).map(|(&x, &value)| StepRow { x, value }));
    rows
}

#[derive(Serialize)]
struct GridRow {
    x: f64,
    value: Option<f64>,
}

fn cmd_estimate(config: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let data = load(config)?;
    let sample = &data.sample;
    let options = config.options();
    let mut meta = Metadata::new(config);
    meta.n = Some(sample.len());
    meta.rejected_lines = data.rejected.iter().map(|r| r.line).collect();
    let mut w = Writer::new(out)?;
    for &kind in &config.kinds {
        let fitted = fit(kind, sample, &options)?;
        let name = data_name(kind.name(), "estimate", config.format);
        match fitted.step() {
            Some(f) => write_rows(&mut w, &name, &step_rows(f), config.format)?,
            None => {
                let points = config.points().unwrap_or_default();
                let mut masked = Vec::new();
                let mut rows = Vec::with_capacity(points.len());
                for x in points {
                    let value = match fitted.eval(x) {
                        Ok(v) => Some(v),
                        Err(Error::SingularEvaluation { .. }) => {
                            masked.push(x);
                            None
                        }
                        Err(e) => return Err(e.into()),
                    };
                    rows.push(GridRow { x, value });
                }
                meta.masked.insert(kind.name().to_string(), masked);
                write_rows(&mut w, &name, &rows, config.format)?;
            }
        }
    }
    w.finish(meta)
}

#[derive(Serialize)]
struct CiRow {
    x: f64,
    estimate: f64,
    lower: f64,
    upper: f64,
}

#[derive(Serialize)]
struct DifferenceRow {
    x: f64,
    iso_f: f64,
    gcm_f: f64,
    difference: f64,
}

fn cmd_ci(config: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let data = load(config)?;
    let grid = config.points().unwrap_or_default();
    let mut meta = Metadata::new(config);
    meta.n = Some(data.sample.len());
    meta.rejected_lines = data.rejected.iter().map(|r| r.line).collect();
    let mut w = Writer::new(out)?;
    let mut estimates: Vec<(EstimatorKind, Vec<f64>)> = Vec::new();
    for &kind in &config.kinds {
        let mut plan = CurvePlan::new(kind, config.replicates, config.alpha, config.seed)?;
        plan.style = config.style;
        plan.options = config.options();
        let band = ci_curve(&data.sample, &plan, &grid)?;
        let rows: Vec<CiRow> = grid
            .iter()
            .zip(&band)
            .map(|(&x, ci)| CiRow { x, estimate: ci.point_estimate, lower: ci.lower, upper: ci.upper })
            .collect();
        meta.perturbations.insert(kind.name().to_string(), band.iter().map(|c| c.perturbations).sum());
        estimates.push((kind, band.iter().map(|c| c.point_estimate).collect()));
        write_rows(&mut w, &data_name(kind.name(), "ci", config.format), &rows, config.format)?;
    }
    let find = |k: EstimatorKind| estimates.iter().find(|(e, _)| *e == k).map(|(_, v)| v);
    if let (Some(iso), Some(gcm)) = (find(EstimatorKind::IsoF), find(EstimatorKind::GcmF)) {
        let rows: Vec<DifferenceRow> = grid
            .iter()
            .zip(iso.iter().zip(gcm))
            .map(|(&x, (&a, &b))| DifferenceRow { x, iso_f: a, gcm_f: b, difference: a - b })
            .collect();
        let name = match config.format {
            OutputFormat::Csv => "difference.csv",
            OutputFormat::Json => "difference.json",
        };
        write_rows(&mut w, name, &rows, config.format)?;
    }
    w.finish(meta)
}

#[derive(Serialize)]
struct DrawRow {
    y: f64,
}

fn cmd_simulate(config: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let model = model(config)?;
    let n = config.n.unwrap_or_default();
    let draws = model.draw_y(n, &mut substream(config.seed, 0));
    let mut meta = Metadata::new(config);
    meta.n = Some(n);
    let mut w = Writer::new(out)?;
    match config.format {
        OutputFormat::Csv => {
            let rows: Vec<DrawRow> = draws.into_iter().map(|y| DrawRow { y }).collect();
            w.csv("sample.csv", &rows)?;
        }
        OutputFormat::Json => {
            #[derive(Serialize)]
            struct Draws {
                y: Vec<f64>,
            }
            w.json("sample.json", &Draws { y: draws })?;
        }
    }
    w.finish(meta)
}

fn cmd_mc(config: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let design = McDesign {
        model: model(config)?,
        n: config.n.unwrap_or_default(),
        x0: config.x0.unwrap_or_default(),
        reps: config.reps.unwrap_or_default(),
        seed: config.seed,
        options: config.options(),
    };
    let reports = mc_study(&design, &config.kinds)?;
    let mut meta = Metadata::new(config);
    meta.n = Some(design.n);
    for r in &reports {
        meta.perturbations.insert(r.kind.name().to_string(), r.perturbations);
    }
    let mut w = Writer::new(out)?;
    w.json("mc.json", &reports)?;
    w.finish(meta)
}

fn cmd_coverage(config: &RunConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let model = model(config)?;
    let reports = config
        .kinds
        .iter()
        .map(|&kind| {
            coverage_study(&CoverageDesign {
                model,
                kind,
                n: config.n.unwrap_or_default(),
                x0: config.x0.unwrap_or_default(),
                replicates: config.replicates,
                alpha: config.alpha,
                reps: config.reps.unwrap_or_default(),
                seed: config.seed,
                style: config.style,
                options: config.options(),
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut meta = Metadata::new(config);
    meta.n = config.n;
    let mut w = Writer::new(out)?;
    w.json("coverage.json", &reports)?;
    w.finish(meta)
}
