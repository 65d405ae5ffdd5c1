use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::propagation::{ModelTag, TimeSeries};

use super::config::ScenarioConfig;
use super::run::ScenarioOutput;

/// Columns read back from a curve CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct CsvTable {
    pub models: Vec<ModelTag>,
    pub times: Vec<f64>,
    /// One column per model, aligned with `times`.
    pub columns: Vec<Vec<f64>>,
}

fn check_same_grid(series: &[TimeSeries]) -> Result<()> {
    let first = series
        .first()
        .ok_or_else(|| Error::GridMismatch("no series to write".into()))?;
    for s in &series[1..] {
        if s.len() != first.len() || s.times().zip(first.times()).any(|(a, b)| a != b) {
            return Err(Error::GridMismatch(format!(
                "{} and {} are sampled on different grids",
                first.model_tag, s.model_tag
            )));
        }
    }
    Ok(())
}

/// Writes `t,<tag>,...` with one row per grid point. Values use the shortest
/// scientific representation that parses back to the same `f64`.
pub fn write_csv_to<W: io::Write>(writer: W, series: &[TimeSeries]) -> Result<()> {
    check_same_grid(series)?;
    let mut w = csv::Writer::from_writer(writer);
    let header: Vec<&str> = std::iter::once("t")
        .chain(series.iter().map(|s| s.model_tag.as_str()))
        .collect();
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for i in 0..series[0].len() {
        row.clear();
        row.push(format!("{:e}", series[0].samples()[i].0));
        row.extend(series.iter().map(|s| format!("{:e}", s.samples()[i].1)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv(path: &Path, series: &[TimeSeries]) -> Result<()> {
    write_csv_to(BufWriter::new(File::create(path)?), series)
}

pub fn read_csv(path: &Path) -> Result<CsvTable> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    if headers.get(0) != Some("t") {
        return Err(Error::config("csv", "first column must be `t`"));
    }
    let models = headers
        .iter()
        .skip(1)
        .map(str::parse)
        .collect::<Result<Vec<ModelTag>>>()?;
    let mut times = Vec::new();
    let mut columns = vec![Vec::new(); models.len()];
    for record in r.records() {
        let record = record?;
        let mut values = record.iter().map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::config("csv", format!("not a number: `{v}`")))
        });
        times.push(values.next().transpose()?.unwrap_or(f64::NAN));
        for col in columns.iter_mut() {
            col.push(values.next().transpose()?.unwrap_or(f64::NAN));
        }
    }
    Ok(CsvTable {
        models,
        times,
        columns,
    })
}

/// `<dir>/<stem>.report.txt` next to the CSV.
pub fn report_path(csv_path: &Path) -> PathBuf {
    let stem = csv_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "pe".into());
    csv_path.with_file_name(format!("{stem}.report.txt"))
}

fn report_text(cfg: &ScenarioConfig, out: &ScenarioOutput) -> String {
    let p = &cfg.params;
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k}={v}");
    };
    kv("nu", format!("{:e}", p.nu()));
    kv("omega", format!("{:e}", p.omega()));
    kv("eta", format!("{:e}", p.eta()));
    kv("delta", format!("{:e}", p.delta()));
    if let (Some(a), Some(l)) = (p.omega_a(), p.omega_l()) {
        kv("omega_a", format!("{a:e}"));
        kv("omega_l", format!("{l:e}"));
    }
    kv("n_max", cfg.dim.n_max().to_string());
    kv("guard", cfg.dim.guard().to_string());
    kv("init", cfg.initial_state.to_string());
    kv("tmax", format!("{:e}", cfg.t_max));
    kv("samples", cfg.n_samples.to_string());
    let models: Vec<&str> = cfg.models.iter().map(ModelTag::as_str).collect();
    kv("models", models.join(","));
    if let Some(c) = &out.convergence {
        kv("convergence.n_max", c.n_max.to_string());
        kv("convergence.n_max_doubled", c.n_max_doubled.to_string());
        kv("convergence.sup_diff", format!("{:e}", c.sup_diff));
        kv("convergence.passed", c.passed.to_string());
    }
    for c in &out.comparisons {
        let prefix = format!("compare.{}.{}", c.model_a, c.model_b);
        kv(&format!("{prefix}.sup_norm"), format!("{:e}", c.sup_norm));
        kv(&format!("{prefix}.rms"), format!("{:e}", c.rms));
        kv(&format!("{prefix}.t_at_max_diff"), format!("{:e}", c.t_at_max_diff));
    }
    s
}

pub fn write_report(path: &Path, cfg: &ScenarioConfig, out: &ScenarioOutput) -> Result<()> {
    fs::write(path, report_text(cfg, out))?;
    Ok(())
}

/// Writes the CSV to the configured path and the report beside it; returns
/// both paths.
pub fn write_outputs(cfg: &ScenarioConfig, out: &ScenarioOutput) -> Result<(PathBuf, PathBuf)> {
    let csv_path = cfg.output_path.clone();
    let report = report_path(&csv_path);
    write_csv(&csv_path, &out.series)?;
    write_report(&report, cfg, out)?;
    Ok((csv_path, report))
}
