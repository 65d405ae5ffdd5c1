use log::info;
use rayon::prelude::*;

use crate::analytic::{dispersive_pe, lir_pe, mir_pe_lab};
use crate::error::{Error, Result};
use crate::models::h_ion;
use crate::propagation::{
    convergence_check, evolve_series, evolve_timedep, ConvergenceReport, ModelTag, TimeGrid,
    TimeSeries,
};

use super::config::ScenarioConfig;

/// Difference between two `P_e` curves on the same grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub model_a: ModelTag,
    pub model_b: ModelTag,
    pub sup_norm: f64,
    pub rms: f64,
    pub t_at_max_diff: f64,
}

/// Everything a scenario produces.
#[derive(Clone, Debug)]
pub struct ScenarioOutput {
    pub convergence: Option<ConvergenceReport>,
    pub series: Vec<TimeSeries>,
    pub comparisons: Vec<ComparisonReport>,
}

/// Sup-norm, RMS and location of the largest difference.
pub fn compare(a: &TimeSeries, b: &TimeSeries) -> Result<ComparisonReport> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(format!(
            "{} has {} samples, {} has {}",
            a.model_tag,
            a.len(),
            b.model_tag,
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::GridMismatch("empty series".into()));
    }
    let mut sup = 0.0_f64;
    let mut t_at = a.samples()[0].0;
    let mut sum_sq = 0.0;
    for (&(ta, pa), &(tb, pb)) in a.samples().iter().zip(b.samples()) {
        if ta != tb {
            return Err(Error::GridMismatch(format!(
                "{} samples t = {ta} where {} samples t = {tb}",
                a.model_tag, b.model_tag
            )));
        }
        let d = (pa - pb).abs();
        if d > sup {
            sup = d;
            t_at = ta;
        }
        sum_sq += d * d;
    }
    // roundoff in the mean can push rms a hair above sup for constant offsets
    let rms = (sum_sq / a.len() as f64).sqrt().min(sup);
    Ok(ComparisonReport {
        model_a: a.model_tag,
        model_b: b.model_tag,
        sup_norm: sup,
        rms,
        t_at_max_diff: t_at,
    })
}

/// Runs one model of the scenario on the given grid.
pub fn run_model(cfg: &ScenarioConfig, tag: ModelTag, grid: &TimeGrid) -> Result<TimeSeries> {
    let p = &cfg.params;
    let psi0 = cfg.initial_state.build(cfg.dim)?;
    let series = match tag {
        ModelTag::ExactEq2 => evolve_series(tag, p, &h_ion(p, cfg.dim)?, &psi0, grid),
        ModelTag::FullEq1 => evolve_timedep(p, &psi0, grid, cfg.resolved_step()?),
        ModelTag::LirEq5 => lir_pe(p, &psi0, grid),
        ModelTag::MirEq8 => mir_pe_lab(p, &psi0, grid),
        ModelTag::DispersiveEq10 => dispersive_pe(p, &psi0, grid, cfg.dispersive_form),
    };
    series.map_err(|e| e.with_model(tag.as_str()))
}

/// Truncation audit (when `exact_eq2` is requested), every model, and the
/// comparisons: each model against `exact_eq2` when present, otherwise every
/// pair.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioOutput> {
    let grid = cfg.grid()?;
    let convergence = if cfg.models.contains(&ModelTag::ExactEq2) {
        let report = convergence_check(&cfg.params, cfg.dim, &grid, cfg.initial_state)
            .map_err(|e| e.with_model(ModelTag::ExactEq2.as_str()))?;
        info!(
            "truncation audit: n_max {} vs {}, sup |ΔP_e| = {:.3e}",
            report.n_max, report.n_max_doubled, report.sup_diff
        );
        if !report.passed {
            return Err(Error::Convergence {
                n_max: report.n_max,
                n_max_doubled: report.n_max_doubled,
                sup_diff: report.sup_diff,
            });
        }
        Some(report)
    } else {
        None
    };

    let series = cfg
        .models
        .par_iter()
        .map(|&tag| run_model(cfg, tag, &grid))
        .collect::<Result<Vec<_>>>()?;

    let mut comparisons = Vec::new();
    match series.iter().position(|s| s.model_tag == ModelTag::ExactEq2) {
        Some(exact) => {
            for (i, s) in series.iter().enumerate() {
                if i != exact {
                    comparisons.push(compare(s, &series[exact])?);
                }
            }
        }
        None => {
            for i in 0..series.len() {
                for j in i + 1..series.len() {
                    comparisons.push(compare(&series[i], &series[j])?);
                }
            }
        }
    }
    Ok(ScenarioOutput {
        convergence,
        series,
        comparisons,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockDim;
    use crate::models::ModelParams;

    fn series(tag: ModelTag, samples: Vec<(f64, f64)>) -> TimeSeries {
        let p = ModelParams::new(1.0, 0.2, 0.1).unwrap();
        TimeSeries::new(tag, p, FockDim::new(4, 2).unwrap(), samples).unwrap()
    }

    #[test]
    fn identical_series() {
        let a = series(ModelTag::ExactEq2, vec![(0.0, 1.0), (1.0, 0.3), (2.0, 0.7)]);
        let r = compare(&a, &a).unwrap();
        assert_eq!((r.sup_norm, r.rms), (0.0, 0.0));
    }

    #[test]
    fn constant_offset() {
        let a = series(ModelTag::ExactEq2, vec![(0.0, 0.9), (1.0, 0.3), (2.0, 0.7)]);
        let b = series(ModelTag::LirEq5, vec![(0.0, 0.8), (1.0, 0.2), (2.0, 0.6)]);
        let r = compare(&a, &b).unwrap();
        assert!((r.sup_norm - 0.1).abs() < 1e-15);
        assert!((r.rms - 0.1).abs() < 1e-15);
        assert!(r.rms <= r.sup_norm);
    }

    #[test]
    fn location_of_max() {
        let a = series(ModelTag::ExactEq2, vec![(0.0, 0.5), (1.0, 0.5), (2.0, 0.5)]);
        let b = series(ModelTag::MirEq8, vec![(0.0, 0.5), (1.0, 0.9), (2.0, 0.6)]);
        let r = compare(&a, &b).unwrap();
        assert_eq!(r.t_at_max_diff, 1.0);
    }

    #[test]
    fn grid_mismatch() {
        let a = series(ModelTag::ExactEq2, vec![(0.0, 0.5), (1.0, 0.5)]);
        let b = series(ModelTag::LirEq5, vec![(0.0, 0.5), (1.5, 0.5)]);
        let c = series(ModelTag::LirEq5, vec![(0.0, 0.5)]);
        assert!(matches!(compare(&a, &b), Err(Error::GridMismatch(_))));
        assert!(matches!(compare(&a, &c), Err(Error::GridMismatch(_))));
    }
}
