//! Exact time evolution, the stepped evolver for the time-dependent dipole
//! Hamiltonian, the excited-state population and truncation auditing.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{FockDim, OperatorMatrix, Spin};
use crate::linalg::Spectral;
use crate::models::{h_full_at, h_ion, laser_frequencies, ModelParams};

/// Normalization tolerance for freshly built states.
pub const NORM_TOL: f64 = 1e-12;
/// Normalization tolerance for states produced by evolution or transforms.
pub const EVOLVED_NORM_TOL: f64 = 1e-10;
/// Upper bound on `P_e` accepted in a [`TimeSeries`].
pub const PE_CEILING: f64 = 1.0 + 1e-12;
/// Bound on `step · ‖H‖` for the stepped evolver.
pub const MAX_PHASE_PER_STEP: f64 = 0.1;
/// Sup-norm threshold of the truncation audit.
pub const CONVERGENCE_TOL: f64 = 1e-6;

/// Normalized state on the joint spin ⊗ Fock space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    dim: FockDim,
    amps: DVector<Complex64>,
}

impl StateVector {
    /// `|spin, n⟩`.
    pub fn basis(dim: FockDim, spin: Spin, n: usize) -> Result<Self> {
        if n > dim.n_max() {
            return Err(Error::Precondition(format!(
                "Fock level {n} is outside the truncation n_max = {}",
                dim.n_max()
            )));
        }
        let mut amps = DVector::zeros(dim.joint_dim());
        amps[dim.index(spin, n)] = Complex64::new(1.0, 0.0);
        Ok(StateVector { dim, amps })
    }

    /// Wraps amplitudes that must already be normalized.
    pub fn from_amplitudes(dim: FockDim, amps: DVector<Complex64>) -> Result<Self> {
        Self::checked(dim, amps, NORM_TOL)
    }

    /// Normalizes arbitrary non-zero amplitudes.
    pub fn normalized(dim: FockDim, mut amps: DVector<Complex64>) -> Result<Self> {
        let norm = amps.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Precondition("cannot normalize a zero or non-finite vector".into()));
        }
        amps.unscale_mut(norm);
        Self::checked(dim, amps, NORM_TOL)
    }

    /// Coherent motional state `|α⟩` (real `α`), truncated and renormalized,
    /// with the given spin.
    pub fn coherent(dim: FockDim, spin: Spin, alpha: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::Precondition("coherent amplitude must be finite".into()));
        }
        let mut amps = DVector::zeros(dim.joint_dim());
        let mut c = (-0.5 * alpha * alpha).exp();
        for n in 0..=dim.n_max() {
            if n > 0 {
                c *= alpha / (n as f64).sqrt();
            }
            amps[dim.index(spin, n)] = Complex64::new(c, 0.0);
        }
        Self::normalized(dim, amps)
    }

    fn checked(dim: FockDim, amps: DVector<Complex64>, tol: f64) -> Result<Self> {
        if amps.len() != dim.joint_dim() {
            return Err(Error::Precondition(format!(
                "state has {} amplitudes, expected {}",
                amps.len(),
                dim.joint_dim()
            )));
        }
        let norm = amps.norm();
        if (norm - 1.0).abs() > tol {
            return Err(Error::Numerical(format!(
                "state norm {norm:.15} deviates from 1 by more than {tol:.0e}"
            )));
        }
        Ok(StateVector { dim, amps })
    }

    pub(crate) fn evolved(dim: FockDim, amps: DVector<Complex64>) -> Result<Self> {
        Self::checked(dim, amps, EVOLVED_NORM_TOL)
    }

    pub fn dim(&self) -> FockDim {
        self.dim
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn amplitude(&self, spin: Spin, n: usize) -> Complex64 {
        self.amps[self.dim.index(spin, n)]
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// `U|ψ⟩`; the result must stay normalized.
    pub fn transformed(&self, u: &OperatorMatrix) -> Result<StateVector> {
        if u.dim() != self.dim {
            return Err(Error::Precondition("operator and state dimensions differ".into()));
        }
        Self::evolved(self.dim, u.apply(&self.amps))
    }

    /// `⟨ψ|A|ψ⟩`.
    pub fn expectation(&self, op: &OperatorMatrix) -> Complex64 {
        self.amps.dotc(&op.apply(&self.amps))
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.dotc(&other.amps)
    }
}

/// Probability of the internal excited state: sum of `|c|²` over the `|e⟩`
/// block.
pub fn pe_observable(psi: &StateVector) -> f64 {
    excited_population(psi.dim, &psi.amps)
}

pub(crate) fn excited_population(dim: FockDim, amps: &DVector<Complex64>) -> f64 {
    amps.rows(0, dim.boson_dim()).iter().map(|z| z.norm_sqr()).sum()
}

/// Initial condition specified independently of the truncation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialState {
    /// `|e, n⟩`.
    ExcitedFock(usize),
    /// `|g, n⟩`.
    GroundFock(usize),
    /// `|e⟩ ⊗ |α⟩` with real `α`.
    ExcitedCoherent(f64),
}

impl Default for InitialState {
    fn default() -> Self {
        InitialState::ExcitedFock(0)
    }
}

impl InitialState {
    pub fn build(&self, dim: FockDim) -> Result<StateVector> {
        match *self {
            InitialState::ExcitedFock(n) => StateVector::basis(dim, Spin::Excited, n),
            InitialState::GroundFock(n) => StateVector::basis(dim, Spin::Ground, n),
            InitialState::ExcitedCoherent(alpha) => StateVector::coherent(dim, Spin::Excited, alpha),
        }
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialState::ExcitedFock(0) => write!(f, "e0"),
            InitialState::GroundFock(0) => write!(f, "g0"),
            InitialState::ExcitedFock(n) => write!(f, "e:{n}"),
            InitialState::GroundFock(n) => write!(f, "g:{n}"),
            InitialState::ExcitedCoherent(a) => write!(f, "ecoh:{a}"),
        }
    }
}

impl FromStr for InitialState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config("init", format!("expected e0, g0, e:n, g:n or ecoh:x, got `{s}`"));
        let level = |v: &str| v.parse::<usize>().map_err(|_| bad());
        match s.trim() {
            "e0" => Ok(InitialState::ExcitedFock(0)),
            "g0" => Ok(InitialState::GroundFock(0)),
            other => match other.split_once(':') {
                Some(("e", n)) => Ok(InitialState::ExcitedFock(level(n)?)),
                Some(("g", n)) => Ok(InitialState::GroundFock(level(n)?)),
                Some(("ecoh", x)) => {
                    let alpha: f64 = x.parse().map_err(|_| bad())?;
                    if !alpha.is_finite() {
                        return Err(bad());
                    }
                    Ok(InitialState::ExcitedCoherent(alpha))
                }
                _ => Err(bad()),
            },
        }
    }
}

/// Which model produced a [`TimeSeries`]. The string forms are the CSV
/// column names.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelTag {
    /// Post-RWA ion-laser Hamiltonian, exact propagation.
    ExactEq2,
    /// Time-dependent dipole Hamiltonian, stepped propagation.
    FullEq1,
    /// Low-intensity Laguerre solution.
    LirEq5,
    /// Jaynes–Cummings solution.
    MirEq8,
    /// Dispersive solution.
    DispersiveEq10,
}

impl ModelTag {
    pub const ALL: [ModelTag; 5] = [
        ModelTag::ExactEq2,
        ModelTag::FullEq1,
        ModelTag::LirEq5,
        ModelTag::MirEq8,
        ModelTag::DispersiveEq10,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelTag::ExactEq2 => "exact_eq2",
            ModelTag::FullEq1 => "full_eq1",
            ModelTag::LirEq5 => "lir_eq5",
            ModelTag::MirEq8 => "mir_eq8",
            ModelTag::DispersiveEq10 => "dispersive_eq10",
        }
    }
}

impl fmt::Display for ModelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        ModelTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::config("models", format!("unknown model tag `{s}`")))
    }
}

/// Strictly increasing, finite sample times.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeGrid(Vec<f64>);

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::Precondition("time grid is empty".into()));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::Precondition("time grid contains non-finite values".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition("time grid must be strictly increasing".into()));
        }
        Ok(TimeGrid(times))
    }

    /// `n` equally spaced samples on `[0, t_max]`, endpoints included.
    pub fn uniform(t_max: f64, n: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::config("tmax", format!("must be finite and > 0, got {t_max}")));
        }
        if n < 2 {
            return Err(Error::config("samples", format!("must be ≥ 2, got {n}")));
        }
        let step = t_max / (n - 1) as f64;
        let mut times: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();
        times[n - 1] = t_max;
        TimeGrid::new(times)
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `P_e(t)` samples from one model run.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub model_tag: ModelTag,
    pub params: ModelParams,
    pub dim: FockDim,
    samples: Vec<(f64, f64)>,
}

impl TimeSeries {
    pub fn new(
        model_tag: ModelTag,
        params: ModelParams,
        dim: FockDim,
        samples: Vec<(f64, f64)>,
    ) -> Result<Self> {
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Numerical(format!("{model_tag}: sample times not strictly increasing")));
        }
        if let Some(&(t, pe)) = samples
            .iter()
            .find(|(_, pe)| !(pe.is_finite() && *pe >= 0.0 && *pe <= PE_CEILING))
        {
            return Err(Error::Numerical(format!("{model_tag}: P_e = {pe} at t = {t} is outside [0, 1]")));
        }
        Ok(TimeSeries {
            model_tag,
            params,
            dim,
            samples,
        })
    }

    pub(crate) fn from_grid(
        model_tag: ModelTag,
        params: ModelParams,
        dim: FockDim,
        times: &TimeGrid,
        pe: Vec<f64>,
    ) -> Result<Self> {
        let samples = times.times().iter().copied().zip(pe).collect();
        TimeSeries::new(model_tag, params, dim, samples)
    }

    pub fn samples(&self) -> &[(f64, f64)] {
        &self.samples
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.0)
    }

    pub fn pe(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.1)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

fn require_hermitian(h: &OperatorMatrix) -> Result<()> {
    if !h.is_hermitian() {
        return Err(Error::Precondition(
            "propagation needs an operator with a verified hermitian flag".into(),
        ));
    }
    Ok(())
}

/// `U(t) = exp(−iHt)` from the spectral decomposition of `H`.
pub fn propagator(h: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
    require_hermitian(h)?;
    Spectral::new(h)?.propagator(t).verified_unitary()
}

/// States `exp(−iHt)|ψ₀⟩` on the grid, from a single factorization.
pub fn evolve_states(
    h: &OperatorMatrix,
    psi0: &StateVector,
    times: &TimeGrid,
) -> Result<Vec<StateVector>> {
    require_hermitian(h)?;
    if h.dim() != psi0.dim() {
        return Err(Error::Precondition("Hamiltonian and state dimensions differ".into()));
    }
    let spectral = Spectral::new(h)?;
    let coeffs = spectral.to_eigenbasis(psi0.amplitudes());
    times
        .times()
        .par_iter()
        .map(|&t| StateVector::evolved(psi0.dim(), spectral.evolve_coefficients(&coeffs, t)))
        .collect()
}

/// `P_e(t)` of `exp(−iHt)|ψ₀⟩` on the grid.
pub fn evolve_series(
    tag: ModelTag,
    params: &ModelParams,
    h: &OperatorMatrix,
    psi0: &StateVector,
    times: &TimeGrid,
) -> Result<TimeSeries> {
    let pe = evolve_states(h, psi0, times)?
        .iter()
        .map(pe_observable)
        .collect();
    TimeSeries::from_grid(tag, *params, psi0.dim(), times, pe)
}

/// Piecewise-constant midpoint stepping for a time-dependent Hamiltonian.
///
/// Starts from `psi0` at `t = 0`. Each grid interval is split into equal
/// substeps no longer than `step`; every substep applies
/// `exp(−iH(t + h/2) h)`.
pub fn evolve_stepped<F>(
    sampler: F,
    psi0: &StateVector,
    times: &TimeGrid,
    step: f64,
) -> Result<Vec<StateVector>>
where
    F: Fn(f64) -> Result<OperatorMatrix>,
{
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::Precondition(format!("step must be finite and > 0, got {step}")));
    }
    if times.times()[0] < 0.0 {
        return Err(Error::Precondition("stepped evolution starts at t = 0".into()));
    }
    let dim = psi0.dim();
    let mut psi = psi0.amplitudes().clone();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times.times() {
        let span = target - now;
        if span > 0.0 {
            let substeps = (span / step).ceil().max(1.0) as usize;
            let h = span / substeps as f64;
            for j in 0..substeps {
                let mid = now + (j as f64 + 0.5) * h;
                let ham = sampler(mid)?;
                let spectral = Spectral::new(&ham)?;
                let coeffs = spectral.to_eigenbasis(&psi);
                psi = spectral.evolve_coefficients(&coeffs, h);
            }
            now = target;
        }
        out.push(StateVector::evolved(dim, psi.clone())?);
    }
    Ok(out)
}

/// Time-independent upper bound on `‖H(t)‖` for the dipole Hamiltonian:
/// `max |ν n ± ω_a/2| + 2Ω`.
pub fn timedep_norm_bound(p: &ModelParams, dim: FockDim) -> Result<f64> {
    let (omega_a, _) = laser_frequencies(p)?;
    let top = p.nu() * dim.n_max() as f64;
    let diag = (top + 0.5 * omega_a).abs().max((0.5 * omega_a).abs());
    Ok(diag + 2.0 * p.omega())
}

/// Largest step allowed for [`evolve_timedep`].
pub fn max_timedep_step(p: &ModelParams, dim: FockDim) -> Result<f64> {
    Ok(MAX_PHASE_PER_STEP / timedep_norm_bound(p, dim)?)
}

/// `P_e(t)` under the full dipole Hamiltonian (no optical RWA).
pub fn evolve_timedep(
    p: &ModelParams,
    psi0: &StateVector,
    times: &TimeGrid,
    step: f64,
) -> Result<TimeSeries> {
    let dim = psi0.dim();
    let bound = timedep_norm_bound(p, dim)?;
    if step * bound > MAX_PHASE_PER_STEP * (1.0 + 1e-12) {
        return Err(Error::Precondition(format!(
            "step {step:.3e} too large: step · ‖H‖ = {:.3e} exceeds {MAX_PHASE_PER_STEP} (use step ≤ {:.3e})",
            step * bound,
            MAX_PHASE_PER_STEP / bound
        )));
    }
    let states = evolve_stepped(|t| h_full_at(p, t, dim), psi0, times, step)?;
    let pe = states.iter().map(pe_observable).collect();
    TimeSeries::from_grid(ModelTag::FullEq1, *p, dim, times, pe)
}

/// Outcome of the truncation audit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub n_max: usize,
    pub n_max_doubled: usize,
    pub sup_diff: f64,
    pub passed: bool,
}

/// Runs the exact model at `n_max` and `2·n_max` and compares `P_e`.
pub fn convergence_check(
    p: &ModelParams,
    dim: FockDim,
    times: &TimeGrid,
    init: InitialState,
) -> Result<ConvergenceReport> {
    let run = |d: FockDim| -> Result<TimeSeries> {
        let h = h_ion(p, d)?;
        let psi0 = init.build(d)?;
        evolve_series(ModelTag::ExactEq2, p, &h, &psi0, times)
    };
    let doubled = dim.doubled();
    let coarse = run(dim)?;
    let fine = run(doubled)?;
    let sup_diff = coarse
        .pe()
        .zip(fine.pe())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(ConvergenceReport {
        n_max: dim.n_max(),
        n_max_doubled: doubled.n_max(),
        sup_diff,
        passed: sup_diff <= CONVERGENCE_TOL,
    })
}
