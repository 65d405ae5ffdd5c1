//! Closed-form and diagonal solutions: low-intensity 2×2 blocks,
//! Jaynes–Cummings manifolds and the dispersive frame pipeline.

use log::warn;
use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fock::{FockDim, OperatorMatrix, Spin};
use crate::linalg::Spectral;
use crate::models::{
    coupling_constants, dispersive_with_constants, h_dispersive, lir_couplings,
    rotations_with_angles, transform_r, CouplingConstants, DispersiveForm, ModelParams,
};
use crate::propagation::{
    excited_population, ModelTag, StateVector, TimeGrid, TimeSeries,
};

/// Two coupled levels `u, v` with `⟨u|H|u⟩ = a`, `⟨v|H|v⟩ = b` and
/// `⟨u|H|v⟩ = c`.
#[derive(Clone, Copy, Debug)]
struct Block {
    u: usize,
    v: usize,
    a: f64,
    b: f64,
    c: Complex64,
}

impl Block {
    /// `e^{−iHt}` on `(ψ_u, ψ_v)`, written as
    /// `e^{−imt}(cos(λt) − i sin(λt)/λ · M)` with `M² = λ²`.
    fn evolve(&self, pu: Complex64, pv: Complex64, t: f64) -> (Complex64, Complex64) {
        let m = 0.5 * (self.a + self.b);
        let d = 0.5 * (self.a - self.b);
        let lambda = (d * d + self.c.norm_sqr()).sqrt();
        let cos = (lambda * t).cos();
        let sinc = if lambda == 0.0 { t } else { (lambda * t).sin() / lambda };
        let i = Complex64::new(0.0, 1.0);
        let mu = d * pu + self.c * pv;
        let mv = self.c.conj() * pu - d * pv;
        let global = Complex64::new(0.0, -m * t).exp();
        (
            global * (cos * pu - i * sinc * mu),
            global * (cos * pv - i * sinc * mv),
        )
    }
}

/// Block-diagonal Hamiltonian: coupled pairs plus isolated levels.
struct BlockSolution {
    dim: FockDim,
    blocks: Vec<Block>,
    singles: Vec<(usize, f64)>,
}

impl BlockSolution {
    fn state_at(&self, psi0: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        let mut out = DVector::zeros(psi0.len());
        for b in &self.blocks {
            let (u, v) = b.evolve(psi0[b.u], psi0[b.v], t);
            out[b.u] = u;
            out[b.v] = v;
        }
        for &(idx, e) in &self.singles {
            out[idx] = psi0[idx] * Complex64::new(0.0, -e * t).exp();
        }
        out
    }

    fn series(
        &self,
        tag: ModelTag,
        p: &ModelParams,
        psi0: &StateVector,
        times: &TimeGrid,
    ) -> Result<TimeSeries> {
        let pe = times
            .times()
            .par_iter()
            .map(|&t| excited_population(self.dim, &self.state_at(psi0.amplitudes(), t)))
            .collect();
        TimeSeries::from_grid(tag, *p, self.dim, times, pe)
    }

    fn collect_singles(&mut self) {
        let mut used = vec![false; self.dim.joint_dim()];
        for b in &self.blocks {
            used[b.u] = true;
            used[b.v] = true;
        }
        self.singles.extend(
            used.iter()
                .enumerate()
                .filter(|(_, u)| !**u)
                .map(|(idx, _)| (idx, 0.0)),
        );
    }
}

fn lir_blocks(p: &ModelParams, dim: FockDim) -> Result<BlockSolution> {
    let k = p.harmonic_order()?;
    let m = k.unsigned_abs() as usize;
    let blocks = lir_couplings(p, k, dim.n_max())
        .into_iter()
        .map(|(n, c)| {
            let (u, v) = if k >= 0 {
                (dim.index(Spin::Ground, n + m), dim.index(Spin::Excited, n))
            } else {
                (dim.index(Spin::Excited, n + m), dim.index(Spin::Ground, n))
            };
            Block { u, v, a: 0.0, b: 0.0, c }
        })
        .collect();
    let mut sol = BlockSolution {
        dim,
        blocks,
        singles: Vec::new(),
    };
    sol.collect_singles();
    Ok(sol)
}

/// `P_e(t)` of the low-intensity model for `δ = kν`, in its interaction
/// picture.
///
/// Every Fock pair linked by the `k`-phonon coupling is a two-level system
/// solved in closed form; levels without a partner are stationary.
pub fn lir_pe(p: &ModelParams, psi0: &StateVector, times: &TimeGrid) -> Result<TimeSeries> {
    if !p.is_low_intensity() {
        warn!(
            "low-intensity solution requested with Ω = {} ≥ ν = {}",
            p.omega(),
            p.nu()
        );
    }
    lir_blocks(p, psi0.dim())?.series(ModelTag::LirEq5, p, psi0, times)
}

fn jc_blocks(p: &ModelParams, dim: FockDim) -> BlockSolution {
    let (nu, om) = (p.nu(), p.omega());
    let g = 0.5 * p.eta() * nu;
    let n_max = dim.n_max();
    let blocks = (0..n_max)
        .map(|n| Block {
            u: dim.index(Spin::Excited, n),
            v: dim.index(Spin::Ground, n + 1),
            a: nu * n as f64 + om,
            b: nu * (n + 1) as f64 - om,
            c: Complex64::new(g * ((n + 1) as f64).sqrt(), 0.0),
        })
        .collect();
    BlockSolution {
        dim,
        blocks,
        singles: vec![
            (dim.index(Spin::Ground, 0), -om),
            (dim.index(Spin::Excited, n_max), nu * n_max as f64 + om),
        ],
    }
}

fn warn_mir_detuning(p: &ModelParams) {
    if p.delta() != 0.0 {
        warn!("Jaynes–Cummings solution is built for δ = 0; the detuning {} is ignored", p.delta());
    }
}

/// `P_e(t)` under the Jaynes–Cummings Hamiltonian, for a state given in the
/// linearized frame.
///
/// Each manifold `{|e,n⟩, |g,n+1⟩}` has detuning `2Ω − ν` and coupling
/// `(ην/2)√(n+1)`; `|g,0⟩` and the truncation edge `|e,n_max⟩` are isolated.
pub fn mir_pe(p: &ModelParams, psi0: &StateVector, times: &TimeGrid) -> Result<TimeSeries> {
    warn_mir_detuning(p);
    jc_blocks(p, psi0.dim()).series(ModelTag::MirEq8, p, psi0, times)
}

/// Lab-frame `P_e(t)` from the Jaynes–Cummings solution: the lab state is
/// mapped into the linearized frame by `R`, evolved, and mapped back.
pub fn mir_pe_lab(p: &ModelParams, psi0: &StateVector, times: &TimeGrid) -> Result<TimeSeries> {
    warn_mir_detuning(p);
    let dim = psi0.dim();
    let r = transform_r(p, dim)?;
    let back = r.adjoint();
    let start = r.apply(psi0.amplitudes());
    let sol = jc_blocks(p, dim);
    let pe = times
        .times()
        .par_iter()
        .map(|&t| excited_population(dim, &back.apply(&sol.state_at(&start, t))))
        .collect();
    TimeSeries::from_grid(ModelTag::MirEq8, *p, dim, times, pe)
}

/// The composed frame map `U₂ U₁ R` of the dispersive pipeline.
#[derive(Clone, Debug)]
pub struct DispersiveFrame {
    forward: OperatorMatrix,
    backward: OperatorMatrix,
}

impl DispersiveFrame {
    pub fn new(p: &ModelParams, cc: &CouplingConstants, dim: FockDim) -> Result<Self> {
        let r = transform_r(p, dim)?;
        let (u1, u2) = rotations_with_angles(cc.xi1, cc.xi2, dim)?;
        let forward = (&(&u2 * &u1) * &r).verified_unitary()?;
        let backward = forward.adjoint();
        Ok(DispersiveFrame { forward, backward })
    }

    /// `U₂ U₁ R`.
    pub fn forward(&self) -> &OperatorMatrix {
        &self.forward
    }

    /// `R† U₁† U₂†`.
    pub fn backward(&self) -> &OperatorMatrix {
        &self.backward
    }
}

/// Lab-frame `P_e(t)` from the dispersive Hamiltonian.
///
/// `ψ' = U₂U₁R ψ₀` evolves under the dispersive Hamiltonian (pure phases
/// when `δ = 0`) and is mapped back by `R†U₁†U₂†`.
pub fn dispersive_pe(
    p: &ModelParams,
    psi0: &StateVector,
    times: &TimeGrid,
    form: DispersiveForm,
) -> Result<TimeSeries> {
    let cc = coupling_constants(p)?;
    let largest = cc.xi1.abs().max(cc.xi2.abs());
    if largest > crate::models::XI_WARN {
        warn!("rotation angle max(|ξ₁|, |ξ₂|) = {largest:.3} exceeds {}; the dispersive model is unreliable here", crate::models::XI_WARN);
    }
    dispersive_pe_with_constants(p, &cc, psi0, times, form)
}

/// [`dispersive_pe`] with caller-supplied coupling constants.
pub fn dispersive_pe_with_constants(
    p: &ModelParams,
    cc: &CouplingConstants,
    psi0: &StateVector,
    times: &TimeGrid,
    form: DispersiveForm,
) -> Result<TimeSeries> {
    let dim = psi0.dim();
    let frame = DispersiveFrame::new(p, cc, dim)?;
    let h = dispersive_with_constants(p, cc, dim, form)?;
    let start = frame.forward.apply(psi0.amplitudes());
    let pe: Vec<f64> = if h.is_diagonal() {
        let energies: Vec<f64> = h.diagonal().iter().map(|z| z.re).collect();
        times
            .times()
            .par_iter()
            .map(|&t| {
                let phased = DVector::from_iterator(
                    start.len(),
                    start
                        .iter()
                        .zip(&energies)
                        .map(|(c, e)| c * Complex64::new(0.0, -e * t).exp()),
                );
                excited_population(dim, &frame.backward.apply(&phased))
            })
            .collect()
    } else {
        let spectral = Spectral::new(&h)?;
        let coeffs = spectral.to_eigenbasis(&start);
        times
            .times()
            .par_iter()
            .map(|&t| {
                let psi = spectral.evolve_coefficients(&coeffs, t);
                excited_population(dim, &frame.backward.apply(&psi))
            })
            .collect()
    };
    TimeSeries::from_grid(ModelTag::DispersiveEq10, *p, dim, times, pe)
}

/// Dispersive Hamiltonian at a first sideband, `δ = ±ν`, for low intensity
/// `Ω < ν/2`. No further approximation is applied.
pub fn sideband_model(p: &ModelParams, dim: FockDim) -> Result<OperatorMatrix> {
    if p.omega() >= 0.5 * p.nu() {
        return Err(Error::Precondition(format!(
            "sideband regimes exist only at low intensity; need Ω < ν/2, got Ω = {}, ν = {}",
            p.omega(),
            p.nu()
        )));
    }
    let ratio = p.delta() / p.nu();
    if (ratio.abs() - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition(format!(
            "sideband model needs δ = ±ν, got δ/ν = {ratio}"
        )));
    }
    h_dispersive(p, dim, DispersiveForm::default())
}
