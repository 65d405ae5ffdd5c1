//! Ion-laser Hamiltonians, the linearizing and dispersive transforms, and the
//! coupling constants of the effective model.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use log::warn;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{
    displacement_matrix, ladder_ops, laguerre_column, pauli_ops, FockDim, OperatorMatrix, Spin,
};
use crate::linalg::{exp_anti_hermitian, exp_i_hermitian};

/// Relative width of the excluded band around `2Ω = ν`.
pub const POLE_TOL: f64 = 1e-9;
/// Rotation angles above this make the first-order elimination questionable.
pub const XI_WARN: f64 = 0.15;

/// How the laser detuning `δ = ω_a − ω_L` is specified.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Detuning {
    /// `δ = k ν`.
    Harmonic(i32),
    /// Arbitrary `δ`.
    Free(f64),
}

/// Physical parameters of the trapped ion and the driving laser.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    nu: f64,
    omega: f64,
    eta: f64,
    detuning: Detuning,
    omega_a: Option<f64>,
    omega_l: Option<f64>,
}

impl ModelParams {
    /// Resonant (`k = 0`) parameters.
    pub fn new(nu: f64, omega: f64, eta: f64) -> Result<Self> {
        if !(nu.is_finite() && nu > 0.0) {
            return Err(Error::config("nu", format!("must be finite and > 0, got {nu}")));
        }
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::config("omega", format!("must be finite and ≥ 0, got {omega}")));
        }
        if !(eta.is_finite() && eta >= 0.0) {
            return Err(Error::config("eta", format!("must be finite and ≥ 0, got {eta}")));
        }
        Ok(ModelParams {
            nu,
            omega,
            eta,
            detuning: Detuning::Harmonic(0),
            omega_a: None,
            omega_l: None,
        })
    }

    pub fn with_harmonic_detuning(self, k: i32) -> Result<Self> {
        ModelParams {
            detuning: Detuning::Harmonic(k),
            ..self
        }
        .checked()
    }

    pub fn with_detuning(self, delta: f64) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::config("delta", "must be finite"));
        }
        ModelParams {
            detuning: Detuning::Free(delta),
            ..self
        }
        .checked()
    }

    /// Atomic and laser frequencies for the full dipole Hamiltonian. Their
    /// difference must reproduce the detuning.
    pub fn with_laser_frequencies(self, omega_a: f64, omega_l: f64) -> Result<Self> {
        if !(omega_a.is_finite() && omega_a >= 0.0) {
            return Err(Error::config("omega-a", format!("must be finite and ≥ 0, got {omega_a}")));
        }
        if !(omega_l.is_finite() && omega_l >= 0.0) {
            return Err(Error::config("omega-l", format!("must be finite and ≥ 0, got {omega_l}")));
        }
        ModelParams {
            omega_a: Some(omega_a),
            omega_l: Some(omega_l),
            ..self
        }
        .checked()
    }

    pub fn with_eta(self, eta: f64) -> Result<Self> {
        let fresh = ModelParams::new(self.nu, self.omega, eta)?;
        ModelParams { eta: fresh.eta, ..self }.checked()
    }

    pub fn with_omega(self, omega: f64) -> Result<Self> {
        let fresh = ModelParams::new(self.nu, omega, self.eta)?;
        ModelParams {
            omega: fresh.omega,
            ..self
        }
        .checked()
    }

    fn checked(self) -> Result<Self> {
        if let (Some(wa), Some(wl)) = (self.omega_a, self.omega_l) {
            let mismatch = ((wa - wl) - self.delta()).abs();
            if mismatch > 1e-12 * wa.max(1.0) {
                return Err(Error::config(
                    "omega-a",
                    format!(
                        "ω_a − ω_L = {} does not match the detuning δ = {}",
                        wa - wl,
                        self.delta()
                    ),
                ));
            }
        }
        Ok(self)
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn detuning(&self) -> Detuning {
        self.detuning
    }

    pub fn omega_a(&self) -> Option<f64> {
        self.omega_a
    }

    pub fn omega_l(&self) -> Option<f64> {
        self.omega_l
    }

    pub fn delta(&self) -> f64 {
        match self.detuning {
            Detuning::Harmonic(k) => k as f64 * self.nu,
            Detuning::Free(d) => d,
        }
    }

    /// `k` with `δ = kν`; errors when `δ/ν` is not an integer.
    pub fn harmonic_order(&self) -> Result<i32> {
        match self.detuning {
            Detuning::Harmonic(k) => Ok(k),
            Detuning::Free(d) => {
                let ratio = d / self.nu;
                let k = ratio.round();
                if (ratio - k).abs() > 1e-12 * ratio.abs().max(1.0) {
                    Err(Error::Precondition(format!(
                        "the low-intensity solution needs δ = kν with integer k, got δ/ν = {ratio}"
                    )))
                } else {
                    Ok(k as i32)
                }
            }
        }
    }

    /// `Ω < ν`.
    pub fn is_low_intensity(&self) -> bool {
        self.omega < self.nu
    }

    /// `Ω > ν`.
    pub fn is_high_intensity(&self) -> bool {
        self.omega > self.nu
    }
}

/// Rotation angles and effective couplings of the dispersive model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingConstants {
    pub xi1: f64,
    pub xi2: f64,
    pub chi_ion: f64,
    pub kappa: f64,
}

impl CouplingConstants {
    pub const ZERO: CouplingConstants = CouplingConstants {
        xi1: 0.0,
        xi2: 0.0,
        chi_ion: 0.0,
        kappa: 0.0,
    };

    /// Coefficient of `σ_z (n̂ + ½)` produced by the second-order elimination,
    /// `χ_ion / 2`.
    pub fn second_order_shift(&self) -> f64 {
        0.5 * self.chi_ion
    }
}

fn check_pole(p: &ModelParams) -> Result<f64> {
    let gap = 4.0 * p.omega * p.omega - p.nu * p.nu;
    if gap.abs() < POLE_TOL * p.nu * p.nu {
        return Err(Error::ResonancePole {
            omega: p.omega,
            nu: p.nu,
            gap: gap.abs(),
        });
    }
    Ok(gap)
}

/// `ξ₁, ξ₂, χ_ion, κ` for the given parameters.
///
/// Rejects `2Ω ≈ ν`, where all but `ξ₁` diverge.
pub fn coupling_constants(p: &ModelParams) -> Result<CouplingConstants> {
    let gap = check_pole(p)?;
    let (nu, om, eta) = (p.nu, p.omega, p.eta);
    Ok(CouplingConstants {
        xi1: eta * nu / (2.0 * (nu + 2.0 * om)),
        xi2: eta * nu / (2.0 * (2.0 * om - nu)),
        chi_ion: 2.0 * eta * eta * nu * nu * om / gap,
        kappa: p.delta() * eta * nu * nu / gap,
    })
}

/// Limiting form of `χ_ion` far from the `2Ω = ν` pole.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntensityLimit {
    /// `Ω ≫ ν`: `χ → η²ν²/(2Ω)`.
    High,
    /// `Ω ≪ ν`: `χ → −2η²Ω`.
    Low,
}

pub fn chi_asymptotic(p: &ModelParams, limit: IntensityLimit) -> Result<f64> {
    let (nu, om, eta) = (p.nu, p.omega, p.eta);
    match limit {
        IntensityLimit::High if om > nu => Ok(eta * eta * nu * nu / (2.0 * om)),
        IntensityLimit::Low if om < nu => Ok(-2.0 * eta * eta * om),
        IntensityLimit::High => Err(Error::Precondition(format!(
            "high-intensity limit needs Ω > ν (Ω = {om}, ν = {nu})"
        ))),
        IntensityLimit::Low => Err(Error::Precondition(format!(
            "low-intensity limit needs Ω < ν (Ω = {om}, ν = {nu})"
        ))),
    }
}

/// Shared elementary operators for one truncation.
pub(crate) struct Ops {
    pub a: OperatorMatrix,
    pub ad: OperatorMatrix,
    pub n: OperatorMatrix,
    pub sz: OperatorMatrix,
    pub sp: OperatorMatrix,
    pub sm: OperatorMatrix,
    pub sx: OperatorMatrix,
    pub id: OperatorMatrix,
}

impl Ops {
    pub fn new(dim: FockDim) -> Self {
        let (a, ad, n) = ladder_ops(dim);
        let (sz, sp, sm, sx) = pauli_ops(dim);
        Ops {
            a,
            ad,
            n,
            sz,
            sp,
            sm,
            sx,
            id: OperatorMatrix::identity(dim),
        }
    }

    /// `a + a†`.
    pub fn quadrature(&self) -> OperatorMatrix {
        &self.a + &self.ad
    }
}

/// Post-RWA ion-laser Hamiltonian
/// `ν n̂ + (δ/2)σ_z + Ω(σ_+ D(iη) + σ_− D†(iη))`.
pub fn h_ion(p: &ModelParams, dim: FockDim) -> Result<OperatorMatrix> {
    let ops = Ops::new(dim);
    let d = displacement_matrix(p.eta, dim);
    let coupling = &(&ops.sp * &d) + &(&ops.sm * &d.adjoint());
    let h = &(&ops.n.scale(p.nu) + &ops.sz.scale(0.5 * p.delta())) + &coupling.scale(p.omega);
    h.verified_hermitian()
}

/// Full dipole Hamiltonian at time `t`, before the optical RWA:
/// `ν n̂ + (ω_a/2)σ_z + Ω σ_x (D(iη) e^{−iω_L t} + D†(iη) e^{iω_L t})`.
pub fn h_full_at(p: &ModelParams, t: f64, dim: FockDim) -> Result<OperatorMatrix> {
    let (omega_a, omega_l) = laser_frequencies(p)?;
    let ops = Ops::new(dim);
    let d = displacement_matrix(p.eta, dim);
    let phase = Complex64::new(0.0, -omega_l * t).exp();
    let drive = &d.scale(phase) + &d.adjoint().scale(phase.conj());
    let h = &(&ops.n.scale(p.nu) + &ops.sz.scale(0.5 * omega_a)) + &(&ops.sx * &drive).scale(p.omega);
    h.verified_hermitian()
}

pub(crate) fn laser_frequencies(p: &ModelParams) -> Result<(f64, f64)> {
    match (p.omega_a, p.omega_l) {
        (Some(a), Some(l)) => Ok((a, l)),
        _ => Err(Error::config(
            "omega-a",
            "the full dipole Hamiltonian needs both ω_a and ω_L",
        )),
    }
}

/// Resonant coupling `⟨g, n+k| H |e, n⟩` of the low-intensity model for
/// `k ≥ 0`, and `⟨e, n+|k|| H |g, n⟩` for `k < 0`, for every admissible `n`.
pub(crate) fn lir_couplings(p: &ModelParams, k: i32, n_max: usize) -> Vec<(usize, Complex64)> {
    let m = k.unsigned_abs() as usize;
    if m > n_max {
        return Vec::new();
    }
    let x = p.eta * p.eta;
    let lead = p.omega * (-x / 2.0).exp();
    // (−iη)^k for the σ_− a†^k term, (iη)^|k| for the σ_+ a†^|k| term
    let phase = if k >= 0 {
        Complex64::new(0.0, -p.eta).powu(m as u32)
    } else {
        Complex64::new(0.0, p.eta).powu(m as u32)
    };
    let lag = laguerre_column(n_max - m, m, x);
    // sqrt(n!/(n+m)!) starting from 1/sqrt(m!)
    let mut ratio = (1..=m).fold(1.0, |acc, j| acc / (j as f64).sqrt());
    lag.iter()
        .enumerate()
        .map(|(n, l)| {
            if n > 0 {
                ratio *= (n as f64 / (n + m) as f64).sqrt();
            }
            (n, phase * (lead * ratio * l))
        })
        .collect()
}

/// Interaction-picture low-intensity Hamiltonian for `δ = kν` after the
/// vibrational RWA:
/// `Ω e^{−η²/2} (−iη)^k σ_− a†^k n̂!/(n̂+k)! L_{n̂}^{(k)}(η²) + h.c.`
///
/// The operator-valued Laguerre factor is applied level by level.
pub fn h_lir(p: &ModelParams, dim: FockDim) -> Result<OperatorMatrix> {
    let k = p.harmonic_order()?;
    let m = k.unsigned_abs() as usize;
    let mut data = OperatorMatrix::zeros(dim).into_matrix();
    for (n, c) in lir_couplings(p, k, dim.n_max()) {
        let (row, col) = if k >= 0 {
            (dim.index(Spin::Ground, n + m), dim.index(Spin::Excited, n))
        } else {
            (dim.index(Spin::Excited, n + m), dim.index(Spin::Ground, n))
        };
        data[(row, col)] = c;
        data[(col, row)] = c.conj();
    }
    OperatorMatrix::raw(dim, data).verified_hermitian()
}

/// Image of the ion-laser Hamiltonian under [`transform_r`]:
/// `ν n̂ + Ω σ_z + (ην/2) σ_x (a + a†) − (δ/2) σ_x`, plus `νη²/4` when
/// `include_const` is set.
///
/// The drive term carries `−δ/2`: that is what the conjugation produces, and
/// the exact identity against [`h_ion`] holds only with this sign.
pub fn h_linearized(p: &ModelParams, dim: FockDim, include_const: bool) -> Result<OperatorMatrix> {
    let ops = Ops::new(dim);
    let mut h = &ops.n.scale(p.nu) + &ops.sz.scale(p.omega);
    h = &h + &(&ops.sx * &ops.quadrature()).scale(0.5 * p.eta * p.nu);
    h = &h - &ops.sx.scale(0.5 * p.delta());
    if include_const {
        h = &h + &ops.id.scale(0.25 * p.nu * p.eta * p.eta);
    }
    h.verified_hermitian()
}

/// Jaynes–Cummings form `ν n̂ + Ω σ_z + (ην/2)(σ_+ a + a† σ_−)`.
pub fn h_mir(p: &ModelParams, dim: FockDim) -> Result<OperatorMatrix> {
    if p.delta() != 0.0 {
        warn!("Jaynes–Cummings model is built for δ = 0; the detuning {} is ignored", p.delta());
    }
    let ops = Ops::new(dim);
    let jc = &(&ops.sp * &ops.a) + &(&ops.ad * &ops.sm);
    let h = &(&ops.n.scale(p.nu) + &ops.sz.scale(p.omega)) + &jc.scale(0.5 * p.eta * p.nu);
    h.verified_hermitian()
}

/// Which coefficients the dispersive Hamiltonian carries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DispersiveForm {
    /// Consistent second-order elimination of the sideband couplings of
    /// [`h_linearized`] by [`transform_u12`]:
    /// `ν n̂ + Ω σ_z + (χ_ion/2) σ_z (n̂ + ½) − (δ/2) σ_x − (ξ₁+ξ₂)(δ/2) σ_z (a + a†)`.
    #[default]
    SecondOrder,
    /// The coupling constants inserted directly:
    /// `ν n̂ + Ω σ_z − χ_ion σ_z (n̂ + ½) + (δ/2) σ_x + (κ/2) σ_z (a + a†)`.
    /// Its shift has the wrong sign and twice the magnitude of the exact
    /// second-order term, so it drifts from the exact dynamics at long times.
    Direct,
}

/// Dispersive effective Hamiltonian. Diagonal when `δ = 0`.
pub fn h_dispersive(p: &ModelParams, dim: FockDim, form: DispersiveForm) -> Result<OperatorMatrix> {
    let cc = coupling_constants(p)?;
    dispersive_with_constants(p, &cc, dim, form)
}

pub(crate) fn dispersive_with_constants(
    p: &ModelParams,
    cc: &CouplingConstants,
    dim: FockDim,
    form: DispersiveForm,
) -> Result<OperatorMatrix> {
    let ops = Ops::new(dim);
    let delta = p.delta();
    let (shift, drive, displacement) = match form {
        DispersiveForm::SecondOrder => (
            cc.second_order_shift(),
            -0.5 * delta,
            -(cc.xi1 + cc.xi2) * 0.5 * delta,
        ),
        DispersiveForm::Direct => (-cc.chi_ion, 0.5 * delta, 0.5 * cc.kappa),
    };
    let number_half = &ops.n + &ops.id.scale(0.5);
    let mut h = &ops.n.scale(p.nu) + &ops.sz.scale(p.omega);
    h = &h + &(&ops.sz * &number_half).scale(shift);
    if delta != 0.0 {
        h = &h + &ops.sx.scale(drive);
        h = &h + &(&ops.sz * &ops.quadrature()).scale(displacement);
    }
    h.verified_hermitian()
}

/// Linearizing transform
/// `R = e^{i n̂ π/2} e^{(π/4)(σ_+ − σ_−)} e^{−i(η/2)(a + a†)σ_z}`.
///
/// Each factor is exponentiated from its generator in the truncated space, so
/// `R` is unitary there up to roundoff.
pub fn transform_r(p: &ModelParams, dim: FockDim) -> Result<OperatorMatrix> {
    let ops = Ops::new(dim);
    let fock_phase = exp_i_hermitian(&ops.n, -FRAC_PI_2)?;
    let spin_rotation = exp_anti_hermitian(&(&ops.sp - &ops.sm), FRAC_PI_4)?;
    let conditional = exp_i_hermitian(&(&ops.quadrature() * &ops.sz), 0.5 * p.eta)?;
    (&(&fock_phase * &spin_rotation) * &conditional).verified_unitary()
}

/// Anti-Hermitian generators `(a†σ_+ − aσ_−, aσ_+ − a†σ_−)` of the
/// small rotations.
pub fn u12_generators(dim: FockDim) -> (OperatorMatrix, OperatorMatrix) {
    let ops = Ops::new(dim);
    let g1 = &(&ops.ad * &ops.sp) - &(&ops.a * &ops.sm);
    let g2 = &(&ops.a * &ops.sp) - &(&ops.ad * &ops.sm);
    (g1, g2)
}

/// Small rotations `U₁ = e^{ξ₁ G₁}` and `U₂ = e^{ξ₂ G₂}` that remove the
/// sideband couplings of [`h_linearized`] to first order.
pub fn transform_u12(p: &ModelParams, dim: FockDim) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let cc = coupling_constants(p)?;
    let largest = cc.xi1.abs().max(cc.xi2.abs());
    if largest > XI_WARN {
        warn!("rotation angle max(|ξ₁|, |ξ₂|) = {largest:.3} exceeds {XI_WARN}; the dispersive model is unreliable here");
    }
    rotations_with_angles(cc.xi1, cc.xi2, dim)
}

pub(crate) fn rotations_with_angles(
    xi1: f64,
    xi2: f64,
    dim: FockDim,
) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let (g1, g2) = u12_generators(dim);
    Ok((exp_anti_hermitian(&g1, xi1)?, exp_anti_hermitian(&g2, xi2)?))
}
