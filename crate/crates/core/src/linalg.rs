//! Hermitian eigendecomposition and the matrix functions built on it.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockDim, OperatorMatrix};

const EIG_EPS: f64 = f64::EPSILON;
const EIG_MAX_ITER: usize = 10_000;

/// Spectral decomposition `H = V Λ V†` of a Hermitian operator.
///
/// Immutable once built; shareable across threads.
#[derive(Clone, Debug)]
pub struct Spectral {
    dim: FockDim,
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl Spectral {
    /// Decomposes `h`. The hermiticity is checked here, independently of the
    /// operator's flag, since generators of transforms are built ad hoc.
    pub fn new(h: &OperatorMatrix) -> Result<Self> {
        let residual = h.hermitian_residual();
        let scale = h.max_abs().max(1.0);
        if residual > 1e-12 * scale {
            return Err(Error::Numerical(format!(
                "eigendecomposition needs a Hermitian matrix (residual {residual:.3e})"
            )));
        }
        // symmetrize so that roundoff in the input cannot leak into the solver
        let m = h.matrix();
        let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let n = sym.nrows();
        let eig = SymmetricEigen::try_new(sym, EIG_EPS, EIG_MAX_ITER).ok_or_else(|| {
            Error::Numerical(format!(
                "Hermitian eigensolver did not converge (dimension {n}, max |H_ij| = {scale:.3e}, \
                 {EIG_MAX_ITER} iterations)"
            ))
        })?;
        let spectral = Spectral {
            dim: h.dim(),
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        };
        let orth = spectral.orthonormality_residual();
        if orth > 1e-10 {
            return Err(Error::Numerical(format!(
                "eigenvectors lost orthonormality: max |V†V − I| = {orth:.3e} \
                 (eigenvalue span {:.3e})",
                spectral.eigenvalue_span()
            )));
        }
        Ok(spectral)
    }

    pub fn dim(&self) -> FockDim {
        self.dim
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<Complex64> {
        &self.eigenvectors
    }

    fn eigenvalue_span(&self) -> f64 {
        self.eigenvalues.max() - self.eigenvalues.min()
    }

    fn orthonormality_residual(&self) -> f64 {
        let prod = self.eigenvectors.adjoint() * &self.eigenvectors;
        let n = prod.nrows();
        let mut worst = 0.0_f64;
        for r in 0..n {
            for c in 0..n {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((prod[(r, c)] - target).norm());
            }
        }
        worst
    }

    /// `f(H) = V f(Λ) V†` for a scalar function of the eigenvalues.
    pub fn apply_fn(&self, f: impl Fn(f64) -> Complex64) -> OperatorMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(*lambda);
            for z in scaled.column_mut(j).iter_mut() {
                *z *= w;
            }
        }
        OperatorMatrix::raw(self.dim, scaled * v.adjoint())
    }

    /// `exp(z · H)`.
    pub fn exp_scaled(&self, z: Complex64) -> OperatorMatrix {
        self.apply_fn(|lambda| (z * lambda).exp())
    }

    /// `exp(−iHt)`, unitary by construction.
    pub fn propagator(&self, t: f64) -> OperatorMatrix {
        self.exp_scaled(Complex64::new(0.0, -t))
    }

    /// Components of `psi` in the eigenbasis, `V† ψ`.
    pub fn to_eigenbasis(&self, psi: &DVector<Complex64>) -> DVector<Complex64> {
        self.eigenvectors.adjoint() * psi
    }

    /// `V e^{−iΛt} c` for eigenbasis coefficients `c`.
    pub fn evolve_coefficients(&self, coeffs: &DVector<Complex64>, t: f64) -> DVector<Complex64> {
        let phased = DVector::from_iterator(
            coeffs.len(),
            coeffs
                .iter()
                .zip(self.eigenvalues.iter())
                .map(|(c, lambda)| c * Complex64::new(0.0, -lambda * t).exp()),
        );
        &self.eigenvectors * phased
    }
}

/// `exp(−i θ K)` for a Hermitian generator `K`, verified unitary.
pub fn exp_i_hermitian(k: &OperatorMatrix, theta: f64) -> Result<OperatorMatrix> {
    Spectral::new(k)?
        .exp_scaled(Complex64::new(0.0, -theta))
        .verified_unitary()
}

/// `exp(ξ G)` for an anti-Hermitian generator `G`, verified unitary.
///
/// Uses `G = −iK` with the Hermitian `K = iG`.
pub fn exp_anti_hermitian(g: &OperatorMatrix, xi: f64) -> Result<OperatorMatrix> {
    let k = g.scale(Complex64::new(0.0, 1.0));
    exp_i_hermitian(&k, xi)
}
