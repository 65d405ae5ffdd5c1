//! Elementary operators on the truncated spin ⊗ Fock space.
//!
//! Every operator lives on the joint space of dimension `2 · (n_max + 1)`.
//! The basis is spin-major: index `spin · (n_max + 1) + n` with spin index 0
//! for `|e⟩` and 1 for `|g⟩`, so the spin structure of a Hamiltonian shows up
//! as four contiguous boson blocks.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Absolute hermiticity tolerance, scaled by `max(1, max |M_ij|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on `max |M†M − I|` over the interior block.
pub const UNITARY_TOL: f64 = 1e-10;

/// Internal (spin) state of the ion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Spin {
    Excited,
    Ground,
}

impl Spin {
    pub fn index(self) -> usize {
        match self {
            Spin::Excited => 0,
            Spin::Ground => 1,
        }
    }
}

/// Truncation of the motional Fock space.
///
/// Fock states `0..=n_max` are kept. The top `guard` levels are excluded from
/// exactness checks because truncation breaks operator identities there.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FockDim {
    n_max: usize,
    guard: usize,
}

impl FockDim {
    pub fn new(n_max: usize, guard: usize) -> Result<Self> {
        if n_max < 2 {
            return Err(Error::Precondition(format!("n_max must be ≥ 2, got {n_max}")));
        }
        if guard < 2 || guard >= n_max {
            return Err(Error::Precondition(format!(
                "guard must satisfy 2 ≤ guard < n_max, got guard = {guard}, n_max = {n_max}"
            )));
        }
        Ok(FockDim { n_max, guard })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn guard(&self) -> usize {
        self.guard
    }

    /// Number of Fock levels, `n_max + 1`.
    pub fn boson_dim(&self) -> usize {
        self.n_max + 1
    }

    /// Joint dimension, `2 · (n_max + 1)`.
    pub fn joint_dim(&self) -> usize {
        2 * self.boson_dim()
    }

    pub fn index(&self, spin: Spin, n: usize) -> usize {
        debug_assert!(n <= self.n_max);
        spin.index() * self.boson_dim() + n
    }

    /// Inverse of [`FockDim::index`].
    pub fn split(&self, index: usize) -> (Spin, usize) {
        let nb = self.boson_dim();
        let spin = if index < nb { Spin::Excited } else { Spin::Ground };
        (spin, index % nb)
    }

    /// Highest Fock level inside the interior block.
    pub fn interior_n_max(&self) -> usize {
        self.n_max - self.guard
    }

    /// Joint indices whose Fock level is `≤ n_max − guard`.
    pub fn interior_indices(&self) -> Vec<usize> {
        (0..self.joint_dim())
            .filter(|&i| self.split(i).1 <= self.interior_n_max())
            .collect()
    }

    /// Same guard, doubled `n_max`.
    pub fn doubled(&self) -> FockDim {
        FockDim {
            n_max: 2 * self.n_max,
            guard: self.guard,
        }
    }
}

/// Dense complex operator on the joint space, with verified structure flags.
///
/// The flags are only ever set by [`OperatorMatrix::verified_hermitian`] and
/// [`OperatorMatrix::verified_unitary`]; arithmetic clears them.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    dim: FockDim,
    data: DMatrix<Complex64>,
    hermitian: bool,
    unitary: bool,
}

impl OperatorMatrix {
    pub fn from_matrix(dim: FockDim, data: DMatrix<Complex64>) -> Result<Self> {
        let n = dim.joint_dim();
        if data.nrows() != n || data.ncols() != n {
            return Err(Error::Precondition(format!(
                "matrix is {}×{}, expected {n}×{n}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self::raw(dim, data))
    }

    pub(crate) fn raw(dim: FockDim, data: DMatrix<Complex64>) -> Self {
        OperatorMatrix {
            dim,
            data,
            hermitian: false,
            unitary: false,
        }
    }

    pub fn zeros(dim: FockDim) -> Self {
        let n = dim.joint_dim();
        Self::raw(dim, DMatrix::zeros(n, n))
    }

    pub fn identity(dim: FockDim) -> Self {
        let n = dim.joint_dim();
        OperatorMatrix {
            dim,
            data: DMatrix::identity(n, n),
            hermitian: true,
            unitary: true,
        }
    }

    pub fn from_fn(dim: FockDim, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let n = dim.joint_dim();
        Self::raw(dim, DMatrix::from_fn(n, n, f))
    }

    /// `I_spin ⊗ boson` for a `(n_max+1)`-square boson matrix.
    pub fn from_boson(dim: FockDim, boson: &DMatrix<Complex64>) -> Self {
        assert_eq!(boson.nrows(), dim.boson_dim());
        let id2 = DMatrix::<Complex64>::identity(2, 2);
        Self::raw(dim, id2.kronecker(boson))
    }

    /// `spin ⊗ I_boson` for a 2×2 matrix in the `(e, g)` ordering.
    pub fn from_spin(dim: FockDim, spin: [[f64; 2]; 2]) -> Self {
        let s = DMatrix::from_fn(2, 2, |r, c| Complex64::new(spin[r][c], 0.0));
        let id = DMatrix::<Complex64>::identity(dim.boson_dim(), dim.boson_dim());
        Self::raw(dim, s.kronecker(&id))
    }

    pub fn dim(&self) -> FockDim {
        self.dim
    }

    pub fn size(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[(row, col)]
    }

    /// `⟨row_spin, row_n| M |col_spin, col_n⟩`.
    pub fn element(&self, row: (Spin, usize), col: (Spin, usize)) -> Complex64 {
        self.data[(self.dim.index(row.0, row.1), self.dim.index(col.0, col.1))]
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    /// Conjugate transpose. Structure flags carry over.
    pub fn adjoint(&self) -> Self {
        OperatorMatrix {
            dim: self.dim,
            data: self.data.adjoint(),
            hermitian: self.hermitian,
            unitary: self.unitary,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |M − M†|` over all entries.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.size();
        let mut worst = 0.0_f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.data[(r, c)] - self.data[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// `max |M†M − I|` restricted to the interior block.
    pub fn unitary_residual(&self) -> f64 {
        let prod = self.data.adjoint() * &self.data;
        let idx = self.dim.interior_indices();
        let mut worst = 0.0_f64;
        for &r in &idx {
            for &c in &idx {
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((prod[(r, c)] - target).norm());
            }
        }
        worst
    }

    /// Sets the hermitian flag after checking the residual.
    pub fn verified_hermitian(mut self) -> Result<Self> {
        let residual = self.hermitian_residual();
        let bound = HERMITIAN_TOL * self.max_abs().max(1.0);
        if residual > bound {
            return Err(Error::Numerical(format!(
                "hermiticity residual {residual:.3e} exceeds {bound:.3e}"
            )));
        }
        self.hermitian = true;
        Ok(self)
    }

    /// Sets the unitary flag after checking `M†M = I` on the interior block.
    pub fn verified_unitary(mut self) -> Result<Self> {
        let residual = self.unitary_residual();
        if residual > UNITARY_TOL {
            return Err(Error::Numerical(format!(
                "unitarity residual {residual:.3e} exceeds {UNITARY_TOL:.0e} on the interior block"
            )));
        }
        self.unitary = true;
        Ok(self)
    }

    /// Largest entrywise difference, restricted to the interior block.
    pub fn max_abs_diff_interior(&self, other: &OperatorMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        let idx = self.dim.interior_indices();
        let mut worst = 0.0_f64;
        for &r in &idx {
            for &c in &idx {
                worst = worst.max((self.data[(r, c)] - other.data[(r, c)]).norm());
            }
        }
        worst
    }

    /// Largest entrywise difference over the full matrix.
    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn scale(&self, factor: impl Into<Complex64>) -> Self {
        Self::raw(self.dim, &self.data * factor.into())
    }

    pub fn commutator(&self, other: &OperatorMatrix) -> Self {
        &(self * other) - &(other * self)
    }

    /// `U · self · U†`.
    pub fn conjugated_by(&self, u: &OperatorMatrix) -> Self {
        Self::raw(self.dim, &u.data * &self.data * u.data.adjoint())
    }

    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        &self.data * v
    }

    /// Diagonal entries.
    pub fn diagonal(&self) -> DVector<Complex64> {
        self.data.diagonal()
    }

    /// True when every off-diagonal entry is exactly zero.
    pub fn is_diagonal(&self) -> bool {
        let n = self.size();
        (0..n).all(|r| (0..n).all(|c| r == c || self.data[(r, c)] == ZERO))
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&OperatorMatrix> for &OperatorMatrix {
            type Output = OperatorMatrix;
            fn $method(self, rhs: &OperatorMatrix) -> OperatorMatrix {
                assert_eq!(self.dim, rhs.dim, "operator dimensions differ");
                OperatorMatrix::raw(self.dim, &self.data $op &rhs.data)
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

/// Boson annihilation matrix on `0..=n_max`.
pub(crate) fn boson_annihilation(n_max: usize) -> DMatrix<Complex64> {
    let nb = n_max + 1;
    let mut a = DMatrix::zeros(nb, nb);
    for n in 1..nb {
        a[(n - 1, n)] = Complex64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Ladder operators `(a, a†, n̂)` on the joint space.
///
/// `a†|n_max⟩ = 0` by truncation. `n̂` is `diag(0, 1, …, n_max)` in each spin
/// block, which equals `a†a` in the truncated space.
pub fn ladder_ops(dim: FockDim) -> (OperatorMatrix, OperatorMatrix, OperatorMatrix) {
    let a_b = boson_annihilation(dim.n_max());
    let ad_b = a_b.adjoint();
    let n_b = DMatrix::from_fn(dim.boson_dim(), dim.boson_dim(), |r, c| {
        if r == c {
            Complex64::new(r as f64, 0.0)
        } else {
            ZERO
        }
    });
    let a = OperatorMatrix::from_boson(dim, &a_b);
    let ad = OperatorMatrix::from_boson(dim, &ad_b);
    let mut n = OperatorMatrix::from_boson(dim, &n_b);
    n.hermitian = true;
    (a, ad, n)
}

/// Pauli operators `(σ_z, σ_+, σ_−, σ_x)` on the joint space.
pub fn pauli_ops(
    dim: FockDim,
) -> (OperatorMatrix, OperatorMatrix, OperatorMatrix, OperatorMatrix) {
    let mut sz = OperatorMatrix::from_spin(dim, [[1.0, 0.0], [0.0, -1.0]]);
    let sp = OperatorMatrix::from_spin(dim, [[0.0, 1.0], [0.0, 0.0]]);
    let sm = OperatorMatrix::from_spin(dim, [[0.0, 0.0], [1.0, 0.0]]);
    let mut sx = OperatorMatrix::from_spin(dim, [[0.0, 1.0], [1.0, 0.0]]);
    sz.hermitian = true;
    sx.hermitian = true;
    (sz, sp, sm, sx)
}

fn check_laguerre_arg(x: f64) -> Result<()> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Precondition(format!(
            "Laguerre argument must be finite and ≥ 0, got {x}"
        )));
    }
    Ok(())
}

/// Associated Laguerre polynomial `L_n^{(k)}(x)` by the three-term recurrence
/// in `n`.
pub fn laguerre_assoc(n: usize, k: usize, x: f64) -> Result<f64> {
    check_laguerre_arg(x)?;
    Ok(*laguerre_column(n, k, x).last().unwrap())
}

/// `L_0^{(k)}(x), …, L_n^{(k)}(x)`.
pub(crate) fn laguerre_column(n: usize, k: usize, x: f64) -> Vec<f64> {
    let kf = k as f64;
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n == 0 {
        return out;
    }
    out.push(1.0 + kf - x);
    for j in 1..n {
        let jf = j as f64;
        let next = ((2.0 * jf + 1.0 + kf - x) * out[j] - (jf + kf) * out[j - 1]) / (jf + 1.0);
        out.push(next);
    }
    out
}

/// Closed-form matrix of `D(α) = exp(α a† − α* a)` on Fock levels `0..=n_max`.
///
/// Upper triangle (`m ≥ n`):
/// `⟨m|D(α)|n⟩ = √(n!/m!) α^{m−n} e^{−|α|²/2} L_n^{(m−n)}(|α|²)`.
/// The lower triangle follows from `⟨n|D(α)|m⟩ = conj(⟨m|D(−α)|n⟩)`.
pub(crate) fn displacement_boson(alpha: Complex64, n_max: usize) -> DMatrix<Complex64> {
    let nb = n_max + 1;
    let x = alpha.norm_sqr();
    let envelope = (-x / 2.0).exp();
    let mut d = DMatrix::zeros(nb, nb);
    let neg_conj = -alpha.conj();
    // alpha^diff / sqrt(diff!), built up one order at a time
    let mut lead_up = ONE;
    let mut lead_lo = ONE;
    for diff in 0..nb {
        if diff > 0 {
            let s = (diff as f64).sqrt();
            lead_up = lead_up * alpha / s;
            lead_lo = lead_lo * neg_conj / s;
        }
        let lag = laguerre_column(n_max - diff, diff, x);
        // sqrt(n!/(n+diff)!) = (1/sqrt(diff!)) * prod_{j=1..n} sqrt(j/(j+diff))
        let mut ratio = 1.0;
        for (n, l) in lag.iter().enumerate() {
            if n > 0 {
                ratio *= (n as f64 / (n + diff) as f64).sqrt();
            }
            let common = ratio * envelope * l;
            d[(n + diff, n)] = lead_up * common;
            if diff > 0 {
                d[(n, n + diff)] = lead_lo * common;
            }
        }
    }
    d
}

/// `D(iη) = e^{iη(a + a†)}` on the joint space from the closed-form elements.
///
/// The unitary flag is set once `D D† = I` holds on the interior block.
pub fn displacement_matrix(eta: f64, dim: FockDim) -> OperatorMatrix {
    let boson = displacement_boson(Complex64::new(0.0, eta), dim.n_max());
    let d = OperatorMatrix::from_boson(dim, &boson);
    match d.clone().verified_unitary() {
        Ok(u) => u,
        Err(_) => d,
    }
}

/// Independent oracle for [`displacement_matrix`]: power series of
/// `e^{iη(a + a†)}` in a space enlarged by `2 · guard` levels, truncated back.
pub fn displacement_series_oracle(eta: f64, dim: FockDim) -> Result<OperatorMatrix> {
    const MAX_TERMS: usize = 500;
    const TERM_TOL: f64 = 1e-16;

    let big = dim.n_max() + 2 * dim.guard();
    let a = boson_annihilation(big);
    let x = &a + a.adjoint();
    let gen = x * Complex64::new(0.0, eta);
    let nb = big + 1;
    let mut sum = DMatrix::<Complex64>::identity(nb, nb);
    let mut term = DMatrix::<Complex64>::identity(nb, nb);
    let mut converged = false;
    let mut last = 1.0;
    for j in 1..=MAX_TERMS {
        term = &term * &gen / Complex64::new(j as f64, 0.0);
        last = term.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if last < TERM_TOL {
            converged = true;
            break;
        }
        sum += &term;
    }
    if !converged {
        return Err(Error::OracleDivergence {
            terms: MAX_TERMS,
            last,
        });
    }
    let keep = dim.boson_dim();
    let block = sum.view((0, 0), (keep, keep)).into_owned();
    Ok(OperatorMatrix::from_boson(dim, &block))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(n_max: usize, guard: usize) -> FockDim {
        FockDim::new(n_max, guard).unwrap()
    }

    #[test]
    fn fock_dim_rejects_bad_truncations() {
        assert!(FockDim::new(1, 2).is_err());
        assert!(FockDim::new(4, 4).is_err());
        assert!(FockDim::new(10, 1).is_err());
        let d = dim(10, 3);
        assert_eq!(d.joint_dim(), 22);
        assert_eq!(d.index(Spin::Ground, 2), 13);
        assert_eq!(d.split(13), (Spin::Ground, 2));
        assert_eq!(d.interior_indices().len(), 16);
    }

    #[test]
    fn ladder_entries_for_small_space() {
        // n_max = 2 boson block; a FockDim needs n_max > guard ≥ 2, so the
        // joint-space check below uses n_max = 3.
        let a2 = boson_annihilation(2);
        assert_eq!(a2[(0, 1)], ONE);
        assert_eq!(a2[(1, 2)].re, std::f64::consts::SQRT_2);
        assert_eq!(a2.iter().filter(|z| **z != ZERO).count(), 2);

        let d = dim(3, 2);
        let (a, ad, n) = ladder_ops(d);
        for spin in [Spin::Excited, Spin::Ground] {
            assert_eq!(a.element((spin, 0), (spin, 1)), ONE);
            assert_eq!(a.element((spin, 1), (spin, 2)).re, 2f64.sqrt());
            assert_eq!(a.element((spin, 1), (spin, 0)), ZERO);
            assert_eq!(n.element((spin, 3), (spin, 3)).re, 3.0);
        }
        assert_eq!(a.matrix().iter().filter(|z| **z != ZERO).count(), 6);
        assert_eq!(ad.max_abs_diff(&a.adjoint()), 0.0);
        // a† annihilates the top level
        assert_eq!(ad.element((Spin::Excited, 3), (Spin::Excited, 3)), ZERO);
        assert!((0..d.joint_dim()).all(|r| ad.get(r, d.index(Spin::Ground, 3)) == ZERO));
    }

    #[test]
    fn number_operator_is_diagonal_ramp() {
        let d = dim(6, 2);
        let (_, _, n) = ladder_ops(d);
        for i in 0..d.joint_dim() {
            assert_eq!(n.get(i, i).re, d.split(i).1 as f64);
        }
        assert!(n.is_diagonal());
    }

    #[test]
    fn canonical_commutator_on_interior() {
        let d = dim(12, 3);
        let (a, ad, _) = ladder_ops(d);
        let comm = a.commutator(&ad);
        let nb = d.boson_dim();
        for r in 0..d.joint_dim() {
            for c in 0..d.joint_dim() {
                if r % nb < d.n_max() && c % nb < d.n_max() {
                    let want = if r == c { 1.0 } else { 0.0 };
                    assert!((comm.get(r, c) - want).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn pauli_algebra_is_exact() {
        let d = dim(4, 2);
        let (sz, sp, sm, sx) = pauli_ops(d);
        let id = OperatorMatrix::identity(d);
        assert_eq!((&(&sp * &sm) + &(&sm * &sp)).max_abs_diff(&id), 0.0);
        assert_eq!((&sz * &sp).max_abs_diff(&sp), 0.0);
        assert_eq!((&sp * &sz).max_abs_diff(&sp.scale(-1.0)), 0.0);
        assert_eq!((&sp + &sm).max_abs_diff(&sx), 0.0);
        let (_, _, n) = ladder_ops(d);
        assert_eq!(sz.commutator(&n).max_abs(), 0.0);
        assert_eq!((&sx * &sx).max_abs_diff(&id), 0.0);
        assert_eq!((&sz * &sz).max_abs_diff(&id), 0.0);
    }

    #[test]
    fn laguerre_examples() {
        assert_eq!(laguerre_assoc(0, 5, 3.7).unwrap(), 1.0);
        assert!((laguerre_assoc(1, 2, 0.01).unwrap() - 2.99).abs() < 1e-15);
        // 1 - 2x + x^2/2 at x = 0.01
        assert!((laguerre_assoc(2, 0, 0.01).unwrap() - 0.980_05).abs() < 1e-15);
        assert!(laguerre_assoc(3, 1, -0.5).is_err());
        assert!(laguerre_assoc(3, 1, f64::NAN).is_err());
    }

    #[test]
    fn displacement_at_zero_is_identity() {
        let d = dim(10, 3);
        let disp = displacement_matrix(0.0, d);
        assert_eq!(disp.max_abs_diff(&OperatorMatrix::identity(d)), 0.0);
        assert!(disp.is_unitary());
    }

    #[test]
    fn displacement_vacuum_element() {
        let d = dim(40, 4);
        let disp = displacement_matrix(0.1, d);
        let v = disp.element((Spin::Excited, 0), (Spin::Excited, 0));
        assert!((v.re - 0.995_012_479_192_682_3).abs() < 1e-15);
        assert!(v.im.abs() < 1e-18);
    }

    #[test]
    fn displacement_interior_unitarity_depends_on_guard() {
        // the truncated closed form drops couplings to levels above n_max,
        // which reach the interior through roughly guard + 1 off-diagonals
        let narrow = displacement_matrix(0.1, dim(40, 4));
        let r = narrow.unitary_residual();
        assert!(r > 5.0e-7 && r < 6.0e-7, "{r:e}");
        assert!(!narrow.is_unitary());
        for guard in [6, 8] {
            let wide = displacement_matrix(0.1, dim(40, guard));
            assert!(wide.unitary_residual() <= 1e-10);
            assert!(wide.is_unitary());
        }
    }

    #[test]
    fn displacement_is_complex_symmetric() {
        let d = dim(20, 4);
        let disp = displacement_matrix(0.3, d);
        let t = disp.matrix().transpose();
        let diff = (disp.matrix() - t).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-15);
    }

    #[test]
    fn series_oracle_zero_eta() {
        let d = dim(8, 2);
        let o = displacement_series_oracle(0.0, d).unwrap();
        assert_eq!(o.max_abs_diff(&OperatorMatrix::identity(d)), 0.0);
    }

    #[test]
    fn series_oracle_matches_closed_form() {
        let d = dim(40, 4);
        let closed = displacement_matrix(0.1, d);
        let series = displacement_series_oracle(0.1, d).unwrap();
        assert!(closed.max_abs_diff_interior(&series) <= 1e-10);
        let wide = dim(40, 8);
        let series = displacement_series_oracle(0.1, wide).unwrap();
        let prod = &series * &series.adjoint();
        assert!(prod.max_abs_diff_interior(&OperatorMatrix::identity(wide)) <= 1e-10);
    }
}
