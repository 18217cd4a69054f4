//! Dense complex matrix algebra for small Hilbert spaces.
//!
//! Everything here works on `nalgebra::DMatrix<Complex64>`. Two validated
//! wrappers carry the physical invariants: [`HermitianOperator`] for
//! Hamiltonians and observables, [`DensityMatrix`] for states.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Elementwise tolerance for Hermiticity and unit trace.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Most negative eigenvalue a density matrix may carry.
pub const PSD_TOL: f64 = 1e-10;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest elementwise modulus of `a - b`.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

fn ensure_square(m: &CMatrix) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.nrows() == 0 {
        return Err(Error::param("dim", "matrix must be at least 1x1"));
    }
    Ok(m.nrows())
}

fn ensure_same_dim(a: &CMatrix, b: &CMatrix) -> Result<usize> {
    let n = ensure_square(a)?;
    let m = ensure_square(b)?;
    if n != m {
        return Err(Error::DimensionMismatch { expected: n, found: m });
    }
    Ok(n)
}

/// `(M + M†)/2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * c64(0.5, 0.0)
}

/// A Hermitian matrix. Construction fails unless `M = M†` to [`HERMITIAN_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    m: CMatrix,
}

impl HermitianOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        ensure_square(&m)?;
        let deviation = hermitian_deviation(&m);
        if deviation > HERMITIAN_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self { m: hermitian_part(&m) })
    }

    /// Symmetrizes `m` before validating; for matrices assembled from
    /// products of Hermitian factors that carry rounding asymmetry.
    pub fn from_products(m: CMatrix) -> Result<Self> {
        ensure_square(&m)?;
        Ok(Self { m: hermitian_part(&m) })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::param("dim", "empty diagonal"));
        }
        Ok(Self { m: CMatrix::from_diagonal(&DVector::from_iterator(diag.len(), diag.iter().map(|&d| c64(d, 0.0)))) })
    }

    pub fn identity(dim: usize) -> Self {
        Self { m: CMatrix::identity(dim, dim) }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { m: CMatrix::zeros(dim, dim) }
    }

    pub fn pauli_x() -> Self {
        Self { m: CMatrix::from_row_slice(2, 2, &[c64(0., 0.), c64(1., 0.), c64(1., 0.), c64(0., 0.)]) }
    }

    pub fn pauli_y() -> Self {
        Self { m: CMatrix::from_row_slice(2, 2, &[c64(0., 0.), c64(0., -1.), c64(0., 1.), c64(0., 0.)]) }
    }

    pub fn pauli_z() -> Self {
        Self { m: CMatrix::from_row_slice(2, 2, &[c64(1., 0.), c64(0., 0.), c64(0., 0.), c64(-1., 0.)]) }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { m: &self.m * c64(s, 0.0) }
    }

    pub fn plus(&self, other: &Self) -> Result<Self> {
        ensure_same_dim(&self.m, &other.m)?;
        Ok(Self { m: &self.m + &other.m })
    }

    /// Eigenvalues (ascending) and the unitary whose columns are the
    /// matching eigenvectors.
    pub fn eigen(&self) -> (Vec<f64>, CMatrix) {
        let eig = SymmetricEigen::new(self.m.clone());
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMatrix::from_fn(self.dim(), self.dim(), |i, j| eig.eigenvectors[(i, order[j])]);
        (values, vectors)
    }

    pub fn commutes_with(&self, other: &Self, tol: f64) -> bool {
        match commutator(&self.m, &other.m) {
            Ok(c) => c.iter().all(|z| z.norm() <= tol),
            Err(_) => false,
        }
    }
}

/// A Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    m: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity and trace to 1e-12 and the spectrum against
    /// [`PSD_TOL`].
    pub fn new(m: CMatrix) -> Result<Self> {
        ensure_square(&m)?;
        let deviation = hermitian_deviation(&m);
        if deviation > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {deviation:e})")));
        }
        let m = hermitian_part(&m);
        let tr = m.trace();
        if (tr.re - 1.0).abs() > HERMITIAN_TOL || tr.im.abs() > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min_eig = min_eigenvalue(&m);
        if min_eig < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { m })
    }

    /// Re-projection after numerical propagation: symmetrize, clip
    /// eigenvalues in `[-PSD_TOL, 0)` to zero and renormalize the trace.
    /// Negativity beyond `PSD_TOL` or a vanishing trace is an error.
    pub fn from_propagated(m: CMatrix) -> Result<Self> {
        let n = ensure_square(&m)?;
        let deviation = hermitian_deviation(&m);
        if !deviation.is_finite() || deviation > 1e-8 {
            return Err(Error::Numerical(format!("propagated state lost Hermiticity ({deviation:e})")));
        }
        let h = hermitian_part(&m);
        let eig = SymmetricEigen::new(h.clone());
        let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOL {
            return Err(Error::Numerical(format!("propagated state has eigenvalue {min_eig:e}")));
        }
        let projected = if min_eig < 0.0 {
            let clipped = eig.eigenvalues.map(|v| c64(v.max(0.0), 0.0));
            let v = &eig.eigenvectors;
            hermitian_part(&(v * CMatrix::from_diagonal(&clipped) * v.adjoint()))
        } else {
            h
        };
        let tr = projected.trace().re;
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::Numerical(format!("propagated state has trace {tr}")));
        }
        debug_assert_eq!(projected.nrows(), n);
        Ok(Self { m: projected / c64(tr, 0.0) })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { m: CMatrix::identity(dim, dim) / c64(dim as f64, 0.0) }
    }

    /// `|ψ⟩⟨ψ|` for a (not necessarily normalized) state vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let v = DVector::from_column_slice(psi);
        let norm = v.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = v / c64(norm, 0.0);
        Ok(Self { m: &v * v.adjoint() })
    }

    /// The computational basis state `|k⟩⟨k|`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::param("k", format!("basis index {k} out of range for dim {dim}")));
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = c64(1.0, 0.0);
        Ok(Self { m })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    /// `tr(ρ O)`.
    pub fn expectation(&self, op: &CMatrix) -> C64 {
        (&self.m * op).trace()
    }

    pub fn purity(&self) -> f64 {
        (&self.m * &self.m).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.m)
    }

    /// `½ ‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        ensure_same_dim(&self.m, &other.m)?;
        Ok(trace_norm_hermitian(&(&self.m - &other.m)) / 2.0)
    }
}

fn min_eigenvalue(m: &CMatrix) -> f64 {
    m.clone().symmetric_eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Trace norm of a Hermitian matrix (sum of absolute eigenvalues).
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    hermitian_part(m).symmetric_eigenvalues().iter().map(|v| v.abs()).sum()
}

/// `AB − BA`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    ensure_same_dim(a, b)?;
    Ok(a * b - b * a)
}

/// `AB + BA`.
pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    ensure_same_dim(a, b)?;
    Ok(a * b + b * a)
}

/// `exp(M)` by scaling and squaring with a Padé approximant.
pub fn matrix_exponential(m: &CMatrix) -> Result<CMatrix> {
    ensure_square(m)?;
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::param("m", "matrix has non-finite entries"));
    }
    Ok(m.exp())
}

/// Coefficients of `O = c0·1 + cx·σx + cy·σy + cz·σz`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliCoefficients {
    pub c0: f64,
    pub cx: f64,
    pub cy: f64,
    pub cz: f64,
}

impl PauliCoefficients {
    pub fn recompose(&self) -> HermitianOperator {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[c64(self.c0 + self.cz, 0.0), c64(self.cx, -self.cy), c64(self.cx, self.cy), c64(self.c0 - self.cz, 0.0)],
        );
        HermitianOperator { m }
    }
}

pub fn pauli_decompose(op: &HermitianOperator) -> Result<PauliCoefficients> {
    if op.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: op.dim() });
    }
    let coeff = |p: &HermitianOperator| -> Result<f64> {
        let z = (op.matrix() * p.matrix()).trace() / c64(2.0, 0.0);
        if z.im.abs() > HERMITIAN_TOL {
            return Err(Error::Numerical(format!("complex Pauli coefficient {z}")));
        }
        Ok(z.re)
    };
    Ok(PauliCoefficients {
        c0: coeff(&HermitianOperator::identity(2))?,
        cx: coeff(&HermitianOperator::pauli_x())?,
        cy: coeff(&HermitianOperator::pauli_y())?,
        cz: coeff(&HermitianOperator::pauli_z())?,
    })
}

/// Oscillator and two-level parameters. `hbar` defaults to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub omega: f64,
    pub mass: f64,
    pub hbar: f64,
    pub fock_dim: usize,
}

impl ModelParams {
    pub fn new(omega: f64, mass: f64, fock_dim: usize) -> Result<Self> {
        let p = Self { omega, mass, hbar: 1.0, fock_dim };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return Err(Error::param("omega", format!("must be positive, got {}", self.omega)));
        }
        if !(self.mass > 0.0) || !self.mass.is_finite() {
            return Err(Error::param("mass", format!("must be positive, got {}", self.mass)));
        }
        if !(self.hbar > 0.0) || !self.hbar.is_finite() {
            return Err(Error::param("hbar", format!("must be positive, got {}", self.hbar)));
        }
        Ok(())
    }
}

/// Position, momentum and Hamiltonian in a truncated Fock basis.
#[derive(Debug, Clone)]
pub struct FockOperators {
    pub x: HermitianOperator,
    pub p: HermitianOperator,
    pub h: HermitianOperator,
}

/// Ladder-operator construction of `x̂`, `p̂` and `Ĥ = p̂²/2m + mω²x̂²/2`.
///
/// `Ĥ` is assembled from the truncated `x̂` and `p̂`, so its last diagonal
/// entry deviates from `ħω(n+½)`.
pub fn fock_operators(params: &ModelParams) -> Result<FockOperators> {
    params.validate()?;
    let n = params.fock_dim;
    if n < 2 {
        return Err(Error::param("fock_dim", format!("must be at least 2, got {n}")));
    }
    let ModelParams { omega, mass, hbar, .. } = *params;
    // lowering operator: a|k⟩ = √k |k−1⟩
    let mut a = CMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = c64((k as f64).sqrt(), 0.0);
    }
    let ad = a.adjoint();
    let x = (&a + &ad) * c64((hbar / (2.0 * mass * omega)).sqrt(), 0.0);
    let p = (&ad - &a) * c64(0.0, (hbar * mass * omega / 2.0).sqrt());
    let h = &p * &p * c64(1.0 / (2.0 * mass), 0.0) + &x * &x * c64(mass * omega * omega / 2.0, 0.0);
    Ok(FockOperators {
        x: HermitianOperator::from_products(x)?,
        p: HermitianOperator::from_products(p)?,
        h: HermitianOperator::from_products(h)?,
    })
}

/// Coherent state `|α⟩` truncated to `fock_dim` levels (renormalized).
pub fn coherent_state(fock_dim: usize, alpha: C64) -> Result<DensityMatrix> {
    if fock_dim < 2 {
        return Err(Error::param("fock_dim", "must be at least 2"));
    }
    let mut amp = Vec::with_capacity(fock_dim);
    let mut c = c64((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    amp.push(c);
    for k in 1..fock_dim {
        c = c * alpha / c64((k as f64).sqrt(), 0.0);
        amp.push(c);
    }
    DensityMatrix::pure(&amp)
}

/// Total population of the two highest Fock levels.
pub fn truncation_leakage(rho: &DensityMatrix) -> f64 {
    let n = rho.dim();
    let m = rho.matrix();
    (n.saturating_sub(2)..n).map(|k| m[(k, k)].re).sum()
}
