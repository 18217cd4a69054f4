//! Measurement-induced Lindblad dynamics in superoperator form.
//!
//! Matrices are vectorized column-major: `vec(X)[i + j·d] = X[i, j]`. Under
//! that convention `vec(A X B) = (Bᵀ ⊗ A) vec(X)`, so left multiplication by
//! `A` is `1 ⊗ A` and right multiplication by `B` is `Bᵀ ⊗ 1`.
//!
//! The nonselective state obeys
//!
//! ```text
//! dρ/dt = L(ρ) = [H, ρ]/(iħ) − (λ/2) [A, [A, ρ]]
//! ```
//!
//! and the propagator over a time `t` is `exp(t·L)`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::operators::{c64, matrix_exponential, CMatrix, DensityMatrix, HermitianOperator, C64};

/// A single continuous-measurement scenario: Hamiltonian, measured
/// observable and measurement strength.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSetup {
    pub h: HermitianOperator,
    pub a: HermitianOperator,
    pub lambda: f64,
    pub hbar: f64,
}

impl MeasurementSetup {
    pub fn new(h: HermitianOperator, a: HermitianOperator, lambda: f64) -> Result<Self> {
        Self::with_hbar(h, a, lambda, 1.0)
    }

    pub fn with_hbar(h: HermitianOperator, a: HermitianOperator, lambda: f64, hbar: f64) -> Result<Self> {
        if h.dim() != a.dim() {
            return Err(Error::DimensionMismatch { expected: h.dim(), found: a.dim() });
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::param("lambda", format!("must be finite and non-negative, got {lambda}")));
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(Error::param("hbar", format!("must be positive, got {hbar}")));
        }
        Ok(Self { h, a, lambda, hbar })
    }

    /// Two-level system `H = ħωσx/2`, `A = σz`.
    pub fn two_level(omega: f64, lambda: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::param("omega", format!("must be positive, got {omega}")));
        }
        Self::new(HermitianOperator::pauli_x().scaled(omega / 2.0), HermitianOperator::pauli_z(), lambda)
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::with_hbar(self.h.clone(), self.a.clone(), lambda, self.hbar)
    }
}

/// Linear map on `dim × dim` matrices stored as a `dim² × dim²` matrix
/// acting on column-major vectorizations.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    m: CMatrix,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, m: CMatrix) -> Result<Self> {
        if m.nrows() != dim * dim || m.ncols() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: m.nrows() });
        }
        Ok(Self { dim, m })
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, m: CMatrix::identity(dim * dim, dim * dim) }
    }

    /// `X ↦ A X`.
    pub fn left(a: &CMatrix) -> Self {
        let d = a.nrows();
        Self { dim: d, m: CMatrix::identity(d, d).kronecker(a) }
    }

    /// `X ↦ X B`.
    pub fn right(b: &CMatrix) -> Self {
        let d = b.nrows();
        Self { dim: d, m: b.transpose().kronecker(&CMatrix::identity(d, d)) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: x.nrows() });
        }
        Ok(unvec(&self.apply_vec(&vec_of(x)), self.dim))
    }

    pub(crate) fn apply_vec(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.m * v
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(Self { dim: self.dim, m: &self.m * &other.m })
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { dim: self.dim, m: &self.m * c64(s, 0.0) }
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        Ok(Self { dim: self.dim, m: &self.m + &other.m })
    }

    /// Choi matrix `Σᵢⱼ Eᵢⱼ ⊗ Φ(Eᵢⱼ)`; positive semidefinite iff the map is
    /// completely positive.
    pub fn choi(&self) -> CMatrix {
        let d = self.dim;
        let mut out = CMatrix::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                // column i + j·d of the superoperator is vec(Φ(E_ij))
                let col = self.m.column(i + j * d);
                for k in 0..d {
                    for l in 0..d {
                        out[(i * d + k, j * d + l)] = col[k + l * d];
                    }
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        crate::operators::max_abs_diff(&self.m, &other.m)
    }
}

pub(crate) fn vec_of(x: &CMatrix) -> DVector<C64> {
    DVector::from_column_slice(x.as_slice())
}

pub(crate) fn unvec(v: &DVector<C64>, dim: usize) -> CMatrix {
    CMatrix::from_column_slice(dim, dim, v.as_slice())
}

/// The measurement-induced Liouvillian.
pub fn liouvillian(setup: &MeasurementSetup) -> Superoperator {
    let d = setup.dim();
    let id = CMatrix::identity(d, d);
    let h = setup.h.matrix();
    let a = setup.a.matrix();
    let a2 = a * a;
    let coherent = (id.kronecker(h) - h.transpose().kronecker(&id)) * c64(0.0, -1.0 / setup.hbar);
    // [A,[A,X]] = A²X − 2AXA + XA²
    let double_comm = id.kronecker(&a2) - a.transpose().kronecker(a) * c64(2.0, 0.0) + a2.transpose().kronecker(&id);
    Superoperator { dim: d, m: coherent - double_comm * c64(setup.lambda / 2.0, 0.0) }
}

/// `exp(dt·L)`.
pub fn propagator(setup: &MeasurementSetup, dt: f64) -> Result<Superoperator> {
    propagator_from(&liouvillian(setup), dt)
}

pub(crate) fn propagator_from(l: &Superoperator, dt: f64) -> Result<Superoperator> {
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(Error::param("dt", format!("must be finite and non-negative, got {dt}")));
    }
    if dt == 0.0 {
        return Ok(Superoperator::identity(l.dim));
    }
    Ok(Superoperator { dim: l.dim, m: matrix_exponential(&(&l.m * c64(dt, 0.0)))? })
}

/// Symmetrized multiplication `B ↦ (AB + BA)/2`.
pub fn jordan_superoperator(a: &HermitianOperator) -> Superoperator {
    let l = Superoperator::left(a.matrix());
    let r = Superoperator::right(a.matrix());
    Superoperator { dim: a.dim(), m: (l.m + r.m) * c64(0.5, 0.0) }
}

/// Propagates `rho` for time `t` with a single exponential and re-projects
/// the result onto the set of density matrices.
pub fn evolve(rho: &DensityMatrix, setup: &MeasurementSetup, t: f64) -> Result<DensityMatrix> {
    evolve_stepped(rho, setup, t, 1)
}

/// Same as [`evolve`] but chains `n_steps` propagators of length `t/n_steps`.
pub fn evolve_stepped(rho: &DensityMatrix, setup: &MeasurementSetup, t: f64, n_steps: usize) -> Result<DensityMatrix> {
    if rho.dim() != setup.dim() {
        return Err(Error::DimensionMismatch { expected: setup.dim(), found: rho.dim() });
    }
    if n_steps == 0 {
        return Err(Error::param("n_steps", "must be at least 1"));
    }
    let u = propagator(setup, t / n_steps as f64)?;
    let mut v = vec_of(rho.matrix());
    for _ in 0..n_steps {
        v = u.apply_vec(&v);
    }
    DensityMatrix::from_propagated(unvec(&v, setup.dim()))
}

/// `‖L(ρ)‖_max`; zero for stationary states.
pub fn stationarity_residual(setup: &MeasurementSetup, rho: &DensityMatrix) -> Result<f64> {
    let lr = liouvillian(setup).apply(rho.matrix())?;
    Ok(lr.iter().map(|z| z.norm()).fold(0.0, f64::max))
}
