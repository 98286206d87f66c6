//! States on full matrix algebras, represented by density matrices.

use crate::error::{Error, Result};
use crate::matrix::{vec_inner, vec_norm, ComplexMatrix, C64};

/// Validation tolerance for densities (Hermiticity, positivity, trace).
pub const STATE_TOL: f64 = 1e-12;

/// A state `φ(x) = Tr(ρ x)` on `M_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    density: ComplexMatrix,
}

impl State {
    /// Validate a density at the default tolerance.
    pub fn new(density: ComplexMatrix) -> Result<Self> {
        Self::with_tolerance(density, STATE_TOL)
    }

    pub fn with_tolerance(density: ComplexMatrix, tol: f64) -> Result<Self> {
        let n = density.require_square()?;
        if n == 0 {
            return Err(Error::Empty("density"));
        }
        let herm = density.hermitian_residual();
        if herm > tol {
            return Err(Error::InvalidState(format!("density not Hermitian (residual {herm:e})")));
        }
        let tr = density.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol.max(1e-14 * n as f64) {
            return Err(Error::InvalidState(format!("trace {} differs from 1", tr.re)));
        }
        let density = density.hermitian_part();
        let min = density.eigvalsh()[0];
        if min < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { density })
    }

    /// Wrap a density that is PSD with unit trace by construction.
    pub(crate) fn trusted(density: ComplexMatrix) -> Self {
        debug_assert!(density.is_square());
        Self {
            density: density.hermitian_part(),
        }
    }

    /// Normalise a nonzero PSD matrix by its trace.
    pub fn from_unnormalized(m: &ComplexMatrix) -> Result<Self> {
        let tr = m.trace().re;
        if tr <= 0.0 {
            return Err(Error::InvalidState(format!("non-positive trace {tr:e}")));
        }
        Self::new(m.scale_real(1.0 / tr))
    }

    pub fn maximally_mixed(n: usize) -> Self {
        Self::trusted(ComplexMatrix::identity(n).scale_real(1.0 / n as f64))
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(p: &[f64]) -> Result<Self> {
        Self::new(ComplexMatrix::from_real_diagonal(p))
    }

    pub fn dim(&self) -> usize {
        self.density.rows()
    }

    pub fn density(&self) -> &ComplexMatrix {
        &self.density
    }

    /// `φ(x) = Tr(ρ x)`
    pub fn expect(&self, x: &ComplexMatrix) -> C64 {
        // Tr(ρx) = Σ ρ_ij x_ji = <ρ*, x> with ρ Hermitian.
        self.density.inner(x)
    }

    /// Ascending eigenvalues of the density.
    pub fn spectrum(&self) -> Vec<f64> {
        self.density.eigvalsh()
    }

    /// Second-largest eigenvalue of the density (0 in dimension 1).
    pub fn second_eigenvalue(&self) -> f64 {
        let s = self.spectrum();
        if s.len() < 2 {
            0.0
        } else {
            s[s.len() - 2]
        }
    }

    pub fn is_pure(&self, tol: f64) -> bool {
        self.second_eigenvalue() <= tol
    }

    /// `φ ∘ Ad(u)`, i.e. `x ↦ φ(u x u*)`, with density `u* ρ u`.
    pub fn compose_ad(&self, u: &ComplexMatrix) -> Self {
        Self::trusted(self.density.conjugate_by(&u.adjoint()))
    }

    /// Restriction to the first tensor factor of `M_{d1} ⊗ M_{d2}`.
    pub fn reduce_to_first(&self, d1: usize, d2: usize) -> Result<Self> {
        Ok(Self::trusted(self.density.partial_trace_second(d1, d2)?))
    }

    /// Restriction to the second tensor factor of `M_{d1} ⊗ M_{d2}`.
    pub fn reduce_to_second(&self, d1: usize, d2: usize) -> Result<Self> {
        Ok(Self::trusted(self.density.partial_trace_first(d1, d2)?))
    }

    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        same_dim(self, other)?;
        Ok((&self.density - &other.density).trace_norm())
    }
}

fn same_dim(a: &State, b: &State) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!("states on M_{} and M_{}", a.dim(), b.dim())));
    }
    Ok(())
}

/// Vector state `x ↦ <ξ, x ξ>`.
pub fn vector_state(xi: &[C64], ambient_dim: usize) -> Result<State> {
    if xi.len() != ambient_dim {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} in dimension {ambient_dim}",
            xi.len()
        )));
    }
    let norm = vec_norm(xi);
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnit(norm));
    }
    let unit: Vec<C64> = xi.iter().map(|z| z / norm).collect();
    Ok(State::trusted(ComplexMatrix::outer(&unit, &unit)))
}

/// Tensor product of states.
pub fn product_state(factors: &[State]) -> Result<State> {
    let (first, rest) = factors.split_first().ok_or(Error::Empty("product_state factors"))?;
    let mut density = first.density.clone();
    for f in rest {
        density = density.kron(&f.density);
    }
    Ok(State::trusted(density))
}

/// Fidelity `(Tr |√ρ₁ √ρ₂|)²`, clamped to `[0, 1]`.
pub fn fidelity(a: &State, b: &State) -> Result<f64> {
    same_dim(a, b)?;
    let f = a.density.sqrt_psd().matmul(&b.density.sqrt_psd()).trace_norm();
    Ok((f * f).clamp(0.0, 1.0))
}

/// `|<ξ, η>|²`, the fidelity of two vector states.
pub fn vector_fidelity(xi: &[C64], eta: &[C64]) -> f64 {
    vec_inner(xi, eta).norm_sqr()
}

/// The pure state `x ↦ x_00` on `M_k`.
pub fn phi0(k: usize) -> State {
    State::trusted(ComplexMatrix::unit(k, 0, 0))
}

/// The pure state `x ↦ k⁻¹ Σ_ij x_ij` on `M_k` (uniform superposition).
pub fn phi1(k: usize) -> State {
    let w = uniform_vector(k);
    State::trusted(ComplexMatrix::outer(&w, &w))
}

pub fn uniform_vector(k: usize) -> Vec<C64> {
    vec![C64::new(1.0 / (k as f64).sqrt(), 0.0); k]
}

/// `n`-fold tensor power of a state.
pub fn tensor_power(s: &State, n: usize) -> Result<State> {
    product_state(&vec![s.clone(); n])
}
