//! Measuring processes `(A, φ, γ, U)` truncated to a finite level and the
//! instruments they induce.
//!
//! The combined space is `C^d ⊗ C^K` (index `c·K + κ`). Everything is
//! computed from the isometry `W = U(1 ⊗ Ω)`: `C^d → C^d ⊗ C^K`, since
//! `(φ ⊗ φ_Ω)(U*(x ⊗ Q)U) = Tr((x ⊗ Q) WρW*)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instrument::Instrument;
use crate::matrix::{vec_norm, ComplexMatrix, C64};
use crate::state::State;
use crate::uhf::{checked_pow, fixed_point_blocks, EndomorphismStep, Flavor};

/// Tolerance for the unitarity and projection checks of [`build_process`].
pub const PROCESS_TOL: f64 = 1e-12;
/// Components with smaller weight are not normalised.
pub const WEIGHT_CUT: f64 = 1e-8;

/// The apparatus algebra `M_k^{⊗n}` with the step `γ_n` used for `T(φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Apparatus {
    pub k: usize,
    pub n: usize,
    pub flavor: Flavor,
}

impl Apparatus {
    pub fn dim(&self) -> Result<usize> {
        checked_pow(self.k, self.n)
    }

    pub fn gamma(&self) -> Result<EndomorphismStep> {
        EndomorphismStep::new(self.k, self.n, self.flavor)
    }

    /// Minimal projections of `γ_n(M_{k^{n-1}})' ∩ {v^{⊗n}}'`. For either
    /// flavor these are the charge projections `E_0, …, E_{k-1}` of `v^{⊗n}`,
    /// already in canonical order.
    pub fn outcome_projections(&self) -> Result<Vec<ComplexMatrix>> {
        Ok(fixed_point_blocks(self.k, self.n)?.0)
    }
}

#[derive(Clone, Debug)]
pub struct MeasuringProcess {
    d: usize,
    apparatus: Option<Apparatus>,
    phi_vector: Vec<C64>,
    projections: Vec<ComplexMatrix>,
    unitary: ComplexMatrix,
}

fn check_shapes(d: usize, phi_vector: &[C64], projections: &[ComplexMatrix], unitary: &ComplexMatrix) -> Result<usize> {
    let kdim = phi_vector.len();
    if d == 0 || kdim == 0 {
        return Err(Error::Empty("process dimensions"));
    }
    if projections.is_empty() {
        return Err(Error::Empty("outcome projections"));
    }
    if unitary.rows() != d * kdim || unitary.cols() != d * kdim {
        return Err(Error::DimensionMismatch(format!(
            "U is {}x{}, expected {} = {d} x {kdim}",
            unitary.rows(),
            unitary.cols(),
            d * kdim
        )));
    }
    for p in projections {
        if p.rows() != kdim || p.cols() != kdim {
            return Err(Error::DimensionMismatch("projection size differs from the probe dimension".into()));
        }
    }
    let norm = vec_norm(phi_vector);
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NotUnit(norm));
    }
    Ok(kdim)
}

/// `max(‖E_i E_j - δ_ij E_i‖, ‖E_i - E_i*‖, ‖Σ E_i - 1‖)`
pub fn projection_family_residual(projections: &[ComplexMatrix]) -> f64 {
    let n = projections[0].rows();
    let mut worst = 0.0f64;
    let mut sum = ComplexMatrix::zeros(n, n);
    for (i, p) in projections.iter().enumerate() {
        worst = worst.max(p.hermitian_residual());
        sum += p;
        for (j, q) in projections.iter().enumerate() {
            let prod = p.matmul(q);
            let r = if i == j { (&prod - p).max_abs() } else { prod.max_abs() };
            worst = worst.max(r);
        }
    }
    worst.max((&sum - &ComplexMatrix::identity(n)).max_abs())
}

/// Validated process: `U` unitary and `E_i` an orthogonal resolution of the
/// identity, both within [`PROCESS_TOL`].
pub fn build_process(
    d: usize,
    apparatus: Option<Apparatus>,
    phi_vector: Vec<C64>,
    projections: Vec<ComplexMatrix>,
    unitary: ComplexMatrix,
) -> Result<MeasuringProcess> {
    check_shapes(d, &phi_vector, &projections, &unitary)?;
    let u_res = unitary.unitarity_residual();
    if u_res.is_nan() || u_res > PROCESS_TOL {
        return Err(Error::InvalidArgument(format!("U is not unitary (residual {u_res:e})")));
    }
    let p_res = projection_family_residual(&projections);
    if p_res.is_nan() || p_res > PROCESS_TOL {
        return Err(Error::NotProjection {
            residual: p_res,
            tol: PROCESS_TOL,
        });
    }
    MeasuringProcess::new_unchecked(d, apparatus, phi_vector, projections, unitary)
}

impl MeasuringProcess {
    /// Shape and normalisation checks only; skips the `O((dK)³)` unitarity
    /// test of [`build_process`] for operators known to be unitary by
    /// construction.
    pub fn new_unchecked(
        d: usize,
        apparatus: Option<Apparatus>,
        phi_vector: Vec<C64>,
        projections: Vec<ComplexMatrix>,
        unitary: ComplexMatrix,
    ) -> Result<Self> {
        let kdim = check_shapes(d, &phi_vector, &projections, &unitary)?;
        if let Some(a) = &apparatus {
            if a.dim()? != kdim {
                return Err(Error::DimensionMismatch(format!(
                    "apparatus M_{}^⊗{} does not act on C^{kdim}",
                    a.k, a.n
                )));
            }
        }
        Ok(Self {
            d,
            apparatus,
            phi_vector,
            projections,
            unitary,
        })
    }

    pub fn observed_dim(&self) -> usize {
        self.d
    }

    pub fn probe_dim(&self) -> usize {
        self.phi_vector.len()
    }

    pub fn combined_dim(&self) -> usize {
        self.d * self.probe_dim()
    }

    pub fn apparatus(&self) -> Option<&Apparatus> {
        self.apparatus.as_ref()
    }

    pub fn phi_vector(&self) -> &[C64] {
        &self.phi_vector
    }

    pub fn projections(&self) -> &[ComplexMatrix] {
        &self.projections
    }

    pub fn unitary(&self) -> &ComplexMatrix {
        &self.unitary
    }

    pub fn outcomes(&self) -> usize {
        self.projections.len()
    }

    /// Same data with `U` replaced.
    pub fn with_unitary(&self, unitary: ComplexMatrix) -> Result<Self> {
        Self::new_unchecked(self.d, self.apparatus, self.phi_vector.clone(), self.projections.clone(), unitary)
    }

    /// `W = U(1 ⊗ Ω)`
    pub fn isometry(&self) -> ComplexMatrix {
        isometry_from(&self.unitary, self.d, &self.phi_vector)
    }

    /// `W_i = (1 ⊗ E_i) W`
    pub fn branch(&self, i: usize) -> ComplexMatrix {
        apply_probe_operator(&self.isometry(), self.d, &self.projections[i])
    }
}

/// `U(1 ⊗ g)` for `U` on `C^d ⊗ C^K`, `g ∈ C^K`.
pub(crate) fn isometry_from(unitary: &ComplexMatrix, d: usize, g: &[C64]) -> ComplexMatrix {
    let kdim = g.len();
    let n = unitary.rows();
    ComplexMatrix::from_fn(n, d, |r, a| {
        let row = &unitary.data()[r * n + a * kdim..r * n + (a + 1) * kdim];
        row.iter().zip(g).map(|(u, x)| u * x).sum()
    })
}

/// `(1 ⊗ p) w` for `w` with rows indexed by `C^d ⊗ C^K`.
fn apply_probe_operator(w: &ComplexMatrix, d: usize, p: &ComplexMatrix) -> ComplexMatrix {
    let kdim = p.rows();
    let cols = w.cols();
    let mut out = ComplexMatrix::zeros(d * kdim, cols);
    for c in 0..d {
        let block = ComplexMatrix::new(kdim, cols, w.data()[c * kdim * cols..(c + 1) * kdim * cols].to_vec())
            .expect("block shape");
        let moved = p.matmul(&block);
        out.data_mut()[c * kdim * cols..(c + 1) * kdim * cols].copy_from_slice(moved.data());
    }
    out
}

/// Choi matrix of `ρ ↦ Tr_K((1 ⊗ p) WρW*)` for a projection `p`.
pub(crate) fn choi_of(w: &ComplexMatrix, d: usize, kdim: usize, p: &ComplexMatrix) -> ComplexMatrix {
    let wi = apply_probe_operator(w, d, p);
    // Kraus K_κ[c, a] = W_i[c·K + κ, a]; column κ of S is vec(K_κ).
    let s = ComplexMatrix::from_fn(d * d, kdim, |row, kappa| {
        let (a, c) = (row / d, row % d);
        wi[(c * kdim + kappa, a)]
    });
    s.matmul(&s.adjoint())
}

/// `E(Q, φ)(x) = (φ ⊗ φ_Ω)(U*(x ⊗ Q)U)` with one outcome per `E_i`.
pub fn instrument_from_process(p: &MeasuringProcess) -> Instrument {
    let w = p.isometry();
    let chois = p
        .projections
        .iter()
        .map(|e| choi_of(&w, p.d, p.probe_dim(), e))
        .collect();
    Instrument::from_chois(p.d, chois).expect("process outcomes are nonempty")
}

/// `E_φ(T) = (1 ⊗ Ω)* U* T U (1 ⊗ Ω)`, so that `φ(E_φ(T)) = (φ ⊗ φ_Ω)(U*TU)`.
pub fn conditional_expectation(p: &MeasuringProcess, t: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = t.require_square()?;
    if n != p.combined_dim() {
        return Err(Error::DimensionMismatch(format!(
            "operator of size {n} on a combined space of size {}",
            p.combined_dim()
        )));
    }
    let w = p.isometry();
    Ok(w.adjoint_matmul(&t.matmul(&w)))
}

/// `max_ij ‖E_φ((1⊗E_i)(1⊗E_j)) - E_φ(1⊗E_i) E_φ(1⊗E_j)‖`: zero iff `E_φ`
/// is multiplicative on the span of the `1 ⊗ E_i`.
pub fn exact_observation_residual(p: &MeasuringProcess) -> f64 {
    let w = p.isometry();
    let povm: Vec<ComplexMatrix> = p
        .projections
        .iter()
        .map(|e| w.adjoint_matmul(&apply_probe_operator(&w, p.d, e)))
        .collect();
    let mut worst = 0.0f64;
    for (i, pi) in povm.iter().enumerate() {
        for (j, pj) in povm.iter().enumerate() {
            let prod = pi.matmul(pj);
            let r = if i == j { (&prod - pi).operator_norm() } else { prod.operator_norm() };
            worst = worst.max(r);
        }
    }
    worst
}

fn check_observed(p: &MeasuringProcess, phi: &State) -> Result<()> {
    if phi.dim() != p.d {
        return Err(Error::DimensionMismatch(format!(
            "state on M_{} for a process observing M_{}",
            phi.dim(),
            p.d
        )));
    }
    Ok(())
}

/// `(id ⊗ γ*)` applied blockwise to an operator on `C^d ⊗ C^{k^n}`.
fn dual_second(gamma: &EndomorphismStep, d: usize, rho: &ComplexMatrix) -> ComplexMatrix {
    let (big, small) = (gamma.target_dim(), gamma.source_dim());
    let mut out = ComplexMatrix::zeros(d * small, d * small);
    for c in 0..d {
        for e in 0..d {
            let block = ComplexMatrix::from_fn(big, big, |x, y| rho[(c * big + x, e * big + y)]);
            let reduced = gamma.dual(&block);
            for x in 0..small {
                for y in 0..small {
                    out[(c * small + x, e * small + y)] = reduced[(x, y)];
                }
            }
        }
    }
    out
}

fn gamma_of(p: &MeasuringProcess) -> Result<EndomorphismStep> {
    p.apparatus
        .ok_or_else(|| Error::InvalidArgument("process has no apparatus endomorphism".into()))?
        .gamma()
}

/// `T(φ) = (φ ⊗ φ_Ω) Ad U* (id ⊗ γ)` as a state on `M_d ⊗ M_{k^{n-1}}`.
pub fn post_interaction_state(p: &MeasuringProcess, phi: &State) -> Result<State> {
    check_observed(p, phi)?;
    let gamma = gamma_of(p)?;
    let w = p.isometry();
    let joint = w.matmul(phi.density()).matmul(&w.adjoint());
    Ok(State::trusted(dual_second(&gamma, p.d, &joint).hermitian_part()))
}

/// Weights `w_i = (φ ⊗ φ_Ω)(F_i)`, `F_i = U*(1 ⊗ E_i)U`, and the normalised
/// components `ω_i = (φ ⊗ φ_Ω)(F_i π_0(·)) / w_i`.
#[derive(Clone, Debug)]
pub struct CentralDecomposition {
    pub weights: Vec<f64>,
    /// `None` for outcomes with weight below [`WEIGHT_CUT`].
    pub components: Vec<Option<State>>,
    /// `|Σ w_i - 1|`
    pub weight_sum_residual: f64,
    /// `‖Σ w_i ω_i - T(φ)‖₁`
    pub reconstruction_residual: f64,
    /// Largest Hilbert-Schmidt overlap of distinct normalised components on
    /// the combined space.
    pub overlap_residual: f64,
}

impl CentralDecomposition {
    /// Largest second eigenvalue over the retained components.
    pub fn purity_residual(&self) -> f64 {
        self.components
            .iter()
            .flatten()
            .map(State::second_eigenvalue)
            .fold(0.0, f64::max)
    }
}

/// Central decomposition of `T(φ)`. Without an apparatus the components
/// are states on the combined space `C^d ⊗ C^K`.
pub fn central_decomposition(p: &MeasuringProcess, phi: &State) -> Result<CentralDecomposition> {
    check_observed(p, phi)?;
    let gamma = match p.apparatus {
        Some(a) => Some(a.gamma()?),
        None => None,
    };
    let reduce = |m: &ComplexMatrix| match &gamma {
        Some(g) => dual_second(g, p.d, m),
        None => m.clone(),
    };
    let w = p.isometry();
    let rho = phi.density();
    let branches: Vec<ComplexMatrix> = p
        .projections
        .iter()
        .map(|e| apply_probe_operator(&w, p.d, e))
        .collect();
    let weights: Vec<f64> = branches
        .iter()
        .map(|wi| rho.inner(&wi.adjoint_matmul(wi)).re)
        .collect();
    let joint = w.matmul(rho).matmul(&w.adjoint());
    let total = reduce(&joint);
    let mut mixture = ComplexMatrix::zeros(total.rows(), total.cols());
    let mut components = Vec::with_capacity(branches.len());
    for (wi, &weight) in branches.iter().zip(&weights) {
        let compressed = wi.matmul(rho).matmul(&wi.adjoint());
        let reduced = reduce(&compressed);
        mixture += &reduced;
        if weight > WEIGHT_CUT {
            components.push(Some(State::trusted(reduced.hermitian_part().scale_real(1.0 / weight))));
        } else {
            components.push(None);
        }
    }
    let mut overlap_residual = 0.0f64;
    for i in 0..branches.len() {
        for j in 0..branches.len() {
            if i == j || weights[i] <= WEIGHT_CUT || weights[j] <= WEIGHT_CUT {
                continue;
            }
            // Tr(W_i ρ W_i* W_j ρ W_j*)
            let cross = branches[i].adjoint_matmul(&branches[j]);
            let a = cross.matmul(rho);
            let overlap = a.matmul(&cross.adjoint()).inner(rho).norm() / (weights[i] * weights[j]);
            overlap_residual = overlap_residual.max(overlap);
        }
    }
    Ok(CentralDecomposition {
        weight_sum_residual: (weights.iter().sum::<f64>() - 1.0).abs(),
        reconstruction_residual: (&mixture - &total).trace_norm(),
        overlap_residual,
        weights,
        components,
    })
}

/// Restriction of a state on `M_d ⊗ M_m` to the observed factor `M_d`.
pub fn restricted_state(s: &State, observed_dim: usize) -> Result<State> {
    let n = s.dim();
    if observed_dim == 0 || !n.is_multiple_of(observed_dim) {
        return Err(Error::DimensionMismatch(format!(
            "state of dimension {n} has no factor of dimension {observed_dim}"
        )));
    }
    s.reduce_to_first(observed_dim, n / observed_dim)
}

/// `U = Σ_i e_ii ⊗ u_i` on `C^d ⊗ C^K`.
pub fn controlled_unitary(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let d = blocks.len();
    let kdim = blocks[0].rows();
    let mut u = ComplexMatrix::zeros(d * kdim, d * kdim);
    for (i, b) in blocks.iter().enumerate() {
        for r in 0..kdim {
            for c in 0..kdim {
                u[(i * kdim + r, i * kdim + c)] = b[(r, c)];
            }
        }
    }
    u
}
