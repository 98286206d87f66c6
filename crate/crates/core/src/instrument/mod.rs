//! Finite-outcome CP instruments on `M_d`.
//!
//! Outcome `i` is a CP map `Φ_i` on densities (the functional `E(E_i, φ)`
//! has density `Φ_i(ρ)`), stored by its Choi matrix
//! `J_i = Σ_ab e_ab ⊗ Φ_i(e_ab)`. The dual map is
//! `Φ_i*(x)_ab = Tr(Φ_i(e_ba) x)`.

mod dilation;
mod process;

pub use dilation::{realize_instrument, Dilation};
pub use process::{
    build_process, central_decomposition, conditional_expectation, controlled_unitary, exact_observation_residual,
    instrument_from_process, post_interaction_state, restricted_state, Apparatus, CentralDecomposition,
    MeasuringProcess,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64, ONE, ZERO};
use crate::report::{Check, Report};
use crate::state::State;

/// PSD tolerance for Choi matrices.
pub const CHOI_PSD_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub label: String,
    pub choi: ComplexMatrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instrument {
    dim: usize,
    outcomes: Vec<Outcome>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    pub elements: Vec<ComplexMatrix>,
}

impl Povm {
    pub fn dim(&self) -> usize {
        self.elements.first().map_or(0, |e| e.rows())
    }

    /// `‖Σ P_i - 1‖_max`
    pub fn completeness_residual(&self) -> f64 {
        let d = self.dim();
        let sum = self.elements.iter().fold(ComplexMatrix::zeros(d, d), |acc, p| &acc + p);
        (&sum - &ComplexMatrix::identity(d)).max_abs()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.elements
            .iter()
            .map(|p| p.hermitian_part().eigvalsh()[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// `φ(P_i)` for every outcome.
    pub fn probabilities(&self, phi: &State) -> Vec<f64> {
        self.elements.iter().map(|p| phi.expect(p).re).collect()
    }
}

impl Instrument {
    /// Shape checks only; see [`verify_axioms`] for the axioms.
    pub fn new(dim: usize, outcomes: Vec<Outcome>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::Empty("instrument outcomes"));
        }
        for o in &outcomes {
            if o.choi.rows() != dim * dim || o.choi.cols() != dim * dim {
                return Err(Error::DimensionMismatch(format!(
                    "outcome {} has a {}x{} Choi matrix for d = {dim}",
                    o.label,
                    o.choi.rows(),
                    o.choi.cols()
                )));
            }
        }
        Ok(Self { dim, outcomes })
    }

    /// Labels `E1, E2, …`.
    pub fn from_chois(dim: usize, chois: Vec<ComplexMatrix>) -> Result<Self> {
        let outcomes = chois
            .into_iter()
            .enumerate()
            .map(|(i, choi)| Outcome {
                label: format!("E{}", i + 1),
                choi,
            })
            .collect();
        Self::new(dim, outcomes)
    }

    /// Instrument with `Φ_i(ρ) = Σ_t K_it ρ K_it*`.
    pub fn from_kraus(dim: usize, kraus: &[Vec<ComplexMatrix>]) -> Result<Self> {
        let chois = kraus
            .iter()
            .map(|ops| {
                let mut j = ComplexMatrix::zeros(dim * dim, dim * dim);
                for k in ops {
                    if k.rows() != dim || k.cols() != dim {
                        return Err(Error::DimensionMismatch("Kraus operator shape".into()));
                    }
                    // vec with entry (a, c) = K[c, a]
                    let v: Vec<C64> = (0..dim * dim).map(|p| k[(p % dim, p / dim)]).collect();
                    j += &ComplexMatrix::outer(&v, &v);
                }
                Ok(j)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_chois(dim, chois)
    }

    /// Single outcome `Φ = id`.
    pub fn identity(dim: usize) -> Self {
        Self::from_kraus(dim, &[vec![ComplexMatrix::identity(dim)]]).expect("identity instrument")
    }

    /// Lüders instrument of the given projections.
    pub fn projective(projections: &[ComplexMatrix]) -> Result<Self> {
        let dim = projections.first().ok_or(Error::Empty("projections"))?.rows();
        let kraus: Vec<Vec<ComplexMatrix>> = projections.iter().map(|p| vec![p.clone()]).collect();
        Self::from_kraus(dim, &kraus)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn choi(&self, i: usize) -> &ComplexMatrix {
        &self.outcomes[i].choi
    }

    fn combined_choi(&self, q: &[C64]) -> ComplexMatrix {
        let n = self.dim * self.dim;
        let mut j = ComplexMatrix::zeros(n, n);
        for (o, &c) in self.outcomes.iter().zip(q) {
            if c != ZERO {
                j.add_scaled(c, &o.choi);
            }
        }
        j
    }

    fn apply_choi(&self, j: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim;
        let mut out = ComplexMatrix::zeros(d, d);
        for a in 0..d {
            for b in 0..d {
                let r = rho[(a, b)];
                if r == ZERO {
                    continue;
                }
                for c in 0..d {
                    for e in 0..d {
                        out[(c, e)] += r * j[(a * d + c, b * d + e)];
                    }
                }
            }
        }
        out
    }

    fn dual_choi(&self, j: &ComplexMatrix, x: &ComplexMatrix) -> ComplexMatrix {
        let d = self.dim;
        ComplexMatrix::from_fn(d, d, |a, b| {
            // Tr(Φ(e_ba) x) = Σ_ce J[(b,c),(a,e)] x[e,c]
            let mut s = ZERO;
            for c in 0..d {
                for e in 0..d {
                    s += j[(b * d + c, a * d + e)] * x[(e, c)];
                }
            }
            s
        })
    }

    /// `Φ_i(ρ)`, the density of `E(E_i, φ)`.
    pub fn apply(&self, i: usize, rho: &ComplexMatrix) -> ComplexMatrix {
        self.apply_choi(&self.outcomes[i].choi, rho)
    }

    /// Density of `E(Σ q_i E_i, φ)`.
    pub fn apply_combo(&self, q: &[C64], rho: &ComplexMatrix) -> ComplexMatrix {
        self.apply_choi(&self.combined_choi(q), rho)
    }

    /// `E*(E_i, x)`
    pub fn dual(&self, i: usize, x: &ComplexMatrix) -> ComplexMatrix {
        self.dual_choi(&self.outcomes[i].choi, x)
    }

    /// `E*(Σ q_i E_i, x)`
    pub fn dual_combo(&self, q: &[C64], x: &ComplexMatrix) -> ComplexMatrix {
        self.dual_choi(&self.combined_choi(q), x)
    }

    /// The map `b ↦ E*(Σ q_i E_i, b)`.
    pub fn dual_map(&self, q: &[C64]) -> impl Fn(&ComplexMatrix) -> ComplexMatrix + '_ {
        let j = self.combined_choi(q);
        move |x| self.dual_choi(&j, x)
    }

    /// `P_i = E*(E_i, 1)`.
    pub fn povm(&self) -> Povm {
        let id = ComplexMatrix::identity(self.dim);
        Povm {
            elements: (0..self.len()).map(|i| self.dual(i, &id)).collect(),
        }
    }

    /// `‖E*(1, 1) - 1‖_max`
    pub fn normalization_residual(&self) -> f64 {
        self.povm().completeness_residual()
    }

    /// Smallest eigenvalue of every Choi matrix.
    pub fn choi_min_eigenvalues(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.choi.hermitian_part().eigvalsh()[0]).collect()
    }

    /// Replace outcome `i`'s Choi matrix (used to build perturbed instruments).
    pub fn with_choi(&self, i: usize, choi: ComplexMatrix) -> Result<Self> {
        let mut outcomes = self.outcomes.clone();
        outcomes[i].choi = choi;
        Self::new(self.dim, outcomes)
    }
}

/// Deterministic probe vectors: the standard basis, then `(e_a + e_b)/√2`
/// and `(e_a + i e_b)/√2` for `a < b`, truncated to `len`.
pub fn default_probes(d: usize, len: usize) -> Vec<Vec<C64>> {
    let mut probes = Vec::new();
    for a in 0..d {
        probes.push(crate::matrix::basis_vector(d, a));
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for a in 0..d {
        for b in a + 1..d {
            let mut v = vec![ZERO; d];
            v[a] = C64::new(h, 0.0);
            v[b] = C64::new(h, 0.0);
            probes.push(v.clone());
            v[b] = C64::new(0.0, h);
            probes.push(v);
        }
    }
    probes.truncate(len);
    probes
}

/// Vector states of [`default_probes`].
pub fn default_probe_states(d: usize, len: usize) -> Vec<State> {
    default_probes(d, len)
        .iter()
        .map(|v| State::trusted(ComplexMatrix::outer(v, v)))
        .collect()
}

/// `Σ_n 2^{-n} Σ_i ‖Φ¹_i(ψ_n) - Φ²_i(ψ_n)‖₁` over probe vectors `ψ_1, ψ_2, …`.
/// The trace norm summed over outcomes bounds the norm of the difference
/// of the functionals on the unit ball of the outcome algebra.
pub fn instrument_distance(e1: &Instrument, e2: &Instrument, probes: &[Vec<C64>]) -> Result<f64> {
    if e1.dim != e2.dim || e1.len() != e2.len() {
        return Err(Error::OutcomeMismatch(format!(
            "({} outcomes on d = {}) vs ({} outcomes on d = {})",
            e1.len(),
            e1.dim,
            e2.len(),
            e2.dim
        )));
    }
    let mut total = 0.0;
    let mut weight = 0.5;
    for psi in probes {
        if psi.len() != e1.dim {
            return Err(Error::DimensionMismatch("probe vector length".into()));
        }
        let rho = ComplexMatrix::outer(psi, psi);
        let mut nu = 0.0;
        for i in 0..e1.len() {
            nu += (&e1.apply(i, &rho) - &e2.apply(i, &rho)).trace_norm();
        }
        total += weight * nu;
        weight *= 0.5;
    }
    Ok(total)
}

fn random_weights(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    (0..n).map(|_| C64::new(rng.random_range(0.0..1.0), 0.0)).collect()
}

/// Check the instrument axioms on the given probe states: complete
/// positivity (Choi spectra), positivity of `E(Q, φ)` for `Q ≥ 0`,
/// normalisation `E(1, φ)(1) = φ(1)` and `E*(1, 1) = 1`, and linearity in
/// `Q` and in `φ` on random combinations. Continuity conditions are vacuous
/// in finite dimension and are not checked.
pub fn verify_axioms(e: &Instrument, probes: &[State], tol: f64, seed: u64) -> Result<Report> {
    for p in probes {
        if p.dim() != e.dim {
            return Err(Error::DimensionMismatch(format!(
                "probe on M_{} for an instrument on M_{}",
                p.dim(),
                e.dim
            )));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Report::new(
        seed,
        serde_json::json!({"dim": e.dim, "outcomes": e.len(), "probes": probes.len(), "tol": tol}),
    );

    let min_choi = e.choi_min_eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
    report.push(
        Check::new("CP", (-min_choi).max(0.0), tol.min(CHOI_PSD_TOL))
            .anchored("J_i = Σ_ab e_ab ⊗ Φ_i(e_ab) ≥ 0"),
    );
    let herm = e.outcomes.iter().map(|o| o.choi.hermitian_residual()).fold(0.0, f64::max);
    report.push(Check::new("choi_hermitian", herm, tol));

    let m = e.len();
    let mut positivity = 0.0f64;
    let mut normalization = 0.0f64;
    let mut linear_q = 0.0f64;
    let mut linear_phi = 0.0f64;
    let ones = vec![ONE; m];
    for (idx, p) in probes.iter().enumerate() {
        let rho = p.density();
        for i in 0..m {
            let out = e.apply(i, rho);
            positivity = positivity.max(-out.hermitian_part().eigvalsh()[0]);
        }
        let q = random_weights(m, &mut rng);
        positivity = positivity.max(-e.apply_combo(&q, rho).hermitian_part().eigvalsh()[0]);
        let total = e.apply_combo(&ones, rho);
        normalization = normalization.max((total.trace() - p.density().trace()).norm());

        let q1 = random_weights(m, &mut rng);
        let q2 = random_weights(m, &mut rng);
        let (a, b) = (C64::new(rng.random_range(-1.0..1.0), 0.3), C64::new(0.7, rng.random_range(-1.0..1.0)));
        let mixed: Vec<C64> = q1.iter().zip(&q2).map(|(x, y)| a * x + b * y).collect();
        let mut expect = e.apply_combo(&q1, rho).scale(a);
        expect.add_scaled(b, &e.apply_combo(&q2, rho));
        linear_q = linear_q.max((&e.apply_combo(&mixed, rho) - &expect).max_abs());

        let other = probes[(idx + 1) % probes.len()].density();
        let (s, t) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
        let mut combo = rho.scale_real(s);
        combo.add_scaled(C64::new(t, 0.0), other);
        let mut expect = e.apply_combo(&q1, rho).scale_real(s);
        expect.add_scaled(C64::new(t, 0.0), &e.apply_combo(&q1, other));
        linear_phi = linear_phi.max((&e.apply_combo(&q1, &combo) - &expect).max_abs());
    }
    report.push(Check::new("positivity", positivity.max(0.0), tol).anchored("E(Q, φ) ≥ 0 for Q ≥ 0, φ ≥ 0"));
    report.push(Check::new("normalization", normalization, tol).anchored("E(1, φ)(1) = φ(1)"));
    report.push(Check::new("unital_dual", e.normalization_residual(), tol).anchored("E*(1, 1) = 1"));
    report.push(Check::new("linearity_Q", linear_q, tol));
    report.push(Check::new("linearity_phi", linear_phi, tol));
    Ok(report)
}

/// Cells of eigenvalues: each meter eigenvalue must fall in exactly one.
fn cell_projections(m: &ComplexMatrix, partition: &[Vec<f64>]) -> Result<Vec<ComplexMatrix>> {
    const MATCH: f64 = 1e-9;
    let eig = m.eigh();
    let n = m.rows();
    let scale = eig.values.iter().fold(1.0f64, |a, b| a.max(b.abs()));
    for (i, a) in partition.iter().enumerate() {
        for b in &partition[i + 1..] {
            for x in a {
                if b.iter().any(|y| (x - y).abs() <= MATCH * scale) {
                    return Err(Error::OverlappingCells(*x));
                }
            }
        }
    }
    let mut projections = vec![ComplexMatrix::zeros(n, n); partition.len()];
    for (c, &lambda) in eig.values.iter().enumerate() {
        let cells: Vec<usize> = partition
            .iter()
            .enumerate()
            .filter(|(_, cell)| cell.iter().any(|x| (x - lambda).abs() <= MATCH * scale))
            .map(|(i, _)| i)
            .collect();
        match cells.as_slice() {
            [] => return Err(Error::UncoveredEigenvalue(lambda)),
            [i] => {
                let v = eig.vectors.col(c);
                projections[*i] += &ComplexMatrix::outer(&v, &v);
            }
            _ => return Err(Error::OverlappingCells(lambda)),
        }
    }
    Ok(projections)
}

/// Instrument `E(Δ, φ)(x) = (φ ⊗ φ_probe)(U*(x ⊗ E_M(Δ))U)` of a meter `M`
/// on a probe of dimension `l_dim`, one outcome per partition cell.
pub fn vn_instrument(
    l_dim: usize,
    probe: &State,
    meter: &ComplexMatrix,
    unitary: &ComplexMatrix,
    partition: &[Vec<f64>],
) -> Result<Instrument> {
    if probe.dim() != l_dim || meter.rows() != l_dim || meter.cols() != l_dim {
        return Err(Error::DimensionMismatch("probe state and meter must act on the probe space".into()));
    }
    let total = unitary.require_square()?;
    if l_dim == 0 || total % l_dim != 0 {
        return Err(Error::DimensionMismatch(format!("unitary of size {total} on a probe of size {l_dim}")));
    }
    if partition.is_empty() {
        return Err(Error::Empty("partition"));
    }
    if meter.hermitian_residual() > 1e-12 {
        return Err(Error::InvalidArgument("meter is not Hermitian".into()));
    }
    let d = total / l_dim;
    let projections = cell_projections(meter, partition)?;
    let eig = probe.density().eigh();
    let mut chois = vec![ComplexMatrix::zeros(d * d, d * d); projections.len()];
    for (c, &weight) in eig.values.iter().enumerate() {
        if weight <= 0.0 {
            continue;
        }
        let g = eig.vectors.col(c);
        let w = process::isometry_from(unitary, d, &g);
        for (i, p) in projections.iter().enumerate() {
            chois[i].add_scaled(C64::new(weight, 0.0), &process::choi_of(&w, d, l_dim, p));
        }
    }
    Instrument::from_chois(d, chois)
}
