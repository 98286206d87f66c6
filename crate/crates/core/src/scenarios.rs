//! End-to-end presets: the controlled-unitary process on `C^k ⊗ M_k^{⊗n}`,
//! the uniform-product (`χ`) ladder and finite tensor powers of the
//! apparatus.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::algebra::{commutant_of_generators, minimal_central_projections};
use crate::error::{Error, Result};
use crate::gns::{gns_intertwiner, transitivity_unitary};
use crate::instrument::{
    build_process, central_decomposition, controlled_unitary, exact_observation_residual, instrument_from_process,
    post_interaction_state, restricted_state, Apparatus, MeasuringProcess,
};
use crate::matrix::{basis_vector, vec_kron, vec_norm, ComplexMatrix, C64};
use crate::report::{Check, Meta, Report};
use crate::sampling::sample_outcomes;
use crate::state::{phi1, tensor_power, uniform_vector, vector_fidelity, State};
use crate::uhf::{checked_pow, clock, shift, EndomorphismStep, Flavor, SymmetryAction, UhfLadder};

/// Largest ambient dimension accepted by [`build_tensor_power`].
pub const TENSOR_POWER_CAP: usize = 4096;
/// Range test for user-supplied `ψ_i`.
pub const RANGE_TOL: f64 = 1e-10;
/// Minimal-projection tolerance for surrogate commutants.
const PROJECTION_TOL: f64 = 1e-9;
/// Smallest accepted χ² p-value.
pub const MIN_P_VALUE: f64 = 1e-3;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub checks: Vec<Check>,
    pub meta: Meta,
    /// Computed quantities (weights, POVM diagonals, dimensions, fidelities).
    pub derived: Map<String, Value>,
    /// Statements that hold only in the infinite-level limit.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ScenarioReport {
    pub fn new(seed: u64, config: Value) -> Self {
        Self {
            checks: Vec::new(),
            meta: Meta { seed, config },
            derived: Map::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, check: Check) {
        self.checks.push(check);
    }

    pub fn derive(&mut self, key: &str, value: Value) {
        self.derived.insert(key.to_string(), value);
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    /// The plain check list and meta block.
    pub fn as_report(&self) -> Report {
        Report {
            checks: self.checks.clone(),
            meta: self.meta.clone(),
        }
    }
}

/// Check that passes iff `value > bound` (reported as residual `value`).
fn lower_bound(name: &str, value: f64, bound: f64) -> Check {
    Check {
        name: name.to_string(),
        residual: value,
        tolerance: bound,
        pass: value > bound,
        anchor: None,
    }
}

fn ladder_config(k: usize, n: usize, flavor: Flavor) -> Value {
    json!({"k": k, "levels": n, "flavor": flavor})
}

/// Process with `d = k`, apparatus vector `Ω = ψ_1 = e_0^{⊗n}` (the vector
/// of `φ_0^{⊗n}`), outcome projections `E_1, …, E_k` (minimal projections
/// of the surrogate commutant with the symmetry adjoined) and
/// `U = Σ_i e_ii ⊗ u_i`, where `u_i` is the transitivity unitary carrying
/// `ψ_1` to `ψ_i`. By default `ψ_i` is the first standard basis vector in
/// the range of `E_i`; an override list replaces all of them (its first
/// entry becomes `Ω`).
pub fn build_section2(k: usize, n: usize, flavor: Flavor, psi: Option<&[Vec<C64>]>) -> Result<MeasuringProcess> {
    if k < 2 || n < 2 {
        return Err(Error::InvalidArgument(format!("need k >= 2 and n >= 2 (got k={k}, n={n})")));
    }
    let apparatus = Apparatus { k, n, flavor };
    let kdim = apparatus.dim()?;
    let step = apparatus.gamma()?;
    let projections = minimal_central_projections(&step.surrogate_commutant(true)?, PROJECTION_TOL)?;
    if projections.len() != k {
        return Err(Error::InvalidArgument(format!(
            "surrogate commutant has {} minimal projections, expected {k}",
            projections.len()
        )));
    }
    let vectors: Vec<Vec<C64>> = match psi {
        Some(list) => {
            if list.len() != k {
                return Err(Error::InvalidArgument(format!("expected {k} vectors ψ_i, got {}", list.len())));
            }
            for (i, v) in list.iter().enumerate() {
                if v.len() != kdim {
                    return Err(Error::DimensionMismatch(format!("ψ_{} has length {}", i + 1, v.len())));
                }
                let norm = vec_norm(v);
                if (norm - 1.0).abs() > RANGE_TOL {
                    return Err(Error::NotUnit(norm));
                }
                let moved = projections[i].mul_vec(v);
                let residual = vec_norm(&moved.iter().zip(v).map(|(a, b)| a - b).collect::<Vec<_>>());
                if residual > RANGE_TOL {
                    return Err(Error::NotInRange { index: i + 1, residual });
                }
            }
            list.to_vec()
        }
        None => projections
            .iter()
            .map(|p| {
                let first = (0..kdim).find(|&r| p[(r, r)].re > 0.5).expect("nonzero projection");
                basis_vector(kdim, first)
            })
            .collect(),
    };
    let blocks = vectors
        .iter()
        .map(|v| transitivity_unitary(&vectors[0], v))
        .collect::<Result<Vec<_>>>()?;
    let unitary = controlled_unitary(&blocks);
    build_process(k, Some(apparatus), vectors[0].clone(), projections, unitary)
}

fn is_identity(u: &ComplexMatrix) -> bool {
    (u - &ComplexMatrix::identity(u.rows())).max_abs() == 0.0
}

/// Verify the measurement law for `φ` on a process from [`build_section2`]
/// and sample outcomes. With `U = 1` the report follows the trivial branch
/// (`P_1 = 1`, every `P_i` scalar).
pub fn run_section2_check(p: &MeasuringProcess, phi: &State, shots: u64, seed: u64, tol: f64) -> Result<ScenarioReport> {
    let apparatus = *p
        .apparatus()
        .ok_or_else(|| Error::InvalidArgument("process has no apparatus".into()))?;
    let d = p.observed_dim();
    let mut report = ScenarioReport::new(
        seed,
        json!({
            "k": apparatus.k, "levels": apparatus.n, "flavor": apparatus.flavor,
            "d": d, "shots": shots, "tol": tol,
        }),
    );
    let instrument = instrument_from_process(p);
    let povm = instrument.povm();
    let dec = central_decomposition(p, phi)?;
    let identity_u = is_identity(p.unitary());

    report.push(
        Check::new("povm_completeness", povm.completeness_residual(), tol).anchored("Σ_i P_i = 1"),
    );
    report.push(Check::new("weight_sum", dec.weight_sum_residual, tol).anchored("Σ_i w_i = 1"));
    report.push(
        Check::new("reconstruction", dec.reconstruction_residual, tol)
            .anchored("T(φ) = Σ_i (φ ⊗ φ_Ω)(F_i π_0(·))"),
    );

    if identity_u {
        let id = ComplexMatrix::identity(d);
        let mut scalar = 0.0f64;
        for e in &povm.elements {
            let c = e.trace() / d as f64;
            scalar = scalar.max((e - &id.scale(c)).max_abs());
        }
        let mut trivial = (&povm.elements[0] - &id).max_abs();
        for e in &povm.elements[1..] {
            trivial = trivial.max(e.max_abs());
        }
        report.push(Check::new("povm_trivial", trivial, tol).anchored("P_1 = 1, P_i = 0 (i > 1)"));
        report.push(
            Check::new("povm_scalar", scalar, tol).anchored("P_i = (φ ⊗ φ_Ω)(1 ⊗ E_i) 1"),
        );
        let t = post_interaction_state(p, phi)?;
        let step = apparatus.gamma()?;
        let omega = ComplexMatrix::outer(p.phi_vector(), p.phi_vector());
        let product = phi.density().kron(&step.dual(&omega));
        report.push(
            Check::new("product_state", (t.density() - &product).trace_norm(), tol).anchored("T(φ) = φ ⊗ φγ"),
        );
        report.derive("no_information_gained", Value::Bool(trivial <= tol));
    } else {
        let diag: Vec<f64> = (0..d).map(|i| phi.density()[(i, i)].re).collect();
        let weight_err = dec
            .weights
            .iter()
            .zip(&diag)
            .map(|(w, x)| (w - x).abs())
            .fold(0.0, f64::max);
        report.push(Check::new("weights", weight_err, tol).anchored("w_i = φ(e_ii)"));
        let mut povm_err = 0.0f64;
        for (i, e) in povm.elements.iter().enumerate() {
            povm_err = povm_err.max((e - &ComplexMatrix::unit(d, i, i)).max_abs());
        }
        report.push(Check::new("povm", povm_err, tol).anchored("P_i = e_ii"));
        let t = post_interaction_state(p, phi)?;
        let restricted = restricted_state(&t, d)?;
        let law = ComplexMatrix::from_real_diagonal(&diag);
        report.push(
            Check::new("restriction", (restricted.density() - &law).trace_norm(), tol)
                .anchored("T(φ)|K = Σ_i φ(e_ii) Tr(e_ii ·)"),
        );
        report.push(
            Check::new("component_purity", dec.purity_residual(), tol).anchored("ω_i pure on K ⊗ A"),
        );
        report.push(Check::new("component_overlap", dec.overlap_residual, tol).anchored("ω_i ⊥ ω_j (i ≠ j)"));
        let mut branch_err = 0.0f64;
        for (i, c) in dec.components.iter().enumerate() {
            if let Some(c) = c {
                let r = restricted_state(c, d)?;
                branch_err = branch_err.max((r.density() - &ComplexMatrix::unit(d, i, i)).trace_norm());
            }
        }
        report.push(
            Check::new("component_restriction", branch_err, tol).anchored("φ_i(x) = Tr(e_ii x)"),
        );
        report.push(
            Check::new("exact_observation", exact_observation_residual(p), tol)
                .anchored("E_φ multiplicative on span{1 ⊗ E_i}"),
        );
        report.derive("no_information_gained", Value::Bool(false));
    }

    report.derive("weights", json!(dec.weights));
    report.derive(
        "povm_diagonals",
        json!(povm
            .elements
            .iter()
            .map(|e| e.diagonal().iter().map(|z| z.re).collect::<Vec<_>>())
            .collect::<Vec<_>>()),
    );
    let step = apparatus.gamma()?;
    report.derive("commutant_dim_with_symmetry", json!(step.surrogate_commutant(true)?.dim()));
    report.derive("commutant_dim_without_symmetry", json!(step.surrogate_commutant(false)?.dim()));

    if shots > 0 {
        let hist = sample_outcomes(&dec.weights, shots, seed)?;
        let chi = hist.chi_square();
        report.push(
            lower_bound("sampling_p_value", chi.p_value, MIN_P_VALUE)
                .anchored("outcome i drawn with probability (φ ⊗ φ_Ω)(F_i)"),
        );
        report.derive("chi_square", json!(chi));
        report.derive("histogram", json!(hist));
    }
    report.notes.push(
        "M ∩ K(H_φ) = {0} holds only in the infinite-level limit; not asserted at finite level".into(),
    );
    Ok(report)
}

/// The ladder of `χ = φ_1^{⊗n}` under the natural embedding: invariance
/// `χ^{(n)} ∘ γ_n = χ^{(n-1)}`, the per-factor fidelities
/// `F(φ_1, φ_1 ∘ Ad v^j)` with their Kakutani sums, the level-`n` fidelity
/// of `χ` against `χ ∘ σ^j`, and the GNS intertwiner of `γ_n`.
pub fn build_chi_scenario(k: usize, n: usize) -> Result<ScenarioReport> {
    if k < 2 || n < 2 {
        return Err(Error::InvalidArgument(format!("need k >= 2 and n >= 2 (got k={k}, n={n})")));
    }
    checked_pow(k, n)?;
    let mut report = ScenarioReport::new(0, ladder_config(k, n, Flavor::Natural));
    let ladder = UhfLadder::new(k, n)?;

    let mut invariance = 0.0f64;
    for level in 1..=n {
        let step = ladder.step(level, Flavor::Natural)?;
        let chi = tensor_power(&phi1(k), level)?;
        let chi_prev = if level == 1 {
            ComplexMatrix::identity(1)
        } else {
            tensor_power(&phi1(k), level - 1)?.density().clone()
        };
        invariance = invariance.max((&step.dual(chi.density()) - &chi_prev).max_abs());
    }
    report.push(Check::new("chi_invariance", invariance, 1e-12).anchored("χγ = χ"));

    let w = uniform_vector(k);
    let v = ladder.v().clone();
    let mut per_factor = Vec::new();
    let mut kakutani = Vec::new();
    let mut worst = 0.0f64;
    let mut level_fidelities = Vec::new();
    let chi_vec = (1..n).fold(w.clone(), |acc, _| vec_kron(&acc, &w));
    let sym = SymmetryAction::new(k, n).matrix();
    let mut vj = ComplexMatrix::identity(k);
    let mut symj = ComplexMatrix::identity(chi_vec.len());
    for _ in 1..k {
        vj = vj.matmul(&v);
        symj = symj.matmul(&sym);
        let f = vector_fidelity(&w, &vj.mul_vec(&w));
        worst = worst.max(f);
        per_factor.push(f);
        kakutani.push(n as f64 * (1.0 - f));
        level_fidelities.push(vector_fidelity(&chi_vec, &symj.mul_vec(&chi_vec)));
    }
    report.push(
        Check::new("per_factor_fidelity", worst, 1e-12).anchored("F(φ_1, φ_1 ∘ Ad v^j) = 0, j = 1, …, k-1"),
    );
    report.derive("per_factor_fidelity", json!(per_factor));
    report.derive("kakutani_sum", json!(kakutani));
    report.derive("chi_sigma_fidelity", json!(level_fidelities));

    let step = ladder.step(n, Flavor::Natural)?;
    let chi_a = tensor_power(&phi1(k), n - 1)?;
    let chi_b = tensor_power(&phi1(k), n)?;
    let vmap = gns_intertwiner(&step, &chi_a, &chi_b, 1e-10)?;
    report.push(Check::new("intertwiner_isometry", vmap.isometry_residual(), 1e-10).anchored("V*V = 1"));
    report.derive("intertwiner_shape", json!([vmap.rows(), vmap.cols()]));
    report.notes.push(
        "χ ∘ σ^j (j = 1, …, k-1) are probed for disjointness; product fidelity decay is the finite-level indicator".into(),
    );
    report.notes.push("A ∩ γ(A)' is an infinite-level object; only finite truncations are computed".into());
    Ok(report)
}

fn lift(x: &ComplexMatrix, slot: usize, copies: usize) -> ComplexMatrix {
    let block = x.rows();
    let before = block.pow(slot as u32);
    let after = block.pow((copies - slot - 1) as u32);
    let mut out = x.clone();
    if before > 1 {
        out = ComplexMatrix::identity(before).kron(&out);
    }
    if after > 1 {
        out = out.kron(&ComplexMatrix::identity(after));
    }
    out
}

/// Generators of `γ_n(M_{k^{n-1}})^{⊗m}` and, optionally, the `m`
/// symmetry unitaries `1 ⊗ … ⊗ v^{⊗n} ⊗ … ⊗ 1`.
pub fn tensor_power_generators(step: &EndomorphismStep, copies: usize, symmetry: bool) -> Vec<ComplexMatrix> {
    let m = step.source_dim();
    let mut gens = Vec::new();
    for slot in 0..copies {
        gens.push(lift(&step.apply(&clock(m)), slot, copies));
        gens.push(lift(&step.apply(&shift(m)), slot, copies));
        if symmetry {
            gens.push(lift(&SymmetryAction::new(step.k(), step.level()).matrix(), slot, copies));
        }
    }
    gens
}

/// `m`-fold tensor power of the apparatus data at level `n`: surrogate
/// commutant with all symmetries adjoined (expected dimension `k^m`) and
/// its minimal projections (expected rank `k^{m(n-1)}` each).
pub fn build_tensor_power(k: usize, n: usize, copies: usize) -> Result<ScenarioReport> {
    if k < 2 || n < 1 || copies == 0 {
        return Err(Error::InvalidArgument(format!("need k >= 2, n >= 1, m >= 1 (got {k}, {n}, {copies})")));
    }
    let dim = checked_pow(k, n * copies)?;
    if dim > TENSOR_POWER_CAP {
        return Err(Error::DimensionCap { dim, cap: TENSOR_POWER_CAP });
    }
    let mut report = ScenarioReport::new(0, json!({"k": k, "levels": n, "copies": copies}));
    let step = EndomorphismStep::new(k, n, Flavor::Natural)?;
    let comm = commutant_of_generators(&tensor_power_generators(&step, copies, true), dim)?;
    let expected = k.pow(copies as u32);
    report.push(
        Check::new("commutant_dim", (comm.dim() as f64 - expected as f64).abs(), 0.0)
            .anchored("π(γ^{⊗m}(A))' ∩ {σ}' ≅ ℓ^∞(Ĝ^m)"),
    );
    let projections = minimal_central_projections(&comm, PROJECTION_TOL)?;
    let rank = k.pow((copies * (n - 1)) as u32);
    let ranks: Vec<usize> = projections.iter().map(|p| p.trace().re.round() as usize).collect();
    let rank_err = ranks.iter().map(|&r| (r as f64 - rank as f64).abs()).fold(0.0, f64::max);
    report.push(
        Check::new("projection_count", (projections.len() as f64 - expected as f64).abs(), 0.0)
            .anchored("k^m outcomes"),
    );
    report.push(Check::new("projection_rank", rank_err, 0.0).anchored("rank E = k^{m(n-1)}"));
    let apparatus_vector = basis_vector(dim, 0);
    let weights: Vec<f64> = projections
        .iter()
        .map(|p| p.mul_vec(&apparatus_vector).iter().zip(&apparatus_vector).map(|(a, b)| (b.conj() * a).re).sum())
        .collect();
    report.derive("commutant_dim", json!(comm.dim()));
    report.derive("projection_ranks", json!(ranks));
    report.derive("apparatus_weights", json!(weights));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn section2_povm_is_diagonal() {
        let p = build_section2(2, 2, Flavor::Natural, None).unwrap();
        let povm = instrument_from_process(&p).povm();
        for (i, e) in povm.elements.iter().enumerate() {
            assert!((e - &ComplexMatrix::unit(2, i, i)).max_abs() < 1e-12);
        }
        // u_1 is the identity block.
        let u = p.unitary();
        for r in 0..4 {
            for c in 0..4 {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert!((u[(r, c)] - C64::new(expect, 0.0)).norm() < 1e-15);
            }
        }
        assert!(u.unitarity_residual() < 1e-12);
    }

    #[test]
    fn section2_law_for_diagonal_state() {
        let p = build_section2(2, 3, Flavor::Natural, None).unwrap();
        let phi = State::diagonal(&[0.3, 0.7]).unwrap();
        let r = run_section2_check(&p, &phi, 10_000, 42, 1e-9).unwrap();
        assert!(r.passed(), "{}", r.to_json_pretty());
        let w = r.derived["weights"].as_array().unwrap();
        assert!((w[0].as_f64().unwrap() - 0.3).abs() < 1e-10);
        assert_eq!(r.derived["commutant_dim_with_symmetry"], json!(2));
        assert_eq!(r.derived["commutant_dim_without_symmetry"], json!(4));
    }

    #[test]
    fn section2_identity_branch() {
        let p = build_section2(2, 3, Flavor::Generic, None).unwrap();
        let p = p.with_unitary(ComplexMatrix::identity(p.combined_dim())).unwrap();
        let phi = State::diagonal(&[0.3, 0.7]).unwrap();
        let r = run_section2_check(&p, &phi, 0, 42, 1e-9).unwrap();
        assert!(r.passed(), "{}", r.to_json_pretty());
        assert_eq!(r.derived["no_information_gained"], Value::Bool(true));
    }

    #[test]
    fn section2_override_out_of_range() {
        let bad = vec![basis_vector(4, 0), basis_vector(4, 0)];
        assert!(matches!(
            build_section2(2, 2, Flavor::Natural, Some(&bad)),
            Err(Error::NotInRange { index: 2, .. })
        ));
        let good = vec![basis_vector(4, 3), basis_vector(4, 2)];
        let p = build_section2(2, 2, Flavor::Natural, Some(&good)).unwrap();
        assert_eq!(p.phi_vector(), &good[0][..]);
    }

    #[test]
    fn chi_report() {
        let r = build_chi_scenario(2, 4).unwrap();
        assert!(r.passed(), "{}", r.to_json_pretty());
        let r = build_chi_scenario(3, 3).unwrap();
        assert!(r.passed(), "{}", r.to_json_pretty());
    }

    #[test]
    fn tensor_power_dims() {
        let r = build_tensor_power(2, 2, 1).unwrap();
        assert!(r.passed(), "{}", r.to_json_pretty());
        assert_eq!(r.derived["commutant_dim"], json!(2));
        let r = build_tensor_power(2, 2, 2).unwrap();
        assert!(r.passed(), "{}", r.to_json_pretty());
        assert_eq!(r.derived["projection_ranks"], json!([4, 4, 4, 4]));
        assert!(matches!(build_tensor_power(4, 4, 2), Err(Error::DimensionCap { .. })));
    }
}
