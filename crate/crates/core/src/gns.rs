//! GNS representations of states on `M_N`, intertwiners between them, and
//! the two-dimensional transitivity unitary.
//!
//! For `ρ = Σ_t λ_t g_t g_t*` (rank `r`), the map `[a] ↦ Σ_t √λ_t (a g_t) ⊗ e_t`
//! identifies the GNS space with `C^N ⊗ C^r`; there `π(x) = x ⊗ 1_r` and
//! `Ω = Σ_t √λ_t g_t ⊗ e_t`.

use crate::algebra::{commutant_of_generators, SubAlgebra};
use crate::error::{Error, Result};
use crate::matrix::{vec_inner, vec_norm, ComplexMatrix, C64, ONE, ZERO};
use crate::state::State;

/// Relative eigenvalue cut for the rank of the GNS form.
pub const GNS_RANK_CUT: f64 = 1e-10;

/// A linear map between full matrix algebras.
pub trait AlgebraMap {
    fn source_dim(&self) -> usize;
    fn target_dim(&self) -> usize;
    fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix;
}

/// The identity map on `M_N`.
pub struct IdentityMap(pub usize);

impl AlgebraMap for IdentityMap {
    fn source_dim(&self) -> usize {
        self.0
    }
    fn target_dim(&self) -> usize {
        self.0
    }
    fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        x.clone()
    }
}

/// `Ad(u): x ↦ u x u*`.
pub struct AdMap(pub ComplexMatrix);

impl AlgebraMap for AdMap {
    fn source_dim(&self) -> usize {
        self.0.rows()
    }
    fn target_dim(&self) -> usize {
        self.0.rows()
    }
    fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        x.conjugate_by(&self.0)
    }
}

/// GNS triple of a state on `M_N`.
#[derive(Clone, Debug)]
pub struct GnsRep {
    source_dim: usize,
    multiplicity: usize,
    /// `Ω` as an `N x r` matrix: column `t` is `√λ_t g_t`.
    omega: ComplexMatrix,
}

impl GnsRep {
    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn rep_dim(&self) -> usize {
        self.source_dim * self.multiplicity
    }

    /// Rank `r` of the density; `π` is `r` copies of the identity representation.
    pub fn multiplicity(&self) -> usize {
        self.multiplicity
    }

    /// `π(x) = x ⊗ 1_r`.
    pub fn rep(&self, x: &ComplexMatrix) -> ComplexMatrix {
        x.kron(&ComplexMatrix::identity(self.multiplicity))
    }

    pub fn cyclic_vector(&self) -> Vec<C64> {
        self.omega.data().to_vec()
    }

    /// `π(a) Ω`, the class `[a]`.
    pub fn vector_of(&self, a: &ComplexMatrix) -> Vec<C64> {
        a.matmul(&self.omega).into_data()
    }

    /// Worst of the GNS invariants over matrix units: `<Ω, π(e_ij) Ω> = φ(e_ij)`,
    /// multiplicativity, *-preservation, and cyclicity (`1` if not cyclic).
    pub fn invariant_residual(&self, phi: &State) -> f64 {
        let n = self.source_dim;
        let omega = self.cyclic_vector();
        let mut worst = 0.0f64;
        let mut vectors = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let e = ComplexMatrix::unit(n, i, j);
                let pe = self.rep(&e);
                let value = vec_inner(&omega, &pe.mul_vec(&omega));
                worst = worst.max((value - phi.expect(&e)).norm());
                worst = worst.max((&self.rep(&e.adjoint()) - &pe.adjoint()).max_abs());
                for l in 0..n {
                    let f = ComplexMatrix::unit(n, j, l);
                    let lhs = pe.matmul(&self.rep(&f));
                    worst = worst.max((&lhs - &self.rep(&e.matmul(&f))).max_abs());
                }
                vectors.push(self.vector_of(&e));
            }
        }
        let span = ComplexMatrix::from_columns(self.rep_dim(), &vectors);
        if span.rank(GNS_RANK_CUT) != self.rep_dim() {
            worst = worst.max(1.0);
        }
        worst
    }

    /// Commutant of `π(M_N)` inside `B(H_φ)`.
    pub fn image_commutant(&self) -> Result<SubAlgebra> {
        let n = self.source_dim;
        let mut gens = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j || i == 0 {
                    gens.push(self.rep(&ComplexMatrix::unit(n, i, j)));
                }
            }
        }
        commutant_of_generators(&gens, self.rep_dim())
    }
}

/// GNS construction for `φ` on `M_N`.
pub fn gns(phi: &State) -> GnsRep {
    let n = phi.dim();
    let eig = phi.density().eigh();
    let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let keep: Vec<usize> = (0..n)
        .rev()
        .filter(|&c| eig.values[c] > GNS_RANK_CUT * top)
        .collect();
    let r = keep.len();
    let omega = ComplexMatrix::from_fn(n, r, |i, t| {
        let c = keep[t];
        eig.vectors[(i, c)] * eig.values[c].sqrt()
    });
    GnsRep {
        source_dim: n,
        multiplicity: r,
        omega,
    }
}

/// Isometry `V: H_a → H_b` with `V [x]_a = [γ(x)]_b`, so that
/// `V π_a(x) = π_b(γ(x)) V` and `V Ω_a = Ω_b`.
pub fn gns_intertwiner(
    gamma: &dyn AlgebraMap,
    phi_a: &State,
    phi_b: &State,
    tol: f64,
) -> Result<ComplexMatrix> {
    let (na, nb) = (gamma.source_dim(), gamma.target_dim());
    if phi_a.dim() != na || phi_b.dim() != nb {
        return Err(Error::DimensionMismatch(format!(
            "map M_{na} → M_{nb} with states on M_{} and M_{}",
            phi_a.dim(),
            phi_b.dim()
        )));
    }
    let rep_a = gns(phi_a);
    let rep_b = gns(phi_b);
    let mut images = Vec::with_capacity(na * na);
    let mut invariance = 0.0f64;
    for i in 0..na {
        for j in 0..na {
            let e = ComplexMatrix::unit(na, i, j);
            let g = gamma.apply(&e);
            invariance = invariance.max((phi_b.expect(&g) - phi_a.expect(&e)).norm());
            images.push(g);
        }
    }
    if invariance > tol {
        return Err(Error::InvarianceViolated(invariance));
    }
    // [e_ij]_a = e_i ⊗ (row j of Ω_a). Rows of Ω_a span C^{r_a}, so V is
    // determined by least squares over the matrix units.
    let da = rep_a.rep_dim();
    let db = rep_b.rep_dim();
    let mut src = Vec::with_capacity(na * na);
    let mut dst = Vec::with_capacity(na * na);
    for i in 0..na {
        for j in 0..na {
            src.push(rep_a.vector_of(&ComplexMatrix::unit(na, i, j)));
            dst.push(rep_b.vector_of(&images[i * na + j]));
        }
    }
    let a = ComplexMatrix::from_columns(da, &src);
    let b = ComplexMatrix::from_columns(db, &dst);
    let v = b.matmul(&pseudo_inverse(&a));
    let iso = v.isometry_residual();
    let omega_res = {
        let va = v.mul_vec(&rep_a.cyclic_vector());
        let ob = rep_b.cyclic_vector();
        va.iter().zip(&ob).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    };
    let mut intertwine = 0.0f64;
    for i in 0..na {
        for j in 0..na {
            let lhs = v.matmul(&rep_a.rep(&ComplexMatrix::unit(na, i, j)));
            let rhs = rep_b.rep(&images[i * na + j]).matmul(&v);
            intertwine = intertwine.max((&lhs - &rhs).max_abs());
        }
    }
    let worst = iso.max(omega_res).max(intertwine);
    if worst > tol.max(1e-9) {
        return Err(Error::IntertwiningFailed(worst));
    }
    Ok(v)
}

fn pseudo_inverse(a: &ComplexMatrix) -> ComplexMatrix {
    let svd = a.svd();
    let top = svd.s.first().copied().unwrap_or(0.0);
    let mut out = ComplexMatrix::zeros(a.cols(), a.rows());
    for (idx, &s) in svd.s.iter().enumerate() {
        if s <= GNS_RANK_CUT * top {
            continue;
        }
        // (v_adj row idx)* (u col idx)* / s
        for r in 0..a.cols() {
            let vr = svd.v_adj[(idx, r)].conj() / s;
            if vr == ZERO {
                continue;
            }
            for c in 0..a.rows() {
                out[(r, c)] += vr * svd.u[(c, idx)].conj();
            }
        }
    }
    out
}

/// Unitary `u` with `u a = b` that is the identity on `span{a, b}⊥`.
///
/// Phase convention: with `⟨a, b⟩ = |⟨a, b⟩| e^{iθ}`, rotate `a` onto
/// `b' = e^{-iθ} b` inside `span{a, b'}`, then multiply the `b'` direction
/// by `e^{iθ}`.
pub fn transitivity_unitary(a: &[C64], b: &[C64]) -> Result<ComplexMatrix> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("vectors of length {} and {}", a.len(), b.len())));
    }
    for v in [a, b] {
        let norm = vec_norm(v);
        if norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotUnit(norm));
        }
    }
    let n = a.len();
    let c = vec_inner(a, b);
    let phase = if c.norm() > 0.0 { c / c.norm() } else { ONE };
    let b_rot: Vec<C64> = b.iter().map(|z| z * phase.conj()).collect();
    let cos = c.norm().min(1.0);
    let perp: Vec<C64> = b_rot.iter().zip(a).map(|(y, x)| y - x * cos).collect();
    let perp_norm = vec_norm(&perp);
    let mut u = ComplexMatrix::identity(n);
    if perp_norm > 1e-15 {
        let e2: Vec<C64> = perp.iter().map(|z| z / perp_norm).collect();
        let sin = (1.0 - cos * cos).max(0.0).sqrt();
        let p1 = ComplexMatrix::outer(a, a);
        let p2 = ComplexMatrix::outer(&e2, &e2);
        u.add_scaled(C64::new(cos - 1.0, 0.0), &(&p1 + &p2));
        u.add_scaled(C64::new(sin, 0.0), &ComplexMatrix::outer(&e2, a));
        u.add_scaled(C64::new(-sin, 0.0), &ComplexMatrix::outer(a, &e2));
    }
    if (phase - ONE).norm() > 0.0 {
        let mut d = ComplexMatrix::identity(n);
        d.add_scaled(phase - ONE, &ComplexMatrix::outer(&b_rot, &b_rot));
        u = d.matmul(&u);
    }
    Ok(u)
}
