//! *-subalgebras of `M_N`: generation, commutants, centers and minimal
//! central projections.
//!
//! Commutants are null spaces of the commutation equations `[Q, g] = 0`.
//! The unknown `Q` is first restricted to the block-diagonal operators in
//! the eigenbasis of one Hermitian element of the algebra (every solution
//! commutes with it), which shrinks the system from `N²` unknowns to
//! `Σ m_c²`, where `m_c` are the eigenvalue cluster sizes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64, ONE, ZERO};

/// Default span-membership tolerance (relative, Hilbert-Schmidt norm).
pub const SPAN_TOL: f64 = 1e-10;

/// Subalgebras whose basis is at most this large contribute every basis
/// element to the commutation equations; larger ones contribute a few
/// generic Hermitian elements, which generate the same algebra.
const EXACT_CONSTRAINT_LIMIT: usize = 64;

/// Relative cut on singular values of the commutation system. The system is
/// solved through its Gram matrix, so eigenvalues of the Gram matrix are
/// compared against the square of this value.
const NULL_SPACE_REL_CUT: f64 = 1e-6;

/// A unital *-closed span inside `M_N` with an orthonormal basis under the
/// trace inner product `<a, b> = Tr(a* b)`.
#[derive(Clone, Debug)]
pub struct SubAlgebra {
    ambient_dim: usize,
    basis: Vec<ComplexMatrix>,
    unital: bool,
}

/// A `d x d` system of matrix units `e_ij` in an ambient matrix algebra,
/// stored row-major (`units[i * d + j] = e_ij`).
#[derive(Clone, Debug)]
pub struct MatrixUnits {
    d: usize,
    units: Vec<ComplexMatrix>,
}

impl SubAlgebra {
    /// Wrap an already orthonormal family. Closure is not re-checked; see
    /// [`SubAlgebra::validate`].
    pub fn from_orthonormal(ambient_dim: usize, basis: Vec<ComplexMatrix>, unital: bool) -> Self {
        Self {
            ambient_dim,
            basis,
            unital,
        }
    }

    /// Orthonormalise a spanning family (modified Gram-Schmidt with rank cut
    /// at `tol` relative to the largest input norm).
    pub fn from_spanning(
        ambient_dim: usize,
        family: &[ComplexMatrix],
        unital: bool,
        tol: f64,
    ) -> Result<Self> {
        for m in family {
            check_dims(m, ambient_dim)?;
        }
        let mut basis = Vec::new();
        let scale = family.iter().map(|m| m.frobenius_norm()).fold(0.0, f64::max);
        for m in family {
            try_extend(&mut basis, m.clone(), tol * scale.max(f64::MIN_POSITIVE));
        }
        Ok(Self {
            ambient_dim,
            basis,
            unital,
        })
    }

    pub fn scalars(n: usize) -> Self {
        let unit = ComplexMatrix::identity(n).scale_real(1.0 / (n as f64).sqrt());
        Self::from_orthonormal(n, vec![unit], true)
    }

    pub fn full(n: usize) -> Self {
        let basis = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| ComplexMatrix::unit(n, i, j))
            .collect();
        Self::from_orthonormal(n, basis, true)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[ComplexMatrix] {
        &self.basis
    }

    pub fn is_unital(&self) -> bool {
        self.unital
    }

    /// Orthogonal projection of `x` onto the span.
    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.ambient_dim, self.ambient_dim);
        for b in &self.basis {
            out.add_scaled(b.inner(x), b);
        }
        out
    }

    /// `‖x - P(x)‖₂ / max(‖x‖₂, tiny)`
    pub fn membership_residual(&self, x: &ComplexMatrix) -> f64 {
        let norm = x.frobenius_norm();
        if norm == 0.0 {
            return 0.0;
        }
        (x - &self.project(x)).frobenius_norm() / norm
    }

    pub fn contains(&self, x: &ComplexMatrix, tol: f64) -> bool {
        self.membership_residual(x) <= tol
    }

    /// Same span as `other` (mutual containment of bases).
    pub fn same_span(&self, other: &Self, tol: f64) -> bool {
        self.dim() == other.dim()
            && other.basis.iter().all(|b| self.contains(b, tol))
            && self.basis.iter().all(|b| other.contains(b, tol))
    }

    /// Worst residual of the *-algebra axioms: adjoint closure, product
    /// closure, identity membership (if unital) and basis orthonormality.
    pub fn closure_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.basis.iter().enumerate() {
            worst = worst.max(self.membership_residual(&a.adjoint()));
            for (j, b) in self.basis.iter().enumerate() {
                let g = a.inner(b);
                let expect = if i == j { ONE } else { ZERO };
                worst = worst.max((g - expect).norm());
                worst = worst.max(self.membership_residual(&a.matmul(b)));
            }
        }
        if self.unital {
            worst = worst.max(self.membership_residual(&ComplexMatrix::identity(self.ambient_dim)));
        }
        worst
    }

    pub fn validate(&self, tol: f64) -> Result<()> {
        let r = self.closure_residual();
        if r > tol {
            return Err(Error::InvalidArgument(format!(
                "span is not a *-subalgebra (closure residual {r:e})"
            )));
        }
        Ok(())
    }

    /// Worst pairwise commutator of basis elements.
    pub fn abelian_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (i, a) in self.basis.iter().enumerate() {
            for b in &self.basis[i + 1..] {
                worst = worst.max(a.commutator(b).max_abs());
            }
        }
        worst
    }

    /// Intersection of two spans inside the same ambient algebra, computed
    /// from the principal angles between them.
    pub fn intersect(&self, other: &Self, tol: f64) -> Result<Self> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch(format!(
                "ambient {} vs {}",
                self.ambient_dim, other.ambient_dim
            )));
        }
        let (small, large) = if self.dim() <= other.dim() {
            (self, other)
        } else {
            (other, self)
        };
        if small.dim() == 0 {
            return Ok(Self::from_orthonormal(self.ambient_dim, vec![], false));
        }
        let overlap = ComplexMatrix::from_fn(large.dim(), small.dim(), |i, j| {
            large.basis[i].inner(&small.basis[j])
        });
        let svd = overlap.adjoint().svd();
        // Rows of v_adj are right singular vectors in the coordinates of
        // `large`; σ ≈ 1 marks shared directions.
        let angle_tol = tol.sqrt().max(1e-8);
        let mut family = Vec::new();
        for (idx, &s) in svd.s.iter().enumerate() {
            if s >= 1.0 - angle_tol {
                let mut x = ComplexMatrix::zeros(self.ambient_dim, self.ambient_dim);
                for (j, b) in large.basis.iter().enumerate() {
                    x.add_scaled(svd.v_adj[(idx, j)].conj(), b);
                }
                family.push(x);
            }
        }
        let unital = self.unital && other.unital;
        Self::from_spanning(self.ambient_dim, &family, unital, tol)
    }

    /// A generic Hermitian element (deterministic pseudo-random real
    /// coefficients on the Hermitian parts of the basis).
    pub fn generic_hermitian(&self, salt: u64) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(0x6a09_e667_f3bc_c908 ^ salt);
        let n = self.ambient_dim;
        let mut acc = ComplexMatrix::zeros(n, n);
        for b in &self.basis {
            let re: f64 = rng.random_range(-1.0..1.0);
            let im: f64 = rng.random_range(-1.0..1.0);
            acc.add_scaled(C64::new(re, im), b);
        }
        acc.hermitian_part()
    }

    /// Matrices whose common commutant equals the commutant of the span.
    fn constraint_set(&self) -> Vec<ComplexMatrix> {
        if self.dim() <= EXACT_CONSTRAINT_LIMIT {
            self.basis.iter().flat_map(hermitian_split).collect()
        } else {
            (1..=3).map(|s| self.generic_hermitian(s)).collect()
        }
    }
}

impl MatrixUnits {
    pub fn new(units: Vec<ComplexMatrix>, tol: f64) -> Result<Self> {
        let d = (units.len() as f64).sqrt().round() as usize;
        if d * d != units.len() || d == 0 {
            return Err(Error::InvalidArgument(format!(
                "{} matrices do not form a square family of matrix units",
                units.len()
            )));
        }
        let mu = Self { d, units };
        let r = mu.residual();
        if r > tol {
            return Err(Error::InvalidArgument(format!(
                "matrix unit relations violated (residual {r:e})"
            )));
        }
        Ok(mu)
    }

    pub fn standard(d: usize) -> Self {
        let units = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| ComplexMatrix::unit(d, i, j))
            .collect();
        Self { d, units }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn get(&self, i: usize, j: usize) -> &ComplexMatrix {
        &self.units[i * self.d + j]
    }

    pub fn units(&self) -> &[ComplexMatrix] {
        &self.units
    }

    pub fn ambient_dim(&self) -> usize {
        self.units[0].rows()
    }

    /// Worst violation of `e_ij e_kl = δ_jk e_il`, `Σ e_ii = 1`, `e_ij* = e_ji`.
    pub fn residual(&self) -> f64 {
        let d = self.d;
        let n = self.ambient_dim();
        let zero = ComplexMatrix::zeros(n, n);
        let mut worst = 0.0f64;
        let mut sum = ComplexMatrix::zeros(n, n);
        for i in 0..d {
            sum += self.get(i, i);
            for j in 0..d {
                worst = worst.max((&self.get(i, j).adjoint() - self.get(j, i)).max_abs());
                for k in 0..d {
                    for l in 0..d {
                        let prod = self.get(i, j).matmul(self.get(k, l));
                        let expect = if j == k { self.get(i, l) } else { &zero };
                        worst = worst.max((&prod - expect).max_abs());
                    }
                }
            }
        }
        worst.max((&sum - &ComplexMatrix::identity(n)).max_abs())
    }

    /// Expand `x = Σ x_ij e_ij`.
    pub fn embed(&self, x: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(x.rows(), self.d);
        let n = self.ambient_dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..self.d {
            for j in 0..self.d {
                let c = x[(i, j)];
                if c != ZERO {
                    out.add_scaled(c, self.get(i, j));
                }
            }
        }
        out
    }
}

fn check_dims(m: &ComplexMatrix, n: usize) -> Result<()> {
    if m.rows() != n || m.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix in ambient M_{n}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

/// Hermitian and anti-Hermitian parts `(g + g*)/2`, `(g - g*)/2i`.
fn hermitian_split(g: &ComplexMatrix) -> Vec<ComplexMatrix> {
    let re = g.hermitian_part();
    let im = (g - &g.adjoint()).scale(C64::new(0.0, -0.5));
    let mut out = Vec::with_capacity(2);
    if re.max_abs() > 0.0 {
        out.push(re);
    }
    if im.max_abs() > 0.0 {
        out.push(im);
    }
    out
}

/// Gram-Schmidt step (two passes): append the normalised residual of `x`
/// when it exceeds `abs_tol`. Returns whether the span grew.
fn try_extend(basis: &mut Vec<ComplexMatrix>, mut x: ComplexMatrix, abs_tol: f64) -> bool {
    for _ in 0..2 {
        for b in basis.iter() {
            let c = b.inner(&x);
            x.add_scaled(-c, b);
        }
    }
    let norm = x.frobenius_norm();
    if norm > abs_tol {
        basis.push(x.scale_real(1.0 / norm));
        true
    } else {
        false
    }
}

/// Smallest unital *-closed span containing the generators (word closure
/// followed by orthonormalisation).
pub fn generated_algebra(
    generators: &[ComplexMatrix],
    ambient_dim: usize,
    tol: f64,
) -> Result<SubAlgebra> {
    for g in generators {
        check_dims(g, ambient_dim)?;
    }
    let mut basis: Vec<ComplexMatrix> = Vec::new();
    let identity = ComplexMatrix::identity(ambient_dim);
    let scale = generators
        .iter()
        .map(|g| g.frobenius_norm())
        .fold(identity.frobenius_norm(), f64::max);
    let abs_tol = tol * scale;
    try_extend(&mut basis, identity, abs_tol);
    let mut frontier = 0;
    for g in generators {
        try_extend(&mut basis, g.clone(), abs_tol);
        try_extend(&mut basis, g.adjoint(), abs_tol);
    }
    // Words: every new element is multiplied on both sides by everything
    // already present. Products of unit-norm basis elements stay bounded.
    while frontier < basis.len() {
        let x = basis[frontier].clone();
        let mut j = 0;
        while j < basis.len() {
            let y = basis[j].clone();
            try_extend(&mut basis, x.matmul(&y), tol);
            try_extend(&mut basis, y.matmul(&x), tol);
            j += 1;
        }
        frontier += 1;
        if basis.len() > ambient_dim * ambient_dim {
            break;
        }
    }
    Ok(SubAlgebra::from_orthonormal(ambient_dim, basis, true))
}

/// Commutant `{Q : Qb = bQ for all b in s}`.
pub fn commutant(s: &SubAlgebra) -> SubAlgebra {
    let constraints = s.constraint_set();
    let pivot = if s.dim() <= EXACT_CONSTRAINT_LIMIT {
        s.generic_hermitian(0)
    } else {
        constraints[0].clone()
    };
    commutant_of_constraints(s.ambient_dim, &pivot, &constraints)
}

/// Commutant of the *-algebra generated by `generators`.
pub fn commutant_of_generators(generators: &[ComplexMatrix], ambient_dim: usize) -> Result<SubAlgebra> {
    for g in generators {
        check_dims(g, ambient_dim)?;
    }
    let constraints: Vec<ComplexMatrix> = generators.iter().flat_map(hermitian_split).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0xbb67_ae85_84ca_a73b);
    let mut pivot = ComplexMatrix::zeros(ambient_dim, ambient_dim);
    for c in &constraints {
        pivot.add_scaled(C64::new(rng.random_range(0.5..1.5), 0.0), c);
    }
    Ok(commutant_of_constraints(ambient_dim, &pivot, &constraints))
}

/// Commutant of several subalgebras together with extra generators.
pub fn joint_commutant(parts: &[&SubAlgebra], extra: &[ComplexMatrix]) -> Result<SubAlgebra> {
    let n = parts
        .first()
        .map(|p| p.ambient_dim)
        .or_else(|| extra.first().map(|e| e.rows()))
        .ok_or(Error::Empty("joint_commutant inputs"))?;
    let mut constraints = Vec::new();
    let mut pivot = ComplexMatrix::zeros(n, n);
    for (i, p) in parts.iter().enumerate() {
        if p.ambient_dim != n {
            return Err(Error::DimensionMismatch("joint_commutant parts".into()));
        }
        constraints.extend(p.constraint_set());
        pivot += &p.generic_hermitian(100 + i as u64);
    }
    for e in extra {
        check_dims(e, n)?;
        let split = hermitian_split(e);
        for (j, h) in split.iter().enumerate() {
            pivot.add_scaled(C64::new(0.37 + 0.11 * j as f64, 0.0), h);
        }
        constraints.extend(split);
    }
    Ok(commutant_of_constraints(n, &pivot, &constraints))
}

struct Cluster {
    start: usize,
    len: usize,
    offset: usize,
}

/// Null space of `Q ↦ ([Q, g])_g` over the Hermitian constraints `g`,
/// restricted to operators block-diagonal in the eigenbasis of the Hermitian
/// `pivot`, which must lie in the algebra generated by the constraints.
fn commutant_of_constraints(n: usize, pivot: &ComplexMatrix, constraints: &[ComplexMatrix]) -> SubAlgebra {
    let eig = pivot.eigh();
    let spread = eig.values.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1.0);
    let cluster_tol = 1e-8 * spread;
    let mut clusters: Vec<Cluster> = Vec::new();
    let mut offset = 0;
    let mut start = 0;
    for i in 1..=n {
        if i == n || eig.values[i] - eig.values[i - 1] > cluster_tol {
            let len = i - start;
            clusters.push(Cluster { start, len, offset });
            offset += len * len;
            start = i;
        }
    }
    let params = offset;
    let v = &eig.vectors;
    let v_adj = v.adjoint();
    let mut rotated: Vec<ComplexMatrix> = constraints.iter().map(|g| v_adj.matmul(g).matmul(v)).collect();
    // The pivot itself pins Q inside clusters that merged distinct eigenvalues.
    rotated.push(ComplexMatrix::from_real_diagonal(&eig.values));

    let scale = rotated.iter().map(|g| g.max_abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let skip = 1e-14 * scale;

    // Gram matrix of the stacked equations; each equation touches only the
    // two diagonal blocks Q_c and Q_d.
    let mut gram = vec![ZERO; params * params];
    let mut row_idx: Vec<usize> = Vec::new();
    let mut row_val: Vec<C64> = Vec::new();
    for_each_equation(&clusters, &rotated, skip, &mut row_idx, &mut row_val, |idx, val| {
        for (a, &ia) in idx.iter().enumerate() {
            let ca = val[a].conj();
            let base = ia * params;
            for (b, &ib) in idx.iter().enumerate() {
                gram[base + ib] += ca * val[b];
            }
        }
    });
    let gram = ComplexMatrix::new(params, params, gram).expect("finite gram");
    let ge = gram.eigh();
    let top = ge.values.last().copied().unwrap_or(0.0).max(0.0);
    let floor = 1e-24 * scale * scale;
    let cut = (NULL_SPACE_REL_CUT * NULL_SPACE_REL_CUT * top).max(floor);
    let null_count = ge.values.iter().filter(|&&x| x <= cut).count();
    let mut null_vecs: Vec<Vec<C64>> = (0..null_count).map(|c| ge.vectors.col(c)).collect();

    // One step of refinement against the exact equations: subtract the
    // component of A*A z lying in the non-null eigenspace.
    if null_count > 0 && null_count < params {
        for z in null_vecs.iter_mut() {
            let mut az = vec![ZERO; params];
            for_each_equation(&clusters, &rotated, skip, &mut row_idx, &mut row_val, |idx, val| {
                let r: C64 = idx.iter().zip(val).map(|(&i, &c)| c * z[i]).sum();
                for (&i, &c) in idx.iter().zip(val) {
                    az[i] += c.conj() * r;
                }
            });
            for c in null_count..params {
                let lam = ge.values[c];
                if lam <= 0.0 {
                    continue;
                }
                let w = ge.vectors.col(c);
                let coeff: C64 = w.iter().zip(&az).map(|(a, b)| a.conj() * b).sum::<C64>() / lam;
                for (zi, wi) in z.iter_mut().zip(&w) {
                    *zi -= coeff * wi;
                }
            }
        }
    }

    let mut family = Vec::with_capacity(null_count);
    for z in &null_vecs {
        let mut block = ComplexMatrix::zeros(n, n);
        for cl in &clusters {
            for r in 0..cl.len {
                for c in 0..cl.len {
                    block[(cl.start + r, cl.start + c)] = z[cl.offset + r * cl.len + c];
                }
            }
        }
        family.push(v.matmul(&block).matmul(&v_adj));
    }
    let mut basis = Vec::with_capacity(family.len());
    for f in family {
        try_extend(&mut basis, f, 1e-6);
    }
    SubAlgebra::from_orthonormal(n, basis, true)
}

fn for_each_equation(
    clusters: &[Cluster],
    rotated: &[ComplexMatrix],
    skip: f64,
    idx: &mut Vec<usize>,
    val: &mut Vec<C64>,
    mut sink: impl FnMut(&[usize], &[C64]),
) {
    for g in rotated {
        for c in clusters {
            for d in clusters {
                let mut any = false;
                'scan: for r in 0..c.len {
                    for s in 0..d.len {
                        if g[(c.start + r, d.start + s)].norm() > skip {
                            any = true;
                            break 'scan;
                        }
                    }
                }
                if !any {
                    continue;
                }
                // (Q_c g_cd - g_cd Q_d)[r, s]
                for r in 0..c.len {
                    for s in 0..d.len {
                        idx.clear();
                        val.clear();
                        for t in 0..c.len {
                            let coeff = g[(c.start + t, d.start + s)];
                            if coeff.norm() > skip {
                                idx.push(c.offset + r * c.len + t);
                                val.push(coeff);
                            }
                        }
                        for t in 0..d.len {
                            let coeff = g[(c.start + r, d.start + t)];
                            if coeff.norm() > skip {
                                let key = d.offset + t * d.len + s;
                                if let Some(p) = idx.iter().position(|&k| k == key) {
                                    val[p] -= coeff;
                                } else {
                                    idx.push(key);
                                    val.push(-coeff);
                                }
                            }
                        }
                        if !idx.is_empty() {
                            sink(idx, val);
                        }
                    }
                }
            }
        }
    }
}

/// Center `s ∩ s'`. Abelian spans are their own center.
pub fn center(s: &SubAlgebra) -> Result<SubAlgebra> {
    let scale = s.basis.iter().map(|b| b.max_abs()).fold(0.0, f64::max).max(1.0);
    if s.abelian_residual() <= SPAN_TOL * scale {
        return Ok(s.clone());
    }
    s.intersect(&commutant(s), SPAN_TOL)
}

/// Minimal projections of the (abelian) center of `s`: mutually orthogonal,
/// summing to the identity, ordered by descending rank and then by
/// descending lexicographic order of their diagonals.
pub fn minimal_central_projections(s: &SubAlgebra, tol: f64) -> Result<Vec<ComplexMatrix>> {
    let z = center(s)?;
    let n = s.ambient_dim;
    let abelian = z.abelian_residual();
    if abelian > tol.max(SPAN_TOL) {
        return Err(Error::NonAbelianCenter(abelian));
    }
    let generator = z.generic_hermitian(7);
    let eig = generator.eigh();
    let spread = eig.values.iter().fold(0.0f64, |a, &b| a.max(b.abs())).max(1e-300);
    let cluster_tol = 1e-7 * spread;
    let mut projections = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || eig.values[i] - eig.values[i - 1] > cluster_tol {
            let cols: Vec<Vec<C64>> = (start..i).map(|c| eig.vectors.col(c)).collect();
            let vecs = ComplexMatrix::from_columns(n, &cols);
            projections.push(vecs.matmul(&vecs.adjoint()));
            start = i;
        }
    }
    for p in &projections {
        let idem = (&p.matmul(p) - p).max_abs().max(p.hermitian_residual());
        let member = z.membership_residual(p);
        let residual = idem.max(member);
        if residual > tol {
            return Err(Error::NotProjection { residual, tol });
        }
    }
    if projections.len() != z.dim() {
        return Err(Error::NotProjection {
            residual: (projections.len() as f64 - z.dim() as f64).abs(),
            tol,
        });
    }
    sort_projections(&mut projections);
    Ok(projections)
}

/// Canonical order: descending rank, then descending lexicographic
/// comparison of the real diagonals.
pub fn sort_projections(projections: &mut [ComplexMatrix]) {
    projections.sort_by(|a, b| {
        let ra = a.trace().re.round() as i64;
        let rb = b.trace().re.round() as i64;
        rb.cmp(&ra).then_with(|| {
            for (x, y) in a.diagonal().iter().zip(b.diagonal()) {
                let (x, y) = (x.re, y.re);
                if (x - y).abs() > 1e-9 {
                    return y.total_cmp(&x);
                }
            }
            std::cmp::Ordering::Equal
        })
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(v)
    }

    #[test]
    fn generated_by_single_matrix_unit_is_full() {
        let e12 = ComplexMatrix::unit(2, 0, 1);
        let a = generated_algebra(&[e12], 2, SPAN_TOL).unwrap();
        assert_eq!(a.dim(), 4);
        assert!(a.closure_residual() < 1e-12);
    }

    #[test]
    fn generated_by_nothing_is_scalars() {
        let a = generated_algebra(&[], 2, SPAN_TOL).unwrap();
        assert_eq!(a.dim(), 1);
    }

    #[test]
    fn generated_by_diagonal_is_diagonals() {
        let a = generated_algebra(&[diag(&[1.0, -1.0])], 2, SPAN_TOL).unwrap();
        assert_eq!(a.dim(), 2);
        let again = generated_algebra(a.basis(), 2, SPAN_TOL).unwrap();
        assert!(a.same_span(&again, 1e-10));
    }

    #[test]
    fn generated_algebra_rejects_wrong_size() {
        let r = generated_algebra(&[ComplexMatrix::identity(3)], 2, SPAN_TOL);
        assert!(matches!(r, Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn commutant_examples() {
        assert_eq!(commutant(&SubAlgebra::full(2)).dim(), 1);
        assert_eq!(commutant(&SubAlgebra::scalars(2)).dim(), 4);
        let d4 = generated_algebra(&[diag(&[1.0, -1.0, -1.0, 1.0])], 4, SPAN_TOL).unwrap();
        assert_eq!(d4.dim(), 2);
        let c = commutant(&d4);
        assert_eq!(c.dim(), 8);
        for q in c.basis() {
            assert!(q.commutator(&diag(&[1.0, -1.0, -1.0, 1.0])).max_abs() < 1e-12);
        }
    }

    #[test]
    fn commutant_of_ma_tensor_scalars_has_dim_b_squared() {
        for (a, b) in [(2usize, 2usize), (2, 3), (3, 2)] {
            let gens: Vec<ComplexMatrix> = (0..a)
                .flat_map(|i| (0..a).map(move |j| (i, j)))
                .map(|(i, j)| ComplexMatrix::unit(a, i, j).kron(&ComplexMatrix::identity(b)))
                .collect();
            let s = SubAlgebra::from_spanning(a * b, &gens, true, SPAN_TOL).unwrap();
            assert_eq!(commutant(&s).dim(), b * b, "a={a} b={b}");
        }
    }

    #[test]
    fn double_commutant_recovers_algebra() {
        let x = ComplexMatrix::unit(2, 0, 1).kron(&ComplexMatrix::identity(2));
        let z = diag(&[1.0, 2.0, 3.0, 3.0]);
        let s = generated_algebra(&[x, z], 4, SPAN_TOL).unwrap();
        let cc = commutant(&commutant(&s));
        assert!(cc.same_span(&s, 1e-9), "dims {} vs {}", cc.dim(), s.dim());
    }

    #[test]
    fn center_examples() {
        assert_eq!(center(&SubAlgebra::full(2)).unwrap().dim(), 1);
        let blocks: Vec<ComplexMatrix> = [0usize, 2]
            .iter()
            .flat_map(|&o| {
                (0..2).flat_map(move |i| (0..2).map(move |j| ComplexMatrix::unit(4, o + i, o + j)))
            })
            .collect();
        let s = SubAlgebra::from_spanning(4, &blocks, true, SPAN_TOL).unwrap();
        assert_eq!(s.dim(), 8);
        assert_eq!(center(&s).unwrap().dim(), 2);
        let ab = generated_algebra(&[diag(&[1.0, 2.0, 3.0])], 3, SPAN_TOL).unwrap();
        assert!(center(&ab).unwrap().same_span(&ab, 1e-10));
    }

    #[test]
    fn minimal_projections_of_diagonal_algebra() {
        let s = generated_algebra(&[diag(&[1.0, -1.0])], 2, SPAN_TOL).unwrap();
        let p = minimal_central_projections(&s, 1e-10).unwrap();
        assert_eq!(p.len(), 2);
        assert!((&p[0] - &ComplexMatrix::unit(2, 0, 0)).max_abs() < 1e-12);
        assert!((&p[1] - &ComplexMatrix::unit(2, 1, 1)).max_abs() < 1e-12);
    }

    #[test]
    fn minimal_projections_of_factor() {
        let p = minimal_central_projections(&SubAlgebra::full(2), 1e-10).unwrap();
        assert_eq!(p.len(), 1);
        assert!((&p[0] - &ComplexMatrix::identity(2)).max_abs() < 1e-12);
    }

    #[test]
    fn minimal_projections_sorted_by_rank_first() {
        let s = generated_algebra(&[diag(&[1.0, 2.0, 2.0])], 3, SPAN_TOL).unwrap();
        let p = minimal_central_projections(&s, 1e-10).unwrap();
        assert!((p[0].trace().re - 2.0).abs() < 1e-12);
        assert!((&p[1] - &ComplexMatrix::unit(3, 0, 0)).max_abs() < 1e-12);
    }

    #[test]
    fn matrix_units_validate() {
        assert!(MatrixUnits::standard(3).residual() < 1e-15);
        let bad = vec![ComplexMatrix::identity(2); 4];
        assert!(MatrixUnits::new(bad, 1e-12).is_err());
    }

    #[test]
    fn intersection_of_spans() {
        let a = generated_algebra(&[diag(&[1.0, 2.0, 3.0])], 3, SPAN_TOL).unwrap();
        let b = generated_algebra(&[diag(&[1.0, 1.0, 3.0])], 3, SPAN_TOL).unwrap();
        assert_eq!(a.intersect(&b, SPAN_TOL).unwrap().dim(), 2);
    }
}
