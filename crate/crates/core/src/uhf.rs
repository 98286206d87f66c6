//! Finite levels of the UHF algebra `M_k^{⊗n}`: the product symmetry
//! `σ_n = Ad(v^{⊗n})`, its fixed-point blocks, and consistent unital
//! embeddings `γ_n: M_k^{⊗(n-1)} → (M_k^{⊗n})^σ`.
//!
//! Basis vectors of `(C^k)^{⊗n}` are words `w = (w_1, …, w_n)` indexed
//! lexicographically with `w_1` most significant; `x ⊗ 1` acts on the
//! leading slots. `v^{⊗n}` multiplies `e_w` by `ω^{s(w)}` where
//! `s(w) = Σ w_l mod k` is the charge.
//!
//! The block `E_j H` is identified with `C^{k^{n-1}}` by
//! `J_j: e_u ↦ e_{(c, u)}` with `c = j - s(u) mod k`, i.e. the leading slot
//! absorbs the charge and the remaining slots keep their lexicographic
//! order. This choice makes the steps consistent: `γ_n(x ⊗ 1) = γ_{n-1}(x) ⊗ 1`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::algebra::{commutant_of_generators, SubAlgebra};
use crate::error::{Error, Result};
use crate::gns::AlgebraMap;
use crate::matrix::{ComplexMatrix, C64, ONE, ZERO};

/// Largest number of complex entries a materialised algebra basis may hold.
pub const MATERIALIZE_CAP: usize = 1 << 23;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flavor {
    /// `x ↦ ⊕_j x` under the fixed block identifications.
    Natural,
    /// The natural embedding precomposed with `Ad(F^{⊗(n-1)})`, `F` the
    /// `k`-point Fourier matrix.
    Generic,
}

impl std::str::FromStr for Flavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "natural" => Ok(Self::Natural),
            "generic" => Ok(Self::Generic),
            other => Err(Error::Parse(format!("unknown flavor `{other}`"))),
        }
    }
}

/// `ω = e^{2πi/k}`
pub fn root_of_unity(k: usize) -> C64 {
    C64::from_polar(1.0, 2.0 * PI / k as f64)
}

pub fn checked_pow(k: usize, n: usize) -> Result<usize> {
    k.checked_pow(n as u32)
        .ok_or_else(|| Error::InvalidArgument(format!("{k}^{n} overflows")))
}

/// Charge `Σ w_l mod k` of basis index `w` at level `n`.
pub fn charge(k: usize, n: usize, mut w: usize) -> usize {
    let mut s = 0;
    for _ in 0..n {
        s += w % k;
        w /= k;
    }
    s % k
}

/// `v = diag(1, ω, …, ω^{k-1})` and the ladder of its tensor powers.
#[derive(Clone, Debug)]
pub struct UhfLadder {
    k: usize,
    n_max: usize,
    omega: C64,
    v: ComplexMatrix,
}

impl UhfLadder {
    pub fn new(k: usize, n_max: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidArgument(format!("k = {k} must be at least 2")));
        }
        if n_max == 0 {
            return Err(Error::InvalidArgument("ladder needs at least one level".into()));
        }
        checked_pow(k, n_max)?;
        let omega = root_of_unity(k);
        let v = ComplexMatrix::from_diagonal(&(0..k).map(|j| omega.powu(j as u32)).collect::<Vec<_>>());
        Ok(Self { k, n_max, omega, v })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn omega(&self) -> C64 {
        self.omega
    }

    pub fn v(&self) -> &ComplexMatrix {
        &self.v
    }

    pub fn dim(&self, n: usize) -> usize {
        self.k.pow(n as u32)
    }

    /// `‖v^k - 1‖_max`
    pub fn order_residual(&self) -> f64 {
        let mut p = ComplexMatrix::identity(self.k);
        for _ in 0..self.k {
            p = p.matmul(&self.v);
        }
        (&p - &ComplexMatrix::identity(self.k)).max_abs()
    }

    pub fn symmetry(&self, n: usize) -> SymmetryAction {
        SymmetryAction::new(self.k, n)
    }

    pub fn step(&self, n: usize, flavor: Flavor) -> Result<EndomorphismStep> {
        if n > self.n_max {
            return Err(Error::LevelOutOfRange { level: n, max: self.n_max });
        }
        EndomorphismStep::new(self.k, n, flavor)
    }

    /// Steps `γ_1, …, γ_{n_max}`.
    pub fn steps(&self, flavor: Flavor) -> Result<Vec<EndomorphismStep>> {
        (1..=self.n_max).map(|n| EndomorphismStep::new(self.k, n, flavor)).collect()
    }
}

/// `σ_n = Ad(v^{⊗n})` on `M_k^{⊗n}`.
#[derive(Clone, Debug)]
pub struct SymmetryAction {
    k: usize,
    n: usize,
    charges: Vec<usize>,
    phases: Vec<C64>,
}

impl SymmetryAction {
    pub fn new(k: usize, n: usize) -> Self {
        let omega = root_of_unity(k);
        let dim = k.pow(n as u32);
        let charges: Vec<usize> = (0..dim).map(|w| charge(k, n, w)).collect();
        let phases = charges.iter().map(|&c| omega.powu(c as u32)).collect();
        Self { k, n, charges, phases }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn level(&self) -> usize {
        self.n
    }

    /// `v^{⊗n}` (diagonal).
    pub fn matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&self.phases)
    }

    pub fn phases(&self) -> &[C64] {
        &self.phases
    }

    fn phases_of_unity(&self, e: usize) -> C64 {
        root_of_unity(self.k).powu(e as u32)
    }

    /// `σ_n^j(x)`
    pub fn apply_power(&self, x: &ComplexMatrix, j: usize) -> ComplexMatrix {
        let d = self.phases.len();
        assert_eq!(x.rows(), d);
        let k = self.k;
        ComplexMatrix::from_fn(d, d, |r, c| {
            let e = ((self.charges[r] + k - self.charges[c]) * j) % k;
            if e == 0 {
                x[(r, c)]
            } else {
                x[(r, c)] * self.phases_of_unity(e)
            }
        })
    }
}

impl AlgebraMap for SymmetryAction {
    fn source_dim(&self) -> usize {
        self.phases.len()
    }
    fn target_dim(&self) -> usize {
        self.phases.len()
    }
    fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.apply_power(x, 1)
    }
}

/// `v^{⊗n}` together with the conjugation map `σ_n`.
pub fn symmetry_action(k: usize, n: usize) -> (ComplexMatrix, SymmetryAction) {
    let s = SymmetryAction::new(k, n);
    (s.matrix(), s)
}

/// The fixed-point algebra `(M_k^{⊗n})^σ`, stored by the matrix units
/// `e_ab` it contains (those with equal charges at `a` and `b`).
#[derive(Clone, Debug)]
pub struct FixedPointAlgebra {
    k: usize,
    n: usize,
    units: Vec<(usize, usize)>,
}

impl FixedPointAlgebra {
    pub fn dim(&self) -> usize {
        self.units.len()
    }

    pub fn units(&self) -> &[(usize, usize)] {
        &self.units
    }

    pub fn ambient_dim(&self) -> usize {
        self.k.pow(self.n as u32)
    }

    /// Orthonormal basis as a [`SubAlgebra`], subject to [`MATERIALIZE_CAP`].
    pub fn to_subalgebra(&self) -> Result<SubAlgebra> {
        let n = self.ambient_dim();
        let entries = self.dim() * n * n;
        if entries > MATERIALIZE_CAP {
            return Err(Error::DimensionCap { dim: entries, cap: MATERIALIZE_CAP });
        }
        let basis = self.units.iter().map(|&(a, b)| ComplexMatrix::unit(n, a, b)).collect();
        Ok(SubAlgebra::from_orthonormal(n, basis, true))
    }

    /// `‖E_σ(x) - x‖_max` where `E_σ` keeps the fixed-point entries.
    pub fn membership_residual(&self, x: &ComplexMatrix) -> f64 {
        let (k, n) = (self.k, self.n);
        let mut worst = 0.0f64;
        for r in 0..x.rows() {
            let cr = charge(k, n, r);
            for c in 0..x.cols() {
                if charge(k, n, c) != cr {
                    worst = worst.max(x[(r, c)].norm());
                }
            }
        }
        worst
    }
}

/// Spectral projections `E_0, …, E_{k-1}` of `v^{⊗n}` (eigenvalue `ω^j`)
/// and the fixed-point algebra `⊕_j E_j M E_j`.
///
/// The algebra is the null space of the diagonal superoperator `σ_n - id`
/// in the matrix-unit basis: `e_ab` is fixed iff `ω^{s(a)} conj(ω^{s(b)}) = 1`.
pub fn fixed_point_blocks(k: usize, n: usize) -> Result<(Vec<ComplexMatrix>, FixedPointAlgebra)> {
    if k < 2 || n == 0 {
        return Err(Error::InvalidArgument(format!("need k >= 2 and n >= 1 (got k={k}, n={n})")));
    }
    let sym = SymmetryAction::new(k, n);
    let dim = checked_pow(k, n)?;
    let omega = root_of_unity(k);
    let mut projections = Vec::with_capacity(k);
    for j in 0..k {
        let target = omega.powu(j as u32);
        let diag: Vec<f64> = sym
            .phases
            .iter()
            .map(|p| if (p - target).norm() < 1e-9 { 1.0 } else { 0.0 })
            .collect();
        projections.push(ComplexMatrix::from_real_diagonal(&diag));
    }
    let mut units = Vec::new();
    for a in 0..dim {
        for b in 0..dim {
            let eig = sym.phases[a] * sym.phases[b].conj();
            if (eig - ONE).norm() <= 1e-10 {
                units.push((a, b));
            }
        }
    }
    Ok((projections, FixedPointAlgebra { k, n, units }))
}

/// Generalised Pauli clock `diag(ω_m^i)` on `C^m`.
pub fn clock(m: usize) -> ComplexMatrix {
    let w = root_of_unity(m.max(1));
    ComplexMatrix::from_diagonal(&(0..m).map(|i| w.powu(i as u32)).collect::<Vec<_>>())
}

/// Cyclic shift `e_i ↦ e_{i+1 mod m}` on `C^m`.
pub fn shift(m: usize) -> ComplexMatrix {
    let mut s = ComplexMatrix::zeros(m, m);
    for i in 0..m {
        s[((i + 1) % m, i)] = ONE;
    }
    s
}

/// Unitary `k`-point Fourier matrix.
pub fn fourier(k: usize) -> ComplexMatrix {
    let w = root_of_unity(k);
    let norm = 1.0 / (k as f64).sqrt();
    ComplexMatrix::from_fn(k, k, |r, c| w.powu((r * c) as u32) * norm)
}

fn fourier_power(k: usize, n: usize) -> ComplexMatrix {
    let f = fourier(k);
    let mut out = ComplexMatrix::identity(1);
    for _ in 0..n {
        out = out.kron(&f);
    }
    out
}

/// One level `γ_n: M_{k^{n-1}} → M_{k^n}` of the embedding,
/// `γ_n(x) = Σ_j J_j T x T* J_j*` with `T = 1` (natural) or `F^{⊗(n-1)}`
/// (generic).
#[derive(Clone, Debug)]
pub struct EndomorphismStep {
    k: usize,
    n: usize,
    flavor: Flavor,
    /// `targets[j][u]` is the index of `J_j e_u`.
    targets: Vec<Vec<usize>>,
    twist: Option<ComplexMatrix>,
}

impl EndomorphismStep {
    pub fn new(k: usize, n: usize, flavor: Flavor) -> Result<Self> {
        if k < 2 || n == 0 {
            return Err(Error::InvalidArgument(format!("need k >= 2 and n >= 1 (got k={k}, n={n})")));
        }
        let src = checked_pow(k, n - 1)?;
        checked_pow(k, n)?;
        let targets = (0..k)
            .map(|j| {
                (0..src)
                    .map(|u| {
                        let c = (j + k - charge(k, n - 1, u)) % k;
                        c * src + u
                    })
                    .collect()
            })
            .collect();
        let twist = match flavor {
            Flavor::Natural => None,
            Flavor::Generic => Some(fourier_power(k, n - 1)),
        };
        Ok(Self {
            k,
            n,
            flavor,
            targets,
            twist,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn level(&self) -> usize {
        self.n
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn source_dim(&self) -> usize {
        self.targets[0].len()
    }

    pub fn target_dim(&self) -> usize {
        self.source_dim() * self.k
    }

    /// The block isometry `J_j T` (`k^n x k^{n-1}`).
    pub fn isometry(&self, j: usize) -> ComplexMatrix {
        let (big, small) = (self.target_dim(), self.source_dim());
        let mut m = ComplexMatrix::zeros(big, small);
        for (u, &t) in self.targets[j].iter().enumerate() {
            m[(t, u)] = ONE;
        }
        match &self.twist {
            Some(f) => m.matmul(f),
            None => m,
        }
    }

    fn place(&self, y: &ComplexMatrix) -> ComplexMatrix {
        let big = self.target_dim();
        let mut out = ComplexMatrix::zeros(big, big);
        for t in &self.targets {
            for (a, &ta) in t.iter().enumerate() {
                for (b, &tb) in t.iter().enumerate() {
                    out[(ta, tb)] = y[(a, b)];
                }
            }
        }
        out
    }

    /// `γ_n(x)`
    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(x.rows(), self.source_dim(), "γ_{} input dimension", self.n);
        match &self.twist {
            Some(f) => self.place(&x.conjugate_by(f)),
            None => self.place(x),
        }
    }

    /// Dual on densities: `γ*(ρ) = Σ_j T* J_j* ρ J_j T`, so that
    /// `Tr(ρ γ(x)) = Tr(γ*(ρ) x)`.
    pub fn dual(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let small = self.source_dim();
        let mut out = ComplexMatrix::zeros(small, small);
        for t in &self.targets {
            for (a, &ta) in t.iter().enumerate() {
                for (b, &tb) in t.iter().enumerate() {
                    out[(a, b)] += rho[(ta, tb)];
                }
            }
        }
        match &self.twist {
            Some(f) => out.conjugate_by(&f.adjoint()),
            None => out,
        }
    }

    /// `γ_n(clock)` and `γ_n(shift)`, which generate the image.
    pub fn image_generators(&self) -> Vec<ComplexMatrix> {
        let m = self.source_dim();
        if m == 1 {
            return vec![ComplexMatrix::identity(self.target_dim())];
        }
        vec![self.apply(&clock(m)), self.apply(&shift(m))]
    }

    /// `γ_n(e_ab) / √k` over all matrix units: an orthonormal basis of the image.
    pub fn image_algebra(&self) -> Result<SubAlgebra> {
        let (m, big) = (self.source_dim(), self.target_dim());
        let entries = m * m * big * big;
        if entries > MATERIALIZE_CAP {
            return Err(Error::DimensionCap { dim: entries, cap: MATERIALIZE_CAP });
        }
        let scale = 1.0 / (self.k as f64).sqrt();
        let basis = (0..m)
            .flat_map(|a| (0..m).map(move |b| (a, b)))
            .map(|(a, b)| self.apply(&ComplexMatrix::unit(m, a, b)).scale_real(scale))
            .collect();
        Ok(SubAlgebra::from_orthonormal(big, basis, true))
    }

    /// `‖γ(1) - 1‖_max`
    pub fn unital_residual(&self) -> f64 {
        let id = self.apply(&ComplexMatrix::identity(self.source_dim()));
        (&id - &ComplexMatrix::identity(self.target_dim())).max_abs()
    }

    /// Multiplicativity and *-preservation on matrix-unit pairs
    /// `(e_ab, e_bc)` and `(e_ab, e_{b+1,c})` with `c = a + 1`, plus the
    /// structural identities `J_i* J_j = δ_ij`.
    pub fn homomorphism_residual(&self) -> f64 {
        let m = self.source_dim();
        let mut worst = 0.0f64;
        let images: Vec<ComplexMatrix> = (0..m * m)
            .map(|p| self.apply(&ComplexMatrix::unit(m, p / m, p % m)))
            .collect();
        let zero = ComplexMatrix::zeros(self.target_dim(), self.target_dim());
        for a in 0..m {
            for b in 0..m {
                let g = &images[a * m + b];
                worst = worst.max((&g.adjoint() - &images[b * m + a]).max_abs());
                let c = (a + 1) % m;
                let prod = g.matmul(&images[b * m + c]);
                worst = worst.max((&prod - &images[a * m + c]).max_abs());
                if m > 1 {
                    let other = g.matmul(&images[((b + 1) % m) * m + c]);
                    worst = worst.max((&other - &zero).max_abs());
                }
            }
        }
        let isos: Vec<ComplexMatrix> = (0..self.k).map(|j| self.isometry(j)).collect();
        for (i, ji) in isos.iter().enumerate() {
            for (j, jj) in isos.iter().enumerate() {
                let g = ji.adjoint_matmul(jj);
                let expect = if i == j { ComplexMatrix::identity(m) } else { ComplexMatrix::zeros(m, m) };
                worst = worst.max((&g - &expect).max_abs());
            }
        }
        worst
    }

    /// `max ‖[γ(e_ab), v^{⊗n}]‖_max` over matrix units.
    pub fn fixed_point_residual(&self) -> f64 {
        let sym = SymmetryAction::new(self.k, self.n);
        let m = self.source_dim();
        let mut worst = 0.0f64;
        for a in 0..m {
            for b in 0..m {
                let g = self.apply(&ComplexMatrix::unit(m, a, b));
                let d = g.rows();
                for r in 0..d {
                    for c in 0..d {
                        let z = g[(r, c)];
                        if z != ZERO {
                            let comm = z * (sym.phases[c] - sym.phases[r]);
                            worst = worst.max(comm.norm());
                        }
                    }
                }
            }
        }
        worst
    }

    /// `max ‖γ_n(x ⊗ 1) - γ_{n-1}(x) ⊗ 1‖_max` over matrix units `x` of
    /// `M_{k^{n-2}}`.
    pub fn consistency_residual(&self, prev: &EndomorphismStep) -> Result<f64> {
        if prev.k != self.k || prev.n + 1 != self.n {
            return Err(Error::InvalidArgument(format!(
                "steps at levels {} and {} are not adjacent",
                prev.n, self.n
            )));
        }
        let m = prev.source_dim();
        let id = ComplexMatrix::identity(self.k);
        let mut worst = 0.0f64;
        for a in 0..m {
            for b in 0..m {
                let x = ComplexMatrix::unit(m, a, b);
                let lhs = self.apply(&x.kron(&id));
                let rhs = prev.apply(&x).kron(&id);
                worst = worst.max((&lhs - &rhs).max_abs());
            }
        }
        Ok(worst)
    }

    /// Commutant of `γ_n(M_{k^{n-1}})`, optionally with `v^{⊗n}` adjoined.
    pub fn surrogate_commutant(&self, adjoin_symmetry: bool) -> Result<SubAlgebra> {
        let mut gens = self.image_generators();
        if adjoin_symmetry {
            gens.push(SymmetryAction::new(self.k, self.n).matrix());
        }
        commutant_of_generators(&gens, self.target_dim())
    }
}

impl AlgebraMap for EndomorphismStep {
    fn source_dim(&self) -> usize {
        EndomorphismStep::source_dim(self)
    }
    fn target_dim(&self) -> usize {
        EndomorphismStep::target_dim(self)
    }
    fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        EndomorphismStep::apply(self, x)
    }
}

/// `γ_n` for the given flavor.
pub fn gamma_step(k: usize, n: usize, flavor: Flavor) -> Result<EndomorphismStep> {
    EndomorphismStep::new(k, n, flavor)
}

/// Commutant of a materialised image algebra, optionally together with a
/// symmetry unitary.
pub fn surrogate_commutant(step_image: &SubAlgebra, symmetry: Option<&ComplexMatrix>) -> Result<SubAlgebra> {
    let extra: Vec<ComplexMatrix> = symmetry.into_iter().cloned().collect();
    crate::algebra::joint_commutant(&[step_image], &extra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::minimal_central_projections;
    use crate::state::{phi0, phi1, tensor_power};

    fn random_matrix(n: usize, seed: u64) -> ComplexMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn v_for_k2() {
        let l = UhfLadder::new(2, 1).unwrap();
        assert!((l.v() - &ComplexMatrix::from_real_diagonal(&[1.0, -1.0])).max_abs() < 1e-15);
        assert!(l.order_residual() < 1e-12);
        assert!(UhfLadder::new(1, 2).is_err());
    }

    #[test]
    fn symmetry_has_order_k() {
        for (k, n) in [(2, 3), (3, 2), (4, 2)] {
            let (v, s) = symmetry_action(k, n);
            let x = random_matrix(v.rows(), 5);
            assert!((&s.apply_power(&x, k) - &x).max_abs() < 1e-12);
            let mut y = x.clone();
            for _ in 0..k {
                y = s.apply(&y);
            }
            assert!((&y - &x).max_abs() < 1e-12);
            assert!((&s.apply(&v) - &v).max_abs() == 0.0);
        }
    }

    #[test]
    fn symmetry_matches_tensor_power_of_v() {
        let l = UhfLadder::new(3, 2).unwrap();
        let vv = l.v().kron(l.v());
        assert!((&l.symmetry(2).matrix() - &vv).max_abs() < 1e-15);
    }

    #[test]
    fn fixed_point_brute_force_k2_n2() {
        // Dense superoperator x ↦ σ(x) - x on the 16 matrix units.
        let (k, n) = (2, 2);
        let s = SymmetryAction::new(k, n);
        let d = 4;
        let sup = ComplexMatrix::from_fn(d * d, d * d, |p, q| {
            let e = ComplexMatrix::unit(d, q / d, q % d);
            let img = &s.apply(&e) - &e;
            img[(p / d, p % d)]
        });
        let null = d * d - sup.rank(1e-10);
        let (proj, fp) = fixed_point_blocks(k, n).unwrap();
        assert_eq!(null, 8);
        assert_eq!(fp.dim(), 8);
        assert_eq!(proj.len(), 2);
        for p in &proj {
            assert_eq!(p.trace().re.round() as usize, 2);
        }
        let sub = fp.to_subalgebra().unwrap();
        assert!(sub.closure_residual() < 1e-12);
        let mcp = minimal_central_projections(&sub, 1e-10).unwrap();
        assert_eq!(mcp.len(), 2);
        for (a, b) in mcp.iter().zip(&proj) {
            assert!((a - b).max_abs() < 1e-10);
        }
    }

    #[test]
    fn fixed_point_dims_and_ranks() {
        for k in 2..=3 {
            for n in 1..=4 {
                let (proj, fp) = fixed_point_blocks(k, n).unwrap();
                let big = k.pow(n as u32);
                let small = k.pow(n as u32 - 1);
                assert_eq!(fp.dim(), k * small * small);
                let sum = proj.iter().fold(ComplexMatrix::zeros(big, big), |acc, p| &acc + p);
                assert!((&sum - &ComplexMatrix::identity(big)).max_abs() == 0.0);
                for p in &proj {
                    assert_eq!(p.rank(1e-10), small);
                }
            }
        }
        assert_eq!(fixed_point_blocks(2, 1).unwrap().1.dim(), 2);
    }

    #[test]
    fn steps_are_consistent_homomorphisms() {
        for flavor in [Flavor::Natural, Flavor::Generic] {
            for k in 2..=3 {
                let steps = UhfLadder::new(k, 3).unwrap().steps(flavor).unwrap();
                for (i, s) in steps.iter().enumerate() {
                    assert!(s.unital_residual() < 1e-12);
                    assert!(s.homomorphism_residual() < 1e-12);
                    assert!(s.fixed_point_residual() < 1e-12);
                    if i > 0 {
                        assert!(s.consistency_residual(&steps[i - 1]).unwrap() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn dual_is_adjoint_of_step() {
        for flavor in [Flavor::Natural, Flavor::Generic] {
            let s = gamma_step(3, 2, flavor).unwrap();
            let rho = random_matrix(9, 1);
            let x = random_matrix(3, 2);
            let lhs = rho.matmul(&s.apply(&x)).trace();
            let rhs = s.dual(&rho).matmul(&x).trace();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn chi_invariance_of_natural_flavor() {
        for n in 2..=4 {
            let s = gamma_step(2, n, Flavor::Natural).unwrap();
            let chi_n = tensor_power(&phi1(2), n).unwrap();
            let chi_prev = tensor_power(&phi1(2), n - 1).unwrap();
            let pulled = s.dual(chi_n.density());
            assert!((&pulled - chi_prev.density()).max_abs() < 1e-12);
        }
        let g = gamma_step(2, 3, Flavor::Generic).unwrap();
        let pulled = g.dual(tensor_power(&phi1(2), 3).unwrap().density());
        assert!((&pulled - tensor_power(&phi1(2), 2).unwrap().density()).max_abs() > 1e-3);
    }

    #[test]
    fn phi0_is_symmetric() {
        let s = SymmetryAction::new(3, 3);
        let phi = tensor_power(&phi0(3), 3).unwrap();
        let x = random_matrix(27, 9);
        assert!((phi.expect(&s.apply(&x)) - phi.expect(&x)).norm() < 1e-12);
    }

    #[test]
    fn surrogate_commutant_dims() {
        for (k, n, with, without) in [(2, 3, 2, 4), (3, 2, 3, 9)] {
            let s = gamma_step(k, n, Flavor::Natural).unwrap();
            assert_eq!(s.surrogate_commutant(true).unwrap().dim(), with);
            assert_eq!(s.surrogate_commutant(false).unwrap().dim(), without);
            let image = s.image_algebra().unwrap();
            let sym = SymmetryAction::new(k, n).matrix();
            assert_eq!(surrogate_commutant(&image, Some(&sym)).unwrap().dim(), with);
            assert_eq!(surrogate_commutant(&image, None).unwrap().dim(), without);
        }
    }

    #[test]
    fn surrogate_with_symmetry_is_spanned_by_blocks() {
        let s = gamma_step(2, 3, Flavor::Natural).unwrap();
        let c = s.surrogate_commutant(true).unwrap();
        let (proj, _) = fixed_point_blocks(2, 3).unwrap();
        for p in &proj {
            assert!(c.contains(p, 1e-10));
        }
    }
}
