//! Unitary paths `u_t` with `u_0 = 1` whose conjugations approach `γ`.
//!
//! Segment `j` lives in `M_k^{⊗(j+1)} ∩ γ(M_k^{⊗(j-1)})'`. Its endpoint
//! `u^{(j)}` carries `Ad(U_{j-1})(1^{⊗(j-1)} ⊗ M_k)` onto
//! `γ(1^{⊗(j-1)} ⊗ M_k)`, where `U_{j-1} = u^{(j-1)} ⋯ u^{(1)}`. With matrix
//! units `y_ab` (source), `z_ab` (target) and `g_pq = γ(e_pq ⊗ 1)`, the
//! operator
//!
//! `T = Σ_p g_p0 (Σ_a z_a0 R y_0a) g_0p`
//!
//! intertwines `y` with `z` and commutes with every `g_pq` for any `R`; its
//! polar part is the endpoint. The segment is `s ↦ e^{isH_j} U_{j-1}` with
//! `H_j` the principal logarithm of `u^{(j)}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, C64};
use crate::uhf::{clock, shift, EndomorphismStep};

/// Matching tolerance for segment endpoints.
const MATCH_TOL: f64 = 1e-9;
/// Smallest accepted `σ_min(T) / σ_max(T)` before retrying with a new `R`.
const CONDITION_CUT: f64 = 1e-6;
const ATTEMPTS: u64 = 4;

#[derive(Clone, Debug)]
pub struct Segment {
    /// Segment index `j` (the path acts on `M_k^{⊗(j+1)}`).
    pub level: usize,
    /// Hermitian generator `H_j` on `C^{k^{j+1}}`.
    pub generator: ComplexMatrix,
    /// `U_j = e^{iH_j} (U_{j-1} ⊗ 1)`.
    pub cumulative: ComplexMatrix,
    /// `max_ab ‖Ad(U_j)(y⁰_ab) - z_ab‖` for the slot-`j` matrix units.
    pub match_residual: f64,
    /// `max ‖[e^{iH_j}, γ(g)]‖` over generators `g` of `M_k^{⊗(j-1)}`.
    pub commutant_residual: f64,
}

#[derive(Clone, Debug)]
pub struct UnitaryPath {
    k: usize,
    steps: Vec<EndomorphismStep>,
    segments: Vec<Segment>,
}

fn kron_identity(x: &ComplexMatrix, m: usize) -> ComplexMatrix {
    if m == 1 {
        x.clone()
    } else {
        x.kron(&ComplexMatrix::identity(m))
    }
}

fn identity_kron(m: usize, x: &ComplexMatrix) -> ComplexMatrix {
    if m == 1 {
        x.clone()
    } else {
        ComplexMatrix::identity(m).kron(x)
    }
}

fn random_matrix(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// Build the path from consistent steps `γ_1, …, γ_L`; it has `L - 1`
/// segments.
pub fn unitary_path(steps: &[EndomorphismStep]) -> Result<UnitaryPath> {
    let first = steps.first().ok_or(Error::Empty("unitary_path steps"))?;
    let k = first.k();
    for (i, s) in steps.iter().enumerate() {
        if s.k() != k || s.level() != i + 1 {
            return Err(Error::InvalidArgument(format!(
                "steps must be γ_1, γ_2, … for one k (entry {i} is level {} with k = {})",
                s.level(),
                s.k()
            )));
        }
    }
    let mut segments: Vec<Segment> = Vec::new();
    let mut previous = ComplexMatrix::identity(k);
    for j in 1..steps.len() {
        let gamma = &steps[j];
        let dim = k.pow(j as u32 + 1);
        let lower = k.pow(j as u32 - 1);
        let prev_big = kron_identity(&previous, k);
        let mut y = Vec::with_capacity(k * k);
        let mut y0 = Vec::with_capacity(k * k);
        let mut z = Vec::with_capacity(k * k);
        for a in 0..k {
            for b in 0..k {
                let slot = identity_kron(lower, &ComplexMatrix::unit(k, a, b));
                let plain = kron_identity(&slot, k);
                y.push(plain.conjugate_by(&prev_big));
                y0.push(plain);
                z.push(gamma.apply(&slot));
            }
        }
        let g: Vec<ComplexMatrix> = (0..lower)
            .flat_map(|p| [(p, 0usize), (0usize, p)])
            .map(|(p, q)| gamma.apply(&kron_identity(&ComplexMatrix::unit(lower, p, q), k)))
            .collect();
        let g_at = |p: usize, to_zero: bool| &g[2 * p + usize::from(!to_zero)];

        let mut found = None;
        let mut best = f64::INFINITY;
        for attempt in 0..ATTEMPTS {
            let mut rng = ChaCha8Rng::seed_from_u64(0x3c6e_f372_fe94_f82b ^ ((j as u64) << 8) ^ attempt);
            let r = random_matrix(dim, &mut rng);
            let mut x = ComplexMatrix::zeros(dim, dim);
            for a in 0..k {
                x += &z[a * k].matmul(&r).matmul(&y[a]);
            }
            let mut t = ComplexMatrix::zeros(dim, dim);
            for p in 0..lower {
                // g_p0 X g_0p
                t += &g_at(p, true).matmul(&x).matmul(g_at(p, false));
            }
            let sv = t.singular_values();
            let cond = sv.last().copied().unwrap_or(0.0) / sv[0].max(f64::MIN_POSITIVE);
            if cond < CONDITION_CUT {
                continue;
            }
            let u = t.polar_unitary();
            let mut residual = 0.0f64;
            for (ya, za) in y.iter().zip(&z) {
                residual = residual.max((&ya.conjugate_by(&u) - za).operator_norm());
            }
            best = best.min(residual);
            if residual <= MATCH_TOL {
                found = Some(u);
                break;
            }
        }
        let u = found.ok_or(Error::NoMatchingUnitary(best))?;
        let generator = u.unitary_log();
        let endpoint = generator.exp_i_hermitian(1.0);
        let cumulative = endpoint.matmul(&prev_big);
        let mut match_residual = 0.0f64;
        for (plain, za) in y0.iter().zip(&z) {
            match_residual = match_residual.max((&plain.conjugate_by(&cumulative) - za).operator_norm());
        }
        let mut commutant_residual = 0.0f64;
        if j > 1 {
            let below = &steps[j - 1];
            for gen in [clock(lower), shift(lower)] {
                let img = kron_identity(&below.apply(&gen), k);
                commutant_residual = commutant_residual.max(endpoint.commutator(&img).operator_norm());
            }
        }
        previous = cumulative.clone();
        segments.push(Segment {
            level: j,
            generator,
            cumulative,
            match_residual,
            commutant_residual,
        });
    }
    Ok(UnitaryPath {
        k,
        steps: steps.to_vec(),
        segments,
    })
}

impl UnitaryPath {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Number of segments; the path parameter runs over `[0, len]`.
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// `u_t` at its natural level: on `[j-1, j]` it is `e^{isH_j} (U_{j-1} ⊗ 1)`
    /// with `s = t - j + 1`, acting on `C^{k^{j+1}}`. `u_0 = 1` exactly.
    pub fn value(&self, t: f64) -> Result<ComplexMatrix> {
        let end = self.segments.len() as f64;
        if !(0.0..=end).contains(&t) {
            return Err(Error::InvalidArgument(format!("t = {t} outside [0, {end}]")));
        }
        if t == 0.0 || self.segments.is_empty() {
            return Ok(ComplexMatrix::identity(self.k));
        }
        let j = (t.ceil() as usize).max(1);
        let s = t - (j - 1) as f64;
        let seg = &self.segments[j - 1];
        let prev = if j == 1 {
            ComplexMatrix::identity(self.k * self.k)
        } else {
            kron_identity(&self.segments[j - 2].cumulative, self.k)
        };
        if s == 1.0 {
            return Ok(seg.cumulative.clone());
        }
        Ok(seg.generator.exp_i_hermitian(s).matmul(&prev))
    }

    /// `‖u_t x u_t* - γ(x)‖` (operator norm) for `x ∈ M_k^{⊗L}`, everything
    /// embedded by `⊗ 1` into a common level.
    pub fn innerness_residual(&self, x: &ComplexMatrix, t: f64) -> Result<f64> {
        let level = level_of(self.k, x.rows())?;
        if level > self.segments.len() {
            return Err(Error::LevelOutOfRange {
                level,
                max: self.segments.len(),
            });
        }
        let gx = self.steps[level].apply(x);
        let u = self.value(t)?;
        let common = u.rows().max(gx.rows());
        let lift = |m: &ComplexMatrix| kron_identity(m, common / m.rows());
        let moved = lift(x).conjugate_by(&lift(&u));
        Ok((&moved - &lift(&gx)).operator_norm())
    }
}

fn level_of(k: usize, dim: usize) -> Result<usize> {
    let mut level = 0;
    let mut d = 1;
    while d < dim {
        d *= k;
        level += 1;
    }
    if d != dim {
        return Err(Error::DimensionMismatch(format!("dimension {dim} is not a power of {k}")));
    }
    Ok(level)
}
