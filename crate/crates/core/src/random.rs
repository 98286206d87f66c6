//! Seeded random unitaries, states and instruments.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::instrument::Instrument;
use crate::matrix::{vec_norm, ComplexMatrix, C64};
use crate::state::State;

/// Standard complex Gaussian sample (Box-Muller).
pub fn gaussian(rng: &mut ChaCha8Rng) -> C64 {
    let u1: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.random_range(0.0..1.0);
    let r = (-u1.ln()).sqrt();
    C64::from_polar(r, 2.0 * std::f64::consts::PI * u2)
}

pub fn ginibre(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed unitary via QR of a Ginibre matrix with the phases of
/// `diag(R)` removed.
pub fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g: DMatrix<C64> = ginibre(n, n, rng).to_nalgebra();
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = ComplexMatrix::from_nalgebra(&q);
    for c in 0..n {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for row in 0..n {
            q[(row, c)] *= phase;
        }
    }
    q
}

pub fn random_unit_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| gaussian(rng)).collect();
    let norm = vec_norm(&v);
    v.into_iter().map(|z| z / norm).collect()
}

/// Random full-rank density `G G* / Tr(G G*)`.
pub fn random_state(n: usize, rng: &mut ChaCha8Rng) -> State {
    let g = ginibre(n, n, rng);
    let m = g.matmul(&g.adjoint());
    let tr = m.trace().re;
    State::trusted(m.scale_real(1.0 / tr))
}

/// Random unitary on `C^d ⊗ C^m` of the form `(A ⊗ B) D (C ⊗ E)` with Haar
/// factors and a diagonal `D` of random phases (entangling).
pub fn random_interaction(d: usize, m: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let a = haar_unitary(d, rng);
    let b = haar_unitary(m, rng);
    let c = haar_unitary(d, rng);
    let e = haar_unitary(m, rng);
    let phases: Vec<C64> = (0..d * m)
        .map(|_| C64::from_polar(1.0, rng.random_range(0.0..2.0 * std::f64::consts::PI)))
        .collect();
    let mut left = a.kron(&b);
    // (A ⊗ B) D: scale columns.
    let n = d * m;
    for r in 0..n {
        for (col, p) in phases.iter().enumerate() {
            left[(r, col)] *= p;
        }
    }
    right_multiply_kron(&left, &c, &e)
}

/// `X (C ⊗ E)` without forming the Kronecker product: each row of `X`,
/// reshaped to `d x m`, maps to `Cᵀ R E`.
pub fn right_multiply_kron(x: &ComplexMatrix, c: &ComplexMatrix, e: &ComplexMatrix) -> ComplexMatrix {
    let (d, m) = (c.rows(), e.rows());
    let n = d * m;
    assert_eq!(x.cols(), n);
    let rows = x.rows();
    // Stack all rows as (rows*d) x m and apply E once.
    let stacked = ComplexMatrix::new(rows * d, m, x.data().to_vec()).expect("shape");
    let with_e = stacked.matmul(e);
    let ct = c.transpose();
    let mut out = ComplexMatrix::zeros(rows, n);
    for r in 0..rows {
        let block = ComplexMatrix::new(d, m, with_e.data()[r * n..(r + 1) * n].to_vec()).expect("shape");
        let mixed = ct.matmul(&block);
        out.data_mut()[r * n..(r + 1) * n].copy_from_slice(mixed.data());
    }
    out
}

/// Random instrument from a Haar isometry `C^d → C^d ⊗ C^{m·rank}`, cut
/// into `m` outcomes with `rank` Kraus operators each.
pub fn random_instrument(d: usize, outcomes: usize, rank: usize, rng: &mut ChaCha8Rng) -> Instrument {
    let big = d * outcomes * rank;
    let u = haar_unitary(big, rng);
    let mut kraus = Vec::with_capacity(outcomes);
    for i in 0..outcomes {
        let mut ops = Vec::with_capacity(rank);
        for t in 0..rank {
            // Rows (c, i, t) of the first d columns form K_{i,t}.
            let k = ComplexMatrix::from_fn(d, d, |c, a| u[(c * outcomes * rank + i * rank + t, a)]);
            ops.push(k);
        }
        kraus.push(ops);
    }
    Instrument::from_kraus(d, &kraus).expect("valid Kraus family")
}
