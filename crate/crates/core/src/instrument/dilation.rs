//! Realising an instrument by a measuring process (Stinespring dilation
//! completed to a unitary).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instrument::process::MeasuringProcess;
use crate::instrument::{instrument_distance, Instrument, CHOI_PSD_TOL};
use crate::matrix::{basis_vector, vec_inner, vec_norm, ComplexMatrix, C64, ZERO};

/// Eigenvalues below this fraction of the largest are dropped from the
/// Kraus factorisation.
const KRAUS_REL_CUT: f64 = 1e-14;

/// Probe space `C^m ⊗ C^r` (outcome `i`, Kraus slot `t`), vector `Ω = e_0`,
/// block projections `ρ(E_i) = e_ii ⊗ 1_r` and a unitary `U` on
/// `C^d ⊗ C^{m r}` with `U(ξ ⊗ Ω) = Σ_{i,t} K_it ξ ⊗ e_i ⊗ e_t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dilation {
    pub dim: usize,
    pub probe_dim: usize,
    /// Kraus operators per outcome (padded rank `r`).
    pub rank: usize,
    pub omega: Vec<C64>,
    pub projections: Vec<ComplexMatrix>,
    pub unitary: ComplexMatrix,
}

impl Dilation {
    pub fn process(&self) -> Result<MeasuringProcess> {
        MeasuringProcess::new_unchecked(
            self.dim,
            None,
            self.omega.clone(),
            self.projections.clone(),
            self.unitary.clone(),
        )
    }

    pub fn instrument(&self) -> Result<Instrument> {
        Ok(super::instrument_from_process(&self.process()?))
    }

    /// `d(E, E_dilation)` over the given probe vectors.
    pub fn round_trip_distance(&self, original: &Instrument, probes: &[Vec<C64>]) -> Result<f64> {
        let mut back = self.instrument()?;
        let outcomes = back
            .outcomes()
            .iter()
            .zip(original.outcomes())
            .map(|(b, o)| super::Outcome {
                label: o.label.clone(),
                choi: b.choi.clone(),
            })
            .collect();
        back = Instrument::new(back.dim(), outcomes)?;
        instrument_distance(original, &back, probes)
    }
}

fn kraus_factors(e: &Instrument) -> Result<Vec<Vec<ComplexMatrix>>> {
    let d = e.dim();
    let mut all = Vec::with_capacity(e.len());
    for (i, o) in e.outcomes().iter().enumerate() {
        let eig = o.choi.hermitian_part().eigh();
        let min = eig.values[0];
        if min < -CHOI_PSD_TOL {
            return Err(Error::ChoiNotPsd {
                outcome: i + 1,
                min_eigenvalue: min,
                tol: CHOI_PSD_TOL,
            });
        }
        let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
        let mut ops = Vec::new();
        for (c, &lambda) in eig.values.iter().enumerate().rev() {
            if lambda <= KRAUS_REL_CUT * top || lambda <= 0.0 {
                continue;
            }
            let s = lambda.sqrt();
            ops.push(ComplexMatrix::from_fn(d, d, |row, a| eig.vectors[(a * d + row, c)] * s));
        }
        all.push(ops);
    }
    Ok(all)
}

/// Extend orthonormal columns to a unitary by Gram-Schmidt on the standard
/// basis (two passes per candidate).
fn complete_to_unitary(first: &[Vec<C64>], slots: &[usize], n: usize) -> ComplexMatrix {
    let mut basis: Vec<Vec<C64>> = first.to_vec();
    for e in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = basis_vector(n, e);
        for _ in 0..2 {
            for b in &basis {
                let c = vec_inner(b, &v);
                for (x, y) in v.iter_mut().zip(b) {
                    *x -= c * y;
                }
            }
        }
        let norm = vec_norm(&v);
        if norm > 1e-6 {
            basis.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    let mut columns = vec![Vec::new(); n];
    let mut rest = basis.drain(first.len()..);
    for (slot, col) in columns.iter_mut().enumerate() {
        *col = match slots.iter().position(|&s| s == slot) {
            Some(p) => first[p].clone(),
            None => rest.next().expect("enough completion vectors"),
        };
    }
    ComplexMatrix::from_columns(n, &columns)
}

/// Dilation of `E`: Kraus factorisation of each Choi matrix padded to a
/// common rank `r`, the isometry `V = Σ K_it ⊗ |i, t⟩` (polar-corrected) and
/// its completion to a unitary.
pub fn realize_instrument(e: &Instrument) -> Result<Dilation> {
    let d = e.dim();
    let m = e.len();
    let kraus = kraus_factors(e)?;
    let rank = kraus.iter().map(Vec::len).max().unwrap_or(0).max(1);
    let probe_dim = m * rank;
    let n = d * probe_dim;
    let mut v = ComplexMatrix::zeros(n, d);
    for (i, ops) in kraus.iter().enumerate() {
        for (t, k) in ops.iter().enumerate() {
            for c in 0..d {
                for a in 0..d {
                    v[(c * probe_dim + i * rank + t, a)] = k[(c, a)];
                }
            }
        }
    }
    // V (V*V)^{-1/2} absorbs a small normalisation defect.
    let gram = v.adjoint_matmul(&v);
    let inv_sqrt = gram.hermitian_function(|x| if x > 0.0 { 1.0 / x.sqrt() } else { 0.0 });
    let v = v.matmul(&inv_sqrt);
    if v.isometry_residual() > 1e-9 {
        return Err(Error::InvalidArgument("instrument is not normalised: ΣΦ_i* (1) is singular".into()));
    }
    let slots: Vec<usize> = (0..d).map(|a| a * probe_dim).collect();
    let first: Vec<Vec<C64>> = (0..d).map(|a| v.col(a)).collect();
    let unitary = complete_to_unitary(&first, &slots, n);
    let projections = (0..m)
        .map(|i| {
            let diag: Vec<f64> = (0..probe_dim).map(|p| if p / rank == i { 1.0 } else { 0.0 }).collect();
            ComplexMatrix::from_real_diagonal(&diag)
        })
        .collect();
    let mut omega = vec![ZERO; probe_dim];
    omega[0] = C64::new(1.0, 0.0);
    Ok(Dilation {
        dim: d,
        probe_dim,
        rank,
        omega,
        projections,
        unitary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instrument::default_probes;
    use crate::random::random_instrument;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_round_trip() {
        let e = Instrument::identity(3);
        let dil = realize_instrument(&e).unwrap();
        assert_eq!(dil.probe_dim, 1);
        assert!((&dil.unitary - &ComplexMatrix::identity(3)).max_abs() < 1e-12);
        assert!(dil.round_trip_distance(&e, &default_probes(3, 16)).unwrap() <= 1e-10);
    }

    #[test]
    fn projective_round_trip() {
        let e = Instrument::projective(&[ComplexMatrix::unit(2, 0, 0), ComplexMatrix::unit(2, 1, 1)]).unwrap();
        let dil = realize_instrument(&e).unwrap();
        assert!(dil.unitary.unitarity_residual() < 1e-12);
        assert!(dil.round_trip_distance(&e, &default_probes(2, 16)).unwrap() <= 1e-8);
    }

    #[test]
    fn random_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let e = random_instrument(3, 2, 3, &mut rng);
        let dil = realize_instrument(&e).unwrap();
        assert_eq!(dil.rank, 3);
        assert!(dil.unitary.unitarity_residual() < 1e-12);
        assert!(dil.round_trip_distance(&e, &default_probes(3, 16)).unwrap() <= 1e-8);
    }

    #[test]
    fn rejects_non_psd() {
        let e = Instrument::identity(2);
        let bad = &e.choi(0).clone() - &ComplexMatrix::identity(4).scale_real(1e-6);
        let e = e.with_choi(0, bad).unwrap();
        assert!(matches!(realize_instrument(&e), Err(Error::ChoiNotPsd { outcome: 1, .. })));
    }
}
