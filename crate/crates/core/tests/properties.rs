use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use endomeasure::instrument::{
    build_process, central_decomposition, default_probe_states, default_probes, instrument_distance,
    instrument_from_process, realize_instrument, verify_axioms, vn_instrument, Apparatus,
};
use endomeasure::matrix::{basis_vector, ComplexMatrix, C64};
use endomeasure::random::{ginibre, haar_unitary, random_instrument, random_interaction, random_state, random_unit_vector};
use endomeasure::sampling::sample_outcomes;
use endomeasure::state::{fidelity, vector_fidelity, vector_state, State};
use endomeasure::uhf::{fixed_point_blocks, Flavor};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn process_instruments_satisfy_axioms(seed in any::<u64>(), k in 2usize..=3, n in 2usize..=3) {
        let mut r = rng(seed);
        let apparatus = Apparatus { k, n, flavor: Flavor::Natural };
        let kdim = apparatus.dim().unwrap();
        let u = random_interaction(k, kdim, &mut r);
        let p = build_process(k, Some(apparatus), basis_vector(kdim, 0), apparatus.outcome_projections().unwrap(), u).unwrap();
        let e = instrument_from_process(&p);
        let report = verify_axioms(&e, &default_probe_states(k, 16), 1e-9, seed).unwrap();
        prop_assert!(report.passed());
        let povm = e.povm();
        prop_assert!(povm.completeness_residual() <= 1e-10);
        prop_assert!(povm.min_eigenvalue() >= -1e-12);
        let phi = random_state(k, &mut r);
        let dec = central_decomposition(&p, &phi).unwrap();
        prop_assert!(dec.weight_sum_residual <= 1e-10);
        prop_assert!(dec.reconstruction_residual <= 1e-9);
        prop_assert!(dec.overlap_residual <= 1e-9);
        for (w, q) in dec.weights.iter().zip(povm.probabilities(&phi)) {
            prop_assert!((w - q).abs() <= 1e-10);
        }
    }

    #[test]
    fn duality_identity(seed in any::<u64>(), d in 2usize..=4, m in 1usize..=3) {
        let mut r = rng(seed);
        let e = random_instrument(d, m, 2, &mut r);
        let rho = random_state(d, &mut r);
        let x = ginibre(d, d, &mut r);
        let q: Vec<C64> = ginibre(1, m, &mut r).row(0).to_vec();
        let lhs = e.apply_combo(&q, rho.density()).matmul(&x).trace();
        let rhs = rho.density().matmul(&e.dual_combo(&q, &x)).trace();
        prop_assert!((lhs - rhs).norm() <= 1e-10);
    }

    #[test]
    fn distance_is_a_pseudometric(seed in any::<u64>(), d in 2usize..=3) {
        let mut r = rng(seed);
        let probes = default_probes(d, 16);
        let [a, b, c] = [0, 1, 2].map(|_| random_instrument(d, 2, 1, &mut r));
        let ab = instrument_distance(&a, &b, &probes).unwrap();
        let ba = instrument_distance(&b, &a, &probes).unwrap();
        let bc = instrument_distance(&b, &c, &probes).unwrap();
        let ac = instrument_distance(&a, &c, &probes).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-14);
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert_eq!(instrument_distance(&a, &a, &probes).unwrap(), 0.0);
    }

    #[test]
    fn realization_round_trip(seed in any::<u64>(), d in 1usize..=4, m in 1usize..=3, rank in 1usize..=3) {
        let e = random_instrument(d, m, rank, &mut rng(seed));
        let dil = realize_instrument(&e).unwrap();
        prop_assert!(dil.unitary.unitarity_residual() <= 1e-12);
        prop_assert!(dil.round_trip_distance(&e, &default_probes(d, 16)).unwrap() <= 1e-8);
    }

    #[test]
    fn fidelity_symmetric_and_pure(seed in any::<u64>(), n in 2usize..=5) {
        let mut r = rng(seed);
        let a = random_state(n, &mut r);
        let b = random_state(n, &mut r);
        prop_assert!((fidelity(&a, &b).unwrap() - fidelity(&b, &a).unwrap()).abs() <= 1e-12);
        let xi = random_unit_vector(n, &mut r);
        let eta = random_unit_vector(n, &mut r);
        let f = fidelity(&vector_state(&xi, n).unwrap(), &vector_state(&eta, n).unwrap()).unwrap();
        prop_assert!((f - vector_fidelity(&xi, &eta)).abs() <= 1e-10);
    }

    #[test]
    fn vn_instrument_is_additive(seed in any::<u64>(), d in 1usize..=3) {
        let mut r = rng(seed);
        let meter = ComplexMatrix::from_real_diagonal(&[1.0, 2.0, 3.0]);
        let probe = random_state(3, &mut r);
        let u = haar_unitary(3 * d, &mut r);
        let fine = vn_instrument(3, &probe, &meter, &u, &[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let coarse = vn_instrument(3, &probe, &meter, &u, &[vec![1.0, 3.0], vec![2.0]]).unwrap();
        let merged = fine.choi(0) + fine.choi(2);
        prop_assert!((&merged - coarse.choi(0)).max_abs() <= 1e-12);
        let total = vn_instrument(3, &probe, &meter, &u, &[vec![1.0, 2.0, 3.0]]).unwrap();
        let rho = random_state(d, &mut r);
        prop_assert!((total.apply(0, rho.density()).trace().re - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn sampling_is_deterministic(seed in any::<u64>(), w in proptest::collection::vec(0.0f64..1.0, 1..6)) {
        prop_assume!(w.iter().sum::<f64>() > 1e-3);
        let a = sample_outcomes(&w, 500, seed).unwrap();
        let b = sample_outcomes(&w, 500, seed).unwrap();
        prop_assert_eq!(a.to_csv(), b.to_csv());
        prop_assert_eq!(a.counts.iter().sum::<u64>(), 500);
        for (c, p) in a.counts.iter().zip(&w) {
            if *p == 0.0 {
                prop_assert_eq!(*c, 0);
            }
        }
    }

    #[test]
    fn partial_traces_are_consistent(seed in any::<u64>(), d1 in 1usize..=3, d2 in 1usize..=3) {
        let mut r = rng(seed);
        let s = random_state(d1 * d2, &mut r);
        let first = s.reduce_to_first(d1, d2).unwrap();
        let second = s.reduce_to_second(d1, d2).unwrap();
        prop_assert!((first.density().trace().re - 1.0).abs() <= 1e-12);
        let a = random_state(d1, &mut r);
        let b = random_state(d2, &mut r);
        let product = State::new(a.density().kron(b.density())).unwrap();
        prop_assert!((product.reduce_to_first(d1, d2).unwrap().density() - a.density()).max_abs() <= 1e-12);
        prop_assert!((product.reduce_to_second(d1, d2).unwrap().density() - b.density()).max_abs() <= 1e-12);
        prop_assert!(second.dim() == d2);
    }
}

#[test]
fn charge_blocks_partition_identity() {
    for (k, n) in [(2, 3), (3, 2), (4, 2)] {
        let (blocks, _) = fixed_point_blocks(k, n).unwrap();
        let sum = blocks.iter().fold(ComplexMatrix::zeros(k.pow(n as u32), k.pow(n as u32)), |acc, b| &acc + b);
        assert_eq!(sum, ComplexMatrix::identity(k.pow(n as u32)));
    }
}
