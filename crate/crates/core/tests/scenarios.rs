use endomeasure::instrument::{
    conditional_expectation, instrument_from_process, post_interaction_state, realize_instrument, restricted_state,
    vn_instrument, Instrument,
};
use endomeasure::io::{instrument_from_json, instrument_to_json};
use endomeasure::matrix::{ComplexMatrix, C64};
use endomeasure::scenarios::{build_chi_scenario, build_section2, build_tensor_power, run_section2_check};
use endomeasure::state::State;
use endomeasure::uhf::Flavor;

#[test]
fn section2_report_is_reproducible() {
    let p = build_section2(2, 3, Flavor::Natural, None).unwrap();
    let phi = State::diagonal(&[0.3, 0.7]).unwrap();
    let a = run_section2_check(&p, &phi, 100_000, 42, 1e-9).unwrap();
    let b = run_section2_check(&p, &phi, 100_000, 42, 1e-9).unwrap();
    assert!(a.passed(), "{}", a.to_json_pretty());
    assert_eq!(a.to_json_pretty(), b.to_json_pretty());
    assert!(a.checks.iter().all(|c| c.anchor.is_some()));
    let counts = a.derived["histogram"]["counts"].as_array().unwrap();
    let first = counts[0].as_u64().unwrap() as f64;
    let sigma = (1e5f64 * 0.3 * 0.7).sqrt();
    assert!((first - 30_000.0).abs() < 4.0 * sigma);
}

#[test]
fn section2_pure_branch() {
    let p = build_section2(3, 2, Flavor::Generic, None).unwrap();
    let phi = State::diagonal(&[1.0, 0.0, 0.0]).unwrap();
    let r = run_section2_check(&p, &phi, 1000, 1, 1e-9).unwrap();
    assert!(r.passed(), "{}", r.to_json_pretty());
    let t = post_interaction_state(&p, &phi).unwrap();
    assert!(t.is_pure(1e-10));
    let k = restricted_state(&t, 3).unwrap();
    assert!((k.density() - &ComplexMatrix::unit(3, 0, 0)).max_abs() < 1e-12);
    let w: Vec<f64> = r.derived["weights"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert!((w[0] - 1.0).abs() < 1e-12 && w[1].abs() < 1e-12 && w[2].abs() < 1e-12);
}

#[test]
fn conditional_expectation_examples() {
    let p = build_section2(2, 2, Flavor::Natural, None).unwrap();
    let id = ComplexMatrix::identity(8);
    assert!((&conditional_expectation(&p, &id).unwrap() - &ComplexMatrix::identity(2)).max_abs() < 1e-14);
    for (i, e) in p.projections().iter().enumerate() {
        let lifted = ComplexMatrix::identity(2).kron(e);
        let got = conditional_expectation(&p, &lifted).unwrap();
        assert!((&got - &ComplexMatrix::unit(2, i, i)).max_abs() < 1e-14);
    }
    assert!(conditional_expectation(&p, &ComplexMatrix::identity(4)).is_err());
}

#[test]
fn chi_report_fidelities() {
    let r = build_chi_scenario(2, 4).unwrap();
    assert!(r.passed(), "{}", r.to_json_pretty());
    assert_eq!(r.derived["per_factor_fidelity"].as_array().unwrap().len(), 1);
    let r = build_chi_scenario(4, 2).unwrap();
    assert!(r.passed(), "{}", r.to_json_pretty());
    let kak = r.derived["kakutani_sum"].as_array().unwrap();
    assert!(kak.iter().all(|x| (x.as_f64().unwrap() - 2.0).abs() < 1e-12));
}

#[test]
fn tensor_power_single_copy_matches_surrogate() {
    for k in [2, 3] {
        let r = build_tensor_power(k, 2, 1).unwrap();
        assert_eq!(r.derived["commutant_dim"].as_u64().unwrap() as usize, k);
    }
    let r = build_tensor_power(2, 3, 2).unwrap();
    assert!(r.passed(), "{}", r.to_json_pretty());
    assert_eq!(r.derived["projection_ranks"].as_array().unwrap().len(), 4);
}

#[test]
fn vn_with_trivial_coupling_factorises() {
    let meter = ComplexMatrix::from_real_diagonal(&[1.0, 2.0]);
    let probe = State::diagonal(&[0.4, 0.6]).unwrap();
    let e = vn_instrument(2, &probe, &meter, &ComplexMatrix::identity(4), &[vec![1.0], vec![2.0]]).unwrap();
    let rho = State::new(ComplexMatrix::from_fn(2, 2, |r, c| {
        if r == c { C64::new(0.5, 0.0) } else { C64::new(0.1, if r < c { 0.2 } else { -0.2 }) }
    }))
    .unwrap();
    assert!((&e.apply(0, rho.density()) - &rho.density().scale_real(0.4)).max_abs() < 1e-14);
    assert!((&e.apply(1, rho.density()) - &rho.density().scale_real(0.6)).max_abs() < 1e-14);
}

#[test]
fn realized_instrument_survives_json() {
    let e = Instrument::projective(&[ComplexMatrix::unit(2, 0, 0), ComplexMatrix::unit(2, 1, 1)]).unwrap();
    let e = instrument_from_json(&instrument_to_json(&e)).unwrap();
    let dil = realize_instrument(&e).unwrap();
    let back = instrument_from_process(&dil.process().unwrap());
    for i in 0..2 {
        assert!((back.choi(i) - e.choi(i)).max_abs() < 1e-12);
    }
    let text = serde_json::to_string(&dil).unwrap();
    let again: endomeasure::instrument::Dilation = serde_json::from_str(&text).unwrap();
    assert_eq!(again, dil);
}
