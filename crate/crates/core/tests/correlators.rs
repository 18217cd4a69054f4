mod common;

use common::{random_setup, random_state};
use rand::Rng;
use weakmeas_core::analytic::{lg_x2_closed, tls_corr, TlsParams};
use weakmeas_core::correlators::{
    joint_cumulant, leggett_garg_x2, quasi_moment, weak_positivity_gram, ChainEvaluator, MomentQuery,
};
use weakmeas_core::lindblad::evolve;
use weakmeas_core::rng::stream_rng;
use weakmeas_core::{DensityMatrix, MeasurementSetup};

#[test]
fn weak_positivity_on_random_three_level_setups() {
    let mut rng = stream_rng(21, 0);
    for trial in 0..100 {
        let lambda = rng.random_range(0.0..5.0);
        let s = random_setup(3, lambda, &mut rng);
        let rho = random_state(3, &mut rng);
        let times: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..4.0)).collect();
        let (_, min_eig) = weak_positivity_gram(&s, &rho, &times).unwrap();
        assert!(min_eig >= -1e-9, "trial {trial}: {min_eig}");
    }
}

#[test]
fn moments_are_permutation_invariant() {
    let mut rng = stream_rng(22, 0);
    for _ in 0..10 {
        let s = random_setup(3, 0.6, &mut rng);
        let rho = random_state(3, &mut rng);
        let times: Vec<f64> = (0..4).map(|_| rng.random_range(0.0..3.0)).collect();
        let base = quasi_moment(&s, &rho, &MomentQuery::new(&times).unwrap()).unwrap().value;
        let mut rev = times.clone();
        rev.reverse();
        let mut rot = times.clone();
        rot.rotate_left(1);
        for perm in [rev, rot] {
            let v = quasi_moment(&s, &rho, &MomentQuery::new(&perm).unwrap()).unwrap().value;
            assert!((v - base).abs() < 1e-12);
        }
    }
}

#[test]
fn normalization_holds_at_all_times() {
    let mut rng = stream_rng(23, 0);
    let s = random_setup(4, 1.3, &mut rng);
    let rho = random_state(4, &mut rng);
    for t in [0.0, 0.3, 2.0, 9.0] {
        let tr = evolve(&rho, &s, t).unwrap().matrix().trace();
        assert!((tr.re - 1.0).abs() < 1e-12 && tr.im.abs() < 1e-12);
    }
    let eval = ChainEvaluator::new(&s);
    assert!((eval.moment_of(&rho, &[]).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn two_level_chain_matches_closed_form_on_grid() {
    let up = DensityMatrix::basis(2, 0).unwrap();
    for q in [0.1, 1.0, 3.0] {
        let s = MeasurementSetup::two_level(1.0, q).unwrap();
        let p = TlsParams::new(1.0, q).unwrap();
        let eval = ChainEvaluator::new(&s);
        for i in 0..8 {
            for j in 0..8 {
                let (t, tp) = (0.45 * i as f64, 0.45 * j as f64);
                let chain = eval.moment_of(&up, &[t, tp]).unwrap();
                assert!((chain - tls_corr(&p, t, tp).unwrap()).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn leggett_garg_zero_crossing_is_bracketed() {
    // X² changes sign between ω/λ = 10 and ω/λ = 12
    assert!(leggett_garg_x2(1.0, 1.0 / 10.0).unwrap().value > 0.0);
    assert!(leggett_garg_x2(1.0, 1.0 / 12.0).unwrap().value < 0.0);
    for lambda in [0.004, 0.04, 0.4, 4.0, 40.0] {
        let chain = leggett_garg_x2(1.0, lambda).unwrap().value;
        assert!((chain - lg_x2_closed(&TlsParams::new(1.0, lambda).unwrap())).abs() < 1e-8);
    }
}

#[test]
fn negativity_needs_fourth_order() {
    // second-order Gram matrices stay positive where X² is negative
    let s = MeasurementSetup::two_level(1.0, 1e-3).unwrap();
    let w = std::f64::consts::PI;
    let (_, min_eig) =
        weak_positivity_gram(&s, &DensityMatrix::maximally_mixed(2), &[0.0, w / 2.0, w, 1.5 * w]).unwrap();
    assert!(min_eig >= -1e-9);
    assert!(leggett_garg_x2(1.0, 1e-3).unwrap().value < 0.0);
}

#[test]
fn second_cumulant_of_two_level_moments() {
    let s = MeasurementSetup::two_level(1.0, 0.3).unwrap();
    let up = DensityMatrix::basis(2, 0).unwrap();
    let eval = ChainEvaluator::new(&s);
    let times = [0.7, 1.9];
    let k2 = joint_cumulant(2, |b| {
        let ts: Vec<f64> = b.iter().map(|&i| times[i]).collect();
        eval.moment_of(&up, &ts)
    })
    .unwrap();
    let direct = eval.moment_of(&up, &times).unwrap()
        - eval.moment_of(&up, &[0.7]).unwrap() * eval.moment_of(&up, &[1.9]).unwrap();
    assert!((k2 - direct).abs() < 1e-14);
}
