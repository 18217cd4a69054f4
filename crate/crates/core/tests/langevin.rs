mod common;

use common::{random_setup, random_state};
use weakmeas_core::analytic::{ho_backaction, tls_z, HoParams, TlsParams};
use weakmeas_core::correlators::{quasi_moment, ChainEvaluator, MomentQuery};
use weakmeas_core::langevin::{
    heisenberg_propagate, ho_mc_noise_variance, ho_mc_position_correlation, mc_quasi_moment, mc_quasi_moments,
    McConfig, NoiseTrajectory, Splitting,
};
use weakmeas_core::operators::max_abs_diff;
use weakmeas_core::rng::stream_rng;
use weakmeas_core::{CMatrix, DensityMatrix, MeasurementSetup};

fn up() -> DensityMatrix {
    DensityMatrix::basis(2, 0).unwrap()
}

#[test]
fn weak_limit_is_deterministic() {
    let s = MeasurementSetup::two_level(1.0, 0.0).unwrap();
    let p = TlsParams::new(1.0, 0.0).unwrap();
    let mc = McConfig::new(20, 0.01, 1).unwrap();
    let r = mc_quasi_moment(&s, &up(), &MomentQuery::new(&[0.333, 1.5]).unwrap(), &mc).unwrap();
    assert_eq!(r.stat_error, 0.0);
    assert!((r.value - tls_z(&p, 1.5 - 0.333).unwrap()).abs() < 1e-10);
}

#[test]
fn two_level_moments_match_chain() {
    let s = MeasurementSetup::two_level(1.0, 0.2).unwrap();
    let mc = McConfig::new(10_000, 0.01, 2).unwrap().with_splitting(Splitting::Symmetric);
    let queries: Vec<MomentQuery> =
        [&[1.0][..], &[0.5, 1.5], &[0.3, 0.8, 1.4, 2.0]].iter().map(|t| MomentQuery::new(t).unwrap()).collect();
    let results = mc_quasi_moments(&s, &up(), &queries, &mc).unwrap();
    for (q, r) in queries.iter().zip(&results) {
        let chain = quasi_moment(&s, &up(), q).unwrap().value;
        assert!(
            (r.value - chain).abs() < 3.0 * r.stat_error,
            "{:?}: {} ± {} vs {chain}",
            q.times(),
            r.value,
            r.stat_error
        );
    }
}

#[test]
fn exact_step_bias_is_first_order() {
    // the same noise draws under both splittings isolate the discretization gap
    let s = MeasurementSetup::two_level(1.0, 0.2).unwrap();
    let q = MomentQuery::new(&[0.3, 0.8, 1.4, 2.0]).unwrap();
    let gap = |dt: f64| {
        let mc = McConfig::new(2000, dt, 12).unwrap();
        let exact = mc_quasi_moment(&s, &up(), &q, &mc).unwrap().value;
        let sym = mc_quasi_moment(&s, &up(), &q, &mc.with_splitting(Splitting::Symmetric)).unwrap().value;
        exact - sym
    };
    let ratio = gap(0.02) / gap(0.01);
    assert!((ratio - 2.0).abs() < 0.3, "ratio {ratio}");
}

#[test]
fn random_three_level_moments_match_chain() {
    let mut rng = stream_rng(51, 0);
    let s = random_setup(3, 0.5, &mut rng);
    let rho = random_state(3, &mut rng);
    let mc = McConfig::new(4000, 0.01, 3).unwrap();
    let queries: Vec<MomentQuery> =
        [&[0.4][..], &[0.2, 0.9], &[0.1, 0.5, 0.5, 1.0]].iter().map(|t| MomentQuery::new(t).unwrap()).collect();
    let results = mc_quasi_moments(&s, &rho, &queries, &mc).unwrap();
    let chain = ChainEvaluator::new(&s);
    for (q, r) in queries.iter().zip(&results) {
        let exact = chain.moment(&rho, q).unwrap().value;
        assert!(
            (r.value - exact).abs() < 3.0 * r.stat_error,
            "{:?}: {} ± {} vs {exact}",
            q.times(),
            r.value,
            r.stat_error
        );
    }
}

#[test]
fn calibration_over_seeds() {
    let s = MeasurementSetup::two_level(1.0, 0.2).unwrap();
    let q = MomentQuery::new(&[0.5, 1.5]).unwrap();
    let chain = quasi_moment(&s, &up(), &q).unwrap().value;
    let violations = (0..100u64)
        .filter(|&seed| {
            let r = mc_quasi_moment(&s, &up(), &q, &McConfig::new(1000, 0.01, 1000 + seed).unwrap()).unwrap();
            (r.value - chain).abs() >= 3.0 * r.stat_error
        })
        .count();
    assert!(violations <= 1, "{violations} of 100 seeds outside 3 SE");
}

#[test]
fn standard_error_scales_as_inverse_root_n() {
    let s = MeasurementSetup::two_level(1.0, 0.5).unwrap();
    let q = MomentQuery::new(&[0.7, 1.2]).unwrap();
    let se = |n| mc_quasi_moment(&s, &up(), &q, &McConfig::new(n, 0.01, 4).unwrap()).unwrap().stat_error;
    let ratio = se(1000) / se(4000);
    assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
}

#[test]
fn halving_dt_is_within_statistical_error() {
    let s = MeasurementSetup::two_level(1.0, 0.2).unwrap();
    let q = MomentQuery::new(&[0.5, 1.5]).unwrap();
    let coarse = mc_quasi_moment(&s, &up(), &q, &McConfig::new(10_000, 0.02, 5).unwrap()).unwrap();
    let fine = mc_quasi_moment(&s, &up(), &q, &McConfig::new(10_000, 0.01, 6).unwrap()).unwrap();
    assert!((coarse.value - fine.value).abs() < (coarse.stat_error.powi(2) + fine.stat_error.powi(2)).sqrt() * 3.0);
}

#[test]
fn propagators_are_unitary() {
    let mut rng = stream_rng(52, 0);
    for d in [2, 3, 4] {
        let s = random_setup(d, 1.0, &mut rng);
        let traj = NoiseTrajectory::sample(1.0, 0.01, 200, &mut rng).unwrap();
        let u = heisenberg_propagate(&s, &traj, 1.957).unwrap();
        assert!(max_abs_diff(&(u.adjoint() * &u), &CMatrix::identity(d, d)) < 1e-10);
    }
}

#[test]
fn oscillator_noise_is_gaussian_with_backaction_variance() {
    let p = HoParams::ground_state(1.0, 1.0, 1.0, 0.1).unwrap();
    let mc = McConfig::new(10_000, 0.01, 7).unwrap();
    let v = ho_mc_noise_variance(&p, 5.0, &mc).unwrap();
    let f = ho_backaction(&p, 5.0, 5.0).unwrap();
    assert!((v.variance - f).abs() < 3.0 * v.std_error, "{} ± {} vs {f}", v.variance, v.std_error);
    assert!(v.mean.abs() < 3.0 * (v.variance / 10_000.0).sqrt());
    assert!(v.third_moment.abs() < 3.0 * v.third_moment_se);
}

#[test]
fn oscillator_position_correlation() {
    let p0 = HoParams::ground_state(1.0, 1.0, 1.0, 0.0).unwrap();
    let free = ho_mc_position_correlation(&p0, 5.0, 5.0, &McConfig::new(50, 0.01, 8).unwrap()).unwrap();
    assert_eq!(free.stat_error, 0.0);
    assert!((free.value - 0.5).abs() < 1e-12);

    let mut p = HoParams::ground_state(1.0, 1.0, 1.0, 0.1).unwrap();
    p.mean_x = 0.8;
    p.mean_p = -0.3;
    let r = ho_mc_position_correlation(&p, 5.0, 5.0, &McConfig::new(10_000, 0.01, 9).unwrap()).unwrap();
    let expected = 0.5 + ho_backaction(&p, 5.0, 5.0).unwrap();
    assert!((r.value - expected).abs() < 3.0 * r.stat_error, "{} ± {} vs {expected}", r.value, r.stat_error);
    let r = ho_mc_position_correlation(&p, 2.0, 3.5, &McConfig::new(10_000, 0.01, 10).unwrap()).unwrap();
    let expected = weakmeas_core::analytic::ho_free_corr(&p, 2.0, 3.5) + ho_backaction(&p, 2.0, 3.5).unwrap();
    assert!((r.value - expected).abs() < 3.0 * r.stat_error, "{} ± {} vs {expected}", r.value, r.stat_error);
}
