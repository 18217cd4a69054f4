//! Monte Carlo over measurement backaction.
//!
//! The backaction is white noise `φ(t)` with `⟨φ(t)φ(t')⟩ = λδ(t−t')`,
//! discretized as piecewise-constant `φ_j ~ N(0, λ/dt)`. Each trajectory
//! evolves under `H_φ = H − ħφA`, and a quasiprobability moment is the noise
//! average of the nested symmetrized product
//!
//! ```text
//! ⟨a(t₁)⋯a(tₙ)⟩_q = E_φ Tr[{A_φ(tₙ), …{A_φ(t₂), {A_φ(t₁), ρ}/2}/2…}/2]
//! ```
//!
//! with `A_φ(t) = U_φ†(t) A U_φ(t)` and the latest time outermost.
//!
//! For the oscillator the Heisenberg solution is affine in `x(0)`, `p(0)`
//! and a c-number noise integral, so no Fock truncation is needed.

use nalgebra::Matrix2;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{ho_free_corr, ho_mean_x, HoParams};
use crate::correlators::{anchor_times, CorrelationResult, MomentQuery, Route};
use crate::error::{Error, Result};
use crate::lindblad::MeasurementSetup;
use crate::operators::{c64, pauli_decompose, CMatrix, DensityMatrix, HermitianOperator, C64};
use crate::rng::stream_rng;
use crate::stats::{variance_estimate, Accumulator, VarianceEstimate};

/// Highest moment order supported by [`mc_quasi_moments`].
pub const MAX_MC_ORDER: usize = 4;

/// Piecewise-constant backaction noise on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrajectory {
    pub phi: Vec<f64>,
    pub dt: f64,
    pub lambda: f64,
}

impl NoiseTrajectory {
    pub fn sample<R: Rng + ?Sized>(lambda: f64, dt: f64, n_steps: usize, rng: &mut R) -> Result<Self> {
        check_dt(dt)?;
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::param("lambda", format!("must be non-negative, got {lambda}")));
        }
        let s = (lambda / dt).sqrt();
        let phi = (0..n_steps).map(|_| s * rng.sample::<f64, _>(StandardNormal)).collect();
        Ok(Self { phi, dt, lambda })
    }

    pub fn zeros(dt: f64, n_steps: usize) -> Result<Self> {
        check_dt(dt)?;
        Ok(Self { phi: vec![0.0; n_steps], dt, lambda: 0.0 })
    }

    pub fn duration(&self) -> f64 {
        self.phi.len() as f64 * self.dt
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    Ok(())
}

/// How one step of length `τ` is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Splitting {
    /// `exp(−i(H − ħφA)τ/ħ)`. The noise-averaged step is off by `O(τ²)`,
    /// so moments carry an `O(dt)` bias.
    #[default]
    Exact,
    /// `e^{−iHτ/2ħ} e^{iφAτ} e^{−iHτ/2ħ}`. Its noise average is the
    /// symmetric split of the Lindblad step, so moments are `O(dt²)`.
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub n_traj: usize,
    pub dt: f64,
    pub seed: u64,
    pub splitting: Splitting,
}

impl McConfig {
    pub fn new(n_traj: usize, dt: f64, seed: u64) -> Result<Self> {
        let c = Self { n_traj, dt, seed, splitting: Splitting::Exact };
        c.validate()?;
        Ok(c)
    }

    pub fn with_splitting(self, splitting: Splitting) -> Self {
        Self { splitting, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_traj == 0 {
            return Err(Error::param("n_traj", "must be at least 1"));
        }
        check_dt(self.dt)
    }
}

/// Number of grid steps needed to reach `t`.
fn steps_to(t: f64, dt: f64) -> usize {
    let x = t / dt - 1e-9;
    if x <= 0.0 {
        0
    } else {
        x.ceil() as usize
    }
}

/// Per-step propagators `exp(−i(H − ħφA)τ/ħ)`. Two-level setups use the
/// closed-form Pauli rotation; larger ones diagonalize per step.
#[derive(Debug, Clone)]
enum Kernel {
    Pauli { h: [f64; 4], a: [f64; 4], hbar: f64, splitting: Splitting },
    General { h: CMatrix, a: CMatrix, hbar: f64, splitting: Splitting },
}

impl Kernel {
    fn new(setup: &MeasurementSetup, splitting: Splitting) -> Result<Self> {
        if setup.dim() == 2 {
            let h = pauli_decompose(&setup.h)?;
            let a = pauli_decompose(&setup.a)?;
            Ok(Kernel::Pauli { h: [h.c0, h.cx, h.cy, h.cz], a: [a.c0, a.cx, a.cy, a.cz], hbar: setup.hbar, splitting })
        } else {
            let (h, a) = (setup.h.matrix().clone(), setup.a.matrix().clone());
            Ok(Kernel::General { h, a, hbar: setup.hbar, splitting })
        }
    }

    fn pauli_split(h: &[f64; 4], a: &[f64; 4], hbar: f64, splitting: Splitting, phi: f64, tau: f64) -> Matrix2<C64> {
        match splitting {
            Splitting::Exact => Self::pauli_step(h, a, hbar, phi, tau),
            Splitting::Symmetric => {
                let half = Self::pauli_step(h, &[0.0; 4], hbar, 0.0, tau / 2.0);
                half * Self::pauli_step(&[0.0; 4], a, hbar, phi, tau) * half
            }
        }
    }

    fn pauli_step(h: &[f64; 4], a: &[f64; 4], hbar: f64, phi: f64, tau: f64) -> Matrix2<C64> {
        let s = tau / hbar;
        let m = |k: usize| (h[k] - hbar * phi * a[k]) * s;
        let (m0, mx, my, mz) = (m(0), m(1), m(2), m(3));
        let norm = (mx * mx + my * my + mz * mz).sqrt();
        let (sn, cs) = norm.sin_cos();
        // sin|m|/|m| → 1 as |m| → 0
        let sinc = if norm > 1e-8 { sn / norm } else { 1.0 - norm * norm / 6.0 };
        let (nx, ny, nz) = (mx * sinc, my * sinc, mz * sinc);
        let phase = C64::from_polar(1.0, -m0);
        // cos|m|·1 − i sinc·(m·σ)
        Matrix2::new(c64(cs, -nz), c64(-ny, -nx), c64(ny, -nx), c64(cs, nz)) * phase
    }

    fn general_step(h: &CMatrix, a: &CMatrix, hbar: f64, phi: f64, tau: f64) -> CMatrix {
        let hp = HermitianOperator::from_products(h - a * c64(hbar * phi, 0.0)).expect("H − ħφA is Hermitian");
        let (vals, vecs) = hp.eigen();
        let phases =
            nalgebra::DVector::from_iterator(vals.len(), vals.iter().map(|e| C64::from_polar(1.0, -e * tau / hbar)));
        &vecs * CMatrix::from_diagonal(&phases) * vecs.adjoint()
    }

    fn step(&self, phi: f64, tau: f64) -> CMatrix {
        match self {
            Kernel::Pauli { h, a, hbar, splitting } => {
                let u = Self::pauli_split(h, a, *hbar, *splitting, phi, tau);
                CMatrix::from_fn(2, 2, |i, j| u[(i, j)])
            }
            Kernel::General { h, a, hbar, splitting: Splitting::Exact } => Self::general_step(h, a, *hbar, phi, tau),
            Kernel::General { h, a, hbar, splitting: Splitting::Symmetric } => {
                let zero = CMatrix::zeros(h.nrows(), h.ncols());
                let half = Self::general_step(h, &zero, *hbar, 0.0, tau / 2.0);
                &half * Self::general_step(&zero, a, *hbar, phi, tau) * &half
            }
        }
    }

    /// `U_φ(t)` at each ascending `t` in `times`. Times falling inside a step
    /// use that step's `φ_j` for the partial interval.
    fn unitaries_at(&self, traj: &NoiseTrajectory, times: &[f64]) -> Result<Vec<CMatrix>> {
        let dt = traj.dt;
        let eps = 1e-9 * dt;
        if let Some(&last) = times.last() {
            if last > traj.duration() + eps {
                return Err(Error::param("t", format!("{last} beyond trajectory span {}", traj.duration())));
            }
        }
        if times.iter().any(|&t| !(t >= 0.0)) {
            return Err(Error::param("t", "times must be non-negative"));
        }
        match self {
            Kernel::Pauli { h, a, hbar, splitting } => {
                let mut u = Matrix2::<C64>::identity();
                let mut j = 0usize;
                let mut out = Vec::with_capacity(times.len());
                for &t in times {
                    while j < traj.phi.len() && (j + 1) as f64 * dt <= t + eps {
                        u = Self::pauli_split(h, a, *hbar, *splitting, traj.phi[j], dt) * u;
                        j += 1;
                    }
                    let rest = t - j as f64 * dt;
                    let ut =
                        if rest > eps { Self::pauli_split(h, a, *hbar, *splitting, traj.phi[j], rest) * u } else { u };
                    out.push(CMatrix::from_fn(2, 2, |r, c| ut[(r, c)]));
                }
                Ok(out)
            }
            Kernel::General { h, .. } => {
                let d = h.nrows();
                let mut u = CMatrix::identity(d, d);
                let mut j = 0usize;
                let mut out = Vec::with_capacity(times.len());
                for &t in times {
                    while j < traj.phi.len() && (j + 1) as f64 * dt <= t + eps {
                        u = self.step(traj.phi[j], dt) * u;
                        j += 1;
                    }
                    let rest = t - j as f64 * dt;
                    out.push(if rest > eps { self.step(traj.phi[j], rest) * &u } else { u.clone() });
                }
                Ok(out)
            }
        }
    }
}

/// Time-ordered product `U_φ(t) = Π_j exp(−i(H − ħφ_jA)dt/ħ)`.
pub fn heisenberg_propagate(setup: &MeasurementSetup, traj: &NoiseTrajectory, t: f64) -> Result<CMatrix> {
    let mut us = Kernel::new(setup, Splitting::Exact)?.unitaries_at(traj, &[t])?;
    Ok(us.pop().expect("one time requested"))
}

/// Monte Carlo estimate of one quasiprobability moment.
pub fn mc_quasi_moment(
    setup: &MeasurementSetup,
    rho: &DensityMatrix,
    query: &MomentQuery,
    mc: &McConfig,
) -> Result<CorrelationResult> {
    Ok(mc_quasi_moments(setup, rho, std::slice::from_ref(query), mc)?.remove(0))
}

/// Monte Carlo estimates of several moments from one shared set of
/// trajectories. Trajectory `i` uses random stream `i`; the step
/// discretization follows `mc.splitting`.
pub fn mc_quasi_moments(
    setup: &MeasurementSetup,
    rho: &DensityMatrix,
    queries: &[MomentQuery],
    mc: &McConfig,
) -> Result<Vec<CorrelationResult>> {
    mc.validate()?;
    if rho.dim() != setup.dim() {
        return Err(Error::DimensionMismatch { expected: setup.dim(), found: rho.dim() });
    }
    let mut anchored = Vec::with_capacity(queries.len());
    for q in queries {
        if q.order() > MAX_MC_ORDER {
            return Err(Error::param("times", format!("order {} exceeds the supported {MAX_MC_ORDER}", q.order())));
        }
        anchored.push(anchor_times(setup, rho, q.times())?);
    }
    let mut grid: Vec<f64> = anchored.iter().flatten().copied().collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let slots: Vec<Vec<usize>> =
        anchored.iter().map(|ts| ts.iter().map(|t| grid.partition_point(|g| g < t)).collect()).collect();
    let n_steps = grid.last().map_or(0, |&t| steps_to(t, mc.dt));

    let kernel = Kernel::new(setup, mc.splitting)?;
    let a = setup.a.matrix();
    let r = rho.matrix();
    let per_traj: Vec<Vec<f64>> = (0..mc.n_traj)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(mc.seed, i as u64);
            let traj = NoiseTrajectory::sample(setup.lambda, mc.dt, n_steps, &mut rng)?;
            let heis: Vec<CMatrix> = kernel.unitaries_at(&traj, &grid)?.iter().map(|u| u.adjoint() * a * u).collect();
            Ok(slots
                .iter()
                .map(|slot| {
                    let mut b = r.clone();
                    for &k in slot {
                        let ak = &heis[k];
                        b = (ak * &b + &b * ak) * c64(0.5, 0.0);
                    }
                    b.trace().re
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut accs = vec![Accumulator::new(); queries.len()];
    for values in &per_traj {
        for (acc, v) in accs.iter_mut().zip(values) {
            acc.push(*v);
        }
    }
    Ok(accs
        .iter()
        .map(|acc| CorrelationResult { value: acc.mean(), route: Route::MonteCarlo, stat_error: acc.std_error() })
        .collect())
}

/// `c_x·x(0) + c_p·p(0) + noise`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoAffine {
    pub coef_x: f64,
    pub coef_p: f64,
    pub noise: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoSolution {
    pub x: HoAffine,
    pub p: HoAffine,
}

/// Heisenberg solution of the measured oscillator along one noise
/// trajectory. The noise integrals are exact for piecewise-constant `φ`.
pub fn ho_trajectory_solution(params: &HoParams, traj: &NoiseTrajectory, t: f64) -> Result<HoSolution> {
    let eps = 1e-9 * traj.dt;
    if !(t >= 0.0) || t > traj.duration() + eps {
        return Err(Error::param("t", format!("{t} outside trajectory span [0, {}]", traj.duration())));
    }
    let (m, w, hbar) = (params.mass, params.omega, params.hbar);
    let (s, c) = (w * t).sin_cos();
    let (mut nx, mut np) = (0.0, 0.0);
    for (j, &phi) in traj.phi.iter().enumerate() {
        let lo = j as f64 * traj.dt;
        if lo >= t - eps {
            break;
        }
        let hi = ((j + 1) as f64 * traj.dt).min(t);
        let (s_lo, c_lo) = (w * (t - lo)).sin_cos();
        let (s_hi, c_hi) = (w * (t - hi)).sin_cos();
        nx += hbar * phi / (m * w * w) * (c_hi - c_lo);
        np += hbar * phi / w * (s_lo - s_hi);
    }
    Ok(HoSolution {
        x: HoAffine { coef_x: c, coef_p: s / (m * w), noise: nx },
        p: HoAffine { coef_x: -m * w * s, coef_p: c, noise: np },
    })
}

fn ho_noise_pair(p: &HoParams, t: f64, t_prime: f64, mc: &McConfig, i: usize) -> Result<(f64, f64)> {
    let mut rng = stream_rng(mc.seed, i as u64);
    let traj = NoiseTrajectory::sample(p.lambda, mc.dt, steps_to(t.max(t_prime), mc.dt), &mut rng)?;
    Ok((ho_trajectory_solution(p, &traj, t)?.x.noise, ho_trajectory_solution(p, &traj, t_prime)?.x.noise))
}

/// Monte Carlo `⟨δx(t)δx(t')⟩_q`. Each trajectory contributes the free
/// correlation plus the noise cross terms with the mean motion.
pub fn ho_mc_position_correlation(p: &HoParams, t: f64, t_prime: f64, mc: &McConfig) -> Result<CorrelationResult> {
    p.validate()?;
    mc.validate()?;
    if !(t >= 0.0) || !(t_prime >= 0.0) {
        return Err(Error::param("t", "times must be non-negative"));
    }
    let free = ho_free_corr(p, t, t_prime);
    let (m1, m2) = (ho_mean_x(p, t), ho_mean_x(p, t_prime));
    let pairs: Vec<(f64, f64)> =
        (0..mc.n_traj).into_par_iter().map(|i| ho_noise_pair(p, t, t_prime, mc, i)).collect::<Result<_>>()?;
    let acc: Accumulator = pairs.iter().map(|(x1, x2)| free + x1 * m2 + x2 * m1 + x1 * x2).collect();
    Ok(CorrelationResult { value: acc.mean(), route: Route::MonteCarlo, stat_error: acc.std_error() })
}

/// Sample statistics of the position noise integral at time `t`.
pub fn ho_mc_noise_variance(p: &HoParams, t: f64, mc: &McConfig) -> Result<VarianceEstimate> {
    p.validate()?;
    mc.validate()?;
    let xs: Vec<f64> =
        (0..mc.n_traj).into_par_iter().map(|i| ho_noise_pair(p, t, t, mc, i).map(|(x, _)| x)).collect::<Result<_>>()?;
    variance_estimate(&xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{matrix_exponential, max_abs_diff};

    fn tls(lambda: f64) -> MeasurementSetup {
        MeasurementSetup::two_level(1.0, lambda).unwrap()
    }

    #[test]
    fn zero_noise_is_free_evolution() {
        let s = tls(0.0);
        let traj = NoiseTrajectory::zeros(0.01, 300).unwrap();
        let u = heisenberg_propagate(&s, &traj, 2.345).unwrap();
        let expected = matrix_exponential(&(s.h.matrix() * c64(0.0, -2.345))).unwrap();
        assert!(max_abs_diff(&u, &expected) < 1e-12);
    }

    #[test]
    fn commuting_steps_give_single_rotation() {
        let s = MeasurementSetup::new(HermitianOperator::zeros(2), HermitianOperator::pauli_z(), 1.0).unwrap();
        let traj = NoiseTrajectory::sample(1.0, 0.01, 100, &mut stream_rng(5, 0)).unwrap();
        let total: f64 = traj.phi.iter().sum::<f64>() * traj.dt;
        let u = heisenberg_propagate(&s, &traj, 1.0).unwrap();
        let expected = matrix_exponential(&(HermitianOperator::pauli_z().matrix() * c64(0.0, total))).unwrap();
        assert!(max_abs_diff(&u, &expected) < 1e-12);
    }

    #[test]
    fn pauli_kernel_matches_general_kernel() {
        let s = tls(0.7);
        for splitting in [Splitting::Exact, Splitting::Symmetric] {
            let pauli = Kernel::new(&s, splitting).unwrap();
            let general = Kernel::General { h: s.h.matrix().clone(), a: s.a.matrix().clone(), hbar: 1.0, splitting };
            for (phi, tau) in [(0.0, 0.01), (3.2, 0.01), (-40.0, 0.003), (1e-9, 1e-7)] {
                assert!(max_abs_diff(&pauli.step(phi, tau), &general.step(phi, tau)) < 1e-13);
            }
        }
    }

    #[test]
    fn off_grid_and_span_checks() {
        let s = tls(0.3);
        let traj = NoiseTrajectory::sample(0.3, 0.1, 10, &mut stream_rng(6, 0)).unwrap();
        assert!(heisenberg_propagate(&s, &traj, 1.0).is_ok());
        assert!(heisenberg_propagate(&s, &traj, 1.01).is_err());
        assert!(heisenberg_propagate(&s, &traj, -0.1).is_err());
        // half of a step and then the other half reproduce the full step
        let k = Kernel::new(&s, Splitting::Exact).unwrap();
        let half = k.step(traj.phi[0], 0.05);
        assert!(max_abs_diff(&(&half * &half), &k.step(traj.phi[0], 0.1)) < 1e-13);
        let u = k.unitaries_at(&traj, &[0.05, 0.1]).unwrap();
        assert!(max_abs_diff(&u[0], &half) < 1e-13);
    }

    #[test]
    fn order_above_four_is_rejected() {
        let s = tls(0.2);
        let q = MomentQuery::new(&[0.1, 0.2, 0.3, 0.4, 0.5]).unwrap();
        let mc = McConfig::new(10, 0.01, 0).unwrap();
        assert!(mc_quasi_moment(&s, &DensityMatrix::maximally_mixed(2), &q, &mc).is_err());
        assert!(McConfig::new(0, 0.01, 0).is_err());
        assert!(McConfig::new(10, 0.0, 0).is_err());
    }

    #[test]
    fn ho_revival_without_noise() {
        let p = HoParams::ground_state(1.0, 1.0, 1.0, 0.0).unwrap();
        let period = 2.0 * std::f64::consts::PI;
        let traj = NoiseTrajectory::zeros(period / 100.0, 100).unwrap();
        let sol = ho_trajectory_solution(&p, &traj, period).unwrap();
        assert!((sol.x.coef_x - 1.0).abs() < 1e-14);
        assert!(sol.x.coef_p.abs() < 1e-14);
        assert_eq!(sol.x.noise, 0.0);
    }

    #[test]
    fn ho_noise_matches_direct_quadrature() {
        // x'' = −ω²x + ħφ/m integrated with a fine symplectic scheme
        let p = HoParams {
            mass: 1.3,
            omega: 0.8,
            hbar: 1.0,
            lambda: 0.5,
            ..HoParams::ground_state(1.3, 0.8, 1.0, 0.5).unwrap()
        };
        let traj = NoiseTrajectory::sample(0.5, 0.05, 40, &mut stream_rng(8, 0)).unwrap();
        let t = 1.93;
        let sol = ho_trajectory_solution(&p, &traj, t).unwrap();
        let sub = 2000;
        let h = traj.dt / sub as f64;
        let (mut x, mut v) = (0.0f64, 0.0f64);
        let mut now = 0.0;
        'outer: for &phi in &traj.phi {
            for _ in 0..sub {
                if now >= t - 1e-12 {
                    break 'outer;
                }
                let step = h.min(t - now);
                let force = |x: f64| -p.omega * p.omega * x + p.hbar * phi / p.mass;
                v += 0.5 * step * force(x);
                x += step * v;
                v += 0.5 * step * force(x);
                now += step;
            }
        }
        assert!((sol.x.noise - x).abs() < 1e-6, "{} vs {x}", sol.x.noise);
        assert!((sol.p.noise - p.mass * v).abs() < 1e-6);
    }
}
