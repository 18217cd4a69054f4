//! Quasiprobability multi-time moments of the measured observable.
//!
//! For sorted times `t₁ ≤ … ≤ tₙ` the moment is the superoperator chain
//!
//! ```text
//! ⟨a(t₁)⋯a(tₙ)⟩_q = Tr[Ă U(tₙ,tₙ₋₁) ⋯ Ă U(t₂,t₁) Ă U(t₁,0) ρ]
//! ```
//!
//! with `Ă B = {A, B}/2` and `U(t,s) = exp((t−s)L)`. The chain trace is
//! mathematically real; an imaginary residue above 1e-10 is reported as a
//! numerical failure.

use std::collections::HashMap;
use std::ops::{Add, Mul};
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::lindblad::{
    jordan_superoperator, liouvillian, propagator_from, stationarity_residual, vec_of, MeasurementSetup, Superoperator,
};
use crate::operators::{DensityMatrix, C64};

/// `‖L(ρ)‖` below which a state counts as stationary, allowing negative
/// query times to be shifted onto the time origin.
pub const STATIONARITY_TOL: f64 = 1e-10;
const IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Chain,
    ClosedForm,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CorrelationResult {
    pub value: f64,
    pub route: Route,
    /// Standard error; zero for deterministic routes.
    pub stat_error: f64,
}

impl CorrelationResult {
    pub fn exact(value: f64, route: Route) -> Self {
        Self { value, route, stat_error: 0.0 }
    }
}

/// The time arguments of one moment `⟨a(t₁)⋯a(tₙ)⟩_q`. Order is irrelevant
/// and repeats are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentQuery {
    times: Vec<f64>,
}

impl MomentQuery {
    pub fn new(times: &[f64]) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::param("times", "a moment query needs at least one time"));
        }
        if times.iter().any(|t| !t.is_finite()) {
            return Err(Error::param("times", "times must be finite"));
        }
        let mut times = times.to_vec();
        times.sort_by(f64::total_cmp);
        Ok(Self { times })
    }

    /// Sorted ascending.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn order(&self) -> usize {
        self.times.len()
    }
}

/// Sorts `times`; if the earliest is negative, `rho` must be stationary and
/// every time is shifted so the earliest sits at the origin.
pub(crate) fn anchor_times(setup: &MeasurementSetup, rho: &DensityMatrix, times: &[f64]) -> Result<Vec<f64>> {
    let mut ts = times.to_vec();
    ts.sort_by(f64::total_cmp);
    if let Some(&first) = ts.first() {
        if first < 0.0 {
            let residual = stationarity_residual(setup, rho)?;
            if residual >= STATIONARITY_TOL {
                return Err(Error::param(
                    "times",
                    format!("time {first} < 0 is only allowed for a stationary state (‖Lρ‖ = {residual:e})"),
                ));
            }
            for t in &mut ts {
                *t -= first;
            }
        }
    }
    Ok(ts)
}

/// Chain evaluator for one setup. Propagators are cached by time gap and
/// the cache may be shared between threads.
#[derive(Debug)]
pub struct ChainEvaluator {
    setup: MeasurementSetup,
    liouvillian: Superoperator,
    jordan: Superoperator,
    cache: RwLock<HashMap<u64, Arc<Superoperator>>>,
}

impl ChainEvaluator {
    pub fn new(setup: &MeasurementSetup) -> Self {
        Self {
            setup: setup.clone(),
            liouvillian: liouvillian(setup),
            jordan: jordan_superoperator(&setup.a),
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn setup(&self) -> &MeasurementSetup {
        &self.setup
    }

    /// `exp(gap·L)`, memoized on the exact bit pattern of `gap`.
    pub fn propagator(&self, gap: f64) -> Result<Arc<Superoperator>> {
        let key = gap.to_bits();
        if let Some(u) = self.cache.read().expect("propagator cache poisoned").get(&key) {
            return Ok(Arc::clone(u));
        }
        let u = Arc::new(propagator_from(&self.liouvillian, gap)?);
        self.cache.write().expect("propagator cache poisoned").entry(key).or_insert_with(|| Arc::clone(&u));
        Ok(u)
    }

    pub fn cached_propagators(&self) -> usize {
        self.cache.read().expect("propagator cache poisoned").len()
    }

    /// Evaluates the chain for an arbitrary (possibly empty) time multiset.
    pub fn moment_of(&self, rho: &DensityMatrix, times: &[f64]) -> Result<f64> {
        if rho.dim() != self.setup.dim() {
            return Err(Error::DimensionMismatch { expected: self.setup.dim(), found: rho.dim() });
        }
        let ts = anchor_times(&self.setup, rho, times)?;
        let d = self.setup.dim();
        let mut v: DVector<C64> = vec_of(rho.matrix());
        let mut now = 0.0;
        for &t in &ts {
            let gap = t - now;
            if gap > 0.0 {
                v = self.propagator(gap)?.apply_vec(&v);
            }
            v = self.jordan.apply_vec(&v);
            now = t;
        }
        let tr: C64 = (0..d).map(|k| v[k + k * d]).sum();
        if tr.im.abs() > IMAG_TOL * tr.re.abs().max(1.0) {
            return Err(Error::Numerical(format!("chain trace has imaginary part {:e}", tr.im)));
        }
        Ok(tr.re)
    }

    pub fn moment(&self, rho: &DensityMatrix, query: &MomentQuery) -> Result<CorrelationResult> {
        Ok(CorrelationResult::exact(self.moment_of(rho, query.times())?, Route::Chain))
    }

    pub fn polynomial_moment(&self, rho: &DensityMatrix, poly: &Polynomial) -> Result<CorrelationResult> {
        let mut total = 0.0;
        for term in poly.simplified().terms() {
            total += term.coef * self.moment_of(rho, &term.times)?;
        }
        Ok(CorrelationResult::exact(total, Route::Chain))
    }
}

/// `⟨a(t₁)⋯a(tₙ)⟩_q` by the superoperator chain.
pub fn quasi_moment(setup: &MeasurementSetup, rho: &DensityMatrix, query: &MomentQuery) -> Result<CorrelationResult> {
    ChainEvaluator::new(setup).moment(rho, query)
}

/// Product `c · a(t₁)⋯a(tₙ)`; an empty product is the constant `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coef: f64,
    /// Sorted ascending.
    pub times: Vec<f64>,
}

/// Weighted sum of products of `a(tᵢ)` factors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn constant(c: f64) -> Self {
        Self { terms: vec![Monomial { coef: c, times: Vec::new() }] }
    }

    /// `a(t)`.
    pub fn var(t: f64) -> Self {
        Self::product(1.0, &[t])
    }

    pub fn product(coef: f64, times: &[f64]) -> Self {
        let mut times = times.to_vec();
        times.sort_by(f64::total_cmp);
        Self { terms: vec![Monomial { coef, times }] }
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    /// Adds `dt` to every time argument.
    pub fn shifted(&self, dt: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|m| Monomial { coef: m.coef, times: m.times.iter().map(|t| t + dt).collect() })
                .collect(),
        }
    }

    /// Merges monomials with identical time multisets and drops zeros.
    pub fn simplified(&self) -> Self {
        let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut terms: Vec<Monomial> = Vec::new();
        for m in &self.terms {
            let key: Vec<u64> = m.times.iter().map(|t| t.to_bits()).collect();
            match index.get(&key) {
                Some(&i) => terms[i].coef += m.coef,
                None => {
                    index.insert(key, terms.len());
                    terms.push(m.clone());
                }
            }
        }
        terms.retain(|m| m.coef != 0.0);
        Self { terms }
    }

    pub fn max_order(&self) -> usize {
        self.terms.iter().map(|m| m.times.len()).max().unwrap_or(0)
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(mut self, rhs: Polynomial) -> Polynomial {
        self.terms.extend(rhs.terms);
        self
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                let mut times = a.times.clone();
                times.extend_from_slice(&b.times);
                times.sort_by(f64::total_cmp);
                terms.push(Monomial { coef: a.coef * b.coef, times });
            }
        }
        Polynomial { terms }
    }
}

/// Quasi-expectation of a polynomial in `a(t)`, expanded by linearity.
pub fn quasi_polynomial_moment(
    setup: &MeasurementSetup,
    rho: &DensityMatrix,
    poly: &Polynomial,
) -> Result<CorrelationResult> {
    ChainEvaluator::new(setup).polynomial_moment(rho, poly)
}

/// `X = a(0)a(π/ω) + a(−π/2ω)a(π/2ω) + 2` for the two-level setup.
pub fn leggett_garg_x(omega: f64) -> Polynomial {
    use std::f64::consts::PI;
    Polynomial::product(1.0, &[0.0, PI / omega])
        + Polynomial::product(1.0, &[-PI / (2.0 * omega), PI / (2.0 * omega)])
        + Polynomial::constant(2.0)
}

/// `⟨X²⟩_q` in the maximally mixed two-level state, with every time shifted
/// by `π/2ω` so the chain starts at the origin.
pub fn leggett_garg_x2(omega: f64, lambda: f64) -> Result<CorrelationResult> {
    let setup = MeasurementSetup::two_level(omega, lambda)?;
    let x = leggett_garg_x(omega);
    let x2 = (&x * &x).shifted(std::f64::consts::PI / (2.0 * omega));
    quasi_polynomial_moment(&setup, &DensityMatrix::maximally_mixed(2), &x2)
}

/// Second-order Gram matrix of `{1, a(t₁), …, a(tₙ)}` under the
/// quasiprobability, `G₀₀ = 1`, `G₀ᵢ = ⟨a(tᵢ)⟩_q`, `Gᵢⱼ = ⟨a(tᵢ)a(tⱼ)⟩_q`,
/// and its smallest eigenvalue. Its Schur complement is the covariance
/// `⟨δa(tᵢ)δa(tⱼ)⟩_q`, so positivity of one is positivity of the other.
pub fn weak_positivity_gram(
    setup: &MeasurementSetup,
    rho: &DensityMatrix,
    times: &[f64],
) -> Result<(DMatrix<f64>, f64)> {
    if times.is_empty() {
        return Err(Error::param("times", "need at least one time"));
    }
    let eval = ChainEvaluator::new(setup);
    let n = times.len();
    let mut g = DMatrix::<f64>::zeros(n + 1, n + 1);
    g[(0, 0)] = 1.0;
    for i in 0..n {
        let m = eval.moment_of(rho, &[times[i]])?;
        g[(0, i + 1)] = m;
        g[(i + 1, 0)] = m;
        for j in i..n {
            let m2 = eval.moment_of(rho, &[times[i], times[j]])?;
            g[(i + 1, j + 1)] = m2;
            g[(j + 1, i + 1)] = m2;
        }
    }
    let min_eig = SymmetricEigen::new(g.clone()).eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((g, min_eig))
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::param(name, format!("must be positive, got {v}")));
    }
    Ok(())
}

/// Detector variance of the time average over `t₀`: `1/(4λt₀)`.
pub fn detector_variance_time_avg(lambda: f64, t0: f64) -> Result<f64> {
    positive("lambda", lambda)?;
    positive("t0", t0)?;
    Ok(1.0 / (4.0 * lambda * t0))
}

/// Detector variance of the cosine transform `(2/t₀)∫cos(νt)a(t)dt`:
/// `1/(2λt₀)`.
pub fn detector_variance_fourier(lambda: f64, t0: f64) -> Result<f64> {
    positive("lambda", lambda)?;
    positive("t0", t0)?;
    Ok(1.0 / (2.0 * lambda * t0))
}

/// Signal-to-noise ratio `2a√(λt₀)` of the time average when the observable
/// commutes with the Hamiltonian and the state is an eigenstate.
pub fn snr_commuting(a_eigenvalue: f64, lambda: f64, t0: f64) -> Result<f64> {
    positive("lambda", lambda)?;
    positive("t0", t0)?;
    Ok(2.0 * a_eigenvalue * (lambda * t0).sqrt())
}

/// Joint cumulant of `n` variables from their joint moments,
/// `κ = Σ_π (|π|−1)! (−1)^{|π|−1} Π_{B∈π} μ(B)` over set partitions `π`.
/// `moment` receives the sorted indices of one block.
pub fn joint_cumulant(n: usize, moment: impl Fn(&[usize]) -> Result<f64>) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n", "cumulant order must be at least 1"));
    }
    if n > 10 {
        return Err(Error::param("n", format!("order {n} too large for partition enumeration")));
    }
    let mut memo: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut total = 0.0;
    // restricted growth strings enumerate set partitions
    let mut labels = vec![0usize; n];
    loop {
        let blocks = labels.iter().max().map_or(0, |m| m + 1);
        let mut product = 1.0;
        for b in 0..blocks {
            let idx: Vec<usize> = (0..n).filter(|&i| labels[i] == b).collect();
            let mu = match memo.get(&idx) {
                Some(&v) => v,
                None => {
                    let v = moment(&idx)?;
                    memo.insert(idx, v);
                    v
                }
            };
            product *= mu;
        }
        let fact: f64 = (1..blocks).map(|k| k as f64).product();
        let sign = if blocks % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * fact * product;

        // next restricted growth string
        let mut i = n;
        loop {
            if i == 1 {
                return Ok(total);
            }
            i -= 1;
            let max_prefix = labels[..i].iter().max().copied().unwrap_or(0);
            if labels[i] <= max_prefix {
                labels[i] += 1;
                for l in labels.iter_mut().skip(i + 1) {
                    *l = 0;
                }
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{lg_x2_closed, tls_z, TlsParams};
    use crate::lindblad::evolve;
    use crate::operators::{c64, CMatrix, HermitianOperator};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn up() -> DensityMatrix {
        DensityMatrix::basis(2, 0).unwrap()
    }

    #[test]
    fn first_moment_is_z() {
        let s = MeasurementSetup::two_level(1.0, 0.3).unwrap();
        let p = TlsParams::new(1.0, 0.3).unwrap();
        for t in [0.0, 0.4, 1.7, 5.0] {
            let m = quasi_moment(&s, &up(), &MomentQuery::new(&[t]).unwrap()).unwrap();
            assert_eq!(m.route, Route::Chain);
            assert_eq!(m.stat_error, 0.0);
            assert_abs_diff_eq!(m.value, tls_z(&p, t).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn second_moment_is_z_of_difference() {
        let s = MeasurementSetup::two_level(1.0, 0.3).unwrap();
        let p = TlsParams::new(1.0, 0.3).unwrap();
        let m = quasi_moment(&s, &up(), &MomentQuery::new(&[1.0, 2.5]).unwrap()).unwrap();
        assert_abs_diff_eq!(m.value, tls_z(&p, 1.5).unwrap(), epsilon = 1e-8);
    }

    #[test]
    fn coincident_times_give_a_squared() {
        let s = MeasurementSetup::two_level(1.0, 0.6).unwrap();
        let m = quasi_moment(&s, &up(), &MomentQuery::new(&[1.3, 1.3]).unwrap()).unwrap();
        assert_abs_diff_eq!(m.value, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn coincident_times_match_direct_operator_algebra() {
        // ⟨a(t)a(t)⟩_q = tr(Ă Ă ρ(t)) = tr(A² ρ(t)) for any observable
        let a = HermitianOperator::new(CMatrix::from_row_slice(
            3,
            3,
            &[
                c64(1.0, 0.),
                c64(0.5, 0.2),
                c64(0., 0.),
                c64(0.5, -0.2),
                c64(-0.3, 0.),
                c64(0.1, 0.),
                c64(0., 0.),
                c64(0.1, 0.),
                c64(2.0, 0.),
            ],
        ))
        .unwrap();
        let h = HermitianOperator::from_real_diagonal(&[0.0, 1.0, 2.5]).unwrap();
        let s = MeasurementSetup::new(h, a.clone(), 0.4).unwrap();
        let rho = DensityMatrix::pure(&[c64(1.0, 0.0), c64(0.0, 1.0), c64(0.5, 0.0)]).unwrap();
        let chain = quasi_moment(&s, &rho, &MomentQuery::new(&[0.9, 0.9]).unwrap()).unwrap().value;
        let rho_t = evolve(&rho, &s, 0.9).unwrap();
        let direct = rho_t.expectation(&(a.matrix() * a.matrix())).re;
        assert_abs_diff_eq!(chain, direct, epsilon = 1e-12);
    }

    #[test]
    fn empty_product_is_normalization() {
        let s = MeasurementSetup::two_level(1.0, 0.6).unwrap();
        let eval = ChainEvaluator::new(&s);
        assert_abs_diff_eq!(eval.moment_of(&up(), &[]).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn query_order_does_not_matter() {
        let s = MeasurementSetup::two_level(1.0, 0.2).unwrap();
        let a = quasi_moment(&s, &up(), &MomentQuery::new(&[2.0, 0.3, 1.1]).unwrap()).unwrap();
        let b = quasi_moment(&s, &up(), &MomentQuery::new(&[0.3, 1.1, 2.0]).unwrap()).unwrap();
        assert!((a.value - b.value).abs() < 1e-12);
    }

    #[test]
    fn negative_times_need_a_stationary_state() {
        let s = MeasurementSetup::two_level(1.0, 0.2).unwrap();
        let q = MomentQuery::new(&[-0.5, 0.5]).unwrap();
        assert!(quasi_moment(&s, &up(), &q).is_err());
        let mixed = DensityMatrix::maximally_mixed(2);
        let shifted = quasi_moment(&s, &mixed, &q).unwrap().value;
        let direct = quasi_moment(&s, &mixed, &MomentQuery::new(&[0.0, 1.0]).unwrap()).unwrap().value;
        assert_abs_diff_eq!(shifted, direct, epsilon = 1e-14);
    }

    #[test]
    fn stationary_state_is_shift_invariant() {
        let s = MeasurementSetup::two_level(1.0, 0.2).unwrap();
        let mixed = DensityMatrix::maximally_mixed(2);
        let base = [0.1, 0.8, 0.8, 2.0];
        let reference = quasi_moment(&s, &mixed, &MomentQuery::new(&base).unwrap()).unwrap().value;
        for shift in [0.37, 2.0, 10.0] {
            let ts: Vec<f64> = base.iter().map(|t| t + shift).collect();
            let v = quasi_moment(&s, &mixed, &MomentQuery::new(&ts).unwrap()).unwrap().value;
            assert!((v - reference).abs() < 1e-10);
        }
    }

    #[test]
    fn polynomial_of_maximally_mixed_state() {
        let s = MeasurementSetup::two_level(1.0, 0.5).unwrap();
        let p = Polynomial::var(0.7) + Polynomial::constant(1.0);
        let sq = &p * &p;
        let v = quasi_polynomial_moment(&s, &DensityMatrix::maximally_mixed(2), &sq).unwrap();
        assert_abs_diff_eq!(v.value, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn leggett_garg_chain_matches_closed_form() {
        for lambda in [1e-3, 0.05, 0.3, 1.0, 2.0, 10.0] {
            let chain = leggett_garg_x2(1.0, lambda).unwrap().value;
            let closed = lg_x2_closed(&TlsParams::new(1.0, lambda).unwrap());
            assert!((chain - closed).abs() < 1e-8, "λ={lambda}: {chain} vs {closed}");
        }
        let chain = leggett_garg_x2(2.0, 0.7).unwrap().value;
        assert!((chain - lg_x2_closed(&TlsParams::new(2.0, 0.7).unwrap())).abs() < 1e-8);
    }

    #[test]
    fn leggett_garg_limits() {
        assert_abs_diff_eq!(leggett_garg_x2(1.0, 1e-4).unwrap().value, -2.0, epsilon = 0.01);
        assert!((leggett_garg_x2(1.0, 100.0).unwrap().value - 16.0).abs() < 0.5);
        assert!(leggett_garg_x2(1.0, 1.0 / 12.0).unwrap().value < 0.0);
        assert!(leggett_garg_x2(1.0, 1.0 / 10.0).unwrap().value > 0.0);
    }

    #[test]
    fn leggett_garg_reuses_propagators() {
        let s = MeasurementSetup::two_level(1.0, 0.3).unwrap();
        let eval = ChainEvaluator::new(&s);
        let x = leggett_garg_x(1.0);
        let x2 = (&x * &x).shifted(PI / 2.0);
        eval.polynomial_moment(&DensityMatrix::maximally_mixed(2), &x2).unwrap();
        assert!(eval.cached_propagators() <= 6, "{} propagators cached", eval.cached_propagators());
    }

    #[test]
    fn gram_matrix_examples() {
        for lambda in [0.0, 0.3, 1.0, 4.0] {
            let s = MeasurementSetup::two_level(1.0, lambda).unwrap();
            let (_, min_eig) = weak_positivity_gram(&s, &up(), &[0.0, PI / 2.0, PI]).unwrap();
            assert!(min_eig >= -1e-10);
        }
        let s = MeasurementSetup::two_level(1.0, 0.3).unwrap();
        let (g, _) = weak_positivity_gram(&s, &up(), &[0.8]).unwrap();
        assert_eq!(g.shape(), (2, 2));
        assert!(g[(1, 1)] - g[(0, 1)] * g[(0, 1)] >= 0.0);
        assert!(weak_positivity_gram(&s, &up(), &[]).is_err());
    }

    #[test]
    fn detector_formulas() {
        assert_abs_diff_eq!(detector_variance_time_avg(1.0, 1.0).unwrap(), 0.25);
        assert_abs_diff_eq!(detector_variance_time_avg(0.5, 0.5).unwrap(), 1.0);
        assert!(detector_variance_time_avg(0.0, 1.0).is_err());
        assert_abs_diff_eq!(detector_variance_fourier(1.0, 1.0).unwrap(), 0.5);
        assert_abs_diff_eq!(detector_variance_fourier(0.01, 100.0).unwrap(), 0.5, epsilon = 1e-15);
        assert!(detector_variance_fourier(1.0, -1.0).is_err());
        assert_abs_diff_eq!(snr_commuting(1.0, 1.0, 1.0).unwrap(), 2.0);
        assert_eq!(snr_commuting(0.0, 1.0, 1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(snr_commuting(1.0, 0.01, 1e4).unwrap(), 20.0, epsilon = 1e-12);
        assert!(snr_commuting(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn cumulants_from_moments() {
        // a constant has no cumulants beyond the first
        let c: f64 = 1.7;
        let k1 = joint_cumulant(1, |b| Ok(c.powi(b.len() as i32))).unwrap();
        let k3 = joint_cumulant(3, |b| Ok(c.powi(b.len() as i32))).unwrap();
        assert_abs_diff_eq!(k1, c);
        assert_abs_diff_eq!(k3, 0.0, epsilon = 1e-12);
        // second cumulant is the covariance
        let mu = |b: &[usize]| -> Result<f64> {
            Ok(match b {
                [0] => 0.5,
                [1] => -0.25,
                [0, 1] => 0.9,
                _ => unreachable!(),
            })
        };
        assert_abs_diff_eq!(joint_cumulant(2, mu).unwrap(), 0.9 + 0.125);
        // standard normal: fourth moment 3, fourth cumulant 0
        let normal = |b: &[usize]| -> Result<f64> {
            Ok(match b.len() {
                1 | 3 => 0.0,
                2 => 1.0,
                4 => 3.0,
                _ => unreachable!(),
            })
        };
        assert_abs_diff_eq!(joint_cumulant(4, normal).unwrap(), 0.0, epsilon = 1e-12);
        assert!(joint_cumulant(0, |_| Ok(0.0)).is_err());
    }
}
