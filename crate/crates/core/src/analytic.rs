//! Closed-form results for the monitored two-level system and the
//! position-monitored harmonic oscillator.
//!
//! Two-level conventions: `H = ħωσx/2`, measured observable `σz`, initial
//! state `(1 + σz)/2`. The z-component of the nonselective state obeys
//! `z'' + 2λz' + ω²z = 0` with `z(0) = 1`, `z'(0) = 0`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Below this `|ω² − λ²|·t²` the two-level formulas switch to power series
/// around the critical point.
const CRITICAL_SERIES_CUTOFF: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TlsParams {
    pub omega: f64,
    pub lambda: f64,
}

impl TlsParams {
    pub fn new(omega: f64, lambda: f64) -> Result<Self> {
        if !(omega > 0.0) || !omega.is_finite() {
            return Err(Error::param("omega", format!("must be positive, got {omega}")));
        }
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::param("lambda", format!("must be non-negative, got {lambda}")));
        }
        Ok(Self { omega, lambda })
    }

    /// `Ω² = ω² − λ²` (negative in the overdamped regime).
    pub fn big_omega_sq(&self) -> f64 {
        (self.omega - self.lambda) * (self.omega + self.lambda)
    }

    /// `r² = 1 − (λ/ω)²`.
    pub fn r_sq(&self) -> f64 {
        let q = self.lambda / self.omega;
        (1.0 - q) * (1.0 + q)
    }
}

/// `cos(√s·t)` and `sin(√s·t)/√s` as entire functions of the signed `s`.
fn cos_sinc(s: f64, t: f64) -> (f64, f64) {
    let x = s * t * t;
    if x.abs() < CRITICAL_SERIES_CUTOFF {
        // Σ (−x)^k/(2k)!  and  t·Σ (−x)^k/(2k+1)!
        let (mut c, mut sn) = (0.0, 0.0);
        let mut term_c = 1.0;
        let mut term_s = 1.0;
        for k in 0..12 {
            c += term_c;
            sn += term_s;
            let k2 = 2.0 * k as f64;
            term_c *= -x / ((k2 + 1.0) * (k2 + 2.0));
            term_s *= -x / ((k2 + 2.0) * (k2 + 3.0));
        }
        (c, sn * t)
    } else if s > 0.0 {
        let w = s.sqrt();
        ((w * t).cos(), (w * t).sin() / w)
    } else {
        let w = (-s).sqrt();
        ((w * t).cosh(), (w * t).sinh() / w)
    }
}

/// z-component of the Bloch vector, `e^{−λt}[cos Ωt + λ sin(Ωt)/Ω]`, with the
/// critical and overdamped continuations.
pub fn tls_z(p: &TlsParams, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::param("t", format!("must be non-negative, got {t}")));
    }
    let s = p.big_omega_sq();
    let lam = p.lambda;
    if s < 0.0 && (-s) * t * t >= CRITICAL_SERIES_CUTOFF {
        // overdamped, written as decaying exponentials to stay finite
        let kappa = (-s).sqrt();
        let slow = (-(lam - kappa) * t).exp();
        let fast = (-(lam + kappa) * t).exp();
        return Ok(0.5 * (slow * (1.0 + lam / kappa) + fast * (1.0 - lam / kappa)));
    }
    let (c, sn) = cos_sinc(s, t);
    Ok((-lam * t).exp() * (c + lam * sn))
}

/// `⟨σz(t)σz(t')⟩_q = z(|t − t'|)`.
pub fn tls_corr(p: &TlsParams, t: f64, t_prime: f64) -> Result<f64> {
    if !(t >= 0.0) || !(t_prime >= 0.0) {
        return Err(Error::param("t", "times must be non-negative"));
    }
    tls_z(p, (t - t_prime).abs())
}

/// Fourth-order quasi-correlation `⟨X²⟩_q` of the Leggett-Garg-type
/// quantity `X = σz(0)σz(π/ω) + σz(−π/2ω)σz(π/2ω) + 2` in the maximally
/// mixed state.
pub fn lg_x2_closed(p: &TlsParams) -> f64 {
    let q = p.lambda / p.omega;
    let u = p.r_sq();
    // bracket = 1/u + (10 − 1/u)C + 10q·S with C = cos(π√u), S = sin(π√u)/√u
    //         = (1 − C)/u + 10C + 10q·S
    let (damping_c, damping_s, one_minus_c_over_u) = if u.abs() * PI * PI < CRITICAL_SERIES_CUTOFF {
        let (c, s) = cos_sinc(u, PI);
        // (1 − cos(π√u))/u = Σ_{k≥1} (−1)^{k+1} π^{2k} u^{k−1}/(2k)!
        let mut acc = 0.0;
        let mut term = PI * PI / 2.0;
        for k in 1..12 {
            acc += term;
            let k2 = 2.0 * k as f64;
            term *= -u * PI * PI / ((k2 + 1.0) * (k2 + 2.0));
        }
        let e = (-q * PI).exp();
        (e * c, e * s, e * acc)
    } else if u > 0.0 {
        let r = u.sqrt();
        let e = (-q * PI).exp();
        let c = (PI * r).cos();
        (e * c, e * (PI * r).sin() / r, e * (1.0 - c) / u)
    } else {
        // e^{−qπ}cosh(πs), e^{−qπ}sinh(πs) without overflow
        let s = (-u).sqrt();
        let plus = (PI * (s - q)).exp();
        let minus = (-PI * (s + q)).exp();
        let ec = 0.5 * (plus + minus);
        let es = 0.5 * (plus - minus);
        (ec, es / s, ((-q * PI).exp() - ec) / u)
    };
    6.0 + one_minus_c_over_u + 10.0 * damping_c + 10.0 * q * damping_s
}

/// Oscillator parameters with the initial first and second moments.
/// `cov_xp_w` is the Wigner-ordered covariance `⟨{δx, δp}⟩/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoParams {
    pub mass: f64,
    pub omega: f64,
    pub hbar: f64,
    pub lambda: f64,
    pub mean_x: f64,
    pub mean_p: f64,
    pub var_x: f64,
    pub var_p: f64,
    pub cov_xp_w: f64,
}

impl HoParams {
    pub fn ground_state(mass: f64, omega: f64, hbar: f64, lambda: f64) -> Result<Self> {
        let p = Self {
            mass,
            omega,
            hbar,
            lambda,
            mean_x: 0.0,
            mean_p: 0.0,
            var_x: hbar / (2.0 * mass * omega),
            var_p: hbar * mass * omega / 2.0,
            cov_xp_w: 0.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("mass", self.mass), ("omega", self.omega), ("hbar", self.hbar)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::param("lambda", format!("must be non-negative, got {}", self.lambda)));
        }
        if !(self.var_x >= 0.0) || !(self.var_p >= 0.0) {
            return Err(Error::param("var_x", "variances must be non-negative"));
        }
        let robertson = self.var_x * self.var_p - self.cov_xp_w * self.cov_xp_w;
        if robertson < self.hbar * self.hbar / 4.0 - 1e-12 {
            return Err(Error::param("var_x", format!("uncertainty product {robertson} below ħ²/4")));
        }
        Ok(())
    }

    fn m_omega(&self) -> f64 {
        self.mass * self.omega
    }
}

/// `⟨x(t)⟩`; undamped and independent of λ.
pub fn ho_mean_x(p: &HoParams, t: f64) -> f64 {
    let wt = p.omega * t;
    p.mean_x * wt.cos() + p.mean_p / p.m_omega() * wt.sin()
}

/// Free (λ → 0) correlation `⟨δx(t)δx(t')⟩₀`.
pub fn ho_free_corr(p: &HoParams, t: f64, t_prime: f64) -> f64 {
    let (w, mw) = (p.omega, p.m_omega());
    p.var_x * (w * t).cos() * (w * t_prime).cos()
        + p.cov_xp_w / mw * (w * (t + t_prime)).sin()
        + p.var_p / (mw * mw) * (w * t).sin() * (w * t_prime).sin()
}

/// Backaction correlation `f_λ(t, t')`.
///
/// Near `t = t' = 0` the bracket cancels to `2ω²t³/3`, so small arguments
/// go through the series of `t − sin(2ωt)/2ω`.
pub fn ho_backaction(p: &HoParams, t: f64, t_prime: f64) -> Result<f64> {
    if !(t >= 0.0) || !(t_prime >= 0.0) {
        return Err(Error::param("t", "times must be non-negative"));
    }
    let w = p.omega;
    let pref = p.lambda * p.hbar * p.hbar / (2.0 * p.m_omega() * p.m_omega());
    let tmin = t.min(t_prime);
    let bracket = if t == t_prime && w * t < 1e-2 {
        // t − sin(2ωt)/(2ω) = Σ_{k≥1} (−1)^{k+1} (2ω)^{2k} t^{2k+1}/(2k+1)!
        let x = 2.0 * w * t;
        let mut term = x * x * t / 6.0;
        let mut acc = 0.0;
        for k in 1..8 {
            acc += term;
            let k2 = 2.0 * k as f64;
            term *= -x * x / ((k2 + 2.0) * (k2 + 3.0));
        }
        acc
    } else {
        tmin * (w * (t - t_prime)).cos() + ((w * (t - t_prime).abs()).sin() - (w * (t + t_prime)).sin()) / (2.0 * w)
    };
    Ok(pref * bracket)
}

/// Frequency-domain signal and noise budget of the oscillator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierNoise {
    pub signal: f64,
    pub quasi_noise: f64,
    pub detector_noise: f64,
    pub bound: f64,
}

/// Peak signal `⟨x̃(ω)⟩`, quasi noise, detector noise `1/(2t₀λ)` and the
/// λ- and t₀-independent lower bound `ħ/(√3 mω)` on the measurement-induced
/// part.
pub fn ho_fourier_noise(p: &HoParams, t0: f64) -> Result<FourierNoise> {
    if !(t0 > 2.0 * PI / p.omega) {
        return Err(Error::param("t0", format!("must exceed one period 2π/ω, got {t0}")));
    }
    let mw = p.m_omega();
    let backaction = p.lambda * t0 * p.hbar * p.hbar / (6.0 * mw * mw);
    Ok(FourierNoise {
        signal: p.mean_x,
        quasi_noise: p.var_x + backaction,
        detector_noise: 1.0 / (2.0 * t0 * p.lambda),
        bound: p.hbar / (3f64.sqrt() * mw),
    })
}

/// Measurement-induced Fourier noise `u·ħ²/6(mω)² + 1/(2u)` as a function of
/// `u = λt₀`.
pub fn detector_bound_lhs(p: &HoParams, lambda_t0: f64) -> f64 {
    let mw = p.m_omega();
    lambda_t0 * p.hbar * p.hbar / (6.0 * mw * mw) + 1.0 / (2.0 * lambda_t0)
}

/// The `λt₀ = √3·mω/ħ` that attains the bound.
pub fn detector_bound_minimizer(p: &HoParams) -> f64 {
    3f64.sqrt() * p.m_omega() / p.hbar
}

/// Quantum Zeno decay rate `ω²/2λ`; only defined in the overdamped regime.
pub fn zeno_rate(p: &TlsParams) -> Result<f64> {
    if !(p.lambda > p.omega) {
        return Err(Error::param("lambda", format!("Zeno rate needs λ > ω, got λ={} ω={}", p.lambda, p.omega)));
    }
    Ok(p.omega * p.omega / (2.0 * p.lambda))
}

/// Slowest exact decay exponent `λ − √(λ² − ω²)` of the overdamped z(t).
pub fn overdamped_slow_rate(p: &TlsParams) -> Result<f64> {
    if !(p.lambda > p.omega) {
        return Err(Error::param("lambda", "needs λ > ω"));
    }
    // λ − √(λ²−ω²) = ω²/(λ + √(λ²−ω²))
    Ok(p.omega * p.omega / (p.lambda + (-p.big_omega_sq()).sqrt()))
}
