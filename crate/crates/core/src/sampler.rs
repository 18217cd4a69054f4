//! Selective continuous measurement as a sequence of Gaussian Kraus steps.
//!
//! Each step of length `dt` applies the free unitary `exp(−iH dt/ħ)` and then
//! the Kraus operator `K(a) ∝ exp(−λ̄(a − A)²)` with `λ̄ = λ dt`. The outcome
//! density is the Gaussian mixture `Σ_k w_k N(a_k, 1/(4λ̄))` over the
//! eigenvalues `a_k` of `A` weighted by the current populations. The outcome
//! of step `j` is stamped with time `(j+1)·dt`.
//!
//! The state is kept in the eigenbasis of `A`, where the Kraus update is
//! elementwise: `ρ_kl ← ρ_kl · exp(−λ̄[(a−a_k)² + (a−a_l)²])`, renormalized.
//! Degenerate eigenvalues get identical factors, so coherences inside an
//! eigenspace are untouched.

use std::io;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lindblad::MeasurementSetup;
use crate::operators::{c64, matrix_exponential, CMatrix, DensityMatrix, HermitianOperator, C64};
use crate::rng::stream_rng;

const WEIGHT_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct RecordConfig {
    pub setup: MeasurementSetup,
    pub dt: f64,
    pub n_steps: usize,
    pub seed: u64,
}

impl RecordConfig {
    pub fn new(setup: MeasurementSetup, dt: f64, n_steps: usize, seed: u64) -> Result<Self> {
        let c = Self { setup, dt, n_steps, seed };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return Err(Error::param("dt", format!("must be positive, got {}", self.dt)));
        }
        if self.n_steps == 0 {
            return Err(Error::param("n_steps", "must be at least 1"));
        }
        let lb = self.lambda_bar();
        if !(lb > 0.0) || !lb.is_finite() {
            return Err(Error::param("lambda", format!("λ·dt must be positive, got {lb}")));
        }
        Ok(())
    }

    /// `λ̄ = λ·dt`.
    pub fn lambda_bar(&self) -> f64 {
        self.setup.lambda * self.dt
    }

    pub fn duration(&self) -> f64 {
        self.n_steps as f64 * self.dt
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord {
    pub dt: f64,
    pub samples: Vec<f64>,
    pub final_state: DensityMatrix,
}

impl MeasurementRecord {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time stamp `(j+1)·dt` of outcome `j`.
    pub fn time(&self, step: usize) -> f64 {
        (step + 1) as f64 * self.dt
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }
}

/// Kraus update in the eigenbasis of `A`, on a row-major `d×d` buffer.
#[derive(Debug, Clone)]
struct EigenKraus {
    values: Vec<f64>,
    lambda_bar: f64,
    sigma: f64,
}

impl EigenKraus {
    fn new(values: Vec<f64>, lambda_bar: f64) -> Result<Self> {
        if !(lambda_bar > 0.0) || !lambda_bar.is_finite() {
            return Err(Error::param("lambda_bar", format!("must be positive, got {lambda_bar}")));
        }
        Ok(Self { values, lambda_bar, sigma: (4.0 * lambda_bar).sqrt().recip() })
    }

    fn apply<R: Rng + ?Sized>(&self, s: &mut [C64], factors: &mut [f64], rng: &mut R) -> Result<f64> {
        let d = self.values.len();
        let total: f64 = (0..d).map(|k| s[k * d + k].re).sum();
        if (total - 1.0).abs() > WEIGHT_TOL {
            return Err(Error::Numerical(format!("mixture weights sum to {total}")));
        }
        let mut u = rng.random::<f64>() * total;
        let mut comp = d - 1;
        for k in 0..d {
            let w = s[k * d + k].re.max(0.0);
            if u < w {
                comp = k;
                break;
            }
            u -= w;
        }
        let z: f64 = rng.sample(StandardNormal);
        let a = self.values[comp] + self.sigma * z;

        let mut min_sq = f64::INFINITY;
        for (k, f) in factors.iter_mut().enumerate() {
            *f = (a - self.values[k]).powi(2);
            min_sq = min_sq.min(*f);
        }
        for f in factors.iter_mut() {
            *f = (-self.lambda_bar * (*f - min_sq)).exp();
        }
        let mut tr = 0.0;
        for i in 0..d {
            for j in 0..d {
                s[i * d + j] *= factors[i] * factors[j];
            }
            tr += s[i * d + i].re;
        }
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::Numerical(format!("post-measurement trace {tr}")));
        }
        let inv = tr.recip();
        for z in s.iter_mut() {
            *z *= inv;
        }
        Ok(a)
    }
}

fn to_buffer(m: &CMatrix) -> Vec<C64> {
    let d = m.nrows();
    (0..d * d).map(|idx| m[(idx / d, idx % d)]).collect()
}

fn from_buffer(s: &[C64], d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| s[i * d + j])
}

/// One-step Gaussian Kraus sampler for a fixed observable and `λ̄`. The
/// eigendecomposition of `A` is computed once.
#[derive(Debug, Clone)]
pub struct KrausSampler {
    vectors: CMatrix,
    kraus: EigenKraus,
}

impl KrausSampler {
    pub fn new(a: &HermitianOperator, lambda_bar: f64) -> Result<Self> {
        let (values, vectors) = a.eigen();
        Ok(Self { vectors, kraus: EigenKraus::new(values, lambda_bar)? })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.kraus.values
    }

    /// Populations of `rho` in the eigenbasis of `A`.
    pub fn populations(&self, rho: &DensityMatrix) -> Vec<f64> {
        let s = self.vectors.adjoint() * rho.matrix() * &self.vectors;
        (0..s.nrows()).map(|k| s[(k, k)].re).collect()
    }

    /// Samples an outcome `a` and returns it with the conditional state
    /// `K(a)ρK(a)/P(a)`.
    pub fn sample_step<R: Rng + ?Sized>(&self, rho: &DensityMatrix, rng: &mut R) -> Result<(f64, DensityMatrix)> {
        let d = self.kraus.values.len();
        if rho.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: rho.dim() });
        }
        let mut s = to_buffer(&(self.vectors.adjoint() * rho.matrix() * &self.vectors));
        let mut factors = vec![0.0; d];
        let a = self.kraus.apply(&mut s, &mut factors, rng)?;
        let next = &self.vectors * from_buffer(&s, d) * self.vectors.adjoint();
        Ok((a, DensityMatrix::from_propagated(next)?))
    }
}

/// Convenience wrapper around [`KrausSampler::sample_step`].
pub fn sample_step<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    a: &HermitianOperator,
    lambda_bar: f64,
    rng: &mut R,
) -> Result<(f64, DensityMatrix)> {
    KrausSampler::new(a, lambda_bar)?.sample_step(rho, rng)
}

/// Record generator for one configuration. Holds the eigenbasis of `A` and
/// the step unitary expressed in it.
#[derive(Debug, Clone)]
pub struct RecordSimulator {
    config: RecordConfig,
    vectors: CMatrix,
    /// `V† exp(−iH dt/ħ) V`, row-major.
    w: Vec<C64>,
    kraus: EigenKraus,
}

impl RecordSimulator {
    pub fn new(config: &RecordConfig) -> Result<Self> {
        config.validate()?;
        let setup = &config.setup;
        let (values, vectors) = setup.a.eigen();
        let gen = setup.h.matrix() * c64(0.0, -config.dt / setup.hbar);
        let u = matrix_exponential(&gen)?;
        let w = to_buffer(&(vectors.adjoint() * u * &vectors));
        Ok(Self { config: config.clone(), vectors, w, kraus: EigenKraus::new(values, config.lambda_bar())? })
    }

    pub fn config(&self) -> &RecordConfig {
        &self.config
    }

    /// Simulates the record driven by random stream `stream` of the
    /// configured seed.
    pub fn run(&self, rho0: &DensityMatrix, stream: u64) -> Result<MeasurementRecord> {
        let d = self.kraus.values.len();
        if rho0.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: rho0.dim() });
        }
        let mut rng = stream_rng(self.config.seed, stream);
        let mut s = to_buffer(&(self.vectors.adjoint() * rho0.matrix() * &self.vectors));
        let mut tmp = vec![C64::new(0.0, 0.0); d * d];
        let mut factors = vec![0.0; d];
        let mut samples = Vec::with_capacity(self.config.n_steps);
        for _ in 0..self.config.n_steps {
            self.unitary(&mut s, &mut tmp);
            samples.push(self.kraus.apply(&mut s, &mut factors, &mut rng)?);
        }
        let final_state = DensityMatrix::from_propagated(&self.vectors * from_buffer(&s, d) * self.vectors.adjoint())?;
        Ok(MeasurementRecord { dt: self.config.dt, samples, final_state })
    }

    /// `s ← W s W†`.
    fn unitary(&self, s: &mut [C64], tmp: &mut [C64]) {
        let d = self.kraus.values.len();
        let w = &self.w;
        for i in 0..d {
            for j in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d {
                    acc += w[i * d + k] * s[k * d + j];
                }
                tmp[i * d + j] = acc;
            }
        }
        for i in 0..d {
            for j in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d {
                    acc += tmp[i * d + k] * w[j * d + k].conj();
                }
                s[i * d + j] = acc;
            }
        }
    }

    /// Runs records `0..n_records` (record `i` on stream `i`) in parallel and
    /// maps each through `f`. Results are in record order.
    pub fn map_ensemble<T, F>(&self, rho0: &DensityMatrix, n_records: usize, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(usize, MeasurementRecord) -> T + Sync,
    {
        (0..n_records).into_par_iter().map(|i| self.run(rho0, i as u64).map(|r| f(i, r))).collect()
    }
}

/// Ensemble average of the conditional final states.
#[derive(Debug, Clone, PartialEq)]
pub struct NonselectiveEstimate {
    pub mean: DensityMatrix,
    /// `√(Σᵢⱼ Var(ρᵢⱼ)/(2N))`, the rms statistical trace distance of
    /// `mean` for a two-level system.
    pub scatter: f64,
    pub n_records: usize,
}

pub fn nonselective_average(
    sim: &RecordSimulator,
    rho0: &DensityMatrix,
    n_records: usize,
) -> Result<NonselectiveEstimate> {
    if n_records < 2 {
        return Err(Error::param("n_records", "need at least two records"));
    }
    let finals = sim.map_ensemble(rho0, n_records, |_, r| r.final_state.into_matrix())?;
    let d = rho0.dim();
    let n = n_records as f64;
    let mut sum = CMatrix::zeros(d, d);
    for m in &finals {
        sum += m;
    }
    let mean = sum / c64(n, 0.0);
    let mut ss = 0.0;
    for m in &finals {
        ss += (m - &mean).iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    let var_total = ss / (n - 1.0);
    Ok(NonselectiveEstimate {
        mean: DensityMatrix::from_propagated(mean)?,
        scatter: (var_total / (2.0 * n)).sqrt(),
        n_records,
    })
}

pub fn simulate_record(config: &RecordConfig, rho0: &DensityMatrix) -> Result<MeasurementRecord> {
    RecordSimulator::new(config)?.run(rho0, 0)
}

/// `n_records` independent records; record `i` uses stream `i`.
pub fn simulate_ensemble(
    config: &RecordConfig,
    rho0: &DensityMatrix,
    n_records: usize,
) -> Result<Vec<MeasurementRecord>> {
    RecordSimulator::new(config)?.map_ensemble(rho0, n_records, |_, r| r)
}

fn step_index(t: f64, dt: f64) -> usize {
    let x = t / dt - 1e-9;
    if x <= 0.0 {
        0
    } else {
        x.ceil() as usize
    }
}

/// Mean outcome over the steps whose intervals `[j·dt, (j+1)·dt)` start in
/// `[t_start, t_end)`.
pub fn record_time_average(record: &MeasurementRecord, t_start: f64, t_end: f64) -> Result<f64> {
    let span = record.duration();
    if !(t_start >= 0.0) || !(t_end <= span * (1.0 + 1e-12)) {
        return Err(Error::param("window", format!("[{t_start}, {t_end}) is outside the record span [0, {span}]")));
    }
    let (j0, j1) = (step_index(t_start, record.dt), step_index(t_end, record.dt).min(record.len()));
    if j1 <= j0 {
        return Err(Error::param("window", format!("[{t_start}, {t_end}) contains no steps")));
    }
    Ok(record.samples[j0..j1].iter().sum::<f64>() / (j1 - j0) as f64)
}

/// Cosine transform `(2/t₀) Σ_j cos(ν t_j) a_j dt` over the steps that start
/// before `t₀`.
pub fn record_fourier(record: &MeasurementRecord, nu: f64, t0: f64) -> Result<f64> {
    if !(t0 > 0.0) || t0 > record.duration() * (1.0 + 1e-12) {
        return Err(Error::param("t0", format!("{t0} must lie in (0, {}]", record.duration())));
    }
    let n = step_index(t0, record.dt).min(record.len());
    if n == 0 {
        return Err(Error::param("t0", "window contains no steps"));
    }
    let s: f64 = record.samples[..n].iter().enumerate().map(|(j, a)| (nu * record.time(j)).cos() * a).sum();
    Ok(2.0 * s * record.dt / t0)
}

pub const RECORD_CSV_HEADER: [&str; 4] = ["record_id", "step", "time", "outcome"];

/// One row of the records CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordRow {
    pub record_id: u64,
    pub step: u64,
    pub time: f64,
    pub outcome: f64,
}

/// Streams records into CSV with header `record_id,step,time,outcome`.
/// Floats use the shortest representation that parses back exactly.
pub struct RecordCsvWriter<W: io::Write> {
    inner: csv::Writer<W>,
}

impl<W: io::Write> RecordCsvWriter<W> {
    pub fn new(w: W) -> Result<Self> {
        let mut inner = csv::Writer::from_writer(w);
        inner.write_record(RECORD_CSV_HEADER).map_err(csv_err)?;
        Ok(Self { inner })
    }

    pub fn write(&mut self, record_id: u64, record: &MeasurementRecord) -> Result<()> {
        for (j, a) in record.samples.iter().enumerate() {
            let row = [record_id.to_string(), j.to_string(), record.time(j).to_string(), a.to_string()];
            self.inner.write_record(&row).map_err(csv_err)?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.inner.flush().map_err(|e| Error::Format(e.to_string()))?;
        self.inner.into_inner().map_err(|e| Error::Format(e.to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

/// Parses a records CSV. The header must match exactly and every float
/// must be finite.
pub fn parse_records_csv(input: &[u8]) -> Result<Vec<RecordRow>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(input);
    let header = reader.headers().map_err(csv_err)?;
    if header.iter().ne(RECORD_CSV_HEADER.iter().copied()) {
        return Err(Error::Format(format!("unexpected header {:?}", header.iter().collect::<Vec<_>>())));
    }
    let mut rows = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let field = |k: usize| rec.get(k).ok_or_else(|| Error::Format(format!("row {}: missing field {k}", line + 1)));
        let int = |k: usize| -> Result<u64> {
            field(k)?.parse().map_err(|e| Error::Format(format!("row {}: {} ({e})", line + 1, RECORD_CSV_HEADER[k])))
        };
        let float = |k: usize| -> Result<f64> {
            let v: f64 = field(k)?
                .parse()
                .map_err(|e| Error::Format(format!("row {}: {} ({e})", line + 1, RECORD_CSV_HEADER[k])))?;
            if !v.is_finite() {
                return Err(Error::Format(format!("row {}: non-finite {}", line + 1, RECORD_CSV_HEADER[k])));
            }
            Ok(v)
        };
        rows.push(RecordRow { record_id: int(0)?, step: int(1)?, time: float(2)?, outcome: float(3)? });
    }
    Ok(rows)
}
