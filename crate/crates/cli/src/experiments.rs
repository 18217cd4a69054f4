//! The five experiments behind the `weakmeas` subcommands.

use clap::ValueEnum;
use rayon::prelude::*;
use serde_json::json;
use weakmeas_core::analytic::{
    detector_bound_minimizer, ho_backaction, ho_fourier_noise, lg_x2_closed, tls_corr, tls_z, HoParams, TlsParams,
};
use weakmeas_core::correlators::{
    detector_variance_fourier, detector_variance_time_avg, leggett_garg_x2, snr_commuting, ChainEvaluator, MomentQuery,
};
use weakmeas_core::langevin::{ho_mc_noise_variance, mc_quasi_moments, McConfig, Splitting};
use weakmeas_core::sampler::{record_fourier, record_time_average, RecordConfig, RecordCsvWriter, RecordSimulator};
use weakmeas_core::stats::variance_estimate;
use weakmeas_core::{DensityMatrix, HermitianOperator, MeasurementSetup};

use crate::acceptance::{self, AcceptanceOptions, CRITERIA};
use crate::config::{key, optional, required, ConfigError, KeySpec, RawConfig, ResolvedConfig};
use crate::report::{CheckOutcome, Report, SubCheck};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Experiment {
    LgSweep,
    TlsCorrelate,
    HoNoise,
    RecordSim,
    Validate,
}

const LG_SWEEP_KEYS: &[KeySpec] = &[key("omega", "1"), key("grid", "log:1e-3:1e2:200"), optional("seed")];
const TLS_CORRELATE_KEYS: &[KeySpec] = &[
    key("omega", "1"),
    key("lambda", "0.2"),
    key("t_grid", "lin:0:5:20"),
    key("n_traj", "0"),
    key("dt", "0.01"),
    key("splitting", "symmetric"),
    optional("seed"),
];
const HO_NOISE_KEYS: &[KeySpec] = &[
    key("mass", "1"),
    key("omega", "1"),
    key("hbar", "1"),
    key("lambda", "0.1"),
    key("t_grid", "1,3,5,10"),
    key("n_traj", "10000"),
    key("dt", "0.01"),
    key("t0", "100"),
    required("seed"),
];
const RECORD_SIM_KEYS: &[KeySpec] = &[
    key("model", "commuting"),
    key("omega", "1"),
    key("lambda", "1"),
    key("dt", "0.01"),
    key("t0", "1"),
    key("n_records", "1000"),
    key("nu", "0"),
    required("seed"),
];
const VALIDATE_KEYS: &[KeySpec] = &[key("seed", "1"), key("checks", "all"), key("tolerance_scale", "1")];

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::LgSweep => "lg-sweep",
            Experiment::TlsCorrelate => "tls-correlate",
            Experiment::HoNoise => "ho-noise",
            Experiment::RecordSim => "record-sim",
            Experiment::Validate => "validate",
        }
    }

    /// File stem of the outputs.
    pub fn stem(self) -> &'static str {
        match self {
            Experiment::LgSweep => "lg_sweep",
            Experiment::TlsCorrelate => "tls_correlate",
            Experiment::HoNoise => "ho_noise",
            Experiment::RecordSim => "record_sim",
            Experiment::Validate => "validate",
        }
    }

    pub fn keys(self) -> &'static [KeySpec] {
        match self {
            Experiment::LgSweep => LG_SWEEP_KEYS,
            Experiment::TlsCorrelate => TLS_CORRELATE_KEYS,
            Experiment::HoNoise => HO_NOISE_KEYS,
            Experiment::RecordSim => RECORD_SIM_KEYS,
            Experiment::Validate => VALIDATE_KEYS,
        }
    }
}

/// A file written next to the JSON summary.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub report: Report,
    pub artifacts: Vec<Artifact>,
}

pub fn run(experiment: Experiment, raw: &RawConfig) -> Result<RunOutput, CliError> {
    let cfg = ResolvedConfig::resolve(experiment.name(), raw, experiment.keys())?;
    let (results, checks, artifacts) = match experiment {
        Experiment::LgSweep => lg_sweep(&cfg)?,
        Experiment::TlsCorrelate => tls_correlate(&cfg)?,
        Experiment::HoNoise => ho_noise(&cfg)?,
        Experiment::RecordSim => record_sim(&cfg)?,
        Experiment::Validate => validate(&cfg)?,
    };
    let report = Report { experiment: experiment.name().to_string(), config: cfg.entries().clone(), results, checks };
    Ok(RunOutput { report, artifacts })
}

type Parts = (serde_json::Value, Vec<CheckOutcome>, Vec<Artifact>);

fn csv_artifact(name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<Artifact, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Output(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row.iter().map(f64::to_string)).map_err(io)?;
    }
    let contents = w.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    Ok(Artifact { name: name.to_string(), contents })
}

fn up() -> DensityMatrix {
    DensityMatrix::basis(2, 0).expect("two-level basis state")
}

/// Interval of `ω/λ` over which `xs` first changes sign along `qs = λ/ω`.
pub fn zero_bracket(qs: &[f64], xs: &[f64]) -> Option<(f64, f64)> {
    (1..qs.len()).find(|&k| xs[k - 1].signum() != xs[k].signum()).map(|k| (1.0 / qs[k], 1.0 / qs[k - 1]))
}

fn lg_sweep(cfg: &ResolvedConfig) -> Result<Parts, CliError> {
    let omega = cfg.positive("omega")?;
    let qs = cfg.grid("grid")?;
    if qs.iter().any(|&q| !(q >= 0.0)) {
        return Err(ConfigError::Value { key: "grid".into(), reason: "λ/ω must be non-negative".into() }.into());
    }
    let rows: Vec<Vec<f64>> = qs
        .par_iter()
        .map(|&q| {
            let chain = leggett_garg_x2(omega, q * omega)?.value;
            let closed = lg_x2_closed(&TlsParams::new(omega, q * omega)?);
            Ok(vec![q, chain, closed, (chain - closed).abs()])
        })
        .collect::<weakmeas_core::Result<_>>()?;
    let max_diff = rows.iter().map(|r| r[3]).fold(0.0, f64::max);
    let closed: Vec<f64> = rows.iter().map(|r| r[2]).collect();
    let bracket = zero_bracket(&qs, &closed);

    let mut checks = vec![CheckOutcome::new(
        "agreement",
        "chain vs closed form",
        vec![SubCheck::below("max_abs_diff", max_diff, 1e-8)],
    )];
    if let Some((lo, hi)) = bracket {
        checks.push(CheckOutcome::new(
            "zero_bracket",
            "sign change of X² in ω/λ",
            vec![
                SubCheck::within("omega_over_lambda_lo", lo, 10.0, 12.0),
                SubCheck::within("omega_over_lambda_hi", hi, 10.0, 12.0),
            ],
        ));
    }
    let endpoint = |r: &Vec<f64>| json!({ "lambda_over_omega": r[0], "x2_chain": r[1], "x2_closed": r[2] });
    let results = json!({
        "points": rows.len(),
        "max_abs_diff": max_diff,
        "zero_bracket_omega_over_lambda": bracket.map(|(lo, hi)| vec![lo, hi]),
        "endpoints": [endpoint(&rows[0]), endpoint(&rows[rows.len() - 1])],
    });
    let csv = csv_artifact("lg_sweep.csv", &["lambda_over_omega", "x2_chain", "x2_closed", "abs_diff"], &rows)?;
    Ok((results, checks, vec![csv]))
}

fn splitting(cfg: &ResolvedConfig) -> Result<Splitting, ConfigError> {
    match cfg.str("splitting")? {
        "exact" => Ok(Splitting::Exact),
        "symmetric" => Ok(Splitting::Symmetric),
        other => Err(ConfigError::Value {
            key: "splitting".into(),
            reason: format!("`{other}`: expected exact or symmetric"),
        }),
    }
}

fn seed(cfg: &ResolvedConfig) -> Result<u64, ConfigError> {
    if !cfg.contains("seed") {
        return Err(ConfigError::Missing("seed".into()));
    }
    cfg.u64("seed")
}

fn tls_correlate(cfg: &ResolvedConfig) -> Result<Parts, CliError> {
    let (omega, lambda) = (cfg.positive("omega")?, cfg.f64("lambda")?);
    let setup = MeasurementSetup::two_level(omega, lambda)?;
    let p = TlsParams::new(omega, lambda)?;
    let ts = cfg.grid("t_grid")?;
    let n_traj = cfg.usize("n_traj")?;
    let pairs: Vec<(f64, f64)> = ts.iter().flat_map(|&t| ts.iter().map(move |&tp| (t, tp))).collect();

    let eval = ChainEvaluator::new(&setup);
    let mut rows = Vec::with_capacity(pairs.len());
    for &(t, tp) in &pairs {
        let chain = eval.moment_of(&up(), &[t, tp])?;
        let closed = tls_corr(&p, t, tp)?;
        rows.push(vec![t, tp, chain, closed, (chain - closed).abs()]);
    }
    let max_diff = rows.iter().map(|r| r[4]).fold(0.0, f64::max);
    let mut header = vec!["t", "t_prime", "chain", "closed", "abs_diff"];
    let mut results = json!({ "pairs": pairs.len(), "max_abs_diff": max_diff });

    if n_traj > 0 {
        let mc = McConfig::new(n_traj, cfg.positive("dt")?, seed(cfg)?)?.with_splitting(splitting(cfg)?);
        let queries =
            pairs.iter().map(|&(t, tp)| MomentQuery::new(&[t, tp])).collect::<weakmeas_core::Result<Vec<_>>>()?;
        let est = mc_quasi_moments(&setup, &up(), &queries, &mc)?;
        let mut within = 0;
        for (row, r) in rows.iter_mut().zip(&est) {
            within += usize::from((r.value - row[2]).abs() < 3.0 * r.stat_error);
            row.extend([r.value, r.stat_error]);
        }
        header.extend(["mc", "mc_stat_error"]);
        results["mc_within_3se"] = json!(within);
    }
    let checks = vec![CheckOutcome::new(
        "agreement",
        "chain vs closed form",
        vec![SubCheck::below("max_abs_diff", max_diff, 1e-8)],
    )];
    Ok((results, checks, vec![csv_artifact("tls_correlate.csv", &header, &rows)?]))
}

fn ho_noise(cfg: &ResolvedConfig) -> Result<Parts, CliError> {
    let p = HoParams::ground_state(
        cfg.positive("mass")?,
        cfg.positive("omega")?,
        cfg.positive("hbar")?,
        cfg.f64("lambda")?,
    )?;
    let mc = McConfig::new(cfg.usize("n_traj")?, cfg.positive("dt")?, seed(cfg)?)?;
    let mut rows = Vec::new();
    let mut subchecks = Vec::new();
    for t in cfg.grid("t_grid")? {
        let v = ho_mc_noise_variance(&p, t, &mc)?;
        let f = ho_backaction(&p, t, t)?;
        rows.push(vec![t, f, v.variance, v.std_error, (v.variance - f) / v.std_error]);
        subchecks.push(SubCheck::near(format!("variance_t{t}"), v.variance, f, 3.0 * v.std_error));
    }
    let budget = ho_fourier_noise(&p, cfg.positive("t0")?)?;
    let results = json!({
        "fourier": {
            "signal": budget.signal,
            "quasi_noise": budget.quasi_noise,
            "detector_noise": budget.detector_noise,
            "bound": budget.bound,
            "bound_lambda_t0": detector_bound_minimizer(&p),
        }
    });
    let checks = vec![CheckOutcome::new("backaction", "MC noise variance vs f_λ(t,t)", subchecks).with_seed(mc.seed)];
    let csv = csv_artifact("ho_noise.csv", &["t", "f_closed", "mc_variance", "mc_std_error", "z_score"], &rows)?;
    Ok((results, checks, vec![csv]))
}

fn steps_for(t0: f64, dt: f64) -> Result<usize, ConfigError> {
    let n = (t0 / dt).round();
    if n < 1.0 || ((t0 / dt) - n).abs() > 1e-9 * n {
        return Err(ConfigError::Value {
            key: "t0".into(),
            reason: format!("t0 = {t0} must be a whole number of steps dt = {dt}"),
        });
    }
    Ok(n as usize)
}

fn record_sim(cfg: &ResolvedConfig) -> Result<Parts, CliError> {
    let (omega, lambda) = (cfg.positive("omega")?, cfg.positive("lambda")?);
    let (dt, t0) = (cfg.positive("dt")?, cfg.positive("t0")?);
    let n_records = cfg.usize("n_records")?;
    let nu = cfg.f64("nu")?;
    let model = cfg.str("model")?;
    let setup = match model {
        "tls" => MeasurementSetup::two_level(omega, lambda)?,
        "commuting" => MeasurementSetup::new(
            HermitianOperator::pauli_z().scaled(omega / 2.0),
            HermitianOperator::pauli_z(),
            lambda,
        )?,
        other => {
            return Err(ConfigError::Value {
                key: "model".into(),
                reason: format!("`{other}`: expected tls or commuting"),
            }
            .into())
        }
    };
    let rc = RecordConfig::new(setup, dt, steps_for(t0, dt)?, seed(cfg)?)?;
    let sim = RecordSimulator::new(&rc)?;
    let records = sim.map_ensemble(&up(), n_records, |_, r| r)?;

    let avgs = records.iter().map(|r| record_time_average(r, 0.0, t0)).collect::<weakmeas_core::Result<Vec<_>>>()?;
    let v = variance_estimate(&avgs)?;
    let se_mean = (v.variance / n_records as f64).sqrt();
    let snr = v.mean.abs() / v.variance.sqrt();
    let detector = detector_variance_time_avg(lambda, t0)?;
    let mut results = json!({
        "n_records": n_records,
        "n_steps": rc.n_steps,
        "time_average": {
            "mean": v.mean,
            "mean_std_error": se_mean,
            "variance": v.variance,
            "variance_std_error": v.std_error,
            "snr": snr,
            "detector_variance": detector,
            "variance_times_4_lambda_t0": v.variance * 4.0 * lambda * t0,
        },
        "runs_needed_estimate": 1.0 / (lambda * t0),
    });
    let mut subchecks;
    if model == "commuting" {
        let predicted = snr_commuting(1.0, lambda, t0)?;
        results["time_average"]["snr_predicted"] = json!(predicted);
        subchecks = vec![
            SubCheck::near("mean", v.mean, 1.0, 3.0 * se_mean),
            SubCheck::within("variance_times_4_lambda_t0", v.variance * 4.0 * lambda * t0, 0.9, 1.1),
            SubCheck::near("snr", snr, predicted, 0.1 * predicted),
        ];
    } else {
        // the expected record mean is z at the record time stamps
        let signal = (0..rc.n_steps)
            .map(|j| tls_z(&TlsParams::new(omega, lambda)?, (j + 1) as f64 * dt))
            .sum::<weakmeas_core::Result<f64>>()?
            / rc.n_steps as f64;
        results["time_average"]["signal_closed"] = json!(signal);
        subchecks = vec![SubCheck::near("mean", v.mean, signal, 3.0 * se_mean)];
        if lambda * t0 <= 0.1 {
            subchecks.push(SubCheck::below("snr", snr, 1.0));
        }
    }
    if nu > 0.0 {
        let fs = records.iter().map(|r| record_fourier(r, nu, t0)).collect::<weakmeas_core::Result<Vec<_>>>()?;
        let fv = variance_estimate(&fs)?;
        results["fourier"] = json!({
            "nu": nu,
            "mean": fv.mean,
            "mean_std_error": (fv.variance / n_records as f64).sqrt(),
            "variance": fv.variance,
            "variance_std_error": fv.std_error,
            "detector_variance": detector_variance_fourier(lambda, t0)?,
        });
    }

    let mut w = RecordCsvWriter::new(Vec::new())?;
    for (i, r) in records.iter().enumerate() {
        w.write(i as u64, r)?;
    }
    let csv = Artifact { name: "records.csv".into(), contents: w.finish()? };
    let checks =
        vec![CheckOutcome::new("time_average", "record time-average statistics", subchecks).with_seed(rc.seed)];
    Ok((results, checks, vec![csv]))
}

/// Parses `all` or a comma-separated list of criterion numbers.
pub fn parse_criteria(spec: &str) -> Result<Vec<u32>, ConfigError> {
    if spec.trim() == "all" {
        return Ok(CRITERIA.to_vec());
    }
    let mut ids = Vec::new();
    for part in spec.split(',') {
        let id: u32 = part.trim().parse().map_err(|_| ConfigError::Value {
            key: "checks".into(),
            reason: format!("`{part}` is not a criterion number"),
        })?;
        if !CRITERIA.contains(&id) {
            return Err(ConfigError::Value { key: "checks".into(), reason: format!("no criterion {id}") });
        }
        if !ids.contains(&id) {
            ids.push(id);
        }
    }
    Ok(ids)
}

fn validate(cfg: &ResolvedConfig) -> Result<Parts, CliError> {
    let opts = AcceptanceOptions { seed: cfg.u64("seed")?, tolerance_scale: cfg.f64("tolerance_scale")? };
    let ids = parse_criteria(cfg.str("checks")?)?;
    let outcomes = ids.iter().map(|&id| acceptance::run_criterion(id, &opts)).collect::<Result<Vec<_>, _>>()?;
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id.as_str()).collect();
    let results = json!({ "criteria": ids, "failed": failed });
    Ok((results, outcomes, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn criteria_lists() {
        assert_eq!(parse_criteria("all").unwrap().len(), 10);
        assert_eq!(parse_criteria("3, 1,3").unwrap(), vec![3, 1]);
        assert!(parse_criteria("11").is_err());
        assert!(parse_criteria("1;2").is_err());
    }

    #[test]
    fn bracket_of_first_sign_change() {
        let qs = [0.05, 0.08, 0.1, 0.2];
        assert_eq!(zero_bracket(&qs, &[-1.0, -0.5, 0.3, 1.0]), Some((10.0, 12.5)));
        assert_eq!(zero_bracket(&qs, &[1.0; 4]), None);
    }

    #[test]
    fn step_counts_must_be_whole() {
        assert_eq!(steps_for(1.0, 0.01).unwrap(), 100);
        assert!(steps_for(1.005, 0.01).is_err());
        assert!(steps_for(0.001, 0.01).is_err());
    }
}
