//! Experiment execution and report assembly.

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use ehlab::dynamics::SystemKind;
use ehlab::envelope::{
    build_envelope, divergent_modulator_demo, evaluate_g, kernel_eval, kernel_integral, l1_evidence, shifted_fejer,
    verify_envelope_conditions, write_g_csv, KernelKind, MajorantH,
};
use ehlab::process::{
    build_process, process_eht_trace, seminorm_estimate, truncation_experiment, Branch, ProcessTraceParams,
};
use ehlab::rates::{abs_prefix_ratios, check_a_alpha, check_one_sided, PrefixKind, RateParams};
use ehlab::spectral::{gamma_and_spectrum, positivity_proxy, resonance_report, SpectralParams};
use ehlab::transform::{
    convergence_on_system, counterexample_growth, eht_trace_on_system, l2_diff_vs_spectral, maximal_and_weak11,
    wiener_wintner_sweep,
};
use ehlab::Complex64;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::*;
use crate::CliError;

/// Largest number of orbit steps a single run may take.
pub const STEP_BUDGET: u64 = 500_000_000;

/// Report JSON and the files written next to it.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub kind: ExperimentKind,
    pub report: Value,
    pub files: Vec<(String, Vec<u8>)>,
}

impl RunOutput {
    pub fn report_name(&self) -> String {
        format!("{}_report.json", self.kind.name())
    }

    pub fn report_bytes(&self) -> Vec<u8> {
        let mut s = serde_json::to_string_pretty(&self.report).expect("report serializes");
        s.push('\n');
        s.into_bytes()
    }

    pub fn write_to(&self, dir: &Path) -> Result<Vec<std::path::PathBuf>, CliError> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, bytes) in &self.files {
            let p = dir.join(name);
            std::fs::write(&p, bytes)?;
            written.push(p);
        }
        let p = dir.join(self.report_name());
        std::fs::write(&p, self.report_bytes())?;
        written.push(p);
        Ok(written)
    }
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let digest = Sha256::digest(cfg.canonical_json().as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn budget(steps: u64, what: &str) -> Result<(), CliError> {
    if steps > STEP_BUDGET {
        return Err(CliError::Budget(format!("{what}: {steps} orbit steps exceed the budget of {STEP_BUDGET}")));
    }
    Ok(())
}

struct Body {
    verdicts: Value,
    result: Value,
    files: Vec<(String, Vec<u8>)>,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutput, CliError> {
    cfg.validate()?;
    let body = match cfg {
        ExperimentConfig::Rates(c) => run_rates(c)?,
        ExperimentConfig::Transform(c) => run_transform(c)?,
        ExperimentConfig::Counterexample(c) => run_counterexample(c)?,
        ExperimentConfig::Prop27(c) => run_prop27(c)?,
        ExperimentConfig::Spectral(c) => run_spectral(c)?,
        ExperimentConfig::Process(c) => run_process(c)?,
        ExperimentConfig::Sweep(c) => run_sweep(c)?,
    };
    let config_value: Value = serde_json::from_str(&cfg.canonical_json()).expect("canonical json parses");
    let report = json!({
        "version": ehlab::VERSION,
        "experiment": cfg.kind().name(),
        "config_hash": config_hash(cfg),
        "config": config_value,
        "seed": cfg.seed(),
        "verdicts": body.verdicts,
        "result": body.result,
        "outputs": body.files.iter().map(|(n, _)| n.clone()).collect::<Vec<_>>(),
    });
    Ok(RunOutput { kind: cfg.kind(), report, files: body.files })
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> Vec<u8> {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s.into_bytes()
}

fn run_rates(c: &RatesConfig) -> Result<Body, CliError> {
    let a = c.sequence.build()?;
    let params = RateParams {
        alpha: c.alpha,
        beta: c.beta,
        schedule: c.schedule.resolve()?,
        grid_factor: c.grid_factor,
        growth_factor: c.growth_factor,
    };
    params.validate()?;
    let report = match c.class {
        RateClass::Star => abs_prefix_ratios(&a, PrefixKind::Star { beta: c.beta }, &params)?,
        RateClass::MAlpha => abs_prefix_ratios(&a, PrefixKind::MAlpha { alpha: c.alpha }, &params)?,
        RateClass::Raw => abs_prefix_ratios(&a, PrefixKind::TwoSidedRaw, &params)?,
        RateClass::AAlpha => check_a_alpha(&a, &params)?,
        RateClass::StarStar => check_one_sided(&a, &params)?,
    };
    let rows = report
        .schedule
        .iter()
        .zip(report.raw.iter().zip(&report.ratios))
        .map(|(n, (raw, ratio))| format!("{n},{raw:e},{ratio:e}"));
    Ok(Body {
        verdicts: json!({ "rate": to_value(&report.verdict) }),
        result: json!({ "sequence": a.label(), "class": to_value(&c.class), "report": to_value(&report) }),
        files: vec![("rates.csv".into(), csv("n,raw,ratio", rows))],
    })
}

fn run_transform(c: &TransformConfig) -> Result<Body, CliError> {
    let a = c.sequence.build()?;
    let sys = build_system(c.system)?;
    let x0 = build_point(&sys, &c.x0)?;
    let checkpoints = c.checkpoints.resolve()?;
    let n_max = *checkpoints.last().expect("resolved schedules are nonempty");
    budget(2 * n_max, "transform")?;
    let trace = eht_trace_on_system(&a, &sys, &c.observable, &x0, &checkpoints, c.with_abel)?;
    let verdict = convergence_on_system(&a, &sys, &c.observable, &x0, n_max);
    let mut buf = Vec::new();
    trace.write_csv(&mut buf)?;
    let mut result = json!({
        "sequence": a.label(),
        "system": sys.name(),
        "checkpoints": checkpoints,
        "h_values": to_value(&trace.h_values),
        "max_abel_residual": trace.max_abel_residual(),
        "convergence": to_value(&verdict),
    });
    let mut verdicts = json!({ "convergence": to_value(&verdict.verdict) });
    let seed = c.seed.unwrap_or_default();
    if let Some(w) = &c.weak11 {
        budget(2 * w.horizon * w.samples as u64, "weak11")?;
        let r = maximal_and_weak11(&a, &sys, &c.observable, &w.lambdas, w.horizon, w.samples, seed)?;
        result["weak11"] = to_value(&r);
    }
    if let Some(s) = &c.spectral_check {
        let js = s.j_schedule.resolve()?;
        let checks = l2_diff_vs_spectral(&a, &sys, &c.observable, &js, s.samples, seed)?;
        let worst = checks.iter().map(|k| (k.mc_norm - k.spectral_value).abs()).fold(0.0, f64::max);
        verdicts["spectral_identity_max_gap"] = json!(worst);
        result["spectral_check"] = to_value(&checks);
    }
    Ok(Body { verdicts, result, files: vec![("transform_trace.csv".into(), buf)] })
}

fn run_counterexample(c: &CounterexampleConfig) -> Result<Body, CliError> {
    budget(3 * c.n + 1, "counterexample")?;
    let r = counterexample_growth(c.convention, c.n)?;
    let rows = r.samples.iter().map(|(m, h)| format!("{m},{},{h:e}", 3 * m + 1));
    Ok(Body {
        verdicts: json!({
            "convergence": to_value(&r.verdict.verdict),
            "band_within_one": r.band <= 1.0,
            "monotone": r.monotone,
        }),
        result: to_value(&r),
        files: vec![("counterexample_trace.csv".into(), csv("m,n,h", rows))],
    })
}

fn run_prop27(c: &Prop27Config) -> Result<Body, CliError> {
    let MajorantSpec::InverseLog { shift } = c.h;
    let hm = MajorantH::inverse_log(shift, c.horizon)?;
    hm.validate()?;
    let env = build_envelope(&hm, c.k)?;
    let conditions = verify_envelope_conditions(&env, &hm);
    if c.g_points == 0 {
        return Err(CliError::Schema("g_points must be positive".into()));
    }
    let xs: Vec<f64> = (0..c.g_points)
        .map(|i| 0.3 + (TAU - 0.6) * (i as f64 + 0.5) / c.g_points as f64)
        .collect();
    let g: Vec<_> = xs.iter().map(|&x| evaluate_g(&env, x, c.g_tol)).collect::<Result<_, _>>()?;
    let g_agreement = g.iter().map(|r| (r.g - r.direct_estimate).abs()).fold(0.0, f64::max);
    let fejer_integral_error = (0..=100u64)
        .map(|k| (kernel_integral(KernelKind::Fejer, k, 20_000) - std::f64::consts::PI).abs())
        .fold(0.0, f64::max);
    let mut shifted_fejer_deviation = 0.0f64;
    for k in [1u64, 5, 20, 100] {
        for &x in &xs {
            let d = (shifted_fejer(k, x)? - kernel_eval(KernelKind::Fejer, k, x)?).abs();
            shifted_fejer_deviation = shifted_fejer_deviation.max(d);
        }
    }
    let mut env_json = Vec::new();
    env.write_json(&mut env_json)?;
    let mut g_csv = Vec::new();
    write_g_csv(&mut g_csv, &g)?;

    let mut result = json!({
        "majorant": hm.label(),
        "envelope": to_value(&env),
        "conditions": to_value(&conditions),
        "g_max_disagreement": g_agreement,
        "fejer_integral_max_error": fejer_integral_error,
        "shifted_fejer_max_deviation": shifted_fejer_deviation,
    });
    let mut verdicts = json!({
        "conditions_all_pass": conditions.all_pass(),
        "g_routes_agree": g_agreement <= 1e-5,
    });
    if let Some(l) = &c.l1 {
        result["l1"] = to_value(&l1_evidence(&env, l.j_lo, l.epsilon, l.grid_points)?);
    }
    if let Some(n) = c.divergent_n {
        budget(n, "divergent modulator")?;
        let d = divergent_modulator_demo(n)?;
        verdicts["divergent_termwise_domination"] = json!(d.termwise_domination);
        result["divergent"] = to_value(&d);
    }
    Ok(Body {
        verdicts,
        result,
        files: vec![("envelope.json".into(), env_json), ("g.csv".into(), g_csv)],
    })
}

fn run_spectral(c: &SpectralConfig) -> Result<Body, CliError> {
    let a = c.sequence.build()?;
    let mut params = SpectralParams::new(c.n, c.threshold);
    if let Some(k) = c.max_lag {
        params.max_lag = k;
    }
    if let Some(g) = c.grid_order {
        params.grid_order = g;
    }
    params.validate()?;
    let est = gamma_and_spectrum(&a, &params)?;
    let g = est.gamma_grid.len();
    let rows = est
        .gamma_grid
        .iter()
        .enumerate()
        .map(|(m, v)| format!("{:e},{:e}", TAU * m as f64 / g as f64, v.norm()));
    let mut result = json!({ "sequence": a.label(), "estimate": est.to_json() });
    let mut verdicts = json!({ "atoms": est.atoms.len() });
    if c.positivity {
        let p = positivity_proxy(&a, params.max_lag, c.n)?;
        verdicts["toeplitz_min_eigenvalue"] = json!(p.min_eig_windowed);
        result["positivity"] = to_value(&p);
    }
    if let Some(r) = &c.resonance {
        let sys = build_system(r.system)?;
        let rep = resonance_report(&a, &sys, &params, r.max_power, r.tol_turns)?;
        verdicts["resonances"] = json!(rep.collisions.len());
        result["resonance"] = to_value(&rep);
    }
    Ok(Body { verdicts, result, files: vec![("spectrum.csv".into(), csv("theta,abs_gamma", rows))] })
}

fn run_process(c: &ProcessConfig) -> Result<Body, CliError> {
    let a = c.sequence.build()?;
    let sys = build_system(c.system)?;
    let x0 = build_point(&sys, &c.x0)?;
    let seed = c.seed.expect("validated: process runs carry a seed");
    let process = build_process(&sys, c.delta, c.v_schedule.clone())?;
    let checkpoints = c.checkpoints.resolve()?;
    let r_schedule = c.r_schedule.resolve()?;
    let n_max = *checkpoints.last().expect("nonempty");
    budget(2 * n_max * (c.samples as u64 + r_schedule.len() as u64 + 1), "process")?;

    let structure_samples = sys.sample_points_stream(c.structure_samples, seed, 1);
    let structure = process.check_structure(&structure_samples, 32);
    let sandwich: Vec<_> = r_schedule
        .iter()
        .map(|&r| {
            let ri = r as i64;
            let idx: Vec<i64> = (-ri - 8..=ri + 8).filter(|i| i.abs() <= 8 || i.abs() >= ri - 8).collect();
            process.sandwich(r, &idx, &structure_samples, Branch::Corrected)
        })
        .collect();
    let params = ProcessTraceParams {
        checkpoints: checkpoints.clone(),
        r_schedule: r_schedule.clone(),
        alpha: c.alpha,
        sample_count: c.samples,
        seed,
    };
    let trace = process_eht_trace(&a, &process, &x0, &params)?;
    let semi_schedule: Vec<u64> = checkpoints.iter().copied().filter(|&n| n >= 2).collect();
    let seminorm = seminorm_estimate(&a, c.alpha, &semi_schedule)?;

    let mut header = String::from("n,re,im");
    for r in &r_schedule {
        let _ = write!(header, ",g{r}_re,g{r}_im");
    }
    let rows = checkpoints.iter().enumerate().map(|(idx, n)| {
        let h = trace.trace.h_values[idx];
        let mut row = format!("{n},{:e},{:e}", h.re, h.im);
        for ap in &trace.approximants {
            let _ = write!(row, ",{:e},{:e}", ap.h_values[idx].re, ap.h_values[idx].im);
        }
        row
    });
    let files = vec![("process_trace.csv".into(), csv(&header, rows))];

    let deviations: Vec<Value> = trace
        .approximants
        .iter()
        .map(|ap| {
            json!({
                "r": ap.r,
                "max_deviation": ap.max_deviation,
                "pointwise_bound": ap.pointwise_bound,
                "l2_deviation": ap.l2_deviation,
                "l2_bound": ap.l2_bound,
                "gap_l2": ap.gap_l2,
            })
        })
        .collect();
    let bounds_hold = trace.approximants.iter().all(|ap| ap.pointwise_ratio <= 1.0 + 1e-12 && ap.l2_deviation <= ap.l2_bound);
    let mut result = json!({
        "sequence": a.label(),
        "system": sys.name(),
        "r_schedule": r_schedule,
        "deviations": deviations,
        "successive": to_value(&trace.successive),
        "c_a": trace.c_a,
        "seminorm": { "alpha": c.alpha, "schedule": seminorm.schedule, "values": seminorm.values, "limsup_proxy": seminorm.limsup_proxy },
        "verdict": to_value(&trace.verdict.verdict),
        "convergence": to_value(&trace.verdict),
        "structure": to_value(&structure),
        "sandwich": to_value(&sandwich),
    });
    let mut verdicts = json!({
        "convergence": to_value(&trace.verdict.verdict),
        "structure_exact": structure.exact(),
        "sandwich_holds": sandwich.iter().all(|s| s.holds()),
        "deviation_bounds_hold": bounds_hold,
    });
    if let Some(t) = &c.truncation {
        let radii = t.radii.resolve()?;
        let b = t.modulator.as_ref().map(SequenceSpec::build).transpose()?;
        let exp = truncation_experiment(&a, b.as_ref(), c.alpha, &radii, &semi_schedule)?;
        verdicts["truncation_stable"] = json!(exp.verdicts_stable);
        verdicts["truncation_gaps_nonincreasing"] = json!(exp.gaps_nonincreasing);
        result["truncation"] = to_value(&exp);
    }
    Ok(Body { verdicts, result, files })
}

fn run_sweep(c: &SweepConfig) -> Result<Body, CliError> {
    let sys = build_system(c.system)?;
    let x0 = build_point(&sys, &c.x0)?;
    let checkpoints = c.checkpoints.resolve()?;
    let n_max = *checkpoints.last().expect("nonempty");
    let mut turns = c.lambdas.turns();
    if c.include_resonance {
        if let (SystemKind::Rotation { turns: t }, ehlab::dynamics::Observable::Character { m }) = (sys.kind(), c.observable) {
            turns.push((-(m as f64) * t).rem_euclid(1.0));
        }
    }
    budget(2 * n_max * turns.len() as u64, "sweep")?;
    let lambdas: Vec<Complex64> = turns.iter().map(|t| Complex64::from_polar(1.0, TAU * t)).collect();
    let entries = wiener_wintner_sweep(&sys, &c.observable, &x0, &lambdas, &checkpoints, c.symmetric)?;
    let mut rows = Vec::new();
    for (t, e) in turns.iter().zip(&entries) {
        for (n, h) in e.trace.checkpoints.iter().zip(&e.trace.h_values) {
            rows.push(format!("{t:e},{n},{:e},{:e}", h.re, h.im));
        }
    }
    let summary: Vec<Value> = turns
        .iter()
        .zip(&entries)
        .map(|(t, e)| {
            json!({
                "turns": t,
                "verdict": to_value(&e.verdict.verdict),
                "final_oscillation": e.verdict.oscillations.last().map(|w| w.oscillation),
                "growth_fit": to_value(&e.verdict.growth_fit),
            })
        })
        .collect();
    let verdicts: Vec<Value> = summary.iter().map(|s| s["verdict"].clone()).collect();
    Ok(Body {
        verdicts: json!({ "per_lambda": verdicts }),
        result: json!({ "system": sys.name(), "symmetric": c.symmetric, "checkpoints": checkpoints, "entries": summary }),
        files: vec![("sweep.csv".into(), csv("turns,n,re,im", rows))],
    })
}
