//! Symmetric admissible processes `f_i = T^i v_{|i|}`, their truncated additive
//! approximants `g_i^r`, the `‖·‖_α` seminorm proxy and Hilbert-sequence verdicts.
//!
//! Translates compose in the exponent: `(T^s f_i)(x)` is evaluated as
//! `v_{|i|}(T^{i+s} x)` with a single call to [`DynamicalSystem::iterate`], so the
//! symmetry, admissibility and sandwich relations reduce to comparisons of
//! `v_r` values at one common point and hold bit for bit.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DynamicalSystem, Observable, OrbitWalk, Point};
use crate::rates::{m_alpha_scale, prefix_abs_sums};
use crate::sequences::{transform_sequence, Flags, ModulatingSequence, SequenceOp};
use crate::sum::{ComplexSum, NeumaierSum};
use crate::transform::{run_partial_sums, ConvergenceVerdict, TransformTrace, VerdictCollector, VerdictKind};
use crate::{Error, Result};

/// Sample size for the monotonicity validation in [`build_process`].
pub const VALIDATION_SAMPLES: usize = 1000;
/// Radii `r = 0..=VALIDATION_RADIUS` checked for `v_r ≤ v_{r+1} ≤ δ`.
pub const VALIDATION_RADIUS: u64 = 512;
const VALIDATION_SEED: u64 = 0x5eed_0003;

/// `r ↦ v_r = c_r·δ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum VSchedule {
    /// `c_r = 1 − 1/(r+1)`.
    Factory,
    /// `c_r = 1`: the additive process `f_i = T^i δ`.
    Additive,
    /// `c_r = coefficients[min(r, len − 1)]`.
    Scaled { coefficients: Vec<f64> },
}

impl VSchedule {
    pub fn coefficient(&self, r: u64) -> f64 {
        match self {
            VSchedule::Factory => 1.0 - 1.0 / (r as f64 + 1.0),
            VSchedule::Additive => 1.0,
            VSchedule::Scaled { coefficients } => {
                let idx = (r as usize).min(coefficients.len().saturating_sub(1));
                coefficients.get(idx).copied().unwrap_or(0.0)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdmissibleProcess {
    sys: DynamicalSystem,
    delta: Observable,
    schedule: VSchedule,
}

/// Validates `0 ≤ v_r ≤ v_{r+1} ≤ δ` on [`VALIDATION_SAMPLES`] points.
pub fn build_process(sys: &DynamicalSystem, delta: Observable, schedule: VSchedule) -> Result<AdmissibleProcess> {
    if let VSchedule::Scaled { coefficients } = &schedule {
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidProcess("scaled schedule needs finite coefficients".into()));
        }
    }
    let process = AdmissibleProcess { sys: *sys, delta, schedule };
    for p in sys.sample_points(VALIDATION_SAMPLES, VALIDATION_SEED) {
        let d = process.delta.eval(&p);
        if d.im != 0.0 || !(d.re >= 0.0) {
            return Err(Error::InvalidProcess(format!("δ = {d} is not real nonnegative at x = {:?}", p)));
        }
        let mut prev = process.v(0, &p);
        if !(prev >= 0.0) {
            return Err(Error::InvalidProcess(format!("v_0 = {prev} is negative at x = {:?}", p)));
        }
        for r in 1..=VALIDATION_RADIUS {
            let cur = process.v(r, &p);
            if !(prev <= cur) {
                return Err(Error::InvalidProcess(format!("v_{} = {prev} > v_{r} = {cur} at x = {:?}", r - 1, p)));
            }
            if !(cur <= d.re) {
                return Err(Error::InvalidProcess(format!("v_{r} = {cur} > δ = {} at x = {:?}", d.re, p)));
            }
            prev = cur;
        }
    }
    Ok(process)
}

impl AdmissibleProcess {
    pub fn system(&self) -> &DynamicalSystem {
        &self.sys
    }

    pub fn delta(&self) -> &Observable {
        &self.delta
    }

    pub fn schedule(&self) -> &VSchedule {
        &self.schedule
    }

    pub fn delta_at(&self, p: &Point) -> f64 {
        self.delta.eval(p).re
    }

    pub fn v(&self, r: u64, p: &Point) -> f64 {
        self.schedule.coefficient(r) * self.delta_at(p)
    }

    /// `f_i(x) = v_{|i|}(T^i x)`.
    pub fn f(&self, i: i64, x: &Point) -> f64 {
        self.shifted_f(i, 0, x)
    }

    /// `(T^s f_i)(x) = v_{|i|}(T^{i+s} x)`.
    pub fn shifted_f(&self, i: i64, s: i64, x: &Point) -> f64 {
        self.v(i.unsigned_abs(), &self.sys.iterate(x, i + s))
    }

    /// `g_i^r(x)`: `f_i` for `|i| ≤ r`, `T^{i−r} f_r` for `i > r`, `T^{i+r} f_{−r}` for `i < −r`.
    pub fn g(&self, r: u64, i: i64, x: &Point) -> f64 {
        let ri = r as i64;
        if i.abs() <= ri {
            self.f(i, x)
        } else if i > ri {
            self.shifted_f(ri, i - ri, x)
        } else {
            self.shifted_f(-ri, i + ri, x)
        }
    }

    /// Negative branch with the reflected shift `T^{−i+r} f_{−r} = v_r(T^{|i|} x)`; violates the sandwich.
    pub fn reflected_negative_branch(&self, r: u64, i: i64, x: &Point) -> f64 {
        let ri = r as i64;
        if i < -ri {
            self.shifted_f(-ri, -i + ri, x)
        } else {
            self.g(r, i, x)
        }
    }

    /// `(δ − v_r)(T^i x)`.
    pub fn gap(&self, r: u64, i: i64, x: &Point) -> f64 {
        let y = self.sys.iterate(x, i);
        self.delta_at(&y) - self.v(r, &y)
    }

    /// `‖δ − v_r‖₂ = (1 − c_r)‖δ‖₂`.
    pub fn gap_l2(&self, r: u64) -> f64 {
        (1.0 - self.schedule.coefficient(r)) * self.delta.norms().l2
    }

    /// Exact checks of `f_i = T^i v_{|i|}`, `T^{2i} f_{−i} = f_i` and
    /// `T^{±1} f_{±i} ≤ f_{±(i+1)}` for `0 ≤ i ≤ i_max` on every sample.
    pub fn check_structure(&self, samples: &[Point], i_max: i64) -> StructureReport {
        let mut report = StructureReport { samples: samples.len(), i_max, ..Default::default() };
        for x in samples {
            for i in -i_max..=i_max {
                let direct = self.v(i.unsigned_abs(), &self.sys.iterate(x, i));
                if self.f(i, x) != direct {
                    report.structure_violations += 1;
                }
                if self.shifted_f(-i, 2 * i, x) != self.f(i, x) {
                    report.symmetry_violations += 1;
                }
            }
            for i in 0..i_max {
                for sign in [1i64, -1] {
                    let lhs = self.shifted_f(sign * i, sign, x);
                    let rhs = self.f(sign * (i + 1), x);
                    report.max_admissibility_excess = report.max_admissibility_excess.max(lhs - rhs);
                    if lhs > rhs {
                        report.admissibility_violations += 1;
                    }
                }
            }
        }
        report
    }

    /// Residuals `f_i − g_i^r` against `[0, (δ − v_r)(T^i x)]` for `|i| > r`
    /// and against `0` for `|i| ≤ r`.
    pub fn sandwich(&self, r: u64, indices: &[i64], samples: &[Point], branch: Branch) -> SandwichReport {
        let mut report = SandwichReport { r, checked: 0, lower_violations: 0, upper_violations: 0, max_residual: 0.0 };
        for x in samples {
            for &i in indices {
                let g = match branch {
                    Branch::Corrected => self.g(r, i, x),
                    Branch::Reflected => self.reflected_negative_branch(r, i, x),
                };
                let res = self.f(i, x) - g;
                let upper = if i.unsigned_abs() <= r { 0.0 } else { self.gap(r, i, x) };
                report.checked += 1;
                report.max_residual = report.max_residual.max(res.abs());
                if res < 0.0 {
                    report.lower_violations += 1;
                }
                if res > upper {
                    report.upper_violations += 1;
                }
            }
        }
        report
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Corrected,
    Reflected,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StructureReport {
    pub samples: usize,
    pub i_max: i64,
    pub structure_violations: usize,
    pub symmetry_violations: usize,
    pub admissibility_violations: usize,
    /// `max (T^{±1} f_{±i} − f_{±(i+1)})`; nonpositive when admissible.
    pub max_admissibility_excess: f64,
}

impl StructureReport {
    pub fn exact(&self) -> bool {
        self.structure_violations == 0 && self.symmetry_violations == 0 && self.admissibility_violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub r: u64,
    pub checked: usize,
    pub lower_violations: usize,
    pub upper_violations: usize,
    pub max_residual: f64,
}

impl SandwichReport {
    pub fn holds(&self) -> bool {
        self.lower_violations == 0 && self.upper_violations == 0
    }
}

/// Approximant `Σ' a_i g_i^r(x0)/i` compared with the process trace.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ApproximantTrace {
    pub r: u64,
    pub h_values: Vec<Complex64>,
    /// `max_n |H_n F(x0) − H_n G^r(x0)|` over the checkpoints.
    pub max_deviation: f64,
    /// `Σ_{r<|i|≤N} |a_i|/|i| · (δ − v_r)(T^i x0)` at the last checkpoint.
    pub pointwise_bound: f64,
    /// Largest ratio of deviation to running pointwise bound over the checkpoints.
    pub pointwise_ratio: f64,
    /// Sample estimate of `‖H_N F − H_N G^r‖₂`.
    pub l2_deviation: f64,
    /// `Σ_{r<|i|≤N} |a_i|/|i|`.
    pub weight: f64,
    pub gap_l2: f64,
    /// `C_a · κ(r, N) · ‖δ − v_r‖₂`, which dominates `weight · gap_l2`.
    pub l2_bound: f64,
}

/// Deviation between consecutive approximants of the schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SuccessiveDeviation {
    pub r_lo: u64,
    pub r_hi: u64,
    pub max_deviation: f64,
    /// Pointwise bound of the coarser approximant; `g^{r_lo}` and `g^{r_hi}` differ by at most `(δ − v_{r_lo})(T^i x0)`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessTrace {
    pub trace: TransformTrace,
    pub verdict: ConvergenceVerdict,
    pub alpha: f64,
    /// `max_{2≤n≤N} (log^α n / n^{α−1}) Σ_{|k|≤n} |a_k|`.
    pub c_a: f64,
    pub r_schedule: Vec<u64>,
    pub approximants: Vec<ApproximantTrace>,
    pub successive: Vec<SuccessiveDeviation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessTraceParams {
    pub checkpoints: Vec<u64>,
    pub r_schedule: Vec<u64>,
    pub alpha: f64,
    pub sample_count: usize,
    pub seed: u64,
}

/// `κ(r, N) = s(N)/N + Σ_{n=r+1}^{N−1} s(n)/(n(n+1))` with `s(n) = n^{α−1}/log^α n`;
/// by summation by parts `Σ_{r<|i|≤N} |a_i|/|i| ≤ C_a κ(r, N)`.
pub fn tail_weight_constant(r: u64, n: u64, alpha: f64) -> f64 {
    let mut acc = NeumaierSum::new();
    acc += m_alpha_scale(n, alpha) / n as f64;
    for m in (r + 1).max(2)..n {
        let mf = m as f64;
        acc += m_alpha_scale(m, alpha) / (mf * (mf + 1.0));
    }
    acc.sum()
}

/// Process trace `Σ' a_i f_i(x0)/i` with its verdict and the approximant traces for each `r`.
pub fn process_eht_trace(a: &ModulatingSequence, process: &AdmissibleProcess, x0: &Point, params: &ProcessTraceParams) -> Result<ProcessTrace> {
    let checkpoints = &params.checkpoints;
    if checkpoints.is_empty() || checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("checkpoints must be positive and strictly increasing"));
    }
    if params.r_schedule.is_empty() || params.r_schedule[0] == 0 || params.r_schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("r schedule must be positive and strictly increasing"));
    }
    if !(params.alpha > 1.0 && params.alpha <= 2.0) {
        return Err(Error::invalid(format!("alpha = {} outside (1, 2]", params.alpha)));
    }
    let n_max = *checkpoints.last().expect("nonempty");
    if n_max < 2 {
        return Err(Error::invalid("last checkpoint must be at least 2"));
    }

    let c = |k: u64| process.schedule.coefficient(k);
    let mut walk = OrbitWalk::new(&process.sys, *x0);
    let mut h_values = Vec::with_capacity(checkpoints.len());
    let mut collector = VerdictCollector::new();
    let mut next = 0;
    run_partial_sums(
        n_max,
        |k| {
            let (_, p, q) = walk.next().expect("orbit walk is infinite");
            let ck = c(k as u64);
            (a.eval(k) * (ck * process.delta_at(&p)), a.eval(-k) * (ck * process.delta_at(&q)))
        },
        |s| {
            collector.observe(s.n, s.h);
            if next < checkpoints.len() && checkpoints[next] == s.n {
                h_values.push(s.h);
                next += 1;
            }
        },
    );
    let trace = TransformTrace {
        checkpoints: checkpoints.clone(),
        h_values,
        abel_parts: None,
        x0: vec![x0.x(), x0.y()],
        sequence: a.label().to_string(),
        system: process.sys.name().into(),
    };

    let prefix = prefix_abs_sums(a, n_max);
    let c_a = (2..=n_max).map(|n| prefix[n as usize] / m_alpha_scale(n, params.alpha)).fold(0.0, f64::max);
    let samples = process.sys.sample_points(params.sample_count, params.seed);

    let approximants: Vec<ApproximantTrace> = params
        .r_schedule
        .par_iter()
        .map(|&r| approximant_trace(a, process, x0, &trace, r, &samples, c_a, params.alpha))
        .collect();
    let successive = approximants
        .windows(2)
        .map(|w| SuccessiveDeviation {
            r_lo: w[0].r,
            r_hi: w[1].r,
            max_deviation: w[0].h_values.iter().zip(&w[1].h_values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max),
            bound: w[0].pointwise_bound,
        })
        .collect();

    Ok(ProcessTrace {
        trace,
        verdict: collector.finish(),
        alpha: params.alpha,
        c_a,
        r_schedule: params.r_schedule.clone(),
        approximants,
        successive,
    })
}

#[allow(clippy::too_many_arguments)]
fn approximant_trace(
    a: &ModulatingSequence,
    process: &AdmissibleProcess,
    x0: &Point,
    main: &TransformTrace,
    r: u64,
    samples: &[Point],
    c_a: f64,
    alpha: f64,
) -> ApproximantTrace {
    let checkpoints = &main.checkpoints;
    let n_max = *checkpoints.last().expect("nonempty");
    let c = |k: u64| process.schedule.coefficient(k);
    let cr = c(r);

    let mut walk = OrbitWalk::new(&process.sys, *x0);
    let mut h = ComplexSum::new();
    let mut bound = NeumaierSum::new();
    let mut weight = NeumaierSum::new();
    let mut h_values = Vec::with_capacity(checkpoints.len());
    let (mut max_deviation, mut pointwise_ratio) = (0.0f64, 0.0f64);
    let mut next = 0;
    for k in 1..=n_max {
        let (_, p, q) = walk.next().expect("orbit walk is infinite");
        let ki = k as i64;
        let kf = k as f64;
        let ck = c(k.min(r));
        let (dp, dq) = (process.delta_at(&p), process.delta_at(&q));
        let (ap, aq) = (a.eval(ki), a.eval(-ki));
        h += (ap * (ck * dp) - aq * (ck * dq)) / kf;
        if k > r {
            bound += (ap.norm() * (dp - cr * dp) + aq.norm() * (dq - cr * dq)) / kf;
            weight += (ap.norm() + aq.norm()) / kf;
        }
        if next < checkpoints.len() && checkpoints[next] == k {
            let hv = h.sum();
            let dev = (main.h_values[next] - hv).norm();
            max_deviation = max_deviation.max(dev);
            let b = bound.sum();
            if dev > 0.0 {
                pointwise_ratio = pointwise_ratio.max(if b > 0.0 { dev / b } else { f64::INFINITY });
            }
            h_values.push(hv);
            next += 1;
        }
    }

    let sq: Vec<f64> = samples
        .par_iter()
        .map(|x| {
            let mut walk = OrbitWalk::new(&process.sys, *x);
            let mut acc = ComplexSum::new();
            for k in 1..=n_max {
                let (_, p, q) = walk.next().expect("orbit walk is infinite");
                if k <= r {
                    continue;
                }
                let d = c(k) - cr;
                let ki = k as i64;
                acc += (a.eval(ki) * (d * process.delta_at(&p)) - a.eval(-ki) * (d * process.delta_at(&q))) / k as f64;
            }
            acc.sum().norm_sqr()
        })
        .collect();
    let l2_deviation = if sq.is_empty() { 0.0 } else { (sq.iter().sum::<f64>() / sq.len() as f64).sqrt() };
    let gap_l2 = process.gap_l2(r);

    ApproximantTrace {
        r,
        h_values,
        max_deviation,
        pointwise_bound: bound.sum(),
        pointwise_ratio,
        l2_deviation,
        weight: weight.sum(),
        gap_l2,
        l2_bound: c_a * tail_weight_constant(r, n_max, alpha) * gap_l2,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeminormEstimate {
    pub alpha: f64,
    pub schedule: Vec<u64>,
    /// `(log^α n / n^{α−1}) Σ_{|k|≤n} |a_k|` at each scheduled `n`.
    pub values: Vec<f64>,
    /// Max of `values` over the final three dyadic windows `(N/8, N]`; a proxy for the limsup.
    pub limsup_proxy: f64,
}

fn validate_alpha_schedule(alpha: f64, schedule: &[u64]) -> Result<()> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::invalid(format!("alpha = {alpha} outside (1, 2]")));
    }
    if schedule.is_empty() || schedule[0] < 2 || schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("schedule must be strictly increasing with n ≥ 2"));
    }
    Ok(())
}

pub fn seminorm_estimate(a: &ModulatingSequence, alpha: f64, schedule: &[u64]) -> Result<SeminormEstimate> {
    validate_alpha_schedule(alpha, schedule)?;
    let n_max = *schedule.last().expect("nonempty");
    let prefix = prefix_abs_sums(a, n_max);
    let values: Vec<f64> = schedule.iter().map(|&n| prefix[n as usize] / m_alpha_scale(n, alpha)).collect();
    let limsup_proxy = schedule
        .iter()
        .zip(&values)
        .filter(|(&n, _)| 8 * n > n_max)
        .map(|(_, &v)| v)
        .fold(0.0, f64::max);
    Ok(SeminormEstimate { alpha, schedule: schedule.to_vec(), values, limsup_proxy })
}

/// Verdict on `Σ'_{|k|≤n} c_k/k` over dyadic windows up to `n_max`.
pub fn hilbert_verdict(c: &ModulatingSequence, n_max: u64) -> ConvergenceVerdict {
    let mut collector = VerdictCollector::new();
    run_partial_sums(n_max, |k| (c.eval(k), c.eval(-k)), |s| collector.observe(s.n, s.h));
    collector.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeminormHilbert {
    pub seminorm: SeminormEstimate,
    pub hilbert: ConvergenceVerdict,
}

pub fn seminorm_and_hilbert(c: &ModulatingSequence, alpha: f64, schedule: &[u64]) -> Result<SeminormHilbert> {
    let seminorm = seminorm_estimate(c, alpha, schedule)?;
    let hilbert = hilbert_verdict(c, *schedule.last().expect("validated"));
    Ok(SeminormHilbert { seminorm, hilbert })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationStep {
    pub radius: u64,
    /// Seminorm proxy of `a − a^r`.
    pub seminorm_gap: f64,
    /// Verdict for `{a^r_k b_k}`.
    pub verdict: VerdictKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationExperiment {
    pub alpha: f64,
    pub schedule: Vec<u64>,
    pub steps: Vec<TruncationStep>,
    /// Verdict for `{a_k b_k}`.
    pub limit_verdict: VerdictKind,
    pub gaps_nonincreasing: bool,
    pub verdicts_stable: bool,
}

/// Truncations `a^r = truncate(a, r)` for each radius: seminorm proxy of `a − a^r`
/// and Hilbert verdicts of `{a^r_k b_k}` against `{a_k b_k}` (`b ≡ 1` when absent).
pub fn truncation_experiment(
    a: &ModulatingSequence,
    b: Option<&ModulatingSequence>,
    alpha: f64,
    radii: &[u64],
    schedule: &[u64],
) -> Result<TruncationExperiment> {
    validate_alpha_schedule(alpha, schedule)?;
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("radii must be strictly increasing"));
    }
    let n_max = *schedule.last().expect("validated");
    let modulate = |s: &ModulatingSequence| -> Result<ModulatingSequence> {
        match b {
            Some(b) => transform_sequence(s, SequenceOp::Product(b.clone())),
            None => Ok(s.clone()),
        }
    };
    let limit_verdict = hilbert_verdict(&modulate(a)?, n_max).verdict;
    let steps = radii
        .par_iter()
        .map(|&r| {
            let truncated = transform_sequence(a, SequenceOp::Truncate(r))?;
            let src = a.clone();
            let ri = r as i64;
            let tail = ModulatingSequence::from_fn(format!("tail({}, {r})", a.label()), a.bound(), Flags::default(), move |k| {
                if k.abs() <= ri { Complex64::new(0.0, 0.0) } else { src.eval(k) }
            });
            Ok(TruncationStep {
                radius: r,
                seminorm_gap: seminorm_estimate(&tail, alpha, schedule)?.limsup_proxy,
                verdict: hilbert_verdict(&modulate(&truncated)?, n_max).verdict,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gaps_nonincreasing = steps.windows(2).all(|w| w[1].seminorm_gap <= w[0].seminorm_gap);
    let verdicts_stable = steps.iter().all(|s| s.verdict == limit_verdict);
    Ok(TruncationExperiment { alpha, schedule: schedule.to_vec(), steps, limit_verdict, gaps_nonincreasing, verdicts_stable })
}

/// `2^lo, 2^{lo+1}, …, 2^hi`.
pub fn dyadic_schedule(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|j| 1u64 << j).collect()
}
