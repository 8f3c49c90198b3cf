//! Partial sums `H_n = Σ'_{|k|≤n} a_k v_k / k`, their Abel decomposition,
//! maximal functions and finite-`n` convergence diagnostics.
//!
//! Everything is driven by one incremental loop over `k = 1, 2, …` that
//! consumes the pair `(v_k, v_{-k})`, so a trace of radius `n` costs `O(n)`
//! and needs no stored orbit.

use std::collections::HashMap;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{DynamicalSystem, Observable, OrbitValues, OrbitWalk, Point, SystemKind, TorusLattice};
use crate::rates::linear_fit;
use crate::sequences::{named_sequence, CycleConvention, Frequency, ModulatingSequence, NamedSequence};
use crate::sum::{ComplexSum, NeumaierSum};
use crate::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Running state after step `n` of the incremental loop.
#[derive(Debug, Clone, Copy)]
pub struct StepState {
    pub n: u64,
    pub h: Complex64,
    /// `Σ_{k<n} (S_k − S_{−k}) / (k(k+1))`
    pub abel_main: Complex64,
    /// `(S_n − S_{−n}) / n`
    pub abel_tail: Complex64,
}

/// Drive the partial-sum recursion up to `n_max`, calling `visit` after every step.
/// `pair(k)` returns `(a_k v_k, a_{−k} v_{−k})` for `k ≥ 1`.
pub fn run_partial_sums<P, V>(n_max: u64, mut pair: P, mut visit: V)
where
    P: FnMut(i64) -> (Complex64, Complex64),
    V: FnMut(&StepState),
{
    let mut h = ComplexSum::new();
    let mut main = ComplexSum::new();
    let mut diff = ComplexSum::new();
    for n in 1..=n_max {
        if n >= 2 {
            let m = (n - 1) as f64;
            main += diff.sum() / (m * (m + 1.0));
        }
        let (p, q) = pair(n as i64);
        let k = n as f64;
        h += (p - q) / k;
        diff += p - q;
        visit(&StepState { n, h: h.sum(), abel_main: main.sum(), abel_tail: diff.sum() / k });
    }
}

/// Sequential `(v_k, v_{−k})` for `k = 1, 2, …` along the orbit of `x0`.
pub struct OrbitPairs<'a> {
    f: &'a Observable,
    walk: OrbitWalk,
}

impl<'a> OrbitPairs<'a> {
    pub fn new(sys: &DynamicalSystem, f: &'a Observable, x0: Point) -> Self {
        Self { f, walk: OrbitWalk::new(sys, x0) }
    }

    /// Values at index `k`; must be called with `k = 1, 2, …` in order.
    pub fn next_pair(&mut self) -> (Complex64, Complex64) {
        let (_, p, q) = self.walk.next().expect("orbit walk is infinite");
        (self.f.eval(&p), self.f.eval(&q))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbelParts {
    pub main: Complex64,
    pub tail: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransformTrace {
    pub checkpoints: Vec<u64>,
    pub h_values: Vec<Complex64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abel_parts: Option<Vec<AbelParts>>,
    /// Coordinates of the base point, when the orbit comes from a system.
    pub x0: Vec<f64>,
    pub sequence: String,
    pub system: String,
}

fn validate_checkpoints(checkpoints: &[u64]) -> Result<()> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("checkpoints must be strictly increasing"));
    }
    Ok(())
}

fn trace_from_pairs<P>(checkpoints: &[u64], with_abel: bool, pair: P) -> (Vec<Complex64>, Option<Vec<AbelParts>>)
where
    P: FnMut(i64) -> (Complex64, Complex64),
{
    let n_max = checkpoints.last().copied().unwrap_or(0);
    let mut h_values = Vec::with_capacity(checkpoints.len());
    let mut parts = Vec::with_capacity(if with_abel { checkpoints.len() } else { 0 });
    let mut next = 0;
    while next < checkpoints.len() && checkpoints[next] == 0 {
        h_values.push(ZERO);
        parts.push(AbelParts { main: ZERO, tail: ZERO });
        next += 1;
    }
    run_partial_sums(n_max, pair, |s| {
        if next < checkpoints.len() && checkpoints[next] == s.n {
            h_values.push(s.h);
            if with_abel {
                parts.push(AbelParts { main: s.abel_main, tail: s.abel_tail });
            }
            next += 1;
        }
    });
    (h_values, with_abel.then_some(parts))
}

/// `H_n` at each checkpoint for a stored orbit `v_k`, `|k| ≤ radius`.
pub fn eht_trace(a: &ModulatingSequence, orbit: &OrbitValues, checkpoints: &[u64], with_abel: bool) -> Result<TransformTrace> {
    validate_checkpoints(checkpoints)?;
    if let Some(&last) = checkpoints.last() {
        if last > orbit.radius() {
            return Err(Error::invalid(format!("checkpoint {last} exceeds orbit radius {}", orbit.radius())));
        }
    }
    let (h_values, abel_parts) =
        trace_from_pairs(checkpoints, with_abel, |k| (a.eval(k) * orbit.get(k), a.eval(-k) * orbit.get(-k)));
    Ok(TransformTrace {
        checkpoints: checkpoints.to_vec(),
        h_values,
        abel_parts,
        x0: Vec::new(),
        sequence: a.label().to_string(),
        system: "orbit".into(),
    })
}

/// `H_n(x0)` at each checkpoint along the orbit of `x0` under `sys`, generated on the fly.
pub fn eht_trace_on_system(
    a: &ModulatingSequence,
    sys: &DynamicalSystem,
    f: &Observable,
    x0: &Point,
    checkpoints: &[u64],
    with_abel: bool,
) -> Result<TransformTrace> {
    validate_checkpoints(checkpoints)?;
    let mut pairs = OrbitPairs::new(sys, f, *x0);
    let (h_values, abel_parts) = trace_from_pairs(checkpoints, with_abel, |k| {
        let (p, q) = pairs.next_pair();
        (a.eval(k) * p, a.eval(-k) * q)
    });
    Ok(TransformTrace {
        checkpoints: checkpoints.to_vec(),
        h_values,
        abel_parts,
        x0: point_coords(sys, x0),
        sequence: a.label().to_string(),
        system: sys.name().into(),
    })
}

fn point_coords(sys: &DynamicalSystem, p: &Point) -> Vec<f64> {
    match sys.kind() {
        SystemKind::TorusAutomorphism => vec![p.x(), p.y()],
        _ => vec![p.x()],
    }
}

/// `H_n` recomputed from scratch in index order `k = −n, …, n`.
pub fn eht_batch(a: &ModulatingSequence, orbit: &OrbitValues, n: u64) -> Result<Complex64> {
    if n > orbit.radius() {
        return Err(Error::invalid(format!("n = {n} exceeds orbit radius {}", orbit.radius())));
    }
    let n = n as i64;
    let acc: ComplexSum = (-n..=n).filter(|&k| k != 0).map(|k| a.eval(k) * orbit.get(k) / k as f64).collect();
    Ok(acc.sum())
}

/// `|H_n − (abel_main + abel_tail)| / (1 + |H_n|)`.
pub fn abel_identity_residual(a: &ModulatingSequence, orbit: &OrbitValues, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::invalid("abel residual needs n ≥ 2"));
    }
    let h = eht_batch(a, orbit, n)?;
    let t = eht_trace(a, orbit, &[n], true)?;
    let p = t.abel_parts.expect("abel parts requested")[0];
    Ok((h - (p.main + p.tail)).norm() / (1.0 + h.norm()))
}

impl TransformTrace {
    /// CSV with header `n,re,im,abel_main,abel_tail`; Abel parts are complex literals `a+bi`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,re,im,abel_main,abel_tail")?;
        for (i, (n, h)) in self.checkpoints.iter().zip(&self.h_values).enumerate() {
            let (m, t) = match &self.abel_parts {
                Some(p) => (complex_literal(p[i].main), complex_literal(p[i].tail)),
                None => (String::new(), String::new()),
            };
            writeln!(out, "{n},{:e},{:e},{m},{t}", h.re, h.im)?;
        }
        Ok(())
    }

    pub fn max_abel_residual(&self) -> Option<f64> {
        let parts = self.abel_parts.as_ref()?;
        Some(
            self.h_values
                .iter()
                .zip(parts)
                .map(|(h, p)| (h - (p.main + p.tail)).norm() / (1.0 + h.norm()))
                .fold(0.0, f64::max),
        )
    }
}

fn complex_literal(z: Complex64) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:e}{sign}{:e}i", z.re, z.im.abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    CauchyTrend,
    Diverging,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthModel {
    LogN,
    LogLogN,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    pub model: GrowthModel,
    pub coefficient: f64,
    pub intercept: f64,
    /// Root-mean-square residual of `|H_n| ≈ coefficient·φ(n) + intercept`.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowOscillation {
    pub start: u64,
    pub end: u64,
    /// `max_{start ≤ n ≤ end} |H_n − H_start|`
    pub oscillation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceVerdict {
    pub oscillations: Vec<WindowOscillation>,
    pub verdict: VerdictKind,
    pub growth_fit: Option<GrowthFit>,
}

/// Oscillation below which a window counts as settled regardless of ratios.
pub const SETTLED_OSCILLATION: f64 = 1e-14;
const CAUCHY_RATIO: f64 = 0.5;
const DIVERGING_RATIO: f64 = 0.75;
const FIT_START: u64 = 16;
const FIT_POINTS_PER_OCTAVE: f64 = 8.0;

/// Three-valued verdict from the last three complete windows.
pub fn classify_oscillations(osc: &[WindowOscillation]) -> VerdictKind {
    if osc.len() < 3 {
        return VerdictKind::Inconclusive;
    }
    let last = osc[osc.len() - 1].oscillation;
    let earlier = osc[osc.len() - 3].oscillation;
    if last <= SETTLED_OSCILLATION || last <= CAUCHY_RATIO * earlier {
        VerdictKind::CauchyTrend
    } else if last >= DIVERGING_RATIO * earlier {
        VerdictKind::Diverging
    } else {
        VerdictKind::Inconclusive
    }
}

/// Online collector of dyadic-window oscillations and growth-fit samples.
#[derive(Debug, Clone)]
pub struct VerdictCollector {
    window_start: u64,
    h_start: Complex64,
    current_max: f64,
    windows: Vec<WindowOscillation>,
    fit_n: Vec<u64>,
    fit_abs: Vec<f64>,
    next_fit: f64,
}

impl Default for VerdictCollector {
    fn default() -> Self {
        Self::new()
    }
}

impl VerdictCollector {
    pub fn new() -> Self {
        Self {
            window_start: 1,
            h_start: ZERO,
            current_max: 0.0,
            windows: Vec::new(),
            fit_n: Vec::new(),
            fit_abs: Vec::new(),
            next_fit: FIT_START as f64,
        }
    }

    pub fn observe(&mut self, n: u64, h: Complex64) {
        if n == 1 {
            self.h_start = h;
        }
        if n >= self.window_start {
            self.current_max = self.current_max.max((h - self.h_start).norm());
            if n == 2 * self.window_start {
                self.windows.push(WindowOscillation { start: self.window_start, end: n, oscillation: self.current_max });
                self.window_start = n;
                self.h_start = h;
                self.current_max = 0.0;
            }
        }
        if n as f64 >= self.next_fit {
            self.fit_n.push(n);
            self.fit_abs.push(h.norm());
            while self.next_fit <= n as f64 {
                self.next_fit *= 2f64.powf(1.0 / FIT_POINTS_PER_OCTAVE);
            }
        }
    }

    pub fn finish(self) -> ConvergenceVerdict {
        let verdict = classify_oscillations(&self.windows);
        let growth_fit = growth_fit(&self.fit_n, &self.fit_abs);
        ConvergenceVerdict { oscillations: self.windows, verdict, growth_fit }
    }
}

/// Least-squares fit of `|H_n|` against `ln n` and `ln ln n`; the model with the smaller residual wins.
pub fn growth_fit(ns: &[u64], abs_h: &[f64]) -> Option<GrowthFit> {
    let pts: Vec<(f64, f64)> = ns.iter().zip(abs_h).filter(|(n, _)| **n >= 3).map(|(n, h)| ((*n as f64).ln(), *h)).collect();
    if pts.len() < 3 {
        return None;
    }
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let fit = |model: GrowthModel| -> Option<GrowthFit> {
        let xs: Vec<f64> = pts
            .iter()
            .map(|p| match model {
                GrowthModel::LogN => p.0,
                GrowthModel::LogLogN => p.0.ln(),
            })
            .collect();
        let (slope, intercept) = linear_fit(&xs, &ys)?;
        let ss: NeumaierSum = xs.iter().zip(&ys).map(|(x, y)| (y - slope * x - intercept).powi(2)).collect();
        Some(GrowthFit { model, coefficient: slope, intercept, residual: (ss.sum() / xs.len() as f64).sqrt() })
    };
    match (fit(GrowthModel::LogN), fit(GrowthModel::LogLogN)) {
        (Some(a), Some(b)) => Some(if b.residual < a.residual { b } else { a }),
        (a, b) => a.or(b),
    }
}

/// Verdict for `H_n(x0)`, `n ≤ n_max`, streamed along the orbit.
pub fn convergence_on_system(
    a: &ModulatingSequence,
    sys: &DynamicalSystem,
    f: &Observable,
    x0: &Point,
    n_max: u64,
) -> ConvergenceVerdict {
    let mut pairs = OrbitPairs::new(sys, f, *x0);
    let mut col = VerdictCollector::new();
    run_partial_sums(
        n_max,
        |k| {
            let (p, q) = pairs.next_pair();
            (a.eval(k) * p, a.eval(-k) * q)
        },
        |s| col.observe(s.n, s.h),
    );
    col.finish()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Weak11Report {
    pub lambdas: Vec<f64>,
    pub empirical_tail: Vec<f64>,
    pub bound_ratio: Vec<f64>,
    pub l1_norm: f64,
    /// `max bound_ratio` over the grid; reported, never asserted.
    pub constant: f64,
    pub sample_count: usize,
    pub horizon: u64,
}

/// Empirical `μ{sup_{n≤N} |H_n| > λ}` across a `λ`-grid.
pub fn maximal_and_weak11(
    a: &ModulatingSequence,
    sys: &DynamicalSystem,
    f: &Observable,
    lambdas: &[f64],
    horizon: u64,
    sample_count: usize,
    seed: u64,
) -> Result<Weak11Report> {
    if lambdas.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(Error::invalid("λ-grid must be positive and finite"));
    }
    if sample_count == 0 {
        return Err(Error::invalid("sample_count must be positive"));
    }
    let l1 = f.norms().l1;
    let coeffs = a.window(horizon);
    let points = sys.sample_points(sample_count, seed);
    let sups: Vec<f64> = points
        .par_iter()
        .map(|x| {
            let mut pairs = OrbitPairs::new(sys, f, *x);
            let mut sup = 0.0f64;
            run_partial_sums(
                horizon,
                |k| {
                    let (p, q) = pairs.next_pair();
                    (coeffs.get(k) * p, coeffs.get(-k) * q)
                },
                |s| sup = sup.max(s.h.norm()),
            );
            sup
        })
        .collect();
    let empirical_tail: Vec<f64> =
        lambdas.iter().map(|l| sups.iter().filter(|s| **s > *l).count() as f64 / sample_count as f64).collect();
    let bound_ratio: Vec<f64> = empirical_tail
        .iter()
        .zip(lambdas)
        .map(|(t, l)| if l1 > 0.0 { t * l / l1 } else { 0.0 })
        .collect();
    let constant = bound_ratio.iter().copied().fold(0.0, f64::max);
    Ok(Weak11Report { lambdas: lambdas.to_vec(), empirical_tail, bound_ratio, l1_norm: l1, constant, sample_count, horizon })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub lambda: Complex64,
    pub trace: TransformTrace,
    pub verdict: ConvergenceVerdict,
}

/// Modulate by `λ^k` (two-sided) or `λ^{|k|}` (symmetric) for each `λ`; verdicts use every `n ≤ max checkpoint`.
pub fn wiener_wintner_sweep(
    sys: &DynamicalSystem,
    f: &Observable,
    x0: &Point,
    lambda_grid: &[Complex64],
    checkpoints: &[u64],
    symmetric: bool,
) -> Result<Vec<SweepEntry>> {
    validate_checkpoints(checkpoints)?;
    let freqs: Vec<Frequency> = lambda_grid.iter().map(|l| Frequency::from_complex(*l)).collect::<Result<_>>()?;
    let n_max = checkpoints.last().copied().unwrap_or(0);
    Ok(freqs
        .par_iter()
        .zip(lambda_grid.par_iter())
        .map(|(fr, lam)| {
            let fr = *fr;
            let mut pairs = OrbitPairs::new(sys, f, *x0);
            let mut col = VerdictCollector::new();
            let mut h_values = Vec::with_capacity(checkpoints.len());
            let mut next = checkpoints.iter().take_while(|c| **c == 0).count();
            h_values.resize(next, ZERO);
            run_partial_sums(
                n_max,
                |k| {
                    let (p, q) = pairs.next_pair();
                    let neg = if symmetric { fr.pow(k) } else { fr.pow(-k) };
                    (fr.pow(k) * p, neg * q)
                },
                |s| {
                    col.observe(s.n, s.h);
                    if next < checkpoints.len() && checkpoints[next] == s.n {
                        h_values.push(s.h);
                        next += 1;
                    }
                },
            );
            let label = format!("{}[{}]", if symmetric { "lambda_abs_power" } else { "lambda_power" }, fr.turns());
            SweepEntry {
                lambda: *lam,
                trace: TransformTrace {
                    checkpoints: checkpoints.to_vec(),
                    h_values,
                    abel_parts: None,
                    x0: point_coords(sys, x0),
                    sequence: label,
                    system: sys.name().into(),
                },
                verdict: col.finish(),
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    MonteCarlo,
    LatticeQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralCheck {
    pub j: u64,
    /// Estimate of `‖S_j − S_{−j}‖₂` (Monte-Carlo on the circle, exact lattice quadrature on the torus).
    pub mc_norm: f64,
    /// Value predicted by the spectral measure of `f` with the negative-index terms subtracted.
    pub spectral_value: f64,
    /// `|Σ_{1≤|k|≤j} a_k φ^k|·‖f‖₂` for eigenfunctions; equals `spectral_value` on the torus.
    pub unsigned_value: f64,
    pub method: NormMethod,
    /// Frequency collisions modulo the lattice (0 means the quadrature equals the torus integral).
    pub collisions: u64,
}

/// Lattice modulus for torus quadrature: prime, `≡ 2 (mod 5)`.
pub const TORUS_LATTICE_MODULUS: u64 = 1_000_000_007;

/// `‖S_j − S_{−j}‖₂` against the spectral prediction for eigenfunctions and torus characters.
pub fn l2_diff_vs_spectral(
    a: &ModulatingSequence,
    sys: &DynamicalSystem,
    f: &Observable,
    j_schedule: &[u64],
    sample_count: usize,
    seed: u64,
) -> Result<Vec<SpectralCheck>> {
    validate_checkpoints(j_schedule)?;
    let j_max = j_schedule.last().copied().unwrap_or(0);
    match (sys.kind(), *f) {
        (SystemKind::Rotation { .. }, Observable::Character { m }) => {
            rotation_l2(a, sys, f, sys.eigenvalue(m).expect("rotation"), j_schedule, j_max, sample_count, seed)
        }
        (SystemKind::Rotation { .. }, Observable::Constant { .. }) => {
            rotation_l2(a, sys, f, Complex64::new(1.0, 0.0), j_schedule, j_max, sample_count, seed)
        }
        (SystemKind::TorusAutomorphism, Observable::TorusCharacter { p, q }) if (p, q) != (0, 0) => {
            Ok(torus_l2(a, (p, q), j_schedule))
        }
        _ => Err(Error::invalid(format!("{:?} is not an eigenfunction or torus character of {}", f, sys.name()))),
    }
}

#[allow(clippy::too_many_arguments)]
fn rotation_l2(
    a: &ModulatingSequence,
    sys: &DynamicalSystem,
    f: &Observable,
    phi: Complex64,
    j_schedule: &[u64],
    j_max: u64,
    sample_count: usize,
    seed: u64,
) -> Result<Vec<SpectralCheck>> {
    if sample_count == 0 {
        return Err(Error::invalid("sample_count must be positive"));
    }
    let coeffs = a.window(j_max);
    let l2 = f.norms().l2;
    let fr = Frequency::from_complex(phi)?;
    let points = sys.sample_points(sample_count, seed);
    // per sample, |S_j − S_{−j}|² at every scheduled j
    let per_sample: Vec<Vec<f64>> = points
        .par_iter()
        .map(|x| {
            let mut pairs = OrbitPairs::new(sys, f, *x);
            let mut d = ComplexSum::new();
            let mut out = Vec::with_capacity(j_schedule.len());
            let mut next = j_schedule.iter().take_while(|j| **j == 0).count();
            out.resize(next, 0.0);
            for k in 1..=j_max as i64 {
                let (p, q) = pairs.next_pair();
                d += coeffs.get(k) * p - coeffs.get(-k) * q;
                if next < j_schedule.len() && j_schedule[next] == k as u64 {
                    out.push(d.sum().norm_sqr());
                    next += 1;
                }
            }
            out
        })
        .collect();
    let mut signed = ComplexSum::new();
    let mut unsigned = ComplexSum::new();
    let mut result = Vec::with_capacity(j_schedule.len());
    let mut k = 0i64;
    for (idx, &j) in j_schedule.iter().enumerate() {
        while (k as u64) < j {
            k += 1;
            signed += coeffs.get(k) * fr.pow(k) - coeffs.get(-k) * fr.pow(-k);
            unsigned += coeffs.get(k) * fr.pow(k) + coeffs.get(-k) * fr.pow(-k);
        }
        let ms: NeumaierSum = per_sample.iter().map(|v| v[idx]).collect();
        result.push(SpectralCheck {
            j,
            mc_norm: (ms.sum() / sample_count as f64).sqrt(),
            spectral_value: signed.sum().norm() * l2,
            unsigned_value: unsigned.sum().norm() * l2,
            method: NormMethod::MonteCarlo,
            collisions: 0,
        });
    }
    Ok(result)
}

fn torus_l2(a: &ModulatingSequence, w: (i64, i64), j_schedule: &[u64]) -> Vec<SpectralCheck> {
    let lat = TorusLattice::new(TORUS_LATTICE_MODULUS);
    let l = TORUS_LATTICE_MODULUS as i64;
    let w0 = (w.0.rem_euclid(l) as u64, w.1.rem_euclid(l) as u64);
    let (fwd_step, bwd_step) = (|v| lat.iterate(v, 1), |v| lat.iterate(v, -1));
    let mut groups: HashMap<(u64, u64), Complex64> = HashMap::new();
    let mut energy = NeumaierSum::new();
    let mut plain = NeumaierSum::new();
    let mut collisions = 0u64;
    let (mut wf, mut wb) = (w0, w0);
    let mut add = |key: (u64, u64), c: Complex64, energy: &mut NeumaierSum, collisions: &mut u64| {
        if groups.contains_key(&key) {
            *collisions += 1;
        }
        let g = groups.entry(key).or_insert(ZERO);
        *energy += (*g + c).norm_sqr() - g.norm_sqr();
        *g += c;
    };
    let mut result = Vec::with_capacity(j_schedule.len());
    let mut k = 0i64;
    for &j in j_schedule {
        while (k as u64) < j {
            k += 1;
            wf = fwd_step(wf);
            wb = bwd_step(wb);
            let (ap, am) = (a.eval(k), a.eval(-k));
            plain += ap.norm_sqr() + am.norm_sqr();
            add(wf, ap, &mut energy, &mut collisions);
            add(wb, -am, &mut energy, &mut collisions);
        }
        let spectral = plain.sum().max(0.0).sqrt();
        result.push(SpectralCheck {
            j,
            mc_norm: energy.sum().max(0.0).sqrt(),
            spectral_value: spectral,
            unsigned_value: spectral,
            method: NormMethod::LatticeQuadrature,
            collisions,
        });
    }
    result
}

/// Growth of `H_{3m+1}(x)`, `x ∈ A`, for the cycle-indicator sequence on the three-cycle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub convention: CycleConvention,
    pub n_max: u64,
    /// `(m, Re H_{3m+1})` at about eight points per octave of `m`.
    pub samples: Vec<(u64, f64)>,
    /// Midrange `c` of `Re H_{3m+1} − (2/3) ln(3m+1)` over `10 ≤ m ≤ n_max`.
    pub fit_constant: f64,
    /// `max_m |Re H_{3m+1} − (2/3) ln(3m+1) − c|`.
    pub band: f64,
    /// `Re H_{3m+1}` nondecreasing in `m`.
    pub monotone: bool,
    pub max_imaginary: f64,
    pub verdict: ConvergenceVerdict,
}

pub const COUNTEREXAMPLE_START: u64 = 10;

pub fn counterexample_growth(convention: CycleConvention, n_max: u64) -> Result<CounterexampleReport> {
    if n_max < COUNTEREXAMPLE_START {
        return Err(Error::invalid(format!("counterexample needs N ≥ {COUNTEREXAMPLE_START}")));
    }
    let sys = DynamicalSystem::three_cycle();
    let a = named_sequence(NamedSequence::CycleIndicator(convention));
    let mut pairs = OrbitPairs::new(&sys, &Observable::ThreeCycleStep, sys.default_point());
    let mut col = VerdictCollector::new();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut prev = f64::NEG_INFINITY;
    let mut monotone = true;
    let mut max_imaginary = 0.0f64;
    let mut samples = Vec::new();
    let mut next_sample = COUNTEREXAMPLE_START as f64;
    run_partial_sums(
        3 * n_max + 1,
        |k| {
            let (p, q) = pairs.next_pair();
            (a.eval(k) * p, a.eval(-k) * q)
        },
        |s| {
            col.observe(s.n, s.h);
            if s.n % 3 != 1 {
                return;
            }
            let m = s.n / 3;
            max_imaginary = max_imaginary.max(s.h.im.abs());
            if m >= 1 && s.h.re < prev {
                monotone = false;
            }
            prev = s.h.re;
            if m < COUNTEREXAMPLE_START {
                return;
            }
            let y = s.h.re - (2.0 / 3.0) * (s.n as f64).ln();
            lo = lo.min(y);
            hi = hi.max(y);
            if m as f64 >= next_sample || m == n_max {
                samples.push((m, s.h.re));
                while next_sample <= m as f64 {
                    next_sample *= 2f64.powf(1.0 / 8.0);
                }
            }
        },
    );
    Ok(CounterexampleReport {
        convention,
        n_max,
        samples,
        fit_constant: 0.5 * (lo + hi),
        band: 0.5 * (hi - lo),
        monotone,
        max_imaginary,
        verdict: col.finish(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::{named_sequence, CycleConvention, NamedSequence};

    fn one() -> Complex64 {
        Complex64::new(1.0, 0.0)
    }

    #[test]
    fn constant_sequence_on_constant_orbit_vanishes() {
        let a = ModulatingSequence::constant(Complex64::new(0.3, -2.0));
        let orbit = OrbitValues::from_fn(50, |_| one());
        let t = eht_trace(&a, &orbit, &[1, 2, 10, 50], true).unwrap();
        assert!(t.h_values.iter().all(|h| *h == ZERO));
        assert_eq!(abel_identity_residual(&named_sequence(NamedSequence::Constant(one())), &orbit, 50).unwrap(), 0.0);
    }

    #[test]
    fn checkpoint_beyond_radius_rejected() {
        let orbit = OrbitValues::from_fn(5, |_| one());
        let a = ModulatingSequence::constant(one());
        assert!(matches!(eht_trace(&a, &orbit, &[3, 6], false), Err(Error::InvalidArgument(_))));
        assert!(matches!(eht_trace(&a, &orbit, &[3, 3], false), Err(Error::InvalidArgument(_))));
        assert!(abel_identity_residual(&a, &orbit, 1).is_err());
    }

    #[test]
    fn zero_orbit_has_zero_residual() {
        let a = named_sequence(NamedSequence::HardyLittlewood);
        let orbit = OrbitValues::from_fn(100, |_| ZERO);
        assert_eq!(abel_identity_residual(&a, &orbit, 100).unwrap(), 0.0);
    }

    #[test]
    fn three_cycle_closed_form() {
        let sys = DynamicalSystem::three_cycle();
        let a = named_sequence(NamedSequence::CycleIndicator(CycleConvention::Symmetric));
        let checkpoints: Vec<u64> = (0..=40).map(|n| 3 * n + 1).collect();
        let t = eht_trace_on_system(&a, &sys, &Observable::ThreeCycleStep, &sys.default_point(), &checkpoints, true).unwrap();
        let mut expect = 0.0;
        for (n, h) in t.h_values.iter().enumerate() {
            expect += 2.0 / (3 * n + 1) as f64;
            assert!((h.re - expect).abs() < 1e-13 && h.im == 0.0);
        }
        assert!(t.max_abel_residual().unwrap() < 1e-14);
    }

    #[test]
    fn geometric_modulation_closed_form() {
        let sys = DynamicalSystem::rotation(2f64.sqrt()).unwrap();
        let f = Observable::Character { m: 1 };
        let x0 = Point::Circle(0.37);
        let phi = sys.eigenvalue(1).unwrap();
        let lam = Frequency::from_turns(0.1234);
        let a = ModulatingSequence::from_fn("lambda_abs", crate::sequences::Bound::Finite(1.0), Default::default(), move |k| {
            lam.pow(k.abs())
        });
        let t = eht_trace_on_system(&a, &sys, &f, &x0, &[1, 7, 100, 1000], false).unwrap();
        let fx = f.eval(&x0);
        for (n, h) in t.checkpoints.iter().zip(&t.h_values) {
            let s: Complex64 =
                (1..=*n as i32).map(|k| ((phi * lam.value()).powi(k) - (phi.conj() * lam.value()).powi(k)) / k as f64).sum();
            assert!((h - fx * s).norm() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn wiener_wintner_trivial_and_resonant() {
        let sys = DynamicalSystem::rotation(2f64.sqrt()).unwrap();
        let checkpoints: Vec<u64> = (1..=64).collect();
        let r = wiener_wintner_sweep(&sys, &Observable::constant(one()), &Point::Circle(0.0), &[one()], &checkpoints, true).unwrap();
        assert!(r[0].trace.h_values.iter().all(|h| *h == ZERO));
        assert_eq!(r[0].verdict.verdict, VerdictKind::CauchyTrend);

        let phi = sys.eigenvalue(1).unwrap();
        let cps = [1u64 << 16];
        let r = wiener_wintner_sweep(&sys, &Observable::Character { m: 1 }, &Point::Circle(0.0), &[phi.conj(), Complex64::new(0.0, 1.0)], &cps, true)
            .unwrap();
        assert_eq!(r[0].verdict.verdict, VerdictKind::Diverging);
        let fit = r[0].verdict.growth_fit.unwrap();
        assert_eq!(fit.model, GrowthModel::LogN);
        assert!((fit.coefficient - 1.0).abs() < 0.1, "{fit:?}");
        assert_eq!(r[1].verdict.verdict, VerdictKind::CauchyTrend);
        assert!(wiener_wintner_sweep(&sys, &Observable::Character { m: 1 }, &Point::Circle(0.0), &[Complex64::new(2.0, 0.0)], &cps, true).is_err());
    }

    #[test]
    fn verdict_rule() {
        let w = |o: &[f64]| -> Vec<WindowOscillation> {
            o.iter().enumerate().map(|(i, &x)| WindowOscillation { start: 1 << i, end: 2 << i, oscillation: x }).collect()
        };
        assert_eq!(classify_oscillations(&w(&[1.0, 0.7])), VerdictKind::Inconclusive);
        assert_eq!(classify_oscillations(&w(&[1.0, 0.7, 0.5])), VerdictKind::CauchyTrend);
        assert_eq!(classify_oscillations(&w(&[1.0, 0.9, 0.8])), VerdictKind::Diverging);
        assert_eq!(classify_oscillations(&w(&[1.0, 0.9, 0.6])), VerdictKind::Inconclusive);
        assert_eq!(classify_oscillations(&w(&[0.0, 0.0, 0.0])), VerdictKind::CauchyTrend);
    }

    #[test]
    fn weak11_zero_function_and_three_cycle() {
        let sys = DynamicalSystem::three_cycle();
        let a = named_sequence(NamedSequence::CycleIndicator(CycleConvention::Symmetric));
        let zero = maximal_and_weak11(&a, &sys, &Observable::constant(ZERO), &[0.5, 1.0], 1000, 30, 1).unwrap();
        assert_eq!(zero.empirical_tail, vec![0.0, 0.0]);

        let r = maximal_and_weak11(&a, &sys, &Observable::ThreeCycleStep, &[1.0, 4.0, 5.0, 9.0], 100_000, 30, 7).unwrap();
        assert_eq!(r.empirical_tail[0], 1.0);
        assert_eq!(r.empirical_tail[1], 1.0);
        assert!((r.empirical_tail[2] - 1.0 / 3.0).abs() < 1e-12);
        assert!((r.empirical_tail[3] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn spectral_identity_on_eigenfunction_and_torus() {
        let sys = DynamicalSystem::rotation(2f64.sqrt()).unwrap();
        let a = ModulatingSequence::constant(one());
        let r = l2_diff_vs_spectral(&a, &sys, &Observable::Character { m: 1 }, &[5], 64, 3).unwrap();
        let phi = sys.eigenvalue(1).unwrap();
        let unsigned: Complex64 = (1..=5).map(|k| phi.powi(k) + phi.powi(-k)).sum();
        let signed: Complex64 = (1..=5).map(|k| phi.powi(k) - phi.powi(-k)).sum();
        assert!((r[0].unsigned_value - unsigned.norm()).abs() < 1e-12);
        assert!((r[0].spectral_value - signed.norm()).abs() < 1e-12);
        assert!((r[0].mc_norm - r[0].spectral_value).abs() < 1e-8);

        let zero = l2_diff_vs_spectral(&ModulatingSequence::zero(), &sys, &Observable::Character { m: 1 }, &[3], 16, 3).unwrap();
        assert_eq!((zero[0].mc_norm, zero[0].spectral_value), (0.0, 0.0));

        let tor = DynamicalSystem::torus();
        let hl = named_sequence(NamedSequence::HardyLittlewood);
        let sched: Vec<u64> = (0..=14).map(|e| 1u64 << e).collect();
        let r = l2_diff_vs_spectral(&hl, &tor, &Observable::TorusCharacter { p: 1, q: 0 }, &sched, 1, 0).unwrap();
        for c in &r {
            assert_eq!(c.collisions, 0);
            assert!((c.mc_norm - c.spectral_value).abs() < 1e-8);
            assert!(c.mc_norm <= (2.0 * c.j as f64).sqrt() + 1e-9);
        }
        assert!(l2_diff_vs_spectral(&hl, &tor, &Observable::ThreeCycleStep, &[1], 1, 0).is_err());
    }

    #[test]
    fn trace_csv_header() {
        let a = ModulatingSequence::constant(one());
        let orbit = OrbitValues::from_fn(3, |k| Complex64::new(k as f64, 0.0));
        let t = eht_trace(&a, &orbit, &[1, 3], true).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("n,re,im,abel_main,abel_tail\n1,2e0,0e0,"));
        assert_eq!(s.lines().count(), 3);
    }

    #[test]
    fn counterexample_band_and_monotone() {
        let r = counterexample_growth(CycleConvention::Symmetric, 20_000).unwrap();
        assert!(r.monotone && r.band <= 1.0 && r.max_imaginary == 0.0);
        assert_eq!(r.verdict.verdict, VerdictKind::Diverging);
        assert_eq!(r.samples.last().unwrap().0, 20_000);
    }
}
