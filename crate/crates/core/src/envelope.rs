//! Piecewise-linear envelopes dominating a null sequence, their cosine series,
//! and the Dirichlet/Fejér resummation of that series.
//!
//! Breakpoints grow doubly exponentially for slowly decaying `h`, so each one
//! is stored exactly while it fits below `2^53` and as `ln n_k` afterwards.
//! Slopes carry `ln(−s_k)` alongside the (possibly underflowed) value so that
//! the sign and ratio conditions stay decidable.

use std::f64::consts::{LN_2, PI, TAU};
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

use crate::sequences::{Bound, Flags, ModulatingSequence};
use crate::sum::NeumaierSum;
use crate::{Error, Result};

/// Largest breakpoint kept as an exact integer.
pub const EXACT_LIMIT: u64 = 1 << 53;
/// Exhaustive checks of `h` and `a` stop here.
pub const EXHAUSTIVE_LIMIT: u64 = 1_000_000;
/// Kernel terms with `n_k` above this are bounded instead of evaluated.
pub const KERNEL_EVAL_LIMIT: u64 = 1 << 40;
/// Largest `n` for the direct cosine partial sum.
pub const DIRECT_SUM_BUDGET: u64 = 50_000_000;
/// Distance from `{0, 2π}` below which kernels are not evaluated.
pub const SINGULAR_GUARD: f64 = 1e-9;
pub const LAMBDA: f64 = 2.0;

type IndexFn = Arc<dyn Fn(u64) -> f64 + Send + Sync>;
type InverseFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A null sequence `h` with a nonincreasing majorant `ĥ ≥ h` valid up to `horizon`.
#[derive(Clone)]
pub struct MajorantH {
    label: String,
    h: IndexFn,
    hhat: IndexFn,
    horizon: u64,
    /// `t ↦ ln(min{n : ĥ(n) ≤ t})`, used past the horizon.
    inverse_ln: Option<InverseFn>,
}

impl std::fmt::Debug for MajorantH {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MajorantH")
            .field("label", &self.label)
            .field("horizon", &self.horizon)
            .field("analytic_inverse", &self.inverse_ln.is_some())
            .finish()
    }
}

impl MajorantH {
    pub fn new<H, G>(label: impl Into<String>, h: H, hhat: G, horizon: u64) -> Self
    where
        H: Fn(u64) -> f64 + Send + Sync + 'static,
        G: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        Self { label: label.into(), h: Arc::new(h), hhat: Arc::new(hhat), horizon, inverse_ln: None }
    }

    pub fn with_inverse<F: Fn(f64) -> f64 + Send + Sync + 'static>(mut self, inverse_ln: F) -> Self {
        self.inverse_ln = Some(Arc::new(inverse_ln));
        self
    }

    /// `h(n) = ĥ(n) = 1/ln(n + shift)`, `shift ≥ 2`, with its analytic inverse.
    pub fn inverse_log(shift: u64, horizon: u64) -> Result<Self> {
        if shift < 2 {
            return Err(Error::invalid("inverse-log majorant needs shift ≥ 2"));
        }
        let s = shift as f64;
        let f = move |n: u64| 1.0 / (n as f64 + s).ln();
        Ok(Self::new(format!("inverse_log[{shift}]"), f, f, horizon).with_inverse(move |t| {
            // ln(e^{1/t} − s), or −∞ when every n qualifies
            let u = 1.0 / t;
            if u <= s.ln() {
                f64::NEG_INFINITY
            } else {
                u + (-s * (-u).exp()).ln_1p()
            }
        }))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn h(&self, n: u64) -> f64 {
        (self.h)(n)
    }

    pub fn hhat(&self, n: u64) -> f64 {
        (self.hhat)(n)
    }

    /// `ĥ ≥ h` and `ĥ` nonincreasing on `n ≤ min(horizon, 10⁶)`.
    pub fn validate(&self) -> Result<()> {
        let top = self.horizon.min(EXHAUSTIVE_LIMIT);
        let mut prev = f64::INFINITY;
        for n in 0..=top {
            let (h, g) = (self.h(n), self.hhat(n));
            if !(h.is_finite() && g.is_finite()) {
                return Err(Error::invalid(format!("{}: non-finite value at n = {n}", self.label)));
            }
            if g < h {
                return Err(Error::invalid(format!("{}: ĥ({n}) = {g} < h({n}) = {h}", self.label)));
            }
            if g > prev {
                return Err(Error::invalid(format!("{}: ĥ increases at n = {n}", self.label)));
            }
            prev = g;
        }
        Ok(())
    }

    /// `2·max h`, scanning until `ĥ` drops below the running maximum.
    pub fn envelope_height(&self) -> Result<f64> {
        let mut best = f64::NEG_INFINITY;
        let mut settled = false;
        for n in 0..=self.horizon {
            best = best.max(self.h(n));
            if self.hhat(n) <= best {
                settled = true;
                break;
            }
        }
        if best <= 0.0 {
            return Err(Error::Domain(format!("{}: max h = {best} ≤ 0 gives a degenerate envelope", self.label)));
        }
        if settled {
            return Ok(2.0 * best);
        }
        Err(Error::HorizonExceeded(format!("{}: ĥ stays above max h through n = {}", self.label, self.horizon)))
    }

    /// `ln` of the least `n` with `ĥ(n) ≤ t`, exact when it fits.
    fn threshold_index(&self, t: f64) -> Result<Breakpoint> {
        if self.hhat(self.horizon) <= t {
            let (mut lo, mut hi) = (0u64, self.horizon);
            if self.hhat(0) <= t {
                return Ok(Breakpoint::exact(0));
            }
            // ĥ(lo) > t ≥ ĥ(hi)
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if self.hhat(mid) <= t { hi = mid } else { lo = mid }
            }
            return Ok(Breakpoint::exact(hi));
        }
        let inv = self.inverse_ln.as_ref().ok_or_else(|| {
            Error::HorizonExceeded(format!("{}: ĥ does not reach {t:e} within n ≤ {}", self.label, self.horizon))
        })?;
        let ln_m = inv(t);
        if ln_m < (EXACT_LIMIT as f64).ln() - 1.0 {
            let guess = ln_m.exp().ceil().max(self.horizon as f64) as u64;
            Ok(Breakpoint::exact(self.refine(t, guess)))
        } else {
            Ok(Breakpoint::log(ln_m))
        }
    }

    /// Least `n ≥ horizon` with `ĥ(n) ≤ t`, starting from an estimate.
    fn refine(&self, t: f64, guess: u64) -> u64 {
        let mut hi = guess.max(1);
        while self.hhat(hi) > t {
            hi = hi.saturating_mul(2);
        }
        let mut lo = hi;
        let mut step = 1u64;
        while lo > self.horizon && self.hhat(lo - 1) <= t {
            lo = lo.saturating_sub(step).max(self.horizon);
            step = step.saturating_mul(2);
        }
        // ĥ(lo − 1) > t or lo = horizon; ĥ(hi) ≤ t
        let (mut a, mut b) = (lo.saturating_sub(1), hi);
        if self.hhat(a) <= t {
            return a;
        }
        while b - a > 1 {
            let mid = a + (b - a) / 2;
            if self.hhat(mid) <= t { b = mid } else { a = mid }
        }
        b
    }
}

/// Breakpoint `n_k`: exact below `2^53`, otherwise known through `ln n_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakpoint {
    pub exact: Option<u64>,
    pub ln: f64,
}

impl Breakpoint {
    pub fn exact(n: u64) -> Self {
        Self { exact: Some(n), ln: (n as f64).ln() }
    }

    pub fn log(ln: f64) -> Self {
        Self { exact: None, ln }
    }

}

impl Serialize for Breakpoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.exact {
            Some(n) => s.serialize_u64(n),
            None => {
                let mut m = s.serialize_map(Some(1))?;
                m.serialize_entry("ln", &self.ln)?;
                m.end()
            }
        }
    }
}

/// Slope on `(n_{k−1}, n_k)`; `ln_neg = ln(−s_k)` stays finite when `value` underflows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Slope {
    pub value: f64,
    pub ln_neg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeSpec {
    #[serde(rename = "M")]
    pub m: f64,
    pub lambda: f64,
    /// `n_0 = 0, n_1, …, n_K`
    pub breakpoints: Vec<Breakpoint>,
    /// `a(n_k)`
    pub values: Vec<f64>,
    /// `s_1, …, s_K`
    pub slopes: Vec<Slope>,
}

/// `ln(e^b − e^a)` for `b > a`.
fn ln_diff(b: f64, a: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        b
    } else {
        b + (-(a - b).exp()).ln_1p()
    }
}

pub fn build_envelope(hm: &MajorantH, k_max: usize) -> Result<EnvelopeSpec> {
    if k_max == 0 {
        return Err(Error::invalid("envelope needs K ≥ 1"));
    }
    let m = hm.envelope_height()?;
    let mut breakpoints = vec![Breakpoint::exact(0)];
    for k in 1..=k_max {
        let prev = breakpoints[k - 1];
        let target = m / 2f64.powi(k as i32 + 1);
        let mk = hm.threshold_index(target)?;
        let next = match (mk.exact, prev.exact) {
            (Some(mk), Some(p)) if 2 * p + 3 < EXACT_LIMIT => Breakpoint::exact(mk.max(2 * p + 3)),
            _ => {
                let doubled = match prev.exact {
                    Some(p) => (2.0 * p as f64 + 3.0).ln(),
                    // ln(2 n_{k−1} + 3)
                    None => prev.ln + LN_2 + (1.5 * (-prev.ln).exp()).ln_1p(),
                };
                Breakpoint::log(mk.ln.max(doubled))
            }
        };
        let next = match next.exact {
            Some(n) if n >= EXACT_LIMIT => Breakpoint::log(next.ln),
            _ => next,
        };
        breakpoints.push(next);
    }
    Ok(EnvelopeSpec::from_breakpoints(m, breakpoints))
}

impl EnvelopeSpec {
    /// Envelope with `a(n_k) = M/2^k` through the given breakpoints.
    pub fn from_breakpoints(m: f64, breakpoints: Vec<Breakpoint>) -> Self {
        let values = (0..breakpoints.len()).map(|k| m / 2f64.powi(k as i32)).collect();
        Self::from_parts(m, breakpoints, values)
    }

    /// Arbitrary piecewise-linear data; slopes are derived.
    pub fn from_parts(m: f64, breakpoints: Vec<Breakpoint>, values: Vec<f64>) -> Self {
        assert_eq!(breakpoints.len(), values.len(), "one value per breakpoint");
        let slopes = (1..breakpoints.len())
            .map(|k| {
                let (b0, b1) = (breakpoints[k - 1], breakpoints[k]);
                let drop = values[k - 1] - values[k];
                let (value, ln_width) = match (b0.exact, b1.exact) {
                    (Some(p), Some(q)) => {
                        let w = q as f64 - p as f64;
                        (-drop / w, w.ln())
                    }
                    _ => {
                        let lw = ln_diff(b1.ln, b0.ln);
                        (-drop * (-lw).exp(), lw)
                    }
                };
                let ln_neg = if drop > 0.0 { drop.ln() - ln_width } else { f64::NAN };
                Slope { value, ln_neg }
            })
            .collect();
        Self { m, lambda: LAMBDA, breakpoints, values, slopes }
    }

    /// Hand-built envelope from integer breakpoints and values.
    pub fn from_integer_parts(m: f64, breakpoints: &[u64], values: &[f64]) -> Self {
        Self::from_parts(m, breakpoints.iter().map(|&n| Breakpoint::exact(n)).collect(), values.to_vec())
    }

    pub fn k_max(&self) -> usize {
        self.breakpoints.len() - 1
    }

    /// Largest exactly known breakpoint index.
    pub fn last_exact(&self) -> usize {
        self.breakpoints.iter().rposition(|b| b.exact.is_some()).unwrap_or(0)
    }

    /// `a(n)` for `0 ≤ n ≤ n_K`, `None` beyond the built range.
    pub fn value_at(&self, n: u64) -> Option<f64> {
        let e = self.last_exact();
        let idx = self.breakpoints[..=e].partition_point(|b| b.exact.unwrap() <= n);
        if idx == 0 {
            return None;
        }
        let k = idx - 1;
        let start = self.breakpoints[k].exact.unwrap();
        if n == start {
            return Some(self.values[k]);
        }
        if k >= self.k_max() {
            return None;
        }
        Some(self.values[k] + self.slopes[k].value * (n - start) as f64)
    }

    /// `a_k` for `1 ≤ k ≤ n_K`, zero elsewhere.
    pub fn one_sided_sequence(&self) -> ModulatingSequence {
        let env = self.clone();
        ModulatingSequence::from_fn(
            "envelope",
            Bound::Finite(self.m),
            Flags { symmetric: false, one_sided: true, real_valued: true },
            move |k| if k <= 0 { Complex64::new(0.0, 0.0) } else { Complex64::new(env.value_at(k as u64).unwrap_or(0.0), 0.0) },
        )
    }

    /// `Δ²a_{n_k − 1} = s_{k+1} − s_k`, for `k = 1..K−1`.
    pub fn second_differences(&self) -> Vec<f64> {
        self.slopes.windows(2).map(|w| w[1].value - w[0].value).collect()
    }

    /// `n_k |s_k − s_{k+1}|` for `k = 1..K−1`, computed in log domain.
    pub fn star1_terms(&self) -> Vec<f64> {
        (1..self.k_max())
            .map(|k| {
                let (sk, sk1) = (self.slopes[k - 1], self.slopes[k]);
                let n = self.breakpoints[k];
                let big = (n.ln + sk.ln_neg).exp();
                let ratio = (sk1.ln_neg - sk.ln_neg).exp();
                big * (1.0 - ratio).abs()
            })
            .collect()
    }

    pub fn write_json<W: Write>(&self, out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(out, self).map_err(std::io::Error::other)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionResult {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeReport {
    pub conditions: Vec<ConditionResult>,
    /// `P_k = Σ_{j≤k} n_j |s_j − s_{j+1}|`, `k = 1..K−1`.
    pub star1_partial_sums: Vec<f64>,
    /// `6M/2^k`, a certified bound on `Σ_{j≥k}` of the same terms.
    pub star1_tail_bounds: Vec<f64>,
    pub star1_max_ratio: f64,
}

impl EnvelopeReport {
    pub fn all_pass(&self) -> bool {
        self.conditions.iter().all(|c| c.pass)
    }

    pub fn condition(&self, name: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

fn cond(name: &'static str, failure: Option<String>) -> ConditionResult {
    match failure {
        None => ConditionResult { name, pass: true, detail: "ok".into() },
        Some(d) => ConditionResult { name, pass: false, detail: d },
    }
}

pub fn verify_envelope_conditions(env: &EnvelopeSpec, hm: &MajorantH) -> EnvelopeReport {
    let kk = env.k_max();
    let bp = &env.breakpoints;

    // (i): exhaustive on a prefix, then segment-wise via the monotone majorant
    let mut fail_i = None;
    let top = match bp[kk].exact {
        Some(n) => n.min(EXHAUSTIVE_LIMIT),
        None => EXHAUSTIVE_LIMIT,
    };
    for n in 1..=top {
        match env.value_at(n) {
            Some(a) if a > hm.h(n) => {}
            Some(a) => {
                fail_i = Some(format!("a({n}) = {a} ≤ h({n}) = {}", hm.h(n)));
                break;
            }
            None => break,
        }
    }
    if fail_i.is_none() {
        // on (n_{k−1}, n_k] the envelope is ≥ a(n_k) with equality only at n_k
        let at_most = |b: &Breakpoint, t: f64, strict: bool| match b.exact {
            Some(n) if strict => hm.hhat(n) < t,
            Some(n) => hm.hhat(n) <= t,
            None => hm.inverse_ln.as_ref().is_some_and(|inv| b.ln >= inv(if strict { t / 2.0 } else { t })),
        };
        for k in 1..=kk {
            let floor = env.values[k];
            let start_ok = k == 1 || at_most(&bp[k - 1], floor, false);
            if !(start_ok && at_most(&bp[k], floor, true)) {
                fail_i = Some(format!("segment {k}: majorant not below a(n_{k}) = {floor}"));
                break;
            }
        }
    }

    let fail_ii = env
        .slopes
        .iter()
        .enumerate()
        .find(|(_, s)| !(s.ln_neg.is_finite() && s.value <= 0.0))
        .map(|(k, s)| format!("s_{} = {} (ln(−s) = {})", k + 1, s.value, s.ln_neg));

    let fail_iii = if env.values[0] != env.m {
        Some(format!("a(0) = {} ≠ M = {}", env.values[0], env.m))
    } else {
        env.values
            .windows(2)
            .position(|w| !(w[1] <= w[0] / 2.0 + f64::EPSILON * w[0]))
            .map(|k| format!("a(n_{}) does not halve", k + 1))
    };

    let fail_iv = (1..=kk).find_map(|k| {
        let ok = match (bp[k - 1].exact, bp[k].exact) {
            (Some(p), Some(q)) => q >= p + 3,
            // n_{k−1} ≥ 3 and n_k ≥ 2 n_{k−1}
            _ => bp[k].ln - bp[k - 1].ln >= LN_2 && bp[k - 1].ln >= 3f64.ln(),
        };
        (!ok).then(|| format!("n_{k} − n_{} < 3", k - 1))
    });

    let fail_v = (0..kk).find_map(|k| {
        let ok = match (bp[k].exact, bp[k + 1].exact) {
            (Some(p), Some(q)) => q as f64 <= LAMBDA * (q as f64 - p as f64),
            _ => bp[k + 1].ln - bp[k].ln >= (LAMBDA / (LAMBDA - 1.0)).ln(),
        };
        (!ok).then(|| format!("n_{} > λ(n_{} − n_{k})", k + 1, k + 1))
    });

    // s_k < s_{k+1} − s_k < −s_k  ⇔  0 < s_{k+1}/s_k < 2
    let fail_vi = env.slopes.windows(2).enumerate().find_map(|(i, w)| {
        let (s0, s1) = (w[0], w[1]);
        let ok = if s0.value.is_normal() && s1.value.is_normal() {
            let ratio = s1.value / s0.value;
            ratio > 0.0 && ratio < 2.0
        } else {
            s0.ln_neg.is_finite() && s1.ln_neg.is_finite() && s1.ln_neg - s0.ln_neg < LN_2
        };
        (!ok).then(|| format!("k = {}: s_k = {}, s_(k+1) = {}", i + 1, s0.value, s1.value))
    });

    let terms = env.star1_terms();
    let mut acc = NeumaierSum::new();
    let star1_partial_sums: Vec<f64> = terms
        .iter()
        .map(|t| {
            acc += *t;
            acc.sum()
        })
        .collect();
    let star1_tail_bounds = (1..kk).map(|k| 6.0 * env.m / 2f64.powi(k as i32)).collect();
    let star1_max_ratio = terms
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max);

    EnvelopeReport {
        conditions: vec![
            cond("i", fail_i),
            cond("ii", fail_ii),
            cond("iii", fail_iii),
            cond("iv", fail_iv),
            cond("v", fail_v),
            cond("vi", fail_vi),
        ],
        star1_partial_sums,
        star1_tail_bounds,
        star1_max_ratio,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Dirichlet,
    Fejer,
}

fn guard(x: f64) -> Result<()> {
    if !(SINGULAR_GUARD..=TAU - SINGULAR_GUARD).contains(&x) {
        return Err(Error::Domain(format!("x = {x} is within {SINGULAR_GUARD:e} of a kernel singularity")));
    }
    Ok(())
}

/// `D_n(x) = sin((n+½)x) / (2 sin(x/2))`, `F_n(x) = (1/(2(n+1))) (sin((n+1)x/2) / sin(x/2))²`.
pub fn kernel_eval(kind: KernelKind, n: u64, x: f64) -> Result<f64> {
    guard(x)?;
    Ok(kernel_unchecked(kind, n as f64, x))
}

fn kernel_unchecked(kind: KernelKind, n: f64, x: f64) -> f64 {
    let half = (0.5 * x).sin();
    match kind {
        KernelKind::Dirichlet => ((n + 0.5) * x).sin() / (2.0 * half),
        KernelKind::Fejer => {
            let r = (0.5 * (n + 1.0) * x).sin() / half;
            r * r / (2.0 * (n + 1.0))
        }
    }
}

/// `(2/(n+1)) (sin(½(n+½)x) / (2 sin(x/2)))²`, the alternative closed form kept for comparison.
pub fn shifted_fejer(n: u64, x: f64) -> Result<f64> {
    guard(x)?;
    let n = n as f64;
    let r = (0.5 * (n + 0.5) * x).sin() / (2.0 * (0.5 * x).sin());
    Ok(2.0 / (n + 1.0) * r * r)
}

/// `∫_0^{2π} K_n` by the midpoint rule on `points` nodes (exact for `points > n`).
pub fn kernel_integral(kind: KernelKind, n: u64, points: usize) -> f64 {
    let h = TAU / points as f64;
    let acc: NeumaierSum = (0..points).map(|i| kernel_unchecked(kind, n as f64, (i as f64 + 0.5) * h)).collect();
    acc.sum() * h
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GEvaluation {
    pub x: f64,
    pub g: f64,
    pub tail_bound: f64,
    /// Breakpoint terms evaluated through the kernel.
    pub terms: usize,
    /// Index `n` of the direct route.
    pub direct_n: u64,
    /// `s_n(x) = ½a_0 + Σ_{k≤n} a_k cos kx`.
    pub s_n_direct: f64,
    /// `s_n(x) − n F_{n−1}(x) Δa_{n−1} − a_n D_n(x)`.
    pub direct_estimate: f64,
    /// Certified bound on `|g − direct_estimate|` beyond the rounding of the cosine sum.
    pub direct_gap_bound: f64,
}

/// `g(x) = Σ_k n_k (s_{k+1} − s_k) F_{n_k − 1}(x)` with a certified tail bound.
pub fn evaluate_g(env: &EnvelopeSpec, x: f64, tol: f64) -> Result<GEvaluation> {
    guard(x)?;
    let kk = env.k_max();
    if kk < 2 {
        return Err(Error::invalid("g needs at least two breakpoints"));
    }
    let inv = 1.0 / (2.0 * (0.5 * x).sin().powi(2));
    let abs_slope = |k: usize| env.slopes[k - 1].ln_neg.exp();
    let mut g = NeumaierSum::new();
    let mut tail = 0.0;
    let mut terms = 0;
    // per-term bounds, to size the direct route
    let mut bounds = vec![0.0; kk + 1];
    for (k, slot) in bounds.iter_mut().enumerate().take(kk).skip(1) {
        let bound = (abs_slope(k) - abs_slope(k + 1)).abs() * inv;
        *slot = bound;
        match env.breakpoints[k].exact {
            Some(n) if n <= KERNEL_EVAL_LIMIT => {
                let d2 = env.slopes[k].value - env.slopes[k - 1].value;
                g += n as f64 * d2 * kernel_unchecked(KernelKind::Fejer, (n - 1) as f64, x);
                terms += 1;
            }
            _ => tail += bound,
        }
    }
    // terms k ≥ K: |s_K| plus Σ_{j>K} |s_j| with |s_j| ≤ M 2^{−j} / (n_K + 3)
    let n_k = env.breakpoints[kk];
    let beyond = (env.m.ln() - kk as f64 * LN_2 - n_k.ln.max(3f64.ln())).exp();
    tail += (abs_slope(kk) + 2.0 * beyond) * inv;
    bounds[kk] = (abs_slope(kk) + 2.0 * beyond) * inv;
    if tail > tol {
        return Err(Error::BudgetExceeded(format!("tail bound {tail:e} above tol {tol:e} after {kk} breakpoints")));
    }
    let g_value = g.sum();

    // direct route: stop past the first breakpoint whose remaining bounds are below tol/10
    let mut remaining: f64 = bounds.iter().sum();
    let mut direct_n = None;
    for (k, bound) in bounds.iter().enumerate().take(kk).skip(1) {
        remaining -= bound;
        if let Some(n) = env.breakpoints[k].exact {
            if remaining < tol / 10.0 && n < DIRECT_SUM_BUDGET {
                direct_n = Some(n + 1);
                break;
            }
        }
    }
    let direct_n = direct_n.ok_or_else(|| Error::BudgetExceeded("direct partial sum exceeds its budget".into()))?;
    let s_n = cosine_partial_sum(|k| env.value_at(k).unwrap_or(0.0), direct_n, x);
    let a = |k: u64| env.value_at(k).unwrap_or(0.0);
    let n = direct_n;
    let correction = n as f64 * kernel_unchecked(KernelKind::Fejer, (n - 1) as f64, x) * (a(n - 1) - a(n))
        + a(n) * kernel_unchecked(KernelKind::Dirichlet, n as f64, x);
    Ok(GEvaluation {
        x,
        g: g_value,
        tail_bound: tail,
        terms,
        direct_n,
        s_n_direct: s_n,
        direct_estimate: s_n - correction,
        direct_gap_bound: remaining,
    })
}

/// `½a_0 + Σ_{k=1}^{n} a_k cos kx`, summed term by term.
pub fn cosine_partial_sum<A: Fn(u64) -> f64>(a: A, n: u64, x: f64) -> f64 {
    let mut acc = NeumaierSum::new();
    acc += 0.5 * a(0);
    for k in 1..=n {
        acc += a(k) * (k as f64 * x).cos();
    }
    acc.sum()
}

/// `Σ_{k=0}^{n−1} Δa_k D_k(x) + a_n D_n(x)` for finitely many coefficients.
pub fn abel_form_partial_sum(a: &[f64], n: usize, x: f64) -> f64 {
    let at = |k: usize| a.get(k).copied().unwrap_or(0.0);
    let mut acc = NeumaierSum::new();
    for k in 0..n {
        acc += (at(k) - at(k + 1)) * kernel_unchecked(KernelKind::Dirichlet, k as f64, x);
    }
    acc += at(n) * kernel_unchecked(KernelKind::Dirichlet, n as f64, x);
    acc.sum()
}

/// Kernel series `Σ (k+1) Δ²a_k F_k(x)` for coefficients that vanish beyond `a.len()`.
pub fn evaluate_g_finite(a: &[f64], x: f64) -> Result<f64> {
    guard(x)?;
    let at = |k: usize| a.get(k).copied().unwrap_or(0.0);
    let mut acc = NeumaierSum::new();
    for k in 0..a.len() {
        let d2 = at(k) - 2.0 * at(k + 1) + at(k + 2);
        acc += (k + 1) as f64 * d2 * kernel_unchecked(KernelKind::Fejer, k as f64, x);
    }
    Ok(acc.sum())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct L1Evidence {
    pub epsilon: f64,
    pub grid_points: usize,
    /// Breakpoint index `J`; `g_J` keeps the kernel terms `k ≤ J`.
    pub breakpoint_index: Vec<usize>,
    pub integral_abs: Vec<f64>,
    pub bound: f64,
}

/// Midpoint quadrature of `|g_J|` on `(ε, 2π − ε)` for `J = j_lo..K−1`.
pub fn l1_evidence(env: &EnvelopeSpec, j_lo: usize, epsilon: f64, grid_points: usize) -> Result<L1Evidence> {
    if !(epsilon > 0.0 && epsilon < PI) || grid_points == 0 {
        return Err(Error::invalid("need 0 < ε < π and a nonempty grid"));
    }
    let kk = env.k_max();
    let width = TAU - 2.0 * epsilon;
    let h = width / grid_points as f64;
    let js: Vec<usize> = (j_lo.max(1)..kk).collect();
    // per grid point, running partial sums of kernel terms
    let rows: Vec<Vec<f64>> = (0..grid_points)
        .into_par_iter()
        .map(|i| {
            let x = epsilon + (i as f64 + 0.5) * h;
            let mut acc = NeumaierSum::new();
            let mut out = Vec::with_capacity(js.len());
            for k in 1..kk {
                if let Some(n) = env.breakpoints[k].exact {
                    let d2 = env.slopes[k].value - env.slopes[k - 1].value;
                    acc += n as f64 * d2 * kernel_unchecked(KernelKind::Fejer, (n - 1) as f64, x);
                }
                if k >= j_lo.max(1) {
                    out.push(acc.sum().abs());
                }
            }
            out
        })
        .collect();
    let integral_abs: Vec<f64> = (0..js.len())
        .map(|j| rows.iter().map(|r| r[j]).collect::<NeumaierSum>().sum() * h)
        .collect();
    let bound = integral_abs.iter().copied().fold(0.0, f64::max);
    Ok(L1Evidence { epsilon, grid_points, breakpoint_index: js, integral_abs, bound })
}

pub fn write_g_csv<W: Write>(mut out: W, rows: &[GEvaluation]) -> std::io::Result<()> {
    writeln!(out, "x,g,tail_bound,s_n_direct")?;
    for r in rows {
        writeln!(out, "{:e},{:e},{:e},{:e}", r.x, r.g, r.tail_bound, r.s_n_direct)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergentDemo {
    pub horizon: u64,
    pub checkpoints: Vec<u64>,
    /// `Σ_{n=2}^{N} 1/(n ln n)`
    pub oracle_partial_sums: Vec<f64>,
    /// `Σ_{n=1}^{N} a_n/n` for the envelope of `1/ln(n+2)`
    pub envelope_partial_sums: Vec<f64>,
    /// `c` and the max residual of `oracle ≈ ln ln N + c`
    pub fit_constant: f64,
    pub fit_residual: f64,
    /// `a_n ≥ 1/ln(n+2)` for every `1 ≤ n ≤ N`
    pub termwise_domination: bool,
    /// envelope sum to `N` is at least the oracle sum over `3 ≤ n ≤ N+2`
    pub shifted_domination: bool,
    pub envelope: EnvelopeSpec,
}

/// Decade checkpoints `10, 100, …` up to `N`, plus `N`.
pub fn decade_checkpoints(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = std::iter::successors(Some(10u64), |c| c.checked_mul(10)).take_while(|c| *c <= n).collect();
    if out.last() != Some(&n) {
        out.push(n);
    }
    out
}

pub fn divergent_modulator_demo(n: u64) -> Result<DivergentDemo> {
    if n < 10 {
        return Err(Error::invalid("divergent modulator demo needs N ≥ 10"));
    }
    let hm = MajorantH::inverse_log(2, EXHAUSTIVE_LIMIT)?;
    let mut k = 4;
    let env = loop {
        let env = build_envelope(&hm, k)?;
        if env.breakpoints[k].exact.is_none_or(|b| b >= n) {
            break env;
        }
        k += 1;
    };
    let checkpoints = decade_checkpoints(n);
    let mut oracle = NeumaierSum::new();
    let mut envelope = NeumaierSum::new();
    let mut shifted = NeumaierSum::new();
    let mut oracle_partial_sums = Vec::new();
    let mut envelope_partial_sums = Vec::new();
    let mut termwise = true;
    let mut shifted_ok = true;
    let mut next = 0;
    for m in 1..=n {
        let mf = m as f64;
        if m >= 2 {
            oracle += 1.0 / (mf * mf.ln());
        }
        let a = env.value_at(m).expect("envelope covers the horizon");
        let floor = 1.0 / (mf + 2.0).ln();
        termwise &= a >= floor;
        envelope += a / mf;
        shifted += 1.0 / ((mf + 2.0) * (mf + 2.0).ln());
        if checkpoints[next] == m {
            oracle_partial_sums.push(oracle.sum());
            envelope_partial_sums.push(envelope.sum());
            shifted_ok &= envelope.sum() >= shifted.sum();
            next += 1;
        }
    }
    let lnln: Vec<f64> = checkpoints.iter().map(|c| (*c as f64).ln().ln()).collect();
    let fit_constant = oracle_partial_sums.iter().zip(&lnln).map(|(s, l)| s - l).sum::<f64>() / lnln.len() as f64;
    let fit_residual =
        oracle_partial_sums.iter().zip(&lnln).map(|(s, l)| (s - l - fit_constant).abs()).fold(0.0, f64::max);
    Ok(DivergentDemo {
        horizon: n,
        checkpoints,
        oracle_partial_sums,
        envelope_partial_sums,
        fit_constant,
        fit_residual,
        termwise_domination: termwise,
        shifted_domination: shifted_ok,
        envelope: env,
    })
}
