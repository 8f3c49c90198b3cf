//! Correlations `γ̂(k)`, the transform `Γ̂(z)` on root-of-unity grids, atom
//! detection and resonance with the eigenvalues of a system.
//!
//! All quantities are "at truncation `n`": the limits defining `γ`, `Γ` and
//! the spectral measure are replaced by their `n`-term averages.

use std::f64::consts::TAU;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{DynamicalSystem, SystemKind};
use crate::grid::{eval_on_grid, Orientation};
use crate::sequences::{Frequency, ModulatingSequence};
use crate::sum::{cis_turns, ComplexSum};
use crate::{Error, Result};

pub const DEFAULT_MAX_LAG: usize = 256;
const GOLDEN_ITERS: usize = 60;
const SIDELOBE_SLACK: f64 = 1.05;

/// `(1/n) Σ_{j=1}^{n} a_{j+k} conj(a_j)`.
pub fn correlation_estimate(a: &ModulatingSequence, k: i64, n: u64) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::invalid("correlation needs n ≥ 1"));
    }
    let acc: ComplexSum = (1..=n as i64).map(|j| a.eval(j + k) * a.eval(j).conj()).collect();
    Ok(acc.sum() / n as f64)
}

/// `γ̂(0), …, γ̂(K)` from one window of values; negative lags follow by conjugation.
pub fn correlations(a: &ModulatingSequence, max_lag: usize, n: u64) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(Error::invalid("correlation needs n ≥ 1"));
    }
    let vals: Vec<Complex64> = (0..=(n as i64 + max_lag as i64)).map(|j| a.eval(j)).collect();
    Ok((0..=max_lag)
        .into_par_iter()
        .map(|k| {
            let acc: ComplexSum = (1..=n as usize).map(|j| vals[j + k] * vals[j].conj()).collect();
            acc.sum() / n as f64
        })
        .collect())
}

/// `γ̂(k)` for any `k` from the nonnegative lags.
pub fn gamma_at(gamma: &[Complex64], k: i64) -> Complex64 {
    let g = gamma[k.unsigned_abs() as usize];
    if k < 0 { g.conj() } else { g }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralParams {
    pub n: u64,
    pub grid_order: usize,
    /// Atoms are grid local maxima with `|Γ̂| ≥ threshold`.
    pub threshold: f64,
    /// Lags `|k| ≤ K` used for `γ̂` and the masses.
    pub max_lag: usize,
}

impl SpectralParams {
    pub fn new(n: u64, threshold: f64) -> Self {
        Self { n, grid_order: 4 * n as usize + 1, threshold, max_lag: DEFAULT_MAX_LAG.min(n as usize) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("truncation n must be positive"));
        }
        if (self.grid_order as u64) < 2 * self.n + 1 {
            return Err(Error::invalid(format!("grid order {} < 2n+1 = {}", self.grid_order, 2 * self.n + 1)));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::invalid("atom threshold must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Atom {
    /// Angle of `z` in radians, `[0, 2π)`.
    pub theta: f64,
    pub z: Complex64,
    pub gamma: Complex64,
    /// Fejér-weighted Cesàro mean of `γ̂(k) z̄^k`, floored at 0.
    pub mass: f64,
    /// `n |Γ̂(z)|²`
    pub periodogram: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralEstimate {
    pub params: SpectralParams,
    /// `γ̂(k)` for `0 ≤ k ≤ K`.
    pub gamma_hat: Vec<Complex64>,
    pub gamma_grid: Vec<Complex64>,
    pub atoms: Vec<Atom>,
}

/// `Γ̂(z) = (1/n) Σ_{j=0}^{n} a_j conj(z)^j` at one point.
pub fn gamma_transform_at(a: &ModulatingSequence, n: u64, turns: f64) -> Complex64 {
    let fr = Frequency::from_turns(turns);
    let acc: ComplexSum = (0..=n as i64).map(|j| a.eval(j) * fr.pow(-j)).collect();
    acc.sum() / n as f64
}

/// `Re[(1/(K+1)) Σ_{|k|≤K} (1 − |k|/(K+1)) γ̂(k) z̄^k]`, floored at 0.
pub fn fejer_mass(gamma: &[Complex64], turns: f64) -> f64 {
    let kk = gamma.len() - 1;
    let w = (kk + 1) as f64;
    let fr = Frequency::from_turns(turns);
    let mut acc = ComplexSum::new();
    for k in -(kk as i64)..=kk as i64 {
        acc += gamma_at(gamma, k) * fr.pow(-k) * (1.0 - k.unsigned_abs() as f64 / w);
    }
    (acc.sum().re / w).max(0.0)
}

pub fn gamma_and_spectrum(a: &ModulatingSequence, params: &SpectralParams) -> Result<SpectralEstimate> {
    params.validate()?;
    let n = params.n;
    let g = params.grid_order;
    let scale = 1.0 / n as f64;
    let gamma_grid: Vec<Complex64> =
        eval_on_grid((0..=n as i64).map(|j| (j, a.eval(j) * scale)), g, Orientation::Conjugate);
    let gamma_hat = correlations(a, params.max_lag, n)?;

    let abs: Vec<f64> = gamma_grid.iter().map(|z| z.norm()).collect();
    let peaks: Vec<usize> = (0..g)
        .filter(|&m| {
            let (l, r) = (abs[(m + g - 1) % g], abs[(m + 1) % g]);
            abs[m] >= params.threshold && abs[m] >= l && abs[m] > r
        })
        .collect();
    let mut atoms: Vec<Atom> = peaks
        .par_iter()
        .map(|&m| {
            let t = refine_peak(a, n, m as f64 / g as f64, 1.0 / g as f64);
            let gamma = gamma_transform_at(a, n, t);
            Atom {
                theta: t * TAU,
                z: cis_turns(t),
                gamma,
                mass: fejer_mass(&gamma_hat, t),
                periodogram: n as f64 * gamma.norm_sqr(),
            }
        })
        .collect();
    // strongest first; drop peaks inside the sidelobe envelope of accepted atoms
    atoms.sort_by(|x, y| y.gamma.norm().total_cmp(&x.gamma.norm()).then(x.theta.total_cmp(&y.theta)));
    let mut accepted: Vec<Atom> = Vec::new();
    for cand in atoms {
        let envelope: f64 = accepted
            .iter()
            .map(|acc| {
                let gap = (1.0 - acc.z.conj() * cand.z).norm();
                if gap == 0.0 { f64::INFINITY } else { acc.gamma.norm() * 2.0 / (n as f64 * gap) }
            })
            .sum();
        if cand.gamma.norm() > SIDELOBE_SLACK * envelope {
            accepted.push(cand);
        }
    }
    accepted.sort_by(|x, y| x.theta.total_cmp(&y.theta));
    let atoms = accepted;
    Ok(SpectralEstimate { params: *params, gamma_hat, gamma_grid, atoms })
}

/// Golden-section maximization of `|Γ̂|` on `[t − h, t + h]` (turns).
fn refine_peak(a: &ModulatingSequence, n: u64, t: f64, h: f64) -> f64 {
    let f = |x: f64| gamma_transform_at(a, n, x).norm();
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (t - h, t + h);
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..GOLDEN_ITERS {
        if fc >= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    let best = if f(t) >= f(0.5 * (lo + hi)) { t } else { 0.5 * (lo + hi) };
    best.rem_euclid(1.0)
}

impl SpectralEstimate {
    /// JSON with fields `n, gamma[{k,re,im}], atoms[{theta, gamma_re, gamma_im, mass}]`.
    pub fn to_json(&self) -> serde_json::Value {
        let kk = self.gamma_hat.len() as i64 - 1;
        let gamma: Vec<serde_json::Value> = (-kk..=kk)
            .map(|k| {
                let g = gamma_at(&self.gamma_hat, k);
                serde_json::json!({ "k": k, "re": g.re, "im": g.im })
            })
            .collect();
        let atoms: Vec<serde_json::Value> = self
            .atoms
            .iter()
            .map(|at| {
                serde_json::json!({
                    "theta": at.theta,
                    "gamma_re": at.gamma.re,
                    "gamma_im": at.gamma.im,
                    "mass": at.mass,
                    "periodogram": at.periodogram,
                })
            })
            .collect();
        serde_json::json!({
            "n": self.params.n,
            "grid_order": self.params.grid_order,
            "threshold": self.params.threshold,
            "gamma": gamma,
            "atoms": atoms,
        })
    }

    pub fn toeplitz_min_eigenvalue(&self) -> f64 {
        toeplitz_min_eigenvalue(&self.gamma_hat)
    }
}

/// Smallest eigenvalue of the Hermitian Toeplitz matrix `[γ̂(i − j)]_{0≤i,j≤K}`.
pub fn toeplitz_min_eigenvalue(gamma: &[Complex64]) -> f64 {
    let size = gamma.len();
    let m = DMatrix::from_fn(size, size, |i, j| gamma_at(gamma, i as i64 - j as i64));
    m.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

/// `(1/n) Σ_{j=1}^{n−k} a_{j+k} conj(a_j)`: the finite-window correlation, whose Toeplitz matrix is a Gram matrix.
pub fn windowed_correlations(a: &ModulatingSequence, max_lag: usize, n: u64) -> Result<Vec<Complex64>> {
    if n == 0 || max_lag as u64 >= n {
        return Err(Error::invalid("windowed correlation needs 0 ≤ K < n"));
    }
    let vals: Vec<Complex64> = (0..=n as i64).map(|j| a.eval(j)).collect();
    Ok((0..=max_lag)
        .into_par_iter()
        .map(|k| {
            let acc: ComplexSum = (1..=n as usize - k).map(|j| vals[j + k] * vals[j].conj()).collect();
            acc.sum() / n as f64
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivityProxy {
    pub n: u64,
    pub max_lag: usize,
    /// Minimum eigenvalue for the finite-window correlations.
    pub min_eig_windowed: f64,
    /// Minimum eigenvalue for `γ̂` itself (not positive semidefinite at finite `n`).
    pub min_eig_raw: f64,
}

pub fn positivity_proxy(a: &ModulatingSequence, max_lag: usize, n: u64) -> Result<PositivityProxy> {
    let raw = correlations(a, max_lag, n)?;
    let win = windowed_correlations(a, max_lag, n)?;
    Ok(PositivityProxy {
        n,
        max_lag,
        min_eig_windowed: toeplitz_min_eigenvalue(&win),
        min_eig_raw: toeplitz_min_eigenvalue(&raw),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Collision {
    pub theta: f64,
    /// `λ = φ^power` (or `λ̄ = φ^power` when `conjugate`).
    pub power: i64,
    pub conjugate: bool,
    pub distance_turns: f64,
    pub predicts_symmetric_divergence: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonanceReport {
    pub system: String,
    pub atoms_checked: usize,
    pub collisions: Vec<Collision>,
}

/// Atoms `λ` of `a` with `λ` or `λ̄` within `tol_turns` of a nonconstant eigenvalue `φ^m`, `1 ≤ |m| ≤ max_power`.
pub fn resonance_report(
    a: &ModulatingSequence,
    sys: &DynamicalSystem,
    params: &SpectralParams,
    max_power: i64,
    tol_turns: f64,
) -> Result<ResonanceReport> {
    match sys.kind() {
        SystemKind::ThreeCycle => Err(Error::invalid("resonance report supports rotations and torus automorphisms only")),
        SystemKind::TorusAutomorphism => {
            let est = gamma_and_spectrum(a, params)?;
            Ok(ResonanceReport { system: sys.name().into(), atoms_checked: est.atoms.len(), collisions: Vec::new() })
        }
        SystemKind::Rotation { turns } => {
            let est = gamma_and_spectrum(a, params)?;
            let dist = |x: f64, y: f64| {
                let d = (x - y).rem_euclid(1.0);
                d.min(1.0 - d)
            };
            let mut collisions = Vec::new();
            for atom in &est.atoms {
                let t = atom.theta / TAU;
                for m in (-max_power..=max_power).filter(|m| *m != 0) {
                    let e = crate::sum::frac_mul(m, turns);
                    for (conjugate, at) in [(false, t), (true, -t)] {
                        let d = dist(at, e);
                        if d <= tol_turns {
                            collisions.push(Collision {
                                theta: atom.theta,
                                power: m,
                                conjugate,
                                distance_turns: d,
                                predicts_symmetric_divergence: true,
                            });
                        }
                    }
                }
            }
            Ok(ResonanceReport { system: sys.name().into(), atoms_checked: est.atoms.len(), collisions })
        }
    }
}
