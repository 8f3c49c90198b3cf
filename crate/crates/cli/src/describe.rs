//! Human-readable description of each experiment kind.

use crate::config::ExperimentKind;

pub fn describe(kind: ExperimentKind) -> &'static str {
    match kind {
        ExperimentKind::Rates => RATES,
        ExperimentKind::Transform => TRANSFORM,
        ExperimentKind::Counterexample => COUNTEREXAMPLE,
        ExperimentKind::Prop27 => PROP27,
        ExperimentKind::Spectral => SPECTRAL,
        ExperimentKind::Process => PROCESS,
        ExperimentKind::Sweep => SWEEP,
    }
}

const RATES: &str = "\
rates: finite-schedule rate conditions for a modulating sequence.

Classes (config field `class`, flag --class):
  star       (∗)   Σ_{|k|≤n} |a_k| / n^β
  star_star  (∗∗)  max_{|z|=1} |Σ_{k=1}^{n} a_k z^k| / n^{1−β}   (one-sided)
  m_alpha    M_α   Σ_{|k|≤n} |a_k| · log^α n / n^{α−1}
  a_alpha    A_α   max_{|z|=1} |Σ_{k=−n}^{n} a_k z^k| · log^α n / n^{α−1}
  raw              Σ_{|k|≤n} |a_k|
Suprema over |z| = 1 are taken on a grid of grid_factor·n roots of unity.

Parameters: sequence, class, alpha ∈ (1, 2], beta ∈ (0, 1), schedule, grid_factor, growth_factor.
Output: rates_report.json (ratios, sup_estimate, fitted_exponent, verdict bounded_on_schedule | growing),
        rates.csv with columns n,raw,ratio.
";

const TRANSFORM: &str = "\
transform: partial sums H_n(x0) = Σ'_{|k|≤n} a_k f(T^k x0) / k along one orbit.

Reports the Abel decomposition H_n = Σ_{k<n} (S_k − S_{−k})/(k(k+1)) + (S_n − S_{−n})/n, the
dyadic-window verdict (cauchy_trend | diverging | inconclusive) and a growth fit against ln n and ln ln n.
Optional: weak (1,1) tails of the maximal function (`weak11`, Monte-Carlo, needs a seed) and the
L² identity for ‖S_j − S_{−j}‖₂ (`spectral_check`).

Parameters: sequence, system, observable, x0, checkpoints, with_abel, seed, weak11, spectral_check.
Output: transform_report.json, transform_trace.csv with columns n,re,im,abel_main,abel_tail.
";

const COUNTEREXAMPLE: &str = "\
counterexample: divergence of the modulated transform on the three-cycle.

The modulating sequence is the indicator of the visits n ≡ 1 (mod 3), n ≥ 0. Two index conventions:
  symmetric       a_{−n} = a_n, which makes H_{3n+1}(x) = 2 Σ_{m≤n} 1/(3m+1) for x ∈ A
  odd_extension   a_{−n} = −a_n
The report gives the band of H_{3n+1} − (2/3) ln(3n+1) about one fitted constant for 10 ≤ n ≤ N,
monotonicity along n and the convergence verdict.

Parameters: n (N), convention.
Output: counterexample_report.json, counterexample_trace.csv with columns m,n,h.
";

const PROP27: &str = "\
prop27: slowly decaying cosine coefficients dominating a null sequence h.

Builds the piecewise-linear envelope a_n ≥ h(n) with breakpoints n_k and checks:
  (i)   a(n) > h(n) for every n
  (ii)  a is strictly decreasing
  (iii) a(0) = M and a(x) → 0
  (iv)  breakpoints n_k are integers with n_k ≥ n_{k−1} + 3
  (v)   n_{k+1} ≤ λ (n_{k+1} − n_k) with λ = 2
  (vi)  slopes satisfy s_k < s_{k+1} − s_k < −s_k
and the series (★₁) Σ n_k |s_k − s_{k+1}| through closed-form partial sums with a geometric tail.
Evaluates g(x) = Σ_k n_k (s_{k+1} − s_k) F_{n_k−1}(x) with a certified tail bound and compares it with a
direct cosine partial sum; reports ∫F_k = π for k ≤ 100 and the deviation of the shifted-argument closed form.

Parameters: h (inverse_log with shift), k (K), horizon, g_points, g_tol, l1, divergent_n.
Output: prop27_report.json, envelope.json, g.csv with columns x,g,tail_bound,s_n_direct.
";

const SPECTRAL: &str = "\
spectral: correlations and spectral atoms of a sequence.

γ̂(k) = (1/n) Σ_{j=1}^{n} a_{j+k} conj(a_j), Γ̂(z) = (1/n) Σ_{j=0}^{n} a_j conj(z)^j on a root-of-unity grid,
atoms at grid local maxima with |Γ̂| ≥ threshold (refined, sidelobes pruned), Fejér-weighted masses,
the Toeplitz positivity proxy and, optionally, resonances of atoms with eigenvalues of a system.

Parameters: sequence, n, threshold, max_lag, grid_order, positivity, resonance.
Output: spectral_report.json, spectrum.csv with columns theta,abs_gamma.
";

const PROCESS: &str = "\
process: symmetric admissible processes f_i = T^i v_{|i|} with v_r ↑ δ.

Checks the structural identities exactly (f_i = T^i v_{|i|}, T^{2i} f_{−i} = f_i, T^{±1} f_{±i} ≤ f_{±(i+1)}),
the sandwich 0 ≤ f_i − g_i^r ≤ (δ − v_r)(T^i x) for the truncated additive approximants g^r, and the
deviation of Σ' a_i g_i^r(x0)/i from Σ' a_i f_i(x0)/i against C_a ‖δ − v_r‖₂ bounds. Also reports the
seminorm proxy (log^α n / n^{α−1}) Σ_{|k|≤n} |a_k| and, optionally, the truncation experiment with
a^r = truncate(a, r). Monte-Carlo: needs a seed.

Parameters: sequence, system, delta, v_schedule (factory | additive | scaled), x0, checkpoints,
            r_schedule, alpha, samples, structure_samples, seed, truncation.
Output: process_report.json (r_schedule, deviations[], seminorm{alpha, values[]}, verdict),
        process_trace.csv with columns n,re,im and one re/im pair per r.
";

const SWEEP: &str = "\
sweep: Wiener–Wintner sweep over modulations λ^k (or λ^{|k|} when symmetric).

For each λ on the grid, and the resonant λ = conj(φ)^m of a rotation character when requested,
records the trace of H_n(x0), the verdict and the growth fit.

Parameters: system, observable, x0, lambdas (list of turns or {count, offset}), include_resonance,
            checkpoints, symmetric.
Output: sweep_report.json, sweep.csv with columns turns,n,re,im.
";
