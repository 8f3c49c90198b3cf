//! Evaluation of Laurent polynomials on the grid of `G`-th roots of unity.
//!
//! Coefficients are folded modulo `G` and transformed with one FFT, so a
//! polynomial with `m` terms costs `O(m + G log G)` instead of `O(m G)`.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Which power of the grid point multiplies `c_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    /// `Σ c_k z_m^k`
    Direct,
    /// `Σ c_k conj(z_m)^k`
    Conjugate,
}

/// Grid point `z_m = e^{2πi m / G}`.
pub fn grid_point(m: usize, order: usize) -> Complex64 {
    crate::sum::cis_turns(m as f64 / order as f64)
}

/// Values of `Σ_k c_k z^k` (or `conj(z)^k`) at every `G`-th root of unity, in grid order.
///
/// Exact up to FFT rounding provided the span of exponents is smaller than `G`;
/// callers enforce that precondition.
pub fn eval_on_grid<I>(terms: I, order: usize, orientation: Orientation) -> Vec<Complex64>
where
    I: IntoIterator<Item = (i64, Complex64)>,
{
    assert!(order > 0, "grid order must be positive");
    let g = order as i64;
    let mut buf = vec![Complex64::new(0.0, 0.0); order];
    for (k, c) in terms {
        buf[k.rem_euclid(g) as usize] += c;
    }
    let mut planner = FftPlanner::new();
    let fft = match orientation {
        // rustfft's inverse transform uses e^{+2πi jm/G}
        Orientation::Direct => planner.plan_fft_inverse(order),
        Orientation::Conjugate => planner.plan_fft_forward(order),
    };
    fft.process(&mut buf);
    buf
}

/// `(argmax index, max modulus)` of a grid evaluation.
pub fn max_modulus(values: &[Complex64]) -> (usize, f64) {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| (i, v.norm()))
        .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc })
}
