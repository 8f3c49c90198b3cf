//! Error-compensated accumulation (Kahan–Babuška/Neumaier).

use std::ops::AddAssign;

use num_complex::Complex64;

#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    s: f64,
    c: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sum(&self) -> f64 {
        self.s + self.c
    }
}

impl AddAssign<f64> for NeumaierSum {
    #[inline]
    fn add_assign(&mut self, rhs: f64) {
        let t = self.s + rhs;
        if self.s.abs() >= rhs.abs() {
            self.c += (self.s - t) + rhs;
        } else {
            self.c += (rhs - t) + self.s;
        }
        self.s = t;
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::new();
        for x in iter {
            acc += x;
        }
        acc
    }
}

/// Complex accumulator: independent compensated sums for the real and imaginary parts.
#[derive(Debug, Default, Clone, Copy)]
pub struct ComplexSum {
    re: NeumaierSum,
    im: NeumaierSum,
}

impl ComplexSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sum(&self) -> Complex64 {
        Complex64::new(self.re.sum(), self.im.sum())
    }
}

impl AddAssign<Complex64> for ComplexSum {
    #[inline]
    fn add_assign(&mut self, rhs: Complex64) {
        self.re += rhs.re;
        self.im += rhs.im;
    }
}

impl FromIterator<Complex64> for ComplexSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut acc = ComplexSum::new();
        for z in iter {
            acc += z;
        }
        acc
    }
}

/// Fractional part of `k * turns` in `[0, 1)`, with the rounding error of the
/// product recovered by an fma so that large `k` keeps full phase accuracy.
#[inline]
pub fn frac_mul(k: i64, turns: f64) -> f64 {
    let kf = k as f64;
    let p = kf * turns;
    let err = kf.mul_add(turns, -p);
    let f = (p - p.floor()) + err;
    f.rem_euclid(1.0)
}

/// `e^{2πi t}` for `t` in turns, exact at multiples of a quarter turn.
#[inline]
pub fn cis_turns(t: f64) -> Complex64 {
    let t = t.rem_euclid(1.0);
    // exact values on the axes keep root-of-unity identities bit-exact
    if t == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    if t == 0.25 {
        return Complex64::new(0.0, 1.0);
    }
    if t == 0.5 {
        return Complex64::new(-1.0, 0.0);
    }
    if t == 0.75 {
        return Complex64::new(0.0, -1.0);
    }
    let (s, c) = (std::f64::consts::TAU * t).sin_cos();
    Complex64::new(c, s)
}
