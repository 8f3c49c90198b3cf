//! Two-sided complex sequences `{a_k}_{k ∈ ℤ}` used as modulating weights.
//!
//! A [`ModulatingSequence`] is an immutable, cheaply clonable evaluator plus
//! metadata (a bound on `|a_k|`, symmetry flags, a label). Sequences are built
//! from trigonometric polynomials, from the named families below, or by
//! combining existing sequences with [`transform_sequence`].

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::sum::{cis_turns, frac_mul};
use crate::{Error, Result};

const UNIT_TOL: f64 = 1e-12;

/// Upper bound on `|a_k|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Bound {
    Finite(f64),
    Unbounded,
}

impl Bound {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Bound::Finite(b) => Some(b),
            Bound::Unbounded => None,
        }
    }

    fn mul(self, other: Bound) -> Bound {
        match (self, other) {
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(a * b),
            _ => Bound::Unbounded,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Flags {
    /// `a_{-k} = a_k` for every `k`.
    pub symmetric: bool,
    /// `a_k = 0` for `k ≤ 0`.
    pub one_sided: bool,
    pub real_valued: bool,
}

type EvalFn = dyn Fn(i64) -> Complex64 + Send + Sync;

#[derive(Clone)]
pub struct ModulatingSequence {
    eval: Arc<EvalFn>,
    bound: Bound,
    flags: Flags,
    label: String,
}

impl fmt::Debug for ModulatingSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModulatingSequence")
            .field("label", &self.label)
            .field("bound", &self.bound)
            .field("flags", &self.flags)
            .finish()
    }
}

impl ModulatingSequence {
    pub fn from_fn<F>(label: impl Into<String>, bound: Bound, flags: Flags, f: F) -> Self
    where
        F: Fn(i64) -> Complex64 + Send + Sync + 'static,
    {
        Self { eval: Arc::new(f), bound, flags, label: label.into() }
    }

    pub fn zero() -> Self {
        Self::constant(Complex64::new(0.0, 0.0))
    }

    pub fn constant(c: Complex64) -> Self {
        let flags = Flags { symmetric: true, one_sided: c == Complex64::new(0.0, 0.0), real_valued: c.im == 0.0 };
        Self::from_fn(format!("constant({c})"), Bound::Finite(c.norm()), flags, move |_| c)
    }

    /// Materialize `a_k` for explicitly listed indices; all other entries are zero.
    pub fn from_values(label: impl Into<String>, values: Vec<(i64, Complex64)>) -> Self {
        let map: std::collections::BTreeMap<i64, Complex64> = values.into_iter().collect();
        let bound = map.values().map(|v| v.norm()).fold(0.0, f64::max);
        let flags = Flags {
            symmetric: map.iter().all(|(k, v)| map.get(&-k).copied().unwrap_or_default() == *v),
            one_sided: map.iter().all(|(k, v)| *k > 0 || v.norm() == 0.0),
            real_valued: map.values().all(|v| v.im == 0.0),
        };
        Self::from_fn(label, Bound::Finite(bound), flags, move |k| map.get(&k).copied().unwrap_or_default())
    }

    #[inline]
    pub fn eval(&self, k: i64) -> Complex64 {
        (self.eval)(k)
    }

    pub fn bound(&self) -> Bound {
        self.bound
    }

    pub fn flags(&self) -> Flags {
        self.flags
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// `[a_{-n}, …, a_n]` in index order.
    pub fn eval_range(&self, n: u64) -> Vec<Complex64> {
        let n = n as i64;
        (-n..=n).map(|k| self.eval(k)).collect()
    }

    /// Memoized window over `[-n, n]`.
    pub fn window(&self, n: u64) -> SequenceWindow {
        SequenceWindow { radius: n, values: self.eval_range(n) }
    }

    /// Verify the metadata against the values on `[-n, n]`.
    pub fn check_invariants(&self, n: u64) -> Result<()> {
        let w = self.window(n);
        for k in -(n as i64)..=(n as i64) {
            let v = w.get(k);
            if let Bound::Finite(b) = self.bound {
                if v.norm() > b * (1.0 + UNIT_TOL) + UNIT_TOL {
                    return Err(Error::Invariant(format!("{}: |a_{k}| = {} exceeds bound {b}", self.label, v.norm())));
                }
            }
            if self.flags.symmetric && w.get(-k) != v {
                return Err(Error::Invariant(format!("{}: a_{k} != a_{}", self.label, -k)));
            }
            if self.flags.one_sided && k <= 0 && v != Complex64::new(0.0, 0.0) {
                return Err(Error::Invariant(format!("{}: one-sided but a_{k} = {v}", self.label)));
            }
        }
        Ok(())
    }
}

/// Values of a sequence on `[-radius, radius]`, indexed by `k`.
#[derive(Debug, Clone)]
pub struct SequenceWindow {
    radius: u64,
    values: Vec<Complex64>,
}

impl SequenceWindow {
    pub fn radius(&self) -> u64 {
        self.radius
    }

    #[inline]
    pub fn get(&self, k: i64) -> Complex64 {
        self.values[(k + self.radius as i64) as usize]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn indexed(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let r = self.radius as i64;
        self.values.iter().enumerate().map(move |(i, v)| (i as i64 - r, *v))
    }
}

/// A point on the unit circle stored as an angle in turns, so that integer
/// powers are computed by angle arithmetic rather than repeated products.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frequency {
    turns: f64,
}

impl Frequency {
    pub fn from_turns(turns: f64) -> Self {
        Self { turns: turns.rem_euclid(1.0) }
    }

    pub fn from_complex(z: Complex64) -> Result<Self> {
        if (z.norm() - 1.0).abs() > UNIT_TOL {
            return Err(Error::invalid(format!("frequency {z} is not on the unit circle")));
        }
        Ok(Self::from_turns(z.im.atan2(z.re) / std::f64::consts::TAU))
    }

    pub fn turns(&self) -> f64 {
        self.turns
    }

    pub fn value(&self) -> Complex64 {
        cis_turns(self.turns)
    }

    #[inline]
    pub fn pow(&self, k: i64) -> Complex64 {
        cis_turns(frac_mul(k, self.turns))
    }

    pub fn conj(&self) -> Self {
        Self::from_turns(-self.turns)
    }

    pub fn is_real(&self) -> bool {
        self.turns == 0.0 || self.turns == 0.5
    }
}

/// Finite sum `Σ_j c_j λ_j^k` with `|λ_j| = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigPolynomial {
    terms: Vec<(Complex64, Frequency)>,
}

impl TrigPolynomial {
    pub fn new(terms: Vec<(Complex64, Complex64)>) -> Result<Self> {
        let terms = terms
            .into_iter()
            .map(|(c, z)| Ok((c, Frequency::from_complex(z)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_frequencies(terms)
    }

    pub fn from_frequencies(terms: Vec<(Complex64, Frequency)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::invalid("trigonometric polynomial has no terms"));
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[(Complex64, Frequency)] {
        &self.terms
    }

    pub fn coefficient_l1(&self) -> f64 {
        self.terms.iter().map(|(c, _)| c.norm()).sum()
    }

    pub fn eval(&self, k: i64) -> Complex64 {
        self.terms.iter().map(|(c, f)| c * f.pow(k)).sum()
    }
}

pub fn trig_poly_sequence(p: &TrigPolynomial) -> ModulatingSequence {
    let all_real_freq = p.terms.iter().all(|(_, f)| f.is_real());
    let flags = Flags {
        symmetric: all_real_freq,
        one_sided: false,
        real_valued: all_real_freq && p.terms.iter().all(|(c, _)| c.im == 0.0),
    };
    let label = format!("trig_poly[{} terms]", p.terms.len());
    let p = p.clone();
    ModulatingSequence::from_fn(label, Bound::Finite(p.coefficient_l1()), flags, move |k| p.eval(k))
}

/// Negative-index convention for the cycle-indicator sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleConvention {
    /// `a_{-n} = a_n`.
    #[default]
    Symmetric,
    /// `a_{-n} = -1` whenever `a_n = 1` (odd extension).
    OddExtension,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NamedSequence {
    /// `a_k = e^{i k log|k|}`, `a_0 = 1`.
    HardyLittlewood,
    /// `a_k = j` when `|k| = 2^j` with `j ≥ 1`, zero otherwise.
    SparseDyadic,
    /// Visits of the 3-cycle orbit of `y = 1` to `U = {2}`: `a_n = 1` for `n ≥ 0`, `n ≡ 1 (mod 3)`.
    CycleIndicator(CycleConvention),
    Constant(Complex64),
}

pub fn named_sequence(name: NamedSequence) -> ModulatingSequence {
    match name {
        NamedSequence::HardyLittlewood => ModulatingSequence::from_fn(
            "hardy_littlewood",
            Bound::Finite(1.0),
            Flags::default(),
            hardy_littlewood,
        ),
        NamedSequence::SparseDyadic => ModulatingSequence::from_fn(
            "sparse_dyadic",
            Bound::Unbounded,
            Flags { symmetric: true, one_sided: false, real_valued: true },
            |k| Complex64::new(sparse_dyadic(k), 0.0),
        ),
        NamedSequence::CycleIndicator(conv) => {
            let flags = Flags { symmetric: conv == CycleConvention::Symmetric, one_sided: false, real_valued: true };
            let label = match conv {
                CycleConvention::Symmetric => "cycle_indicator[symmetric]",
                CycleConvention::OddExtension => "cycle_indicator[odd_extension]",
            };
            ModulatingSequence::from_fn(label, Bound::Finite(1.0), flags, move |k| {
                Complex64::new(cycle_indicator(k, conv), 0.0)
            })
        }
        NamedSequence::Constant(c) => ModulatingSequence::constant(c),
    }
}

fn hardy_littlewood(k: i64) -> Complex64 {
    if k == 0 {
        return Complex64::new(1.0, 0.0);
    }
    let kf = k as f64;
    let (s, c) = (kf * kf.abs().ln()).sin_cos();
    Complex64::new(c, s)
}

fn sparse_dyadic(k: i64) -> f64 {
    let m = k.unsigned_abs();
    if m >= 2 && m.is_power_of_two() {
        m.trailing_zeros() as f64
    } else {
        0.0
    }
}

fn cycle_indicator(n: i64, conv: CycleConvention) -> f64 {
    let hit = |m: i64| m >= 0 && m.rem_euclid(3) == 1;
    if n >= 0 {
        if hit(n) { 1.0 } else { 0.0 }
    } else {
        match conv {
            CycleConvention::Symmetric if hit(-n) => 1.0,
            CycleConvention::OddExtension if hit(-n) => -1.0,
            _ => 0.0,
        }
    }
}

pub enum SequenceOp {
    /// `a_{-k} := a_k` for `k > 0`.
    Symmetrize,
    /// Zero outside `[-r, r]`.
    Truncate(u64),
    Scale(Complex64),
    Product(ModulatingSequence),
    /// `a_k ↦ λ^k a_k`, `|λ| = 1`.
    Modulate(Complex64),
}

pub fn transform_sequence(a: &ModulatingSequence, op: SequenceOp) -> Result<ModulatingSequence> {
    let src = a.clone();
    let out = match op {
        SequenceOp::Symmetrize => {
            let flags = Flags { symmetric: true, one_sided: false, real_valued: a.flags.real_valued };
            ModulatingSequence::from_fn(format!("sym({})", a.label), a.bound, flags, move |k| src.eval(k.abs()))
        }
        SequenceOp::Truncate(r) => {
            let r = r as i64;
            let flags = a.flags;
            ModulatingSequence::from_fn(format!("trunc({}, {r})", a.label), a.bound, flags, move |k| {
                if k.abs() <= r { src.eval(k) } else { Complex64::new(0.0, 0.0) }
            })
        }
        SequenceOp::Scale(c) => {
            let flags = Flags {
                symmetric: a.flags.symmetric,
                one_sided: a.flags.one_sided,
                real_valued: a.flags.real_valued && c.im == 0.0,
            };
            ModulatingSequence::from_fn(
                format!("scale({}, {c})", a.label),
                a.bound.mul(Bound::Finite(c.norm())),
                flags,
                move |k| c * src.eval(k),
            )
        }
        SequenceOp::Product(b) => {
            let flags = Flags {
                symmetric: a.flags.symmetric && b.flags.symmetric,
                one_sided: a.flags.one_sided || b.flags.one_sided,
                real_valued: a.flags.real_valued && b.flags.real_valued,
            };
            let label = format!("({})*({})", a.label, b.label);
            ModulatingSequence::from_fn(label, a.bound.mul(b.bound), flags, move |k| src.eval(k) * b.eval(k))
        }
        SequenceOp::Modulate(lambda) => {
            let freq = Frequency::from_complex(lambda)?;
            let flags = Flags {
                symmetric: a.flags.symmetric && freq.is_real(),
                one_sided: a.flags.one_sided,
                real_valued: a.flags.real_valued && freq.is_real(),
            };
            ModulatingSequence::from_fn(format!("mod({}, {lambda})", a.label), a.bound, flags, move |k| {
                freq.pow(k) * src.eval(k)
            })
        }
    };
    Ok(out)
}

/// Write `k,re,im` rows.
pub fn write_indexed_csv<W, I>(mut out: W, rows: I) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = (i64, Complex64)>,
{
    writeln!(out, "k,re,im")?;
    for (k, v) in rows {
        writeln!(out, "{k},{},{}", v.re, v.im)?;
    }
    Ok(())
}

pub fn write_sequence_csv<W: Write>(out: W, a: &ModulatingSequence, n: u64) -> std::io::Result<()> {
    write_indexed_csv(out, a.window(n).indexed().collect::<Vec<_>>())
}
