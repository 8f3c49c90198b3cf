//! Invertible measure-preserving systems with exact orbit evaluation.
//!
//! Three concrete systems are provided: an irrational rotation of the circle
//! (angles in turns), the three-cycle realized as rotation by 1/3 on `[0, 1)`
//! with cells `A = [0, 1/3)`, `τA`, `τ²A`, and the hyperbolic toral automorphism
//! `[[2, 1], [1, 1]]`. Rotation and three-cycle orbits are computed from the
//! integer exponent (no accumulated drift); torus orbits are iterated in
//! floating point and are only trustworthy for short orbits, so exact torus
//! quadrature goes through [`TorusLattice`].

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::sum::{cis_turns, frac_mul, ComplexSum};
use crate::{Error, Result};

/// Rotations by `p/q` with `q` up to this are rejected as rational.
pub const RATIONAL_DENOMINATOR_LIMIT: u64 = 1_000_000;
const RATIONAL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Point {
    /// Angle in turns, `[0, 1)`.
    Circle(f64),
    /// Three-cycle point `x = (cell + offset) / 3`, `offset ∈ [0, 1)`.
    ThreeCycle { cell: u8, offset: f64 },
    Torus(f64, f64),
}

impl Point {
    /// Canonical first coordinate in `[0, 1)`.
    pub fn x(&self) -> f64 {
        match *self {
            Point::Circle(t) => t,
            Point::ThreeCycle { cell, offset } => (cell as f64 + offset) / 3.0,
            Point::Torus(x, _) => x,
        }
    }

    pub fn y(&self) -> f64 {
        match *self {
            Point::Torus(_, y) => y,
            _ => 0.0,
        }
    }

    pub fn cell(&self) -> u8 {
        match *self {
            Point::ThreeCycle { cell, .. } => cell,
            _ => ((self.x() * 3.0).floor() as u8).min(2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemKind {
    /// `Tz = φz` with `φ = e^{2πi turns}`.
    Rotation { turns: f64 },
    ThreeCycle,
    TorusAutomorphism,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DynamicalSystem {
    kind: SystemKind,
}

pub fn make_system(kind: SystemKind) -> Result<DynamicalSystem> {
    if let SystemKind::Rotation { turns } = kind {
        if !turns.is_finite() {
            return Err(Error::invalid("rotation angle must be finite"));
        }
        if let Some(q) = rational_denominator(turns) {
            return Err(Error::invalid(format!("rotation angle {turns} is rational with denominator {q}")));
        }
        return Ok(DynamicalSystem { kind: SystemKind::Rotation { turns: turns.rem_euclid(1.0) } });
    }
    Ok(DynamicalSystem { kind })
}

/// Smallest `q ≤ 10⁶` with `q·t` within `1e-12` of an integer.
fn rational_denominator(t: f64) -> Option<u64> {
    let t = t.rem_euclid(1.0);
    (1..=RATIONAL_DENOMINATOR_LIMIT).find(|&q| {
        let p = q as f64 * t;
        (p - p.round()).abs() < RATIONAL_TOL * q as f64
    })
}

impl DynamicalSystem {
    pub fn rotation(turns: f64) -> Result<Self> {
        make_system(SystemKind::Rotation { turns })
    }

    pub fn rotation_by(phi: Complex64) -> Result<Self> {
        if (phi.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("rotation multiplier {phi} is not on the unit circle")));
        }
        Self::rotation(phi.im.atan2(phi.re) / std::f64::consts::TAU)
    }

    pub fn three_cycle() -> Self {
        Self { kind: SystemKind::ThreeCycle }
    }

    pub fn torus() -> Self {
        Self { kind: SystemKind::TorusAutomorphism }
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            SystemKind::Rotation { .. } => "rotation",
            SystemKind::ThreeCycle => "three_cycle",
            SystemKind::TorusAutomorphism => "torus_automorphism",
        }
    }

    /// Rotation angle in turns, if this is a rotation.
    pub fn rotation_turns(&self) -> Option<f64> {
        match self.kind {
            SystemKind::Rotation { turns } => Some(turns),
            _ => None,
        }
    }

    /// Default base point: `1` on the circle, `0.1 ∈ A` on the three-cycle, `(0.2, 0.3)` on the torus.
    pub fn default_point(&self) -> Point {
        match self.kind {
            SystemKind::Rotation { .. } => Point::Circle(0.0),
            SystemKind::ThreeCycle => Point::ThreeCycle { cell: 0, offset: 0.3 },
            SystemKind::TorusAutomorphism => Point::Torus(0.2, 0.3),
        }
    }

    pub fn forward(&self, p: &Point) -> Point {
        self.iterate(p, 1)
    }

    pub fn backward(&self, p: &Point) -> Point {
        self.iterate(p, -1)
    }

    /// `T^k p`. Exact exponent arithmetic for the rotation and the three-cycle.
    pub fn iterate(&self, p: &Point, k: i64) -> Point {
        match (self.kind, *p) {
            (SystemKind::Rotation { turns }, pt) => Point::Circle((pt.x() + frac_mul(k, turns)).rem_euclid(1.0)),
            (SystemKind::ThreeCycle, Point::ThreeCycle { cell, offset }) => {
                Point::ThreeCycle { cell: (cell as i64 + k).rem_euclid(3) as u8, offset }
            }
            (SystemKind::ThreeCycle, pt) => {
                let x3 = pt.x() * 3.0;
                let cell = (x3.floor() as i64).clamp(0, 2);
                Point::ThreeCycle { cell: (cell + k).rem_euclid(3) as u8, offset: x3 - cell as f64 }
            }
            (SystemKind::TorusAutomorphism, pt) => {
                let (mut x, mut y) = (pt.x(), pt.y());
                if k >= 0 {
                    for _ in 0..k {
                        (x, y) = ((2.0 * x + y).rem_euclid(1.0), (x + y).rem_euclid(1.0));
                    }
                } else {
                    for _ in 0..(-k) {
                        (x, y) = ((x - y).rem_euclid(1.0), (2.0 * y - x).rem_euclid(1.0));
                    }
                }
                Point::Torus(x, y)
            }
        }
    }

    /// Distance used for invertibility checks (wrap-around per coordinate).
    pub fn distance(&self, p: &Point, q: &Point) -> f64 {
        let wrap = |d: f64| {
            let d = d.rem_euclid(1.0);
            d.min(1.0 - d)
        };
        match (p, q) {
            (Point::ThreeCycle { cell: c1, offset: o1 }, Point::ThreeCycle { cell: c2, offset: o2 }) => {
                if c1 == c2 { (o1 - o2).abs() / 3.0 } else { 1.0 }
            }
            _ => wrap(p.x() - q.x()).max(wrap(p.y() - q.y())),
        }
    }

    /// `e^{2πi m·turns}`, the eigenvalue of `z^m` under the rotation.
    pub fn eigenvalue(&self, m: i64) -> Option<Complex64> {
        self.rotation_turns().map(|t| cis_turns(frac_mul(m, t)))
    }

    /// Stratified samples from the invariant measure; deterministic per `(seed, stream)`.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Point> {
        self.sample_points_stream(count, seed, 0)
    }

    pub fn sample_points_stream(&self, count: usize, seed: u64, stream: u64) -> Vec<Point> {
        let mut rng = task_rng(seed, stream);
        match self.kind {
            SystemKind::Rotation { .. } => {
                (0..count).map(|i| Point::Circle(((i as f64 + rng.random::<f64>()) / count as f64).min(1.0 - f64::EPSILON))).collect()
            }
            SystemKind::ThreeCycle => (0..count)
                .map(|i| {
                    let x3 = 3.0 * (i as f64 + rng.random::<f64>()) / count as f64;
                    let cell = (x3.floor() as i64).clamp(0, 2);
                    Point::ThreeCycle { cell: cell as u8, offset: (x3 - cell as f64).min(1.0 - f64::EPSILON) }
                })
                .collect(),
            SystemKind::TorusAutomorphism => {
                let cols = (count as f64).sqrt().ceil().max(1.0) as usize;
                let rows = count.div_ceil(cols);
                (0..count)
                    .map(|i| {
                        let (cx, cy) = (i % cols, i / cols);
                        let x = (cx as f64 + rng.random::<f64>()) / cols as f64;
                        let y = (cy as f64 + rng.random::<f64>()) / rows as f64;
                        Point::Torus(x.rem_euclid(1.0), y.rem_euclid(1.0))
                    })
                    .collect()
            }
        }
    }
}

/// Per-task generator: one ChaCha stream per task index.
pub fn task_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Functions on the state spaces, defined through point coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Observable {
    Constant { re: f64, im: f64 },
    /// `e^{2πi m x}` (the power `z^m` on the circle).
    Character { m: i64 },
    /// `e^{2πi (p x + q y)}`.
    TorusCharacter { p: i64, q: i64 },
    /// `0` on `A`, `1` on `τA`, `-1` on `τ²A`.
    ThreeCycleStep,
    /// Indicator of cell `τ^cell A`.
    CellIndicator { cell: u8 },
    /// `1 + cos(2π x)`, nonnegative.
    RaisedCosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormHints {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

impl Observable {
    pub fn constant(c: Complex64) -> Self {
        Observable::Constant { re: c.re, im: c.im }
    }

    pub fn eval(&self, p: &Point) -> Complex64 {
        match *self {
            Observable::Constant { re, im } => Complex64::new(re, im),
            Observable::Character { m } => cis_turns(frac_mul(m, p.x())),
            Observable::TorusCharacter { p: a, q: b } => cis_turns(frac_mul(a, p.x()) + frac_mul(b, p.y())),
            Observable::ThreeCycleStep => Complex64::new([0.0, 1.0, -1.0][p.cell() as usize], 0.0),
            Observable::CellIndicator { cell } => Complex64::new(if p.cell() == cell { 1.0 } else { 0.0 }, 0.0),
            Observable::RaisedCosine => Complex64::new(1.0 + (std::f64::consts::TAU * p.x()).cos(), 0.0),
        }
    }

    pub fn norms(&self) -> NormHints {
        match *self {
            Observable::Constant { re, im } => {
                let a = Complex64::new(re, im).norm();
                NormHints { l1: a, l2: a, linf: a }
            }
            Observable::Character { .. } | Observable::TorusCharacter { .. } => NormHints { l1: 1.0, l2: 1.0, linf: 1.0 },
            Observable::ThreeCycleStep => NormHints { l1: 2.0 / 3.0, l2: (2.0f64 / 3.0).sqrt(), linf: 1.0 },
            Observable::CellIndicator { .. } => NormHints { l1: 1.0 / 3.0, l2: (1.0f64 / 3.0).sqrt(), linf: 1.0 },
            Observable::RaisedCosine => NormHints { l1: 1.0, l2: 1.5f64.sqrt(), linf: 2.0 },
        }
    }

    pub fn is_real_nonnegative(&self) -> bool {
        match *self {
            Observable::Constant { re, im } => im == 0.0 && re >= 0.0,
            Observable::CellIndicator { .. } | Observable::RaisedCosine => true,
            _ => false,
        }
    }
}

/// `(k, T^k x0, T^{−k} x0)` for `k = 1, 2, …`; rotation and three-cycle points
/// come from the exponent, torus points from one step per call.
#[derive(Debug, Clone)]
pub struct OrbitWalk {
    sys: DynamicalSystem,
    x0: Point,
    fwd: Point,
    bwd: Point,
    k: i64,
}

impl OrbitWalk {
    pub fn new(sys: &DynamicalSystem, x0: Point) -> Self {
        Self { sys: *sys, x0, fwd: x0, bwd: x0, k: 0 }
    }
}

impl Iterator for OrbitWalk {
    type Item = (i64, Point, Point);

    fn next(&mut self) -> Option<Self::Item> {
        self.k += 1;
        if matches!(self.sys.kind, SystemKind::TorusAutomorphism) {
            self.fwd = self.sys.forward(&self.fwd);
            self.bwd = self.sys.backward(&self.bwd);
        } else {
            self.fwd = self.sys.iterate(&self.x0, self.k);
            self.bwd = self.sys.iterate(&self.x0, -self.k);
        }
        Some((self.k, self.fwd, self.bwd))
    }
}

/// `f(T^k x0)` for `-N ≤ k ≤ N`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitValues {
    radius: u64,
    values: Vec<Complex64>,
}

impl OrbitValues {
    pub fn from_values(radius: u64, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len() as u64, 2 * radius + 1, "orbit length must be 2N+1");
        Self { radius, values }
    }

    /// Orbit with `v_k = g(k)`.
    pub fn from_fn(radius: u64, g: impl Fn(i64) -> Complex64) -> Self {
        let r = radius as i64;
        Self { radius, values: (-r..=r).map(g).collect() }
    }

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

pub fn orbit_values(sys: &DynamicalSystem, f: &Observable, x0: &Point, n: u64) -> OrbitValues {
    let r = n as i64;
    match sys.kind {
        SystemKind::TorusAutomorphism => {
            let mut fwd = Vec::with_capacity(n as usize + 1);
            let mut p = *x0;
            fwd.push(p);
            for _ in 0..n {
                p = sys.forward(&p);
                fwd.push(p);
            }
            let mut bwd = Vec::with_capacity(n as usize);
            let mut p = *x0;
            for _ in 0..n {
                p = sys.backward(&p);
                bwd.push(p);
            }
            let values = bwd.iter().rev().chain(fwd.iter()).map(|p| f.eval(p)).collect();
            OrbitValues { radius: n, values }
        }
        _ => OrbitValues { radius: n, values: (-r..=r).map(|k| f.eval(&sys.iterate(x0, k))).collect() },
    }
}

/// `max_f |E[f∘T] − E[f]|` over stratified samples.
pub fn invariance_check(sys: &DynamicalSystem, observables: &[Observable], count: usize, seed: u64) -> f64 {
    let pts = sys.sample_points(count, seed);
    observables
        .iter()
        .map(|f| {
            let base: ComplexSum = pts.iter().map(|p| f.eval(p)).collect();
            let moved: ComplexSum = pts.iter().map(|p| f.eval(&sys.forward(p))).collect();
            ((moved.sum() - base.sum()) / count as f64).norm()
        })
        .fold(0.0, f64::max)
}

/// The `L × L` lattice `{(i/L, j/L)}`, invariant under the integer matrix `[[2,1],[1,1]]`.
///
/// Quadrature of trigonometric polynomials over this lattice is exact for
/// frequencies that do not alias modulo `L`, which is what makes inner products
/// of torus characters computable without sampling error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TorusLattice {
    pub modulus: u64,
}

impl TorusLattice {
    pub fn new(modulus: u64) -> Self {
        assert!(modulus >= 2);
        Self { modulus }
    }

    /// `A^k (i, j) mod L` for lattice coordinates.
    pub fn iterate(&self, (i, j): (u64, u64), k: i64) -> (u64, u64) {
        let m = mat_pow_mod(k, self.modulus);
        apply_mod(&m, (i, j), self.modulus)
    }

    /// Frequency vector of `f∘T^k` for `f = e^{2πi(p x + q y)}`, reduced mod `L`.
    /// The matrix is symmetric, so this is `A^k (p, q)`.
    pub fn character_frequency(&self, (p, q): (i64, i64), k: i64) -> (u64, u64) {
        let l = self.modulus as i64;
        self.iterate((p.rem_euclid(l) as u64, q.rem_euclid(l) as u64), k)
    }

    /// Exact lattice mean of a function of lattice coordinates (`O(L²)`).
    pub fn mean<F: Fn(u64, u64) -> Complex64>(&self, f: F) -> Complex64 {
        let mut acc = ComplexSum::new();
        for i in 0..self.modulus {
            for j in 0..self.modulus {
                acc += f(i, j);
            }
        }
        acc.sum() / (self.modulus * self.modulus) as f64
    }
}

type Mat2 = [[u64; 2]; 2];

fn mat_mul_mod(a: &Mat2, b: &Mat2, m: u64) -> Mat2 {
    let mm = m as u128;
    let mut out = [[0u64; 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            let s = (a[r][0] as u128 * b[0][c] as u128 + a[r][1] as u128 * b[1][c] as u128) % mm;
            out[r][c] = s as u64;
        }
    }
    out
}

fn mat_pow_mod(k: i64, m: u64) -> Mat2 {
    // [[2,1],[1,1]] and its inverse [[1,-1],[-1,2]]
    let base: Mat2 = if k >= 0 { [[2 % m, 1 % m], [1 % m, 1 % m]] } else { [[1 % m, m - 1], [m - 1, 2 % m]] };
    let mut e = k.unsigned_abs();
    let mut acc: Mat2 = [[1 % m, 0], [0, 1 % m]];
    let mut b = base;
    while e > 0 {
        if e & 1 == 1 {
            acc = mat_mul_mod(&acc, &b, m);
        }
        b = mat_mul_mod(&b, &b, m);
        e >>= 1;
    }
    acc
}

fn apply_mod(a: &Mat2, (i, j): (u64, u64), m: u64) -> (u64, u64) {
    let mm = m as u128;
    let x = (a[0][0] as u128 * i as u128 + a[0][1] as u128 * j as u128) % mm;
    let y = (a[1][0] as u128 * i as u128 + a[1][1] as u128 * j as u128) % mm;
    (x as u64, y as u64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sqrt2_rotation() -> DynamicalSystem {
        DynamicalSystem::rotation(2f64.sqrt()).unwrap()
    }

    #[test]
    fn rotation_three_steps() {
        let sys = sqrt2_rotation();
        let phi = sys.eigenvalue(1).unwrap();
        let p = sys.iterate(&Point::Circle(0.0), 3);
        let z = Observable::Character { m: 1 }.eval(&p);
        assert!((z - phi.powi(3)).norm() < 1e-12);
        let q = sys.forward(&sys.forward(&sys.forward(&Point::Circle(0.0))));
        assert!(sys.distance(&p, &q) < 1e-12);
    }

    #[test]
    fn rational_rotation_rejected() {
        for t in [0.5, 0.25, 1.0 / 7.0, 3.0 / 1000.0, 12345.0 / 999_983.0] {
            assert!(matches!(DynamicalSystem::rotation(t), Err(Error::InvalidArgument(_))), "{t}");
        }
        assert!(DynamicalSystem::rotation(2f64.sqrt()).is_ok());
        assert!(DynamicalSystem::rotation_by(Complex64::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn three_cycle_step_pattern() {
        let sys = DynamicalSystem::three_cycle();
        let f = Observable::ThreeCycleStep;
        let x0 = sys.default_point();
        assert_eq!(x0.cell(), 0);
        let fwd: Vec<f64> = (0..6).map(|k| f.eval(&sys.iterate(&x0, k)).re).collect();
        assert_eq!(fwd, vec![0.0, 1.0, -1.0, 0.0, 1.0, -1.0]);
        let orbit = orbit_values(&sys, &f, &x0, 4);
        let vals: Vec<f64> = orbit.values().iter().map(|v| v.re).collect();
        // f(τ^{-3k-1}x) = -1 and f(τ^{-3k-2}x) = 1
        assert_eq!(vals, vec![-1.0, 0.0, 1.0, -1.0, 0.0, 1.0, -1.0, 0.0, 1.0]);
    }

    #[test]
    fn torus_matrix_step() {
        let sys = DynamicalSystem::torus();
        let p = sys.forward(&Point::Torus(0.2, 0.3));
        assert!(sys.distance(&p, &Point::Torus(0.7, 0.5)) < 1e-12);
        let orbit = orbit_values(&sys, &Observable::Character { m: 1 }, &Point::Torus(0.2, 0.3), 1);
        let back = sys.backward(&Point::Torus(0.2, 0.3));
        assert!((orbit.get(-1) - Observable::Character { m: 1 }.eval(&back)).norm() < 1e-12);
        assert!((orbit.get(1) - Complex64::from_polar(1.0, std::f64::consts::TAU * 0.7)).norm() < 1e-12);
    }

    #[test]
    fn rotation_orbit_is_eigenfunction_orbit() {
        let sys = sqrt2_rotation();
        let x0 = Point::Circle(0.123);
        for m in [1i64, 3, -2] {
            let f = Observable::Character { m };
            let orbit = orbit_values(&sys, &f, &x0, 2000);
            let fx0 = f.eval(&x0);
            let lam = sys.eigenvalue(m).unwrap();
            for k in [-2000i64, -17, 0, 1, 999, 2000] {
                let expect = cis_turns(frac_mul(k, sys.rotation_turns().unwrap() * m as f64)) * fx0;
                assert!((orbit.get(k) - expect).norm() < 1e-10);
            }
            let p = sys.sample_points(50, 3);
            for x in &p {
                assert!((f.eval(&sys.forward(x)) - lam * f.eval(x)).norm() < 1e-12);
            }
        }
        let o = orbit_values(&sys, &Observable::Character { m: 1 }, &Point::Circle(0.0), 2);
        let phi = sys.eigenvalue(1).unwrap();
        let expect = [phi.inv().powi(2), phi.inv(), Complex64::new(1.0, 0.0), phi, phi * phi];
        for (a, b) in o.values().iter().zip(expect) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn sampling_is_deterministic_and_faithful() {
        let rot = sqrt2_rotation();
        let a = rot.sample_points(4, 11);
        assert_eq!(a, rot.sample_points(4, 11));
        assert!(a.iter().all(|p| (Observable::Character { m: 1 }.eval(p).norm() - 1.0).abs() < 1e-15));

        let cyc = DynamicalSystem::three_cycle();
        let pts = cyc.sample_points(30_000, 5);
        let frac = pts.iter().filter(|p| p.cell() == 0).count() as f64 / pts.len() as f64;
        assert!((frac - 1.0 / 3.0).abs() < 0.01);

        let tor = DynamicalSystem::torus();
        let pts = tor.sample_points(10_000, 5);
        let mean: Complex64 = pts.iter().map(|p| Observable::Character { m: 1 }.eval(p)).sum::<Complex64>() / 1e4;
        assert!(mean.norm() <= 0.05);
    }

    #[test]
    fn invariance_within_three_over_root_count() {
        let count = 20_000;
        let tol = 3.0 / (count as f64).sqrt();
        assert!(invariance_check(&sqrt2_rotation(), &[Observable::Character { m: 1 }], count, 1) <= tol);
        assert!(invariance_check(&DynamicalSystem::three_cycle(), &[Observable::CellIndicator { cell: 0 }], count, 1) <= tol);
        assert!(invariance_check(&DynamicalSystem::torus(), &[Observable::TorusCharacter { p: 1, q: 1 }], count, 1) <= tol);
    }

    #[test]
    fn invertibility_on_random_points() {
        for sys in [sqrt2_rotation(), DynamicalSystem::three_cycle(), DynamicalSystem::torus()] {
            for p in sys.sample_points(1000, 42) {
                assert!(sys.distance(&sys.backward(&sys.forward(&p)), &p) < 1e-12, "{}", sys.name());
                assert!(sys.distance(&sys.forward(&sys.backward(&p)), &p) < 1e-12, "{}", sys.name());
            }
        }
    }

    #[test]
    fn lattice_character_correlations_vanish() {
        let lat = TorusLattice::new(97);
        for (p, q) in [(1i64, 0i64), (0, 1), (2, -3), (5, 7)] {
            for k in (-20i64..=20).filter(|k| *k != 0) {
                let l = lat.modulus as f64;
                let ip = lat.mean(|i, j| {
                    let (ti, tj) = lat.iterate((i, j), k);
                    let phase = (p as f64 * ti as f64 + q as f64 * tj as f64 - p as f64 * i as f64 - q as f64 * j as f64) / l;
                    cis_turns(phase)
                });
                assert!(ip.norm() < 1e-10, "(p,q)=({p},{q}) k={k} -> {ip}");
            }
        }
    }

    #[test]
    fn lattice_inverse_and_frequency_law() {
        let lat = TorusLattice::new(1_000_000_007);
        let x = (123_456, 987_654_321);
        assert_eq!(lat.iterate(lat.iterate(x, 17), -17), x);
        assert_eq!(lat.iterate(lat.iterate(x, 5), 7), lat.iterate(x, 12));
        assert_eq!(lat.character_frequency((1, 0), 1), (2, 1));
        assert_eq!(lat.character_frequency((1, 0), -1), (1, 1_000_000_006));
    }
}
