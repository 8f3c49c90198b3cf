//! Experiment configuration. Every struct rejects unknown fields.

use ehlab::dynamics::{DynamicalSystem, Observable, Point, SystemKind};
use ehlab::envelope::EXHAUSTIVE_LIMIT;
use ehlab::process::VSchedule;
use ehlab::sequences::{
    named_sequence, trig_poly_sequence, Bound, CycleConvention, Flags, Frequency, ModulatingSequence, NamedSequence,
    TrigPolynomial,
};
use ehlab::Complex64;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Rates,
    Transform,
    Counterexample,
    Prop27,
    Spectral,
    Process,
    Sweep,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Rates,
        ExperimentKind::Transform,
        ExperimentKind::Counterexample,
        ExperimentKind::Prop27,
        ExperimentKind::Spectral,
        ExperimentKind::Process,
        ExperimentKind::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Rates => "rates",
            ExperimentKind::Transform => "transform",
            ExperimentKind::Counterexample => "counterexample",
            ExperimentKind::Prop27 => "prop27",
            ExperimentKind::Spectral => "spectral",
            ExperimentKind::Process => "process",
            ExperimentKind::Sweep => "sweep",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| CliError::Schema(format!("unknown experiment kind `{s}` (expected one of {})", kind_list())))
    }
}

pub fn kind_list() -> String {
    ExperimentKind::ALL.iter().map(|k| k.name()).collect::<Vec<_>>().join(" | ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "experiment", rename_all = "snake_case")]
pub enum ExperimentConfig {
    Rates(RatesConfig),
    Transform(TransformConfig),
    Counterexample(CounterexampleConfig),
    Prop27(Prop27Config),
    Spectral(SpectralConfig),
    Process(ProcessConfig),
    Sweep(SweepConfig),
}

impl ExperimentConfig {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            ExperimentConfig::Rates(_) => ExperimentKind::Rates,
            ExperimentConfig::Transform(_) => ExperimentKind::Transform,
            ExperimentConfig::Counterexample(_) => ExperimentKind::Counterexample,
            ExperimentConfig::Prop27(_) => ExperimentKind::Prop27,
            ExperimentConfig::Spectral(_) => ExperimentKind::Spectral,
            ExperimentConfig::Process(_) => ExperimentKind::Process,
            ExperimentConfig::Sweep(_) => ExperimentKind::Sweep,
        }
    }

    /// Defaults for a kind, as used when no config file is given.
    pub fn default_for(kind: ExperimentKind) -> Self {
        let empty = serde_json::json!({ "experiment": kind.name() });
        serde_json::from_value(empty).expect("every kind has complete defaults")
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let raw: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Schema(format!("config: {e}")))?;
        let cfg: Self = serde_json::from_value(raw.clone()).map_err(|e| CliError::Schema(format!("config: {e}")))?;
        let canonical = serde_json::to_value(&cfg).expect("config serializes");
        reject_unknown(&raw, &canonical, "$")?;
        Ok(cfg)
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            ExperimentConfig::Transform(c) => c.seed,
            ExperimentConfig::Process(c) => c.seed,
            _ => None,
        }
    }

    /// Sets the seed of Monte-Carlo experiments; ignored elsewhere.
    pub fn set_seed(&mut self, seed: u64) {
        match self {
            ExperimentConfig::Transform(c) => c.seed = Some(seed),
            ExperimentConfig::Process(c) => c.seed = Some(seed),
            _ => {}
        }
    }

    pub fn uses_monte_carlo(&self) -> bool {
        match self {
            ExperimentConfig::Transform(c) => c.weak11.is_some() || c.spectral_check.is_some(),
            ExperimentConfig::Process(_) => true,
            _ => false,
        }
    }

    /// Canonical JSON used for hashing and echoed into the report.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.uses_monte_carlo() && self.seed().is_none() {
            return Err(CliError::Schema(format!("experiment `{}` is Monte-Carlo and needs a seed", self.kind().name())));
        }
        Ok(())
    }
}

/// Every key of `raw` must survive the round trip through the typed config; unit enum
/// variants would otherwise ignore extra keys.
fn reject_unknown(raw: &serde_json::Value, canonical: &serde_json::Value, path: &str) -> Result<(), CliError> {
    use serde_json::Value;
    match (raw, canonical) {
        (Value::Object(r), Value::Object(c)) => {
            for (k, v) in r {
                let sub = format!("{path}.{k}");
                match c.get(k) {
                    Some(cv) => reject_unknown(v, cv, &sub)?,
                    None => return Err(CliError::Schema(format!("config: unknown field `{sub}`"))),
                }
            }
            Ok(())
        }
        (Value::Array(r), Value::Array(c)) if r.len() == c.len() => {
            r.iter().zip(c).enumerate().try_for_each(|(i, (x, y))| reject_unknown(x, y, &format!("{path}[{i}]")))
        }
        _ => Ok(()),
    }
}

/// An explicit list of radii, or `{"dyadic": [lo, hi]}` for `2^lo, …, 2^hi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScheduleSpec {
    Dyadic {
        dyadic: [u32; 2],
    },
    Explicit(Vec<u64>),
}

impl ScheduleSpec {
    pub fn dyadic(lo: u32, hi: u32) -> Self {
        ScheduleSpec::Dyadic { dyadic: [lo, hi] }
    }

    pub fn resolve(&self) -> Result<Vec<u64>, CliError> {
        let v = match self {
            ScheduleSpec::Dyadic { dyadic: [lo, hi] } => {
                if lo > hi || *hi > 62 {
                    return Err(CliError::Schema(format!("dyadic schedule [{lo}, {hi}] out of range")));
                }
                (*lo..=*hi).map(|j| 1u64 << j).collect()
            }
            ScheduleSpec::Explicit(v) => v.clone(),
        };
        if v.is_empty() || v.windows(2).any(|w| w[0] >= w[1]) {
            return Err(CliError::Schema("schedule must be nonempty and strictly increasing".into()));
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
    pub turns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum SequenceSpec {
    HardyLittlewood,
    SparseDyadic,
    CycleIndicator {
        #[serde(default)]
        convention: CycleConvention,
    },
    Constant {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    /// `λ^k` with `λ = e^{2πi turns}`.
    Geometric { turns: f64 },
    /// `1` for `k ≥ 1`, `0` otherwise.
    OneSided,
    /// `|k|^{−exponent}` for `k ≠ 0`, `a_0 = 0`.
    PowerDecay { exponent: f64 },
    TrigPoly { terms: Vec<TrigTerm> },
}

impl SequenceSpec {
    pub fn build(&self) -> Result<ModulatingSequence, CliError> {
        Ok(match self {
            SequenceSpec::HardyLittlewood => named_sequence(NamedSequence::HardyLittlewood),
            SequenceSpec::SparseDyadic => named_sequence(NamedSequence::SparseDyadic),
            SequenceSpec::CycleIndicator { convention } => named_sequence(NamedSequence::CycleIndicator(*convention)),
            SequenceSpec::Constant { re, im } => named_sequence(NamedSequence::Constant(Complex64::new(*re, *im))),
            SequenceSpec::Geometric { turns } => {
                let lam = Frequency::from_turns(*turns);
                ModulatingSequence::from_fn(format!("geometric({turns})"), Bound::Finite(1.0), Flags::default(), move |k| lam.pow(k))
            }
            SequenceSpec::OneSided => {
                let flags = Flags { symmetric: false, one_sided: true, real_valued: true };
                ModulatingSequence::from_fn("one_sided", Bound::Finite(1.0), flags, |k| Complex64::new(if k >= 1 { 1.0 } else { 0.0 }, 0.0))
            }
            SequenceSpec::PowerDecay { exponent } => {
                if exponent.is_nan() || *exponent < 0.0 {
                    return Err(CliError::Schema(format!("power_decay exponent {exponent} must be nonnegative")));
                }
                let p = *exponent;
                let flags = Flags { symmetric: true, one_sided: false, real_valued: true };
                ModulatingSequence::from_fn(format!("power_decay({p})"), Bound::Finite(1.0), flags, move |k| {
                    Complex64::new(if k == 0 { 0.0 } else { (k.unsigned_abs() as f64).powf(-p) }, 0.0)
                })
            }
            SequenceSpec::TrigPoly { terms } => {
                let terms = terms.iter().map(|t| (Complex64::new(t.re, t.im), Frequency::from_turns(t.turns))).collect();
                trig_poly_sequence(&TrigPolynomial::from_frequencies(terms).map_err(CliError::from)?)
            }
        })
    }
}

pub fn build_system(kind: SystemKind) -> Result<DynamicalSystem, CliError> {
    ehlab::dynamics::make_system(kind).map_err(CliError::from)
}

/// `[x]` on the circle and three-cycle, `[x, y]` on the torus; system default when absent.
pub fn build_point(sys: &DynamicalSystem, x0: &Option<Vec<f64>>) -> Result<Point, CliError> {
    let Some(c) = x0 else { return Ok(sys.default_point()) };
    let bad = || CliError::Schema(format!("x0 {c:?} does not fit system {}", sys.name()));
    if c.iter().any(|v| !(0.0..1.0).contains(v)) {
        return Err(bad());
    }
    match (sys.kind(), c.as_slice()) {
        (SystemKind::Rotation { .. }, [x]) => Ok(Point::Circle(*x)),
        (SystemKind::ThreeCycle, [x]) => Ok(sys.iterate(&Point::Circle(*x), 0)),
        (SystemKind::TorusAutomorphism, [x, y]) => Ok(Point::Torus(*x, *y)),
        _ => Err(bad()),
    }
}

fn default_rotation() -> SystemKind {
    SystemKind::Rotation { turns: std::f64::consts::SQRT_2 }
}

fn default_character() -> Observable {
    Observable::Character { m: 1 }
}

fn hl() -> SequenceSpec {
    SequenceSpec::HardyLittlewood
}

fn sparse() -> SequenceSpec {
    SequenceSpec::SparseDyadic
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateClass {
    /// `(∗)`: prefix sums against `n^β`.
    Star,
    /// `(∗∗)`: one-sided exponential sums against `n^{1−β}`.
    StarStar,
    MAlpha,
    AAlpha,
    Raw,
}

impl RateClass {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "star" | "*" => Ok(RateClass::Star),
            "star_star" | "**" => Ok(RateClass::StarStar),
            "M" | "m" | "m_alpha" => Ok(RateClass::MAlpha),
            "A" | "a" | "a_alpha" => Ok(RateClass::AAlpha),
            "raw" => Ok(RateClass::Raw),
            _ => Err(CliError::Schema(format!("unknown rate class `{s}` (star | star_star | M | A | raw)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatesConfig {
    #[serde(default = "hl")]
    pub sequence: SequenceSpec,
    #[serde(default = "RatesConfig::default_class")]
    pub class: RateClass,
    #[serde(default = "RatesConfig::default_alpha")]
    pub alpha: f64,
    #[serde(default = "RatesConfig::default_beta")]
    pub beta: f64,
    #[serde(default = "RatesConfig::default_schedule")]
    pub schedule: ScheduleSpec,
    #[serde(default = "RatesConfig::default_grid_factor")]
    pub grid_factor: usize,
    #[serde(default = "RatesConfig::default_growth_factor")]
    pub growth_factor: f64,
}

impl RatesConfig {
    fn default_class() -> RateClass {
        RateClass::AAlpha
    }
    fn default_alpha() -> f64 {
        1.5
    }
    fn default_beta() -> f64 {
        0.5
    }
    fn default_schedule() -> ScheduleSpec {
        ScheduleSpec::dyadic(8, 15)
    }
    fn default_grid_factor() -> usize {
        ehlab::rates::DEFAULT_GRID_FACTOR
    }
    fn default_growth_factor() -> f64 {
        ehlab::rates::DEFAULT_GROWTH_FACTOR
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Weak11Config {
    pub lambdas: Vec<f64>,
    pub horizon: u64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralCheckConfig {
    pub j_schedule: ScheduleSpec,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformConfig {
    #[serde(default = "hl")]
    pub sequence: SequenceSpec,
    #[serde(default = "default_rotation")]
    pub system: SystemKind,
    #[serde(default = "default_character")]
    pub observable: Observable,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default = "TransformConfig::default_checkpoints")]
    pub checkpoints: ScheduleSpec,
    #[serde(default = "yes")]
    pub with_abel: bool,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub weak11: Option<Weak11Config>,
    #[serde(default)]
    pub spectral_check: Option<SpectralCheckConfig>,
}

fn yes() -> bool {
    true
}

impl TransformConfig {
    fn default_checkpoints() -> ScheduleSpec {
        ScheduleSpec::dyadic(0, 16)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CounterexampleConfig {
    #[serde(default = "CounterexampleConfig::default_n")]
    pub n: u64,
    #[serde(default)]
    pub convention: CycleConvention,
}

impl CounterexampleConfig {
    fn default_n() -> u64 {
        1_000_000
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MajorantSpec {
    /// `h(n) = 1/ln(n + shift)`.
    InverseLog {
        #[serde(default = "MajorantSpec::default_shift")]
        shift: u64,
    },
}

impl MajorantSpec {
    fn default_shift() -> u64 {
        3
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct L1Config {
    pub j_lo: usize,
    pub epsilon: f64,
    pub grid_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Prop27Config {
    #[serde(default = "Prop27Config::default_h")]
    pub h: MajorantSpec,
    #[serde(default = "Prop27Config::default_k")]
    pub k: usize,
    #[serde(default = "Prop27Config::default_horizon")]
    pub horizon: u64,
    /// Evaluation points of `g` in `[0.3, 2π − 0.3]`.
    #[serde(default = "Prop27Config::default_g_points")]
    pub g_points: usize,
    #[serde(default = "Prop27Config::default_g_tol")]
    pub g_tol: f64,
    #[serde(default)]
    pub l1: Option<L1Config>,
    /// Horizon `N` of the divergent-modulator demonstration, when requested.
    #[serde(default)]
    pub divergent_n: Option<u64>,
}

impl Prop27Config {
    fn default_h() -> MajorantSpec {
        MajorantSpec::InverseLog { shift: 3 }
    }
    fn default_k() -> usize {
        20
    }
    fn default_horizon() -> u64 {
        EXHAUSTIVE_LIMIT
    }
    fn default_g_points() -> usize {
        100
    }
    fn default_g_tol() -> f64 {
        1e-6
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonanceConfig {
    pub system: SystemKind,
    pub max_power: i64,
    pub tol_turns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    #[serde(default = "SpectralConfig::default_sequence")]
    pub sequence: SequenceSpec,
    #[serde(default = "SpectralConfig::default_n")]
    pub n: u64,
    #[serde(default = "SpectralConfig::default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub max_lag: Option<usize>,
    #[serde(default)]
    pub grid_order: Option<usize>,
    #[serde(default = "yes")]
    pub positivity: bool,
    #[serde(default)]
    pub resonance: Option<ResonanceConfig>,
}

impl SpectralConfig {
    fn default_sequence() -> SequenceSpec {
        SequenceSpec::TrigPoly {
            terms: vec![
                TrigTerm { re: 1.0, im: 0.0, turns: 0.1 },
                TrigTerm { re: 0.5, im: 0.0, turns: 0.35 },
                TrigTerm { re: 0.0, im: 0.25, turns: 0.8 },
            ],
        }
    }
    fn default_n() -> u64 {
        1 << 12
    }
    fn default_threshold() -> f64 {
        0.1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    pub radii: ScheduleSpec,
    #[serde(default)]
    pub modulator: Option<SequenceSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessConfig {
    #[serde(default = "sparse")]
    pub sequence: SequenceSpec,
    #[serde(default = "default_rotation")]
    pub system: SystemKind,
    #[serde(default = "ProcessConfig::default_delta")]
    pub delta: Observable,
    #[serde(default = "ProcessConfig::default_schedule")]
    pub v_schedule: VSchedule,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default = "ProcessConfig::default_checkpoints")]
    pub checkpoints: ScheduleSpec,
    #[serde(default = "ProcessConfig::default_r_schedule")]
    pub r_schedule: ScheduleSpec,
    #[serde(default = "RatesConfig::default_alpha")]
    pub alpha: f64,
    #[serde(default = "ProcessConfig::default_samples")]
    pub samples: usize,
    #[serde(default = "ProcessConfig::default_structure_samples")]
    pub structure_samples: usize,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub truncation: Option<TruncationConfig>,
}

impl ProcessConfig {
    fn default_delta() -> Observable {
        Observable::RaisedCosine
    }
    fn default_schedule() -> VSchedule {
        VSchedule::Factory
    }
    fn default_checkpoints() -> ScheduleSpec {
        ScheduleSpec::dyadic(1, 14)
    }
    fn default_r_schedule() -> ScheduleSpec {
        ScheduleSpec::Explicit(vec![4, 16, 64, 256])
    }
    fn default_samples() -> usize {
        128
    }
    fn default_structure_samples() -> usize {
        1000
    }
}

/// Explicit `λ` angles in turns, or `count` equally spaced angles starting at `offset`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LambdaGrid {
    Uniform {
        count: usize,
        #[serde(default)]
        offset: f64,
    },
    Explicit(Vec<f64>),
}

impl LambdaGrid {
    pub fn turns(&self) -> Vec<f64> {
        match self {
            LambdaGrid::Uniform { count, offset } => (0..*count).map(|i| offset + i as f64 / *count as f64).collect(),
            LambdaGrid::Explicit(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_rotation")]
    pub system: SystemKind,
    #[serde(default = "default_character")]
    pub observable: Observable,
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default = "SweepConfig::default_lambdas")]
    pub lambdas: LambdaGrid,
    /// Adds `λ = φ̄`, the resonant frequency of a rotation, to the grid.
    #[serde(default = "yes")]
    pub include_resonance: bool,
    #[serde(default = "SweepConfig::default_checkpoints")]
    pub checkpoints: ScheduleSpec,
    #[serde(default = "yes")]
    pub symmetric: bool,
}

impl SweepConfig {
    fn default_lambdas() -> LambdaGrid {
        LambdaGrid::Uniform { count: 8, offset: 0.0625 }
    }
    fn default_checkpoints() -> ScheduleSpec {
        ScheduleSpec::dyadic(0, 16)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_kind_has_defaults() {
        for k in ExperimentKind::ALL {
            assert_eq!(ExperimentConfig::default_for(k).kind(), k);
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"experiment":"rates","alpha":1.5,"colour":1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment":"rates","sequence":{"name":"sparse_dyadic","x":1}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment":"nope"}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"experiment":"process","schedule":{"dyadic":[1,2]}}"#).is_err());
    }

    #[test]
    fn schedules_parse_both_forms() {
        let c = ExperimentConfig::from_json(r#"{"experiment":"rates","schedule":{"dyadic":[2,4]}}"#).unwrap();
        let ExperimentConfig::Rates(r) = c else { panic!() };
        assert_eq!(r.schedule.resolve().unwrap(), vec![4, 8, 16]);
        let c = ExperimentConfig::from_json(r#"{"experiment":"rates","schedule":[3,5,9]}"#).unwrap();
        let ExperimentConfig::Rates(r) = c else { panic!() };
        assert_eq!(r.schedule.resolve().unwrap(), vec![3, 5, 9]);
    }

    #[test]
    fn monte_carlo_needs_seed() {
        let mut c = ExperimentConfig::default_for(ExperimentKind::Process);
        assert!(c.validate().is_err());
        c.set_seed(3);
        assert!(c.validate().is_ok());
        assert!(ExperimentConfig::default_for(ExperimentKind::Rates).validate().is_ok());
    }
}
