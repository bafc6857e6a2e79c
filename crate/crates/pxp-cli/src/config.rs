//! Key-value experiment configuration.
//!
//! Grammar — one `key = value` statement per line, `#` starts a full-line
//! comment, keys are case-insensitive and `-`/`_` are interchangeable:
//!
//! ```text
//! experiment = echo-scan
//! L          = 16
//! theta      = 0.7pi..1.3pi/25      # inclusive range with 25 points
//! tau        = 0.4965tau_r          # in units of the calibrated revival period
//! n_periods  = 400
//! ```
//!
//! Numeric values accept three unit suffixes: `pi` (radians in units of π,
//! resolved immediately), `tau_r` (drive periods in units of the revival
//! period, resolved once per run by calibrating the configured model at the
//! largest system size), and `tau` (pulse widths as a fraction of the drive
//! period, resolved per sweep point). A value may be a single quantity, a
//! comma list, or an inclusive range `start..end/count`; keys with more than
//! one value become sweep axes (Cartesian product, row order fixed by the
//! axis order documented per experiment).

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use pxp_core::hilbert::Boundary;
use pxp_core::observables::Observable;
use pxp_core::operators::{DeformationParams, RydbergParams};
use pxp_core::scars::SxNormalization;

pub const PI: f64 = std::f64::consts::PI;

/// CLI failure classes, mapped to exit codes 1 (config) and 2 (runtime).
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "runtime error: {m}"),
        }
    }
}

impl From<pxp_core::Error> for CliError {
    fn from(e: pxp_core::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type ConfigResult<T> = Result<T, CliError>;

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Experiment names with one-line descriptions (`--list` output).
pub const EXPERIMENTS: &[(&str, &str)] = &[
    (
        "echo-scan",
        "sweep the kick angle: subharmonic weight f2 and mean entanglement entropy for the alternating (z2) and period-4 (z4) initial states",
    ),
    (
        "tau-scan",
        "sweep the drive period: f2 and mean entanglement entropy from one initial state",
    ),
    (
        "nnn-scan",
        "sweep a next-nearest-neighbour coupling v2 added to the constrained chain: f2 and mean entropy, probing robustness of the subharmonic response",
    ),
    (
        "pairing",
        "quasi-energy spectrum of the first-order effective Floquet operator across tau: rows (tau, quasi_energy, overlap with the reference state)",
    ),
    (
        "splitting",
        "ground-doublet splitting delta_e of the effective Hamiltonian across system sizes, with a linear fit of ln(delta_e) against L",
    ),
    (
        "bloch",
        "collective-spin trajectory of a driven state projected on the scarred subspace: rows (t, x, y, z, parity_of_period)",
    ),
    (
        "timescales",
        "subharmonic period, beating period, and cat-oscillation time extracted from a driven fidelity trace and the effective model",
    ),
    (
        "ghz",
        "stroboscopic GHZ fidelity and quantum Fisher information of the staggered operator along a drive",
    ),
    (
        "correlator",
        "spatiotemporal density correlator C(q, omega) of a driven state (by default the effective-model ground state): rows (q, omega, re, im, abs)",
    ),
    (
        "custom",
        "drive a chosen initial state and record a configurable observable list, optionally sampling inside each period",
    ),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    EchoScan,
    TauScan,
    NnnScan,
    Pairing,
    Splitting,
    Bloch,
    Timescales,
    Ghz,
    Correlator,
    Custom,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::EchoScan => "echo-scan",
            ExperimentKind::TauScan => "tau-scan",
            ExperimentKind::NnnScan => "nnn-scan",
            ExperimentKind::Pairing => "pairing",
            ExperimentKind::Splitting => "splitting",
            ExperimentKind::Bloch => "bloch",
            ExperimentKind::Timescales => "timescales",
            ExperimentKind::Ghz => "ghz",
            ExperimentKind::Correlator => "correlator",
            ExperimentKind::Custom => "custom",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = CliError;
    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "echo-scan" => Ok(ExperimentKind::EchoScan),
            "tau-scan" => Ok(ExperimentKind::TauScan),
            "nnn-scan" => Ok(ExperimentKind::NnnScan),
            "pairing" => Ok(ExperimentKind::Pairing),
            "splitting" => Ok(ExperimentKind::Splitting),
            "bloch" => Ok(ExperimentKind::Bloch),
            "timescales" => Ok(ExperimentKind::Timescales),
            "ghz" => Ok(ExperimentKind::Ghz),
            "correlator" => Ok(ExperimentKind::Correlator),
            "custom" => Ok(ExperimentKind::Custom),
            other => Err(bad(format!(
                "experiment = {other}: unknown experiment (run with --list for the catalogue)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Pxp,
    DeformedPxp,
    PxpNnn,
    Rydberg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialState {
    Z2,
    Z2Prime,
    Z4,
    Random,
    /// Ground state of the effective Hamiltonian at the drive's (τ, ε).
    Ground,
}

impl InitialState {
    pub fn name(&self) -> &'static str {
        match self {
            InitialState::Z2 => "z2",
            InitialState::Z2Prime => "z2-prime",
            InitialState::Z4 => "z4",
            InitialState::Random => "random",
            InitialState::Ground => "ground",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

/// A parsed numeric literal; π-literals are resolved at parse time, the
/// symbolic units wait for the run to supply the reference scale.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Quantity {
    Absolute(f64),
    /// Multiples of the calibrated revival period.
    TauR(f64),
    /// Fraction of the drive period (pulse widths only).
    OfTau(f64),
}

impl Quantity {
    pub fn needs_tau_r(&self) -> bool {
        matches!(self, Quantity::TauR(_))
    }

    /// Resolve to an absolute number given the calibrated revival period.
    pub fn resolve(&self, tau_r: Option<f64>) -> f64 {
        match *self {
            Quantity::Absolute(x) => x,
            Quantity::TauR(x) => x * tau_r.expect("revival period not calibrated"),
            Quantity::OfTau(_) => panic!("a tau-fraction needs the drive period"),
        }
    }

    /// Resolve a pulse width given the revival period and the drive period.
    pub fn resolve_width(&self, tau_r: Option<f64>, tau: f64) -> f64 {
        match *self {
            Quantity::OfTau(x) => x * tau,
            other => other.resolve(tau_r),
        }
    }
}

/// The unit suffix of a quantity literal (longest suffix wins).
fn unit_of(s: &str) -> &'static str {
    let s = s.trim();
    if s.ends_with("tau_r") {
        "tau_r"
    } else if s.ends_with("tau") {
        "tau"
    } else if s.ends_with("pi") {
        "pi"
    } else {
        ""
    }
}

fn parse_quantity(field: &str, s: &str) -> ConfigResult<Quantity> {
    let s = s.trim();
    let unit = unit_of(s);
    let coeff = &s[..s.len() - unit.len()];
    let coeff = coeff.trim();
    let x: f64 = if coeff.is_empty() && !unit.is_empty() {
        1.0
    } else {
        coeff
            .parse()
            .map_err(|_| bad(format!("{field} = {s}: not a number")))?
    };
    Ok(match unit {
        "pi" => Quantity::Absolute(x * PI),
        "tau_r" => Quantity::TauR(x),
        "tau" => Quantity::OfTau(x),
        _ => Quantity::Absolute(x),
    })
}

/// Parse a value as a single quantity, a comma list, or `start..end/count`.
fn parse_values(field: &str, s: &str) -> ConfigResult<Vec<Quantity>> {
    let s = s.trim();
    if let Some((range, count)) = s.split_once('/') {
        let (a, b) = range.split_once("..").ok_or_else(|| {
            bad(format!("{field} = {s}: ranges are written start..end/count"))
        })?;
        let n: usize = count
            .trim()
            .parse()
            .map_err(|_| bad(format!("{field} = {s}: the point count is not an integer")))?;
        if n < 2 {
            return Err(bad(format!("{field} = {s}: a range needs at least 2 points")));
        }
        if unit_of(a) != unit_of(b) {
            return Err(bad(format!(
                "{field} = {s}: both range endpoints must carry the same unit"
            )));
        }
        let qa = parse_quantity(field, a)?;
        let qb = parse_quantity(field, b)?;
        let lerp = |x: f64, y: f64| -> Vec<f64> {
            (0..n)
                .map(|i| x + (y - x) * i as f64 / (n - 1) as f64)
                .collect()
        };
        return match (qa, qb) {
            (Quantity::Absolute(x), Quantity::Absolute(y)) => {
                Ok(lerp(x, y).into_iter().map(Quantity::Absolute).collect())
            }
            (Quantity::TauR(x), Quantity::TauR(y)) => {
                Ok(lerp(x, y).into_iter().map(Quantity::TauR).collect())
            }
            (Quantity::OfTau(x), Quantity::OfTau(y)) => {
                Ok(lerp(x, y).into_iter().map(Quantity::OfTau).collect())
            }
            _ => Err(bad(format!(
                "{field} = {s}: both range endpoints must carry the same unit"
            ))),
        };
    }
    if s.contains("..") {
        return Err(bad(format!("{field} = {s}: ranges are written start..end/count")));
    }
    s.split(',')
        .map(|part| parse_quantity(field, part))
        .collect()
}

fn absolute_values(field: &str, quantities: &[Quantity]) -> ConfigResult<Vec<f64>> {
    quantities
        .iter()
        .map(|q| match q {
            Quantity::Absolute(x) => Ok(*x),
            _ => Err(bad(format!("{field}: unit suffixes do not apply here"))),
        })
        .collect()
}

fn integer_values(field: &str, quantities: &[Quantity]) -> ConfigResult<Vec<usize>> {
    absolute_values(field, quantities)?
        .into_iter()
        .map(|x| {
            let r = x.round();
            if (x - r).abs() > 1e-9 || r < 0.0 {
                Err(bad(format!("{field} = {x}: not a non-negative integer")))
            } else {
                Ok(r as usize)
            }
        })
        .collect()
}

const KNOWN_KEYS: &[&str] = &[
    "experiment",
    "model",
    "l",
    "boundary",
    "theta",
    "tau",
    "epsilon",
    "pulse",
    "tau_p",
    "calibrated",
    "n_periods",
    "initial",
    "observables",
    "substeps",
    "h0",
    "n_max",
    "omega",
    "delta",
    "v1",
    "v2",
    "seed",
    "output",
    "format",
    "workers",
    "normalization",
];

/// Universally meaningful keys; everything else is checked per experiment.
const UNIVERSAL_KEYS: &[&str] = &[
    "experiment",
    "model",
    "l",
    "boundary",
    "seed",
    "output",
    "format",
    "workers",
];

fn experiment_keys(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::EchoScan => &["theta", "tau", "pulse", "tau_p", "calibrated", "n_periods"],
        ExperimentKind::TauScan | ExperimentKind::NnnScan | ExperimentKind::Ghz => &[
            "theta",
            "tau",
            "pulse",
            "tau_p",
            "calibrated",
            "n_periods",
            "initial",
        ],
        ExperimentKind::Pairing => &["tau", "epsilon", "initial"],
        ExperimentKind::Splitting => &["tau"],
        ExperimentKind::Bloch => &[
            "theta",
            "tau",
            "pulse",
            "tau_p",
            "calibrated",
            "n_periods",
            "initial",
            "substeps",
            "normalization",
            "h0",
            "n_max",
        ],
        ExperimentKind::Timescales => &[
            "theta",
            "tau",
            "epsilon",
            "pulse",
            "tau_p",
            "calibrated",
            "n_periods",
            "initial",
        ],
        ExperimentKind::Correlator => &[
            "tau",
            "epsilon",
            "pulse",
            "tau_p",
            "calibrated",
            "n_periods",
            "initial",
        ],
        ExperimentKind::Custom => &[
            "theta",
            "tau",
            "pulse",
            "tau_p",
            "calibrated",
            "n_periods",
            "initial",
            "observables",
            "substeps",
        ],
    }
}

fn sweepable_keys(kind: ExperimentKind) -> &'static [&'static str] {
    match kind {
        ExperimentKind::EchoScan | ExperimentKind::TauScan => &["theta", "tau"],
        ExperimentKind::NnnScan => &["v2", "theta", "tau"],
        ExperimentKind::Pairing => &["tau"],
        ExperimentKind::Splitting => &["l"],
        ExperimentKind::Timescales => &["theta", "tau", "epsilon"],
        _ => &[],
    }
}

/// A fully validated experiment description; symbolic quantities are still
/// unresolved (the runner calibrates the revival period when needed).
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub model: ModelKind,
    pub sizes: Vec<usize>,
    pub boundary: Boundary,
    pub thetas: Vec<Quantity>,
    pub taus: Vec<Quantity>,
    /// Kick deviation from π; set for pairing/correlator/timescales.
    pub epsilons: Vec<Quantity>,
    /// True when the kick deviation was given explicitly (timescales sweeps
    /// report an `epsilon` column instead of `theta`).
    pub epsilon_given: bool,
    pub finite_pulse: bool,
    pub tau_p: Option<Quantity>,
    pub calibrated: bool,
    pub n_periods: usize,
    pub initial: InitialState,
    pub observables: Vec<Observable>,
    pub substeps: usize,
    pub deformation: DeformationParams,
    pub rydberg: RydbergParams,
    pub v2s: Vec<f64>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub workers: Option<usize>,
    pub normalization: SxNormalizationChoice,
}

/// Deferred S^x normalization choice (the literal mode needs the calibrated
/// revival period, which only the runner knows).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SxNormalizationChoice {
    Calibrated,
    InverseTwoTauR,
}

impl SxNormalizationChoice {
    pub fn build(&self, tau_r: Option<f64>) -> SxNormalization {
        match self {
            SxNormalizationChoice::Calibrated => SxNormalization::Calibrated,
            SxNormalizationChoice::InverseTwoTauR => SxNormalization::InverseTwoTauR {
                tau_r: tau_r.expect("revival period not calibrated"),
            },
        }
    }
}

/// Split a config file into a normalized key → value map.
pub fn parse_file(text: &str) -> ConfigResult<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim().to_ascii_lowercase().replace('-', "_");
        let value = value.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(bad(format!("line {}: unknown key `{key}`", lineno + 1)));
        }
        if map.insert(key.clone(), value).is_some() {
            return Err(bad(format!("line {}: duplicate key `{key}`", lineno + 1)));
        }
    }
    Ok(map)
}

pub fn validate(map: &BTreeMap<String, String>) -> ConfigResult<ExperimentConfig> {
    let experiment: ExperimentKind = map
        .get("experiment")
        .ok_or_else(|| bad("missing required key `experiment`"))?
        .parse()?;

    let allowed = experiment_keys(experiment);
    let model_keys = ["h0", "n_max", "omega", "delta", "v1", "v2"];
    for key in map.keys() {
        if UNIVERSAL_KEYS.contains(&key.as_str())
            || allowed.contains(&key.as_str())
            || model_keys.contains(&key.as_str())
        {
            continue;
        }
        return Err(bad(format!(
            "`{key}` does not apply to experiment `{}`",
            experiment.name()
        )));
    }

    let model = match map.get("model").map(String::as_str) {
        None => {
            if experiment == ExperimentKind::NnnScan {
                ModelKind::PxpNnn
            } else {
                ModelKind::Pxp
            }
        }
        Some("pxp") => ModelKind::Pxp,
        Some("deformed-pxp") | Some("deformed_pxp") => ModelKind::DeformedPxp,
        Some("pxp-nnn") | Some("pxp_nnn") => ModelKind::PxpNnn,
        Some("rydberg") => ModelKind::Rydberg,
        Some(other) => {
            return Err(bad(format!(
                "model = {other}: expected pxp, deformed-pxp, pxp-nnn, or rydberg"
            )))
        }
    };
    if experiment == ExperimentKind::NnnScan && model != ModelKind::PxpNnn {
        return Err(bad("nnn-scan runs on model = pxp-nnn"));
    }
    if experiment == ExperimentKind::Bloch && model == ModelKind::Rydberg {
        return Err(bad(
            "bloch needs a blockaded model: the scarred subspace lives on the constrained space",
        ));
    }

    // Model-parameter keys must match the model (bloch borrows the
    // deformation keys for its subspace ladders on any blockaded model).
    for key in ["omega", "delta", "v1"] {
        if map.contains_key(key) && model != ModelKind::Rydberg {
            return Err(bad(format!("`{key}` applies to model = rydberg")));
        }
    }
    if map.contains_key("v2") && !matches!(model, ModelKind::Rydberg | ModelKind::PxpNnn) {
        return Err(bad("`v2` applies to model = rydberg or model = pxp-nnn"));
    }
    for key in ["h0", "n_max"] {
        if map.contains_key(key)
            && model != ModelKind::DeformedPxp
            && experiment != ExperimentKind::Bloch
        {
            return Err(bad(format!(
                "`{key}` applies to model = deformed-pxp (or to the bloch subspace)"
            )));
        }
    }

    let quantities = |key: &str| -> ConfigResult<Option<Vec<Quantity>>> {
        map.get(key).map(|v| parse_values(key, v)).transpose()
    };
    let single = |key: &str, values: &[Quantity]| -> ConfigResult<()> {
        if values.len() > 1 && !sweepable_keys(experiment).contains(&key) {
            return Err(bad(format!(
                "`{key}` cannot be swept in experiment `{}`",
                experiment.name()
            )));
        }
        Ok(())
    };

    let sizes = match quantities("l")? {
        Some(q) => {
            single("l", &q)?;
            let sizes = integer_values("l", &q)?;
            for &l in &sizes {
                if l < 3 || l > 30 {
                    return Err(bad(format!("L = {l}: system sizes must lie in 3..=30")));
                }
            }
            sizes
        }
        None => vec![if model == ModelKind::Rydberg { 10 } else { 16 }],
    };

    let boundary = match map.get("boundary").map(String::as_str) {
        None | Some("periodic") => Boundary::Periodic,
        Some("open") => Boundary::Open,
        Some(other) => return Err(bad(format!("boundary = {other}: expected periodic or open"))),
    };

    let initial = match map.get("initial").map(String::as_str) {
        None => {
            if experiment == ExperimentKind::Correlator {
                InitialState::Ground
            } else {
                InitialState::Z2
            }
        }
        Some("z2") => InitialState::Z2,
        Some("z2-prime") | Some("z2_prime") | Some("z2p") => InitialState::Z2Prime,
        Some("z4") => InitialState::Z4,
        Some("random") => InitialState::Random,
        Some("ground") => InitialState::Ground,
        Some(other) => {
            return Err(bad(format!(
                "initial = {other}: expected z2, z2-prime, z4, random, or ground"
            )))
        }
    };
    if initial == InitialState::Ground
        && !matches!(experiment, ExperimentKind::Correlator | ExperimentKind::Custom)
    {
        return Err(bad(
            "initial = ground is supported by the correlator and custom experiments",
        ));
    }

    // Néel-seeded experiments need even L; the period-4 state needs 4 | L.
    let needs_neel = matches!(initial, InitialState::Z2 | InitialState::Z2Prime)
        || matches!(
            experiment,
            ExperimentKind::EchoScan | ExperimentKind::Pairing | ExperimentKind::Splitting
        );
    for &l in &sizes {
        if needs_neel && l % 2 != 0 {
            return Err(bad(format!(
                "L = {l}: the alternating initial state needs an even number of sites"
            )));
        }
        if (initial == InitialState::Z4 || experiment == ExperimentKind::EchoScan) && l % 4 != 0 {
            return Err(bad(format!(
                "L = {l}: the period-4 initial state needs L divisible by 4"
            )));
        }
    }

    let thetas = match quantities("theta")? {
        Some(q) => {
            single("theta", &q)?;
            q
        }
        None => vec![Quantity::Absolute(PI)],
    };
    let taus = match quantities("tau")? {
        Some(q) => {
            single("tau", &q)?;
            q
        }
        None => vec![Quantity::TauR(0.5)],
    };
    for (key, values) in [("theta", &thetas), ("tau", &taus)] {
        for q in values {
            if matches!(q, Quantity::OfTau(_)) {
                return Err(bad(format!("{key}: the `tau` suffix applies to tau_p only")));
            }
            if key == "theta" && matches!(q, Quantity::TauR(_)) {
                return Err(bad("theta: angles take plain numbers or pi-literals"));
            }
            if key == "tau" {
                let positive = match q {
                    Quantity::Absolute(x) | Quantity::TauR(x) => *x > 0.0,
                    Quantity::OfTau(_) => unreachable!(),
                };
                if !positive {
                    return Err(bad("tau: drive periods must be positive"));
                }
            }
        }
    }

    let epsilon_given = map.contains_key("epsilon");
    if epsilon_given && map.contains_key("theta") {
        return Err(bad(
            "set either `theta` or `epsilon` (they are related by theta = pi - epsilon)",
        ));
    }
    let epsilons = match quantities("epsilon")? {
        Some(q) => {
            single("epsilon", &q)?;
            for v in &q {
                if matches!(v, Quantity::TauR(_) | Quantity::OfTau(_)) {
                    return Err(bad("epsilon: only plain numbers or pi-literals apply"));
                }
            }
            q
        }
        None => match experiment {
            ExperimentKind::Pairing => vec![Quantity::Absolute(1.0)],
            ExperimentKind::Correlator => vec![Quantity::Absolute(0.1 * PI)],
            _ => Vec::new(),
        },
    };

    let finite_pulse = match map.get("pulse").map(String::as_str) {
        None | Some("delta") => false,
        Some("finite") => true,
        Some(other) => return Err(bad(format!("pulse = {other}: expected delta or finite"))),
    };
    let tau_p = match quantities("tau_p")? {
        Some(q) => {
            single("tau_p", &q)?;
            Some(q[0])
        }
        None => None,
    };
    if finite_pulse && tau_p.is_none() {
        return Err(bad("pulse = finite requires `tau_p`"));
    }
    if !finite_pulse && tau_p.is_some() {
        return Err(bad("`tau_p` requires pulse = finite"));
    }
    let calibrated = match map.get("calibrated").map(String::as_str) {
        None | Some("true") => true,
        Some("false") => false,
        Some(other) => return Err(bad(format!("calibrated = {other}: expected true or false"))),
    };

    let integer = |key: &str, default: usize| -> ConfigResult<usize> {
        match map.get(key) {
            None => Ok(default),
            Some(v) => {
                let parsed = integer_values(key, &parse_values(key, v)?)?;
                if parsed.len() != 1 {
                    return Err(bad(format!("`{key}` takes a single value")));
                }
                Ok(parsed[0])
            }
        }
    };
    let n_periods = integer(
        "n_periods",
        match experiment {
            ExperimentKind::Bloch => 2,
            ExperimentKind::Ghz | ExperimentKind::Correlator | ExperimentKind::Custom => 100,
            _ => 400,
        },
    )?;
    if n_periods == 0 && experiment != ExperimentKind::Pairing && experiment != ExperimentKind::Splitting
    {
        return Err(bad("n_periods: at least one driving period is required"));
    }
    let substeps = integer("substeps", if experiment == ExperimentKind::Bloch { 32 } else { 1 })?;
    if substeps == 0 {
        return Err(bad("substeps: at least one sample per period is required"));
    }

    let observables = match map.get("observables") {
        None => vec![
            Observable::Imbalance { normalised: true },
            Observable::RevivalFidelity,
            Observable::EntanglementEntropy { cut: None },
        ],
        Some(list) => {
            let mut out = Vec::new();
            for name in list.split(',').map(str::trim) {
                out.push(match name {
                    "imbalance" => Observable::Imbalance { normalised: true },
                    "number" => Observable::Number,
                    "entropy" => Observable::EntanglementEntropy { cut: None },
                    "fidelity" => Observable::RevivalFidelity,
                    "ghz" => Observable::GhzFidelity,
                    "qfi" => Observable::Qfi { normalised: false },
                    site if site.starts_with('n') => {
                        let k: usize = site[1..].parse().map_err(|_| {
                            bad(format!("observables: unknown observable `{name}`"))
                        })?;
                        Observable::SiteOccupation(k)
                    }
                    other => return Err(bad(format!("observables: unknown observable `{other}`"))),
                });
            }
            if out.is_empty() {
                return Err(bad("observables: the list is empty"));
            }
            out
        }
    };

    let float = |key: &str, default: f64| -> ConfigResult<f64> {
        match map.get(key) {
            None => Ok(default),
            Some(v) => {
                let values = absolute_values(key, &parse_values(key, v)?)?;
                if values.len() != 1 {
                    return Err(bad(format!("`{key}` takes a single value")));
                }
                Ok(values[0])
            }
        }
    };
    let deformation = DeformationParams {
        h0: if model == ModelKind::DeformedPxp || experiment == ExperimentKind::Bloch {
            float("h0", DeformationParams::default().h0)?
        } else {
            DeformationParams::default().h0
        },
        n_max: integer("n_max", DeformationParams::default().n_max)?,
    };
    let defaults = RydbergParams::default();
    let omega = float("omega", defaults.omega)?;
    let v1 = float("v1", defaults.v1)?;
    let rydberg_v2_default = v1 / 64.0;

    let v2s = match quantities("v2")? {
        Some(q) => {
            single("v2", &q)?;
            absolute_values("v2", &q)?
        }
        None => vec![if model == ModelKind::Rydberg {
            rydberg_v2_default
        } else {
            0.0
        }],
    };
    if model == ModelKind::Rydberg && v2s.len() != 1 {
        return Err(bad("`v2` takes a single value for model = rydberg"));
    }
    let rydberg = RydbergParams {
        omega,
        delta: float("delta", v2s[0])?,
        v1,
        v2: v2s[0],
    };

    let seed = match map.get("seed") {
        None => 7,
        Some(v) => v
            .parse::<u64>()
            .map_err(|_| bad(format!("seed = {v}: not an unsigned integer")))?,
    };

    let output = map.get("output").map(PathBuf::from);
    let format = match map.get("format").map(String::as_str) {
        None | Some("csv") => OutputFormat::Csv,
        Some("jsonl") => OutputFormat::Jsonl,
        Some(other) => return Err(bad(format!("format = {other}: expected csv or jsonl"))),
    };
    let workers = match map.get("workers") {
        None => None,
        Some(v) => {
            let n: usize = v
                .parse()
                .map_err(|_| bad(format!("workers = {v}: not a positive integer")))?;
            if n == 0 {
                return Err(bad("workers: at least one worker is required"));
            }
            Some(n)
        }
    };
    let normalization = match map.get("normalization").map(String::as_str) {
        None | Some("calibrated") => SxNormalizationChoice::Calibrated,
        Some("inverse-two-tau-r") | Some("inverse_two_tau_r") => {
            SxNormalizationChoice::InverseTwoTauR
        }
        Some(other) => {
            return Err(bad(format!(
                "normalization = {other}: expected calibrated or inverse-two-tau-r"
            )))
        }
    };

    Ok(ExperimentConfig {
        experiment,
        model,
        sizes,
        boundary,
        thetas,
        taus,
        epsilons,
        epsilon_given,
        finite_pulse,
        tau_p,
        calibrated,
        n_periods,
        initial,
        observables,
        substeps,
        deformation,
        rydberg,
        v2s,
        seed,
        output,
        format,
        workers,
        normalization,
    })
}

pub fn load(text: &str) -> ConfigResult<ExperimentConfig> {
    validate(&parse_file(text)?)
}
