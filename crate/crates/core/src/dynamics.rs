//! The alternated quadratic system and the connectivity trichotomy.
//!
//! Even steps apply `z^2 + c1`, odd steps `z^2 + c2`. Two consecutive steps
//! compose to the quartic `Q(w) = (w^2 + c1)^2 + c2`, whose critical points
//! are `0` and `±sqrt(-c1)`. The fates of those two critical orbits decide
//! whether the filled alternated Julia set is connected, disconnected or
//! totally disconnected.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cycle;
use crate::error::{Error, Result};

pub type ComplexValue = Complex64;

/// The ordered pair `(c1, c2)`. Swapping the two gives a different system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    pub c1: Complex64,
    pub c2: Complex64,
}

impl MapParams {
    pub const fn new(c1: Complex64, c2: Complex64) -> Self {
        Self { c1, c2 }
    }

    pub fn from_parts(c1re: f64, c1im: f64, c2re: f64, c2im: f64) -> Self {
        Self::new(Complex64::new(c1re, c1im), Complex64::new(c2re, c2im))
    }

    pub fn conj(self) -> Self {
        Self::new(self.c1.conj(), self.c2.conj())
    }

    pub fn swapped(self) -> Self {
        Self::new(self.c2, self.c1)
    }

    pub fn is_finite(&self) -> bool {
        self.c1.is_finite() && self.c2.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationConfig {
    /// Quartic steps spent deciding boundedness.
    pub max_quartic_iters: u32,
    /// Relative tolerance used when comparing orbit points for periodicity.
    pub cycle_tolerance: f64,
    /// Extra quartic steps available to the cycle search.
    pub cycle_search_budget: u32,
    /// Larger escape radius than the default bound; never smaller.
    pub escape_radius_override: Option<f64>,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            max_quartic_iters: 500,
            cycle_tolerance: 1e-9,
            cycle_search_budget: 2048,
            escape_radius_override: None,
        }
    }
}

impl IterationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_quartic_iters < 1 {
            return Err(Error::InvalidConfig("max_quartic_iters must be at least 1".into()));
        }
        if !(self.cycle_tolerance > 0.0 && self.cycle_tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "cycle_tolerance must be a positive finite number, got {}",
                self.cycle_tolerance
            )));
        }
        if self.cycle_search_budget < 2 {
            return Err(Error::InvalidConfig("cycle_search_budget must be at least 2".into()));
        }
        if let Some(r) = self.escape_radius_override {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "escape_radius_override must be a positive finite number, got {r}"
                )));
            }
        }
        Ok(())
    }

    /// Rejects an override smaller than the sound bound for `params`.
    pub fn check_override(&self, params: &MapParams) -> Result<()> {
        self.check_override_for_bound(escape_radius(params))
    }

    /// Same as [`check_override`](Self::check_override) against a precomputed
    /// bound, e.g. the largest bound over a sampling window.
    pub fn check_override_for_bound(&self, required: f64) -> Result<()> {
        match self.escape_radius_override {
            Some(given) if given < required => Err(Error::RadiusOverrideTooSmall { given, required }),
            _ => Ok(()),
        }
    }

    /// The radius actually used for `params`. An override below the sound
    /// bound is rejected at call sites; here it is clamped so the kernel
    /// stays sound regardless.
    #[inline]
    pub fn radius_for(&self, params: &MapParams) -> f64 {
        let bound = escape_radius(params);
        match self.escape_radius_override {
            Some(r) if r > bound => r,
            _ => bound,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "fate", rename_all = "snake_case")]
pub enum OrbitFate {
    Escaped { escape_iter: u32 },
    BoundedPeriodic { period: u32 },
    BoundedNoCycleFound,
}

impl OrbitFate {
    pub fn is_bounded(&self) -> bool {
        !matches!(self, OrbitFate::Escaped { .. })
    }

    pub fn period(&self) -> Option<u32> {
        match *self {
            OrbitFate::BoundedPeriodic { period } => Some(period),
            _ => None,
        }
    }
}

impl fmt::Display for OrbitFate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrbitFate::Escaped { escape_iter } => write!(f, "escaped:{escape_iter}"),
            OrbitFate::BoundedPeriodic { period } => write!(f, "periodic:{period}"),
            OrbitFate::BoundedNoCycleFound => f.write_str("bounded"),
        }
    }
}

/// Connectivity of the filled alternated Julia set. The discriminants are the
/// serialized voxel codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum ConnectivityClass {
    TotallyDisconnected = 0,
    Connected = 1,
    Disconnected = 2,
}

impl ConnectivityClass {
    pub const ALL: [ConnectivityClass; 3] = [
        ConnectivityClass::TotallyDisconnected,
        ConnectivityClass::Connected,
        ConnectivityClass::Disconnected,
    ];

    #[inline]
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Self::TotallyDisconnected),
            1 => Some(Self::Connected),
            2 => Some(Self::Disconnected),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::TotallyDisconnected => "totally_disconnected",
            Self::Connected => "connected",
            Self::Disconnected => "disconnected",
        }
    }

    /// Locus abbreviation: `cl`, `dl` or `tdl`.
    pub fn locus(self) -> &'static str {
        match self {
            Self::TotallyDisconnected => "tdl",
            Self::Connected => "cl",
            Self::Disconnected => "dl",
        }
    }
}

impl fmt::Display for ConnectivityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConnectivityClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "cl" | "connected" => Ok(Self::Connected),
            "dl" | "disconnected" => Ok(Self::Disconnected),
            "tdl" | "totally_disconnected" | "totally-disconnected" => Ok(Self::TotallyDisconnected),
            other => Err(format!("unknown class {other:?} (expected cl, dl or tdl)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub class: ConnectivityClass,
    /// Orbit of the critical point 0 under Q.
    pub fate_zero: OrbitFate,
    /// Orbit of the principal root sqrt(-c1) under Q.
    pub fate_crit: OrbitFate,
    /// Set when the verdict rests on a bounded orbit with no cycle found.
    pub low_confidence: bool,
}

impl ClassificationResult {
    /// Period of the first periodic critical orbit, zero orbit first.
    pub fn period(&self) -> Option<u32> {
        self.fate_zero.period().or(self.fate_crit.period())
    }
}

/// `max(2, |c1|, |c2|)`. Beyond this radius every alternated step strictly
/// increases `|z|`, so crossing it certifies escape.
#[inline]
pub fn escape_radius(params: &MapParams) -> f64 {
    2.0f64.max(params.c1.norm()).max(params.c2.norm())
}

/// One step of the alternated map: `z^2 + c1` at even `n`, `z^2 + c2` at odd `n`.
#[inline]
pub fn alternated_step(z: Complex64, params: &MapParams, n: u64) -> Complex64 {
    let c = if n.is_multiple_of(2) { params.c1 } else { params.c2 };
    z * z + c
}

/// `Q(w) = (w^2 + c1)^2 + c2`, evaluated as two alternated steps.
#[inline]
pub fn quartic_step(w: Complex64, params: &MapParams) -> Complex64 {
    let u = w * w + params.c1;
    u * u + params.c2
}

/// The critical points of Q that need tracking: `0` and the principal
/// `sqrt(-c1)`. The negative root has the same orbit because `Q(-w) = Q(w)`.
pub fn critical_points(c1: Complex64) -> [Complex64; 2] {
    // adding +0 turns a -0.0 imaginary part into +0.0, keeping -c1 off the
    // lower side of the branch cut (so c1 = 1 gives +i)
    let minus_c1 = -c1 + Complex64::new(0.0, 0.0);
    [Complex64::new(0.0, 0.0), minus_c1.sqrt()]
}

#[inline]
fn escaped(w: Complex64, radius_sq: f64) -> bool {
    // NaN compares false, so test finiteness explicitly
    !w.is_finite() || w.norm_sqr() > radius_sq
}

/// Follows the Q-orbit of `w0` and decides whether it escapes, settles on a
/// cycle, or stays bounded with no cycle found inside the search budget.
pub fn orbit_fate(w0: Complex64, params: &MapParams, config: &IterationConfig) -> OrbitFate {
    let radius = config.radius_for(params);
    let radius_sq = radius * radius;

    let mut w = w0;
    for k in 0..config.max_quartic_iters {
        if escaped(w, radius_sq) {
            return OrbitFate::Escaped { escape_iter: k };
        }
        w = quartic_step(w, params);
    }
    if escaped(w, radius_sq) {
        return OrbitFate::Escaped {
            escape_iter: config.max_quartic_iters,
        };
    }

    // Bounded within budget. A tail that escapes after all is cut short and
    // simply yields no cycle.
    let tail = std::iter::successors(Some(w), |&prev| {
        let next = quartic_step(prev, params);
        (!escaped(next, radius_sq)).then_some(next)
    })
    .take(config.cycle_search_budget as usize);

    match cycle::brent(tail, config.cycle_tolerance) {
        Some(period) => OrbitFate::BoundedPeriodic { period },
        None => OrbitFate::BoundedNoCycleFound,
    }
}

/// Three-way connectivity verdict from the two critical orbits.
///
/// | zero orbit      | crit orbit      | class                               |
/// |-----------------|-----------------|-------------------------------------|
/// | bounded         | bounded         | connected                           |
/// | escaped         | escaped         | totally disconnected                |
/// | periodic        | escaped         | disconnected                        |
/// | no cycle found  | escaped         | totally disconnected, low confidence|
///
/// and symmetrically when the roles of the two orbits are exchanged.
pub fn classify(params: &MapParams, config: &IterationConfig) -> ClassificationResult {
    let [zero, crit] = critical_points(params.c1);
    let fate_zero = orbit_fate(zero, params, config);
    let fate_crit = orbit_fate(crit, params, config);

    let (class, low_confidence) = match (fate_zero.is_bounded(), fate_crit.is_bounded()) {
        (true, true) => (ConnectivityClass::Connected, false),
        (false, false) => (ConnectivityClass::TotallyDisconnected, false),
        _ => {
            let bounded = if fate_zero.is_bounded() { fate_zero } else { fate_crit };
            match bounded {
                OrbitFate::BoundedPeriodic { .. } => (ConnectivityClass::Disconnected, false),
                _ => (ConnectivityClass::TotallyDisconnected, true),
            }
        }
    };

    ClassificationResult {
        class,
        fate_zero,
        fate_crit,
        low_confidence,
    }
}
