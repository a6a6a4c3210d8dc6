use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileKind {
    Linear,
    Diverging,
    Wave,
}

impl ProfileKind {
    /// Control-point count used when none is requested.
    pub fn default_points(self) -> usize {
        match self {
            ProfileKind::Linear => 25,
            ProfileKind::Diverging | ProfileKind::Wave => 31,
        }
    }
}

/// The L\* each control point is pinned to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRepr", into = "ProfileRepr")]
pub struct LuminanceProfile {
    kind: ProfileKind,
    inverted: bool,
    l_min: f64,
    l_max: f64,
    n: usize,
}

#[derive(Serialize, Deserialize)]
struct ProfileRepr {
    kind: ProfileKind,
    #[serde(default)]
    inverted: bool,
    l_min: f64,
    l_max: f64,
    n: usize,
}

impl TryFrom<ProfileRepr> for LuminanceProfile {
    type Error = Error;

    fn try_from(r: ProfileRepr) -> Result<Self> {
        LuminanceProfile::new(r.kind, r.inverted, r.l_min, r.l_max, r.n)
    }
}

impl From<LuminanceProfile> for ProfileRepr {
    fn from(p: LuminanceProfile) -> Self {
        ProfileRepr {
            kind: p.kind,
            inverted: p.inverted,
            l_min: p.l_min,
            l_max: p.l_max,
            n: p.n,
        }
    }
}

pub const DEFAULT_L_MIN: f64 = 5.0;
pub const DEFAULT_L_MAX: f64 = 95.0;

impl LuminanceProfile {
    pub fn new(kind: ProfileKind, inverted: bool, l_min: f64, l_max: f64, n: usize) -> Result<Self> {
        if !(l_min.is_finite() && l_max.is_finite() && 0.0 <= l_min && l_min < l_max && l_max <= 100.0) {
            return Err(Error::invalid(format!(
                "luminance range must satisfy 0 <= l_min < l_max <= 100, got [{l_min}, {l_max}]"
            )));
        }
        if n < 5 {
            return Err(Error::invalid(format!("profile needs at least 5 points, got {n}")));
        }
        if kind != ProfileKind::Linear && n.is_multiple_of(2) {
            return Err(Error::invalid(format!("{kind} profile needs an odd point count, got {n}")));
        }
        Ok(LuminanceProfile {
            kind,
            inverted,
            l_min,
            l_max,
            n,
        })
    }

    /// Default range and point count for `kind`.
    pub fn standard(kind: ProfileKind) -> Self {
        LuminanceProfile::new(kind, false, DEFAULT_L_MIN, DEFAULT_L_MAX, kind.default_points())
            .expect("standard profile is valid")
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn inverted(&self) -> bool {
        self.inverted
    }

    pub fn l_min(&self) -> f64 {
        self.l_min
    }

    pub fn l_max(&self) -> f64 {
        self.l_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn with_inverted(mut self, inverted: bool) -> Self {
        self.inverted = inverted;
        self
    }

    /// L\* at 1-based `index`.
    pub fn luminance(&self, index: usize) -> f64 {
        debug_assert!((1..=self.n).contains(&index));
        let l = self.base(index);
        if self.inverted {
            self.l_min + self.l_max - l
        } else {
            l
        }
    }

    /// L\* for every control point, in order.
    pub fn values(&self) -> Vec<f64> {
        (1..=self.n).map(|i| self.luminance(i)).collect()
    }

    fn ramp(&self, from: (usize, f64), to: (usize, f64), index: usize) -> f64 {
        let t = (index - from.0) as f64 / (to.0 - from.0) as f64;
        from.1 + (to.1 - from.1) * t
    }

    fn base(&self, index: usize) -> f64 {
        let (lo, hi, n) = (self.l_min, self.l_max, self.n);
        match self.kind {
            ProfileKind::Linear => self.ramp((1, lo), (n, hi), index),
            ProfileKind::Diverging => {
                let peak = n.div_ceil(2);
                // Mirror exactly so both arms share identical L* values.
                let i = if index > peak { n + 1 - index } else { index };
                self.ramp((1, lo), (peak, hi), i)
            }
            ProfileKind::Wave => {
                let mid = 0.5 * (lo + hi);
                let knots = [(1, lo), (n.div_ceil(3), hi), ((2 * n).div_ceil(3), mid), (n, hi)];
                let seg = knots
                    .windows(2)
                    .find(|w| index <= w[1].0)
                    .expect("index within profile");
                self.ramp(seg[0], seg[1], index)
            }
        }
    }
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProfileKind::Linear => "linear",
            ProfileKind::Diverging => "diverging",
            ProfileKind::Wave => "wave",
        })
    }
}

impl FromStr for ProfileKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" | "sequential" => Ok(ProfileKind::Linear),
            "diverging" => Ok(ProfileKind::Diverging),
            "wave" => Ok(ProfileKind::Wave),
            other => Err(Error::invalid(format!("unknown luminance profile {other:?}"))),
        }
    }
}

/// Builds a profile from a name such as `diverging-inv`, filling unset
/// parts with the defaults for that kind.
pub fn profile_from_name(
    name: &str,
    n: Option<usize>,
    l_min: Option<f64>,
    l_max: Option<f64>,
) -> Result<LuminanceProfile> {
    let (kind, inverted) = parse_profile_name(name)?;
    LuminanceProfile::new(
        kind,
        inverted,
        l_min.unwrap_or(DEFAULT_L_MIN),
        l_max.unwrap_or(DEFAULT_L_MAX),
        n.unwrap_or(kind.default_points()),
    )
}

/// Parses `kind` or `kind-inv` into `(kind, inverted)`.
pub fn parse_profile_name(s: &str) -> Result<(ProfileKind, bool)> {
    match s.strip_suffix("-inv").or_else(|| s.strip_suffix("-inverted")) {
        Some(base) => Ok((base.parse()?, true)),
        None => Ok((s.parse()?, false)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_defaults() {
        let p = LuminanceProfile::standard(ProfileKind::Linear);
        assert_eq!(p.luminance(1), 5.0);
        assert_eq!(p.luminance(25), 95.0);
        assert_eq!(p.luminance(13), 50.0);
        let v = p.values();
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(p.with_inverted(true).luminance(1), 95.0);
    }

    #[test]
    fn diverging_symmetric_peak() {
        let p = LuminanceProfile::standard(ProfileKind::Diverging);
        assert_eq!(p.luminance(16), 95.0);
        assert_eq!(p.luminance(1), 5.0);
        assert_eq!(p.luminance(31), 5.0);
        for i in 1..=31 {
            assert_eq!(p.luminance(i), p.luminance(32 - i));
        }
        let inv = p.with_inverted(true);
        assert_eq!(inv.luminance(16), 5.0);
        assert_eq!(inv.luminance(1), 95.0);
    }

    #[test]
    fn wave_knots() {
        let p = LuminanceProfile::standard(ProfileKind::Wave);
        assert_eq!(p.luminance(1), 5.0);
        assert_eq!(p.luminance(11), 95.0);
        assert_eq!(p.luminance(21), 50.0);
        assert_eq!(p.luminance(31), 95.0);
        assert_eq!(p.luminance(6), 50.0);
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(LuminanceProfile::new(ProfileKind::Linear, false, 50.0, 40.0, 25).is_err());
        assert!(LuminanceProfile::new(ProfileKind::Linear, false, 5.0, 101.0, 25).is_err());
        assert!(LuminanceProfile::new(ProfileKind::Linear, false, 5.0, 95.0, 4).is_err());
        assert!(LuminanceProfile::new(ProfileKind::Diverging, false, 5.0, 95.0, 30).is_err());
        assert!(LuminanceProfile::new(ProfileKind::Linear, false, 5.0, 95.0, 30).is_ok());
    }

    #[test]
    fn names() {
        assert_eq!(parse_profile_name("wave-inv").unwrap(), (ProfileKind::Wave, true));
        assert_eq!(parse_profile_name("linear").unwrap(), (ProfileKind::Linear, false));
        assert!(parse_profile_name("rainbow").is_err());
    }
}
