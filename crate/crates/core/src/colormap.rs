use serde::{Deserialize, Serialize};

use crate::annealer::LuminanceProfile;
use crate::colorspace::{self, in_gamut, lab_to_srgb_clamped, LabColor, SrgbColor};
use crate::error::{Error, Result};

/// An ordered sequence of Lab control points at equal parameter spacing.
///
/// A map with a profile is pinned: every point carries exactly the profile's
/// L\* and lies in gamut. Imported and benchmark maps are unconstrained and
/// only need valid Lab values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ColormapRepr", into = "ColormapRepr")]
pub struct Colormap {
    points: Vec<LabColor>,
    profile: Option<LuminanceProfile>,
}

/// Wire form: `{"profile": <profile> | "unconstrained", "points": [[L, A, B], ...]}`.
#[derive(Serialize, Deserialize)]
pub(crate) struct ColormapRepr {
    #[serde(with = "profile_field")]
    pub profile: Option<LuminanceProfile>,
    pub points: Vec<[f64; 3]>,
}

impl TryFrom<ColormapRepr> for Colormap {
    type Error = Error;

    fn try_from(r: ColormapRepr) -> Result<Self> {
        let map = Colormap::from_parts_unchecked(r.points.into_iter().map(LabColor::from).collect(), r.profile);
        map.validate()?;
        Ok(map)
    }
}

impl From<Colormap> for ColormapRepr {
    fn from(m: Colormap) -> Self {
        ColormapRepr {
            profile: m.profile,
            points: m.points.iter().map(|p| p.to_array()).collect(),
        }
    }
}

/// `None` travels as the string `"unconstrained"`.
pub(crate) mod profile_field {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::annealer::LuminanceProfile;

    pub const UNCONSTRAINED: &str = "unconstrained";

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Field {
        Name(String),
        Profile(LuminanceProfile),
    }

    pub fn serialize<S: Serializer>(p: &Option<LuminanceProfile>, s: S) -> Result<S::Ok, S::Error> {
        match p {
            Some(p) => p.serialize(s),
            None => s.serialize_str(UNCONSTRAINED),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<LuminanceProfile>, D::Error> {
        match Field::deserialize(d)? {
            Field::Profile(p) => Ok(Some(p)),
            Field::Name(n) if n == UNCONSTRAINED => Ok(None),
            Field::Name(n) => Err(D::Error::custom(format!(
                "profile must be an object or \"{UNCONSTRAINED}\", got {n:?}"
            ))),
        }
    }
}

impl Colormap {
    pub fn pinned(profile: LuminanceProfile, points: Vec<LabColor>) -> Result<Self> {
        let map = Colormap {
            points,
            profile: Some(profile),
        };
        map.validate()?;
        Ok(map)
    }

    pub fn unconstrained(points: Vec<LabColor>) -> Result<Self> {
        let map = Colormap {
            points,
            profile: None,
        };
        map.validate()?;
        Ok(map)
    }

    pub fn from_srgb(colors: &[SrgbColor]) -> Result<Self> {
        Colormap::unconstrained(colors.iter().map(|&c| colorspace::srgb_to_lab(c)).collect())
    }

    pub(crate) fn from_parts_unchecked(points: Vec<LabColor>, profile: Option<LuminanceProfile>) -> Self {
        Colormap { points, profile }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.len() < 2 {
            return Err(Error::Validation {
                index: self.points.len(),
                message: "a colormap needs at least 2 control points".into(),
            });
        }
        for (i, p) in self.points.iter().enumerate() {
            if !p.is_valid() {
                return Err(Error::Validation {
                    index: i,
                    message: format!("invalid Lab color {p:?}"),
                });
            }
        }
        let Some(profile) = &self.profile else {
            return Ok(());
        };
        if profile.len() != self.points.len() {
            return Err(Error::Validation {
                index: self.points.len().min(profile.len()),
                message: format!(
                    "profile expects {} points, map has {}",
                    profile.len(),
                    self.points.len()
                ),
            });
        }
        for (i, p) in self.points.iter().enumerate() {
            let l = profile.luminance(i + 1);
            if p.l != l {
                return Err(Error::Validation {
                    index: i,
                    message: format!("L* is {} but the profile requires {l}", p.l),
                });
            }
            if !in_gamut(*p) {
                return Err(Error::Validation {
                    index: i,
                    message: format!("{p:?} is outside the sRGB gamut"),
                });
            }
        }
        Ok(())
    }

    pub fn points(&self) -> &[LabColor] {
        &self.points
    }

    pub fn profile(&self) -> Option<&LuminanceProfile> {
        self.profile.as_ref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Color at scale position `t`, interpolated linearly in Lab.
    pub fn sample(&self, t: f64) -> LabColor {
        colorspace::sample(&self.points, t)
    }

    /// `m` equally spaced samples; the result is unconstrained unless `m`
    /// equals the current length.
    pub fn resample(&self, m: usize) -> Result<Colormap> {
        if m == self.points.len() {
            return Ok(self.clone());
        }
        Ok(Colormap {
            points: colorspace::resample(&self.points, m)?,
            profile: None,
        })
    }

    pub fn reversed(&self) -> Colormap {
        let points: Vec<_> = self.points.iter().rev().copied().collect();
        // A pinned map stays pinned only if the profile is symmetric.
        let profile = self.profile.and_then(|p| {
            let candidate = Colormap {
                points: points.clone(),
                profile: Some(p),
            };
            candidate.validate().is_ok().then_some(p)
        });
        Colormap { points, profile }
    }

    pub fn srgb(&self) -> Vec<SrgbColor> {
        self.points.iter().map(|&p| lab_to_srgb_clamped(p)).collect()
    }

    pub fn hex_stops(&self) -> Vec<String> {
        self.srgb().into_iter().map(SrgbColor::to_hex).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annealer::ProfileKind;

    #[test]
    fn pinned_validation_names_index() {
        let p = LuminanceProfile::new(ProfileKind::Linear, false, 10.0, 90.0, 5).unwrap();
        let mut pts: Vec<_> = p.values().into_iter().map(|l| LabColor::new(l, 0.0, 0.0)).collect();
        assert!(Colormap::pinned(p, pts.clone()).is_ok());
        pts[3].l += 1e-9;
        match Colormap::pinned(p, pts.clone()) {
            Err(Error::Validation { index, .. }) => assert_eq!(index, 3),
            other => panic!("expected validation error, got {other:?}"),
        }
        pts[3].l = p.luminance(4);
        pts[1].a = 120.0;
        match Colormap::pinned(p, pts) {
            Err(Error::Validation { index, .. }) => assert_eq!(index, 1),
            other => panic!("expected gamut error, got {other:?}"),
        }
    }

    #[test]
    fn unconstrained_accepts_any_valid_lab() {
        assert!(Colormap::unconstrained(vec![LabColor::new(0.0, 0.0, 0.0), LabColor::new(100.0, 0.0, 0.0)]).is_ok());
        assert!(Colormap::unconstrained(vec![LabColor::new(0.0, 0.0, 0.0)]).is_err());
        assert!(Colormap::unconstrained(vec![LabColor::new(-1.0, 0.0, 0.0), LabColor::new(50.0, 0.0, 0.0)]).is_err());
    }

    #[test]
    fn hex_of_black_white() {
        let m = Colormap::unconstrained(vec![LabColor::new(0.0, 0.0, 0.0), LabColor::new(100.0, 0.0, 0.0)]).unwrap();
        assert_eq!(m.hex_stops(), vec!["#000000", "#FFFFFF"]);
    }
}
