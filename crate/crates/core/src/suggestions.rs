//! Local alternatives for one color of a map: chroma steps and hue turns in
//! LCh, pulled back into gamut.

use serde::{Deserialize, Serialize};

use crate::colorspace::{in_gamut, lab_to_srgb_clamped, LabColor, LchColor};
use crate::error::{Error, Result};

pub const CHROMA_FACTORS: [f64; 4] = [0.5, 0.75, 1.25, 1.5];
pub const HUE_OFFSETS: [f64; 4] = [-40.0, -20.0, 20.0, 40.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuggestionKind {
    Chroma,
    Hue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestion {
    pub kind: SuggestionKind,
    /// Chroma factor or hue offset in degrees.
    pub amount: f64,
    #[serde(with = "lab_array")]
    pub color: LabColor,
    pub hex: String,
    /// True if the color had to be pulled in toward the neutral axis.
    pub clamped: bool,
}

mod lab_array {
    use crate::colorspace::LabColor;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &LabColor, s: S) -> Result<S::Ok, S::Error> {
        c.to_array().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<LabColor, D::Error> {
        <[f64; 3]>::deserialize(d).map(LabColor::from)
    }
}

/// Largest chroma `<= lch.c` at the same L and hue that is in gamut, by
/// bisection. Returns the input unchanged when already in gamut.
pub fn clamp_chroma(lch: LchColor) -> (LchColor, bool) {
    if in_gamut(lch.to_lab()) {
        return (lch, false);
    }
    let (mut lo, mut hi) = (0.0, lch.c);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if in_gamut(LchColor::new(lch.l, mid, lch.h).to_lab()) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (LchColor::new(lch.l, lo, lch.h), true)
}

/// Chroma variants then hue variants of `color`, all in gamut.
pub fn suggestions(color: LabColor) -> Result<Vec<Suggestion>> {
    if !color.is_valid() {
        return Err(Error::invalid(format!("invalid Lab color {color:?}")));
    }
    let lch = color.to_lch();
    let mut out = Vec::with_capacity(8);
    let mut push = |kind, amount, candidate: LchColor| {
        let (c, clamped) = clamp_chroma(candidate);
        // A neutral input stays exactly itself under hue rotation.
        let lab = if lch.c == 0.0 { color } else { c.to_lab() };
        out.push(Suggestion {
            kind,
            amount,
            color: lab,
            hex: lab_to_srgb_clamped(lab).to_hex(),
            clamped,
        });
    };
    for f in CHROMA_FACTORS {
        push(SuggestionKind::Chroma, f, LchColor::new(lch.l, lch.c * f, lch.h));
    }
    for d in HUE_OFFSETS {
        push(SuggestionKind::Hue, d, LchColor::new(lch.l, lch.c, lch.h + d));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn neutral_hue_turns_are_identity() {
        let gray = LabColor::new(60.0, 0.0, 0.0);
        for s in suggestions(gray).unwrap() {
            if s.kind == SuggestionKind::Hue {
                assert_eq!(s.color, gray);
            }
        }
    }

    #[test]
    fn in_gamut_chroma_scaling_is_exact() {
        let c = LabColor::new(60.0, 10.0, 8.0);
        let s = suggestions(c).unwrap();
        let boosted = s.iter().find(|s| s.kind == SuggestionKind::Chroma && s.amount == 1.5).unwrap();
        assert!(!boosted.clamped);
        assert_abs_diff_eq!(boosted.color.to_lch().c, 1.5 * c.to_lch().c, epsilon = 1e-9);
        assert_abs_diff_eq!(boosted.color.l, 60.0, epsilon = 1e-9);
    }

    #[test]
    fn saturated_input_is_clamped() {
        // Near the sRGB red corner, 1.5x chroma leaves the gamut.
        let red = crate::colorspace::srgb_to_lab(crate::colorspace::SrgbColor::new(0.95, 0.1, 0.1));
        let s = suggestions(red).unwrap();
        assert!(s.iter().any(|s| s.clamped));
        assert!(s.iter().all(|s| in_gamut(s.color)));
        assert_eq!(s.len(), 8);
    }

    proptest! {
        #[test]
        fn all_suggestions_in_gamut(l in 1.0..99.0f64, a in -100.0..100.0f64, b in -100.0..100.0f64) {
            let (c, _) = clamp_chroma(LabColor::new(l, a, b).to_lch());
            for s in suggestions(c.to_lab()).unwrap() {
                prop_assert!(in_gamut(s.color));
                prop_assert!((s.color.l - l).abs() < 1e-9);
            }
        }
    }
}
