//! Color representations and the conversions every other module builds on.
//!
//! All math is in `f64`. Lab is CIE L\*a\*b\* relative to D65 (2° observer);
//! RGB is sRGB with the IEC 61966-2-1 transfer curve.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance applied to linear RGB channels before a color counts as
/// outside the display gamut.
pub const GAMUT_TOLERANCE: f64 = 1e-7;

const RGB_TO_XYZ: [[f64; 3]; 3] = [
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
];

const XYZ_TO_RGB: [[f64; 3]; 3] = [
    [3.2404548360214087, -1.5371388501025751, -0.498531546868481],
    [-0.9692663898756538, 1.876010928842491, 0.041556082346673545],
    [0.05564341960421367, -0.20402585426769818, 1.057225162457929],
];

// Reference white is the image of RGB (1, 1, 1) so that white maps exactly.
const WHITE: [f64; 3] = [
    RGB_TO_XYZ[0][0] + RGB_TO_XYZ[0][1] + RGB_TO_XYZ[0][2],
    RGB_TO_XYZ[1][0] + RGB_TO_XYZ[1][1] + RGB_TO_XYZ[1][2],
    RGB_TO_XYZ[2][0] + RGB_TO_XYZ[2][1] + RGB_TO_XYZ[2][2],
];

const EPSILON: f64 = 216.0 / 24389.0;
const KAPPA: f64 = 24389.0 / 27.0;

/// A CIE Lab color.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LabColor {
    pub l: f64,
    pub a: f64,
    pub b: f64,
}

/// A display-referred sRGB color with channels in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SrgbColor {
    pub r: f64,
    pub g: f64,
    pub b: f64,
}

/// Cylindrical Lab: chroma and hue angle in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LchColor {
    pub l: f64,
    pub c: f64,
    pub h: f64,
}

impl LabColor {
    pub const fn new(l: f64, a: f64, b: f64) -> Self {
        LabColor { l, a, b }
    }

    pub fn is_finite(&self) -> bool {
        self.l.is_finite() && self.a.is_finite() && self.b.is_finite()
    }

    /// Finite components with `L` in `[0, 100]`.
    pub fn is_valid(&self) -> bool {
        self.is_finite() && (0.0..=100.0).contains(&self.l)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.l, self.a, self.b]
    }

    pub fn to_lch(self) -> LchColor {
        let c = self.a.hypot(self.b);
        let h = if c == 0.0 {
            0.0
        } else {
            normalize_hue(self.b.atan2(self.a).to_degrees())
        };
        LchColor { l: self.l, c, h }
    }

    /// Euclidean distance in Lab.
    pub fn distance(&self, other: &LabColor) -> f64 {
        let dl = self.l - other.l;
        let da = self.a - other.a;
        let db = self.b - other.b;
        (dl * dl + da * da + db * db).sqrt()
    }
}

impl From<[f64; 3]> for LabColor {
    fn from(v: [f64; 3]) -> Self {
        LabColor::new(v[0], v[1], v[2])
    }
}

impl LchColor {
    pub fn new(l: f64, c: f64, h: f64) -> Self {
        LchColor {
            l,
            c: c.max(0.0),
            h: normalize_hue(h),
        }
    }

    pub fn to_lab(self) -> LabColor {
        let h = self.h.to_radians();
        LabColor::new(self.l, self.c * h.cos(), self.c * h.sin())
    }
}

pub fn normalize_hue(h: f64) -> f64 {
    let h = h.rem_euclid(360.0);
    // rem_euclid can round up to exactly 360 for tiny negative inputs
    if h >= 360.0 {
        0.0
    } else {
        h
    }
}

impl SrgbColor {
    pub const fn new(r: f64, g: f64, b: f64) -> Self {
        SrgbColor { r, g, b }
    }

    pub fn is_valid(&self) -> bool {
        [self.r, self.g, self.b]
            .iter()
            .all(|c| c.is_finite() && (0.0..=1.0).contains(c))
    }

    /// 8-bit channels, rounded.
    pub fn to_rgb8(self) -> [u8; 3] {
        let q = |c: f64| (c.clamp(0.0, 1.0) * 255.0).round() as u8;
        [q(self.r), q(self.g), q(self.b)]
    }

    pub fn from_rgb8(rgb: [u8; 3]) -> Self {
        SrgbColor::new(
            rgb[0] as f64 / 255.0,
            rgb[1] as f64 / 255.0,
            rgb[2] as f64 / 255.0,
        )
    }

    /// `#RRGGBB`, uppercase.
    pub fn to_hex(self) -> String {
        let [r, g, b] = self.to_rgb8();
        format!("#{r:02X}{g:02X}{b:02X}")
    }

    pub fn from_hex(s: &str) -> Result<Self> {
        let digits = s.trim().strip_prefix('#').unwrap_or(s.trim());
        if digits.len() != 6 || !digits.is_ascii() {
            return Err(Error::invalid(format!("malformed hex color {s:?}")));
        }
        let channel = |i: usize| {
            u8::from_str_radix(&digits[i..i + 2], 16)
                .map_err(|_| Error::invalid(format!("malformed hex color {s:?}")))
        };
        Ok(SrgbColor::from_rgb8([channel(0)?, channel(2)?, channel(4)?]))
    }
}

pub fn srgb_decode(c: f64) -> f64 {
    if c <= 0.04045 {
        c / 12.92
    } else {
        ((c + 0.055) / 1.055).powf(2.4)
    }
}

pub fn srgb_encode(c: f64) -> f64 {
    if c <= 0.0031308 {
        12.92 * c
    } else {
        1.055 * c.powf(1.0 / 2.4) - 0.055
    }
}

fn mat_vec(m: &[[f64; 3]; 3], v: [f64; 3]) -> [f64; 3] {
    [
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    ]
}

/// Lab to linear RGB, without clamping. Channels outside `[0, 1]` mean the
/// color is not displayable.
pub fn lab_to_linear_rgb(c: LabColor) -> [f64; 3] {
    let fy = (c.l + 16.0) / 116.0;
    let fx = fy + c.a / 500.0;
    let fz = fy - c.b / 200.0;
    let finv = |t: f64| {
        let t3 = t * t * t;
        if t3 > EPSILON {
            t3
        } else {
            (116.0 * t - 16.0) / KAPPA
        }
    };
    let y = if c.l > KAPPA * EPSILON {
        fy * fy * fy
    } else {
        c.l / KAPPA
    };
    let xyz = [WHITE[0] * finv(fx), WHITE[1] * y, WHITE[2] * finv(fz)];
    mat_vec(&XYZ_TO_RGB, xyz)
}

pub fn linear_rgb_to_lab(rgb: [f64; 3]) -> LabColor {
    let xyz = mat_vec(&RGB_TO_XYZ, rgb);
    let f = |t: f64| {
        if t > EPSILON {
            t.cbrt()
        } else {
            (KAPPA * t + 16.0) / 116.0
        }
    };
    let fx = f(xyz[0] / WHITE[0]);
    let fy = f(xyz[1] / WHITE[1]);
    let fz = f(xyz[2] / WHITE[2]);
    LabColor::new(116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz))
}

fn linear_in_gamut(rgb: &[f64; 3]) -> bool {
    rgb.iter()
        .all(|&c| (-GAMUT_TOLERANCE..=1.0 + GAMUT_TOLERANCE).contains(&c))
}

/// Converts to sRGB, or `None` when the color lies outside the display gamut.
pub fn lab_to_srgb(c: LabColor) -> Option<SrgbColor> {
    let lin = lab_to_linear_rgb(c);
    linear_in_gamut(&lin).then(|| encode_clamped(lin))
}

/// Converts to sRGB, clamping linear channels into range first.
pub fn lab_to_srgb_clamped(c: LabColor) -> SrgbColor {
    encode_clamped(lab_to_linear_rgb(c))
}

fn encode_clamped(lin: [f64; 3]) -> SrgbColor {
    let e = |c: f64| srgb_encode(c.clamp(0.0, 1.0));
    SrgbColor::new(e(lin[0]), e(lin[1]), e(lin[2]))
}

pub fn srgb_to_lab(c: SrgbColor) -> LabColor {
    linear_rgb_to_lab([srgb_decode(c.r), srgb_decode(c.g), srgb_decode(c.b)])
}

pub fn in_gamut(c: LabColor) -> bool {
    c.is_finite() && linear_in_gamut(&lab_to_linear_rgb(c))
}

/// CIEDE2000 color difference with unit parametric factors.
pub fn delta_e_2000(c1: LabColor, c2: LabColor) -> f64 {
    use std::f64::consts::PI;
    const POW25_7: f64 = 6_103_515_625.0; // 25^7

    let c1_ab = c1.a.hypot(c1.b);
    let c2_ab = c2.a.hypot(c2.b);
    let c_bar = 0.5 * (c1_ab + c2_ab);
    let c_bar7 = c_bar.powi(7);
    let g = 0.5 * (1.0 - (c_bar7 / (c_bar7 + POW25_7)).sqrt());

    let a1p = (1.0 + g) * c1.a;
    let a2p = (1.0 + g) * c2.a;
    let c1p = a1p.hypot(c1.b);
    let c2p = a2p.hypot(c2.b);

    let hue = |b: f64, ap: f64| {
        if b == 0.0 && ap == 0.0 {
            0.0
        } else {
            let h = b.atan2(ap);
            if h < 0.0 {
                h + 2.0 * PI
            } else {
                h
            }
        }
    };
    let h1p = hue(c1.b, a1p);
    let h2p = hue(c2.b, a2p);

    let dlp = c2.l - c1.l;
    let dcp = c2p - c1p;
    let cp_prod = c1p * c2p;
    let dhp = if cp_prod == 0.0 {
        0.0
    } else {
        let d = h2p - h1p;
        if d > PI {
            d - 2.0 * PI
        } else if d < -PI {
            d + 2.0 * PI
        } else {
            d
        }
    };
    let dhp_big = 2.0 * cp_prod.sqrt() * (0.5 * dhp).sin();

    let lp_bar = 0.5 * (c1.l + c2.l);
    let cp_bar = 0.5 * (c1p + c2p);
    let hp_bar = if cp_prod == 0.0 {
        h1p + h2p
    } else if (h1p - h2p).abs() <= PI {
        0.5 * (h1p + h2p)
    } else if h1p + h2p < 2.0 * PI {
        0.5 * (h1p + h2p + 2.0 * PI)
    } else {
        0.5 * (h1p + h2p - 2.0 * PI)
    };

    let t = 1.0 - 0.17 * (hp_bar - 30f64.to_radians()).cos()
        + 0.24 * (2.0 * hp_bar).cos()
        + 0.32 * (3.0 * hp_bar + 6f64.to_radians()).cos()
        - 0.20 * (4.0 * hp_bar - 63f64.to_radians()).cos();
    let d_theta = 30f64.to_radians()
        * (-((hp_bar.to_degrees() - 275.0) / 25.0).powi(2)).exp();
    let cp_bar7 = cp_bar.powi(7);
    let r_c = 2.0 * (cp_bar7 / (cp_bar7 + POW25_7)).sqrt();
    let lp50 = (lp_bar - 50.0).powi(2);
    let s_l = 1.0 + 0.015 * lp50 / (20.0 + lp50).sqrt();
    let s_c = 1.0 + 0.045 * cp_bar;
    let s_h = 1.0 + 0.015 * cp_bar * t;
    let r_t = -(2.0 * d_theta).sin() * r_c;

    let tl = dlp / s_l;
    let tc = dcp / s_c;
    let th = dhp_big / s_h;
    (tl * tl + tc * tc + th * th + r_t * tc * th).max(0.0).sqrt()
}

/// Componentwise `c1 + alpha (c2 - c1)`.
pub fn lerp_lab(c1: LabColor, c2: LabColor, alpha: f64) -> LabColor {
    LabColor::new(
        c1.l + alpha * (c2.l - c1.l),
        c1.a + alpha * (c2.a - c1.a),
        c1.b + alpha * (c2.b - c1.b),
    )
}

/// Samples the piecewise-linear Lab curve through `points` (at equal
/// parameter spacing) at `t` in `[0, 1]`.
pub fn sample(points: &[LabColor], t: f64) -> LabColor {
    debug_assert!(points.len() >= 2);
    let last = points.len() - 1;
    let t = t.clamp(0.0, 1.0);
    if t >= 1.0 {
        return points[last];
    }
    let pos = t * last as f64;
    let i = (pos.floor() as usize).min(last - 1);
    let alpha = pos - i as f64;
    if alpha == 0.0 {
        points[i]
    } else {
        lerp_lab(points[i], points[i + 1], alpha)
    }
}

/// Resamples to `m` equally spaced positions. Endpoints are kept exactly and
/// `m == points.len()` returns the input unchanged.
pub fn resample(points: &[LabColor], m: usize) -> Result<Vec<LabColor>> {
    if points.len() < 2 {
        return Err(Error::invalid(format!(
            "resample needs at least 2 points, got {}",
            points.len()
        )));
    }
    if m < 2 {
        return Err(Error::invalid(format!(
            "resample target must be at least 2, got {m}"
        )));
    }
    if m == points.len() {
        return Ok(points.to_vec());
    }
    let n_seg = (points.len() - 1) as f64;
    let m_seg = (m - 1) as f64;
    Ok((0..m)
        .map(|k| {
            // Integer-exact bracketing keeps endpoints and coincident
            // positions free of rounding.
            let num = k as f64 * n_seg;
            let i = (num / m_seg).floor() as usize;
            if i >= points.len() - 1 {
                return points[points.len() - 1];
            }
            let alpha = (num - i as f64 * m_seg) / m_seg;
            if alpha == 0.0 {
                points[i]
            } else {
                lerp_lab(points[i], points[i + 1], alpha)
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn white_and_black() {
        let w = lab_to_srgb(LabColor::new(100.0, 0.0, 0.0)).unwrap();
        for c in [w.r, w.g, w.b] {
            assert_abs_diff_eq!(c, 1.0, epsilon = 1e-6);
        }
        let k = lab_to_srgb(LabColor::new(0.0, 0.0, 0.0)).unwrap();
        for c in [k.r, k.g, k.b] {
            assert_abs_diff_eq!(c, 0.0, epsilon = 1e-6);
        }
        let lab = srgb_to_lab(SrgbColor::new(1.0, 1.0, 1.0));
        assert_abs_diff_eq!(lab.l, 100.0, epsilon = 1e-6);
        assert_abs_diff_eq!(lab.a, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(lab.b, 0.0, epsilon = 1e-6);
        assert_eq!(srgb_to_lab(SrgbColor::new(0.0, 0.0, 0.0)), LabColor::default());
    }

    #[test]
    fn pure_red_matches_reference() {
        // skimage.color.rgb2lab([1, 0, 0]) = (53.2406, 80.0923, 67.2028)
        let lab = srgb_to_lab(SrgbColor::new(1.0, 0.0, 0.0));
        assert_abs_diff_eq!(lab.l, 53.2406, epsilon = 1e-3);
        assert_abs_diff_eq!(lab.a, 80.0923, epsilon = 1e-3);
        assert_abs_diff_eq!(lab.b, 67.2028, epsilon = 1e-3);
    }

    #[test]
    fn gamut_membership() {
        // Reference linear RGB for (50, 80, -80): (0.416, 0.030, 1.030).
        assert!(lab_to_srgb(LabColor::new(50.0, 80.0, -80.0)).is_none());
        assert!(in_gamut(LabColor::new(50.0, 0.0, 0.0)));
        assert!(!in_gamut(LabColor::new(0.0, 100.0, 0.0)));
        // Reference linear RGB for (95, -20, 90): (0.957, 0.939, 0.012).
        assert!(in_gamut(LabColor::new(95.0, -20.0, 90.0)));
        assert!(!in_gamut(LabColor::new(f64::NAN, 0.0, 0.0)));
    }

    #[test]
    fn ciede2000_reference_pair() {
        let d = delta_e_2000(
            LabColor::new(50.0, 2.6772, -79.7751),
            LabColor::new(50.0, 0.0, -82.7485),
        );
        assert_abs_diff_eq!(d, 2.0425, epsilon = 1e-4);
        let c = LabColor::new(37.0, -12.0, 40.0);
        assert_eq!(delta_e_2000(c, c), 0.0);
    }

    #[test]
    fn lerp_examples() {
        let a = LabColor::new(0.0, 0.0, 0.0);
        let b = LabColor::new(100.0, 20.0, -40.0);
        assert_eq!(lerp_lab(a, b, 0.0), a);
        assert_eq!(lerp_lab(a, b, 1.0), b);
        assert_eq!(lerp_lab(a, b, 0.5), LabColor::new(50.0, 10.0, -20.0));
        assert_eq!(
            lerp_lab(LabColor::new(20.0, 0.0, 0.0), LabColor::new(60.0, 40.0, 0.0), 0.25),
            LabColor::new(30.0, 10.0, 0.0)
        );
    }

    #[test]
    fn resample_cases() {
        let pts = vec![
            LabColor::new(10.0, 0.0, 0.0),
            LabColor::new(20.0, 5.0, -5.0),
            LabColor::new(30.0, 10.0, -10.0),
        ];
        assert_eq!(resample(&pts, 3).unwrap(), pts);
        let five = resample(&pts, 5).unwrap();
        assert_eq!(five.len(), 5);
        for (k, p) in five.iter().enumerate() {
            let t = k as f64 / 4.0;
            assert_abs_diff_eq!(p.l, 10.0 + 20.0 * t, epsilon = 1e-12);
            assert_abs_diff_eq!(p.a, 10.0 * t, epsilon = 1e-12);
            assert_abs_diff_eq!(p.b, -10.0 * t, epsilon = 1e-12);
        }
        assert!(resample(&pts, 1).is_err());
        assert!(resample(&pts[..1], 4).is_err());
    }

    #[test]
    fn hex_round_trip() {
        let c = SrgbColor::from_hex("#1A2b3C").unwrap();
        assert_eq!(c.to_hex(), "#1A2B3C");
        assert!(SrgbColor::from_hex("#12345").is_err());
        assert!(SrgbColor::from_hex("#GG0000").is_err());
    }

    #[test]
    fn lch_neutral_has_zero_hue() {
        let lch = LabColor::new(40.0, 0.0, 0.0).to_lch();
        assert_eq!(lch.c, 0.0);
        assert_eq!(lch.h, 0.0);
        let lch = LabColor::new(40.0, 0.0, -10.0).to_lch();
        assert_abs_diff_eq!(lch.h, 270.0, epsilon = 1e-12);
    }

    fn lab_strategy() -> impl Strategy<Value = LabColor> {
        (0.0..100.0f64, -128.0..128.0f64, -128.0..128.0f64)
            .prop_map(|(l, a, b)| LabColor::new(l, a, b))
    }

    proptest! {
        #[test]
        fn srgb_lab_round_trip(r in 0.0..=1.0f64, g in 0.0..=1.0f64, b in 0.0..=1.0f64) {
            let c = SrgbColor::new(r, g, b);
            let back = lab_to_srgb(srgb_to_lab(c)).expect("decoded sRGB must be in gamut");
            prop_assert!((back.r - r).abs() < 1e-5);
            prop_assert!((back.g - g).abs() < 1e-5);
            prop_assert!((back.b - b).abs() < 1e-5);
        }

        #[test]
        fn lab_srgb_round_trip(c in lab_strategy()) {
            if let Some(s) = lab_to_srgb(c) {
                let back = srgb_to_lab(s);
                prop_assert!((back.l - c.l).abs() < 1e-5);
                prop_assert!((back.a - c.a).abs() < 1e-5);
                prop_assert!((back.b - c.b).abs() < 1e-5);
            }
        }

        #[test]
        fn delta_e_symmetric(a in lab_strategy(), b in lab_strategy()) {
            let d1 = delta_e_2000(a, b);
            let d2 = delta_e_2000(b, a);
            prop_assert!(d1 >= 0.0);
            prop_assert!((d1 - d2).abs() < 1e-9);
        }

        #[test]
        fn lerp_is_affine(a in lab_strategy(), b in lab_strategy(), t in 0.0..=1.0f64) {
            let x = lerp_lab(a, b, t);
            let y = lerp_lab(b, a, 1.0 - t);
            prop_assert!((x.l - y.l).abs() < 1e-9);
            prop_assert!((x.a - y.a).abs() < 1e-9);
            prop_assert!((x.b - y.b).abs() < 1e-9);
        }

        #[test]
        fn resample_keeps_endpoints(
            pts in prop::collection::vec(lab_strategy(), 2..40),
            m in 2usize..80,
        ) {
            let out = resample(&pts, m).unwrap();
            prop_assert_eq!(out.len(), m);
            prop_assert_eq!(out[0], pts[0]);
            prop_assert_eq!(out[m - 1], *pts.last().unwrap());
        }
    }
}
