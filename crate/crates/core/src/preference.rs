//! The user model: preference blocks on a shelf and the chromatic bias they
//! exert on each control point.

use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::colorspace::LabColor;
use crate::error::{Error, Result};

/// Extent given to blocks created from direct colormap edits.
pub const DEFAULT_EDIT_EXTENT: f64 = 0.1;

/// Edits closer than this (in position and in each Lab component) to an
/// existing block are treated as repeats.
pub const EDIT_DEDUP_TOLERANCE: f64 = 1e-6;

/// A 3-vector in Lab with zero L component, used for perturbation
/// directions.
pub type Direction = [f64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BlockRepr", into = "BlockRepr")]
pub struct PreferenceBlock {
    color: LabColor,
    center: f64,
    extent: f64,
}

#[derive(Serialize, Deserialize)]
struct BlockRepr {
    lab: [f64; 3],
    center: f64,
    extent: f64,
}

impl TryFrom<BlockRepr> for PreferenceBlock {
    type Error = Error;

    fn try_from(r: BlockRepr) -> Result<Self> {
        PreferenceBlock::new(LabColor::from(r.lab), r.center, r.extent)
    }
}

impl From<PreferenceBlock> for BlockRepr {
    fn from(b: PreferenceBlock) -> Self {
        BlockRepr {
            lab: b.color.to_array(),
            center: b.center,
            extent: b.extent,
        }
    }
}

impl PreferenceBlock {
    /// `center` is the scale position in `[0, 1]`; `extent` is the block
    /// width (twice the Gaussian sigma) in `(0, 1]`.
    pub fn new(color: LabColor, center: f64, extent: f64) -> Result<Self> {
        if !color.is_finite() {
            return Err(Error::invalid("preference color must be finite"));
        }
        if !(0.0..=1.0).contains(&center) {
            return Err(Error::invalid(format!(
                "preference center must be in [0, 1], got {center}"
            )));
        }
        if !(extent > 0.0 && extent <= 1.0) {
            return Err(Error::invalid(format!(
                "preference extent must be in (0, 1], got {extent}"
            )));
        }
        Ok(PreferenceBlock {
            color,
            center,
            extent,
        })
    }

    pub fn color(&self) -> LabColor {
        self.color
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Replaces the advisory lightness, e.g. with the profile's L\* at the
    /// block center. Bias only reads A and B.
    pub fn with_lightness(mut self, l: f64) -> Self {
        self.color.l = l;
        self
    }

    /// Gaussian weight at 1-based control-point `index` of an `n`-point map.
    pub fn weight(&self, index: usize, n: usize) -> f64 {
        let span = (n - 1) as f64;
        let mu = self.center * span + 1.0;
        let sigma = 0.5 * self.extent * span;
        normal_density(index as f64, mu, sigma)
    }
}

/// Parses `L,A,B@center±extent`; `+-` may stand in for `±`, and without
/// an extent the block spans the whole scale.
impl FromStr for PreferenceBlock {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("expected L,A,B@center±extent, got {s:?}"));
        let (lab, place) = s.split_once('@').ok_or_else(bad)?;
        let parts: Vec<f64> = lab
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad())?;
        let [l, a, b] = parts[..] else {
            return Err(bad());
        };
        let place = place.replace("+-", "±");
        let (center, extent) = match place.split_once('±') {
            Some((c, e)) => (c, Some(e)),
            None => (place.as_str(), None),
        };
        let center = center.trim().parse::<f64>().map_err(|_| bad())?;
        let extent = match extent {
            Some(e) => e.trim().parse::<f64>().map_err(|_| bad())?,
            None => 1.0,
        };
        PreferenceBlock::new(LabColor::new(l, a, b), center, extent)
    }
}

pub fn normal_density(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PreferenceShelf {
    blocks: Vec<PreferenceBlock>,
}

/// A direct edit of the colormap: a color pinned at a scale position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edit {
    pub position: f64,
    #[serde(with = "lab_array")]
    pub color: LabColor,
    #[serde(default)]
    pub extent: Option<f64>,
}

mod lab_array {
    use super::LabColor;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &LabColor, s: S) -> Result<S::Ok, S::Error> {
        c.to_array().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<LabColor, D::Error> {
        <[f64; 3]>::deserialize(d).map(LabColor::from)
    }
}

impl PreferenceShelf {
    pub fn new(blocks: Vec<PreferenceBlock>) -> Self {
        PreferenceShelf { blocks }
    }

    pub fn blocks(&self) -> &[PreferenceBlock] {
        &self.blocks
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn push(&mut self, block: PreferenceBlock) {
        self.blocks.push(block);
    }

    /// Normalized Gaussian-weighted pull of `current` toward the block
    /// colors at 1-based `index`. Zero when the shelf is empty or the pulls
    /// cancel.
    pub fn bias(&self, index: usize, current: LabColor, n: usize) -> Direction {
        let mut u = [0.0; 3];
        for block in &self.blocks {
            let w = block.weight(index, n);
            u[1] += w * (block.color.a - current.a);
            u[2] += w * (block.color.b - current.b);
        }
        normalize(u).unwrap_or([0.0; 3])
    }

    /// Returns a new shelf with the edit recorded as a preference block.
    pub fn absorb_edit(&self, edit: &Edit) -> Result<PreferenceShelf> {
        let block = PreferenceBlock::new(
            edit.color,
            edit.position,
            edit.extent.unwrap_or(DEFAULT_EDIT_EXTENT),
        )?;
        let duplicate = self.blocks.iter().any(|b| {
            let close = |x: f64, y: f64| (x - y).abs() <= EDIT_DEDUP_TOLERANCE;
            close(b.center, block.center)
                && close(b.color.l, block.color.l)
                && close(b.color.a, block.color.a)
                && close(b.color.b, block.color.b)
        });
        let mut shelf = self.clone();
        if !duplicate {
            shelf.blocks.push(block);
        }
        Ok(shelf)
    }
}

fn normalize(v: Direction) -> Option<Direction> {
    // Rescale first so vanishing Gaussian weights don't underflow the norm.
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(scale > 0.0 && scale.is_finite()) {
        return None;
    }
    let v = v.map(|x| x / scale);
    let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    Some(v.map(|x| x / len))
}

/// `normalize(0.4 r + 0.6 u)`, falling back to `r` when `u` is zero or the
/// blend degenerates.
pub fn blend_direction(random_dir: Direction, bias: Direction) -> Direction {
    if bias == [0.0; 3] {
        return random_dir;
    }
    let mixed = [
        0.4 * random_dir[0] + 0.6 * bias[0],
        0.4 * random_dir[1] + 0.6 * bias[1],
        0.4 * random_dir[2] + 0.6 * bias[2],
    ];
    let len = (mixed[0] * mixed[0] + mixed[1] * mixed[1] + mixed[2] * mixed[2]).sqrt();
    if len < 1e-9 {
        return random_dir;
    }
    [mixed[0] / len, mixed[1] / len, mixed[2] / len]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn block(a: f64, b: f64, center: f64, extent: f64) -> PreferenceBlock {
        PreferenceBlock::new(LabColor::new(50.0, a, b), center, extent).unwrap()
    }

    fn len(v: Direction) -> f64 {
        (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
    }

    #[test]
    fn empty_shelf_has_no_bias() {
        let shelf = PreferenceShelf::default();
        assert_eq!(shelf.bias(3, LabColor::new(40.0, 5.0, 5.0), 25), [0.0; 3]);
    }

    #[test]
    fn single_block_points_at_its_color() {
        let shelf = PreferenceShelf::new(vec![block(60.0, 40.0, 0.3, 0.2)]);
        let current = LabColor::new(70.0, -10.0, 20.0);
        let expect = {
            let (da, db) = (70.0, 20.0);
            let l = f64::hypot(da, db);
            [0.0, da / l, db / l]
        };
        for index in 1..=25 {
            let u = shelf.bias(index, current, 25);
            assert_eq!(u[0], 0.0);
            assert_abs_diff_eq!(u[1], expect[1], epsilon = 1e-12);
            assert_abs_diff_eq!(u[2], expect[2], epsilon = 1e-12);
        }
    }

    #[test]
    fn mirrored_blocks_cancel_at_midpoint() {
        let shelf = PreferenceShelf::new(vec![block(30.0, 0.0, 0.25, 0.3), block(-30.0, 0.0, 0.75, 0.3)]);
        assert_eq!(shelf.bias(13, LabColor::new(50.0, 0.0, 0.0), 25), [0.0; 3]);
    }

    #[test]
    fn blend_cases() {
        let r = [0.0, 1.0, 0.0];
        assert_eq!(blend_direction(r, [0.0; 3]), r);
        assert_eq!(blend_direction(r, r), r);
        let o = blend_direction(r, [0.0, 0.0, 1.0]);
        let l = f64::hypot(0.4, 0.6);
        assert_abs_diff_eq!(o[1], 0.4 / l, epsilon = 1e-15);
        assert_abs_diff_eq!(o[2], 0.6 / l, epsilon = 1e-15);
        // 0.4 r + 0.6 u can never vanish for unit inputs, but a crafted
        // bias can make it tiny.
        let tiny = blend_direction(r, [0.0, -0.4 / 0.6, 0.0]);
        assert_eq!(tiny, r);
    }

    #[test]
    fn weight_peaks_at_center_and_sharpens_when_narrow() {
        let n = 25;
        let wide = block(10.0, 10.0, 0.5, 0.8);
        let narrow = block(10.0, 10.0, 0.5, 0.1);
        assert!(narrow.weight(13, n) > wide.weight(13, n));
        assert!(narrow.weight(1, n) < wide.weight(1, n));
        let near = block(10.0, 10.0, 0.4, 0.3);
        let far = block(10.0, 10.0, 0.1, 0.3);
        assert!(near.weight(13, n) > far.weight(13, n));
    }

    #[test]
    fn absorb_edit_dedups() {
        let edit = Edit {
            position: 0.25,
            color: LabColor::new(60.0, 20.0, 20.0),
            extent: None,
        };
        let one = PreferenceShelf::default().absorb_edit(&edit).unwrap();
        assert_eq!(one.blocks().len(), 1);
        assert_eq!(one.blocks()[0].extent(), DEFAULT_EDIT_EXTENT);
        let still_one = one.absorb_edit(&edit).unwrap();
        assert_eq!(still_one, one);
        // Dragging control point j = 7 of 25 lands at (j - 1) / (n - 1).
        let drag = Edit {
            position: 6.0 / 24.0,
            color: LabColor::new(40.0, -30.0, 10.0),
            extent: Some(0.2),
        };
        let two = still_one.absorb_edit(&drag).unwrap();
        assert_eq!(two.blocks().len(), 2);
        assert_eq!(two.blocks()[1].center(), 0.25);
    }

    #[test]
    fn invalid_blocks_rejected() {
        assert!(PreferenceBlock::new(LabColor::default(), 1.5, 0.2).is_err());
        assert!(PreferenceBlock::new(LabColor::default(), 0.5, 0.0).is_err());
        assert!(PreferenceBlock::new(LabColor::default(), 0.5, 1.1).is_err());
    }

    #[test]
    fn shelf_json_schema() {
        let shelf = PreferenceShelf::new(vec![block(60.0, 40.0, 0.5, 1.0)]);
        let json = serde_json::to_string(&shelf).unwrap();
        assert_eq!(json, r#"[{"lab":[50.0,60.0,40.0],"center":0.5,"extent":1.0}]"#);
        let back: PreferenceShelf = serde_json::from_str(&json).unwrap();
        assert_eq!(back, shelf);
        assert!(serde_json::from_str::<PreferenceShelf>(r#"[{"lab":[1,2,3],"center":2,"extent":1}]"#).is_err());
    }

    proptest! {
        #[test]
        fn bias_is_unit_or_zero(
            blocks in prop::collection::vec((-80.0..80.0f64, -80.0..80.0f64, 0.0..=1.0f64, 0.01..=1.0f64), 0..5),
            index in 1usize..=31,
            a in -80.0..80.0f64,
            b in -80.0..80.0f64,
        ) {
            let shelf = PreferenceShelf::new(blocks.into_iter().map(|(x, y, c, e)| block(x, y, c, e)).collect());
            let u = shelf.bias(index, LabColor::new(50.0, a, b), 31);
            prop_assert_eq!(u[0], 0.0);
            let l = len(u);
            prop_assert!(l == 0.0 || (l - 1.0).abs() < 1e-9);
        }

        #[test]
        fn blend_is_unit(theta in 0.0..6.3f64, phi in 0.0..6.3f64, zero in any::<bool>()) {
            let r = [0.0, theta.cos(), theta.sin()];
            let u = if zero { [0.0; 3] } else { [0.0, phi.cos(), phi.sin()] };
            prop_assert!((len(blend_direction(r, u)) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn block_text_form() {
        let b: PreferenceBlock = "50,60,40@0.25±0.5".parse().unwrap();
        assert_eq!((b.color(), b.center(), b.extent()), (LabColor::new(50.0, 60.0, 40.0), 0.25, 0.5));
        let b: PreferenceBlock = " 50, -6, 4 @ 1 +- 0.1".parse().unwrap();
        assert_eq!((b.center(), b.extent()), (1.0, 0.1));
        assert_eq!("50,0,0@0.5".parse::<PreferenceBlock>().unwrap().extent(), 1.0);
        for bad in ["50,0@0.5", "50,0,0", "50,0,0@x", "50,0,0@2", "50,0,0@0.5±0"] {
            assert!(bad.parse::<PreferenceBlock>().is_err(), "{bad}");
        }
    }
}
