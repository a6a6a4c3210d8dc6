use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::benchmark_data as data;
use crate::colormap::Colormap;
use crate::colorspace::{srgb_to_lab, SrgbColor};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Sequential,
    Diverging,
    Rainbow,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Sequential => "sequential",
            Family::Diverging => "diverging",
            Family::Rainbow => "rainbow",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sequential" | "linear" => Ok(Family::Sequential),
            "diverging" => Ok(Family::Diverging),
            "rainbow" => Ok(Family::Rainbow),
            other => Err(Error::invalid(format!("unknown colormap family {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchmarkMap {
    Blues,
    Viridis,
    Plasma,
    RedGrey,
    RedBlue,
    CoolWarm,
    Spectral,
    D3Rainbow,
}

impl BenchmarkMap {
    pub const ALL: [BenchmarkMap; 8] = [
        BenchmarkMap::Blues,
        BenchmarkMap::Viridis,
        BenchmarkMap::Plasma,
        BenchmarkMap::RedGrey,
        BenchmarkMap::RedBlue,
        BenchmarkMap::CoolWarm,
        BenchmarkMap::Spectral,
        BenchmarkMap::D3Rainbow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchmarkMap::Blues => "blues",
            BenchmarkMap::Viridis => "viridis",
            BenchmarkMap::Plasma => "plasma",
            BenchmarkMap::RedGrey => "red-grey",
            BenchmarkMap::RedBlue => "red-blue",
            BenchmarkMap::CoolWarm => "cool-warm",
            BenchmarkMap::Spectral => "spectral",
            BenchmarkMap::D3Rainbow => "d3-rainbow",
        }
    }

    pub fn family(self) -> Family {
        match self {
            BenchmarkMap::Blues | BenchmarkMap::Viridis | BenchmarkMap::Plasma => Family::Sequential,
            BenchmarkMap::RedGrey | BenchmarkMap::RedBlue | BenchmarkMap::CoolWarm => Family::Diverging,
            BenchmarkMap::Spectral | BenchmarkMap::D3Rainbow => Family::Rainbow,
        }
    }

    /// Number of points the map is scored at: 25 for sequential, 31 otherwise.
    pub fn scoring_points(self) -> usize {
        match self.family() {
            Family::Sequential => 25,
            Family::Diverging | Family::Rainbow => 31,
        }
    }

    pub fn of_family(family: Family) -> impl Iterator<Item = BenchmarkMap> {
        Self::ALL.into_iter().filter(move |m| m.family() == family)
    }

    /// Published stops in sRGB.
    pub fn stops(self) -> Vec<SrgbColor> {
        let from_floats = |v: &[[f64; 3]]| v.iter().map(|c| SrgbColor::new(c[0], c[1], c[2])).collect();
        let from_hex = |v: &[&str]| {
            v.iter()
                .map(|h| SrgbColor::from_hex(h).expect("embedded hex stops are well formed"))
                .collect()
        };
        match self {
            BenchmarkMap::Blues => from_hex(data::BLUES),
            BenchmarkMap::Viridis => from_floats(data::VIRIDIS),
            BenchmarkMap::Plasma => from_floats(data::PLASMA),
            BenchmarkMap::RedGrey => from_hex(data::RED_GREY),
            BenchmarkMap::RedBlue => from_hex(data::RED_BLUE),
            BenchmarkMap::CoolWarm => from_floats(data::COOL_WARM),
            BenchmarkMap::Spectral => from_hex(data::SPECTRAL),
            BenchmarkMap::D3Rainbow => from_hex(data::D3_RAINBOW),
        }
    }

    /// The stops converted to Lab, at their published resolution.
    pub fn colormap(self) -> Colormap {
        let points = self.stops().into_iter().map(srgb_to_lab).collect();
        Colormap::unconstrained(points).expect("benchmark stops decode to valid Lab")
    }

    /// ColorBrewer schemes ship as a handful of stops; their continuous
    /// form is the uniform cubic B-spline through the stops in 8-bit sRGB,
    /// as popularized by d3-scale-chromatic.
    fn is_brewer(self) -> bool {
        matches!(
            self,
            BenchmarkMap::Blues | BenchmarkMap::RedGrey | BenchmarkMap::RedBlue | BenchmarkMap::Spectral
        )
    }

    /// The continuous map sampled at `n >= 2` equidistant positions.
    pub fn continuous(self, n: usize) -> Result<Colormap> {
        if !self.is_brewer() {
            return self.colormap().resample(n);
        }
        if n < 2 {
            return Err(Error::invalid("need at least 2 samples"));
        }
        let stops: Vec<[f64; 3]> = self
            .stops()
            .into_iter()
            .map(|c| [c.r * 255.0, c.g * 255.0, c.b * 255.0])
            .collect();
        let colors: Vec<SrgbColor> = (0..n)
            .map(|k| {
                let v = rgb_basis(&stops, k as f64 / (n - 1) as f64);
                let q = |x: f64| x.clamp(0.0, 255.0).round() / 255.0;
                SrgbColor::new(q(v[0]), q(v[1]), q(v[2]))
            })
            .collect();
        Colormap::from_srgb(&colors)
    }

    /// The map at its scoring resolution.
    pub fn scoring_colormap(self) -> Colormap {
        self.continuous(self.scoring_points())
            .expect("scoring resolution is >= 2")
    }
}

/// Uniform cubic B-spline through `values` at `t` in `[0, 1]`; the end
/// segments use reflected phantom points.
fn rgb_basis(values: &[[f64; 3]], t: f64) -> [f64; 3] {
    let n = values.len() - 1;
    let (t, i) = if t <= 0.0 {
        (0.0, 0)
    } else if t >= 1.0 {
        (1.0, n - 1)
    } else {
        (t, ((t * n as f64).floor() as usize).min(n - 1))
    };
    let v1 = values[i];
    let v2 = values[i + 1];
    let v0 = if i > 0 { values[i - 1] } else { std::array::from_fn(|c| 2.0 * v1[c] - v2[c]) };
    let v3 = if i < n - 1 { values[i + 2] } else { std::array::from_fn(|c| 2.0 * v2[c] - v1[c]) };
    let t1 = (t - i as f64 / n as f64) * n as f64;
    let t2 = t1 * t1;
    let t3 = t2 * t1;
    std::array::from_fn(|c| {
        ((1.0 - 3.0 * t1 + 3.0 * t2 - t3) * v0[c]
            + (4.0 - 6.0 * t2 + 3.0 * t3) * v1[c]
            + (1.0 + 3.0 * t1 + 3.0 * t2 - 3.0 * t3) * v2[c]
            + t3 * v3[c])
            / 6.0
    })
}

impl fmt::Display for BenchmarkMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BenchmarkMap {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BenchmarkMap::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown benchmark colormap {s:?}")))
    }
}
