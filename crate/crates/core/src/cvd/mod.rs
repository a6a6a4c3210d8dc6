//! Color-vision-deficiency simulation with the Machado et al. (2009)
//! physiologically based matrices.

mod machado;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::colorspace::{
    lab_to_linear_rgb, linear_rgb_to_lab, srgb_decode, srgb_encode, LabColor,
};
use crate::error::{Error, Result};

pub use machado::TABLE_VERSION as MACHADO_TABLE_VERSION;

pub type Matrix3 = [[f64; 3]; 3];

pub const IDENTITY: Matrix3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

/// Severity used when a condition is named without one.
pub const DEFAULT_SEVERITY: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Condition {
    Protan,
    Deutan,
    Tritan,
    None,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::Protan => "protan",
            Condition::Deutan => "deutan",
            Condition::Tritan => "tritan",
            Condition::None => "none",
        })
    }
}

impl FromStr for Condition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "protan" | "protanomaly" | "protanopia" => Ok(Condition::Protan),
            "deutan" | "deuteranomaly" | "deuteranopia" => Ok(Condition::Deutan),
            "tritan" | "tritanomaly" | "tritanopia" => Ok(Condition::Tritan),
            "none" | "off" | "normal" => Ok(Condition::None),
            other => Err(Error::invalid(format!("unknown CVD condition {other:?}"))),
        }
    }
}

/// Which RGB encoding the simulation matrix multiplies.
///
/// The matrices are derived for linear RGB. Many deployed simulators apply
/// them to the companded sRGB values instead; that variant reproduces the
/// published benchmark retention figures, so it is the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CvdSpace {
    Linear,
    #[default]
    Encoded,
}

/// A condition, its severity and the resolved 3x3 RGB transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CvdSpec", into = "CvdSpec")]
pub struct CvdModel {
    condition: Condition,
    severity: f64,
    space: CvdSpace,
    matrix: Matrix3,
}

/// Serialized form of a [`CvdModel`]; the matrix is always re-derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvdSpec {
    pub condition: Condition,
    pub severity: f64,
    #[serde(default)]
    pub space: CvdSpace,
}

impl TryFrom<CvdSpec> for CvdModel {
    type Error = Error;

    fn try_from(spec: CvdSpec) -> Result<Self> {
        Ok(CvdModel::load(spec.condition, spec.severity)?.with_space(spec.space))
    }
}

impl From<CvdModel> for CvdSpec {
    fn from(m: CvdModel) -> Self {
        CvdSpec {
            condition: m.condition,
            severity: m.severity,
            space: m.space,
        }
    }
}

impl Default for CvdModel {
    fn default() -> Self {
        CvdModel::load(Condition::Deutan, DEFAULT_SEVERITY).expect("default severity is valid")
    }
}

impl CvdModel {
    /// Looks up the tabulated matrix for a condition, interpolating linearly
    /// between the two bracketing 0.1 severity steps.
    pub fn load(condition: Condition, severity: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&severity) {
            return Err(Error::invalid(format!(
                "CVD severity must be in [0, 1], got {severity}"
            )));
        }
        let table = match condition {
            Condition::Protan => &machado::PROTAN,
            Condition::Deutan => &machado::DEUTAN,
            Condition::Tritan => &machado::TRITAN,
            Condition::None => {
                return Ok(CvdModel {
                    condition,
                    severity,
                    space: CvdSpace::default(),
                    matrix: IDENTITY,
                })
            }
        };
        let scaled = severity * 10.0;
        let low = (scaled.floor() as usize).min(10);
        let frac = scaled - low as f64;
        let matrix = if low == 10 || frac == 0.0 {
            table[low]
        } else {
            let (lo, hi) = (&table[low], &table[low + 1]);
            let mut m = [[0.0; 3]; 3];
            for r in 0..3 {
                for c in 0..3 {
                    m[r][c] = (1.0 - frac) * lo[r][c] + frac * hi[r][c];
                }
            }
            m
        };
        Ok(CvdModel {
            condition,
            severity,
            space: CvdSpace::default(),
            matrix,
        })
    }

    /// The identity model: optimization keeps the separability term but
    /// without any deficiency.
    pub fn identity() -> Self {
        CvdModel::load(Condition::None, 0.0).expect("identity model")
    }

    pub fn with_space(mut self, space: CvdSpace) -> Self {
        self.space = space;
        self
    }

    pub fn condition(&self) -> Condition {
        self.condition
    }

    pub fn severity(&self) -> f64 {
        self.severity
    }

    pub fn space(&self) -> CvdSpace {
        self.space
    }

    pub fn matrix(&self) -> &Matrix3 {
        &self.matrix
    }

    pub fn is_identity(&self) -> bool {
        self.matrix == IDENTITY
    }

    pub fn spec(&self) -> CvdSpec {
        self.clone().into()
    }

    /// Appearance of `c` to a viewer with this deficiency.
    pub fn simulate(&self, c: LabColor) -> LabColor {
        if self.is_identity() {
            return c;
        }
        let lin = lab_to_linear_rgb(c).map(|v| v.clamp(0.0, 1.0));
        let apply = |v: [f64; 3]| {
            let m = &self.matrix;
            [
                (m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2]).clamp(0.0, 1.0),
                (m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2]).clamp(0.0, 1.0),
                (m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]).clamp(0.0, 1.0),
            ]
        };
        let out = match self.space {
            CvdSpace::Linear => apply(lin),
            CvdSpace::Encoded => apply(lin.map(srgb_encode)).map(srgb_decode),
        };
        linear_rgb_to_lab(out)
    }
}

/// Parses `condition[:severity]` or `off`.
impl FromStr for CvdModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (cond, sev) = match s.split_once(':') {
            Some((c, v)) => {
                let sev = v
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| Error::invalid(format!("bad CVD severity {v:?}")))?;
                (c, Some(sev))
            }
            None => (s, None),
        };
        let condition: Condition = cond.trim().parse()?;
        let severity = match (condition, sev) {
            (Condition::None, s) => s.unwrap_or(0.0),
            (_, Some(s)) => s,
            (_, None) => DEFAULT_SEVERITY,
        };
        CvdModel::load(condition, severity)
    }
}
