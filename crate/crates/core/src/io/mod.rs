//! Colormap documents and their json, csv and hex-list encodings.

mod field;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::annealer::{LuminanceProfile, OptimizerConfig};
use crate::colormap::{profile_field, Colormap};
use crate::colorspace::{srgb_to_lab, LabColor, SrgbColor};
use crate::cost::{CostBreakdown, CostWeights};
use crate::cvd::CvdModel;
use crate::error::{Error, Result};
use crate::preference::PreferenceShelf;

pub use field::{apply_to_field, render_png, ScalarField};

pub const FORMAT_VERSION: u32 = 1;

/// The reproducibility-relevant part of an [`OptimizerConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigSnapshot {
    pub seed: u64,
    pub weights: CostWeights,
    pub cvd: CvdModel,
}

impl From<&OptimizerConfig> for ConfigSnapshot {
    fn from(c: &OptimizerConfig) -> Self {
        ConfigSnapshot {
            seed: c.seed,
            weights: c.weights,
            cvd: c.cvd.clone(),
        }
    }
}

/// A colormap plus everything needed to reproduce or refine it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DocumentRepr", into = "DocumentRepr")]
pub struct ColormapDocument {
    pub colormap: Colormap,
    pub shelf: PreferenceShelf,
    pub config: Option<ConfigSnapshot>,
    pub cost: Option<CostBreakdown>,
}

#[derive(Serialize, Deserialize)]
struct DocumentRepr {
    format_version: u32,
    #[serde(with = "profile_field")]
    profile: Option<LuminanceProfile>,
    points: Vec<[f64; 3]>,
    /// Derived from the points; checked against them when present.
    #[serde(default)]
    hex: Option<Vec<String>>,
    #[serde(default)]
    shelf: PreferenceShelf,
    #[serde(default)]
    config: Option<ConfigSnapshot>,
    #[serde(default)]
    cost: Option<CostBreakdown>,
}

impl TryFrom<DocumentRepr> for ColormapDocument {
    type Error = Error;

    fn try_from(r: DocumentRepr) -> Result<Self> {
        if r.format_version != FORMAT_VERSION {
            return Err(Error::invalid(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                r.format_version
            )));
        }
        let colormap: Colormap = crate::colormap::ColormapRepr {
            profile: r.profile,
            points: r.points,
        }
        .try_into()?;
        let expected = colormap.hex_stops();
        let hex = r.hex.unwrap_or_else(|| expected.clone());
        if hex.len() != expected.len() {
            return Err(Error::Validation {
                index: hex.len().min(expected.len()),
                message: format!("{} hex stops for {} points", hex.len(), expected.len()),
            });
        }
        for (i, (got, want)) in hex.iter().zip(&expected).enumerate() {
            if !got.eq_ignore_ascii_case(want) {
                return Err(Error::Validation {
                    index: i,
                    message: format!("hex stop {got} does not match the point ({want})"),
                });
            }
        }
        Ok(ColormapDocument {
            colormap,
            shelf: r.shelf,
            config: r.config,
            cost: r.cost,
        })
    }
}

impl From<ColormapDocument> for DocumentRepr {
    fn from(d: ColormapDocument) -> Self {
        DocumentRepr {
            format_version: FORMAT_VERSION,
            profile: d.colormap.profile().copied(),
            points: d.colormap.points().iter().map(|p| p.to_array()).collect(),
            hex: Some(d.colormap.hex_stops()),
            shelf: d.shelf,
            config: d.config,
            cost: d.cost,
        }
    }
}

impl ColormapDocument {
    /// A bare document around `colormap`.
    pub fn new(colormap: Colormap) -> Self {
        ColormapDocument {
            colormap,
            shelf: PreferenceShelf::default(),
            config: None,
            cost: None,
        }
    }

    pub fn hex_stops(&self) -> Vec<String> {
        self.colormap.hex_stops()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
    HexList,
}

impl Format {
    /// Guesses from a file extension: `.json`, `.csv`, anything else is a
    /// hex list.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => Format::Json,
            Some(e) if e.eq_ignore_ascii_case("csv") => Format::Csv,
            _ => Format::HexList,
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "hex" | "hex-list" => Ok(Format::HexList),
            other => Err(Error::invalid(format!("unknown format {other:?}"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::HexList => "hex-list",
        })
    }
}

const CSV_HEADER: [&str; 7] = ["index", "L", "A", "B", "r", "g", "b"];

/// Encodes `doc`. Csv and hex-list carry the points only.
pub fn export(doc: &ColormapDocument, format: Format) -> Vec<u8> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(doc).expect("documents always serialize");
            out.push(b'\n');
            out
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER).expect("in-memory write");
            for (i, (p, c)) in doc.colormap.points().iter().zip(doc.colormap.srgb()).enumerate() {
                w.write_record([
                    i.to_string(),
                    p.l.to_string(),
                    p.a.to_string(),
                    p.b.to_string(),
                    c.r.to_string(),
                    c.g.to_string(),
                    c.b.to_string(),
                ])
                .expect("in-memory write");
            }
            w.into_inner().expect("in-memory flush")
        }
        Format::HexList => doc.hex_stops().join("\n").into_bytes(),
    }
}

pub fn import(bytes: &[u8], format: Format) -> Result<ColormapDocument> {
    let text = std::str::from_utf8(bytes).map_err(|e| {
        let line = bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count() + 1;
        Error::Parse {
            line,
            message: "input is not valid UTF-8".into(),
        }
    })?;
    match format {
        Format::Json => import_json(text),
        Format::Csv => import_csv(text),
        Format::HexList => import_hex(text),
    }
}

fn import_json(text: &str) -> Result<ColormapDocument> {
    // Parse structurally first so invariant failures keep their index.
    let repr: DocumentRepr = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: format!("{e}"),
    })?;
    ColormapDocument::try_from(repr)
}

fn import_csv(text: &str) -> Result<ColormapDocument> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header_ok = r
        .headers()
        .map(|h| h.iter().take(4).eq(CSV_HEADER.iter().take(4).copied()))
        .unwrap_or(false);
    if !header_ok {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header starting with {}", CSV_HEADER[..4].join(",")),
        });
    }
    let mut points = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        let num = |col: usize| -> Result<f64> {
            let field = rec.get(col).ok_or_else(|| Error::Parse {
                line,
                message: format!("missing column {}", CSV_HEADER[col]),
            })?;
            field.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("column {} is not a number: {field:?}", CSV_HEADER[col]),
            })
        };
        let index = num(0)?;
        if index != points.len() as f64 {
            return Err(Error::Parse {
                line,
                message: format!("expected index {}, found {index}", points.len()),
            });
        }
        points.push(LabColor::new(num(1)?, num(2)?, num(3)?));
    }
    Ok(ColormapDocument::new(Colormap::unconstrained(points)?))
}

fn import_hex(text: &str) -> Result<ColormapDocument> {
    let mut colors = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let s = raw.trim();
        if s.is_empty() || s.starts_with("//") {
            continue;
        }
        let c = SrgbColor::from_hex(s).map_err(|_| Error::Parse {
            line: k + 1,
            message: format!("not a #RRGGBB color: {s:?}"),
        })?;
        colors.push(c);
    }
    let points = colors.into_iter().map(srgb_to_lab).collect();
    Ok(ColormapDocument::new(Colormap::unconstrained(points)?))
}

pub fn read_document(path: &Path, format: Format) -> Result<ColormapDocument> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    import(&bytes, format)
}

pub fn write_document(path: &Path, doc: &ColormapDocument, format: Format) -> Result<()> {
    std::fs::write(path, export(doc, format)).map_err(|e| Error::io(path, e))
}
