use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageFormat, RgbImage};

use crate::colormap::Colormap;
use crate::colorspace::lab_to_srgb_clamped;
use crate::error::{Error, Result};

/// A row-major grid of finite scalars.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("field must be at least 1x1"));
        }
        if values.len() != width * height {
            return Err(Error::invalid(format!(
                "{} values for a {width}x{height} field",
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation {
                index: i,
                message: format!("field value {} is not finite", values[i]),
            });
        }
        Ok(ScalarField {
            width,
            height,
            values,
        })
    }

    /// Comma, semicolon or whitespace separated numbers, one grid row per
    /// line. Blank lines and `#` comments are skipped.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut width = None;
        let mut values = Vec::new();
        let mut height = 0;
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row: Vec<f64> = line
                .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| {
                    t.parse::<f64>().map_err(|_| Error::Parse {
                        line: k + 1,
                        message: format!("not a number: {t:?}"),
                    })
                })
                .collect::<Result<_>>()?;
            match width {
                None => width = Some(row.len()),
                Some(w) if w != row.len() => {
                    return Err(Error::Parse {
                        line: k + 1,
                        message: format!("row has {} values, expected {w}", row.len()),
                    })
                }
                _ => {}
            }
            values.extend(row);
            height += 1;
        }
        let width = width.ok_or(Error::Parse {
            line: 1,
            message: "field is empty".into(),
        })?;
        ScalarField::new(width, height, values)
    }

    /// An 8- or 16-bit grayscale PNG; values keep their integer levels.
    pub fn from_png(bytes: &[u8]) -> Result<Self> {
        let img = image::load_from_memory_with_format(bytes, ImageFormat::Png)?;
        let (w, h) = (img.width() as usize, img.height() as usize);
        let values: Vec<f64> = match img {
            DynamicImage::ImageLuma8(g) => g.into_raw().into_iter().map(f64::from).collect(),
            DynamicImage::ImageLumaA8(g) => g.pixels().map(|p| f64::from(p.0[0])).collect(),
            DynamicImage::ImageLuma16(g) => g.into_raw().into_iter().map(f64::from).collect(),
            DynamicImage::ImageLumaA16(g) => g.pixels().map(|p| f64::from(p.0[0])).collect(),
            other => {
                return Err(Error::invalid(format!(
                    "expected a grayscale PNG, got {:?}",
                    other.color()
                )))
            }
        };
        ScalarField::new(w, h, values)
    }

    /// Reads a `.png` as an image, anything else as a CSV grid.
    pub fn read(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let is_png = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("png"));
        if is_png {
            ScalarField::from_png(&bytes)
        } else {
            let text = std::str::from_utf8(&bytes).map_err(|_| Error::Parse {
                line: 1,
                message: "field file is not UTF-8 text".into(),
            })?;
            ScalarField::from_csv(text)
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.values
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }
}

/// Colors `field` through `map`. Values are normalized by `range` or by the
/// field's own min and max, clamped to `[0, 1]`, and interpolated in Lab.
/// A constant field (or an empty range) maps everything to the midpoint.
pub fn apply_to_field(map: &Colormap, field: &ScalarField, range: Option<(f64, f64)>) -> Result<RgbImage> {
    let (lo, hi) = match range {
        Some((lo, hi)) if !(lo.is_finite() && hi.is_finite()) => {
            return Err(Error::invalid("range bounds must be finite"));
        }
        Some(r) => r,
        None => field.min_max(),
    };
    let span = hi - lo;
    let mut img = RgbImage::new(field.width as u32, field.height as u32);
    for (px, &v) in img.pixels_mut().zip(&field.values) {
        let t = if span == 0.0 {
            0.5
        } else {
            ((v - lo) / span).clamp(0.0, 1.0)
        };
        px.0 = lab_to_srgb_clamped(map.sample(t)).to_rgb8();
    }
    Ok(img)
}

pub fn render_png(img: &RgbImage) -> Vec<u8> {
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .expect("PNG encoding into memory cannot fail");
    out.into_inner()
}
