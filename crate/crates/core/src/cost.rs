//! The objective: weighted uniformity, smoothness and CVD-separability terms.

use serde::{Deserialize, Serialize};

use crate::colorspace::{delta_e_2000, resample, LabColor};
use crate::cvd::CvdModel;
use crate::error::{Error, Result};

/// Two control points share an L\* slice when their lightness differs by
/// less than this.
pub const SAME_SLICE_EPSILON: f64 = 0.5;

/// Distance used between simulated colors in the separability term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairMetric {
    #[default]
    Ciede2000,
    Euclidean,
}

impl PairMetric {
    pub fn distance(self, a: LabColor, b: LabColor) -> f64 {
        match self {
            PairMetric::Ciede2000 => delta_e_2000(a, b),
            PairMetric::Euclidean => a.distance(&b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostWeights {
    pub uniformity: f64,
    pub smoothness: f64,
    pub cvd: f64,
    /// Weight of curvature at full resolution.
    pub smoothness_fine: f64,
    /// Weight of curvature at half resolution; the hue-restraint control.
    pub smoothness_coarse: f64,
    /// Separability threshold for the most distant pair.
    pub k: f64,
    pub pair_metric: PairMetric,
}

impl Default for CostWeights {
    fn default() -> Self {
        CostWeights {
            uniformity: 0.85,
            smoothness: 1.0,
            cvd: 2.0,
            smoothness_fine: 1.0,
            smoothness_coarse: 0.25,
            k: 70.0,
            pair_metric: PairMetric::Ciede2000,
        }
    }
}

impl CostWeights {
    /// Sets the coarse smoothness weight, clamped to `[0, 1]`.
    pub fn with_coarse_smoothness(mut self, w: f64) -> Self {
        self.smoothness_coarse = w.clamp(0.0, 1.0);
        self
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("uniformity", self.uniformity),
            ("smoothness", self.smoothness),
            ("cvd", self.cvd),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("weight {name} must be >= 0, got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.smoothness_coarse) {
            return Err(Error::invalid(format!(
                "coarse smoothness weight must be in [0, 1], got {}",
                self.smoothness_coarse
            )));
        }
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(Error::invalid(format!("K must be > 0, got {}", self.k)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostBreakdown {
    pub uniformity: f64,
    pub smoothness: f64,
    pub cvd: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn combine(uniformity: f64, smoothness: f64, cvd: f64, w: &CostWeights) -> Self {
        CostBreakdown {
            uniformity,
            smoothness,
            cvd,
            total: w.uniformity * uniformity + w.smoothness * smoothness + w.cvd * cvd,
        }
    }
}

pub fn adjacent_distances(points: &[LabColor]) -> Vec<f64> {
    points
        .windows(2)
        .map(|w| delta_e_2000(w[0], w[1]))
        .collect()
}

/// Coefficient of variation of adjacent distances, with `n - 2` as the
/// variance divisor (`n` control points, `n - 1` distances).
pub fn uniformity_from_distances(distances: &[f64]) -> f64 {
    let m = distances.len();
    let mean = distances.iter().sum::<f64>() / m as f64;
    if mean == 0.0 {
        return 0.0;
    }
    let ss: f64 = distances.iter().map(|d| (d - mean) * (d - mean)).sum();
    (ss / (m - 1) as f64).sqrt() / mean
}

pub fn uniformity_cost(points: &[LabColor]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "uniformity needs at least 3 points, got {}",
            points.len()
        )));
    }
    Ok(uniformity_from_distances(&adjacent_distances(points)))
}

fn bend(prev: LabColor, here: LabColor, next: LabColor) -> f64 {
    let u = [here.l - prev.l, here.a - prev.a, here.b - prev.b];
    let v = [next.l - here.l, next.a - here.a, next.b - here.b];
    let nu = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let nv = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    let cos = ((u[0] * v[0] + u[1] * v[1] + u[2] * v[2]) / (nu * nv)).clamp(-1.0, 1.0);
    0.5 * (1.0 - cos)
}

/// Mean normalized turning angle over interior points, in `[0, 1]`.
pub fn curvature(points: &[LabColor]) -> Result<f64> {
    if points.len() < 3 {
        return Err(Error::invalid(format!(
            "curvature needs at least 3 points, got {}",
            points.len()
        )));
    }
    let sum: f64 = points.windows(3).map(|w| bend(w[0], w[1], w[2])).sum();
    Ok(sum / (points.len() - 2) as f64)
}

/// Curvature at full resolution plus weighted curvature at half resolution.
/// A half-resolution curve of two points is straight.
pub fn smoothness_cost(points: &[LabColor], w: &CostWeights) -> Result<f64> {
    if points.len() < 5 {
        return Err(Error::invalid(format!(
            "smoothness needs at least 5 points, got {}",
            points.len()
        )));
    }
    let fine = curvature(points)?;
    let coarse_points = resample(points, points.len() / 2)?;
    let coarse = if coarse_points.len() < 3 {
        0.0
    } else {
        curvature(&coarse_points)?
    };
    Ok(w.smoothness_fine * fine + w.smoothness_coarse * coarse)
}

/// Index pairs `(i, j)`, `i < j`, lying on the same L\* slice.
pub fn confusion_pairs(points: &[LabColor]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if (points[i].l - points[j].l).abs() < SAME_SLICE_EPSILON {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Separability threshold relaxed exponentially for pairs close in sequence.
pub fn attenuated_threshold(k: f64, i: usize, j: usize, n: usize) -> f64 {
    let gap = i.abs_diff(j) as f64 / (n - 1) as f64;
    k * (gap.exp() - 1.0) / (std::f64::consts::E - 1.0)
}

pub fn pair_penalty(distance: f64, threshold: f64) -> f64 {
    if distance >= threshold {
        0.0
    } else {
        1.0 - distance / threshold
    }
}

/// Mean penalty over `pairs`, given each pair's simulated distance.
pub fn cvd_cost_from_distances(pairs: &[(usize, usize)], distances: &[f64], n: usize, k: f64) -> f64 {
    if pairs.is_empty() {
        return 0.0;
    }
    let sum: f64 = pairs
        .iter()
        .zip(distances)
        .map(|(&(i, j), &d)| pair_penalty(d, attenuated_threshold(k, i, j, n)))
        .sum();
    sum / pairs.len() as f64
}

pub fn cvd_cost(points: &[LabColor], model: &CvdModel, w: &CostWeights) -> f64 {
    let pairs = confusion_pairs(points);
    if pairs.is_empty() {
        return 0.0;
    }
    let simulated: Vec<LabColor> = points.iter().map(|&c| model.simulate(c)).collect();
    let distances: Vec<f64> = pairs
        .iter()
        .map(|&(i, j)| w.pair_metric.distance(simulated[i], simulated[j]))
        .collect();
    cvd_cost_from_distances(&pairs, &distances, points.len(), w.k)
}

pub fn total_cost(points: &[LabColor], model: &CvdModel, w: &CostWeights) -> Result<CostBreakdown> {
    let u = uniformity_cost(points)?;
    let s = smoothness_cost(points, w)?;
    let c = cvd_cost(points, model, w);
    Ok(CostBreakdown::combine(u, s, c, w))
}
