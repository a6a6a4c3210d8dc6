//! Post-hoc colormap scores and the benchmark comparison sweep.

mod benchmark_data;
mod benchmarks;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::colormap::Colormap;
use crate::colorspace::{delta_e_2000, LabColor};
use crate::cost::{smoothness_cost, uniformity_cost, CostWeights};
use crate::cvd::CvdModel;
use crate::error::Result;

pub use benchmarks::{BenchmarkMap, Family};
pub use sweep::{
    benchmark_sweep, derive_seed, histogram, quantile, HistogramBin, MetricSummary, SweepParams,
    SweepRow, SweepSummary,
};

/// Mean pairwise ΔE2000 over all control-point pairs.
pub fn discriminability(points: &[LabColor]) -> f64 {
    let n = points.len();
    if n < 2 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            sum += delta_e_2000(points[i], points[j]);
        }
    }
    2.0 / (n * (n - 1)) as f64 * sum
}

/// Discriminability of the colors as seen under `model`.
pub fn cvd_discriminability(points: &[LabColor], model: &CvdModel) -> f64 {
    let simulated: Vec<LabColor> = points.iter().map(|&c| model.simulate(c)).collect();
    discriminability(&simulated)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub uniformity: f64,
    pub smoothness: f64,
    pub discriminability: f64,
    pub cvd_discriminability: f64,
    /// Share of discriminability kept under simulation; 1 when there is
    /// nothing to lose.
    pub retention: f64,
}

pub fn retention(discriminability: f64, cvd_discriminability: f64) -> f64 {
    if discriminability > 0.0 {
        cvd_discriminability / discriminability
    } else {
        1.0
    }
}

/// Scores a map at its native resolution with default weights.
pub fn evaluate(map: &Colormap, model: &CvdModel) -> Result<EvalReport> {
    evaluate_with(map, model, &CostWeights::default())
}

/// As [`evaluate`], with the smoothness weights taken from `weights`.
pub fn evaluate_with(map: &Colormap, model: &CvdModel, weights: &CostWeights) -> Result<EvalReport> {
    let points = map.points();
    let d = discriminability(points);
    let dc = cvd_discriminability(points, model);
    Ok(EvalReport {
        n: points.len(),
        uniformity: uniformity_cost(points)?,
        smoothness: smoothness_cost(points, weights)?,
        discriminability: d,
        cvd_discriminability: dc,
        retention: retention(d, dc),
    })
}
