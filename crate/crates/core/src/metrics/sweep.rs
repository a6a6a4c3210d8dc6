use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, BenchmarkMap, EvalReport, Family};
use crate::annealer::{optimize, LuminanceProfile, OptimizerConfig, ProfileKind};
use crate::cvd::CvdModel;
use crate::error::{Error, Result};
use crate::preference::PreferenceShelf;

/// One cell of the generated-vs-benchmark comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub count: usize,
    pub family: Family,
    /// Coarse smoothness weight used during optimization; 0.9 restrains hue
    /// variation, 0.25 is the default.
    pub colorfulness: f64,
    /// Optimize against `eval_model` (true) or the identity model (false).
    pub cvd: bool,
    pub seed: u64,
    pub iter_count: usize,
    /// Model used both for CVD-aware optimization and for scoring.
    pub eval_model: CvdModel,
}

impl SweepParams {
    pub fn new(count: usize, family: Family, colorfulness: f64, cvd: bool, seed: u64) -> Self {
        SweepParams {
            count,
            family,
            colorfulness,
            cvd,
            seed,
            iter_count: OptimizerConfig::default().iter_count,
            eval_model: CvdModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub seed: u64,
    pub family: Family,
    pub colorfulness: f64,
    pub cvd: bool,
    pub l_min: f64,
    pub l_max: f64,
    pub report: EvalReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    pub mean: f64,
}

impl MetricSummary {
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        MetricSummary {
            min: v[0],
            q25: quantile(&v, 0.25),
            median: quantile(&v, 0.5),
            q75: quantile(&v, 0.75),
            max: v[v.len() - 1],
            mean: v.iter().sum::<f64>() / v.len() as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub params: SweepParams,
    pub rows: Vec<SweepRow>,
    pub uniformity: MetricSummary,
    pub smoothness: MetricSummary,
    pub discriminability: MetricSummary,
    pub cvd_discriminability: MetricSummary,
    pub retention: MetricSummary,
    /// Benchmarks of the comparable families. Generated maps and benchmarks
    /// are both scored at the default weights, whatever the colorfulness
    /// used for optimization.
    pub benchmarks: Vec<(BenchmarkMap, EvalReport)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

/// Linearly interpolated quantile of already sorted values.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    if i + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    let frac = pos - i as f64;
    sorted[i] + frac * (sorted[i + 1] - sorted[i])
}

pub fn histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    if values.is_empty() || bins == 0 {
        return Vec::new();
    }
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|k| HistogramBin {
            lo: lo + k as f64 * width,
            hi: lo + (k + 1) as f64 * width,
            count: 0,
        })
        .collect();
    for &v in values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        out[k].count += 1;
    }
    out
}

/// SplitMix64 step: independent per-map seeds from one sweep seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn generate_one(params: &SweepParams, index: usize) -> Result<SweepRow> {
    let seed = derive_seed(params.seed, index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005E_ED0F_1A7E);
    let l_min = rng.random_range(5.0..15.0);
    let l_max = rng.random_range(85.0..95.0);
    let kind = match params.family {
        Family::Sequential => ProfileKind::Linear,
        Family::Diverging => ProfileKind::Diverging,
        Family::Rainbow => {
            return Err(Error::invalid("sweeps generate sequential or diverging maps"));
        }
    };
    let profile = LuminanceProfile::new(kind, false, l_min, l_max, kind.default_points())?;
    let mut config = OptimizerConfig {
        iter_count: params.iter_count,
        seed,
        cvd: if params.cvd {
            params.eval_model.clone()
        } else {
            CvdModel::identity()
        },
        ..OptimizerConfig::default()
    };
    config.weights = config.weights.with_coarse_smoothness(params.colorfulness);
    let outcome = optimize(profile, &config, &PreferenceShelf::default())?;
    let report = evaluate(&outcome.colormap, &params.eval_model)?;
    Ok(SweepRow {
        seed,
        family: params.family,
        colorfulness: params.colorfulness,
        cvd: params.cvd,
        l_min,
        l_max,
        report,
    })
}

/// Generates `count` maps with randomized L\* range and summarizes their
/// scores next to the comparable benchmarks.
pub fn benchmark_sweep(params: &SweepParams) -> Result<SweepSummary> {
    if params.count == 0 {
        return Err(Error::invalid("sweep count must be at least 1"));
    }
    let rows = (0..params.count)
        .into_par_iter()
        .map(|i| generate_one(params, i))
        .collect::<Result<Vec<_>>>()?;

    let col = |f: fn(&EvalReport) -> f64| {
        let v: Vec<f64> = rows.iter().map(|r| f(&r.report)).collect();
        MetricSummary::of(&v)
    };
    let families: &[Family] = match params.family {
        Family::Sequential => &[Family::Sequential],
        _ => &[Family::Diverging, Family::Rainbow],
    };
    let benchmarks = families
        .iter()
        .flat_map(|&f| BenchmarkMap::of_family(f))
        .map(|b| Ok((b, evaluate(&b.scoring_colormap(), &params.eval_model)?)))
        .collect::<Result<Vec<_>>>()?;

    Ok(SweepSummary {
        uniformity: col(|r| r.uniformity),
        smoothness: col(|r| r.smoothness),
        discriminability: col(|r| r.discriminability),
        cvd_discriminability: col(|r| r.cvd_discriminability),
        retention: col(|r| r.retention),
        params: params.clone(),
        rows,
        benchmarks,
    })
}

impl SweepSummary {
    /// One row per generated map.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "seed",
            "family",
            "colorfulness",
            "cvd",
            "uniformity",
            "smoothness",
            "discriminability",
            "cvd_discriminability",
            "retention",
        ])
        .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.seed.to_string(),
                r.family.to_string(),
                r.colorfulness.to_string(),
                if r.cvd { "on" } else { "off" }.to_string(),
                r.report.uniformity.to_string(),
                r.report.smoothness.to_string(),
                r.report.discriminability.to_string(),
                r.report.cvd_discriminability.to_string(),
                r.report.retention.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv is utf-8")
    }

    pub fn histograms(&self, bins: usize) -> serde_json::Value {
        let col = |f: fn(&EvalReport) -> f64| {
            let v: Vec<f64> = self.rows.iter().map(|r| f(&r.report)).collect();
            histogram(&v, bins)
        };
        serde_json::json!({
            "uniformity": col(|r| r.uniformity),
            "smoothness": col(|r| r.smoothness),
            "discriminability": col(|r| r.discriminability),
            "cvd_discriminability": col(|r| r.cvd_discriminability),
            "retention": col(|r| r.retention),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.25), 2.0);
        assert_eq!(quantile(&[1.0, 2.0], 0.5), 1.5);
        assert_eq!(quantile(&[7.0], 0.9), 7.0);
    }

    #[test]
    fn histogram_counts_everything() {
        let v: Vec<f64> = (0..100).map(|i| i as f64 / 10.0).collect();
        let h = histogram(&v, 7);
        assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), 100);
        assert_eq!(histogram(&[3.0, 3.0], 4)[0].count, 2);
    }

    #[test]
    fn derived_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(5, i)).collect();
        assert_eq!(s.len(), 1000);
    }

    #[test]
    fn single_map_summary_is_its_report() {
        let params = SweepParams {
            iter_count: 50,
            ..SweepParams::new(1, Family::Sequential, 0.9, true, 3)
        };
        let s = benchmark_sweep(&params).unwrap();
        assert_eq!(s.rows.len(), 1);
        let r = s.rows[0].report;
        for (m, v) in [(s.uniformity, r.uniformity), (s.smoothness, r.smoothness), (s.retention, r.retention)] {
            assert_eq!(m.min, v);
            assert_eq!(m.median, v);
            assert_eq!(m.max, v);
            assert_eq!(m.mean, v);
        }
        assert!((5.0..15.0).contains(&s.rows[0].l_min));
        assert!((85.0..95.0).contains(&s.rows[0].l_max));
        assert_eq!(s.benchmarks.len(), 3);
        let csv = s.to_csv();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.starts_with("seed,family,colorfulness,cvd,uniformity"));
    }

    #[test]
    fn sweep_is_deterministic() {
        let params = SweepParams {
            iter_count: 30,
            ..SweepParams::new(3, Family::Diverging, 0.25, false, 9)
        };
        assert_eq!(benchmark_sweep(&params).unwrap(), benchmark_sweep(&params).unwrap());
        assert!(benchmark_sweep(&SweepParams { count: 0, ..params }).is_err());
    }
}
