//! Simulated annealing over control-point chromaticity.
//!
//! Lightness is fixed by a [`LuminanceProfile`] at initialization and never
//! written again. Most iterations move one point in the A-B plane along a
//! random direction blended with the preference bias; the rest shift a run
//! of neighbouring points together. Every move keeps the points in gamut.

mod evaluator;
mod profile;

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::colormap::Colormap;
use crate::colorspace::{in_gamut, LabColor};
use crate::cost::{CostBreakdown, CostWeights};
use crate::cvd::CvdModel;
use crate::error::{Error, Result};
use crate::preference::{blend_direction, PreferenceShelf};

pub use profile::{parse_profile_name, profile_from_name, LuminanceProfile, ProfileKind, DEFAULT_L_MAX, DEFAULT_L_MIN};

use evaluator::Evaluator;

/// Random chromatic values are drawn from `[-CHROMA_BOX, CHROMA_BOX]^2`.
pub const CHROMA_BOX: f64 = 128.0;

/// Default upper bound on a perturbation's A-B magnitude.
pub const DEFAULT_STEP_SIZE: f64 = 0.5;

/// Default share of perturbations that shift a run of neighbouring points.
pub const DEFAULT_SEGMENT_MOVES: f64 = 0.2;

/// Direction and magnitude redraws before a perturbation gives up and
/// leaves the point in place.
pub const MAX_PERTURB_ATTEMPTS: usize = 100;

/// What the run returns once the ladder is exhausted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResultTracking {
    /// Lowest-cost state ever visited.
    #[default]
    BestEver,
    /// Whatever state the walk ended on.
    Final,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub t_init: f64,
    pub t_end: f64,
    /// Cooling factor applied after each rung.
    pub alpha: f64,
    /// Perturbations per temperature rung.
    pub iter_count: usize,
    pub weights: CostWeights,
    pub cvd: CvdModel,
    /// Largest A-B offset of a single perturbation, in Lab units. Steps much
    /// above the L\* spacing of neighbouring points freeze runs into kinked
    /// curves once the temperature drops.
    pub step_size: f64,
    /// Share of perturbations that shift a run of 2 to n/2 neighbouring
    /// points by one common A-B offset instead of moving a single point.
    pub segment_moves: f64,
    pub seed: u64,
    /// Starting temperature for warm restarts.
    pub restart_temp: f64,
    pub tracking: ResultTracking,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            t_init: 1.0,
            t_end: 0.0001,
            alpha: 0.925,
            iter_count: 5500,
            weights: CostWeights::default(),
            cvd: CvdModel::default(),
            step_size: DEFAULT_STEP_SIZE,
            segment_moves: DEFAULT_SEGMENT_MOVES,
            seed: 0,
            restart_temp: 0.1,
            tracking: ResultTracking::BestEver,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_end < self.t_init && self.t_init.is_finite()) {
            return Err(Error::invalid(format!(
                "temperatures must satisfy 0 < t_end < t_init, got t_init={} t_end={}",
                self.t_init, self.t_end
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::invalid(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        if self.iter_count == 0 {
            return Err(Error::invalid("iter_count must be at least 1"));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::invalid(format!("step_size must be > 0, got {}", self.step_size)));
        }
        if !(0.0..=1.0).contains(&self.segment_moves) {
            return Err(Error::invalid(format!(
                "segment_moves must be in [0, 1], got {}",
                self.segment_moves
            )));
        }
        if !(self.restart_temp > self.t_end && self.restart_temp.is_finite()) {
            return Err(Error::invalid(format!(
                "restart_temp must exceed t_end, got {}",
                self.restart_temp
            )));
        }
        self.weights.validate()
    }

    /// Number of temperature rungs from `start` down to `t_end`.
    pub fn rungs_from(&self, start: f64) -> usize {
        let r = ((self.t_end / start).ln() / self.alpha.ln()).ceil();
        r.max(1.0) as usize
    }
}

/// Shared flag polled between iterations.
#[derive(Debug, Clone, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::Relaxed);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::Relaxed)
    }
}

/// Snapshot emitted at the end of every temperature rung.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealProgress {
    pub rung: usize,
    pub rungs: usize,
    pub temperature: f64,
    pub iterations: u64,
    pub current: CostBreakdown,
    pub best_cost: CostBreakdown,
    pub best: Colormap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealOutcome {
    pub colormap: Colormap,
    pub cost: CostBreakdown,
    pub seed: u64,
    pub rungs: usize,
    pub iterations: u64,
    pub cancelled: bool,
}

/// Pins L\* per index and rejection-samples A and B until in gamut.
pub fn random_init(profile: &LuminanceProfile, rng: &mut impl Rng) -> Colormap {
    let points = profile
        .values()
        .into_iter()
        .map(|l| random_chroma(l, rng))
        .collect();
    Colormap::from_parts_unchecked(points, Some(*profile))
}

fn random_chroma(l: f64, rng: &mut impl Rng) -> LabColor {
    // Near L* = 0 or 100 the gamut slice collapses to the neutral axis;
    // shrinking the box keeps the search finite.
    let mut half = CHROMA_BOX;
    loop {
        for _ in 0..1000 {
            let c = LabColor::new(l, rng.random_range(-half..=half), rng.random_range(-half..=half));
            if in_gamut(c) {
                return c;
            }
        }
        half *= 0.5;
        if half < 1e-9 {
            return LabColor::new(l, 0.0, 0.0);
        }
    }
}

fn random_unit(rng: &mut impl Rng) -> [f64; 3] {
    let theta = rng.random::<f64>() * std::f64::consts::TAU;
    [0.0, theta.cos(), theta.sin()]
}

/// Candidate position for point `index` (0-based) of an `n`-point map, or
/// `None` if no in-gamut move was found.
pub fn perturb_point(
    current: LabColor,
    index: usize,
    n: usize,
    shelf: &PreferenceShelf,
    rng: &mut impl Rng,
    step_size: f64,
) -> Option<LabColor> {
    let bias = shelf.bias(index + 1, current, n);
    for _ in 0..MAX_PERTURB_ATTEMPTS {
        let o = blend_direction(random_unit(rng), bias);
        // (0, step_size]
        let magnitude = step_size * (1.0 - rng.random::<f64>());
        let c = LabColor::new(current.l, current.a + magnitude * o[1], current.b + magnitude * o[2]);
        if in_gamut(c) {
            return Some(c);
        }
    }
    None
}

/// Range of points and the A-B offset of a rigid segment move around
/// `index`, or `None` if the shift would leave the gamut.
pub fn perturb_segment(
    points: &[LabColor],
    index: usize,
    rng: &mut impl Rng,
    step_size: f64,
) -> Option<(std::ops::Range<usize>, [f64; 2])> {
    let n = points.len();
    let len = rng.random_range(2..=(n / 2).max(2));
    let lo = index.min(n - len);
    let o = random_unit(rng);
    let magnitude = step_size * (1.0 - rng.random::<f64>());
    let offset = [magnitude * o[1], magnitude * o[2]];
    let range = lo..lo + len;
    points[range.clone()]
        .iter()
        .all(|c| in_gamut(LabColor::new(c.l, c.a + offset[0], c.b + offset[1])))
        .then_some((range, offset))
}

/// Returns a copy of `map` with point `index` perturbed.
pub fn perturb(
    map: &Colormap,
    index: usize,
    shelf: &PreferenceShelf,
    rng: &mut impl Rng,
    step_size: f64,
) -> Colormap {
    let mut points = map.points().to_vec();
    if let Some(c) = perturb_point(points[index], index, points.len(), shelf, rng, step_size) {
        points[index] = c;
    }
    Colormap::from_parts_unchecked(points, map.profile().copied())
}

/// Always accepts improvements; accepts a worse state with probability
/// `1 / (1 + e^(delta / t))`.
pub fn accept(delta: f64, temperature: f64, rng: &mut impl Rng) -> bool {
    delta <= 0.0 || rng.random::<f64>() < 1.0 / (1.0 + (delta / temperature).exp())
}

/// One annealing run. Build with [`Optimizer::new`], then [`Optimizer::run`].
pub struct Optimizer<'a> {
    profile: LuminanceProfile,
    config: &'a OptimizerConfig,
    shelf: &'a PreferenceShelf,
    initial: Option<Colormap>,
    cancel: Option<CancelToken>,
}

impl<'a> Optimizer<'a> {
    pub fn new(profile: LuminanceProfile, config: &'a OptimizerConfig, shelf: &'a PreferenceShelf) -> Self {
        Optimizer {
            profile,
            config,
            shelf,
            initial: None,
            cancel: None,
        }
    }

    /// Warm start from `map`, beginning at the restart temperature.
    pub fn warm_start(mut self, map: Colormap) -> Self {
        self.initial = Some(map);
        self
    }

    pub fn cancel_token(mut self, token: CancelToken) -> Self {
        self.cancel = Some(token);
        self
    }

    pub fn run(self, mut progress: impl FnMut(&AnnealProgress)) -> Result<AnnealOutcome> {
        let cfg = self.config;
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let n = self.profile.len();

        let (start_temp, init) = match self.initial {
            Some(map) => {
                if map.profile() != Some(&self.profile) {
                    return Err(Error::invalid("warm-start map does not use the requested profile"));
                }
                map.validate()?;
                (cfg.restart_temp.min(cfg.t_init), map)
            }
            None => (cfg.t_init, random_init(&self.profile, &mut rng)),
        };

        let rungs = cfg.rungs_from(start_temp);
        let mut eval = Evaluator::new(init.points().to_vec(), &cfg.cvd, &cfg.weights);
        let mut current = eval.cost();
        let mut best_points = eval.points().to_vec();
        let mut best = current;
        let mut iterations = 0u64;
        let mut cancelled = false;

        'ladder: for rung in 0..rungs {
            let temperature = start_temp * cfg.alpha.powi(rung as i32);
            for _ in 0..cfg.iter_count {
                if self.cancel.as_ref().is_some_and(CancelToken::is_cancelled) {
                    cancelled = true;
                    break 'ladder;
                }
                iterations += 1;
                let j = rng.random_range(0..n);
                if rng.random::<f64>() < cfg.segment_moves {
                    let Some((range, [da, db])) = perturb_segment(eval.points(), j, &mut rng, cfg.step_size) else {
                        continue;
                    };
                    for k in range {
                        let c = eval.points()[k];
                        eval.apply(k, LabColor::new(c.l, c.a + da, c.b + db));
                    }
                } else {
                    let Some(candidate) =
                        perturb_point(eval.points()[j], j, n, self.shelf, &mut rng, cfg.step_size)
                    else {
                        continue;
                    };
                    eval.apply(j, candidate);
                }
                let proposed = eval.cost();
                if accept(proposed.total - current.total, temperature, &mut rng) {
                    eval.commit();
                    current = proposed;
                    if current.total < best.total {
                        best = current;
                        best_points.copy_from_slice(eval.points());
                    }
                } else {
                    eval.undo();
                }
            }
            progress(&AnnealProgress {
                rung,
                rungs,
                temperature,
                iterations,
                current,
                best_cost: best,
                best: Colormap::from_parts_unchecked(best_points.clone(), Some(self.profile)),
            });
        }

        let (points, cost) = match cfg.tracking {
            ResultTracking::BestEver => (best_points, best),
            ResultTracking::Final => (eval.points().to_vec(), current),
        };
        Ok(AnnealOutcome {
            colormap: Colormap::from_parts_unchecked(points, Some(self.profile)),
            cost,
            seed: cfg.seed,
            rungs,
            iterations,
            cancelled,
        })
    }
}

/// Convenience wrapper: a full run from a random start, no progress sink.
pub fn optimize(
    profile: LuminanceProfile,
    config: &OptimizerConfig,
    shelf: &PreferenceShelf,
) -> Result<AnnealOutcome> {
    Optimizer::new(profile, config, shelf).run(|_| {})
}

/// Warm restart from a previous solution with an updated shelf.
pub fn refine(previous: &Colormap, config: &OptimizerConfig, shelf: &PreferenceShelf) -> Result<AnnealOutcome> {
    let profile = *previous
        .profile()
        .ok_or_else(|| Error::invalid("only profile-pinned colormaps can be refined"))?;
    Optimizer::new(profile, config, shelf)
        .warm_start(previous.clone())
        .run(|_| {})
}
