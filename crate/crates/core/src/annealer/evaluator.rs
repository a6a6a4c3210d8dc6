//! Incremental objective evaluation for point moves.
//!
//! Caches adjacent ΔE2000 distances, simulated colors and confusion-pair
//! distances so a move at index `j` only recomputes what touches `j`. Every
//! term is assembled through the same functions as [`crate::cost`], so the
//! result is bit-identical to a full evaluation.

use crate::colorspace::{delta_e_2000, LabColor};
use crate::cost::{
    confusion_pairs, cvd_cost_from_distances, smoothness_cost, uniformity_from_distances,
    CostBreakdown, CostWeights,
};
use crate::cvd::CvdModel;

pub(crate) struct Evaluator<'a> {
    weights: &'a CostWeights,
    model: &'a CvdModel,
    points: Vec<LabColor>,
    simulated: Vec<LabColor>,
    adjacent: Vec<f64>,
    pairs: Vec<(usize, usize)>,
    pair_distances: Vec<f64>,
    pairs_of: Vec<Vec<usize>>,
    undo: Vec<Undo>,
}

struct Undo {
    index: usize,
    point: LabColor,
    simulated: LabColor,
    left: Option<f64>,
    right: Option<f64>,
    pair_distances: Vec<(usize, f64)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(points: Vec<LabColor>, model: &'a CvdModel, weights: &'a CostWeights) -> Self {
        // Pair membership depends only on L*, which never changes.
        let pairs = confusion_pairs(&points);
        let mut pairs_of = vec![Vec::new(); points.len()];
        for (k, &(i, j)) in pairs.iter().enumerate() {
            pairs_of[i].push(k);
            pairs_of[j].push(k);
        }
        let simulated: Vec<LabColor> = if pairs.is_empty() {
            points.clone()
        } else {
            points.iter().map(|&c| model.simulate(c)).collect()
        };
        let adjacent = points.windows(2).map(|w| delta_e_2000(w[0], w[1])).collect();
        let pair_distances = pairs
            .iter()
            .map(|&(i, j)| weights.pair_metric.distance(simulated[i], simulated[j]))
            .collect();
        Evaluator {
            weights,
            model,
            points,
            simulated,
            adjacent,
            pairs,
            pair_distances,
            pairs_of,
            undo: Vec::new(),
        }
    }

    pub fn points(&self) -> &[LabColor] {
        &self.points
    }

    pub fn cost(&self) -> CostBreakdown {
        let u = uniformity_from_distances(&self.adjacent);
        let s = smoothness_cost(&self.points, self.weights).expect("evaluator maps have >= 5 points");
        let c = cvd_cost_from_distances(&self.pairs, &self.pair_distances, self.points.len(), self.weights.k);
        CostBreakdown::combine(u, s, c, self.weights)
    }

    /// Moves point `index` to `color`. [`Evaluator::undo`] restores every
    /// point moved since the last commit.
    pub fn apply(&mut self, index: usize, color: LabColor) {
        let n = self.points.len();
        let mut undo = Undo {
            index,
            point: self.points[index],
            simulated: self.simulated[index],
            left: None,
            right: None,
            pair_distances: Vec::with_capacity(self.pairs_of[index].len()),
        };
        self.points[index] = color;
        if index > 0 {
            undo.left = Some(self.adjacent[index - 1]);
            self.adjacent[index - 1] = delta_e_2000(self.points[index - 1], color);
        }
        if index + 1 < n {
            undo.right = Some(self.adjacent[index]);
            self.adjacent[index] = delta_e_2000(color, self.points[index + 1]);
        }
        if !self.pairs_of[index].is_empty() {
            self.simulated[index] = self.model.simulate(color);
            for &k in &self.pairs_of[index] {
                let (i, j) = self.pairs[k];
                undo.pair_distances.push((k, self.pair_distances[k]));
                self.pair_distances[k] = self
                    .weights
                    .pair_metric
                    .distance(self.simulated[i], self.simulated[j]);
            }
        } else {
            self.simulated[index] = color;
        }
        self.undo.push(undo);
    }

    pub fn undo(&mut self) {
        while let Some(u) = self.undo.pop() {
            self.points[u.index] = u.point;
            self.simulated[u.index] = u.simulated;
            if let Some(d) = u.left {
                self.adjacent[u.index - 1] = d;
            }
            if let Some(d) = u.right {
                self.adjacent[u.index] = d;
            }
            for (k, d) in u.pair_distances {
                self.pair_distances[k] = d;
            }
        }
    }

    /// Drops the pending undo records.
    pub fn commit(&mut self) {
        self.undo.clear();
    }
}
