//! Object-to-sensor pairing.
//!
//! The raw stage solves a maximum-weight assignment over the current similarity
//! scores. The refined stage counts how often each pair was chosen by the raw
//! stage and solves the assignment again over `log2(1 + count)`.

mod hungarian;

pub use hungarian::max_weight_assignment;

use std::collections::{BTreeMap, BTreeSet};

use crate::model::{SensorId, TraceId};
use crate::similarity::SimilarityMatrix;

/// A one-to-one matching between row and column identifiers.
#[derive(Clone, Debug, PartialEq)]
pub struct Matching<R, C> {
    /// Sorted by (row, col). Every row and every column appears at most once.
    pub pairs: Vec<(R, C)>,
    pub objective: f64,
}

impl<R, C> Default for Matching<R, C> {
    fn default() -> Self {
        Matching { pairs: Vec::new(), objective: 0.0 }
    }
}

impl<R: PartialEq, C: PartialEq> Matching<R, C> {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn col_of(&self, row: &R) -> Option<&C> {
        self.pairs.iter().find(|(r, _)| r == row).map(|(_, c)| c)
    }
}

/// Per-frame raw-stage result.
pub type Assignment = Matching<TraceId, SensorId>;
/// Per-frame refined-stage result.
pub type RefinedAssignment = Matching<TraceId, SensorId>;

fn clean(w: f64) -> f64 {
    debug_assert!(!(w < 0.0), "negative weight {w}");
    if w.is_finite() && w > 0.0 {
        w
    } else {
        0.0
    }
}

fn optimum(weights: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> f64 {
    if rows.is_empty() || cols.is_empty() {
        return 0.0;
    }
    let sub: Vec<Vec<f64>> = rows.iter().map(|&r| cols.iter().map(|&c| weights[r][c]).collect()).collect();
    max_weight_assignment(&sub, cols.len()).1
}

/// Maximum-weight matching of a dense matrix. Zero-weight cells never pair.
/// Among optimal matchings the lexicographically smallest pair list is chosen,
/// by fixing rows in order to the smallest column that keeps the optimum.
fn solve_dense(weights: &[Vec<f64>], cols: usize) -> Vec<Option<usize>> {
    let rows = weights.len();
    let all_rows: Vec<usize> = (0..rows).collect();
    let all_cols: Vec<usize> = (0..cols).collect();
    let best = optimum(weights, &all_rows, &all_cols);
    let tol = 1e-9 * best.max(1.0);

    let mut chosen = vec![None; rows];
    let mut free_cols = all_cols;
    let mut fixed_value = 0.0;
    for r in 0..rows {
        let rest: Vec<usize> = (r + 1..rows).collect();
        let mut decided = false;
        for (k, &c) in free_cols.iter().enumerate() {
            let w = weights[r][c];
            if w <= 0.0 {
                continue;
            }
            let mut remaining = free_cols.clone();
            remaining.remove(k);
            if fixed_value + w + optimum(weights, &rest, &remaining) >= best - tol {
                chosen[r] = Some(c);
                fixed_value += w;
                free_cols = remaining;
                decided = true;
                break;
            }
        }
        if !decided {
            debug_assert!(fixed_value + optimum(weights, &rest, &free_cols) >= best - tol);
        }
    }
    chosen
}

/// Maximum-total-weight one-to-one matching. Missing pairs weigh 0, and pairs of
/// weight 0 are left out of the result (the row stays unpaired).
pub fn solve_lsap<R, C>(weights: &BTreeMap<(R, C), f64>) -> Matching<R, C>
where
    R: Ord + Clone,
    C: Ord + Clone,
{
    let rows: Vec<R> = weights.keys().map(|(r, _)| r.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let cols: Vec<C> = weights.keys().map(|(_, c)| c.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let col_index: BTreeMap<&C, usize> = cols.iter().enumerate().map(|(i, c)| (c, i)).collect();
    let row_index: BTreeMap<&R, usize> = rows.iter().enumerate().map(|(i, r)| (r, i)).collect();
    let mut dense = vec![vec![0.0; cols.len()]; rows.len()];
    for ((r, c), &w) in weights {
        dense[row_index[r]][col_index[c]] = clean(w);
    }

    let mut matching = Matching::default();
    for (r, c) in solve_dense(&dense, cols.len()).into_iter().enumerate() {
        if let Some(c) = c {
            matching.objective += dense[r][c];
            matching.pairs.push((rows[r].clone(), cols[c].clone()));
        }
    }
    matching
}

/// Raw stage: assignment over the current similarity scores.
pub fn raw_pair(sim: &SimilarityMatrix) -> Assignment {
    solve_lsap(&sim.scores)
}

/// Accumulated raw pairing counts.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct RefinedState {
    pub counts: BTreeMap<(TraceId, SensorId), u64>,
    pub frames_processed: u64,
}

impl RefinedState {
    pub fn count(&self, trace: &TraceId, sensor: &SensorId) -> u64 {
        self.counts.get(&(trace.clone(), sensor.clone())).copied().unwrap_or(0)
    }

    /// Drops the counts of traces that will never be seen again.
    pub fn forget_trace(&mut self, trace: &TraceId) {
        self.counts.retain(|(t, _), _| t != trace);
    }
}

pub fn update_rsim(state: &mut RefinedState, raw: &Assignment) {
    for (trace, sensor) in &raw.pairs {
        *state.counts.entry((trace.clone(), sensor.clone())).or_insert(0) += 1;
    }
    state.frames_processed += 1;
}

fn log_weights<'a>(
    counts: impl Iterator<Item = (&'a (TraceId, SensorId), &'a u64)>,
) -> BTreeMap<(TraceId, SensorId), f64> {
    counts
        .filter(|(_, &n)| n > 0)
        .map(|(k, &n)| (k.clone(), (1.0 + n as f64).log2()))
        .collect()
}

/// Refined stage over every trace with a nonzero count.
pub fn refined_pair(state: &RefinedState) -> RefinedAssignment {
    solve_lsap(&log_weights(state.counts.iter()))
}

/// Refined stage restricted to the given traces (typically those currently in view).
pub fn refined_pair_among(state: &RefinedState, traces: &BTreeSet<TraceId>) -> RefinedAssignment {
    solve_lsap(&log_weights(state.counts.iter().filter(|((t, _), _)| traces.contains(t))))
}
