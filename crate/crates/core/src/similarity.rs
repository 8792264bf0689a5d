//! Extremum-alignment similarity between ratio features and acceleration features.
//!
//! Both feature sequences are reduced to ternary sequences marking strict local
//! maxima (+1) and minima (-1). For every extremum of the trace sequence we look
//! for the nearest same-signed extremum of the sensor sequence within `d` frames;
//! the score is the extremum count divided by the summed distances.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::acc::AccFeatureSequence;
use crate::model::{SensorId, TraceId};
use crate::video::RatioSequence;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimilarityParams {
    /// Search half-width of the distance term, in frames.
    pub d: usize,
    /// Neighbours compared on each side during extremum detection. `None` means `ceil(d / 2)`.
    pub extremum_half_window: Option<usize>,
    /// Distance charged to an extremum with no partner, as a multiple of `d`.
    pub no_match_penalty_factor: f64,
    /// Lower bound on the summed distance; keeps perfect alignment finite.
    pub zero_denominator_floor: f64,
}

impl Default for SimilarityParams {
    fn default() -> Self {
        SimilarityParams {
            d: 10,
            extremum_half_window: None,
            no_match_penalty_factor: 1.5,
            zero_denominator_floor: 0.5,
        }
    }
}

impl SimilarityParams {
    pub fn half_window(&self) -> usize {
        self.extremum_half_window.unwrap_or(self.d.div_ceil(2))
    }

    pub fn penalty(&self) -> f64 {
        self.no_match_penalty_factor * self.d as f64
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.d < 2 {
            return Err(format!("similarity window d must be at least 2, got {}", self.d));
        }
        if self.half_window() == 0 {
            return Err("extremum half window must be at least 1".into());
        }
        if !(self.no_match_penalty_factor > 0.0) || !(self.zero_denominator_floor > 0.0) {
            return Err("penalty factor and denominator floor must be positive".into());
        }
        Ok(())
    }
}

/// Extremum marks in {-1, 0, +1}, positioned on the frame axis.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TernarySequence {
    pub start_frame: u64,
    pub values: Vec<i8>,
}

impl TernarySequence {
    pub fn starting_at(mut self, start_frame: u64) -> Self {
        self.start_frame = start_frame;
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, frame: u64) -> Option<i8> {
        let offset = frame.checked_sub(self.start_frame)?;
        self.values.get(offset as usize).copied()
    }

    pub fn extremum_count(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0).count()
    }

    /// Frames carrying a nonzero mark, with the mark.
    pub fn extremums(&self) -> impl Iterator<Item = (u64, i8)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(move |(i, &v)| (self.start_frame + i as u64, v))
    }
}

/// Mark of position `x`: +1 if strictly above every neighbour within
/// `half_window` on each side, -1 if strictly below, else 0. Windows are cut at
/// the sequence ends; a position with no neighbours at all is 0.
fn mark(seq: &[f64], x: usize, half_window: usize) -> i8 {
    let lo = x.saturating_sub(half_window);
    let hi = (x + half_window + 1).min(seq.len());
    if hi - lo < 2 {
        return 0;
    }
    let v = seq[x];
    let neighbours = seq[lo..x].iter().chain(&seq[x + 1..hi]);
    let mut above = true;
    let mut below = true;
    for &n in neighbours {
        above &= v > n;
        below &= v < n;
        if !above && !below {
            return 0;
        }
    }
    if above {
        1
    } else if below {
        -1
    } else {
        0
    }
}

/// Extremum detection with window `d` (compares `ceil(d / 2)` neighbours per side).
pub fn detect_extremes(seq: &[f64], d: usize) -> TernarySequence {
    detect_extremes_with(seq, d.div_ceil(2))
}

pub fn detect_extremes_with(seq: &[f64], half_window: usize) -> TernarySequence {
    TernarySequence {
        start_frame: 0,
        values: (0..seq.len()).map(|x| mark(seq, x, half_window)).collect(),
    }
}

/// Distance from the extremum of `t` at frame `x` to the nearest same-signed
/// extremum of `a` within `d` frames; `penalty` when there is none, 0 when `t`
/// has no extremum at `x`.
pub fn dif(x: u64, t: &TernarySequence, a: &TernarySequence, d: usize, penalty: f64) -> f64 {
    let target = match t.at(x) {
        Some(0) | None => return 0.0,
        Some(v) => v,
    };
    for k in 0..=d as u64 {
        let before = x.checked_sub(k).and_then(|y| a.at(y));
        let after = a.at(x + k);
        if before == Some(target) || after == Some(target) {
            return k as f64;
        }
    }
    penalty
}

fn score_from(n: usize, total: f64, floor: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 / total.max(floor)
    }
}

/// Similarity of trace marks `t` to sensor marks `a`. Not symmetric: the
/// extremum count is taken from `t`.
pub fn sim(t: &TernarySequence, a: &TernarySequence, params: &SimilarityParams) -> f64 {
    let penalty = params.penalty();
    let (n, total) = t
        .extremums()
        .fold((0usize, 0.0f64), |(n, sum), (x, _)| (n + 1, sum + dif(x, t, a, params.d, penalty)));
    score_from(n, total, params.zero_denominator_floor)
}

/// Minimum feature length, `TS` seconds at the frame rate, a pair needs before it is scored.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LengthGate {
    pub ts_seconds: f64,
    pub fps: f64,
}

impl LengthGate {
    pub fn new(ts_seconds: f64, fps: f64) -> Self {
        LengthGate { ts_seconds, fps }
    }

    pub fn min_frames(&self) -> f64 {
        self.ts_seconds * self.fps
    }

    pub fn passes(&self, len: usize) -> bool {
        len as f64 >= self.min_frames() - 1e-9
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimilarityMatrix {
    pub scores: BTreeMap<(TraceId, SensorId), f64>,
    pub as_of_frame: u64,
}

impl SimilarityMatrix {
    pub fn get(&self, trace: &TraceId, sensor: &SensorId) -> Option<f64> {
        self.scores.get(&(trace.clone(), sensor.clone())).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

/// Scores every gated (trace, sensor) pair from scratch.
pub fn score_all(
    ratio_features: &[RatioSequence],
    acc_features: &[AccFeatureSequence],
    params: &SimilarityParams,
    gate: LengthGate,
) -> SimilarityMatrix {
    let w = params.half_window();
    let sensors: Vec<_> = acc_features
        .iter()
        .filter(|a| gate.passes(a.len()))
        .map(|a| {
            let marks = detect_extremes_with(&a.values(), w).starting_at(a.first_frame().unwrap_or(0));
            (a.sensor_id.clone(), marks)
        })
        .collect();
    let as_of_frame = ratio_features
        .iter()
        .filter_map(|r| r.samples.last().map(|s| s.frame_index))
        .chain(acc_features.iter().filter_map(|a| a.samples.last().map(|s| s.0)))
        .max()
        .unwrap_or(0);
    let mut matrix = SimilarityMatrix { scores: Default::default(), as_of_frame };
    for ratio in ratio_features.iter().filter(|r| gate.passes(r.len())) {
        let t = detect_extremes_with(&ratio.values(), w).starting_at(ratio.first_frame().unwrap_or(0));
        for (sensor_id, a) in &sensors {
            matrix.scores.insert((ratio.trace_id.clone(), sensor_id.clone()), sim(&t, a, params));
        }
    }
    matrix
}

/// Extremum marks of a growing sequence. After every push `marks()` equals
/// [`detect_extremes_with`] applied to everything pushed so far; only the last
/// `half_window + 1` marks are revised by a push.
#[derive(Clone, Debug)]
pub struct ExtremaTracker {
    values: Vec<f64>,
    marks: TernarySequence,
    half_window: usize,
}

impl ExtremaTracker {
    pub fn new(start_frame: u64, half_window: usize) -> Self {
        ExtremaTracker {
            values: Vec::new(),
            marks: TernarySequence { start_frame, values: Vec::new() },
            half_window,
        }
    }

    pub fn push(&mut self, value: f64) {
        self.values.push(value);
        self.marks.values.push(0);
        let last = self.values.len() - 1;
        for x in last.saturating_sub(self.half_window)..=last {
            self.marks.values[x] = mark(&self.values, x, self.half_window);
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn marks(&self) -> &TernarySequence {
        &self.marks
    }

    pub fn start_frame(&self) -> u64 {
        self.marks.start_frame
    }

    /// Last frame covered, if any.
    pub fn end_frame(&self) -> Option<u64> {
        (self.len() as u64).checked_sub(1).map(|k| self.marks.start_frame + k)
    }
}

/// Running score of one (trace, sensor) pair.
///
/// Distance terms whose trace mark and whole sensor search window can no longer
/// change are summed once and kept; the few trailing terms are recomputed on
/// every call. The result always equals [`sim`] on the current marks.
#[derive(Clone, Debug, Default)]
pub struct PairScorer {
    /// First frame not yet folded into the running sums.
    next_frame: Option<u64>,
    n_final: usize,
    sum_final: f64,
}

impl PairScorer {
    pub fn score(&mut self, t: &ExtremaTracker, a: &ExtremaTracker, params: &SimilarityParams) -> f64 {
        let (Some(t_end), Some(a_end)) = (t.end_frame(), a.end_frame()) else {
            return 0.0;
        };
        let w = params.half_window() as i64;
        let d = params.d;
        let penalty = params.penalty();
        let (tm, am) = (t.marks(), a.marks());
        let start = *self.next_frame.get_or_insert(t.start_frame());

        let settled_until = (t_end as i64 - w).min(a_end as i64 - w - d as i64);
        let mut x = start;
        while (x as i64) <= settled_until {
            if tm.at(x).is_some_and(|m| m != 0) {
                self.n_final += 1;
                self.sum_final += dif(x, tm, am, d, penalty);
            }
            x += 1;
        }
        self.next_frame = Some(x);

        let (mut n, mut total) = (self.n_final, self.sum_final);
        for x in x..=t_end {
            if tm.at(x).is_some_and(|m| m != 0) {
                n += 1;
                total += dif(x, tm, am, d, penalty);
            }
        }
        score_from(n, total, params.zero_denominator_floor)
    }
}
