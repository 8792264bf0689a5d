//! Lightweight trace finding.
//!
//! A person cannot move more than a fixed fraction of their own height between
//! two frames, so each trace only looks for its next box inside a circle around
//! its last box. Candidate (trace, box) pairs are accepted greedily, globally
//! nearest first.

use serde::{Deserialize, Serialize};

use crate::model::{BoundingBox, DetectionFrame, TraceId};

/// Per-frame movement bound as a fraction of box height.
pub const DEFAULT_RADIUS_FACTOR: f64 = 0.1;
/// Frames a trace may go unseen before it is terminated.
pub const DEFAULT_MAX_GAP: u64 = 15;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TracerParams {
    pub radius_factor: f64,
    pub max_gap: u64,
}

impl Default for TracerParams {
    fn default() -> Self {
        TracerParams { radius_factor: DEFAULT_RADIUS_FACTOR, max_gap: DEFAULT_MAX_GAP }
    }
}

impl TracerParams {
    pub fn search_radius(&self, last: &BoundingBox, gap: u64) -> f64 {
        debug_assert!(gap >= 1);
        self.radius_factor * last.h * gap as f64
    }
}

/// Search radius with the default factor: `0.1 * h * gap` pixels.
pub fn search_radius(last: &BoundingBox, gap: u64) -> f64 {
    TracerParams::default().search_radius(last, gap)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceState {
    Active,
    Terminated,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub trace_id: TraceId,
    /// Creation order; lower is older.
    pub serial: u64,
    pub entries: Vec<(u64, BoundingBox)>,
    pub last_seen: u64,
    pub state: TraceState,
}

impl Trace {
    fn start(serial: u64, frame_index: u64, b: BoundingBox) -> Self {
        Trace {
            trace_id: TraceId(format!("T{serial}")),
            serial,
            entries: vec![(frame_index, b)],
            last_seen: frame_index,
            state: TraceState::Active,
        }
    }

    pub fn first_frame(&self) -> u64 {
        self.entries[0].0
    }

    pub fn last_box(&self) -> &BoundingBox {
        &self.entries.last().expect("trace has at least one entry").1
    }

    pub fn is_active(&self) -> bool {
        self.state == TraceState::Active
    }

    /// Frames spanned from first to last sighting, inclusive.
    pub fn span_len(&self) -> u64 {
        self.last_seen - self.first_frame() + 1
    }
}

/// Stateful tracer for one camera stream.
#[derive(Clone, Debug, Default)]
pub struct Tracer {
    params: TracerParams,
    traces: Vec<Trace>,
    next_serial: u64,
}

impl Tracer {
    pub fn new(params: TracerParams) -> Self {
        Tracer { params, traces: Vec::new(), next_serial: 1 }
    }

    pub fn params(&self) -> &TracerParams {
        &self.params
    }

    /// All traces ever created, terminated ones included, oldest first.
    pub fn traces(&self) -> &[Trace] {
        &self.traces
    }

    pub fn active_traces(&self) -> impl Iterator<Item = &Trace> {
        self.traces.iter().filter(|t| t.is_active())
    }

    pub fn into_traces(self) -> Vec<Trace> {
        self.traces
    }

    /// Consumes one frame. Returns, per box ordinal, the trace the box now belongs
    /// to. Boxes with non-positive size are ignored and map to `None`.
    pub fn update(&mut self, frame: &DetectionFrame) -> Vec<Option<TraceId>> {
        let f = frame.frame_index;
        for trace in self.traces.iter_mut().filter(|t| t.is_active()) {
            debug_assert!(f > trace.last_seen, "frame {f} is not after trace {}", trace.trace_id);
            if f.saturating_sub(trace.last_seen) > self.params.max_gap {
                trace.state = TraceState::Terminated;
            }
        }

        // (distance, trace serial, box ordinal, trace slot)
        let mut candidates = Vec::new();
        for (slot, trace) in self.traces.iter().enumerate().filter(|(_, t)| t.is_active()) {
            let last = trace.last_box();
            let gap = f.saturating_sub(trace.last_seen).max(1);
            let radius = self.params.search_radius(last, gap);
            for (ordinal, b) in frame.boxes.iter().enumerate() {
                if !b.is_valid() {
                    continue;
                }
                let dist = last.center_distance(b);
                if dist <= radius {
                    candidates.push((dist, trace.serial, ordinal, slot));
                }
            }
        }
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

        let mut assigned: Vec<Option<TraceId>> = vec![None; frame.boxes.len()];
        let mut extended = vec![false; self.traces.len()];
        for (_, _, ordinal, slot) in candidates {
            if assigned[ordinal].is_some() || extended[slot] {
                continue;
            }
            let trace = &mut self.traces[slot];
            trace.entries.push((f, frame.boxes[ordinal]));
            trace.last_seen = f;
            extended[slot] = true;
            assigned[ordinal] = Some(trace.trace_id.clone());
        }

        for (ordinal, b) in frame.boxes.iter().enumerate() {
            if assigned[ordinal].is_none() && b.is_valid() {
                let trace = Trace::start(self.next_serial, f, *b);
                self.next_serial += 1;
                assigned[ordinal] = Some(trace.trace_id.clone());
                self.traces.push(trace);
            }
        }
        assigned
    }
}

/// Runs a whole detection log through a fresh tracer.
pub fn trace_log(frames: &[DetectionFrame], params: TracerParams) -> Vec<Trace> {
    let mut tracer = Tracer::new(params);
    for frame in frames {
        tracer.update(frame);
    }
    tracer.into_traces()
}
