//! Ratio features: the height/width series of a trace, one value per frame.

use crate::model::{BoundingBox, TraceId};
use crate::tracer::Trace;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioSample {
    pub frame_index: u64,
    pub ratio: f64,
    /// True when the value was interpolated over a missed detection.
    pub synthetic: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioSequence {
    pub trace_id: TraceId,
    pub samples: Vec<RatioSample>,
}

impl RatioSequence {
    pub fn new(trace_id: TraceId) -> Self {
        RatioSequence { trace_id, samples: Vec::new() }
    }

    pub fn first_frame(&self) -> Option<u64> {
        self.samples.first().map(|s| s.frame_index)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.ratio).collect()
    }

    /// Appends the box seen at `frame_index`, first filling any skipped frames by
    /// linear interpolation from the previous sample. Returns the number of
    /// samples added.
    pub fn push(&mut self, frame_index: u64, b: &BoundingBox) -> usize {
        let ratio = b.aspect_ratio();
        let Some(prev) = self.samples.last().copied() else {
            self.samples.push(RatioSample { frame_index, ratio, synthetic: false });
            return 1;
        };
        debug_assert!(frame_index > prev.frame_index);
        let steps = frame_index - prev.frame_index;
        for k in 1..steps {
            let frac = k as f64 / steps as f64;
            self.samples.push(RatioSample {
                frame_index: prev.frame_index + k,
                ratio: prev.ratio + frac * (ratio - prev.ratio),
                synthetic: true,
            });
        }
        self.samples.push(RatioSample { frame_index, ratio, synthetic: false });
        steps as usize
    }
}

pub fn ratio_sequence(trace: &Trace) -> RatioSequence {
    let mut seq = RatioSequence::new(trace.trace_id.clone());
    for (frame_index, b) in &trace.entries {
        seq.push(*frame_index, b);
    }
    seq
}
