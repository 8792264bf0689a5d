//! Step features from accelerometer streams: magnitude, low-pass, frame alignment.

mod butterworth;

pub use butterworth::{Biquad, ButterworthLowpass};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{SensorId, SensorStream, Timestamp};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FilterSpec {
    pub order: usize,
    pub cutoff_hz: f64,
}

impl Default for FilterSpec {
    fn default() -> Self {
        FilterSpec { order: 10, cutoff_hz: 15.0 }
    }
}

/// Direction-free acceleration magnitude at the sensor's native rate.
#[derive(Clone, Debug, PartialEq)]
pub struct MagnitudeSequence {
    pub sensor_id: SensorId,
    pub rate: f64,
    pub samples: Vec<(Timestamp, f64)>,
}

/// Acceleration feature aligned to the camera frame clock.
#[derive(Clone, Debug, PartialEq)]
pub struct AccFeatureSequence {
    pub sensor_id: SensorId,
    pub samples: Vec<(u64, f64)>,
}

impl AccFeatureSequence {
    pub fn first_frame(&self) -> Option<u64> {
        self.samples.first().map(|s| s.0)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.1).collect()
    }
}

pub fn magnitude(stream: &SensorStream) -> MagnitudeSequence {
    MagnitudeSequence {
        sensor_id: stream.sensor_id.clone(),
        rate: stream.nominal_rate,
        samples: stream
            .samples
            .iter()
            .map(|s| (s.timestamp, (s.ax * s.ax + s.ay * s.ay + s.az * s.az).sqrt()))
            .collect(),
    }
}

/// Causal Butterworth low-pass at the sequence's nominal rate. The filter starts
/// in the steady state of the first sample.
pub fn lowpass(seq: &MagnitudeSequence, spec: &FilterSpec) -> Result<MagnitudeSequence> {
    let mut filter = ButterworthLowpass::design(spec.order, spec.cutoff_hz, seq.rate)?;
    if let Some(&(_, first)) = seq.samples.first() {
        filter.prime(first);
    }
    Ok(MagnitudeSequence {
        sensor_id: seq.sensor_id.clone(),
        rate: seq.rate,
        samples: seq.samples.iter().map(|&(ts, v)| (ts, filter.process(v))).collect(),
    })
}

/// Linearly interpolates the sequence at every frame timestamp. Frames outside
/// the sequence's span take the nearest edge value.
pub fn resample_to_frames(
    seq: &MagnitudeSequence,
    frame_clock: &[(u64, Timestamp)],
) -> Result<AccFeatureSequence> {
    let empty_overlap = || Error::EmptyOverlap { sensor: seq.sensor_id.clone() };
    let (Some(first), Some(last)) = (seq.samples.first(), seq.samples.last()) else {
        return Err(empty_overlap());
    };
    let (Some(clock_first), Some(clock_last)) = (frame_clock.first(), frame_clock.last()) else {
        return Err(empty_overlap());
    };
    if clock_last.1 < first.0 || clock_first.1 > last.0 {
        return Err(empty_overlap());
    }

    let samples = &seq.samples;
    let mut hi = 0;
    let mut out = Vec::with_capacity(frame_clock.len());
    for &(frame_index, ts) in frame_clock {
        let value = if ts <= first.0 {
            first.1
        } else if ts >= last.0 {
            last.1
        } else {
            // the clock is monotone, so the bracketing index only moves forward
            if samples[hi].0 < ts {
                hi += samples[hi..].partition_point(|s| s.0 < ts);
            }
            let (t1, v1) = samples[hi];
            if t1 == ts {
                v1
            } else {
                let (t0, v0) = samples[hi - 1];
                let frac = (ts.0 - t0.0) as f64 / (t1.0 - t0.0) as f64;
                v0 + frac * (v1 - v0)
            }
        };
        out.push((frame_index, value));
    }
    Ok(AccFeatureSequence { sensor_id: seq.sensor_id.clone(), samples: out })
}

/// magnitude, then lowpass, then resample_to_frames.
pub fn acc_features(
    stream: &SensorStream,
    spec: &FilterSpec,
    frame_clock: &[(u64, Timestamp)],
) -> Result<AccFeatureSequence> {
    resample_to_frames(&lowpass(&magnitude(stream), spec)?, frame_clock)
}
