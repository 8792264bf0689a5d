//! Shared data model: identifiers, timestamps, detections and raw sensor streams.
//!
//! Every value here is plain data. Nothing is mutated after construction, so the
//! types are freely shared between threads.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Default camera frame rate in frames per second.
pub const DEFAULT_FPS: f64 = 30.0;

/// Microseconds since the Unix epoch on the clock shared by camera and phones.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub u64);

impl Timestamp {
    pub fn from_secs_f64(secs: f64) -> Self {
        Timestamp((secs * 1e6).round().max(0.0) as u64)
    }

    pub fn as_micros(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 * 1e-6
    }
}

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                $name(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                $name(s.to_owned())
            }
        }
    };
}

string_id!(
    /// A person walking in front of the camera.
    PersonId
);
string_id!(
    /// A trace produced by the tracer.
    TraceId
);
string_id!(
    /// A phone's accelerometer stream. For file input this is the CSV file stem.
    SensorId
);

/// Axis-aligned human bounding box in pixel coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub fn new(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        BoundingBox { cx, cy, w, h }
    }

    pub fn is_valid(&self) -> bool {
        self.w > 0.0 && self.h > 0.0 && self.cx.is_finite() && self.cy.is_finite()
    }

    /// Height over width, the per-box step-pattern feature.
    pub fn aspect_ratio(&self) -> f64 {
        self.h / self.w
    }

    pub fn center_distance(&self, other: &BoundingBox) -> f64 {
        (self.cx - other.cx).hypot(self.cy - other.cy)
    }
}

/// All human detections of one video frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionFrame {
    #[serde(rename = "frame")]
    pub frame_index: u64,
    #[serde(rename = "ts_us")]
    pub timestamp: Timestamp,
    pub boxes: Vec<BoundingBox>,
}

/// One raw three-axis accelerometer reading in m/s².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccSampleRaw {
    #[serde(rename = "ts_us")]
    pub timestamp: Timestamp,
    pub ax: f64,
    pub ay: f64,
    pub az: f64,
}

/// Minimum accepted accelerometer rate; the stream has to be decimated to the frame rate.
pub const MIN_SENSOR_RATE_HZ: f64 = 30.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SensorStream {
    pub sensor_id: SensorId,
    pub samples: Vec<AccSampleRaw>,
    /// Nominal sampling rate in Hz.
    pub nominal_rate: f64,
}

impl SensorStream {
    /// Estimates the nominal rate from the mean sample spacing. Returns `None` for
    /// fewer than two samples or a zero-length span.
    pub fn estimate_rate(samples: &[AccSampleRaw]) -> Option<f64> {
        let (first, last) = (samples.first()?, samples.last()?);
        let span = last.timestamp.0.checked_sub(first.timestamp.0)?;
        if samples.len() < 2 || span == 0 {
            return None;
        }
        Some((samples.len() - 1) as f64 / (span as f64 * 1e-6))
    }
}

/// Reference assignment of traces and sensors to persons.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GroundTruth {
    pub trace_to_person: BTreeMap<TraceId, PersonId>,
    pub sensor_to_person: BTreeMap<SensorId, PersonId>,
}

impl GroundTruth {
    /// Checks that no person carries two sensors.
    pub fn check_one_sensor_per_person(&self) -> Result<(), PersonId> {
        let mut seen = BTreeMap::new();
        for person in self.sensor_to_person.values() {
            if seen.insert(person, ()).is_some() {
                return Err(person.clone());
            }
        }
        Ok(())
    }
}

/// A single problem found by [`validate_detection_log`].
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    NonMonotoneFrameIndex { position: usize, previous: u64, found: u64 },
    NonMonotoneTimestamp { frame_index: u64, previous: Timestamp, found: Timestamp },
    InvalidBox { frame_index: u64, box_ordinal: usize, w: f64, h: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonMonotoneFrameIndex { position, previous, found } => write!(
                f,
                "frame at position {position}: index {found} does not follow {previous}"
            ),
            Violation::NonMonotoneTimestamp { frame_index, previous, found } => write!(
                f,
                "frame {frame_index}: timestamp {} does not follow {}",
                found.0, previous.0
            ),
            Violation::InvalidBox { frame_index, box_ordinal, w, h } => write!(
                f,
                "frame {frame_index}, box {box_ordinal}: non-positive size {w}x{h}"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Lists every ordering or box-shape problem of a detection log.
pub fn validate_detection_log(frames: &[DetectionFrame]) -> ValidationReport {
    let mut violations = Vec::new();
    for (position, frame) in frames.iter().enumerate() {
        if position > 0 {
            let prev = &frames[position - 1];
            if frame.frame_index <= prev.frame_index {
                violations.push(Violation::NonMonotoneFrameIndex {
                    position,
                    previous: prev.frame_index,
                    found: frame.frame_index,
                });
            }
            if frame.timestamp <= prev.timestamp {
                violations.push(Violation::NonMonotoneTimestamp {
                    frame_index: frame.frame_index,
                    previous: prev.timestamp,
                    found: frame.timestamp,
                });
            }
        }
        for (box_ordinal, b) in frame.boxes.iter().enumerate() {
            if !b.is_valid() {
                violations.push(Violation::InvalidBox {
                    frame_index: frame.frame_index,
                    box_ordinal,
                    w: b.w,
                    h: b.h,
                });
            }
        }
    }
    ValidationReport { violations }
}

/// Maps every frame index between the first and last logged frame to a timestamp.
///
/// Frame indices missing from the log get a timestamp interpolated from their
/// logged neighbours. The log must already be validated.
pub fn frame_clock(frames: &[DetectionFrame]) -> Vec<(u64, Timestamp)> {
    let mut clock = Vec::new();
    for pair in frames.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let steps = b.frame_index - a.frame_index;
        for k in 0..steps {
            let frac = k as f64 / steps as f64;
            let ts = a.timestamp.0 as f64 + frac * (b.timestamp.0 as f64 - a.timestamp.0 as f64);
            clock.push((a.frame_index + k, Timestamp(ts.round() as u64)));
        }
    }
    if let Some(last) = frames.last() {
        clock.push((last.frame_index, last.timestamp));
    }
    clock
}
