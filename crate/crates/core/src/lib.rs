//! Walking person identification.
//!
//! Human boxes from a video detector are linked into traces whose height/width
//! ratio oscillates with the walker's steps. Phone accelerometer streams are
//! reduced to a filtered magnitude at the camera frame rate. Both are turned
//! into extremum sequences, scored against each other, and paired by a
//! maximum-weight assignment, first per frame (raw) and then over the
//! accumulated pairing history (refined).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acc;
pub mod error;
pub mod evaluation;
pub mod formats;
pub mod model;
pub mod pairing;
pub mod pipeline;
pub mod rng;
pub mod similarity;
pub mod simulator;
pub mod tracer;
pub mod video;

pub use acc::{AccFeatureSequence, FilterSpec, MagnitudeSequence};
pub use error::{Error, Result};
pub use evaluation::{EvalCounters, Stage, TsSweepRow};
pub use model::{
    AccSampleRaw, BoundingBox, DetectionFrame, GroundTruth, PersonId, SensorId, SensorStream, Timestamp, TraceId,
};
pub use pairing::{Assignment, Matching, RefinedAssignment, RefinedState};
pub use pipeline::{FrameResult, PipelineParams, RunOutput};
pub use similarity::{SimilarityMatrix, SimilarityParams, TernarySequence};
pub use simulator::{PersonSpec, Scenario, ScenarioConfig, SimTruth};
pub use tracer::{Trace, TracerParams};
pub use video::RatioSequence;
