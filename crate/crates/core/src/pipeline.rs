//! Frame-by-frame identification: tracing, features, similarity and both pairing stages.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::acc::{acc_features, AccFeatureSequence, FilterSpec};
use crate::error::{Error, Result};
use crate::model::{
    frame_clock, validate_detection_log, DetectionFrame, SensorId, SensorStream, TraceId, DEFAULT_FPS,
};
use crate::pairing::{raw_pair, refined_pair_among, update_rsim, Assignment, RefinedAssignment, RefinedState};
use crate::similarity::{ExtremaTracker, LengthGate, PairScorer, SimilarityMatrix, SimilarityParams};
use crate::tracer::{Trace, Tracer, TracerParams};
use crate::video::RatioSequence;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineParams {
    pub fps: f64,
    /// Minimum feature length in seconds before a pair is scored.
    pub ts_gate: f64,
    pub tracer: TracerParams,
    pub filter: FilterSpec,
    pub similarity: SimilarityParams,
}

impl Default for PipelineParams {
    fn default() -> Self {
        PipelineParams {
            fps: DEFAULT_FPS,
            ts_gate: 2.0,
            tracer: TracerParams::default(),
            filter: FilterSpec::default(),
            similarity: SimilarityParams::default(),
        }
    }
}

impl PipelineParams {
    pub fn with_ts_gate(mut self, ts_gate: f64) -> Self {
        self.ts_gate = ts_gate;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fps > 0.0) {
            return Err(Error::Config(format!("fps must be positive, got {}", self.fps)));
        }
        if !(self.ts_gate >= 0.0) {
            return Err(Error::Config(format!("ts_gate must be non-negative, got {}", self.ts_gate)));
        }
        if !(self.tracer.radius_factor > 0.0) {
            return Err(Error::Config("radius_factor must be positive".into()));
        }
        self.similarity.validate().map_err(Error::Config)
    }

    pub fn gate(&self) -> LengthGate {
        LengthGate::new(self.ts_gate, self.fps)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameResult {
    pub frame_index: u64,
    pub raw: Assignment,
    pub refined: RefinedAssignment,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOutput {
    pub frames: Vec<FrameResult>,
    /// Trace of every box ordinal, per frame index.
    pub box_traces: BTreeMap<u64, Vec<Option<TraceId>>>,
    pub traces: Vec<Trace>,
}

struct TraceFeatures {
    ratio: RatioSequence,
    marks: ExtremaTracker,
    scorers: Vec<PairScorer>,
}

/// Incremental identification over a stream of frames.
pub struct Matcher {
    params: PipelineParams,
    tracer: Tracer,
    sensor_ids: Vec<SensorId>,
    sensor_marks: Vec<ExtremaTracker>,
    traces: BTreeMap<TraceId, TraceFeatures>,
    refined: RefinedState,
}

impl Matcher {
    pub fn new(params: PipelineParams, sensor_ids: Vec<SensorId>, first_frame: u64) -> Self {
        let w = params.similarity.half_window();
        Matcher {
            tracer: Tracer::new(params.tracer),
            sensor_marks: sensor_ids.iter().map(|_| ExtremaTracker::new(first_frame, w)).collect(),
            sensor_ids,
            traces: BTreeMap::new(),
            refined: RefinedState::default(),
            params,
        }
    }

    /// Processes one frame. `acc_values` holds each sensor's feature value at
    /// this frame, in the order given to [`Matcher::new`]. Returns the trace of
    /// each box ordinal and the pairing results.
    pub fn step(&mut self, frame: &DetectionFrame, acc_values: &[f64]) -> (Vec<Option<TraceId>>, FrameResult) {
        debug_assert_eq!(acc_values.len(), self.sensor_marks.len());
        for (marks, &v) in self.sensor_marks.iter_mut().zip(acc_values) {
            marks.push(v);
        }

        let w = self.params.similarity.half_window();
        let assigned = self.tracer.update(frame);
        for (ordinal, trace_id) in assigned.iter().enumerate() {
            let Some(trace_id) = trace_id else { continue };
            let n_sensors = self.sensor_ids.len();
            let features = self.traces.entry(trace_id.clone()).or_insert_with(|| TraceFeatures {
                ratio: RatioSequence::new(trace_id.clone()),
                marks: ExtremaTracker::new(frame.frame_index, w),
                scorers: vec![PairScorer::default(); n_sensors],
            });
            let added = features.ratio.push(frame.frame_index, &frame.boxes[ordinal]);
            let fresh = &features.ratio.samples[features.ratio.samples.len() - added..];
            for sample in fresh {
                features.marks.push(sample.ratio);
            }
        }

        let active: BTreeSet<TraceId> = self.tracer.active_traces().map(|t| t.trace_id.clone()).collect();
        let gone: Vec<TraceId> = self.traces.keys().filter(|id| !active.contains(*id)).cloned().collect();
        for id in gone {
            self.traces.remove(&id);
            self.refined.forget_trace(&id);
        }

        let sim = self.similarity(frame.frame_index);
        let raw = raw_pair(&sim);
        update_rsim(&mut self.refined, &raw);
        let refined = refined_pair_among(&self.refined, &active);
        (assigned, FrameResult { frame_index: frame.frame_index, raw, refined })
    }

    fn similarity(&mut self, as_of_frame: u64) -> SimilarityMatrix {
        let gate = self.params.gate();
        let params = self.params.similarity;
        let mut matrix = SimilarityMatrix { scores: BTreeMap::new(), as_of_frame };
        for (trace_id, features) in self.traces.iter_mut().filter(|(_, f)| gate.passes(f.marks.len())) {
            for (j, sensor) in self.sensor_marks.iter().enumerate() {
                if !gate.passes(sensor.len()) {
                    continue;
                }
                let score = features.scorers[j].score(&features.marks, sensor, &params);
                matrix.scores.insert((trace_id.clone(), self.sensor_ids[j].clone()), score);
            }
        }
        matrix
    }

    pub fn refined_state(&self) -> &RefinedState {
        &self.refined
    }

    pub fn into_traces(self) -> Vec<Trace> {
        self.tracer.into_traces()
    }
}

/// Acceleration features of every sensor on the log's frame clock.
pub fn prepare_acc_features(
    frames: &[DetectionFrame],
    sensors: &[SensorStream],
    filter: &FilterSpec,
) -> Result<Vec<AccFeatureSequence>> {
    let clock = frame_clock(frames);
    sensors.iter().map(|s| acc_features(s, filter, &clock)).collect()
}

/// Runs the matcher over a whole log with precomputed acceleration features.
pub fn run_with_features(
    frames: &[DetectionFrame],
    acc: &[AccFeatureSequence],
    params: &PipelineParams,
) -> Result<RunOutput> {
    params.validate()?;
    let report = validate_detection_log(frames);
    if let Some(v) = report.violations.first() {
        return Err(Error::Config(format!(
            "detection log has {} problem(s), first: {v}",
            report.violations.len()
        )));
    }
    let Some(first) = frames.first() else {
        return Ok(RunOutput::default());
    };
    let last = frames.last().expect("non-empty").frame_index;
    for a in acc {
        if a.first_frame() != Some(first.frame_index) || a.len() as u64 != last - first.frame_index + 1 {
            return Err(Error::Config(format!("features of {} are not on the frame clock", a.sensor_id)));
        }
    }

    let mut matcher = Matcher::new(*params, acc.iter().map(|a| a.sensor_id.clone()).collect(), first.frame_index);
    let mut output = RunOutput::default();
    let mut logged = frames.iter().peekable();
    let mut values = vec![0.0; acc.len()];
    for (offset, frame_index) in (first.frame_index..=last).enumerate() {
        let empty;
        let frame = match logged.peek() {
            Some(f) if f.frame_index == frame_index => logged.next().expect("peeked"),
            _ => {
                empty = DetectionFrame { frame_index, timestamp: Default::default(), boxes: Vec::new() };
                &empty
            }
        };
        for (v, a) in values.iter_mut().zip(acc) {
            *v = a.samples[offset].1;
        }
        let (assigned, result) = matcher.step(frame, &values);
        output.box_traces.insert(frame_index, assigned);
        output.frames.push(result);
    }
    output.traces = matcher.into_traces();
    Ok(output)
}

/// Full pipeline from detections and raw sensor streams.
pub fn run(frames: &[DetectionFrame], sensors: &[SensorStream], params: &PipelineParams) -> Result<RunOutput> {
    let acc = prepare_acc_features(frames, sensors, &params.filter)?;
    run_with_features(frames, &acc, params)
}
