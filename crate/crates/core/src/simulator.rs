//! Synthetic walking scenarios with ground truth.
//!
//! Each person walks a polyline at constant speed. Their box aspect ratio
//! oscillates with their gait and their phone reports an acceleration
//! magnitude that peaks once per step:
//!
//! ```text
//! theta(t) = 2 pi f t + phase
//! h / w    = base_ratio + ratio_amplitude * cos(ratio_cycles_per_stride * theta) + noise
//! |acc|    = g + acc_peak * |cos(theta + acc_phase_offset)| + noise
//! ```
//!
//! All randomness comes from [`Xoshiro256`] streams derived from the scenario seed.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    AccSampleRaw, BoundingBox, DetectionFrame, GroundTruth, PersonId, SensorId, SensorStream, Timestamp, TraceId,
    DEFAULT_FPS, MIN_SENSOR_RATE_HZ,
};
use crate::rng::{SplitMix64, Xoshiro256};

pub const GRAVITY: f64 = 9.81;

fn default_height() -> f64 {
    150.0
}

fn default_cycles() -> u32 {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersonSpec {
    pub person_id: PersonId,
    /// Strides per second.
    pub stride_frequency: f64,
    /// Gait phase at t = 0, radians.
    pub phase: f64,
    /// Waypoints in pixels, walked once over the scenario duration.
    pub path: Vec<[f64; 2]>,
    pub base_ratio: f64,
    pub ratio_amplitude: f64,
    /// Peak acceleration above gravity, m/s².
    pub acc_peak: f64,
    /// Phase lead of the phone signal over the video signal, radians.
    pub acc_phase_offset: f64,
    /// Standard deviation of the magnitude noise, m/s².
    pub carry_noise: f64,
    /// Box height in pixels.
    #[serde(default = "default_height")]
    pub height: f64,
    /// Aspect-ratio cycles per stride. 2 puts one ratio cycle on every step.
    #[serde(default = "default_cycles")]
    pub ratio_cycles_per_stride: u32,
}

impl PersonSpec {
    /// A walker with the default body and noise parameters.
    pub fn walker(person_id: &str, stride_frequency: f64, phase: f64, path: Vec<[f64; 2]>) -> Self {
        PersonSpec {
            person_id: PersonId::from(person_id),
            stride_frequency,
            phase,
            path,
            base_ratio: 2.5,
            ratio_amplitude: 0.3,
            acc_peak: 3.0,
            acc_phase_offset: 0.0,
            carry_noise: 0.3,
            height: default_height(),
            ratio_cycles_per_stride: default_cycles(),
        }
    }

    pub fn sensor_id(&self) -> SensorId {
        SensorId(format!("phone-{}", self.person_id))
    }

    fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(format!("person {}: {msg}", self.person_id)));
        if !(self.stride_frequency > 0.3 && self.stride_frequency < 3.0) {
            return fail(format!("stride_frequency {} outside (0.3, 3.0)", self.stride_frequency));
        }
        if !(self.ratio_amplitude >= 0.0 && self.ratio_amplitude < self.base_ratio) {
            return fail("ratio_amplitude must be non-negative and below base_ratio".into());
        }
        if !(self.height > 0.0) {
            return fail("height must be positive".into());
        }
        if self.path.is_empty() {
            return fail("path needs at least one waypoint".into());
        }
        if !(self.carry_noise >= 0.0) || !(self.acc_peak >= 0.0) {
            return fail("acc_peak and carry_noise must be non-negative".into());
        }
        if self.ratio_cycles_per_stride == 0 {
            return fail("ratio_cycles_per_stride must be at least 1".into());
        }
        Ok(())
    }

    fn gait_angle(&self, t: f64) -> f64 {
        TAU * self.stride_frequency * t + self.phase
    }

    /// Noise-free aspect ratio at time `t`.
    pub fn ratio_at(&self, t: f64) -> f64 {
        self.base_ratio + self.ratio_amplitude * (self.ratio_cycles_per_stride as f64 * self.gait_angle(t)).cos()
    }

    /// Noise-free acceleration magnitude at time `t`.
    pub fn acc_at(&self, t: f64) -> f64 {
        GRAVITY + self.acc_peak * (self.gait_angle(t) + self.acc_phase_offset).cos().abs()
    }

    /// Position after covering `fraction` of the path length.
    pub fn position_at(&self, fraction: f64) -> [f64; 2] {
        let seg_len = |a: &[f64; 2], b: &[f64; 2]| (b[0] - a[0]).hypot(b[1] - a[1]);
        let total: f64 = self.path.windows(2).map(|w| seg_len(&w[0], &w[1])).sum();
        let mut remaining = fraction.clamp(0.0, 1.0) * total;
        for w in self.path.windows(2) {
            let len = seg_len(&w[0], &w[1]);
            if remaining <= len && len > 0.0 {
                let k = remaining / len;
                return [w[0][0] + k * (w[1][0] - w[0][0]), w[0][1] + k * (w[1][1] - w[0][1])];
            }
            remaining -= len;
        }
        *self.path.last().expect("validated path")
    }
}

fn default_fps() -> f64 {
    DEFAULT_FPS
}

fn default_acc_rate() -> f64 {
    100.0
}

fn default_start_us() -> u64 {
    1_700_000_000_000_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub persons: Vec<PersonSpec>,
    /// Seconds.
    pub duration: f64,
    #[serde(default = "default_fps")]
    pub fps: f64,
    #[serde(default = "default_acc_rate")]
    pub acc_rate: f64,
    /// Standard deviation of box center and size noise, pixels.
    #[serde(default)]
    pub box_noise: f64,
    /// Probability that a person's detection is missing from a frame.
    #[serde(default)]
    pub dropout_prob: f64,
    #[serde(default)]
    pub seed: u64,
    /// Timestamp of frame 0.
    #[serde(default = "default_start_us")]
    pub start_us: u64,
}

fn lane(k: usize) -> Vec<[f64; 2]> {
    let y = 100.0 + 140.0 * k as f64;
    if k.is_multiple_of(2) {
        vec![[80.0, y], [560.0, y], [80.0, y]]
    } else {
        vec![[560.0, y], [80.0, y], [560.0, y]]
    }
}

impl ScenarioConfig {
    /// Persons in separate horizontal lanes, 2000 frames at 30 fps with the
    /// default noise levels.
    pub fn with_strides(strides: &[(f64, f64)]) -> Self {
        ScenarioConfig {
            persons: strides
                .iter()
                .enumerate()
                .map(|(k, &(f, phase))| PersonSpec::walker(&format!("p{}", k + 1), f, phase, lane(k)))
                .collect(),
            duration: 2000.0 / DEFAULT_FPS,
            fps: DEFAULT_FPS,
            acc_rate: default_acc_rate(),
            box_noise: 2.0,
            dropout_prob: 0.02,
            seed: 1,
            start_us: default_start_us(),
        }
    }

    /// Three walkers at 0.8, 1.0 and 1.2 strides per second.
    pub fn three_person() -> Self {
        Self::with_strides(&[(0.8, 0.0), (1.0, 2.1), (1.2, 4.2)])
    }

    pub fn two_person() -> Self {
        Self::with_strides(&[(0.8, 0.0), (1.1, 2.1)])
    }

    /// Two walkers with the same cadence and phase: indistinguishable by gait.
    pub fn identical_pair() -> Self {
        Self::with_strides(&[(1.0, 0.0), (1.0, 0.0)])
    }

    pub fn frame_count(&self) -> usize {
        (self.duration * self.fps).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.fps > 0.0) {
            return Err(Error::Config(format!("fps must be positive, got {}", self.fps)));
        }
        if !(self.duration > 0.0) {
            return Err(Error::Config(format!("duration must be positive, got {}", self.duration)));
        }
        if !(self.acc_rate >= MIN_SENSOR_RATE_HZ) {
            return Err(Error::Config(format!(
                "acc_rate {} below the minimum of {MIN_SENSOR_RATE_HZ} Hz",
                self.acc_rate
            )));
        }
        if !(0.0..1.0).contains(&self.dropout_prob) {
            return Err(Error::Config(format!("dropout_prob {} outside [0, 1)", self.dropout_prob)));
        }
        if !(self.box_noise >= 0.0) {
            return Err(Error::Config("box_noise must be non-negative".into()));
        }
        let mut ids = std::collections::BTreeSet::new();
        for p in &self.persons {
            p.validate()?;
            if !ids.insert(&p.person_id) {
                return Err(Error::Config(format!("duplicate person id {}", p.person_id)));
            }
        }
        Ok(())
    }
}

/// Which person produced each detection and carries each sensor.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SimTruth {
    pub seed: Option<u64>,
    pub sensor_to_person: BTreeMap<SensorId, PersonId>,
    /// Person of every box, by frame index then box ordinal.
    pub box_labels: BTreeMap<u64, Vec<PersonId>>,
}

impl SimTruth {
    /// Resolves each trace to the person owning most of its boxes.
    /// `box_traces` holds, per frame index, the trace of each box ordinal.
    pub fn ground_truth(&self, box_traces: &BTreeMap<u64, Vec<Option<TraceId>>>) -> GroundTruth {
        let mut votes: BTreeMap<&TraceId, BTreeMap<&PersonId, usize>> = BTreeMap::new();
        for (frame, traces) in box_traces {
            let Some(labels) = self.box_labels.get(frame) else { continue };
            for (trace, person) in traces.iter().zip(labels) {
                if let Some(trace) = trace {
                    *votes.entry(trace).or_default().entry(person).or_insert(0) += 1;
                }
            }
        }
        let trace_to_person = votes
            .into_iter()
            .map(|(trace, tally)| {
                // highest count, then smallest person id
                let person = tally
                    .into_iter()
                    .max_by(|a, b| a.1.cmp(&b.1).then(b.0.cmp(a.0)))
                    .map(|(p, _)| p.clone())
                    .expect("non-empty tally");
                (trace.clone(), person)
            })
            .collect();
        GroundTruth { trace_to_person, sensor_to_person: self.sensor_to_person.clone() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub frames: Vec<DetectionFrame>,
    pub sensors: Vec<SensorStream>,
    pub truth: SimTruth,
}

pub fn generate(config: &ScenarioConfig) -> Result<Scenario> {
    config.validate()?;
    let mut seeds = SplitMix64::new(config.seed);
    let mut video_rng = Xoshiro256::seed_from_u64(seeds.next_u64());
    let person_seeds: Vec<u64> = config.persons.iter().map(|_| seeds.next_u64()).collect();

    let frame_count = config.frame_count();
    let start = config.start_us as f64;
    let mut frames = Vec::with_capacity(frame_count);
    let mut box_labels = BTreeMap::new();
    for k in 0..frame_count {
        let t = k as f64 / config.fps;
        let mut detections = Vec::with_capacity(config.persons.len());
        for person in &config.persons {
            let dropped = video_rng.next_f64() < config.dropout_prob;
            let noise: [f64; 4] = std::array::from_fn(|_| config.box_noise * video_rng.next_normal());
            if dropped {
                continue;
            }
            let [cx, cy] = person.position_at(t / config.duration);
            let h = person.height;
            let w = h / person.ratio_at(t);
            let b = BoundingBox::new(cx + noise[0], cy + noise[1], (w + noise[2]).max(1.0), (h + noise[3]).max(1.0));
            detections.push((b, person.person_id.clone()));
        }
        // detector output order carries no identity
        for i in (1..detections.len()).rev() {
            detections.swap(i, video_rng.below(i + 1));
        }
        let (boxes, labels): (Vec<_>, Vec<_>) = detections.into_iter().unzip();
        frames.push(DetectionFrame {
            frame_index: k as u64,
            timestamp: Timestamp((start + t * 1e6).round() as u64),
            boxes,
        });
        box_labels.insert(k as u64, labels);
    }

    // the phone streams cover the whole frame span
    let sample_count = (config.duration * config.acc_rate).ceil() as usize + 1;
    let sensors: Vec<SensorStream> = config
        .persons
        .iter()
        .zip(&person_seeds)
        .map(|(person, &seed)| {
            let mut rng = Xoshiro256::seed_from_u64(seed);
            // fixed phone orientation
            let dir = loop {
                let v = [rng.next_normal(), rng.next_normal(), rng.next_normal()];
                let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                if norm > 1e-6 {
                    break v.map(|c| c / norm);
                }
            };
            let samples = (0..sample_count)
                .map(|i| {
                    let t = i as f64 / config.acc_rate;
                    let m = (person.acc_at(t) + person.carry_noise * rng.next_normal()).max(0.0);
                    AccSampleRaw {
                        timestamp: Timestamp((start + t * 1e6).round() as u64),
                        ax: m * dir[0],
                        ay: m * dir[1],
                        az: m * dir[2],
                    }
                })
                .collect();
            SensorStream { sensor_id: person.sensor_id(), samples, nominal_rate: config.acc_rate }
        })
        .collect();

    let truth = SimTruth {
        seed: Some(config.seed),
        sensor_to_person: config.persons.iter().map(|p| (p.sensor_id(), p.person_id.clone())).collect(),
        box_labels,
    };
    Ok(Scenario { frames, sensors, truth })
}
