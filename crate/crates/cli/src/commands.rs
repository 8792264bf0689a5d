use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use wpid_core::evaluation::{evaluate_run, r_cd, sweep_table, ts_sweep, Attribution};
use wpid_core::formats;
use wpid_core::pipeline::run;
use wpid_core::simulator::{generate, SimTruth};
use wpid_core::{DetectionFrame, Error, SensorId, SensorStream, Stage, TraceId, TsSweepRow};

use crate::config::{RunConfig, SensorSource};
use crate::error::{CliError, Result};

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimulateReport {
    pub frames: usize,
    pub boxes: usize,
    pub files: Vec<PathBuf>,
}

/// Generates the configured scenario and writes `detections.jsonl`,
/// `sensors/<id>.csv` and `truth.json` into the output directory.
pub fn cmd_simulate(config: &RunConfig) -> Result<SimulateReport> {
    let out = config.output_dir()?;
    let scenario = generate(&config.scenario.scenario())?;
    let sensor_dir = out.join("sensors");
    create_dir(&sensor_dir)?;

    let mut files = vec![out.join("detections.jsonl")];
    formats::write_detection_log(&files[0], &scenario.frames)?;
    for stream in &scenario.sensors {
        let path = sensor_dir.join(format!("{}.csv", stream.sensor_id));
        formats::write_sensor_csv(&path, stream)?;
        files.push(path);
    }
    let truth = out.join("truth.json");
    formats::write_truth(&truth, &scenario.truth)?;
    files.push(truth);

    Ok(SimulateReport {
        frames: scenario.frames.len(),
        boxes: scenario.frames.iter().map(|f| f.boxes.len()).sum(),
        files,
    })
}

struct Inputs {
    frames: Vec<DetectionFrame>,
    sensors: Vec<SensorStream>,
    truth: Option<SimTruth>,
}

fn read_inputs(config: &RunConfig) -> Result<Inputs> {
    let input = &config.input;
    let detections = input
        .detections
        .as_ref()
        .ok_or_else(|| CliError::Config("no detection log: set input.detections or pass --input".into()))?;
    let frames = formats::read_detection_log(detections)?;
    let sensors = match &input.sensors {
        None => return Err(CliError::Config("no sensor streams: set input.sensors or pass --input".into())),
        Some(SensorSource::Dir(dir)) => formats::read_sensor_dir(dir)?,
        Some(SensorSource::Files(files)) => {
            let mut streams = files.iter().map(|p| formats::read_sensor_csv(p)).collect::<Result<Vec<_>, _>>()?;
            streams.sort_by(|a, b| a.sensor_id.cmp(&b.sensor_id));
            streams
        }
    };
    for pair in sensors.windows(2) {
        if pair[0].sensor_id == pair[1].sensor_id {
            return Err(CliError::Config(format!("sensor {} given twice", pair[0].sensor_id)));
        }
    }
    let truth = input.truth.as_deref().map(formats::read_truth).transpose()?;
    Ok(Inputs { frames, sensors, truth })
}

#[derive(Serialize)]
struct PairLine<'a> {
    trace: &'a TraceId,
    sensor: &'a SensorId,
}

#[derive(Serialize)]
struct AssignmentLine<'a> {
    frame: u64,
    stage: Stage,
    pairs: Vec<PairLine<'a>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchSummary {
    pub frames: usize,
    pub traces: usize,
    pub sensors: Vec<SensorId>,
    pub ts_gate: f64,
    pub stages: Vec<Stage>,
    /// Present only when ground truth was supplied. A stage that never
    /// paired anything has `null`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_cd: Option<BTreeMap<Stage, Option<f64>>>,
}

/// Wall-clock figures, kept apart from the summary so that the summary is
/// reproducible byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Timing {
    pub frames: usize,
    pub pipeline_seconds: f64,
    pub throughput_fps: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatchReport {
    pub summary: MatchSummary,
    pub timing: Timing,
}

/// Runs the pipeline over the configured inputs and writes
/// `assignments.jsonl`, `summary.json` and `timing.json`.
pub fn cmd_match(config: &RunConfig) -> Result<MatchReport> {
    let out = config.output_dir()?;
    let inputs = read_inputs(config)?;
    let stages = config.stage.stages();

    let started = Instant::now();
    let output = run(&inputs.frames, &inputs.sensors, &config.pipeline)?;
    let elapsed = started.elapsed().as_secs_f64();

    create_dir(out)?;
    let path = out.join("assignments.jsonl");
    let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
    let mut writer = BufWriter::new(file);
    for frame in &output.frames {
        for &stage in &stages {
            let matching = match stage {
                Stage::Raw => &frame.raw,
                Stage::Refined => &frame.refined,
            };
            let line = AssignmentLine {
                frame: frame.frame_index,
                stage,
                pairs: matching.pairs.iter().map(|(trace, sensor)| PairLine { trace, sensor }).collect(),
            };
            serde_json::to_writer(&mut writer, &line).expect("assignment lines serialize");
            writer.write_all(b"\n").map_err(|e| CliError::io(&path, e))?;
        }
    }
    writer.flush().map_err(|e| CliError::io(&path, e))?;

    let r_cd = match &inputs.truth {
        None => None,
        Some(truth) => {
            let truth = truth.ground_truth(&output.box_traces);
            let mut rates = BTreeMap::new();
            for &stage in &stages {
                let counters = evaluate_run(&output, &truth, stage, Attribution::SensorSide)?;
                let rate = match r_cd(&counters) {
                    Ok(v) => Some(v),
                    Err(Error::UndefinedRate) => None,
                    Err(e) => return Err(e.into()),
                };
                rates.insert(stage, rate);
            }
            Some(rates)
        }
    };
    let summary = MatchSummary {
        frames: output.frames.len(),
        traces: output.traces.len(),
        sensors: inputs.sensors.iter().map(|s| s.sensor_id.clone()).collect(),
        ts_gate: config.pipeline.ts_gate,
        stages,
        r_cd,
    };
    let timing = Timing {
        frames: output.frames.len(),
        pipeline_seconds: elapsed,
        throughput_fps: if elapsed > 0.0 { output.frames.len() as f64 / elapsed } else { f64::INFINITY },
    };
    write_json(&out.join("summary.json"), &summary)?;
    write_json(&out.join("timing.json"), &timing)?;
    Ok(MatchReport { summary, timing })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    write_file(path, &text)
}

pub fn sweep_csv(rows: &[TsSweepRow]) -> String {
    let mut out = String::from("ts_seconds,stage,r_cd,seed\n");
    for row in rows {
        let seed = row.seed.map(|s| s.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{},{}\n", row.ts, row.stage, row.r_cd, seed));
    }
    out
}

/// Runs the pipeline once per TS value and writes `sweep.csv` and
/// `sweep.txt`. Without configured inputs the scenario is simulated in memory.
pub fn cmd_sweep(config: &RunConfig) -> Result<Vec<TsSweepRow>> {
    let out = config.output_dir()?;
    if config.sweep.ts.is_empty() {
        return Err(CliError::format("TS list", "empty TS list"));
    }
    let (frames, sensors, truth) = if config.input.is_empty() {
        let s = generate(&config.scenario.scenario())?;
        (s.frames, s.sensors, s.truth)
    } else {
        let inputs = read_inputs(config)?;
        let truth = inputs
            .truth
            .ok_or_else(|| CliError::Config("a sweep needs ground truth: set input.truth".into()))?;
        (inputs.frames, inputs.sensors, truth)
    };
    let rows = ts_sweep(&frames, &sensors, &truth, &config.pipeline, &config.sweep.ts, &config.stage.stages())?;
    create_dir(out)?;
    write_file(&out.join("sweep.csv"), &sweep_csv(&rows))?;
    write_file(&out.join("sweep.txt"), &sweep_table(&rows))?;
    Ok(rows)
}
