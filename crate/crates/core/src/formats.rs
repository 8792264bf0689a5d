//! On-disk formats.
//!
//! * Detection log: JSON Lines, one frame per line,
//!   `{"frame":0,"ts_us":1700000000000000,"boxes":[{"cx":1.0,"cy":2.0,"w":3.0,"h":4.0}]}`.
//! * Sensor stream: CSV with header `ts_us,ax,ay,az`; the file stem is the sensor id.
//! * Ground truth: JSON with `seed`, `sensor_to_person` and `box_labels`
//!   (frame index to the person of each box ordinal).

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{AccSampleRaw, DetectionFrame, SensorId, SensorStream};
use crate::simulator::SimTruth;

pub fn detection_log_to_string(frames: &[DetectionFrame]) -> String {
    let mut out = String::new();
    for frame in frames {
        out.push_str(&serde_json::to_string(frame).expect("frames serialize"));
        out.push('\n');
    }
    out
}

pub fn write_detection_log(path: &Path, frames: &[DetectionFrame]) -> Result<()> {
    fs::write(path, detection_log_to_string(frames)).map_err(|e| Error::io(path, e))
}

pub fn read_detection_log(path: &Path) -> Result<Vec<DetectionFrame>> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut frames = Vec::new();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let frame = serde_json::from_str(&line)
            .map_err(|e| Error::format(path, format!("line {}: {e}", n + 1)))?;
        frames.push(frame);
    }
    Ok(frames)
}

pub fn sensor_csv_to_string(stream: &SensorStream) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for sample in &stream.samples {
        writer.serialize(sample).expect("in-memory csv");
    }
    if stream.samples.is_empty() {
        writer.write_record(["ts_us", "ax", "ay", "az"]).expect("in-memory csv");
    }
    String::from_utf8(writer.into_inner().expect("in-memory csv")).expect("csv is utf-8")
}

pub fn write_sensor_csv(path: &Path, stream: &SensorStream) -> Result<()> {
    fs::write(path, sensor_csv_to_string(stream)).map_err(|e| Error::io(path, e))
}

/// Reads one sensor file. The nominal rate is estimated from the timestamps.
pub fn read_sensor_csv(path: &Path) -> Result<SensorStream> {
    let sensor_id = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| Error::format(path, "sensor file name is not valid UTF-8"))?;
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader.headers().map_err(|e| Error::format(path, e.to_string()))?.clone();
    if headers.iter().map(str::trim).collect::<Vec<_>>() != ["ts_us", "ax", "ay", "az"] {
        return Err(Error::format(path, "expected header ts_us,ax,ay,az"));
    }
    let mut samples: Vec<AccSampleRaw> = Vec::new();
    for (n, record) in reader.deserialize().enumerate() {
        let sample: AccSampleRaw = record.map_err(|e| Error::format(path, format!("row {}: {e}", n + 1)))?;
        if let Some(prev) = samples.last() {
            if sample.timestamp <= prev.timestamp {
                return Err(Error::format(path, format!("row {}: timestamps must increase", n + 1)));
            }
        }
        samples.push(sample);
    }
    let nominal_rate = SensorStream::estimate_rate(&samples)
        .ok_or_else(|| Error::format(path, "need at least two samples to know the rate"))?;
    Ok(SensorStream { sensor_id: SensorId::from(sensor_id), samples, nominal_rate })
}

/// Reads every `*.csv` in a directory, ordered by sensor id.
pub fn read_sensor_dir(dir: &Path) -> Result<Vec<SensorStream>> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            paths.push(path);
        }
    }
    paths.sort();
    let mut streams = paths.iter().map(|p| read_sensor_csv(p)).collect::<Result<Vec<_>>>()?;
    streams.sort_by(|a, b| a.sensor_id.cmp(&b.sensor_id));
    Ok(streams)
}

pub fn truth_to_string(truth: &SimTruth) -> String {
    let mut s = serde_json::to_string_pretty(truth).expect("truth serializes");
    s.push('\n');
    s
}

pub fn write_truth(path: &Path, truth: &SimTruth) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(truth_to_string(truth).as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_truth(path: &Path) -> Result<SimTruth> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
}
