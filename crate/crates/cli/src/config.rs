//! The TOML run configuration shared by all subcommands.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use wpid_core::simulator::{PersonSpec, ScenarioConfig};
use wpid_core::{PipelineParams, Stage};

use crate::error::{CliError, Result};

pub const DEFAULT_TS_VALUES: [f64; 5] = [0.33, 1.0, 2.0, 3.0, 4.0];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum StageSelection {
    Raw,
    Refined,
    #[default]
    Both,
}

impl StageSelection {
    pub fn stages(self) -> Vec<Stage> {
        match self {
            StageSelection::Raw => vec![Stage::Raw],
            StageSelection::Refined => vec![Stage::Refined],
            StageSelection::Both => Stage::ALL.to_vec(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    #[default]
    ThreePerson,
    TwoPerson,
    IdenticalPair,
}

/// A preset scenario with optional overrides. `persons`, when given,
/// replaces the preset's walkers.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioSection {
    pub preset: Preset,
    pub persons: Option<Vec<PersonSpec>>,
    pub duration: Option<f64>,
    pub fps: Option<f64>,
    pub acc_rate: Option<f64>,
    pub box_noise: Option<f64>,
    pub dropout_prob: Option<f64>,
    pub seed: Option<u64>,
    pub start_us: Option<u64>,
}

impl ScenarioSection {
    pub fn scenario(&self) -> ScenarioConfig {
        let mut c = match self.preset {
            Preset::ThreePerson => ScenarioConfig::three_person(),
            Preset::TwoPerson => ScenarioConfig::two_person(),
            Preset::IdenticalPair => ScenarioConfig::identical_pair(),
        };
        if let Some(persons) = &self.persons {
            c.persons = persons.clone();
        }
        c.duration = self.duration.unwrap_or(c.duration);
        c.fps = self.fps.unwrap_or(c.fps);
        c.acc_rate = self.acc_rate.unwrap_or(c.acc_rate);
        c.box_noise = self.box_noise.unwrap_or(c.box_noise);
        c.dropout_prob = self.dropout_prob.unwrap_or(c.dropout_prob);
        c.seed = self.seed.unwrap_or(c.seed);
        c.start_us = self.start_us.unwrap_or(c.start_us);
        c
    }
}

/// Sensor streams: a directory of `<id>.csv` files or an explicit file list.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SensorSource {
    Dir(PathBuf),
    Files(Vec<PathBuf>),
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputSection {
    pub detections: Option<PathBuf>,
    pub sensors: Option<SensorSource>,
    pub truth: Option<PathBuf>,
}

impl InputSection {
    /// The layout `simulate` writes: `detections.jsonl`, `sensors/` and,
    /// if present, `truth.json`.
    pub fn from_dir(dir: &Path) -> Self {
        let truth = dir.join("truth.json");
        InputSection {
            detections: Some(dir.join("detections.jsonl")),
            sensors: Some(SensorSource::Dir(dir.join("sensors"))),
            truth: truth.exists().then_some(truth),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.detections.is_none() && self.sensors.is_none() && self.truth.is_none()
    }

    fn rebase(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| *p = base.join(&*p);
        self.detections.as_mut().map(join);
        self.truth.as_mut().map(join);
        match &mut self.sensors {
            Some(SensorSource::Dir(p)) => join(p),
            Some(SensorSource::Files(files)) => files.iter_mut().for_each(join),
            None => {}
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub ts: Vec<f64>,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection { ts: DEFAULT_TS_VALUES.to_vec() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: ScenarioSection,
    pub input: InputSection,
    pub pipeline: PipelineParams,
    pub stage: StageSelection,
    pub output: Option<PathBuf>,
    pub sweep: SweepSection,
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub stage: Option<StageSelection>,
    pub ts: Option<Vec<f64>>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub input: Option<PathBuf>,
}

impl RunConfig {
    /// Parses a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config: RunConfig =
            toml::from_str(&text).map_err(|e| CliError::format(path.display().to_string(), e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        config.input.rebase(base);
        if let Some(out) = &mut config.output {
            *out = base.join(&*out);
        }
        Ok(config)
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(stage) = o.stage {
            self.stage = stage;
        }
        if let Some(ts) = o.ts {
            self.sweep.ts = ts;
        }
        if let Some(seed) = o.seed {
            self.scenario.seed = Some(seed);
        }
        if let Some(out) = o.out {
            self.output = Some(out);
        }
        if let Some(dir) = o.input {
            self.input = InputSection::from_dir(&dir);
        }
    }

    pub fn output_dir(&self) -> Result<&Path> {
        self.output
            .as_deref()
            .ok_or_else(|| CliError::Config("no output directory: pass --out or set `output`".into()))
    }
}

/// Parses a comma-separated list such as `0.33,1,2`.
pub fn parse_ts_list(s: &str) -> Result<Vec<f64>> {
    let values = s
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<f64>().map_err(|e| CliError::format("--ts", format!("{v:?}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(CliError::format("--ts", "empty TS list"));
    }
    Ok(values)
}
