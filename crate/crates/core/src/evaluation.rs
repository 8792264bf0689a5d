//! Correct-identification rate against ground truth, and TS sweeps.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, UnknownId};
use crate::model::{DetectionFrame, GroundTruth, PersonId, SensorStream};
use crate::pairing::Matching;
use crate::model::{SensorId, TraceId};
use crate::pipeline::{prepare_acc_features, run_with_features, PipelineParams, RunOutput};
use crate::simulator::SimTruth;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Raw,
    Refined,
}

impl Stage {
    pub const ALL: [Stage; 2] = [Stage::Raw, Stage::Refined];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Raw => "raw",
            Stage::Refined => "refined",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which side of a pair decides the person it "identifies".
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Attribution {
    /// The person carrying the paired sensor.
    #[default]
    SensorSide,
    /// The person the paired trace belongs to.
    TraceSide,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PersonCounts {
    /// Frames in which someone was identified as this person.
    pub identified: u64,
    /// Frames in which that identification was right.
    pub correct: u64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalCounters {
    pub attribution: Attribution,
    pub per_person: BTreeMap<PersonId, PersonCounts>,
}

impl EvalCounters {
    pub fn new(attribution: Attribution) -> Self {
        EvalCounters { attribution, per_person: BTreeMap::new() }
    }

    pub fn persons(&self) -> usize {
        self.per_person.len()
    }

    pub fn identified(&self) -> u64 {
        self.per_person.values().map(|c| c.identified).sum()
    }

    pub fn correct(&self) -> u64 {
        self.per_person.values().map(|c| c.correct).sum()
    }
}

/// Sum of correct identifications over sum of identifications.
pub fn r_cd(counters: &EvalCounters) -> Result<f64> {
    let identified = counters.identified();
    if identified == 0 {
        return Err(Error::UndefinedRate);
    }
    Ok(counters.correct() as f64 / identified as f64)
}

/// Counts one frame's pairs. Fails without counting anything if an id has no
/// ground truth.
pub fn accumulate(
    counters: &mut EvalCounters,
    assignment: &Matching<TraceId, SensorId>,
    truth: &GroundTruth,
) -> Result<()> {
    let mut resolved = Vec::with_capacity(assignment.pairs.len());
    for (trace, sensor) in &assignment.pairs {
        let trace_person = truth
            .trace_to_person
            .get(trace)
            .ok_or_else(|| Error::UnknownId(UnknownId::Trace(trace.clone())))?;
        let sensor_person = truth
            .sensor_to_person
            .get(sensor)
            .ok_or_else(|| Error::UnknownId(UnknownId::Sensor(sensor.clone())))?;
        resolved.push((trace_person, sensor_person));
    }
    for (trace_person, sensor_person) in resolved {
        let claimed = match counters.attribution {
            Attribution::SensorSide => sensor_person,
            Attribution::TraceSide => trace_person,
        };
        let entry = counters.per_person.entry(claimed.clone()).or_default();
        entry.identified += 1;
        if trace_person == sensor_person {
            entry.correct += 1;
        }
    }
    Ok(())
}

/// Counters of one stage over a whole run.
pub fn evaluate_run(output: &RunOutput, truth: &GroundTruth, stage: Stage, attribution: Attribution) -> Result<EvalCounters> {
    let mut counters = EvalCounters::new(attribution);
    for frame in &output.frames {
        let assignment = match stage {
            Stage::Raw => &frame.raw,
            Stage::Refined => &frame.refined,
        };
        accumulate(&mut counters, assignment, truth)?;
    }
    Ok(counters)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TsSweepRow {
    pub ts: f64,
    pub stage: Stage,
    pub r_cd: f64,
    pub seed: Option<u64>,
}

/// Runs the pipeline once per TS value and reports R_cd for each requested stage.
pub fn ts_sweep(
    frames: &[DetectionFrame],
    sensors: &[SensorStream],
    truth: &SimTruth,
    params: &PipelineParams,
    ts_values: &[f64],
    stages: &[Stage],
) -> Result<Vec<TsSweepRow>> {
    if let Some(bad) = ts_values.iter().find(|ts| !(**ts > 0.0)) {
        return Err(Error::Config(format!("TS values must be positive, got {bad}")));
    }
    let acc = prepare_acc_features(frames, sensors, &params.filter)?;
    let mut rows = Vec::with_capacity(ts_values.len() * stages.len());
    for &ts in ts_values {
        let output = run_with_features(frames, &acc, &params.with_ts_gate(ts))?;
        let ground_truth = truth.ground_truth(&output.box_traces);
        for &stage in stages {
            let counters = evaluate_run(&output, &ground_truth, stage, Attribution::SensorSide)?;
            rows.push(TsSweepRow { ts, stage, r_cd: r_cd(&counters)?, seed: truth.seed });
        }
    }
    Ok(rows)
}

/// Plain-text table with one row per stage and one column per TS value.
pub fn sweep_table(rows: &[TsSweepRow]) -> String {
    let mut ts_values: Vec<f64> = Vec::new();
    for row in rows {
        if !ts_values.contains(&row.ts) {
            ts_values.push(row.ts);
        }
    }
    let mut out = String::from("Stage \\ TS/s");
    for ts in &ts_values {
        out.push_str(&format!(" | {ts:>5}"));
    }
    out.push('\n');
    for stage in Stage::ALL {
        let cells: Vec<Option<f64>> = ts_values
            .iter()
            .map(|ts| rows.iter().find(|r| r.stage == stage && r.ts == *ts).map(|r| r.r_cd))
            .collect();
        if cells.iter().all(Option::is_none) {
            continue;
        }
        let name = match stage {
            Stage::Raw => "Raw",
            Stage::Refined => "Refined",
        };
        out.push_str(&format!("{name:<12}"));
        for cell in cells {
            match cell {
                Some(v) => out.push_str(&format!(" | {v:>5.2}")),
                None => out.push_str(" |     -"),
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn counters(data: &[(&str, u64, u64)]) -> EvalCounters {
        EvalCounters {
            attribution: Attribution::SensorSide,
            per_person: data
                .iter()
                .map(|&(p, identified, correct)| (PersonId::from(p), PersonCounts { identified, correct }))
                .collect(),
        }
    }

    fn truth() -> GroundTruth {
        let mut t = GroundTruth::default();
        t.trace_to_person.insert("T1".into(), "alice".into());
        t.trace_to_person.insert("T2".into(), "bob".into());
        t.sensor_to_person.insert("s1".into(), "alice".into());
        t.sensor_to_person.insert("s2".into(), "bob".into());
        t
    }

    fn pairs(p: &[(&str, &str)]) -> Matching<TraceId, SensorId> {
        Matching { pairs: p.iter().map(|&(t, s)| (t.into(), s.into())).collect(), objective: 0.0 }
    }

    #[test]
    fn rate_cases() {
        assert_eq!(r_cd(&counters(&[("a", 100, 100), ("b", 100, 100)])).unwrap(), 1.0);
        assert_eq!(r_cd(&counters(&[("a", 100, 70), ("b", 100, 82)])).unwrap(), 0.76);
        assert!(matches!(r_cd(&counters(&[])), Err(Error::UndefinedRate)));
    }

    #[test]
    fn correct_pairs_count_fully() {
        let mut c = EvalCounters::default();
        for _ in 0..10 {
            accumulate(&mut c, &pairs(&[("T1", "s1")]), &truth()).unwrap();
        }
        assert_eq!(c.per_person[&PersonId::from("alice")], PersonCounts { identified: 10, correct: 10 });
    }

    #[test]
    fn swapped_pairs_count_as_wrong() {
        let mut c = EvalCounters::default();
        for _ in 0..10 {
            accumulate(&mut c, &pairs(&[("T1", "s2"), ("T2", "s1")]), &truth()).unwrap();
        }
        for p in ["alice", "bob"] {
            assert_eq!(c.per_person[&PersonId::from(p)], PersonCounts { identified: 10, correct: 0 });
        }
        assert_eq!(r_cd(&c).unwrap(), 0.0);
    }

    #[test]
    fn mixed_run() {
        let mut c = EvalCounters::default();
        for k in 0..10 {
            let sensor = if k < 7 { "s1" } else { "s2" };
            accumulate(&mut c, &pairs(&[("T1", sensor)]), &truth()).unwrap();
        }
        // sensor side: s2 frames claim bob
        assert_eq!(c.per_person[&PersonId::from("alice")], PersonCounts { identified: 7, correct: 7 });
        assert_eq!(c.per_person[&PersonId::from("bob")], PersonCounts { identified: 3, correct: 0 });

        let mut by_trace = EvalCounters::new(Attribution::TraceSide);
        for k in 0..10 {
            let sensor = if k < 7 { "s1" } else { "s2" };
            accumulate(&mut by_trace, &pairs(&[("T1", sensor)]), &truth()).unwrap();
        }
        let alice = by_trace.per_person[&PersonId::from("alice")];
        assert_eq!(alice.correct as f64 / alice.identified as f64, 0.7);
        assert_eq!(r_cd(&by_trace).unwrap(), r_cd(&c).unwrap());
    }

    #[test]
    fn unknown_ids_fail_without_counting() {
        let mut c = EvalCounters::default();
        let err = accumulate(&mut c, &pairs(&[("T1", "s1"), ("T9", "s2")]), &truth()).unwrap_err();
        assert!(matches!(err, Error::UnknownId(UnknownId::Trace(_))));
        assert_eq!(c.identified(), 0);
        let err = accumulate(&mut c, &pairs(&[("T1", "s7")]), &truth()).unwrap_err();
        assert!(matches!(err, Error::UnknownId(UnknownId::Sensor(_))));
    }

    #[test]
    fn table_layout() {
        let rows = vec![
            TsSweepRow { ts: 0.33, stage: Stage::Raw, r_cd: 0.69, seed: None },
            TsSweepRow { ts: 0.33, stage: Stage::Refined, r_cd: 0.71, seed: None },
            TsSweepRow { ts: 1.0, stage: Stage::Raw, r_cd: 0.74, seed: None },
            TsSweepRow { ts: 1.0, stage: Stage::Refined, r_cd: 0.74, seed: None },
        ];
        let table = sweep_table(&rows);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "Stage \\ TS/s |  0.33 |     1");
        assert_eq!(lines[1], "Raw          |  0.69 |  0.74");
        assert_eq!(lines[2], "Refined      |  0.71 |  0.74");
    }
}
