//! End-to-end behaviour on simulated walkers.

use std::f64::consts::PI;

use wpid_core::acc::acc_features;
use wpid_core::evaluation::{evaluate_run, r_cd, sweep_table, ts_sweep, Attribution};
use wpid_core::model::frame_clock;
use wpid_core::pairing::Matching;
use wpid_core::pipeline::{prepare_acc_features, run, RunOutput};
use wpid_core::similarity::{detect_extremes, score_all, LengthGate};
use wpid_core::simulator::{generate, PersonSpec, Scenario, ScenarioConfig};
use wpid_core::tracer::trace_log;
use wpid_core::video::ratio_sequence;
use wpid_core::{GroundTruth, PipelineParams, SimilarityParams, Stage};

fn quiet(mut config: ScenarioConfig) -> ScenarioConfig {
    config.box_noise = 0.0;
    config.dropout_prob = 0.0;
    for p in &mut config.persons {
        p.carry_noise = 0.0;
    }
    config
}

/// One standing walker, noise free, 10 s.
fn lone_walker(stride: f64, phase: f64, cycles: u32, acc_offset: f64) -> Scenario {
    let mut person = PersonSpec::walker("solo", stride, phase, vec![[320.0, 240.0]]);
    person.ratio_cycles_per_stride = cycles;
    person.acc_phase_offset = acc_offset;
    let config = quiet(ScenarioConfig { persons: vec![person], duration: 10.0, ..ScenarioConfig::two_person() });
    generate(&config).unwrap()
}

fn maxima(values: &[f64]) -> usize {
    detect_extremes(values, 10).values.iter().filter(|&&v| v == 1).count()
}

/// Crests of cos(k (2 pi f t + phase)) inside [0, end), excluding the endpoints.
fn analytic_crests(k: f64, f: f64, phase: f64, end: f64) -> usize {
    (-100..1000)
        .map(|m| (2.0 * PI * m as f64 / k - phase) / (2.0 * PI * f))
        .filter(|t| *t > 0.0 && *t < end)
        .count()
}

#[test]
fn lone_walker_ratio_and_acc_peaks() {
    // a crest midway between two frame ticks would give two equal samples,
    // so both signals are phased away from that
    let phase = -PI;
    let acc_offset = PI / 2.0 + 0.2;
    let s = lone_walker(1.0, phase, 1, acc_offset);
    let traces = trace_log(&s.frames, Default::default());
    assert_eq!(traces.len(), 1);
    let ratio = ratio_sequence(&traces[0]).values();
    assert_eq!(ratio.len(), 300);
    assert_eq!(analytic_crests(1.0, 1.0, phase, 10.0), 10);
    assert_eq!(maxima(&ratio), 10);

    let acc = acc_features(&s.sensors[0], &Default::default(), &frame_clock(&s.frames)).unwrap();
    // |cos| peaks twice per stride
    assert_eq!(analytic_crests(2.0, 1.0, phase + acc_offset, 10.0), 20);
    assert_eq!(maxima(&acc.values()), 20);
}

#[test]
fn six_ratio_cycles_in_a_hundred_frames() {
    // default walker: one ratio cycle per step, two steps per stride
    let s = lone_walker(0.9, 0.4, 2, 0.0);
    let traces = trace_log(&s.frames[..100], Default::default());
    let ratio = ratio_sequence(&traces[0]).values();
    let n = maxima(&ratio);
    assert!((5..=7).contains(&n), "{n} maxima");
}

fn three_person_run(config: &ScenarioConfig, ts: f64) -> (Scenario, RunOutput, GroundTruth) {
    let s = generate(config).unwrap();
    let out = run(&s.frames, &s.sensors, &PipelineParams::default().with_ts_gate(ts)).unwrap();
    let truth = s.truth.ground_truth(&out.box_traces);
    (s, out, truth)
}

fn all_correct(m: &Matching<wpid_core::TraceId, wpid_core::SensorId>, truth: &GroundTruth) -> bool {
    m.pairs.iter().all(|(t, s)| truth.trace_to_person[t] == truth.sensor_to_person[s])
}

#[test]
fn matched_pairs_outscore_mismatched() {
    let s = generate(&ScenarioConfig::two_person()).unwrap();
    let out = run(&s.frames, &s.sensors, &PipelineParams::default()).unwrap();
    let truth = s.truth.ground_truth(&out.box_traces);
    let acc = prepare_acc_features(&s.frames, &s.sensors, &Default::default()).unwrap();
    let long: Vec<_> = trace_log(&s.frames, Default::default())
        .iter()
        .filter(|t| t.entries.len() >= 300)
        .map(ratio_sequence)
        .collect();
    assert!(long.len() >= 2);
    let matrix = score_all(&long, &acc, &SimilarityParams::default(), LengthGate::new(2.0, 30.0));
    for ratio in &long {
        let owner = &truth.trace_to_person[&ratio.trace_id];
        let (own, others): (Vec<_>, Vec<_>) = acc.iter().partition(|a| &truth.sensor_to_person[&a.sensor_id] == owner);
        let own = matrix.get(&ratio.trace_id, &own[0].sensor_id).unwrap();
        for other in others {
            let score = matrix.get(&ratio.trace_id, &other.sensor_id).unwrap();
            assert!(own > score, "{}: own {own} vs {score}", ratio.trace_id);
        }
    }
}

#[test]
fn raw_pairing_is_right_at_frame_300() {
    let (_, out, truth) = three_person_run(&ScenarioConfig::three_person(), 2.0);
    let frame = out.frames.iter().find(|f| f.frame_index == 300).unwrap();
    assert_eq!(frame.raw.pairs.len(), 3);
    assert!(all_correct(&frame.raw, &truth), "{:?}", frame.raw.pairs);
}

#[test]
fn noise_free_walkers_are_all_paired_correctly() {
    let (_, out, truth) = three_person_run(&quiet(ScenarioConfig::three_person()), 2.0);
    for stage in Stage::ALL {
        let c = evaluate_run(&out, &truth, stage, Attribution::SensorSide).unwrap();
        assert_eq!(r_cd(&c).unwrap(), 1.0, "{stage}");
    }
}

fn pair_changes(out: &RunOutput, stage: Stage) -> usize {
    let picks: Vec<_> = out
        .frames
        .iter()
        .map(|f| match stage {
            Stage::Raw => &f.raw.pairs,
            Stage::Refined => &f.refined.pairs,
        })
        .collect();
    picks.windows(2).filter(|w| w[0] != w[1]).count()
}

#[test]
fn refined_pairs_change_no_more_often_than_raw() {
    for config in [ScenarioConfig::three_person(), ScenarioConfig::two_person(), ScenarioConfig::identical_pair()] {
        let (_, out, _) = three_person_run(&config, 1.0);
        assert!(out.frames.len() >= 2000);
        let (raw, refined) = (pair_changes(&out, Stage::Raw), pair_changes(&out, Stage::Refined));
        assert!(refined <= raw, "refined {refined} vs raw {raw}");
    }
}

#[test]
fn sweep_rows_and_trend() {
    let s = generate(&ScenarioConfig::three_person()).unwrap();
    let params = PipelineParams::default();
    let ts = [0.33, 1.0, 2.0, 3.0, 4.0];
    let rows = ts_sweep(&s.frames, &s.sensors, &s.truth, &params, &ts, &Stage::ALL).unwrap();
    assert_eq!(rows.len(), 10);
    for pair in rows.chunks(2) {
        let (raw, refined) = (&pair[0], &pair[1]);
        assert_eq!((raw.stage, refined.stage), (Stage::Raw, Stage::Refined));
        assert!((0.0..=1.0).contains(&raw.r_cd));
        assert!(refined.r_cd >= raw.r_cd - 0.02, "ts {}: {} vs {}", raw.ts, refined.r_cd, raw.r_cd);
        assert_eq!(raw.seed, Some(1));
    }
    assert_eq!(sweep_table(&rows).lines().count(), 3);

    let single = ts_sweep(&s.frames, &s.sensors, &s.truth, &params, &[2.0], &[Stage::Raw]).unwrap();
    assert_eq!(single.len(), 1);
    assert_eq!(single[0].r_cd, rows[4].r_cd);
}

#[test]
fn runs_are_deterministic() {
    let config = ScenarioConfig::two_person();
    let a = generate(&config).unwrap();
    let b = generate(&config).unwrap();
    assert_eq!(a, b);
    let params = PipelineParams::default();
    let rows = |s: &Scenario| ts_sweep(&s.frames, &s.sensors, &s.truth, &params, &[1.0, 3.0], &Stage::ALL).unwrap();
    assert_eq!(rows(&a), rows(&b));
}
