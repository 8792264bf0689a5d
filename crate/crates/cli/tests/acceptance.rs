//! Acceptance suite. Prints one PASS/FAIL line per criterion and fails if any
//! criterion fails. Run with `cargo test -p wpid-cli --test acceptance`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use wpid_cli::config::Preset;
use wpid_cli::{cmd_match, cmd_simulate, Overrides, RunConfig};
use wpid_core::acc::ButterworthLowpass;
use wpid_core::evaluation::{evaluate_run, r_cd, ts_sweep, Attribution};
use wpid_core::pairing::solve_lsap;
use wpid_core::pipeline::run;
use wpid_core::rng::Xoshiro256;
use wpid_core::similarity::{detect_extremes, sim, SimilarityParams, TernarySequence};
use wpid_core::simulator::{generate, ScenarioConfig};
use wpid_core::{PipelineParams, Stage};

enum Outcome {
    Pass(String),
    Warn(String),
    Fail(String),
}

// ---------------------------------------------------------------- oracles

/// Best objective and lexicographically smallest best pair list over every
/// partial injective map of rows to columns with positive weight.
fn brute_force_lsap(w: &[Vec<f64>]) -> (f64, Vec<(usize, usize)>) {
    fn go(
        w: &[Vec<f64>],
        row: usize,
        used: &mut [bool],
        current: &mut Vec<(usize, usize)>,
        best: &mut (f64, Vec<(usize, usize)>),
    ) {
        if row == w.len() {
            let value: f64 = current.iter().map(|&(r, c)| w[r][c]).sum();
            if value > best.0 || (value == best.0 && *current < best.1) {
                *best = (value, current.clone());
            }
            return;
        }
        for c in 0..used.len() {
            if !used[c] && w[row][c] > 0.0 {
                used[c] = true;
                current.push((row, c));
                go(w, row + 1, used, current, best);
                current.pop();
                used[c] = false;
            }
        }
        go(w, row + 1, used, current, best);
    }
    let mut best = (0.0, Vec::new());
    go(w, 0, &mut vec![false; w[0].len()], &mut Vec::new(), &mut best);
    best
}

fn brute_force_extremes(seq: &[f64], half: usize) -> Vec<i8> {
    let n = seq.len() as i64;
    (0..n)
        .map(|x| {
            let neighbours: Vec<f64> = (x - half as i64..=x + half as i64)
                .filter(|&y| y != x && y >= 0 && y < n)
                .map(|y| seq[y as usize])
                .collect();
            let v = seq[x as usize];
            if neighbours.is_empty() {
                0
            } else if neighbours.iter().all(|&u| v > u) {
                1
            } else if neighbours.iter().all(|&u| v < u) {
                -1
            } else {
                0
            }
        })
        .collect()
}

/// Amplitude of the `freq` component in the second half of `signal`, by
/// least squares on sine and cosine.
fn steady_state_amplitude(signal: &[f64], freq: f64, rate: f64) -> f64 {
    let (mut ss, mut cc, mut sc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, y) in signal.iter().enumerate().skip(signal.len() / 2) {
        let (s, c) = (2.0 * PI * freq * i as f64 / rate).sin_cos();
        ss += s * s;
        cc += c * c;
        sc += s * c;
        ys += y * s;
        yc += y * c;
    }
    let det = ss * cc - sc * sc;
    ((ys * cc - yc * sc) / det).hypot((yc * ss - ys * sc) / det)
}

// --------------------------------------------------------------- criteria

fn lsap_exactness() -> Outcome {
    let started = Instant::now();
    let mut rng = Xoshiro256::seed_from_u64(0x15a9);
    let mut mismatches = 0;
    for k in 0..1000 {
        let rows = 1 + rng.below(6);
        let cols = 1 + rng.below(6);
        // every third instance uses small integers so that ties are common
        let w: Vec<Vec<f64>> = (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|_| if k % 3 == 0 { rng.below(4) as f64 } else { rng.next_f64() * 10.0 })
                    .collect()
            })
            .collect();
        let (value, pairs) = brute_force_lsap(&w);
        let mut map = BTreeMap::new();
        for (r, row) in w.iter().enumerate() {
            for (c, &v) in row.iter().enumerate() {
                map.insert((r, c), v);
            }
        }
        let m = solve_lsap(&map);
        if m.objective != value || m.pairs != pairs {
            mismatches += 1;
        }
    }
    let secs = started.elapsed().as_secs_f64();
    let detail = format!("1000 instances up to 6x6, {mismatches} mismatches, {secs:.2} s");
    if mismatches == 0 && secs < 5.0 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn filter_response() -> Outcome {
    let rate = 100.0;
    let gain_db = |freq: f64| {
        let mut f = ButterworthLowpass::design(10, 15.0, rate).expect("valid design");
        let out: Vec<f64> = (0..20_000).map(|i| f.process((2.0 * PI * freq * i as f64 / rate).sin())).collect();
        20.0 * steady_state_amplitude(&out, freq, rate).log10()
    };
    let (at_cutoff, at_25) = (gain_db(15.0), gain_db(25.0));
    let detail = format!("{at_cutoff:.3} dB at 15 Hz, {at_25:.1} dB at 25 Hz");
    if (at_cutoff + 3.0).abs() <= 0.5 && at_25 <= -40.0 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn extremum_oracle() -> Outcome {
    let mut rng = Xoshiro256::seed_from_u64(0xe7e);
    let mut mismatches = 0;
    for k in 0..1000 {
        let len = 1 + rng.below(500);
        // half the sequences are coarse integers with plateaus and ties
        let seq: Vec<f64> = (0..len)
            .map(|_| if k % 2 == 0 { rng.below(5) as f64 } else { rng.next_normal() })
            .collect();
        if detect_extremes(&seq, 10).values != brute_force_extremes(&seq, 5) {
            mismatches += 1;
        }
    }
    let detail = format!("1000 sequences up to length 500, {mismatches} mismatches");
    if mismatches == 0 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn similarity_fixtures() -> Outcome {
    let p = SimilarityParams::default();
    let marks = |len: usize, at: &[(usize, i8)]| {
        let mut values = vec![0i8; len];
        for &(x, v) in at {
            values[x] = v;
        }
        TernarySequence { start_frame: 0, values }
    };
    let one = sim(&marks(40, &[(10, 1), (25, -1)]), &marks(40, &[(12, 1), (25, -1)]), &p);
    let four = marks(60, &[(5, 1), (15, -1), (30, 1), (45, -1)]);
    let eight = sim(&four, &four.clone(), &p);
    let zero = sim(&marks(40, &[]), &marks(40, &[(12, 1)]), &p);
    let detail = format!("scores {one}, {eight}, {zero}");
    if one == 1.0 && eight == 8.0 && zero == 0.0 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

const TS_VALUES: [f64; 5] = [0.33, 1.0, 2.0, 3.0, 4.0];

fn end_to_end_identification() -> Outcome {
    let started = Instant::now();
    let s = generate(&ScenarioConfig::three_person()).expect("valid scenario");
    let rows = ts_sweep(&s.frames, &s.sensors, &s.truth, &PipelineParams::default(), &TS_VALUES, &Stage::ALL)
        .expect("sweep runs");
    let secs = started.elapsed().as_secs_f64();
    let rate = |ts: f64, stage: Stage| rows.iter().find(|r| r.ts == ts && r.stage == stage).expect("row").r_cd;
    let refined_at_2 = rate(2.0, Stage::Refined);
    let trend_ok = TS_VALUES.iter().all(|&ts| rate(ts, Stage::Refined) >= rate(ts, Stage::Raw) - 0.02);
    let cells: Vec<String> = TS_VALUES
        .iter()
        .map(|&ts| format!("{ts}s {:.3}/{:.3}", rate(ts, Stage::Raw), rate(ts, Stage::Refined)))
        .collect();
    let detail = format!("raw/refined: {}; {secs:.1} s", cells.join(", "));
    if refined_at_2 >= 0.9 && trend_ok && secs < 60.0 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn degenerate_honesty() -> Outcome {
    // one run locks onto either permutation by chance, so rates are pooled
    // as a mean over seeds
    let seeds = 1..=32u64;
    let params = PipelineParams::default().with_ts_gate(2.0);
    let mut sums = [0.0; 2];
    for seed in seeds.clone() {
        let s = generate(&ScenarioConfig { seed, ..ScenarioConfig::identical_pair() }).expect("valid scenario");
        let out = run(&s.frames, &s.sensors, &params).expect("pipeline runs");
        let truth = s.truth.ground_truth(&out.box_traces);
        for (k, stage) in Stage::ALL.into_iter().enumerate() {
            let counters = evaluate_run(&out, &truth, stage, Attribution::SensorSide).expect("known ids");
            sums[k] += r_cd(&counters).unwrap_or(0.0);
        }
    }
    let n = seeds.count() as f64;
    let (raw, refined) = (sums[0] / n, sums[1] / n);
    let detail = format!("mean R_cd over 32 seeds: raw {raw:.3}, refined {refined:.3}");
    if raw <= 0.65 && refined <= 0.65 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn throughput() -> Outcome {
    let s = generate(&ScenarioConfig::two_person()).expect("valid scenario");
    let params = PipelineParams::default();
    // best of three, to keep scheduler noise out
    let mut best = f64::INFINITY;
    let mut frames = 0;
    for _ in 0..3 {
        let started = Instant::now();
        let out = run(&s.frames, &s.sensors, &params).expect("pipeline runs");
        best = best.min(started.elapsed().as_secs_f64());
        frames = out.frames.len();
    }
    let fps = frames as f64 / best;
    let detail = format!("{frames} frames at {fps:.0} frames/s");
    if fps >= 120.0 {
        Outcome::Pass(detail)
    } else if fps >= 60.0 {
        Outcome::Warn(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).expect("readable dir") {
            let path = entry.expect("dir entry").path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().is_some_and(|n| n != "timing.json") {
                let name = path.strip_prefix(dir).expect("inside dir").display().to_string();
                files.push((name, fs::read(&path).expect("readable file")));
            }
        }
    }
    files.sort();
    files
}

fn determinism() -> Outcome {
    let run_once = || {
        let dir = tempfile::TempDir::new().expect("temp dir");
        let sim_dir = dir.path().join("sim");
        let mut simulate = RunConfig::default();
        simulate.scenario.preset = Preset::TwoPerson;
        simulate.apply(Overrides { seed: Some(42), out: Some(sim_dir.clone()), ..Overrides::default() });
        cmd_simulate(&simulate).expect("simulate");
        let mut matching = RunConfig::default();
        matching.apply(Overrides { input: Some(sim_dir), out: Some(dir.path().join("match")), ..Overrides::default() });
        cmd_match(&matching).expect("match");
        (snapshot(dir.path()), dir)
    };
    let (a, _keep_a) = run_once();
    let (b, _keep_b) = run_once();
    let differing: Vec<&str> =
        a.iter().zip(&b).filter(|(x, y)| x != y).map(|(x, _)| x.0.as_str()).collect();
    let detail = format!("{} files compared, {} differ", a.len(), differing.len());
    if a.len() == b.len() && differing.is_empty() && a.len() >= 6 {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(format!("{detail}: {differing:?}"))
    }
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check); 8] = [
        ("LSAP exactness", lsap_exactness),
        ("filter response", filter_response),
        ("extremum oracle", extremum_oracle),
        ("similarity fixtures", similarity_fixtures),
        ("end-to-end identification", end_to_end_identification),
        ("degenerate scenario", degenerate_honesty),
        ("throughput", throughput),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let (tag, detail) = match check() {
            Outcome::Pass(d) => ("PASS", d),
            Outcome::Warn(d) => ("WARN", d),
            Outcome::Fail(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {} {tag} {name}: {detail}", k + 1);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
