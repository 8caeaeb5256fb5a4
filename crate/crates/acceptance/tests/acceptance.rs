//! Acceptance run: one PASS/FAIL line per criterion, thresholds pinned below.
//!
//! Built with `harness = false` so the lines are always printed and the
//! runtimes are measured one criterion at a time. Exits non-zero when any
//! criterion fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use projlab::bounds::{bound_thm32, chain_certificate, EngineConfig, Variant};
use projlab::directions::{scale_seq_paper, DEFAULT_SEQ_CAP};
use projlab::harness::{parse_config_str, run_experiment, write_report, ExperimentReport};
use projlab::profile::ComplexityProfile;
use projlab::rational::{int, parse_rat, rat, to_f64, Rat};
use projlab::Error;

const EXPONENT_TOL: f64 = 0.05;
const SLOPE_TOL: f64 = 0.03;
const D0_MIN_SLOPE: f64 = 0.95;
const DS_MIN_SLOPE: f64 = 0.75;
const CHAIN_DELTA_MAX: f64 = 0.05;

const AC1_LIMIT: Duration = Duration::from_secs(5);
const AC2_LIMIT: Duration = Duration::from_secs(60);
const AC3_LIMIT: Duration = Duration::from_secs(120);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn run(text: &str) -> ExperimentReport {
    let cfg = parse_config_str(text).expect("acceptance configs parse");
    run_experiment(&cfg).expect("experiment runs")
}

fn summary_rat(rep: &ExperimentReport, key: &str) -> Rat {
    let v = &rep.summary[key].value;
    parse_rat(v.as_str().unwrap_or_else(|| panic!("{key} is not a rational")))
        .expect("rational summary value")
}

fn summary_f64(rep: &ExperimentReport, key: &str) -> f64 {
    rep.summary[key].as_f64().unwrap_or_else(|| panic!("{key} is not numeric"))
}

fn check_value(rep: &ExperimentReport, name: &str) -> f64 {
    rep.check_named(name)
        .and_then(|c| c.value.as_f64())
        .unwrap_or_else(|| panic!("missing check {name}"))
}

fn direction_sizes() -> Outcome {
    let t = Instant::now();
    let d0 = run("[experiment]\nid = E1\n[sequence]\nrule = geo:4\nlength = 4\n[mask]\nkind = d0\nhorizon = 512\n");
    let ds = run("[experiment]\nid = E1\n[sequence]\nrule = geo:4\nlength = 4\n[mask]\nkind = ds\ns = 1/2\nhorizon = 512\n");
    let elapsed = t.elapsed();

    let want = [(16u64, rat(1, 2)), (96, rat(1, 3)), (512, rat(1, 4))];
    let d0_ok = want
        .iter()
        .all(|(k, e)| summary_rat(&d0, &format!("k{k:05}.exponent")) == *e);
    let mut anchors: Vec<(u64, f64)> = ds
        .summary
        .keys()
        .filter_map(|k| k.strip_suffix(".exponent").and_then(|s| s.strip_prefix('k')))
        .map(|k| {
            let k: u64 = k.parse().expect("anchor key");
            (k, to_f64(&summary_rat(&ds, &format!("k{k:05}.exponent"))))
        })
        .collect();
    anchors.sort_by_key(|a| a.0);
    let deepest = &anchors[anchors.len().saturating_sub(2)..];
    let ds_ok = deepest.len() == 2 && deepest.iter().all(|a| (a.1 - 0.5).abs() <= EXPONENT_TOL);
    let fast = elapsed < AC1_LIMIT;
    outcome(
        d0_ok && ds_ok && fast && d0.pass && ds.pass,
        format!(
            "D0 exponents at k=16,96,512: {}; D1/2 deepest anchors {:?}; {:.2}s (< {}s)",
            want.iter()
                .map(|(k, _)| projlab::rational::format_rat(&summary_rat(&d0, &format!("k{k:05}.exponent"))))
                .collect::<Vec<_>>()
                .join(", "),
            deepest,
            elapsed.as_secs_f64(),
            AC1_LIMIT.as_secs()
        ),
    )
}

fn ad_regular(e2: &ExperimentReport, elapsed: Duration) -> Outcome {
    let set = summary_f64(e2, "set.slope");
    let axis = summary_f64(e2, "x_axis.slope");
    let oracle = e2.check_named("x_axis_counts_match_oracle").is_some_and(|c| c.pass);
    let worst = check_value(e2, "min_direction_slope");
    let below = summary_f64(e2, "directions.below_threshold");
    let pass = (set - 1.0).abs() <= SLOPE_TOL
        && (axis - 0.5).abs() <= SLOPE_TOL
        && oracle
        && worst >= D0_MIN_SLOPE
        && elapsed < AC2_LIMIT;
    outcome(
        pass,
        format!(
            "set slope {set:.4}; x-axis slope {axis:.4} (N = 2^m: {oracle}); min D0 slope {worst:.4} \
             (>= {D0_MIN_SLOPE}, {below} of {} below); {:.2}s (< {}s)",
            e2.trial_count,
            elapsed.as_secs_f64(),
            AC2_LIMIT.as_secs()
        ),
    )
}

fn weakly_regular(e3: &ExperimentReport, elapsed: Duration) -> Outcome {
    let worst = check_value(e3, "min_direction_slope");
    outcome(
        worst >= DS_MIN_SLOPE && elapsed < AC3_LIMIT && e3.trial_count == 20,
        format!(
            "min slope over {} Ds(1/2) directions {worst:.4} (>= {DS_MIN_SLOPE}); {:.2}s (< {}s)",
            e3.trial_count,
            elapsed.as_secs_f64(),
            AC3_LIMIT.as_secs()
        ),
    )
}

fn profile_calculus(e5: &ExperimentReport) -> Outcome {
    let ex = check_value(e5, "exhaustive_violations");
    let fz = check_value(e5, "fuzz_violations");
    let cases = summary_f64(e5, "exhaustive.cases");
    let fuzz = summary_f64(e5, "fuzz.cases");
    outcome(
        ex == 0.0 && fz == 0.0 && fuzz == 10_000.0 && e5.config["profile.exhaustive_max"] == "12",
        format!("{cases} exhaustive cases, {fuzz} fuzzed: {ex} + {fz} violations"),
    )
}

/// `max{K - r, (K - t)/2, 0} + 10 C eps r` with eps = e/100, scaled by 100.
fn closed_form_times_100(k: i64, r: i64, t: i64, c: i64, e: i64) -> i64 {
    (100 * (k - r)).max(50 * (k - t)).max(0) + 10 * c * e * r
}

fn partial_direction_grid() -> Outcome {
    let mut checked = 0u64;
    let mut mismatches = 0u64;
    for e in [0i64, 1, 10] {
        let eps = rat(i128::from(e), 100);
        for r in 0..=40i64 {
            for t in 0..=40i64 {
                for c in 1..=4i64 {
                    for k in 0..=40i64 {
                        let got = bound_thm32(k, r as u64, t as u64, c as u64, eps);
                        let admissible = t <= r && t * c >= r;
                        match (got, admissible) {
                            (Ok(v), true) => {
                                checked += 1;
                                let want = rat(i128::from(closed_form_times_100(k, r, t, c, e)), 100);
                                if v != want {
                                    mismatches += 1;
                                }
                            }
                            (Err(Error::Domain(_) | Error::Precondition(_)), false) => {}
                            _ => mismatches += 1,
                        }
                    }
                }
            }
        }
    }
    outcome(
        mismatches == 0 && checked > 0,
        format!("{checked} admissible grid points, {mismatches} mismatches"),
    )
}

fn half_dimension(e4: &ExperimentReport) -> Outcome {
    let ex = check_value(e4, "exhaustive_violations");
    let fz = check_value(e4, "fuzz_violations");
    let tight = e4.check_named("tight_family_exact").is_some_and(|c| c.pass);
    let n = summary_f64(e4, "exhaustive.profiles");
    outcome(
        ex == 0.0 && fz == 0.0 && tight,
        format!(
            "{n} exhaustive + {} fuzzed profiles: {ex} + {fz} violations; tight family exact: {tight}",
            summary_f64(e4, "fuzz.profiles")
        ),
    )
}

/// Worst shortfall `min(alpha, 1) - certified_rate` over the alpha grid.
fn chain_delta(horizon: u64, variant: Variant) -> f64 {
    let seq = scale_seq_paper(2, DEFAULT_SEQ_CAP).expect("paper sequence");
    let cfg = EngineConfig::default();
    let pe = ComplexityProfile::ideal_direction(horizon);
    [rat(3, 10), rat(4, 5), int(1)]
        .iter()
        .map(|&alpha| {
            let px = ComplexityProfile::linear(horizon, alpha, 1).expect("linear profile");
            let c = chain_certificate(&px, &pe, &seq, alpha, variant, &cfg).expect("chain");
            to_f64(&(alpha.min(int(1)) - c.certified_rate))
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn chained() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, variant) in [("log2", Variant::Log2), ("eps:1/1000", Variant::Eps(rat(1, 1000)))] {
        let small = chain_delta(1 << 10, variant);
        let large = chain_delta(1 << 14, variant);
        pass &= large < small && large < CHAIN_DELTA_MAX;
        parts.push(format!("{name}: delta(2^10) {small:.4}, delta(2^14) {large:.4}"));
    }
    outcome(pass, format!("{} (need shrinking and < {CHAIN_DELTA_MAX})", parts.join("; ")))
}

fn determinism(firsts: &[(&str, ExperimentReport)], scratch: &Path) -> Outcome {
    let mut same = Vec::new();
    let mut differ = Vec::new();
    for (text, first) in firsts {
        let cfg = parse_config_str(text).expect("config");
        let a = scratch.join(format!("{}-a", cfg.id));
        let b = scratch.join(format!("{}-b", cfg.id));
        write_report(first, &a).expect("write first report");
        let second = run_experiment(&cfg).expect("rerun");
        write_report(&second, &b).expect("write second report");
        let identical = ["report.json", "trials.jsonl"].iter().all(|f| {
            std::fs::read(a.join(f)).expect("read") == std::fs::read(b.join(f)).expect("read")
        });
        if identical {
            same.push(cfg.id.to_string());
        } else {
            differ.push(cfg.id.to_string());
        }
    }
    outcome(
        differ.is_empty(),
        format!("byte-identical reruns: [{}]; differing: [{}]", same.join(" "), differ.join(" ")),
    )
}

fn main() -> ExitCode {
    let mut lines: Vec<(&str, Outcome)> = Vec::new();
    let report = |id: &'static str, o: Outcome, lines: &mut Vec<(&str, Outcome)>| {
        println!("{id} {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        lines.push((id, o));
    };

    report("AC1", direction_sizes(), &mut lines);

    const E2: &str = "[experiment]\nid = E2\n";
    const E3: &str = "[experiment]\nid = E3\n";
    const E4: &str = "[experiment]\nid = E4\n";
    const E5: &str = "[experiment]\nid = E5\n";
    const E1: &str = "[experiment]\nid = E1\n";

    let t = Instant::now();
    let e2 = run(E2);
    report("AC2", ad_regular(&e2, t.elapsed()), &mut lines);

    let t = Instant::now();
    let e3 = run(E3);
    report("AC3", weakly_regular(&e3, t.elapsed()), &mut lines);

    let e5 = run(E5);
    report("AC4", profile_calculus(&e5), &mut lines);

    report("AC5", partial_direction_grid(), &mut lines);

    let e4 = run(E4);
    report("AC6", half_dimension(&e4), &mut lines);

    report("AC7", chained(), &mut lines);

    let scratch = tempfile::tempdir().expect("temp dir");
    let firsts = vec![(E1, run(E1)), (E2, e2), (E3, e3), (E4, e4), (E5, e5)];
    report("AC8", determinism(&firsts, scratch.path()), &mut lines);

    let failed: Vec<&str> = lines.iter().filter(|l| !l.1.pass).map(|l| l.0).collect();
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", lines.len());
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failing {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
