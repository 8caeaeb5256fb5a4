use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{f64_value, rat_value, ExperimentConfig, ExperimentReport, Series, Tagged, Trial, Provenance};
use crate::bounds::bourgain_certificate;
use crate::directions::{
    covering_exponents, mask_intervals, sample_directions, BitSource, DirectionRecord,
    DirectionSample, MaskKind, MaskSpec,
};
use crate::energy::{collision_bounds, collision_slope, density_positions};
use crate::error::{Error, Result};
use crate::fractal::{box_counts, dim_regress, four_corner, gen_ifs, project, DyadicPointSet};
use crate::profile::{
    classify_interval, partition, split_teal_yellow, Color, ComplexityProfile, IntervalKind,
    LabeledInterval, SlackMode,
};
use crate::rational::{ceil_int, ceil_log2, int, rat, to_f64, Rat};

fn mask_spec(cfg: &ExperimentConfig) -> Result<MaskSpec> {
    let kind = cfg
        .mask
        .ok_or_else(|| Error::Config(format!("{} needs mask.kind", cfg.id)))?;
    mask_intervals(kind, &cfg.sequence, cfg.horizon)
}

fn direction_inputs(d: &DirectionSample, seed: u64) -> BTreeMap<String, Value> {
    let rec = DirectionRecord::from_sample(d, Some(seed));
    BTreeMap::from([
        ("angle".to_string(), Value::String(rec.angle)),
        ("bits".to_string(), Value::String(rec.bits)),
        ("depth".to_string(), json!(rec.depth)),
        ("index".to_string(), json!(rec.index)),
    ])
}

fn increments_text(p: &ComplexityProfile) -> String {
    p.values()
        .windows(2)
        .map(|w| char::from_digit((w[1] - w[0]) as u32, 10).expect("steps are digits"))
        .collect()
}

// ---------------------------------------------------------------- E1

pub(crate) fn e1(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let spec = mask_spec(cfg)?;
    let cover = covering_exponents(&spec);
    let dirs = sample_directions(&spec, &BitSource::Seeded(cfg.seed), cfg.samples)?;
    let tol = cfg.tolerance("exponent");
    let mut rep = ExperimentReport::new(cfg);

    let respects = dirs
        .iter()
        .all(|d| d.bits.iter().enumerate().all(|(i, &b)| !b || !spec.is_masked(i as u64 + 1)));
    rep.check(
        "samples_respect_mask",
        Tagged::measured(dirs.len()),
        "every sampled bit inside a mask interval is 0",
        respects,
    );

    let mut structural = Vec::new();
    let mut exact = Vec::new();
    let mut sampled = Vec::new();
    let deepest: Vec<u64> = cover.iter().rev().take(2).map(|c| c.k).collect();
    for c in &cover {
        let k = c.k;
        let prefixes: BTreeSet<&[bool]> = dirs.iter().map(|d| &d.bits[..k as usize]).collect();
        let distinct = prefixes.len() as u64;
        let sampled_exp = (distinct as f64).log2() / k as f64;
        structural.push([k as f64, to_f64(&c.exponent)]);
        exact.push([k as f64, to_f64(&c.exact_exponent)]);
        sampled.push([k as f64, sampled_exp]);
        rep.summary.insert(format!("k{k:05}.exponent"), Tagged::closed_form(rat_value(&c.exponent)));
        rep.summary.insert(
            format!("k{k:05}.exact_exponent"),
            Tagged::closed_form(rat_value(&c.exact_exponent)),
        );
        rep.summary.insert(format!("k{k:05}.sampled_prefixes"), Tagged::measured(distinct));

        // the 2^{r_n} cover contains every sample
        let fits = c.bound_log2 >= 64 || distinct <= 1u64 << c.bound_log2;
        rep.check(
            &format!("k{k:05}.cover_contains_samples"),
            Tagged::measured(distinct),
            &format!("<= 2^{}", c.bound_log2),
            fits,
        );
        match spec.kind {
            MaskKind::D0 => {
                let predicted = rat(1, c.n as i128);
                rep.check(
                    &format!("k{k:05}.exponent"),
                    Tagged::closed_form(rat_value(&c.exponent)),
                    &format!("= 1/{}", c.n),
                    c.exponent == predicted,
                );
            }
            MaskKind::Ds { s } | MaskKind::DepsS { eps: s, .. } => {
                if deepest.contains(&k) {
                    let gap = (to_f64(&c.exponent) - to_f64(&s)).abs();
                    rep.check(
                        &format!("k{k:05}.exponent"),
                        Tagged::closed_form(rat_value(&c.exponent)),
                        &format!("within {tol} of {}", crate::rational::format_rat(&s)),
                        gap <= tol,
                    );
                }
            }
        }
    }
    rep.summary.insert("anchors".into(), Tagged::closed_form(cover.len()));
    rep.series.push(Series {
        name: "exponent_vs_scale".into(),
        title: "covering exponent log2 N / k at the anchors".into(),
        x_label: "k".into(),
        y_label: "log2 N / k".into(),
        provenance: Provenance::ClosedForm,
        points: structural,
    });
    rep.series.push(Series {
        name: "exact_exponent_vs_scale".into(),
        title: "free-bit prefix count exponent at the anchors".into(),
        x_label: "k".into(),
        y_label: "log2 N / k".into(),
        provenance: Provenance::ClosedForm,
        points: exact,
    });
    rep.series.push(Series {
        name: "sampled_exponent_vs_scale".into(),
        title: "distinct sampled prefixes at the anchors".into(),
        x_label: "k".into(),
        y_label: "log2 N / k".into(),
        provenance: Provenance::Measured,
        points: sampled,
    });

    for d in &dirs {
        rep.trials.push(Trial {
            key: format!("sample-{:08}", d.index),
            inputs: direction_inputs(d, cfg.seed),
            values: BTreeMap::from([(
                "angle_over_pi".to_string(),
                Tagged::measured(f64_value(d.angle_fraction())),
            )]),
        });
    }
    Ok(rep)
}

// ---------------------------------------------------------------- E2

fn projected_counts(sets: &[(u32, DyadicPointSet)], e: (f64, f64)) -> Result<Vec<(u32, u64)>> {
    sets.iter()
        .map(|(m, set)| {
            let k = 2 * m;
            let p = project(set, e, k)?;
            Ok(box_counts(&p, &[k])?[0])
        })
        .collect()
}

fn counts_value(counts: &[(u32, u64)]) -> Value {
    Value::Array(counts.iter().map(|&(k, n)| json!([k, n])).collect())
}

pub(crate) fn e2(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let spec = mask_spec(cfg)?;
    let dirs = sample_directions(&spec, &BitSource::Seeded(cfg.seed), cfg.samples)?;
    let maps = four_corner();
    let sets: Vec<(u32, DyadicPointSet)> = cfg
        .depths
        .iter()
        .map(|&m| gen_ifs(&maps, m).map(|s| (m, s)))
        .collect::<Result<_>>()?;
    let tol = cfg.tolerance("slope");
    let min_slope = cfg.tolerance("min_slope");
    let mut rep = ExperimentReport::new(cfg);

    let set_counts: Vec<(u32, u64)> = sets
        .iter()
        .map(|(m, s)| Ok(box_counts(s, &[2 * m])?[0]))
        .collect::<Result<_>>()?;
    let set_fit = dim_regress(&set_counts)?;
    rep.summary.insert("set.slope".into(), Tagged::measured(f64_value(set_fit.slope)));
    rep.summary.insert("set.counts".into(), Tagged::measured(counts_value(&set_counts)));
    rep.check(
        "set_slope",
        Tagged::measured(f64_value(set_fit.slope)),
        &format!("1 +- {tol}"),
        (set_fit.slope - 1.0).abs() <= tol,
    );

    for (name, e) in [("x_axis", (1.0, 0.0)), ("y_axis", (0.0, 1.0))] {
        let counts = projected_counts(&sets, e)?;
        let fit = dim_regress(&counts)?;
        // the axis shadow of depth m is 2^m cells of side 4^-m
        let oracle = counts.iter().zip(&sets).all(|(&(_, n), (m, _))| n == 1u64 << m);
        rep.summary.insert(format!("{name}.counts"), Tagged::measured(counts_value(&counts)));
        rep.summary.insert(format!("{name}.slope"), Tagged::measured(f64_value(fit.slope)));
        rep.check(
            &format!("{name}_counts_match_oracle"),
            Tagged::measured(counts_value(&counts)),
            "N = 2^m at depth m",
            oracle,
        );
        rep.check(
            &format!("{name}_slope"),
            Tagged::measured(f64_value(fit.slope)),
            &format!("0.5 +- {tol}"),
            (fit.slope - 0.5).abs() <= tol,
        );
    }

    let fits: Vec<(Vec<(u32, u64)>, crate::fractal::Regression)> = dirs
        .par_iter()
        .map(|d| {
            let counts = projected_counts(&sets, d.unit_vector)?;
            let fit = dim_regress(&counts)?;
            Ok((counts, fit))
        })
        .collect::<Result<_>>()?;
    let mut by_angle = Vec::new();
    let mut worst = f64::INFINITY;
    for (d, (counts, fit)) in dirs.iter().zip(&fits) {
        worst = worst.min(fit.slope);
        by_angle.push([d.angle_fraction(), fit.slope]);
        rep.trials.push(Trial {
            key: format!("dir-{:08}", d.index),
            inputs: direction_inputs(d, cfg.seed),
            values: BTreeMap::from([
                ("angle_over_pi".to_string(), Tagged::measured(f64_value(d.angle_fraction()))),
                ("counts".to_string(), Tagged::measured(counts_value(counts))),
                ("slope".to_string(), Tagged::measured(f64_value(fit.slope))),
                ("stderr".to_string(), Tagged::measured(f64_value(fit.stderr))),
            ]),
        });
    }
    let below = fits.iter().filter(|f| f.1.slope < min_slope).count();
    let mean = fits.iter().map(|f| f.1.slope).sum::<f64>() / fits.len().max(1) as f64;
    rep.summary.insert("directions.mean_slope".into(), Tagged::measured(f64_value(mean)));
    rep.summary.insert("directions.below_threshold".into(), Tagged::measured(below));
    if !fits.is_empty() {
        rep.summary.insert("directions.min_slope".into(), Tagged::measured(f64_value(worst)));
    }
    rep.check(
        "min_direction_slope",
        Tagged::measured(f64_value(if fits.is_empty() { 0.0 } else { worst })),
        &format!(">= {min_slope}"),
        !fits.is_empty() && worst >= min_slope,
    );

    by_angle.sort_by(|a, b| a[0].total_cmp(&b[0]));
    rep.series.push(Series {
        name: "projection_slope_vs_angle".into(),
        title: "box-count slope of the projection along sampled directions".into(),
        x_label: "theta / pi".into(),
        y_label: "slope".into(),
        provenance: Provenance::Measured,
        points: by_angle,
    });
    rep.series.push(Series {
        name: "set_counts".into(),
        title: "box counts of the four-corner set".into(),
        x_label: "k".into(),
        y_label: "log2 N".into(),
        provenance: Provenance::Measured,
        points: set_counts.iter().map(|&(k, n)| [f64::from(k), (n as f64).log2()]).collect(),
    });
    Ok(rep)
}

// ---------------------------------------------------------------- E3

pub(crate) fn e3(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let spec = mask_spec(cfg)?;
    let dirs = sample_directions(&spec, &BitSource::Seeded(cfg.seed), cfg.samples)?;
    let (num, den) = (*cfg.density.numer(), *cfg.density.denom());
    let (num, den) = (
        u32::try_from(num).map_err(|_| Error::Config("fractal.density too fine".into()))?,
        u32::try_from(den).map_err(|_| Error::Config("fractal.density too fine".into()))?,
    );
    let free = density_positions(num, den, cfg.precision);
    let min_slope = cfg.tolerance("min_slope");
    let mut rep = ExperimentReport::new(cfg);

    // each axis keeps |free| of R bits: N(k) = 4^{#free <= k} for the set
    let set_counts: Vec<(u32, u64)> = cfg
        .scales
        .iter()
        .map(|&k| (k, 2 * free.iter().filter(|&&i| i <= k).count() as u64))
        .collect();
    let set_pts: Vec<(f64, f64)> = set_counts.iter().map(|&(k, l)| (f64::from(k), l as f64)).collect();
    let set_slope = crate::fractal::least_squares(&set_pts).slope;
    rep.summary.insert("set.free_bits_per_axis".into(), Tagged::closed_form(free.len()));
    rep.summary.insert("set.slope".into(), Tagged::closed_form(f64_value(set_slope)));

    let axis = collision_bounds(&free, &free, (1.0, 0.0), &cfg.scales)?;
    let axis_slope = collision_slope(&axis)?.slope;
    rep.summary.insert("x_axis.slope".into(), Tagged::measured(f64_value(axis_slope)));

    let fits: Vec<(Vec<f64>, crate::fractal::Regression)> = dirs
        .iter()
        .map(|d| {
            let b = collision_bounds(&free, &free, d.unit_vector, &cfg.scales)?;
            let fit = collision_slope(&b)?;
            Ok((b.iter().map(|c| c.log2_count).collect(), fit))
        })
        .collect::<Result<_>>()?;
    let mut by_angle = Vec::new();
    let mut worst: Option<(f64, usize)> = None;
    for (i, (d, (logs, fit))) in dirs.iter().zip(&fits).enumerate() {
        if worst.is_none_or(|w| fit.slope < w.0) {
            worst = Some((fit.slope, i));
        }
        by_angle.push([d.angle_fraction(), fit.slope]);
        let bounds: Value = cfg
            .scales
            .iter()
            .zip(logs)
            .map(|(&k, &l)| json!([k, f64_value(l)]))
            .collect();
        rep.trials.push(Trial {
            key: format!("dir-{:08}", d.index),
            inputs: direction_inputs(d, cfg.seed),
            values: BTreeMap::from([
                ("angle_over_pi".to_string(), Tagged::measured(f64_value(d.angle_fraction()))),
                ("log2_count_lower".to_string(), Tagged::measured(bounds)),
                ("slope".to_string(), Tagged::measured(f64_value(fit.slope))),
                ("stderr".to_string(), Tagged::measured(f64_value(fit.stderr))),
            ]),
        });
    }
    rep.check(
        "min_direction_slope",
        Tagged::measured(f64_value(worst.map_or(0.0, |w| w.0))),
        &format!(">= {min_slope}"),
        worst.is_some_and(|w| w.0 >= min_slope),
    );
    if let Some((slope, i)) = worst {
        rep.summary.insert("directions.min_slope".into(), Tagged::measured(f64_value(slope)));
        rep.series.push(Series {
            name: "worst_direction_bounds".into(),
            title: "collision lower bound on log2 N(k), worst sampled direction".into(),
            x_label: "k".into(),
            y_label: "log2 N lower bound".into(),
            provenance: Provenance::Measured,
            points: cfg.scales.iter().zip(&fits[i].0).map(|(&k, &l)| [f64::from(k), l]).collect(),
        });
    }
    by_angle.sort_by(|a, b| a[0].total_cmp(&b[0]));
    rep.series.push(Series {
        name: "projection_slope_vs_angle".into(),
        title: "collision-bound slope of the projection along sampled directions".into(),
        x_label: "theta / pi".into(),
        y_label: "slope".into(),
        provenance: Provenance::Measured,
        points: by_angle,
    });
    Ok(rep)
}

// ---------------------------------------------------------------- profiles

/// Every planar profile of horizon `r` (steps in `{0, 1, 2}`), `3^r` of them,
/// in base-3 order of the step string.
pub fn exhaustive_profiles(r: u64) -> impl ParallelIterator<Item = (u64, ComplexityProfile)> {
    let total = 3u64.pow(r as u32);
    (0..total).into_par_iter().map(move |code| {
        let mut c = code;
        let mut values = Vec::with_capacity(r as usize + 1);
        values.push(0i64);
        for _ in 0..r {
            let last = *values.last().expect("non-empty");
            values.push(last + (c % 3) as i64);
            c /= 3;
        }
        (code, ComplexityProfile::new(values, 2).expect("steps in 0..=2"))
    })
}

/// A random profile from stream `index` of `seed`: up to four segments, each
/// drawing its steps from its own weights over `0..=dim`.
pub fn fuzz_profile(seed: u64, index: u64, horizon: u64, dim: u8) -> ComplexityProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let segments = rng.random_range(1..=4usize);
    let mut cuts: Vec<u64> = (1..segments).map(|_| rng.random_range(0..=horizon)).collect();
    cuts.push(horizon);
    cuts.sort_unstable();
    let mut values = vec![0i64];
    let mut r = 0u64;
    for cut in cuts {
        let weights: Vec<u32> = loop {
            let w: Vec<u32> = (0..=dim).map(|_| rng.random_range(0..4)).collect();
            if w.iter().any(|&x| x > 0) {
                break w;
            }
        };
        let total: u32 = weights.iter().sum();
        while r < cut {
            let mut pick = rng.random_range(0..total);
            let mut step = 0i64;
            for (j, &w) in weights.iter().enumerate() {
                if pick < w {
                    step = j as i64;
                    break;
                }
                pick -= w;
            }
            let last = *values.last().expect("non-empty");
            values.push(last + step);
            r += 1;
        }
    }
    ComplexityProfile::new(values, dim).expect("steps bounded by dim")
}

// ---------------------------------------------------------------- E4

#[derive(Clone, Copy, Default)]
struct LedgerTally {
    count: u64,
    violations: u64,
    inapplicable: u64,
    /// `(raw - ceil(K/2), code)` with the smallest margin, lowest code on ties.
    worst: Option<(i64, u64)>,
}

impl LedgerTally {
    fn merge(self, o: Self) -> Self {
        let worst = match (self.worst, o.worst) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        LedgerTally {
            count: self.count + o.count,
            violations: self.violations + o.violations,
            inapplicable: self.inapplicable + o.inapplicable,
            worst,
        }
    }
}

struct LedgerOutcome {
    margin: i64,
    violation: bool,
    applicable: bool,
    cert: crate::bounds::BoundCertificate,
}

fn ledger_outcome(p: &ComplexityProfile, cfg: &ExperimentConfig) -> Result<LedgerOutcome> {
    let pe = ComplexityProfile::ideal_direction(p.horizon());
    let cert = bourgain_certificate(p, &pe, &cfg.sequence, &cfg.engine)?;
    let half = ceil_int(&rat(i128::from(p.at(p.horizon())), 2)) as i64;
    let margin = cert.raw_bound - half;
    let corollary = cert.corollary.unwrap_or_else(|| int(half) - cert.error_value);
    let applicable = cert.is_applicable();
    Ok(LedgerOutcome {
        margin,
        violation: !applicable || cert.certified_bound < corollary,
        applicable,
        cert,
    })
}

pub(crate) fn e4(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(cfg);
    let mut margin_series = Vec::new();
    let mut total = LedgerTally::default();
    for r in 2..=cfg.exhaustive_max {
        let tally = exhaustive_profiles(r)
            .map(|(code, p)| {
                let o = ledger_outcome(&p, cfg)?;
                Ok::<_, Error>(LedgerTally {
                    count: 1,
                    violations: u64::from(o.violation),
                    inapplicable: u64::from(!o.applicable),
                    worst: Some((o.margin, code)),
                })
            })
            .try_reduce(LedgerTally::default, |a, b| Ok(a.merge(b)))?;
        total = total.merge(tally);
        let (margin, code) = tally.worst.expect("3^r > 0 profiles");
        let worst = exhaustive_profiles(r)
            .find_first(|(c, _)| *c == code)
            .map(|(_, p)| p)
            .expect("code in range");
        let o = ledger_outcome(&worst, cfg)?;
        margin_series.push([r as f64, margin as f64]);
        rep.trials.push(Trial {
            key: format!("exhaustive-r{r:03}"),
            inputs: BTreeMap::from([
                ("horizon".to_string(), json!(r)),
                ("worst_increments".to_string(), Value::String(increments_text(&worst))),
            ]),
            values: BTreeMap::from([
                ("profiles".to_string(), Tagged::measured(tally.count)),
                ("violations".to_string(), Tagged::measured(tally.violations)),
                ("min_margin".to_string(), Tagged::certified(margin)),
                ("worst_raw_bound".to_string(), Tagged::certified(o.cert.raw_bound)),
                ("worst_error_value".to_string(), Tagged::certified(rat_value(&o.cert.error_value))),
            ]),
        });
    }

    let fuzz: Vec<(u64, ComplexityProfile, LedgerOutcome)> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let p = fuzz_profile(cfg.seed, i, cfg.fuzz_horizon, 2);
            let o = ledger_outcome(&p, cfg)?;
            Ok((i, p, o))
        })
        .collect::<Result<_>>()?;
    let mut fuzz_violations = 0u64;
    let mut fuzz_min: Option<i64> = None;
    for (i, p, o) in &fuzz {
        fuzz_violations += u64::from(o.violation);
        fuzz_min = Some(fuzz_min.map_or(o.margin, |m| m.min(o.margin)));
        rep.trials.push(Trial {
            key: format!("fuzz-{i:08}"),
            inputs: BTreeMap::from([("increments".to_string(), Value::String(increments_text(p)))]),
            values: BTreeMap::from([
                ("case".to_string(), Tagged::certified(o.cert.case)),
                ("raw_bound".to_string(), Tagged::certified(o.cert.raw_bound)),
                ("error_value".to_string(), Tagged::certified(rat_value(&o.cert.error_value))),
                ("certified_bound".to_string(), Tagged::certified(rat_value(&o.cert.certified_bound))),
                ("margin".to_string(), Tagged::certified(o.margin)),
            ]),
        });
    }

    // flat until f, then slope 2: the ledger should return exactly K[R] / 2
    let mut tight_failures = 0u64;
    let mut tight_series = Vec::new();
    let mut tight_count = 0u64;
    for r in [16u64, 32, 64, 100, 128, 256, 1024] {
        if r < cfg.engine.b_min {
            continue;
        }
        let start = ceil_log2(r);
        let mut flats: Vec<u64> = vec![start, r / 4, r / 2, 3 * r / 4, r];
        flats.retain(|&f| f >= start);
        flats.sort_unstable();
        flats.dedup();
        for f in flats {
            let values: Vec<i64> = (0..=r).map(|x| 2 * x.saturating_sub(f) as i64).collect();
            let p = ComplexityProfile::new(values, 2)?;
            let o = ledger_outcome(&p, cfg)?;
            let half = p.at(r) / 2;
            tight_count += 1;
            if o.cert.raw_bound != half || o.violation {
                tight_failures += 1;
            }
            tight_series.push([half as f64, o.cert.raw_bound as f64]);
            rep.trials.push(Trial {
                key: format!("tight-r{r:05}-f{f:05}"),
                inputs: BTreeMap::from([
                    ("horizon".to_string(), json!(r)),
                    ("flat".to_string(), json!(f)),
                ]),
                values: BTreeMap::from([
                    ("half_k".to_string(), Tagged::closed_form(half)),
                    ("raw_bound".to_string(), Tagged::certified(o.cert.raw_bound)),
                    ("case".to_string(), Tagged::certified(o.cert.case)),
                    ("error_value".to_string(), Tagged::certified(rat_value(&o.cert.error_value))),
                ]),
            });
        }
    }

    rep.summary.insert("exhaustive.profiles".into(), Tagged::measured(total.count));
    rep.summary.insert("exhaustive.inapplicable".into(), Tagged::measured(total.inapplicable));
    if let Some((m, _)) = total.worst {
        rep.summary.insert("exhaustive.min_margin".into(), Tagged::certified(m));
    }
    rep.summary.insert("fuzz.profiles".into(), Tagged::measured(fuzz.len()));
    if let Some(m) = fuzz_min {
        rep.summary.insert("fuzz.min_margin".into(), Tagged::certified(m));
    }
    rep.summary.insert("tight.cases".into(), Tagged::measured(tight_count));
    rep.check(
        "exhaustive_violations",
        Tagged::measured(total.violations),
        "= 0",
        total.violations == 0,
    );
    rep.check("fuzz_violations", Tagged::measured(fuzz_violations), "= 0", fuzz_violations == 0);
    rep.check(
        "tight_family_exact",
        Tagged::measured(tight_failures),
        "= 0 mismatches",
        tight_failures == 0 && tight_count > 0,
    );
    rep.series.push(Series {
        name: "min_margin_vs_horizon".into(),
        title: "smallest raw bound minus ceil(K/2), exhaustive corpus".into(),
        x_label: "R".into(),
        y_label: "margin".into(),
        provenance: Provenance::Certified,
        points: margin_series,
    });
    rep.series.push(Series {
        name: "tight_raw_vs_half".into(),
        title: "raw ledger bound on the tight family".into(),
        x_label: "K[R] / 2".into(),
        y_label: "raw bound".into(),
        provenance: Provenance::Certified,
        points: tight_series,
    });
    Ok(rep)
}

// ---------------------------------------------------------------- E5

/// Failures of the defining inequalities, by kind.
#[derive(Clone, Copy, Default, PartialEq, Eq, Debug)]
struct CalcTally {
    cases: u64,
    split_label: u64,
    split_argmin: u64,
    partition_cover: u64,
    partition_label: u64,
    partition_count: u64,
    classify: u64,
    max_pieces_ratio_num: u64,
    max_pieces_ratio_den: u64,
}

impl CalcTally {
    fn merge(self, o: Self) -> Self {
        // keep the larger pieces/bound ratio
        let take_o = u128::from(o.max_pieces_ratio_num) * u128::from(self.max_pieces_ratio_den.max(1))
            > u128::from(self.max_pieces_ratio_num) * u128::from(o.max_pieces_ratio_den.max(1));
        let (num, den) = if take_o {
            (o.max_pieces_ratio_num, o.max_pieces_ratio_den)
        } else {
            (self.max_pieces_ratio_num, self.max_pieces_ratio_den)
        };
        CalcTally {
            cases: self.cases + o.cases,
            split_label: self.split_label + o.split_label,
            split_argmin: self.split_argmin + o.split_argmin,
            partition_cover: self.partition_cover + o.partition_cover,
            partition_label: self.partition_label + o.partition_label,
            partition_count: self.partition_count + o.partition_count,
            classify: self.classify + o.classify,
            max_pieces_ratio_num: num,
            max_pieces_ratio_den: den,
        }
    }

    fn violations(&self) -> u64 {
        self.split_label
            + self.split_argmin
            + self.partition_cover
            + self.partition_label
            + self.partition_count
            + self.classify
    }
}

/// Independent integer checks of the exact labels, `sigma = num / den`.
struct Oracle<'a> {
    k: &'a [i64],
    num: i128,
    den: i128,
}

impl Oracle<'_> {
    fn at(&self, r: u64) -> i128 {
        i128::from(self.k[r as usize])
    }

    /// `K[b] - K[s] <= sigma (b - s)` on `[a, b]`.
    fn teal(&self, a: u64, b: u64) -> bool {
        (a..=b).all(|s| self.den * (self.at(b) - self.at(s)) <= self.num * i128::from(b - s))
    }

    /// `K[s] - K[a] >= sigma (s - a)` on `[a, b]`.
    fn yellow(&self, a: u64, b: u64) -> bool {
        (a..=b).all(|s| self.den * (self.at(s) - self.at(a)) >= self.num * i128::from(s - a))
    }

    fn key(&self, s: u64) -> i128 {
        self.den * self.at(s) - self.num * i128::from(s)
    }

    /// Rightmost minimiser of `K[s] - sigma s` on `[a, b]`, scanning right to left.
    fn argmin(&self, a: u64, b: u64) -> u64 {
        let best = (a..=b).map(|s| self.key(s)).min().expect("non-empty");
        (a..=b).rev().find(|&s| self.key(s) == best).expect("attained")
    }
}

fn check_case(p: &ComplexityProfile, a: u64, b: u64, sigma: Rat, max_len: u64) -> Result<(CalcTally, usize)> {
    let o = Oracle {
        k: p.values(),
        num: *sigma.numer(),
        den: *sigma.denom(),
    };
    let mut t = CalcTally {
        cases: 1,
        ..CalcTally::default()
    };
    let split = split_teal_yellow(p, a, b, sigma)?;
    if !o.teal(a, split.m) || !o.yellow(split.m, b) {
        t.split_label += 1;
    }
    if split.m != o.argmin(a, b) {
        t.split_argmin += 1;
    }
    let pieces = partition(p, a, b, sigma, max_len)?;
    let bound = 2 * (b - a).div_ceil(max_len);
    if pieces.len() as u64 > bound {
        t.partition_count += 1;
    }
    t.max_pieces_ratio_num = pieces.len() as u64;
    t.max_pieces_ratio_den = bound;
    if !covers(&pieces, a, b, max_len) {
        t.partition_cover += 1;
    }
    if pieces.iter().any(|iv| match iv.color {
        Color::Teal => !o.teal(iv.a, iv.b),
        Color::Yellow => !o.yellow(iv.a, iv.b),
    }) {
        t.partition_label += 1;
    }
    let label = classify_interval(p, a, b, sigma, SlackMode::Exact)?;
    let expect = match (o.yellow(a, b), o.teal(a, b)) {
        (true, true) => IntervalKind::Both,
        (true, false) => IntervalKind::Yellow,
        (false, true) => IntervalKind::Teal,
        (false, false) => IntervalKind::Neither,
    };
    if label.kind != expect {
        t.classify += 1;
    }
    Ok((t, pieces.len()))
}

/// Contiguous, non-empty, inside `[a, b]`, and no piece longer than `max_len`.
fn covers(pieces: &[LabeledInterval], a: u64, b: u64, max_len: u64) -> bool {
    let mut at = a;
    for iv in pieces {
        if iv.a != at || iv.b <= iv.a || iv.len() > max_len {
            return false;
        }
        at = iv.b;
    }
    at == b && !pieces.is_empty()
}

pub(crate) fn e5(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let mut rep = ExperimentReport::new(cfg);
    let sigmas = &cfg.sigmas;
    if sigmas.is_empty() {
        return Err(Error::Config("profile.sigmas is empty".into()));
    }
    let mut total = CalcTally::default();
    let mut ratio_series = Vec::new();
    for r in 1..=cfg.exhaustive_max {
        let lens: Vec<u64> = [1, 2, 3, 5, r].into_iter().filter(|&l| l <= r).collect();
        let tally = exhaustive_profiles(r)
            .map(|(_, p)| {
                let mut t = CalcTally::default();
                for &sigma in sigmas {
                    for &len in &lens {
                        t = t.merge(check_case(&p, 0, r, sigma, len)?.0);
                    }
                }
                Ok::<_, Error>(t)
            })
            .try_reduce(CalcTally::default, |a, b| Ok(a.merge(b)))?;
        total = total.merge(tally);
        ratio_series.push([
            r as f64,
            tally.max_pieces_ratio_num as f64 / tally.max_pieces_ratio_den.max(1) as f64,
        ]);
        rep.trials.push(Trial {
            key: format!("exhaustive-r{r:03}"),
            inputs: BTreeMap::from([
                ("horizon".to_string(), json!(r)),
                ("max_lens".to_string(), json!(lens)),
            ]),
            values: BTreeMap::from([
                ("cases".to_string(), Tagged::measured(tally.cases)),
                ("violations".to_string(), Tagged::measured(tally.violations())),
            ]),
        });
    }

    let fuzz: Vec<(Trial, CalcTally)> = (0..cfg.samples as u64)
        .into_par_iter()
        .map(|i| {
            let p = fuzz_profile(cfg.seed, i, cfg.fuzz_horizon, 2);
            // a separate stream family for the interval and parameters
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_0005);
            rng.set_stream(i);
            let r = cfg.fuzz_horizon;
            let a = rng.random_range(0..r);
            let b = rng.random_range(a + 1..=r);
            let max_len = rng.random_range(1..=b - a);
            let sigma = sigmas[rng.random_range(0..sigmas.len())];
            let (t, pieces) = check_case(&p, a, b, sigma, max_len)?;
            let trial = Trial {
                key: format!("fuzz-{i:08}"),
                inputs: BTreeMap::from([
                    ("increments".to_string(), Value::String(increments_text(&p))),
                    ("a".to_string(), json!(a)),
                    ("b".to_string(), json!(b)),
                    ("max_len".to_string(), json!(max_len)),
                    ("sigma".to_string(), rat_value(&sigma)),
                ]),
                values: BTreeMap::from([
                    ("pieces".to_string(), Tagged::measured(pieces)),
                    ("piece_bound".to_string(), Tagged::closed_form(2 * (b - a).div_ceil(max_len))),
                    ("violations".to_string(), Tagged::measured(t.violations())),
                ]),
            };
            Ok((trial, t))
        })
        .collect::<Result<_>>()?;
    let mut fuzz_total = CalcTally::default();
    for (trial, t) in fuzz {
        fuzz_total = fuzz_total.merge(t);
        rep.trials.push(trial);
    }

    for (prefix, t) in [("exhaustive", total), ("fuzz", fuzz_total)] {
        rep.summary.insert(format!("{prefix}.cases"), Tagged::measured(t.cases));
        for (name, v) in [
            ("split_label", t.split_label),
            ("split_argmin", t.split_argmin),
            ("partition_cover", t.partition_cover),
            ("partition_label", t.partition_label),
            ("partition_count", t.partition_count),
            ("classify", t.classify),
        ] {
            rep.summary.insert(format!("{prefix}.{name}"), Tagged::measured(v));
        }
        rep.check(
            &format!("{prefix}_violations"),
            Tagged::measured(t.violations()),
            "= 0",
            t.violations() == 0 && t.cases > 0,
        );
    }
    rep.series.push(Series {
        name: "pieces_over_bound_vs_horizon".into(),
        title: "largest partition size over 2 ceil((b - a) / max_len)".into(),
        x_label: "R".into(),
        y_label: "ratio".into(),
        provenance: Provenance::Measured,
        points: ratio_series,
    });
    Ok(rep)
}
