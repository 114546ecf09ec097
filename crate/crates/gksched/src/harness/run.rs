//! Training, paired evaluation, timing, and the full bench pipeline.

use std::fs::File;
use std::hint::black_box;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::embed::embed_layout;
use crate::error::{Error, Result};
use crate::sched::{all_active, greedy, strongest_link};
use crate::sim::{
    generate_layout, mix_seed, realize_channel, sum_rate, ChannelRealization, Layout,
    ScheduleDecision, SimConfig, STREAM_SCHED_RANDOM,
};
use crate::svm::{predict_schedule, train_with_cv, CvReport, SvmModel, TrainSet};

use super::dataset::{load_labels, load_layouts, verify_checksums, write_pretty_json};
use super::{
    pooled_cv_path, pooled_model_path, results_csv_path, ExperimentSpec, FieldPaths, Scheme,
};

pub const RESULTS_CSV_HEADER: &str =
    "field_length,scheme,mean_rate_bps,ratio_pct,activation_pct,accuracy_pct,time_s";
/// Fresh layouts per timing pass.
pub const TIMING_LAYOUTS: usize = 10;
/// Timing passes; the median is reported.
pub const TIMING_REPS: usize = 5;

#[derive(Debug)]
pub struct TrainSummary {
    pub model: SvmModel,
    pub cv: CvReport,
    pub samples: usize,
    pub model_path: PathBuf,
}

/// Builds the labeled embedding set for the train split of the given fields,
/// in (field, layout, link) order. Group ids are layout indices, so folds
/// never split a layout.
fn build_train_set(
    spec: &ExperimentSpec,
    fields: &[f64],
    out: &Path,
) -> Result<(TrainSet, Vec<usize>)> {
    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut groups = Vec::new();
    for &field in fields {
        verify_checksums(spec, field, out)?;
        let layouts = load_layouts(spec, field, out)?;
        let label_records = load_labels(spec, field, out)?;
        for index in spec.train_indices() {
            let i = index as usize;
            let embedded = embed_layout(&layouts[i].to_layout(), &spec.embed)?;
            for (q, s) in embedded.into_iter().enumerate() {
                points.push(s);
                labels.push(if label_records[i].labels[q] == 1 { 1 } else { -1 });
                groups.push(i);
            }
        }
    }
    Ok((TrainSet::new(points, labels)?, groups))
}

fn run_training(
    spec: &ExperimentSpec,
    fields: &[f64],
    out: &Path,
    model_path: PathBuf,
    cv_path: PathBuf,
) -> Result<TrainSummary> {
    spec.validate()?;
    let (set, groups) = build_train_set(spec, fields, out)?;
    let samples = set.len();
    let (model, cv) =
        train_with_cv(&set, &spec.hyper, &groups, spec.cv_folds, &spec.bandwidth_factors)?;
    model.save(&model_path)?;
    write_pretty_json(&cv_path, &cv)?;
    Ok(TrainSummary { model, cv, samples, model_path })
}

/// Trains one model on this field's train split; writes model.json and
/// cv.json into the field directory.
pub fn train_field(spec: &ExperimentSpec, field_length_m: f64, out: &Path) -> Result<TrainSummary> {
    let paths = FieldPaths::new(out, field_length_m);
    run_training(spec, &[field_length_m], out, paths.model(), paths.cv())
}

/// Trains one model across the train splits of all given fields; writes
/// model_pooled.json and cv_pooled.json at the output root.
pub fn train_pooled(spec: &ExperimentSpec, fields: &[f64], out: &Path) -> Result<TrainSummary> {
    run_training(spec, fields, out, pooled_model_path(out), pooled_cv_path(out))
}

#[derive(Debug, Clone, Serialize)]
pub struct SchemeStats {
    pub scheme: String,
    pub mean_rate_bps: f64,
    pub ratio_pct: f64,
    pub activation_pct: f64,
    pub accuracy_pct: f64,
    pub time_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FieldReport {
    pub field_length_m: f64,
    /// Derived simulation seed of this field.
    pub sim_seed: u64,
    pub n_test_layouts: usize,
    pub schemes: Vec<SchemeStats>,
    /// Median seconds to embed and classify ten fresh layouts; present only
    /// when timing was requested.
    pub inference_time_s: Option<f64>,
    /// Config echo.
    pub spec: ExperimentSpec,
}

struct PreparedLayout {
    layout: Layout,
    ch: ChannelRealization,
}

fn timing_layouts(spec: &ExperimentSpec, cfg: &SimConfig) -> Result<Vec<PreparedLayout>> {
    let start = (spec.n_train_layouts + spec.n_test_layouts) as u64;
    (start..start + TIMING_LAYOUTS as u64)
        .map(|index| {
            let layout = generate_layout(cfg, index)?;
            let fading_seed = mix_seed(cfg.seed, crate::sim::STREAM_FADING, index);
            let ch = realize_channel(&layout, cfg, fading_seed)?;
            Ok(PreparedLayout { layout, ch })
        })
        .collect()
}

fn median_seconds<F: FnMut() -> Result<usize>>(mut pass: F) -> Result<f64> {
    let mut times = Vec::with_capacity(TIMING_REPS);
    for _ in 0..TIMING_REPS {
        let t = Instant::now();
        let sink = pass()?;
        times.push(t.elapsed().as_secs_f64());
        black_box(sink);
    }
    times.sort_by(f64::total_cmp);
    Ok(times[TIMING_REPS / 2])
}

/// Median wall time (seconds, single-threaded, median of five passes) to
/// embed and classify ten fresh layouts with the given model.
pub fn measure_inference_time(
    spec: &ExperimentSpec,
    field_length_m: f64,
    model: &SvmModel,
) -> Result<f64> {
    let cfg = spec.field_sim(field_length_m);
    let prepared = timing_layouts(spec, &cfg)?;
    median_seconds(|| {
        let mut active = 0usize;
        for p in &prepared {
            let d = predict_schedule(model, &p.layout, &spec.embed, &p.ch)?;
            active += d.count_active();
        }
        Ok(active)
    })
}

fn scheme_time(
    scheme: Scheme,
    spec: &ExperimentSpec,
    cfg: &SimConfig,
    model: &SvmModel,
    prepared: &[PreparedLayout],
) -> Result<f64> {
    let k = cfg.pair_count;
    median_seconds(|| {
        let mut active = 0usize;
        for (i, p) in prepared.iter().enumerate() {
            let d = match scheme {
                Scheme::Exhaustive => crate::sched::exhaustive_optimal(&p.ch, cfg)?.0,
                Scheme::GKernel => predict_schedule(model, &p.layout, &spec.embed, &p.ch)?,
                Scheme::Greedy => greedy(&p.ch, cfg).0,
                Scheme::StrongestLink => strongest_link(&p.ch),
                Scheme::Random => crate::sched::random_schedule(
                    k,
                    mix_seed(cfg.seed, STREAM_SCHED_RANDOM, i as u64),
                ),
                Scheme::AllActive => all_active(k),
            };
            active += d.count_active();
        }
        Ok(active)
    })
}

/// Scores all six schemes on the test split, every scheme on the identical
/// channel realization per layout. Writes report.csv and eval_report.json
/// into the field directory.
pub fn eval_field(
    spec: &ExperimentSpec,
    field_length_m: f64,
    out: &Path,
    model: &SvmModel,
    timing: bool,
) -> Result<FieldReport> {
    spec.validate()?;
    let cfg = spec.field_sim(field_length_m);
    let layouts = load_layouts(spec, field_length_m, out)?;
    let label_records = load_labels(spec, field_length_m, out)?;
    let k = cfg.pair_count;
    let n = spec.n_test_layouts;

    let mut rate_sum = [0.0f64; 6];
    let mut active_sum = [0usize; 6];
    let mut agree_sum = [0usize; 6];
    for index in spec.test_indices() {
        let i = index as usize;
        let layout = layouts[i].to_layout();
        let labels = &label_records[i];
        let ch = realize_channel(&layout, &cfg, labels.fading_seed)?;
        let oracle = ScheduleDecision::from_bits(&labels.labels)?;
        let best_rate = labels.best_rate_bps;

        for (s, scheme) in Scheme::ALL.iter().enumerate() {
            let d = match scheme {
                Scheme::Exhaustive => oracle.clone(),
                Scheme::GKernel => predict_schedule(model, &layout, &spec.embed, &ch)?,
                Scheme::Greedy => greedy(&ch, &cfg).0,
                Scheme::StrongestLink => strongest_link(&ch),
                Scheme::Random => crate::sched::random_schedule(
                    k,
                    mix_seed(cfg.seed, STREAM_SCHED_RANDOM, index),
                ),
                Scheme::AllActive => all_active(k),
            };
            let rate = sum_rate(&ch, &d, &cfg);
            if rate > best_rate * (1.0 + 1e-9) {
                return Err(Error::Numerical(format!(
                    "scheme {} beat the stored optimum on layout {i}",
                    scheme.name()
                )));
            }
            rate_sum[s] += rate;
            active_sum[s] += d.count_active();
            agree_sum[s] +=
                d.active().iter().zip(&oracle.as_bits()).filter(|(&a, &b)| a as u8 == b).count();
        }
    }

    let timing_set = if timing { Some(timing_layouts(spec, &cfg)?) } else { None };
    let mean_exhaustive = rate_sum[0] / n as f64;
    let mut schemes = Vec::with_capacity(6);
    for (s, scheme) in Scheme::ALL.iter().enumerate() {
        let mean_rate_bps = rate_sum[s] / n as f64;
        let time_s = match &timing_set {
            Some(prepared) => scheme_time(*scheme, spec, &cfg, model, prepared)?,
            None => 0.0,
        };
        schemes.push(SchemeStats {
            scheme: scheme.name().to_string(),
            mean_rate_bps,
            ratio_pct: 100.0 * mean_rate_bps / mean_exhaustive,
            activation_pct: 100.0 * active_sum[s] as f64 / (n * k) as f64,
            accuracy_pct: 100.0 * agree_sum[s] as f64 / (n * k) as f64,
            time_s,
        });
    }

    let inference_time_s = if timing {
        Some(measure_inference_time(spec, field_length_m, model)?)
    } else {
        None
    };
    let report = FieldReport {
        field_length_m,
        sim_seed: cfg.seed,
        n_test_layouts: n,
        schemes,
        inference_time_s,
        spec: spec.clone(),
    };

    let paths = FieldPaths::new(out, field_length_m);
    write_report_csv(&paths.report_csv(), std::slice::from_ref(&report))?;
    write_pretty_json(&paths.eval_report(), &report)?;
    Ok(report)
}

fn write_report_csv(path: &Path, reports: &[FieldReport]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "{RESULTS_CSV_HEADER}").map_err(|e| Error::io(path, e))?;
    for report in reports {
        for s in &report.schemes {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                report.field_length_m,
                s.scheme,
                s.mean_rate_bps,
                s.ratio_pct,
                s.activation_pct,
                s.accuracy_pct,
                s.time_s
            )
            .map_err(|e| Error::io(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug)]
pub struct BenchReport {
    pub fields: Vec<FieldReport>,
    pub results_csv: PathBuf,
}

/// Combined results.csv over already-produced field reports.
pub fn write_results_csv(out: &Path, reports: &[FieldReport]) -> Result<PathBuf> {
    let path = results_csv_path(out);
    write_report_csv(&path, reports)?;
    Ok(path)
}

/// The full pipeline: generate, label, train, and evaluate every requested
/// field, then write the combined results.csv.
pub fn bench(
    spec: &ExperimentSpec,
    out: &Path,
    fields: &[f64],
    pooled: bool,
    timing: bool,
) -> Result<BenchReport> {
    spec.validate()?;
    for &field in fields {
        super::dataset::generate_field(spec, field, out)?;
        super::dataset::label_field(spec, field, out)?;
    }
    let mut reports = Vec::with_capacity(fields.len());
    if pooled {
        let summary = train_pooled(spec, fields, out)?;
        for &field in fields {
            reports.push(eval_field(spec, field, out, &summary.model, timing)?);
        }
    } else {
        for &field in fields {
            let summary = train_field(spec, field, out)?;
            reports.push(eval_field(spec, field, out, &summary.model, timing)?);
        }
    }
    let results_csv = write_results_csv(out, &reports)?;
    Ok(BenchReport { fields: reports, results_csv })
}
