//! Experiment driver: dataset generation and labeling, per-field or pooled
//! training, paired evaluation of all schemes, and CSV emission.

mod dataset;
mod run;

pub use dataset::{
    generate_field, label_field, load_labels, load_layouts, verify_checksums, ChecksumRecord,
    LabelRecord, LayoutRecord, Manifest, DATASET_SCHEMA_VERSION,
};
pub use run::{
    bench, eval_field, measure_inference_time, train_field, train_pooled, write_results_csv,
    BenchReport, FieldReport, SchemeStats, TrainSummary, RESULTS_CSV_HEADER, TIMING_LAYOUTS,
    TIMING_REPS,
};

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::embed::EmbeddingConfig;
use crate::error::{Error, Result};
use crate::sim::{mix_seed, SimConfig, STREAM_FIELD};
use crate::svm::{SvmHyper, DEFAULT_BANDWIDTH_FACTORS, DEFAULT_CV_FOLDS};

/// Everything one benchmark run depends on. `sim` is a template: its field
/// length and seed are replaced per evaluated field length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub master_seed: u64,
    pub field_lengths: Vec<f64>,
    pub n_train_layouts: usize,
    pub n_test_layouts: usize,
    pub sim: SimConfig,
    pub embed: EmbeddingConfig,
    pub hyper: SvmHyper,
    pub cv_folds: usize,
    pub bandwidth_factors: Vec<f64>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            master_seed: 42,
            field_lengths: vec![350.0, 400.0, 450.0, 500.0],
            n_train_layouts: 90,
            n_test_layouts: 100,
            sim: SimConfig::default(),
            embed: EmbeddingConfig::default(),
            hyper: SvmHyper::default(),
            cv_folds: DEFAULT_CV_FOLDS,
            bandwidth_factors: DEFAULT_BANDWIDTH_FACTORS.to_vec(),
        }
    }
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_train_layouts == 0 || self.n_test_layouts == 0 {
            return Err(Error::validation("need at least one train and one test layout"));
        }
        if self.field_lengths.is_empty() {
            return Err(Error::validation("field_lengths must not be empty"));
        }
        for &f in &self.field_lengths {
            self.field_sim(f).validate()?;
        }
        self.embed.validate()?;
        self.hyper.validate()?;
        if self.cv_folds < 2 {
            return Err(Error::validation("cv_folds must be at least 2"));
        }
        if self.bandwidth_factors.is_empty()
            || self.bandwidth_factors.iter().any(|f| !(*f > 0.0) || !f.is_finite())
        {
            return Err(Error::validation("bandwidth_factors must be positive and finite"));
        }
        Ok(())
    }

    /// Simulation config for one field length, with its own derived seed.
    pub fn field_sim(&self, field_length_m: f64) -> SimConfig {
        SimConfig {
            field_length_m,
            seed: mix_seed(self.master_seed, STREAM_FIELD, field_length_m.to_bits()),
            ..self.sim
        }
    }

    /// Train layouts are indices 0..n_train; test layouts follow directly.
    pub fn train_indices(&self) -> std::ops::Range<u64> {
        0..self.n_train_layouts as u64
    }

    pub fn test_indices(&self) -> std::ops::Range<u64> {
        let start = self.n_train_layouts as u64;
        start..start + self.n_test_layouts as u64
    }

    /// Loads a spec from a JSON file, or the built-in defaults for the
    /// literal name "default".
    pub fn load(config: &str) -> Result<ExperimentSpec> {
        if config == "default" {
            return Ok(ExperimentSpec::default());
        }
        let path = Path::new(config);
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: ExperimentSpec =
            serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}

/// The six scored schemes, in CSV row order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Exhaustive,
    GKernel,
    Greedy,
    StrongestLink,
    Random,
    AllActive,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Exhaustive,
        Scheme::GKernel,
        Scheme::Greedy,
        Scheme::StrongestLink,
        Scheme::Random,
        Scheme::AllActive,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Exhaustive => "exhaustive",
            Scheme::GKernel => "gkernel",
            Scheme::Greedy => "greedy",
            Scheme::StrongestLink => "strongest_link",
            Scheme::Random => "random",
            Scheme::AllActive => "all_active",
        }
    }
}

fn field_dir_name(field_length_m: f64) -> String {
    if field_length_m.fract() == 0.0 && (0.0..1e15).contains(&field_length_m) {
        format!("field_{}", field_length_m as u64)
    } else {
        format!("field_{field_length_m}")
    }
}

/// File layout of one field's dataset and results under the output root.
#[derive(Debug, Clone)]
pub struct FieldPaths {
    pub dir: PathBuf,
}

impl FieldPaths {
    pub fn new(out: &Path, field_length_m: f64) -> Self {
        FieldPaths { dir: out.join(field_dir_name(field_length_m)) }
    }

    pub fn layouts(&self) -> PathBuf {
        self.dir.join("layouts.jsonl")
    }

    pub fn labels(&self) -> PathBuf {
        self.dir.join("labels.jsonl")
    }

    pub fn checksums(&self) -> PathBuf {
        self.dir.join("checksums.jsonl")
    }

    pub fn manifest(&self) -> PathBuf {
        self.dir.join("manifest.json")
    }

    pub fn model(&self) -> PathBuf {
        self.dir.join("model.json")
    }

    pub fn cv(&self) -> PathBuf {
        self.dir.join("cv.json")
    }

    pub fn report_csv(&self) -> PathBuf {
        self.dir.join("report.csv")
    }

    pub fn eval_report(&self) -> PathBuf {
        self.dir.join("eval_report.json")
    }
}

pub fn pooled_model_path(out: &Path) -> PathBuf {
    out.join("model_pooled.json")
}

pub fn pooled_cv_path(out: &Path) -> PathBuf {
    out.join("cv_pooled.json")
}

pub fn results_csv_path(out: &Path) -> PathBuf {
    out.join("results.csv")
}
