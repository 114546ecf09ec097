//! Dataset files for one field length: layout positions, oracle labels, and
//! embedding checksums, all line-delimited JSON plus a manifest.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::embed::{embed_layout, EmbeddingConfig};
use crate::error::{Error, Result};
use crate::sched::exhaustive_optimal;
use crate::sim::{
    generate_layout, mix_seed, realize_channel, Layout, ScheduleDecision, SimConfig, STREAM_FADING,
};

use super::{ExperimentSpec, FieldPaths};

pub const DATASET_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutRecord {
    pub index: u64,
    pub field_length_m: f64,
    pub pair_count: usize,
    pub tx: Vec<[f64; 2]>,
    pub rx: Vec<[f64; 2]>,
}

impl LayoutRecord {
    pub fn to_layout(&self) -> Layout {
        Layout { field_length_m: self.field_length_m, tx: self.tx.clone(), rx: self.rx.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelRecord {
    pub index: u64,
    /// Seed the channel realization was drawn with (unused under no fading,
    /// recorded regardless).
    pub fading_seed: u64,
    /// Optimal activation bits, one per link.
    pub labels: Vec<u8>,
    pub best_rate_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksumRecord {
    pub index: u64,
    /// SHA-256 over the little-endian bytes of all K embedding matrices.
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub schema_version: u32,
    pub field_length_m: f64,
    pub master_seed: u64,
    pub n_train_layouts: usize,
    pub n_test_layouts: usize,
    pub sim: SimConfig,
    pub embed: EmbeddingConfig,
}

fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| Error::format(path, e.to_string()))?;
        w.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))?;
        w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line)
            .map_err(|e| Error::format(path, format!("line {}: {e}", lineno + 1)))?;
        out.push(record);
    }
    Ok(out)
}

pub(super) fn write_pretty_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::format(path, e.to_string()))?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

fn layout_checksum(layout: &Layout, ecfg: &EmbeddingConfig) -> Result<String> {
    let mut hasher = Sha256::new();
    for s in embed_layout(layout, ecfg)? {
        for &v in s.entries() {
            hasher.update(v.to_le_bytes());
        }
    }
    Ok(hasher.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Writes layouts.jsonl, checksums.jsonl, and manifest.json for one field.
/// Returns the number of layouts written (train plus test).
pub fn generate_field(spec: &ExperimentSpec, field_length_m: f64, out: &Path) -> Result<usize> {
    spec.validate()?;
    let cfg = spec.field_sim(field_length_m);
    cfg.validate()?;
    let paths = FieldPaths::new(out, field_length_m);
    fs::create_dir_all(&paths.dir).map_err(|e| Error::io(&paths.dir, e))?;

    let total = spec.n_train_layouts + spec.n_test_layouts;
    let mut layouts = Vec::with_capacity(total);
    let mut checksums = Vec::with_capacity(total);
    for index in 0..total as u64 {
        let layout = generate_layout(&cfg, index)?;
        checksums.push(ChecksumRecord { index, sha256: layout_checksum(&layout, &spec.embed)? });
        layouts.push(LayoutRecord {
            index,
            field_length_m,
            pair_count: cfg.pair_count,
            tx: layout.tx,
            rx: layout.rx,
        });
    }
    write_jsonl(&paths.layouts(), &layouts)?;
    write_jsonl(&paths.checksums(), &checksums)?;
    write_pretty_json(
        &paths.manifest(),
        &Manifest {
            schema_version: DATASET_SCHEMA_VERSION,
            field_length_m,
            master_seed: spec.master_seed,
            n_train_layouts: spec.n_train_layouts,
            n_test_layouts: spec.n_test_layouts,
            sim: cfg,
            embed: spec.embed,
        },
    )?;
    Ok(total)
}

/// Reads and cross-checks layouts.jsonl: record count, index order, field
/// length, pair count, and geometric validity must all match the spec.
pub fn load_layouts(
    spec: &ExperimentSpec,
    field_length_m: f64,
    out: &Path,
) -> Result<Vec<LayoutRecord>> {
    let cfg = spec.field_sim(field_length_m);
    let path = FieldPaths::new(out, field_length_m).layouts();
    let records: Vec<LayoutRecord> = read_jsonl(&path)?;
    let total = spec.n_train_layouts + spec.n_test_layouts;
    if records.len() != total {
        return Err(Error::format(&path, format!("expected {total} layouts, found {}", records.len())));
    }
    for (pos, r) in records.iter().enumerate() {
        if r.index != pos as u64 {
            return Err(Error::format(&path, format!("record {pos} has index {}", r.index)));
        }
        if r.field_length_m != field_length_m || r.pair_count != cfg.pair_count {
            return Err(Error::format(&path, format!("record {pos} does not match the spec")));
        }
        r.to_layout().validate(&cfg).map_err(|e| Error::format(&path, format!("record {pos}: {e}")))?;
    }
    Ok(records)
}

/// Labels every layout with the exhaustive optimum on its realized channel.
/// Returns the number of labeled layouts.
pub fn label_field(spec: &ExperimentSpec, field_length_m: f64, out: &Path) -> Result<usize> {
    spec.validate()?;
    let cfg = spec.field_sim(field_length_m);
    let layouts = load_layouts(spec, field_length_m, out)?;
    let mut labels = Vec::with_capacity(layouts.len());
    for r in &layouts {
        let fading_seed = mix_seed(cfg.seed, STREAM_FADING, r.index);
        let ch = realize_channel(&r.to_layout(), &cfg, fading_seed)?;
        let (d, best_rate_bps) = exhaustive_optimal(&ch, &cfg)?;
        labels.push(LabelRecord { index: r.index, fading_seed, labels: d.as_bits(), best_rate_bps });
    }
    let path = FieldPaths::new(out, field_length_m).labels();
    write_jsonl(&path, &labels)?;
    Ok(labels.len())
}

/// Reads labels.jsonl and re-checks each stored decision: the stored best
/// rate must match a fresh evaluation of the stored bits to 1e-9 relative.
pub fn load_labels(
    spec: &ExperimentSpec,
    field_length_m: f64,
    out: &Path,
) -> Result<Vec<LabelRecord>> {
    let cfg = spec.field_sim(field_length_m);
    let layouts = load_layouts(spec, field_length_m, out)?;
    let path = FieldPaths::new(out, field_length_m).labels();
    let records: Vec<LabelRecord> = read_jsonl(&path)?;
    if records.len() != layouts.len() {
        return Err(Error::format(
            &path,
            format!("expected {} label records, found {}", layouts.len(), records.len()),
        ));
    }
    for (pos, (r, l)) in records.iter().zip(&layouts).enumerate() {
        if r.index != pos as u64 {
            return Err(Error::format(&path, format!("record {pos} has index {}", r.index)));
        }
        if r.labels.len() != cfg.pair_count {
            return Err(Error::format(&path, format!("record {pos} has wrong label count")));
        }
        let d = ScheduleDecision::from_bits(&r.labels)
            .map_err(|e| Error::format(&path, format!("record {pos}: {e}")))?;
        let ch = realize_channel(&l.to_layout(), &cfg, r.fading_seed)?;
        let rate = crate::sim::sum_rate(&ch, &d, &cfg);
        if (rate - r.best_rate_bps).abs() > 1e-9 * r.best_rate_bps.abs().max(1.0) {
            return Err(Error::format(
                &path,
                format!("record {pos}: stored rate {} does not reproduce ({rate})", r.best_rate_bps),
            ));
        }
    }
    Ok(records)
}

/// Recomputes every layout's embedding checksum and compares it against
/// checksums.jsonl.
pub fn verify_checksums(spec: &ExperimentSpec, field_length_m: f64, out: &Path) -> Result<()> {
    let layouts = load_layouts(spec, field_length_m, out)?;
    let path = FieldPaths::new(out, field_length_m).checksums();
    let records: Vec<ChecksumRecord> = read_jsonl(&path)?;
    if records.len() != layouts.len() {
        return Err(Error::format(
            &path,
            format!("expected {} checksum records, found {}", layouts.len(), records.len()),
        ));
    }
    for (pos, (r, l)) in records.iter().zip(&layouts).enumerate() {
        if r.index != pos as u64 {
            return Err(Error::format(&path, format!("record {pos} has index {}", r.index)));
        }
        let fresh = layout_checksum(&l.to_layout(), &spec.embed)?;
        if fresh != r.sha256 {
            return Err(Error::format(&path, format!("embedding checksum mismatch at layout {pos}")));
        }
    }
    Ok(())
}

#[cfg(test)]
pub(crate) fn tiny_spec() -> ExperimentSpec {
    ExperimentSpec {
        field_lengths: vec![350.0],
        n_train_layouts: 3,
        n_test_layouts: 2,
        sim: SimConfig { pair_count: 3, ..SimConfig::default() },
        ..ExperimentSpec::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generate_writes_deterministic_files() {
        let spec = tiny_spec();
        let dir = tempfile::tempdir().unwrap();
        let n = generate_field(&spec, 350.0, dir.path()).unwrap();
        assert_eq!(n, 5);
        let paths = FieldPaths::new(dir.path(), 350.0);
        let first = fs::read(paths.layouts()).unwrap();
        let first_sums = fs::read(paths.checksums()).unwrap();
        assert!(paths.manifest().exists());

        generate_field(&spec, 350.0, dir.path()).unwrap();
        assert_eq!(fs::read(paths.layouts()).unwrap(), first);
        assert_eq!(fs::read(paths.checksums()).unwrap(), first_sums);

        let layouts = load_layouts(&spec, 350.0, dir.path()).unwrap();
        assert_eq!(layouts.len(), 5);
        verify_checksums(&spec, 350.0, dir.path()).unwrap();
    }

    #[test]
    fn labels_round_trip_and_self_check() {
        let spec = tiny_spec();
        let dir = tempfile::tempdir().unwrap();
        generate_field(&spec, 350.0, dir.path()).unwrap();
        let n = label_field(&spec, 350.0, dir.path()).unwrap();
        assert_eq!(n, 5);
        let labels = load_labels(&spec, 350.0, dir.path()).unwrap();
        assert_eq!(labels.len(), 5);
        for l in &labels {
            assert_eq!(l.labels.len(), 3);
            assert!(l.best_rate_bps > 0.0);
        }
    }

    #[test]
    fn corrupted_files_are_rejected_with_context() {
        let spec = tiny_spec();
        let dir = tempfile::tempdir().unwrap();
        generate_field(&spec, 350.0, dir.path()).unwrap();
        let paths = FieldPaths::new(dir.path(), 350.0);

        // truncate one record
        let text = fs::read_to_string(paths.layouts()).unwrap();
        let truncated: Vec<&str> = text.lines().take(4).collect();
        fs::write(paths.layouts(), truncated.join("\n")).unwrap();
        assert!(matches!(
            load_layouts(&spec, 350.0, dir.path()),
            Err(Error::Format { .. })
        ));

        // restore, then corrupt a coordinate: the checksum must catch it
        generate_field(&spec, 350.0, dir.path()).unwrap();
        let text = fs::read_to_string(paths.layouts()).unwrap();
        let tampered = text.replacen("\"tx\":[[", "\"tx\":[[1.25,", 1);
        assert_ne!(text, tampered);
        fs::write(paths.layouts(), tampered).unwrap();
        let result = load_layouts(&spec, 350.0, dir.path());
        assert!(result.is_err(), "tampered layout should fail validation or parsing");

        // regenerate, then swap two checksum lines
        generate_field(&spec, 350.0, dir.path()).unwrap();
        let text = fs::read_to_string(paths.checksums()).unwrap();
        let mut lines: Vec<&str> = text.lines().collect();
        lines.swap(0, 1);
        fs::write(paths.checksums(), lines.join("\n")).unwrap();
        assert!(verify_checksums(&spec, 350.0, dir.path()).is_err());
    }

    #[test]
    fn missing_files_surface_io_errors() {
        let spec = tiny_spec();
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(load_layouts(&spec, 350.0, dir.path()), Err(Error::Io { .. })));
        generate_field(&spec, 350.0, dir.path()).unwrap();
        assert!(matches!(load_labels(&spec, 350.0, dir.path()), Err(Error::Io { .. })));
    }
}
