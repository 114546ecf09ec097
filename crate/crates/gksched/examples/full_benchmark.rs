//! The whole pipeline at reduced scale: dataset, oracle labels, training,
//! and paired evaluation per field length, ending in one results.csv.
//!
//! The desk-scale run (90 train / 100 test layouts per field) is
//! `gksched bench --config default`.

use gksched::harness::{bench, ExperimentSpec};

fn main() {
    let spec = ExperimentSpec {
        n_train_layouts: 30,
        n_test_layouts: 30,
        ..ExperimentSpec::default()
    };
    let out = std::path::Path::new("target/full_benchmark_out");

    let report = bench(&spec, out, &spec.field_lengths.clone(), false, false).unwrap();
    println!("{:>6} {:>14} {:>12} {:>12} {:>12}", "field", "scheme", "ratio_pct", "activ_pct", "acc_pct");
    for field in &report.fields {
        for s in &field.schemes {
            println!(
                "{:>6} {:>14} {:>12.2} {:>12.2} {:>12.2}",
                field.field_length_m, s.scheme, s.ratio_pct, s.activation_pct, s.accuracy_pct
            );
        }
    }
    println!("\nwrote {}", report.results_csv.display());
}
