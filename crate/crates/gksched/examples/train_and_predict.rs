//! Train the kernel SVM on oracle-labeled embeddings, then schedule unseen
//! layouts with it. Everything stays in memory; the CLI does the same with
//! files.

use gksched::embed::{embed_layout, EmbeddingConfig};
use gksched::sched::exhaustive_optimal;
use gksched::sim::{generate_layout, realize_channel, sum_rate, SimConfig};
use gksched::svm::{
    predict_schedule, train_with_cv, SvmHyper, TrainSet, DEFAULT_BANDWIDTH_FACTORS,
    DEFAULT_CV_FOLDS,
};

fn main() {
    let cfg = SimConfig::default();
    let ecfg = EmbeddingConfig::default();
    let train_layouts = 30u64;

    // label each training link by whether the exhaustive optimum activates it
    let mut points = Vec::new();
    let mut labels = Vec::new();
    let mut groups = Vec::new();
    for index in 0..train_layouts {
        let layout = generate_layout(&cfg, index).unwrap();
        let ch = realize_channel(&layout, &cfg, 0).unwrap();
        let (optimal, _) = exhaustive_optimal(&ch, &cfg).unwrap();
        for (q, s) in embed_layout(&layout, &ecfg).unwrap().into_iter().enumerate() {
            points.push(s);
            labels.push(if optimal.is_active(q) { 1 } else { -1 });
            groups.push(index as usize);
        }
    }
    let set = TrainSet::new(points, labels).unwrap();
    let (pos, neg) = set.class_counts();
    println!("{} training samples ({pos} active, {neg} silent)", set.len());

    let (model, cv) = train_with_cv(
        &set,
        &SvmHyper::default(),
        &groups,
        DEFAULT_CV_FOLDS,
        &DEFAULT_BANDWIDTH_FACTORS,
    )
    .unwrap();
    println!("chosen bandwidth {:.4} (factor {}), cv accuracy {:.3}", cv.gamma, cv.factor, cv.mean_accuracy);
    println!("{} support vectors, bias {:.4}", model.support_count(), model.bias());

    // schedule fresh layouts and compare against the exact optimum
    let mut kernel_sum = 0.0;
    let mut best_sum = 0.0;
    for index in train_layouts..train_layouts + 10 {
        let layout = generate_layout(&cfg, index).unwrap();
        let ch = realize_channel(&layout, &cfg, 0).unwrap();
        let (_, best) = exhaustive_optimal(&ch, &cfg).unwrap();
        let d = predict_schedule(&model, &layout, &ecfg, &ch).unwrap();
        kernel_sum += sum_rate(&ch, &d, &cfg);
        best_sum += best;
    }
    println!("held-out ratio to the optimum: {:.2}%", 100.0 * kernel_sum / best_sum);
}
