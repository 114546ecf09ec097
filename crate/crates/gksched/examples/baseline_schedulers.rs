//! The exhaustive optimum against the heuristic baselines, paired on the
//! same channel realizations.

use gksched::sched::{all_active, exhaustive_optimal, greedy, random_schedule, strongest_link};
use gksched::sim::{
    generate_layout, mix_seed, realize_channel, sum_rate, SimConfig, STREAM_SCHED_RANDOM,
};

fn main() {
    let cfg = SimConfig::default();
    let layouts = 20;
    let mut sums = [0.0f64; 5];

    for index in 0..layouts {
        let layout = generate_layout(&cfg, index).unwrap();
        let ch = realize_channel(&layout, &cfg, 0).unwrap();
        let (best_d, best) = exhaustive_optimal(&ch, &cfg).unwrap();
        let (_, greedy_rate) = greedy(&ch, &cfg);
        let rates = [
            best,
            greedy_rate,
            sum_rate(&ch, &strongest_link(&ch), &cfg),
            sum_rate(&ch, &random_schedule(cfg.pair_count, mix_seed(cfg.seed, STREAM_SCHED_RANDOM, index)), &cfg),
            sum_rate(&ch, &all_active(cfg.pair_count), &cfg),
        ];
        for (s, r) in sums.iter_mut().zip(rates) {
            *s += r;
        }
        if index < 3 {
            println!("layout {index}: optimum activates {:?} of {} links", best_d.count_active(), cfg.pair_count);
        }
    }

    println!("\nmean sum rate over {layouts} layouts (ratio to the exhaustive optimum):");
    for (name, s) in ["exhaustive", "greedy", "strongest_link", "random", "all_active"].iter().zip(sums) {
        println!("  {name:>14}: {:.4e} bits/s ({:5.1}%)", s / layouts as f64, 100.0 * s / sums[0]);
    }
}
