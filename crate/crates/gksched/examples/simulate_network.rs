//! Drop a D2D network in a square field, realize its interference channel,
//! and score a few activation choices.

use gksched::sim::{
    breakpoint_distance_m, generate_layout, link_rates, pathloss_itu1411_db, realize_channel,
    sum_rate, ScheduleDecision, SimConfig,
};

fn main() {
    let cfg = SimConfig::default();
    println!("field {} m, {} pairs, direct links {}..{} m", cfg.field_length_m, cfg.pair_count, cfg.d_min_m, cfg.d_max_m);
    println!("tx power {} W, noise {:.3e} W", cfg.tx_power_w(), cfg.noise_power_w());

    // dual-slope path loss: 20 dB/decade before the breakpoint, 40 after
    let r_bp = breakpoint_distance_m(&cfg);
    println!("breakpoint {:.2} m", r_bp);
    for d in [2.0, 10.0, 65.0, 200.0, 500.0] {
        println!("  path loss at {d:>5} m: {:.2} dB", pathloss_itu1411_db(d, &cfg).unwrap());
    }

    let layout = generate_layout(&cfg, 0).unwrap();
    let ch = realize_channel(&layout, &cfg, 0).unwrap();
    println!("\nlayout 0 direct distances (m):");
    for q in 0..cfg.pair_count {
        println!("  link {q}: {:.1}", layout.direct_distance(q));
    }

    // everyone talking at once vs. one link alone vs. silence
    let all_on = ScheduleDecision::all_on(cfg.pair_count);
    let only_first = ScheduleDecision::from_mask(cfg.pair_count, 1);
    println!("\nsum rate, all active:  {:.3e} bits/s", sum_rate(&ch, &all_on, &cfg));
    println!("sum rate, only link 0: {:.3e} bits/s", sum_rate(&ch, &only_first, &cfg));
    println!("sum rate, all silent:  {:.3e} bits/s", sum_rate(&ch, &ScheduleDecision::all_off(cfg.pair_count), &cfg));

    println!("\nper-link rates under all-active (bits/s):");
    for (q, r) in link_rates(&ch, &all_on, &cfg).iter().enumerate() {
        println!("  link {q}: {r:.3e}");
    }
}
