//! Activation baselines: the exhaustive optimum plus greedy, strongest-link,
//! random, and all-active heuristics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sim::{sum_rate, ChannelRealization, ScheduleDecision, SimConfig};

/// Pair-count cap on the exhaustive search; beyond this the 2^K sweep is
/// refused rather than attempted.
pub const EXHAUSTIVE_MAX_PAIRS: usize = 25;

/// Exact maximizer of the sum rate over all 2^K activation vectors. Ties go
/// to the decision with fewer active links, then to the smallest activation
/// mask (bit q is link q).
pub fn exhaustive_optimal(
    ch: &ChannelRealization,
    cfg: &SimConfig,
) -> Result<(ScheduleDecision, f64)> {
    let k = ch.pair_count();
    if k > EXHAUSTIVE_MAX_PAIRS {
        return Err(Error::CapacityExceeded(k, EXHAUSTIVE_MAX_PAIRS));
    }
    let mut best = ScheduleDecision::all_off(k);
    let mut best_rate = 0.0;
    let mut best_active = 0usize;
    for mask in 1u64..1 << k {
        let d = ScheduleDecision::from_mask(k, mask);
        let r = sum_rate(ch, &d, cfg);
        let active = d.count_active();
        if r > best_rate || (r == best_rate && active < best_active) {
            best_rate = r;
            best = d;
            best_active = active;
        }
    }
    Ok((best, best_rate))
}

/// Links in greedy visit order: descending direct gain, ties to the smaller
/// index.
fn visit_order(ch: &ChannelRealization) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ch.pair_count()).collect();
    order.sort_by(|&a, &b| {
        ch.direct_gain(b).total_cmp(&ch.direct_gain(a)).then(a.cmp(&b))
    });
    order
}

/// Starts silent and visits links from the strongest direct gain down,
/// keeping each activation that does not decrease the sum rate.
pub fn greedy(ch: &ChannelRealization, cfg: &SimConfig) -> (ScheduleDecision, f64) {
    let mut d = ScheduleDecision::all_off(ch.pair_count());
    let mut rate = 0.0;
    for q in visit_order(ch) {
        d.set(q, true);
        let candidate = sum_rate(ch, &d, cfg);
        if candidate >= rate {
            rate = candidate;
        } else {
            d.set(q, false);
        }
    }
    (d, rate)
}

/// Activates only the link with the largest direct gain, ties to the smaller
/// index.
pub fn strongest_link(ch: &ChannelRealization) -> ScheduleDecision {
    let mut d = ScheduleDecision::all_off(ch.pair_count());
    let mut best = 0usize;
    for q in 1..ch.pair_count() {
        if ch.direct_gain(q) > ch.direct_gain(best) {
            best = q;
        }
    }
    d.set(best, true);
    d
}

/// Each link on independently with probability one half.
pub fn random_schedule(k: usize, seed: u64) -> ScheduleDecision {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ScheduleDecision::new((0..k).map(|_| rng.gen::<bool>()).collect())
}

/// Every link on.
pub fn all_active(k: usize) -> ScheduleDecision {
    ScheduleDecision::all_on(k)
}
