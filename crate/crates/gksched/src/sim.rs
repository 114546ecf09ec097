//! Network layout generation, path-loss and fading channel realization, and
//! the sum-rate objective.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

/// Seed streams, so one master seed drives independent generators.
pub const STREAM_LAYOUT: u64 = 1;
pub const STREAM_FADING: u64 = 2;
pub const STREAM_SCHED_RANDOM: u64 = 3;
pub const STREAM_TIMING: u64 = 4;
pub const STREAM_FIELD: u64 = 5;

/// SplitMix64-style mixer combining a master seed, a stream id, and an index
/// into one well-scrambled 64-bit seed.
pub fn mix_seed(master: u64, stream: u64, index: u64) -> u64 {
    let mut z = master
        ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum PathlossModel {
    /// ITU-1411 line-of-sight dual-slope model.
    Itu1411,
    /// Plain power law: linear gain d^-alpha.
    PowerLaw { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FadingModel {
    /// Path loss and antenna gains only.
    #[default]
    None,
    /// Unit-mean exponential power fading (Rayleigh envelope).
    Rayleigh,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub pair_count: usize,
    pub field_length_m: f64,
    pub d_min_m: f64,
    pub d_max_m: f64,
    pub carrier_freq_hz: f64,
    pub bandwidth_hz: f64,
    pub tx_power_dbm: f64,
    pub tx_antenna_height_m: f64,
    pub rx_antenna_height_m: f64,
    pub antenna_gain_db: f64,
    pub noise_psd_dbm_hz: f64,
    pub pathloss: PathlossModel,
    #[serde(default)]
    pub fading: FadingModel,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            pair_count: 10,
            field_length_m: 500.0,
            d_min_m: 2.0,
            d_max_m: 65.0,
            carrier_freq_hz: 2.4e9,
            bandwidth_hz: 5e6,
            tx_power_dbm: 40.0,
            tx_antenna_height_m: 1.5,
            rx_antenna_height_m: 1.5,
            antenna_gain_db: 2.5,
            noise_psd_dbm_hz: -169.0,
            pathloss: PathlossModel::Itu1411,
            fading: FadingModel::None,
            seed: 42,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.pair_count == 0 {
            return Err(Error::validation("pair_count must be at least 1"));
        }
        let finite_positive = [
            ("field_length_m", self.field_length_m),
            ("d_min_m", self.d_min_m),
            ("d_max_m", self.d_max_m),
            ("carrier_freq_hz", self.carrier_freq_hz),
            ("bandwidth_hz", self.bandwidth_hz),
            ("tx_antenna_height_m", self.tx_antenna_height_m),
            ("rx_antenna_height_m", self.rx_antenna_height_m),
        ];
        for (name, value) in finite_positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::validation(format!("{name} must be positive and finite")));
            }
        }
        if !self.tx_power_dbm.is_finite()
            || !self.antenna_gain_db.is_finite()
            || !self.noise_psd_dbm_hz.is_finite()
        {
            return Err(Error::validation("power figures must be finite"));
        }
        if self.d_min_m >= self.d_max_m {
            return Err(Error::validation("d_min_m must be less than d_max_m"));
        }
        // keeps a feasible receiver angle available from any transmitter
        if self.d_max_m > self.field_length_m / 2.0 {
            return Err(Error::validation("d_max_m must be at most half the field length"));
        }
        if let PathlossModel::PowerLaw { alpha } = self.pathloss {
            if !(alpha > 0.0) || !alpha.is_finite() {
                return Err(Error::validation("alpha must be positive and finite"));
            }
        }
        Ok(())
    }

    pub fn tx_power_w(&self) -> f64 {
        10f64.powf((self.tx_power_dbm - 30.0) / 10.0)
    }

    pub fn noise_power_w(&self) -> f64 {
        10f64.powf((self.noise_psd_dbm_hz - 30.0) / 10.0) * self.bandwidth_hz
    }

    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT_M_S / self.carrier_freq_hz
    }
}

/// Transmitter and receiver positions of one network drop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub field_length_m: f64,
    pub tx: Vec<[f64; 2]>,
    pub rx: Vec<[f64; 2]>,
}

pub(crate) fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    (dx * dx + dy * dy).sqrt()
}

impl Layout {
    pub fn pair_count(&self) -> usize {
        self.tx.len()
    }

    /// Distance from transmitter q to its own receiver.
    pub fn direct_distance(&self, q: usize) -> f64 {
        dist(self.tx[q], self.rx[q])
    }

    /// Distance from transmitter i to receiver q.
    pub fn cross_distance(&self, i: usize, q: usize) -> f64 {
        dist(self.tx[i], self.rx[q])
    }

    pub fn validate(&self, cfg: &SimConfig) -> Result<()> {
        if self.tx.len() != self.rx.len() {
            return Err(Error::DimensionMismatch { expected: self.tx.len(), actual: self.rx.len() });
        }
        if self.tx.len() != cfg.pair_count {
            return Err(Error::DimensionMismatch { expected: cfg.pair_count, actual: self.tx.len() });
        }
        let l = self.field_length_m;
        for p in self.tx.iter().chain(&self.rx) {
            if !p.iter().all(|x| x.is_finite() && (0.0..=l).contains(x)) {
                return Err(Error::validation("node outside the field"));
            }
        }
        for q in 0..self.pair_count() {
            let d = self.direct_distance(q);
            if d < cfg.d_min_m || d > cfg.d_max_m {
                return Err(Error::validation(format!("pair {q} distance {d} out of range")));
            }
        }
        Ok(())
    }
}

const MAX_ANGLE_ATTEMPTS: usize = 10_000;

/// Drops transmitters uniformly in the square; places each receiver at a
/// uniform distance in [d_min, d_max], redrawing only the angle until the
/// receiver lands inside the field (the radius stays exactly uniform).
pub fn generate_layout(cfg: &SimConfig, layout_index: u64) -> Result<Layout> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, STREAM_LAYOUT, layout_index));
    let l = cfg.field_length_m;
    let mut tx = Vec::with_capacity(cfg.pair_count);
    let mut rx = Vec::with_capacity(cfg.pair_count);
    for _ in 0..cfg.pair_count {
        let t = [rng.gen_range(0.0..l), rng.gen_range(0.0..l)];
        let r = rng.gen_range(cfg.d_min_m..cfg.d_max_m);
        let mut placed = false;
        for _ in 0..MAX_ANGLE_ATTEMPTS {
            let theta = rng.gen_range(0.0..std::f64::consts::TAU);
            let cand = [t[0] + r * theta.cos(), t[1] + r * theta.sin()];
            if cand.iter().all(|x| (0.0..=l).contains(x)) {
                rx.push(cand);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::Numerical("receiver placement did not terminate".into()));
        }
        tx.push(t);
    }
    Ok(Layout { field_length_m: l, tx, rx })
}

/// ITU-1411 line-of-sight breakpoint distance in meters.
pub fn breakpoint_distance_m(cfg: &SimConfig) -> f64 {
    4.0 * cfg.tx_antenna_height_m * cfg.rx_antenna_height_m / cfg.wavelength_m()
}

/// ITU-1411 line-of-sight path loss in dB: 20 dB/decade up to the breakpoint,
/// 40 dB/decade beyond it.
pub fn pathloss_itu1411_db(distance_m: f64, cfg: &SimConfig) -> Result<f64> {
    if !(distance_m > 0.0) || !distance_m.is_finite() {
        return Err(Error::validation("distance must be positive and finite"));
    }
    let lambda = cfg.wavelength_m();
    let r_bp = breakpoint_distance_m(cfg);
    let l_bp = (20.0
        * (lambda * lambda
            / (8.0 * std::f64::consts::PI * cfg.tx_antenna_height_m * cfg.rx_antenna_height_m))
            .log10())
    .abs();
    let slope = if distance_m <= r_bp { 20.0 } else { 40.0 };
    Ok(l_bp + slope * (distance_m / r_bp).log10())
}

/// Power-law linear path gain d^-alpha.
pub fn pathloss_powerlaw_linear(distance_m: f64, alpha: f64) -> Result<f64> {
    if !(distance_m > 0.0) || !distance_m.is_finite() {
        return Err(Error::validation("distance must be positive and finite"));
    }
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::validation("alpha must be positive and finite"));
    }
    Ok(distance_m.powf(-alpha))
}

/// Linear power gain over one path: path loss plus both antenna gains.
pub fn path_gain_linear(distance_m: f64, cfg: &SimConfig) -> Result<f64> {
    let antenna_lin = 10f64.powf(2.0 * cfg.antenna_gain_db / 10.0);
    match cfg.pathloss {
        PathlossModel::Itu1411 => {
            let pl_db = pathloss_itu1411_db(distance_m, cfg)?;
            Ok(10f64.powf((2.0 * cfg.antenna_gain_db - pl_db) / 10.0))
        }
        PathlossModel::PowerLaw { alpha } => {
            Ok(antenna_lin * pathloss_powerlaw_linear(distance_m, alpha)?)
        }
    }
}

/// K x K matrix of realized linear power gains; entry (i, q) is transmitter i
/// into receiver q.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pair_count: usize,
    gains: Vec<f64>,
    noise_power_w: f64,
}

impl ChannelRealization {
    pub fn from_parts(pair_count: usize, gains: Vec<f64>, noise_power_w: f64) -> Result<Self> {
        if gains.len() != pair_count * pair_count {
            return Err(Error::DimensionMismatch {
                expected: pair_count * pair_count,
                actual: gains.len(),
            });
        }
        if gains.iter().any(|g| !(*g > 0.0) || !g.is_finite()) {
            return Err(Error::validation("gains must be positive and finite"));
        }
        if !(noise_power_w > 0.0) || !noise_power_w.is_finite() {
            return Err(Error::validation("noise power must be positive and finite"));
        }
        Ok(ChannelRealization { pair_count, gains, noise_power_w })
    }

    /// Test hook: no positivity validation, e.g. for zeroed cross gains.
    #[doc(hidden)]
    pub fn from_parts_unchecked(pair_count: usize, gains: Vec<f64>, noise_power_w: f64) -> Self {
        ChannelRealization { pair_count, gains, noise_power_w }
    }

    pub fn pair_count(&self) -> usize {
        self.pair_count
    }

    pub fn gain(&self, i: usize, q: usize) -> f64 {
        self.gains[i * self.pair_count + q]
    }

    pub fn direct_gain(&self, q: usize) -> f64 {
        self.gain(q, q)
    }

    pub fn noise_power_w(&self) -> f64 {
        self.noise_power_w
    }
}

/// Realizes the gain matrix for one layout. The fading draw is deterministic
/// in `fading_seed`; with fading disabled the seed is unused.
pub fn realize_channel(
    layout: &Layout,
    cfg: &SimConfig,
    fading_seed: u64,
) -> Result<ChannelRealization> {
    layout.validate(cfg)?;
    let k = layout.pair_count();
    let mut gains = Vec::with_capacity(k * k);
    for i in 0..k {
        for q in 0..k {
            gains.push(path_gain_linear(layout.cross_distance(i, q), cfg)?);
        }
    }
    if cfg.fading == FadingModel::Rayleigh {
        let mut rng = ChaCha8Rng::seed_from_u64(fading_seed);
        for g in gains.iter_mut() {
            let f: f64 = Exp1.sample(&mut rng);
            *g *= f;
        }
    }
    ChannelRealization::from_parts(k, gains, cfg.noise_power_w())
}

/// Binary activation vector over the K links.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ScheduleDecision {
    active: Vec<bool>,
}

impl ScheduleDecision {
    pub fn new(active: Vec<bool>) -> Self {
        ScheduleDecision { active }
    }

    pub fn all_on(k: usize) -> Self {
        ScheduleDecision { active: vec![true; k] }
    }

    pub fn all_off(k: usize) -> Self {
        ScheduleDecision { active: vec![false; k] }
    }

    /// Bit q of `mask` activates link q.
    pub fn from_mask(k: usize, mask: u64) -> Self {
        ScheduleDecision { active: (0..k).map(|q| mask >> q & 1 == 1).collect() }
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        let active = bits
            .iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::validation(format!("decision bit must be 0 or 1, got {other}"))),
            })
            .collect::<Result<_>>()?;
        Ok(ScheduleDecision { active })
    }

    pub fn as_bits(&self) -> Vec<u8> {
        self.active.iter().map(|&a| a as u8).collect()
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    pub fn is_active(&self, q: usize) -> bool {
        self.active[q]
    }

    pub fn set(&mut self, q: usize, on: bool) {
        self.active[q] = on;
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn count_active(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    pub fn activation_fraction(&self) -> f64 {
        if self.active.is_empty() {
            return 0.0;
        }
        self.count_active() as f64 / self.active.len() as f64
    }
}

/// Per-link achieved rates in bits/s under the given activation vector.
pub fn link_rates(ch: &ChannelRealization, d: &ScheduleDecision, cfg: &SimConfig) -> Vec<f64> {
    assert_eq!(ch.pair_count(), d.len(), "decision length must match the channel");
    let k = ch.pair_count();
    let p = cfg.tx_power_w();
    let mut rates = vec![0.0; k];
    for q in 0..k {
        if !d.is_active(q) {
            continue;
        }
        let mut interference = 0.0;
        for i in 0..k {
            if i != q && d.is_active(i) {
                interference += p * ch.gain(i, q);
            }
        }
        let sinr = p * ch.direct_gain(q) / (interference + ch.noise_power_w());
        rates[q] = cfg.bandwidth_hz * (1.0 + sinr).log2();
    }
    rates
}

/// Network sum rate in bits/s.
pub fn sum_rate(ch: &ChannelRealization, d: &ScheduleDecision, cfg: &SimConfig) -> f64 {
    link_rates(ch, d, cfg).iter().sum()
}
