//! Seeded Monte Carlo simulation of the hop-by-hop ACK scheme.
//!
//! The simulator tracks packet identity through strict FIFO buffers, so it
//! measures real per-packet delays as well as throughput, occupancy
//! frequencies and blocking counts. Runs are reproducible bit for bit for a
//! given `(config, settings)` pair.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::approx::OccupancyPmf;
use crate::error::{Error, Result};
use crate::model::NetworkConfig;

/// Seed used by the CLI when none is given.
pub const DEFAULT_SEED: u64 = 0x5EED_BA5E;

/// SplitMix64: one 64-bit multiply-xor-shift chain per draw.
///
/// Chosen for reproducibility: the whole generator is these ten lines, so a
/// report can be regenerated from `(config, settings)` on any platform.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        mix(self.state)
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for replication `k` of a run with base seed `base`:
/// `mix(base + k * GOLDEN)` where GOLDEN is the SplitMix64 increment.
/// Documented so pooled reports can be reproduced replication by
/// replication.
pub fn replication_seed(base: u64, k: u32) -> u64 {
    mix(base.wrapping_add(u64::from(k).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimSettings {
    pub epochs: u64,
    pub warmup_epochs: u64,
    pub seed: u64,
    pub replications: u32,
}

impl SimSettings {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidSettings("epochs must be positive".into()));
        }
        if self.warmup_epochs >= self.epochs {
            return Err(Error::InvalidSettings(format!(
                "warmup ({}) must be smaller than epochs ({})",
                self.warmup_epochs, self.epochs
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidSettings(
                "replications must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Default warmup: `max(10 * sum(m_i), 10^4)` epochs.
pub fn default_warmup(config: &NetworkConfig) -> u64 {
    let total: u64 = config.buffers().iter().map(|&m| u64::from(m)).sum();
    (10 * total).max(10_000)
}

/// Empirical counterparts of capacity, delay distribution and occupancy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub throughput: f64,
    /// Standard error of the throughput across replications (absent for a
    /// single run).
    pub stderr_throughput: Option<f64>,
    pub delivered: u64,
    pub delay_histogram: BTreeMap<u64, u64>,
    pub occupancy_freq: Vec<OccupancyPmf>,
    pub blocked_events: Vec<u64>,
}

impl SimReport {
    pub fn mean_delay(&self) -> f64 {
        if self.delivered == 0 {
            return f64::NAN;
        }
        let sum: f64 = self
            .delay_histogram
            .iter()
            .map(|(&d, &c)| d as f64 * c as f64)
            .sum();
        sum / self.delivered as f64
    }

    pub fn delay_variance(&self) -> f64 {
        if self.delivered == 0 {
            return f64::NAN;
        }
        let mean = self.mean_delay();
        let second: f64 = self
            .delay_histogram
            .iter()
            .map(|(&d, &c)| d as f64 * d as f64 * c as f64)
            .sum();
        (second / self.delivered as f64 - mean * mean).max(0.0)
    }
}

/// One epoch's observable outcome.
#[derive(Debug, Clone, Copy, Default)]
pub struct StepOutcome {
    /// Stamp epoch of a packet delivered to the destination this epoch.
    pub delivered_stamp: Option<u64>,
    /// Bit `j` set when node `v_{j+1}` blocked a successfully delivered
    /// packet this epoch.
    pub blocked_mask: u64,
    /// Whether the source's head packet was accepted by `v_1`.
    pub source_accepted: bool,
}

/// Deterministic epoch-by-epoch network state, drivable with explicit
/// erasure patterns; the Monte Carlo loop feeds it sampled ones.
#[derive(Debug, Clone)]
pub struct LineSim {
    buffers: Vec<VecDeque<u64>>,
    transfers: Vec<bool>,
    source_stamp: Option<u64>,
    epoch: u64,
    accepted_total: u64,
    delivered_total: u64,
}

impl LineSim {
    pub fn new(config: &NetworkConfig) -> Self {
        LineSim {
            buffers: config.buffers().iter().map(|_| VecDeque::new()).collect(),
            transfers: vec![false; config.hops()],
            source_stamp: None,
            epoch: 0,
            accepted_total: 0,
            delivered_total: 0,
        }
    }

    pub fn epoch(&self) -> u64 {
        self.epoch
    }

    pub fn occupancies(&self) -> Vec<u32> {
        self.buffers.iter().map(|b| b.len() as u32).collect()
    }

    /// Packets accepted into `v_1` since the start of the run.
    pub fn accepted_total(&self) -> u64 {
        self.accepted_total
    }

    pub fn delivered_total(&self) -> u64 {
        self.delivered_total
    }

    /// Advances one epoch under the given per-link survival pattern.
    ///
    /// Transfers are resolved backward from the destination so that a
    /// departure frees its slot for a same-epoch arrival; buffers are strict
    /// FIFO; the source stamps its head packet at its first transmission
    /// attempt and retries the same packet until accepted.
    pub fn step(&mut self, config: &NetworkConfig, survive: &[bool]) -> StepOutcome {
        let h = config.hops();
        debug_assert_eq!(survive.len(), h);
        let buffers = config.buffers();
        let stamp = *self.source_stamp.get_or_insert(self.epoch);

        let mut outcome = StepOutcome::default();

        // Y_h: the destination always has space.
        self.transfers[h - 1] = !self.buffers[h - 2].is_empty() && survive[h - 1];
        for idx in (0..h - 1).rev() {
            let sender_nonempty = idx == 0 || !self.buffers[idx - 1].is_empty();
            let incoming = u32::from(self.transfers[idx + 1]);
            let space = (self.buffers[idx].len() as u32) < buffers[idx] + incoming;
            self.transfers[idx] = sender_nonempty && survive[idx] && space;
            if sender_nonempty && survive[idx] && !space {
                outcome.blocked_mask |= 1 << idx;
            }
        }

        if self.transfers[h - 1] {
            let delivered = self.buffers[h - 2].pop_front().expect("nonempty checked");
            self.delivered_total += 1;
            outcome.delivered_stamp = Some(delivered);
        }
        for idx in (1..h - 1).rev() {
            if self.transfers[idx] {
                let packet = self.buffers[idx - 1].pop_front().expect("nonempty checked");
                self.buffers[idx].push_back(packet);
            }
        }
        if self.transfers[0] {
            self.buffers[0].push_back(stamp);
            self.source_stamp = None;
            self.accepted_total += 1;
            outcome.source_accepted = true;
        }

        for (j, buffer) in self.buffers.iter().enumerate() {
            debug_assert!(buffer.len() as u32 <= buffers[j], "buffer bound violated");
        }
        self.epoch += 1;
        outcome
    }

    /// Packets currently buffered anywhere in the line.
    pub fn in_flight(&self) -> u64 {
        self.buffers.iter().map(|b| b.len() as u64).sum()
    }
}

/// Runs a single seeded simulation.
///
/// Per epoch: record occupancies (after warmup), sample each link's
/// survival independently (`erased iff u < eps`, one `f64` draw per link in
/// link order), then resolve transfers. Delay of a packet stamped at its
/// first attempt in epoch `s` and delivered in epoch `d` is `d - s + 1`.
pub fn simulate(config: &NetworkConfig, settings: &SimSettings) -> Result<SimReport> {
    settings.validate()?;
    let h = config.hops();
    let eps = config.erasures();
    let mut rng = SplitMix64::new(settings.seed);
    let mut sim = LineSim::new(config);

    let mut survive = vec![false; h];
    let mut occupancy_counts: Vec<Vec<u64>> = config
        .buffers()
        .iter()
        .map(|&m| vec![0u64; m as usize + 1])
        .collect();
    let mut delay_histogram: BTreeMap<u64, u64> = BTreeMap::new();
    let mut blocked = vec![0u64; h - 1];
    let mut delivered = 0u64;

    for epoch in 0..settings.epochs {
        let measuring = epoch >= settings.warmup_epochs;
        if measuring {
            for (j, buffer_len) in sim.occupancies().iter().enumerate() {
                occupancy_counts[j][*buffer_len as usize] += 1;
            }
        }
        for (flag, &e) in survive.iter_mut().zip(eps) {
            *flag = rng.next_f64() >= e;
        }
        let outcome = sim.step(config, &survive);
        if measuring {
            if let Some(stamp) = outcome.delivered_stamp {
                delivered += 1;
                *delay_histogram.entry(epoch - stamp + 1).or_insert(0) += 1;
            }
            for (j, count) in blocked.iter_mut().enumerate() {
                *count += outcome.blocked_mask >> j & 1;
            }
        }
    }

    debug_assert_eq!(sim.accepted_total(), sim.delivered_total() + sim.in_flight());

    let measured_epochs = settings.epochs - settings.warmup_epochs;
    let occupancy_freq = occupancy_counts
        .into_iter()
        .map(|counts| {
            let total: u64 = counts.iter().sum();
            OccupancyPmf::from_normalized(
                counts.iter().map(|&c| c as f64 / total as f64).collect(),
            )
        })
        .collect();

    Ok(SimReport {
        throughput: delivered as f64 / measured_epochs as f64,
        stderr_throughput: None,
        delivered,
        delay_histogram,
        occupancy_freq,
        blocked_events: blocked,
    })
}

/// Runs `settings.replications` independent simulations with derived seeds
/// (see [`replication_seed`]) and pools them: mean throughput with its
/// standard error, summed histograms and averaged occupancy frequencies.
pub fn replicate(config: &NetworkConfig, settings: &SimSettings) -> Result<SimReport> {
    settings.validate()?;
    let reps = settings.replications;
    let mut throughputs = Vec::with_capacity(reps as usize);
    let mut delivered = 0u64;
    let mut delay_histogram: BTreeMap<u64, u64> = BTreeMap::new();
    let mut blocked = vec![0u64; config.hops() - 1];
    let mut occupancy_acc: Vec<Vec<f64>> = config
        .buffers()
        .iter()
        .map(|&m| vec![0.0; m as usize + 1])
        .collect();

    for k in 0..reps {
        let rep_settings = SimSettings {
            seed: replication_seed(settings.seed, k),
            replications: 1,
            ..*settings
        };
        let report = simulate(config, &rep_settings)?;
        throughputs.push(report.throughput);
        delivered += report.delivered;
        for (d, c) in report.delay_histogram {
            *delay_histogram.entry(d).or_insert(0) += c;
        }
        for (acc, count) in blocked.iter_mut().zip(&report.blocked_events) {
            *acc += count;
        }
        for (acc, pmf) in occupancy_acc.iter_mut().zip(&report.occupancy_freq) {
            for (slot, &p) in acc.iter_mut().zip(pmf.masses()) {
                *slot += p / reps as f64;
            }
        }
    }

    let mean = throughputs.iter().sum::<f64>() / reps as f64;
    let stderr = if reps >= 2 {
        let var = throughputs
            .iter()
            .map(|t| (t - mean) * (t - mean))
            .sum::<f64>()
            / (reps as f64 - 1.0);
        Some((var / reps as f64).sqrt())
    } else {
        None
    };

    let occupancy_freq = occupancy_acc
        .into_iter()
        .map(|mut masses| {
            let total: f64 = masses.iter().sum();
            masses.iter_mut().for_each(|p| *p /= total);
            OccupancyPmf::from_normalized(masses)
        })
        .collect();

    Ok(SimReport {
        throughput: mean,
        stderr_throughput: stderr,
        delivered,
        delay_histogram,
        occupancy_freq,
        blocked_events: blocked,
    })
}
