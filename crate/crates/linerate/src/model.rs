//! Line-network description shared by every other module.
//!
//! A line network has `h >= 2` unidirectional lossy links in series. Nodes are
//! `v_0..v_h`; link `i` connects `v_{i-1} -> v_i` and erases a packet with
//! probability `eps_i`. Each intermediate node `v_1..v_{h-1}` holds at most
//! `m_i` packets; source and destination are unbounded.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Validated description of a line network.
///
/// Immutable once constructed; every accessor is read-only, so values can be
/// shared freely across threads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigDoc", into = "ConfigDoc")]
pub struct NetworkConfig {
    erasures: Vec<f64>,
    buffers: Vec<u32>,
    packet_size_bytes: Option<u64>,
}

/// JSON document form: keys `hops`, `erasures`, `buffers`, optional
/// `packet_size_bytes`. The same schema is accepted by the CLI `--config`
/// flag and produced by every JSON export that embeds a config.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct ConfigDoc {
    hops: usize,
    erasures: Vec<f64>,
    buffers: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    packet_size_bytes: Option<u64>,
}

impl TryFrom<ConfigDoc> for NetworkConfig {
    type Error = Error;

    fn try_from(doc: ConfigDoc) -> Result<Self> {
        if doc.hops != doc.erasures.len() {
            return Err(Error::InvalidConfig(format!(
                "hops is {} but {} erasure probabilities were given",
                doc.hops,
                doc.erasures.len()
            )));
        }
        NetworkConfig::new(doc.erasures, doc.buffers, doc.packet_size_bytes)
    }
}

impl From<NetworkConfig> for ConfigDoc {
    fn from(config: NetworkConfig) -> Self {
        ConfigDoc {
            hops: config.hops(),
            erasures: config.erasures,
            buffers: config.buffers,
            packet_size_bytes: config.packet_size_bytes,
        }
    }
}

impl NetworkConfig {
    /// Builds a config from per-link erasures and per-node buffer sizes,
    /// reporting the first violated invariant.
    pub fn new(
        erasures: Vec<f64>,
        buffers: Vec<u32>,
        packet_size_bytes: Option<u64>,
    ) -> Result<Self> {
        let config = NetworkConfig {
            erasures,
            buffers,
            packet_size_bytes,
        };
        config.check()?;
        Ok(config)
    }

    /// Uniform-parameter convenience: `hops` links all with erasure `eps`,
    /// all intermediate buffers of size `m`.
    pub fn uniform(hops: usize, eps: f64, m: u32) -> Result<Self> {
        if hops < 2 {
            return Err(Error::InvalidConfig(format!(
                "a line network needs at least 2 hops, got {hops}"
            )));
        }
        NetworkConfig::new(vec![eps; hops], vec![m; hops - 1], None)
    }

    /// Re-checks every invariant and returns the config unchanged.
    /// Idempotent: validating a validated config is the identity.
    pub fn validate(self) -> Result<Self> {
        self.check()?;
        Ok(self)
    }

    fn check(&self) -> Result<()> {
        let h = self.erasures.len();
        if h < 2 {
            return Err(Error::InvalidConfig(format!(
                "a line network needs at least 2 hops, got {h}"
            )));
        }
        if self.buffers.len() != h - 1 {
            return Err(Error::InvalidConfig(format!(
                "expected {} buffer sizes for {} hops, got {}",
                h - 1,
                h,
                self.buffers.len()
            )));
        }
        for (i, &eps) in self.erasures.iter().enumerate() {
            if !(0.0..=1.0).contains(&eps) || eps.is_nan() {
                return Err(Error::InvalidConfig(format!(
                    "erasure out of range: link {} has erasure {}, want [0, 1]",
                    i + 1,
                    eps
                )));
            }
        }
        for (i, &m) in self.buffers.iter().enumerate() {
            if m < 1 {
                return Err(Error::InvalidConfig(format!(
                    "buffer of node v{} must hold at least 1 packet",
                    i + 1
                )));
            }
        }
        if let Some(size) = self.packet_size_bytes {
            if size == 0 {
                return Err(Error::InvalidConfig(
                    "packet_size_bytes must be positive when present".into(),
                ));
            }
        }
        Ok(())
    }

    /// Number of links `h`.
    pub fn hops(&self) -> usize {
        self.erasures.len()
    }

    /// Per-link erasure probabilities `eps_1..eps_h`.
    pub fn erasures(&self) -> &[f64] {
        &self.erasures
    }

    /// Per-node buffer sizes `m_1..m_{h-1}`.
    pub fn buffers(&self) -> &[u32] {
        &self.buffers
    }

    /// Inert metadata; never enters any computation.
    pub fn packet_size_bytes(&self) -> Option<u64> {
        self.packet_size_bytes
    }

    /// Size of the joint buffer-state space: `prod_i (m_i + 1)`.
    ///
    /// Saturates at `u128::MAX` (unreachable for any buildable chain).
    pub fn state_count(&self) -> u128 {
        self.buffers
            .iter()
            .fold(1u128, |acc, &m| acc.saturating_mul(u128::from(m) + 1))
    }

    /// Largest per-link throughput the network could ever reach:
    /// `1 - max_i eps_i`.
    pub fn min_cut(&self) -> f64 {
        1.0 - self.erasures.iter().cloned().fold(0.0, f64::max)
    }
}

/// Joint occupancy of the intermediate nodes, `n_i` in `[0, m_i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JointState {
    occupancies: Vec<u32>,
}

impl JointState {
    /// Checks componentwise bounds against `config`.
    pub fn new(config: &NetworkConfig, occupancies: Vec<u32>) -> Result<Self> {
        if occupancies.len() != config.buffers().len() {
            return Err(Error::InvalidArgument(format!(
                "state has {} occupancies, config has {} intermediate nodes",
                occupancies.len(),
                config.buffers().len()
            )));
        }
        for (i, (&n, &m)) in occupancies.iter().zip(config.buffers()).enumerate() {
            if n > m {
                return Err(Error::InvalidArgument(format!(
                    "occupancy {} of node v{} exceeds its buffer size {}",
                    n,
                    i + 1,
                    m
                )));
            }
        }
        Ok(JointState { occupancies })
    }

    pub fn occupancies(&self) -> &[u32] {
        &self.occupancies
    }
}
