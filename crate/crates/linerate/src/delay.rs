//! Analytic end-to-end packet delay distribution.
//!
//! Each hop contributes a mixture of negative-binomial service times: an
//! arriving packet that queues behind `i` packets must wait for `i + 1`
//! departures, each a geometric trial whose success probability is the
//! outgoing link's survival deflated by downstream blocking. The total delay
//! is the convolution of the source's entry stage with every relay stage.

use serde::{Deserialize, Serialize};

use crate::approx::{ApproxSolution, OccupancyPmf};
use crate::error::{Error, Result};
use crate::model::NetworkConfig;
use crate::pmf::{geometric, k_fold_geometric, DiscretePmf};

/// Which occupancy an arriving packet is assumed to see.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThetaMode {
    /// Occupancy left after the node's own same-epoch departure, which is
    /// what the transfer rules let an accepted packet queue behind.
    #[default]
    Arrival,
    /// Raw time-stationary occupancy, ignoring the same-epoch departure.
    Stationary,
}

/// Per-link erasure probabilities inflated by downstream blocking;
/// the last link never blocks, so `eps'_h = eps_h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveErasures {
    values: Vec<f64>,
}

impl EffectiveErasures {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Effective erasure of link `i` (1-based).
    pub fn link(&self, i: usize) -> f64 {
        self.values[i - 1]
    }
}

/// Occupancy of node `v_j` (1-based) as seen by an arriving packet.
pub fn theta(
    config: &NetworkConfig,
    solution: &ApproxSolution,
    node: usize,
    mode: ThetaMode,
) -> OccupancyPmf {
    let j = node - 1;
    let phi = &solution.occupancies[j];
    match mode {
        ThetaMode::Stationary => phi.clone(),
        ThetaMode::Arrival => {
            // Departure probability of this node in one epoch, given it is
            // nonempty: the outgoing link survives and downstream accepts.
            let q = (1.0 - config.erasures()[j + 1]) * (1.0 - solution.blocking_probs[j + 1]);
            let m = phi.max_occupancy();
            let masses = (0..=m)
                .map(|k| {
                    let stay = if k == 0 { phi.mass(0) } else { phi.mass(k) * (1.0 - q) };
                    let from_above = if k < m { phi.mass(k + 1) * q } else { 0.0 };
                    stay + from_above
                })
                .collect();
            OccupancyPmf::from_normalized(masses)
        }
    }
}

/// Applies `eps'_i = eps_i + theta_i(m_i) (1 - eps_i)` per link.
pub fn effective_erasures(
    config: &NetworkConfig,
    solution: &ApproxSolution,
    mode: ThetaMode,
) -> EffectiveErasures {
    let h = config.hops();
    let eps = config.erasures();
    let values = (0..h)
        .map(|l| {
            if l == h - 1 {
                eps[l]
            } else {
                let full = theta(config, solution, l + 1, mode).mass(config.buffers()[l] as usize);
                eps[l] + full * (1.0 - eps[l])
            }
        })
        .collect();
    EffectiveErasures { values }
}

/// Renormalizes an arriving packet's occupancy over non-full states:
/// `pi(i) = theta(i) / (1 - theta(m))` for `i < m`, `pi(m) = 0`.
pub fn arrival_occupancy(node_pmf: &OccupancyPmf) -> Result<Vec<f64>> {
    let m = node_pmf.max_occupancy();
    let full = node_pmf.mass(m);
    let accepted = 1.0 - full;
    if accepted <= 0.0 {
        return Err(Error::NodePermanentlyFull);
    }
    let mut pi: Vec<f64> = (0..m).map(|k| node_pmf.mass(k) / accepted).collect();
    pi.push(0.0);
    Ok(pi)
}

/// Delay added by relay `v_j` (1-based, `1 <= j <= h-1`): a mixture of
/// `(i+1)`-fold geometric service times over the occupancy the packet joins.
pub fn node_delay(
    config: &NetworkConfig,
    solution: &ApproxSolution,
    node: usize,
    tail_budget: f64,
    mode: ThetaMode,
) -> Result<DiscretePmf> {
    let h = config.hops();
    if node == 0 || node >= h {
        return Err(Error::InvalidArgument(format!(
            "node index {node} out of 1..={}",
            h - 1
        )));
    }
    let eff = effective_erasures(config, solution, mode);
    node_delay_with(config, solution, &eff, node, tail_budget, mode)
}

fn node_delay_with(
    config: &NetworkConfig,
    solution: &ApproxSolution,
    eff: &EffectiveErasures,
    node: usize,
    tail_budget: f64,
    mode: ThetaMode,
) -> Result<DiscretePmf> {
    let pi = arrival_occupancy(&theta(config, solution, node, mode))?;
    let service_prob = 1.0 - eff.link(node + 1);
    let mut components = Vec::new();
    for (i, &weight) in pi.iter().enumerate().take(config.buffers()[node - 1] as usize) {
        if weight == 0.0 {
            continue;
        }
        components.push((weight, k_fold_geometric(i as u32 + 1, service_prob, tail_budget)?));
    }
    DiscretePmf::mixture(&components)
}

/// Total source-to-destination delay: the entry stage over link 1 convolved
/// with every relay's added delay.
pub fn total_delay(
    config: &NetworkConfig,
    solution: &ApproxSolution,
    tail_budget: f64,
    mode: ThetaMode,
) -> Result<DiscretePmf> {
    let h = config.hops();
    let eff = effective_erasures(config, solution, mode);
    if eff.values().iter().any(|&e| e >= 1.0) {
        return Err(Error::ZeroThroughput);
    }
    let mut total = geometric(1.0 - eff.link(1), tail_budget)?;
    for node in 1..h {
        let stage = node_delay_with(config, solution, &eff, node, tail_budget, mode)?;
        total = total.convolve(&stage);
    }
    Ok(total)
}

/// Summary block exported alongside every delay PMF.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DelaySummary {
    pub mean: f64,
    pub variance: f64,
    pub p50: u64,
    pub p90: u64,
    pub p99: u64,
    pub tail_mass: f64,
}

pub fn summarize(pmf: &DiscretePmf) -> DelaySummary {
    DelaySummary {
        mean: pmf.mean(),
        variance: pmf.variance(),
        p50: pmf.quantile(0.5),
        p90: pmf.quantile(0.9),
        p99: pmf.quantile(0.99),
        tail_mass: pmf.tail_mass(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::solve;

    fn two_hop_solution() -> (NetworkConfig, ApproxSolution) {
        let config = NetworkConfig::new(vec![0.5, 0.5], vec![1], None).unwrap();
        let solution = solve(&config, 1e-12, 1000).unwrap();
        (config, solution)
    }

    #[test]
    fn arrival_theta_accounts_for_same_epoch_departure() {
        let (config, solution) = two_hop_solution();
        // phi = (1/3, 2/3), departure prob q = 1/2:
        // theta'(0) = 1/3 + 2/3 * 1/2 = 2/3, theta'(1) = 2/3 * 1/2 = 1/3.
        let t = theta(&config, &solution, 1, ThetaMode::Arrival);
        assert!((t.mass(0) - 2.0 / 3.0).abs() < 1e-10);
        assert!((t.mass(1) - 1.0 / 3.0).abs() < 1e-10);
        // theta'(m) equals the blocking probability the solver computed.
        assert!((t.mass(1) - solution.blocking_probs[0]).abs() < 1e-10);
    }

    #[test]
    fn stationary_theta_is_phi() {
        let (config, solution) = two_hop_solution();
        let t = theta(&config, &solution, 1, ThetaMode::Stationary);
        assert_eq!(t, solution.occupancies[0]);
    }

    #[test]
    fn effective_erasures_examples() {
        let (config, solution) = two_hop_solution();
        // Stationary mode: eps' = 1/2 + (2/3)(1/2) = 5/6.
        let eff = effective_erasures(&config, &solution, ThetaMode::Stationary);
        assert!((eff.link(1) - 5.0 / 6.0).abs() < 1e-10);
        assert_eq!(eff.link(2), 0.5);
        // Arrival mode folds blocking in instead: 1/2 + (1/3)(1/2) = 2/3.
        let eff = effective_erasures(&config, &solution, ThetaMode::Arrival);
        assert!((eff.link(1) - 2.0 / 3.0).abs() < 1e-10);
        assert_eq!(eff.link(2), 0.5);
    }

    #[test]
    fn effective_erasure_is_at_least_link_erasure() {
        let config = NetworkConfig::new(vec![0.3, 0.6, 0.2], vec![2, 4], None).unwrap();
        let solution = solve(&config, 1e-10, 10_000).unwrap();
        for mode in [ThetaMode::Arrival, ThetaMode::Stationary] {
            let eff = effective_erasures(&config, &solution, mode);
            for (e, eps) in eff.values().iter().zip(config.erasures()) {
                assert!(e >= eps);
            }
        }
    }

    #[test]
    fn arrival_occupancy_renormalizes_over_non_full_states() {
        let theta = OccupancyPmf::new(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
        let pi = arrival_occupancy(&theta).unwrap();
        assert!((pi[0] - 1.0).abs() < 1e-12);
        assert_eq!(pi[1], 0.0);

        let uniform = OccupancyPmf::new(vec![0.25; 4]).unwrap();
        let pi = arrival_occupancy(&uniform).unwrap();
        for &mass in &pi[..3] {
            assert!((mass - 1.0 / 3.0).abs() < 1e-12);
        }
        assert_eq!(pi[3], 0.0);

        let empty = OccupancyPmf::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(arrival_occupancy(&empty).unwrap(), vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn arrival_occupancy_rejects_permanently_full_node() {
        let stuck = OccupancyPmf::new(vec![0.0, 1.0]).unwrap();
        assert!(matches!(
            arrival_occupancy(&stuck),
            Err(Error::NodePermanentlyFull)
        ));
    }

    #[test]
    fn node_delay_of_always_empty_node_is_one_service() {
        let (config, solution) = two_hop_solution();
        // Arrival mode: pi = (1, 0), service prob 1 - eps_2 = 0.5.
        let d = node_delay(&config, &solution, 1, 1e-12, ThetaMode::Arrival).unwrap();
        let g = geometric(0.5, 1e-12).unwrap();
        assert_eq!(d.min_support(), 1);
        for t in 1..=10 {
            assert!((d.mass_at(t) - g.mass_at(t)).abs() < 1e-10);
        }
        assert!((d.mean() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn node_delay_mean_is_mixture_mean() {
        let config = NetworkConfig::new(vec![0.25; 4], vec![3, 3, 3], None).unwrap();
        let solution = solve(&config, 1e-12, 10_000).unwrap();
        for node in 1..=3 {
            let mode = ThetaMode::Arrival;
            let d = node_delay(&config, &solution, node, 1e-12, mode).unwrap();
            let eff = effective_erasures(&config, &solution, mode);
            let pi = arrival_occupancy(&theta(&config, &solution, node, mode)).unwrap();
            let expect: f64 = pi
                .iter()
                .enumerate()
                .map(|(i, w)| w * (i as f64 + 1.0) / (1.0 - eff.link(node + 1)))
                .sum();
            assert!((d.mean() - expect).abs() < 1e-6, "node {node}");
        }
    }

    #[test]
    fn lossless_pipeline_delay_is_point_mass_at_hops() {
        for h in [2usize, 3, 5, 8] {
            let config = NetworkConfig::uniform(h, 0.0, 3).unwrap();
            let solution = solve(&config, 1e-12, 1000).unwrap();
            let d = total_delay(&config, &solution, 1e-9, ThetaMode::Arrival).unwrap();
            assert_eq!(d.min_support(), h as u64);
            assert!((d.mass_at(h as u64) - 1.0).abs() < 1e-12, "h={h}");
            assert_eq!(d.tail_mass(), 0.0);
        }
    }

    #[test]
    fn two_hop_mean_delay_both_modes() {
        let (config, solution) = two_hop_solution();
        // Stationary mode reproduces the worked value 1/(1 - 5/6) + 2 = 8.
        let d = total_delay(&config, &solution, 1e-12, ThetaMode::Stationary).unwrap();
        assert!((d.mean() - 8.0).abs() < 1e-6);
        // Arrival mode: entry stage mean 3, one service stage mean 2.
        let d = total_delay(&config, &solution, 1e-12, ThetaMode::Arrival).unwrap();
        assert!((d.mean() - 5.0).abs() < 1e-6);
    }

    #[test]
    fn total_delay_mean_is_sum_of_stage_means() {
        let config = NetworkConfig::new(vec![0.25; 5], vec![2, 4, 3, 2], None).unwrap();
        let solution = solve(&config, 1e-12, 10_000).unwrap();
        let mode = ThetaMode::Arrival;
        let eff = effective_erasures(&config, &solution, mode);
        let total = total_delay(&config, &solution, 1e-12, mode).unwrap();
        let mut expected = geometric(1.0 - eff.link(1), 1e-12).unwrap().mean();
        for node in 1..5 {
            expected += node_delay(&config, &solution, node, 1e-12, mode).unwrap().mean();
        }
        assert!((total.mean() - expected).abs() < 1e-9 + 1e-6 * expected);
    }

    #[test]
    fn severed_link_delay_is_undefined() {
        let config = NetworkConfig::new(vec![0.5, 1.0, 0.5], vec![2, 2], None).unwrap();
        let solution = solve(&config, 1e-10, 1000).unwrap();
        assert!(matches!(
            total_delay(&config, &solution, 1e-9, ThetaMode::Arrival),
            Err(Error::ZeroThroughput)
        ));
    }

    #[test]
    fn summary_quantiles_are_ordered() {
        let (config, solution) = two_hop_solution();
        let d = total_delay(&config, &solution, 1e-9, ThetaMode::Arrival).unwrap();
        let s = summarize(&d);
        assert!(s.p50 <= s.p90 && s.p90 <= s.p99);
        assert!(s.mean > 0.0 && s.variance > 0.0);
    }
}
