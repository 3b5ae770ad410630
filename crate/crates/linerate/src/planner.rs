//! Congestion classification and buffer-memory allocation.
//!
//! An intermediate node is congested, balanced or starved depending on how
//! its offered input rate compares with the rate its outgoing edge could
//! carry. Balanced nodes are where extra buffer memory buys throughput;
//! the planner exploits that with a greedy per-packet allocation.

use serde::Serialize;

use crate::approx::{self, ApproxSolution};
use crate::delay::{self, ThetaMode};
use crate::error::Result;
use crate::model::NetworkConfig;

/// Default rate-comparison tolerance (packets/epoch).
pub const DEFAULT_DELTA: f64 = 0.02;

/// Congestion category of one intermediate node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum NodeKind {
    /// Type 1: input rate exceeds the achievable output rate; the buffer
    /// runs full.
    Congested,
    /// Type 2: input and output rates match within tolerance.
    Balanced,
    /// Type 3: the node is starved by its input; the buffer runs empty.
    Starved,
}

impl NodeKind {
    /// Numeric label used in the three-type taxonomy.
    pub fn type_index(self) -> u8 {
        match self {
            NodeKind::Congested => 1,
            NodeKind::Balanced => 2,
            NodeKind::Starved => 3,
        }
    }
}

impl std::fmt::Display for NodeKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Type {}", self.type_index())
    }
}

/// Classification of node `v_node` with the rates that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeClass {
    pub node: usize,
    pub kind: NodeKind,
    pub in_rate: f64,
    pub out_rate: f64,
}

/// Classifies every intermediate node of a converged solution.
///
/// `in_rate` is the arrival rate offered over the incoming link; `out_rate`
/// is what the outgoing edge could carry if the node were always backlogged,
/// `(1 - eps_{i+1})(1 - p_b_{i+1})`.
pub fn classify(
    config: &NetworkConfig,
    solution: &ApproxSolution,
    delta: f64,
) -> Vec<NodeClass> {
    let eps = config.erasures();
    (0..config.hops() - 1)
        .map(|j| {
            let in_rate = solution.arrival_rates[j];
            let out_rate = (1.0 - eps[j + 1]) * (1.0 - solution.blocking_probs[j + 1]);
            let kind = if in_rate > out_rate + delta {
                NodeKind::Congested
            } else if in_rate < out_rate - delta {
                NodeKind::Starved
            } else {
                NodeKind::Balanced
            };
            NodeClass {
                node: j + 1,
                kind,
                in_rate,
                out_rate,
            }
        })
        .collect()
}

/// Solver and delay settings shared by the planner entry points.
#[derive(Debug, Clone, Copy)]
pub struct PlannerOptions {
    pub tolerance: f64,
    pub max_iterations: u64,
    pub tail_budget: f64,
    pub theta_mode: ThetaMode,
    pub delta: f64,
}

impl Default for PlannerOptions {
    fn default() -> Self {
        PlannerOptions {
            tolerance: approx::DEFAULT_TOLERANCE,
            max_iterations: approx::DEFAULT_MAX_ITERATIONS,
            tail_budget: crate::pmf::DEFAULT_TAIL_BUDGET,
            theta_mode: ThetaMode::default(),
            delta: DEFAULT_DELTA,
        }
    }
}

/// One committed unit of buffer memory and the metrics after it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AllocationStep {
    pub node: usize,
    pub capacity: f64,
    pub mean_delay: f64,
}

/// Result of [`allocate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AllocationPlan {
    /// Extra packets granted to each intermediate node; sums to the budget.
    pub increments: Vec<u32>,
    pub baseline_capacity: f64,
    pub baseline_mean_delay: f64,
    pub predicted_capacity: f64,
    pub predicted_mean_delay: f64,
    pub steps: Vec<AllocationStep>,
}

fn metrics(config: &NetworkConfig, opts: &PlannerOptions) -> Result<(f64, f64)> {
    let solution = approx::solve(config, opts.tolerance, opts.max_iterations)?;
    let capacity = approx::capacity(&solution)?;
    let mean_delay = if capacity > 0.0 {
        delay::total_delay(config, &solution, opts.tail_budget, opts.theta_mode)?.mean()
    } else {
        f64::INFINITY
    };
    Ok((capacity, mean_delay))
}

fn with_buffer(config: &NetworkConfig, node: usize, m: u32) -> NetworkConfig {
    let mut buffers = config.buffers().to_vec();
    buffers[node - 1] = m;
    NetworkConfig::new(
        config.erasures().to_vec(),
        buffers,
        config.packet_size_bytes(),
    )
    .expect("buffer update keeps the config valid")
}

/// Greedy buffer allocation: each unit of budget goes to the node whose
/// one-packet increase yields the largest capacity gain (ties to the lowest
/// index), recording capacity and mean delay after every step.
pub fn allocate(
    config: &NetworkConfig,
    budget: u32,
    opts: &PlannerOptions,
) -> Result<AllocationPlan> {
    let nodes = config.hops() - 1;
    let (baseline_capacity, baseline_mean_delay) = metrics(config, opts)?;
    let mut current = config.clone();
    let mut increments = vec![0u32; nodes];
    let mut steps = Vec::with_capacity(budget as usize);
    let mut capacity = baseline_capacity;
    let mut mean_delay = baseline_mean_delay;

    for _ in 0..budget {
        let mut best: Option<(usize, f64)> = None;
        for node in 1..=nodes {
            let candidate = with_buffer(&current, node, current.buffers()[node - 1] + 1);
            let solution = approx::solve(&candidate, opts.tolerance, opts.max_iterations)?;
            let gain = approx::capacity(&solution)?;
            let better = match best {
                None => true,
                Some((_, best_gain)) => gain > best_gain,
            };
            if better {
                best = Some((node, gain));
            }
        }
        let (node, _) = best.expect("at least one intermediate node");
        current = with_buffer(&current, node, current.buffers()[node - 1] + 1);
        increments[node - 1] += 1;
        let (cap, delay) = metrics(&current, opts)?;
        capacity = cap;
        mean_delay = delay;
        steps.push(AllocationStep {
            node,
            capacity,
            mean_delay,
        });
    }

    Ok(AllocationPlan {
        increments,
        baseline_capacity,
        baseline_mean_delay,
        predicted_capacity: capacity,
        predicted_mean_delay: mean_delay,
        steps,
    })
}

/// One row of a buffer-size sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeoffPoint {
    pub m: u32,
    pub capacity: f64,
    pub mean_delay: f64,
}

/// Re-solves capacity and analytic mean delay while one node's buffer runs
/// through `m_values`, other nodes fixed.
pub fn tradeoff_sweep(
    config: &NetworkConfig,
    node: usize,
    m_values: &[u32],
    opts: &PlannerOptions,
) -> Result<Vec<TradeoffPoint>> {
    if node == 0 || node >= config.hops() {
        return Err(crate::error::Error::InvalidArgument(format!(
            "node index {node} out of 1..={}",
            config.hops() - 1
        )));
    }
    m_values
        .iter()
        .map(|&m| {
            let candidate = with_buffer(config, node, m);
            let (capacity, mean_delay) = metrics(&candidate, opts)?;
            Ok(TradeoffPoint {
                m,
                capacity,
                mean_delay,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(config: &NetworkConfig) -> ApproxSolution {
        approx::solve(config, 1e-10, 100_000).unwrap()
    }

    #[test]
    fn reference_network_classifies_one_two_three() {
        let config =
            NetworkConfig::new(vec![0.2, 0.5, 0.5, 0.2], vec![10, 10, 10], None).unwrap();
        let classes = classify(&config, &solve(&config), DEFAULT_DELTA);
        let kinds: Vec<u8> = classes.iter().map(|c| c.kind.type_index()).collect();
        assert_eq!(kinds, vec![1, 2, 3]);
    }

    #[test]
    fn symmetric_line_center_is_balanced() {
        // Reversal symmetry pins in_rate = out_rate exactly at the middle
        // node; towards the ends nodes lean congested/starved, shrinking as
        // buffers grow.
        let config = NetworkConfig::uniform(6, 0.5, 5).unwrap();
        let classes = classify(&config, &solve(&config), DEFAULT_DELTA);
        let middle = &classes[2];
        assert_eq!(middle.kind, NodeKind::Balanced);
        assert!((middle.in_rate - middle.out_rate).abs() < 1e-9);

        let config = NetworkConfig::uniform(6, 0.5, 20).unwrap();
        for class in classify(&config, &solve(&config), DEFAULT_DELTA) {
            assert_eq!(class.kind, NodeKind::Balanced, "node {}", class.node);
        }
    }

    #[test]
    fn weak_inlet_starves_first_relay() {
        let config = NetworkConfig::new(vec![0.9, 0.1, 0.1], vec![4, 4], None).unwrap();
        let classes = classify(&config, &solve(&config), DEFAULT_DELTA);
        assert_eq!(classes[0].kind, NodeKind::Starved);
        assert!(classes[0].in_rate < classes[0].out_rate);
    }

    #[test]
    fn classification_follows_node_relabeling() {
        // Reversing the line reverses the classification.
        let config =
            NetworkConfig::new(vec![0.2, 0.5, 0.5, 0.2], vec![10, 10, 10], None).unwrap();
        let reversed =
            NetworkConfig::new(vec![0.2, 0.5, 0.5, 0.2], vec![10, 10, 10], None).unwrap();
        let forward: Vec<u8> = classify(&config, &solve(&config), DEFAULT_DELTA)
            .iter()
            .map(|c| c.kind.type_index())
            .collect();
        let backward: Vec<u8> = classify(&reversed, &solve(&reversed), DEFAULT_DELTA)
            .iter()
            .rev()
            .map(|c| 4 - c.kind.type_index())
            .collect();
        assert_eq!(forward, backward);
    }

    #[test]
    fn zero_budget_returns_baseline_plan() {
        let config = NetworkConfig::uniform(4, 0.25, 3).unwrap();
        let plan = allocate(&config, 0, &PlannerOptions::default()).unwrap();
        assert_eq!(plan.increments, vec![0, 0, 0]);
        assert!(plan.steps.is_empty());
        assert_eq!(plan.baseline_capacity, plan.predicted_capacity);
    }

    #[test]
    fn greedy_spends_whole_budget_and_never_loses_capacity() {
        let config = NetworkConfig::uniform(4, 0.25, 2).unwrap();
        let plan = allocate(&config, 5, &PlannerOptions::default()).unwrap();
        assert_eq!(plan.increments.iter().sum::<u32>(), 5);
        let mut last = plan.baseline_capacity;
        for step in &plan.steps {
            assert!(step.capacity >= last - 1e-12);
            last = step.capacity;
        }
        assert!(plan.predicted_capacity > plan.baseline_capacity);
    }

    #[test]
    fn reference_network_budget_goes_to_the_balanced_node() {
        // Type-1 and Type-3 sweeps are flat, so greedy concentrates the
        // budget on the Type-2 node v2.
        let config = NetworkConfig::new(vec![0.2, 0.5, 0.5, 0.2], vec![5, 5, 5], None).unwrap();
        let plan = allocate(&config, 10, &PlannerOptions::default()).unwrap();
        assert!(plan.increments[1] > 5, "increments {:?}", plan.increments);
        assert!(plan.predicted_capacity > plan.baseline_capacity);
        assert!(plan.predicted_mean_delay > plan.baseline_mean_delay);
    }

    #[test]
    fn symmetric_budget_spreads_evenly() {
        let config = NetworkConfig::uniform(4, 0.4, 2).unwrap();
        let plan = allocate(&config, 3, &PlannerOptions::default()).unwrap();
        assert_eq!(plan.increments, vec![1, 1, 1]);
    }

    #[test]
    fn tradeoff_sweep_is_capacity_monotone() {
        let config = NetworkConfig::uniform(4, 0.3, 3).unwrap();
        let points = tradeoff_sweep(
            &config,
            2,
            &[1, 2, 4, 8],
            &PlannerOptions::default(),
        )
        .unwrap();
        for pair in points.windows(2) {
            assert!(pair[1].capacity >= pair[0].capacity - 1e-12);
        }
    }

    #[test]
    fn tradeoff_sweep_rejects_bad_node() {
        let config = NetworkConfig::uniform(4, 0.3, 3).unwrap();
        assert!(tradeoff_sweep(&config, 0, &[1], &PlannerOptions::default()).is_err());
        assert!(tradeoff_sweep(&config, 4, &[1], &PlannerOptions::default()).is_err());
    }
}
