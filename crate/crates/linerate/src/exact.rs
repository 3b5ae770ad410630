//! Exact joint Markov chain over all buffer states.
//!
//! The chain enumerates every erasure pattern per state, so it is only
//! feasible for small networks; within that range it is the ground truth the
//! approximate solver and the simulator are checked against.

use std::io::Write;

use serde::Serialize;

use crate::approx::OccupancyPmf;
use crate::error::{Error, Result};
use crate::model::{JointState, NetworkConfig};

/// Default cap on the joint state count for matrix construction.
pub const DEFAULT_STATE_CAP: usize = 1 << 20;

/// States at or below this size use a dense linear solve; larger chains use
/// damped power iteration.
const DENSE_SOLVE_MAX: usize = 2000;
const POWER_RESIDUAL: f64 = 1e-12;
const POWER_MAX_ITERATIONS: u64 = 500_000;

/// Outcome of one epoch on every link: `true` when the packet survives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ErasurePattern {
    outcomes: Vec<bool>,
}

impl ErasurePattern {
    pub fn new(outcomes: Vec<bool>) -> Self {
        ErasurePattern { outcomes }
    }

    /// Pattern from the low `hops` bits of `bits`; bit `i-1` is link `i`.
    pub fn from_bits(bits: u32, hops: usize) -> Self {
        ErasurePattern {
            outcomes: (0..hops).map(|i| bits >> i & 1 == 1).collect(),
        }
    }

    pub fn outcomes(&self) -> &[bool] {
        &self.outcomes
    }
}

/// Which links actually move a packet this epoch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferVector {
    transfers: Vec<bool>,
}

impl TransferVector {
    pub fn transfers(&self) -> &[bool] {
        &self.transfers
    }
}

/// Resolves the per-epoch transfers backward from the destination.
///
/// A packet crosses link `i` only when the sender is nonempty (the source
/// always is), the link does not erase it, and the receiver has space after
/// its own same-epoch departure. Index `i-1` of the result is link `i`.
pub fn transfer_vector(
    config: &NetworkConfig,
    state: &JointState,
    pattern: &ErasurePattern,
) -> TransferVector {
    let h = config.hops();
    let mut transfers = vec![false; h];
    transfer_into(
        config.buffers(),
        state.occupancies(),
        pattern.outcomes(),
        &mut transfers,
    );
    let _ = h;
    TransferVector { transfers }
}

/// Core recursion shared by the public wrapper and the matrix builder.
fn transfer_into(buffers: &[u32], occupancies: &[u32], survive: &[bool], out: &mut [bool]) {
    let h = survive.len();
    out[h - 1] = occupancies[h - 2] > 0 && survive[h - 1];
    for idx in (0..h - 1).rev() {
        let sender_nonempty = idx == 0 || occupancies[idx - 1] > 0;
        let incoming = if out[idx + 1] { 1 } else { 0 };
        let space = buffers[idx] - occupancies[idx] + incoming > 0;
        out[idx] = sender_nonempty && survive[idx] && space;
    }
}

/// Applies a transfer vector: `n_i' = n_i + Y_i - Y_{i+1}`.
///
/// Panics if the result leaves the state space, which would mean the
/// transfer vector was not generated from this state.
pub fn next_state(
    config: &NetworkConfig,
    state: &JointState,
    transfer: &TransferVector,
) -> JointState {
    let y = transfer.transfers();
    let occupancies: Vec<u32> = state
        .occupancies()
        .iter()
        .enumerate()
        .map(|(j, &n)| {
            let next = i64::from(n) + i64::from(y[j]) - i64::from(y[j + 1]);
            assert!(
                next >= 0 && next <= i64::from(config.buffers()[j]),
                "transfer vector drives node v{} out of bounds",
                j + 1
            );
            next as u32
        })
        .collect();
    JointState::new(config, occupancies).expect("bounds already checked")
}

/// Mixed-radix indexing of joint states.
///
/// Digit `j` (0-based) is the occupancy of node `v_{j+1}` with radix
/// `m_{j+1} + 1`; node `v_1` is the most significant digit, so
/// `index = sum_j n_j * prod_{k > j} (m_k + 1)`.
#[derive(Debug, Clone)]
pub struct StateIndexer {
    radices: Vec<u32>,
    strides: Vec<usize>,
    count: usize,
}

impl StateIndexer {
    pub fn new(config: &NetworkConfig, cap: usize) -> Result<Self> {
        let states = config.state_count();
        if states > cap as u128 {
            return Err(Error::StateCapExceeded { states, cap });
        }
        let radices: Vec<u32> = config.buffers().iter().map(|&m| m + 1).collect();
        let mut strides = vec![1usize; radices.len()];
        for j in (0..radices.len().saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * radices[j + 1] as usize;
        }
        Ok(StateIndexer {
            radices,
            strides,
            count: states as usize,
        })
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn index(&self, occupancies: &[u32]) -> usize {
        occupancies
            .iter()
            .zip(&self.strides)
            .map(|(&n, &s)| n as usize * s)
            .sum()
    }

    pub fn decode(&self, index: usize, out: &mut [u32]) {
        let mut rest = index;
        for (j, &s) in self.strides.iter().enumerate() {
            out[j] = (rest / s) as u32;
            rest %= s;
        }
        debug_assert_eq!(rest, 0);
        let _ = &self.radices;
    }
}

/// Row-major sparse row-stochastic transition matrix.
#[derive(Debug, Clone)]
pub struct SparseTransition {
    n_states: usize,
    rows: Vec<Vec<(u32, f64)>>,
}

impl SparseTransition {
    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn row(&self, s: usize) -> &[(u32, f64)] {
        &self.rows[s]
    }

    pub fn row_sum(&self, s: usize) -> f64 {
        self.rows[s].iter().map(|&(_, p)| p).sum()
    }

    /// Coordinate-format dump, one `row col prob` line per entry.
    pub fn dump_coordinate<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (row, entries) in self.rows.iter().enumerate() {
            for &(col, p) in entries {
                writeln!(w, "{row} {col} {p:.17e}")?;
            }
        }
        Ok(())
    }
}

/// Builds the joint transition matrix by enumerating all `2^h` erasure
/// patterns from every state. Refuses when the state count exceeds `cap`.
pub fn build_transition_matrix(config: &NetworkConfig, cap: usize) -> Result<SparseTransition> {
    let indexer = StateIndexer::new(config, cap)?;
    let h = config.hops();
    let eps = config.erasures();
    let buffers = config.buffers();
    let n = indexer.count();

    let mut rows = Vec::with_capacity(n);
    let mut occupancies = vec![0u32; h - 1];
    let mut next = vec![0u32; h - 1];
    let mut survive = vec![false; h];
    let mut transfers = vec![false; h];
    let mut scratch: Vec<(u32, f64)> = Vec::with_capacity(1 << h);

    for s in 0..n {
        indexer.decode(s, &mut occupancies);
        scratch.clear();
        for bits in 0u32..1 << h {
            let mut weight = 1.0;
            for (i, flag) in survive.iter_mut().enumerate() {
                *flag = bits >> i & 1 == 1;
                weight *= if *flag { 1.0 - eps[i] } else { eps[i] };
            }
            if weight == 0.0 {
                continue;
            }
            transfer_into(buffers, &occupancies, &survive, &mut transfers);
            for j in 0..h - 1 {
                next[j] = occupancies[j] + u32::from(transfers[j]) - u32::from(transfers[j + 1]);
            }
            scratch.push((indexer.index(&next) as u32, weight));
        }
        scratch.sort_unstable_by_key(|&(col, _)| col);
        let mut row: Vec<(u32, f64)> = Vec::new();
        for &(col, p) in scratch.iter() {
            match row.last_mut() {
                Some(last) if last.0 == col => last.1 += p,
                _ => row.push((col, p)),
            }
        }
        debug_assert!((row.iter().map(|&(_, p)| p).sum::<f64>() - 1.0).abs() <= 1e-12);
        rows.push(row);
    }

    Ok(SparseTransition { n_states: n, rows })
}

/// Stationary distribution of a row-stochastic matrix.
///
/// Small chains are solved directly from the balance equations; larger ones
/// run power iteration on the lazy chain `(I + P) / 2`, which converges for
/// periodic chains too, until `||pi P - pi||_inf <= 1e-12`.
///
/// Boundary configs (some erasure 0) can make states transient; the result
/// is then the stationary distribution of the single recurrent class, with
/// zero mass on transient states. A chain with several recurrent classes
/// has no unique answer and is reported as [`Error::ReducibleChain`].
pub fn stationary(matrix: &SparseTransition) -> Result<Vec<f64>> {
    if matrix.n_states() <= DENSE_SOLVE_MAX {
        dense_stationary(matrix)
    } else {
        power_stationary(matrix)
    }
}

fn dense_stationary(matrix: &SparseTransition) -> Result<Vec<f64>> {
    let n = matrix.n_states();
    // Balance equations (P^T - I) pi = 0 with the last row replaced by the
    // normalization sum(pi) = 1.
    let mut a = vec![0.0f64; n * n];
    for row in 0..n {
        for &(col, p) in matrix.row(row) {
            a[col as usize * n + row] += p;
        }
        a[row * n + row] -= 1.0;
    }
    for col in 0..n {
        a[(n - 1) * n + col] = 1.0;
    }
    let mut b = vec![0.0f64; n];
    b[n - 1] = 1.0;

    // Gaussian elimination with partial pivoting.
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| {
                a[r1 * n + col]
                    .abs()
                    .total_cmp(&a[r2 * n + col].abs())
            })
            .unwrap();
        if a[pivot_row * n + col].abs() < 1e-13 {
            return Err(Error::ReducibleChain);
        }
        if pivot_row != col {
            for k in 0..n {
                a.swap(col * n + k, pivot_row * n + k);
            }
            b.swap(col, pivot_row);
        }
        let pivot = a[col * n + col];
        for row in col + 1..n {
            let factor = a[row * n + col] / pivot;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                a[row * n + k] -= factor * a[col * n + k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut pi = vec![0.0f64; n];
    for row in (0..n).rev() {
        let mut sum = b[row];
        for k in row + 1..n {
            sum -= a[row * n + k] * pi[k];
        }
        pi[row] = sum / a[row * n + row];
    }

    // Roundoff can leave tiny negative masses on transient states.
    for p in &mut pi {
        if *p < 0.0 {
            debug_assert!(*p > -1e-9);
            *p = 0.0;
        }
    }
    let total: f64 = pi.iter().sum();
    for p in &mut pi {
        *p /= total;
    }
    Ok(pi)
}

fn power_stationary(matrix: &SparseTransition) -> Result<Vec<f64>> {
    let n = matrix.n_states();
    let mut pi = vec![1.0 / n as f64; n];
    let mut stepped = vec![0.0f64; n];
    let mut residual = f64::INFINITY;
    for iteration in 0..POWER_MAX_ITERATIONS {
        stepped.iter_mut().for_each(|x| *x = 0.0);
        for (row, &mass) in pi.iter().enumerate() {
            if mass == 0.0 {
                continue;
            }
            for &(col, p) in matrix.row(row) {
                stepped[col as usize] += mass * p;
            }
        }
        residual = pi
            .iter()
            .zip(&stepped)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        // Lazy-chain update keeps periodic chains converging.
        let mut total = 0.0;
        for (cur, &next) in pi.iter_mut().zip(&stepped) {
            *cur = 0.5 * *cur + 0.5 * next;
            total += *cur;
        }
        for cur in pi.iter_mut() {
            *cur /= total;
        }
        if residual <= POWER_RESIDUAL {
            return Ok(pi);
        }
        let _ = iteration;
    }
    Err(Error::NonConvergence {
        context: "stationary power iteration".into(),
        iterations: POWER_MAX_ITERATIONS,
        residual,
    })
}

/// Exact delivery rate: probability that the last relay is nonempty times
/// the survival probability of the last link.
pub fn exact_throughput(config: &NetworkConfig, stationary: &[f64]) -> f64 {
    let h = config.hops();
    let last_radix = config.buffers()[h - 2] as usize + 1;
    let nonempty_last: f64 = stationary
        .iter()
        .enumerate()
        .filter(|(s, _)| s % last_radix != 0)
        .map(|(_, &p)| p)
        .sum();
    nonempty_last * (1.0 - config.erasures()[h - 1])
}

/// Full exact-chain result for small networks.
#[derive(Debug, Clone, Serialize)]
pub struct ExactChainResult {
    pub state_count: usize,
    pub throughput: f64,
    pub marginals: Vec<OccupancyPmf>,
    #[serde(skip)]
    pub stationary: Vec<f64>,
}

/// Builds the chain, solves for its stationary distribution and summarizes.
pub fn solve_exact(config: &NetworkConfig, cap: usize) -> Result<ExactChainResult> {
    let matrix = build_transition_matrix(config, cap)?;
    let pi = stationary(&matrix)?;
    let indexer = StateIndexer::new(config, cap)?;
    let throughput = exact_throughput(config, &pi);

    let mut marginals: Vec<Vec<f64>> = config
        .buffers()
        .iter()
        .map(|&m| vec![0.0; m as usize + 1])
        .collect();
    let mut occupancies = vec![0u32; config.hops() - 1];
    for (s, &p) in pi.iter().enumerate() {
        indexer.decode(s, &mut occupancies);
        for (j, &n) in occupancies.iter().enumerate() {
            marginals[j][n as usize] += p;
        }
    }
    let marginals = marginals
        .into_iter()
        .map(|mut masses| {
            let total: f64 = masses.iter().sum();
            masses.iter_mut().for_each(|p| *p /= total);
            OccupancyPmf::from_normalized(masses)
        })
        .collect();

    Ok(ExactChainResult {
        state_count: pi.len(),
        throughput,
        marginals,
        stationary: pi,
    })
}
