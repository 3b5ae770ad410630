//! Finite, tail-truncated probability mass functions over integer epochs.
//!
//! Delay distributions are built from geometric service stages, combined by
//! convolution and mixtures. Every PMF records the probability mass cut off
//! by truncation so normalization stays auditable end to end.

use serde::Serialize;

use crate::error::{Error, Result};

/// Default truncation budget for elementary PMFs.
pub const DEFAULT_TAIL_BUDGET: f64 = 1e-9;

/// Hard cap on the support length of a single PMF; budgets that would need
/// more entries produce an error instead of an unbounded allocation.
pub const MAX_SUPPORT: usize = 4_000_000;

/// PMF over `min_support, min_support + 1, ...` with an explicit truncated
/// tail, so `sum(masses) + tail_mass = 1` up to float error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscretePmf {
    min_support: u64,
    masses: Vec<f64>,
    tail_mass: f64,
}

impl DiscretePmf {
    /// Point mass at `value` (tail 0).
    pub fn point_mass(value: u64) -> Self {
        DiscretePmf {
            min_support: value,
            masses: vec![1.0],
            tail_mass: 0.0,
        }
    }

    pub fn min_support(&self) -> u64 {
        self.min_support
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn tail_mass(&self) -> f64 {
        self.tail_mass
    }

    /// Mass at the integer `value`.
    pub fn mass_at(&self, value: u64) -> f64 {
        if value < self.min_support {
            return 0.0;
        }
        self.masses
            .get((value - self.min_support) as usize)
            .copied()
            .unwrap_or(0.0)
    }

    pub fn mass_sum(&self) -> f64 {
        kahan_sum(self.masses.iter().copied())
    }

    /// Mean over the retained support (the truncated tail is ignored).
    pub fn mean(&self) -> f64 {
        self.masses
            .iter()
            .enumerate()
            .map(|(i, &p)| (self.min_support + i as u64) as f64 * p)
            .sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let second: f64 = self
            .masses
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let v = (self.min_support + i as u64) as f64;
                v * v * p
            })
            .sum();
        (second - mean * mean).max(0.0)
    }

    /// Smallest value whose CDF reaches `q`. Quantiles beyond the retained
    /// mass saturate at the last support point.
    pub fn quantile(&self, q: f64) -> u64 {
        let mut cum = 0.0;
        for (i, &p) in self.masses.iter().enumerate() {
            cum += p;
            if cum >= q {
                return self.min_support + i as u64;
            }
        }
        self.min_support + self.masses.len().saturating_sub(1) as u64
    }

    /// Full discrete convolution; supports add, truncated tails accumulate
    /// via the union upper bound `ta + tb - ta*tb`.
    pub fn convolve(&self, other: &DiscretePmf) -> DiscretePmf {
        let mut masses = vec![0.0f64; self.masses.len() + other.masses.len() - 1];
        for (i, &a) in self.masses.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (j, &b) in other.masses.iter().enumerate() {
                masses[i + j] += a * b;
            }
        }
        DiscretePmf {
            min_support: self.min_support + other.min_support,
            masses,
            tail_mass: self.tail_mass + other.tail_mass - self.tail_mass * other.tail_mass,
        }
    }

    /// Weighted mixture of PMFs; weights must sum to 1.
    pub fn mixture(components: &[(f64, DiscretePmf)]) -> Result<DiscretePmf> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("empty mixture".into()));
        }
        debug_assert!(
            (components.iter().map(|&(w, _)| w).sum::<f64>() - 1.0).abs() < 1e-9,
            "mixture weights must sum to 1"
        );
        let min_support = components
            .iter()
            .map(|(_, pmf)| pmf.min_support)
            .min()
            .unwrap();
        let end = components
            .iter()
            .map(|(_, pmf)| pmf.min_support + pmf.masses.len() as u64)
            .max()
            .unwrap();
        let mut masses = vec![0.0f64; (end - min_support) as usize];
        let mut tail_mass = 0.0;
        for (weight, pmf) in components {
            let offset = (pmf.min_support - min_support) as usize;
            for (i, &p) in pmf.masses.iter().enumerate() {
                masses[offset + i] += weight * p;
            }
            tail_mass += weight * pmf.tail_mass;
        }
        Ok(DiscretePmf {
            min_support,
            masses,
            tail_mass,
        })
    }
}

/// Geometric number of epochs until the first success: `P(k) = p (1-p)^{k-1}`
/// on `k >= 1`, truncated once the remaining tail drops below `tail_budget`.
pub fn geometric(success_prob: f64, tail_budget: f64) -> Result<DiscretePmf> {
    if success_prob == 0.0 {
        return Err(Error::InfiniteDelay);
    }
    if !(0.0..=1.0).contains(&success_prob) || success_prob.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "success probability {success_prob} out of [0, 1]"
        )));
    }
    if !(tail_budget > 0.0 && tail_budget < 1.0) {
        return Err(Error::InvalidArgument(
            "tail budget must lie in (0, 1)".into(),
        ));
    }
    if success_prob == 1.0 {
        return Ok(DiscretePmf::point_mass(1));
    }

    let failure = 1.0 - success_prob;
    let mut masses = Vec::new();
    let mut tail = 1.0; // (1-p)^len: mass strictly beyond the current support
    while tail >= tail_budget {
        if masses.len() == MAX_SUPPORT {
            return Err(Error::TailBudgetUnreachable {
                budget: tail_budget,
                cap: MAX_SUPPORT,
            });
        }
        masses.push(success_prob * tail);
        tail *= failure;
    }
    Ok(DiscretePmf {
        min_support: 1,
        masses,
        tail_mass: tail,
    })
}

/// Sum of `k` independent geometric stages (negative binomial):
/// `P(t) = C(t-1, k-1) p^k (1-p)^{t-k}` on `t >= k`.
pub fn k_fold_geometric(k: u32, success_prob: f64, tail_budget: f64) -> Result<DiscretePmf> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if success_prob == 0.0 {
        return Err(Error::InfiniteDelay);
    }
    if !(0.0..=1.0).contains(&success_prob) || success_prob.is_nan() {
        return Err(Error::InvalidArgument(format!(
            "success probability {success_prob} out of [0, 1]"
        )));
    }
    if !(tail_budget > 0.0 && tail_budget < 1.0) {
        return Err(Error::InvalidArgument(
            "tail budget must lie in (0, 1)".into(),
        ));
    }
    if success_prob == 1.0 {
        return Ok(DiscretePmf::point_mass(u64::from(k)));
    }

    let failure = 1.0 - success_prob;
    let k64 = f64::from(k);
    // Successive-ratio recurrence: P(t+1)/P(t) = (1-p) * t / (t - k + 1).
    // Runs in log space until the mass becomes representable, so large k
    // with small p cannot underflow to a stuck zero.
    let mut log_mass = k64 * success_prob.ln();
    let log_failure = failure.ln();
    let mut masses = Vec::new();
    let mut cum = KahanSum::default();
    let mut t = u64::from(k);
    loop {
        if masses.len() == MAX_SUPPORT {
            return Err(Error::TailBudgetUnreachable {
                budget: tail_budget,
                cap: MAX_SUPPORT,
            });
        }
        let mass = log_mass.exp();
        masses.push(mass);
        cum.add(mass);
        let tail = 1.0 - cum.value();
        if tail < tail_budget {
            return Ok(DiscretePmf {
                min_support: u64::from(k),
                masses,
                tail_mass: tail.max(0.0),
            });
        }
        log_mass += log_failure + (t as f64).ln() - (t as f64 - k64 + 1.0).ln();
        t += 1;
    }
}

#[derive(Default)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::default();
    for v in values {
        acc.add(v);
    }
    acc.value()
}
