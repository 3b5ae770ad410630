//! Throughput, buffer occupancy, blocking and packet-delay analysis for
//! finite-buffer line networks with erasure links.
//!
//! A line network carries one flow across `h` lossy links separated by
//! bounded FIFO buffers. Exact analysis means solving a Markov chain over
//! the joint buffer state, which grows as the product of the buffer sizes;
//! [`exact`] does that for small networks and acts as the ground truth.
//! [`approx`] instead decouples the chain into one birth-death chain per
//! node, coupled through arrival rates and blocking probabilities, and
//! iterates the pair of sweep equations to a fixed point: accurate at a
//! tiny fraction of the cost, at any hop count and buffer size.
//!
//! On top of the fixed point, [`delay`] builds the end-to-end packet delay
//! distribution by convolving per-hop negative-binomial service stages,
//! [`sim`] provides a seeded packet-level Monte Carlo reference, and
//! [`planner`] classifies nodes by congestion and allocates buffer memory
//! where it buys throughput.
//!
//! ```
//! use linerate::{approx, NetworkConfig};
//!
//! let config = NetworkConfig::new(vec![0.5, 0.5], vec![1], None).unwrap();
//! let solution = approx::solve(&config, 1e-10, 10_000).unwrap();
//! assert!((solution.capacity - 1.0 / 3.0).abs() < 1e-9);
//! ```

pub mod approx;
pub mod delay;
pub mod error;
pub mod exact;
pub mod model;
pub mod planner;
pub mod pmf;
pub mod sim;

pub use error::{Error, Result};
pub use model::{JointState, NetworkConfig};
