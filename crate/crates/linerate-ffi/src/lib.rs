//! C ABI for the line-network analyzer.
//!
//! Every object crosses the boundary as an opaque handle created and freed
//! here; every function returns a [`LinerateStatus`] and writes results
//! through out-pointers. The most recent error message of the calling
//! thread is available via [`linerate_last_error_message`].
//!
//! The matching header `include/linerate.h` is generated by cbindgen at
//! build time.

#![deny(unsafe_op_in_unsafe_fn)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use linerate::approx::{self, ApproxSolution};
use linerate::delay;
use linerate::error::Error;
use linerate::exact;
use linerate::model::NetworkConfig;
use linerate::pmf::DiscretePmf;
use linerate::sim::{self, SimReport};

/// Status code of every FFI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinerateStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Invalid configuration, settings or argument.
    InvalidArgument = 2,
    /// An iteration failed to converge.
    NonConvergence = 3,
    /// The request is structurally infeasible (state cap, zero throughput,
    /// permanently full node, unreachable tail budget).
    Infeasible = 4,
    /// The destination buffer is too small; the required length has been
    /// written to the length out-parameter.
    BufferTooSmall = 5,
    /// Internal error; details via `linerate_last_error_message`.
    Internal = 6,
}

/// Occupancy convention for delay computations.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinerateThetaMode {
    /// Occupancy after the node's same-epoch departure (default).
    Arrival = 0,
    /// Raw time-stationary occupancy.
    Stationary = 1,
}

impl From<LinerateThetaMode> for delay::ThetaMode {
    fn from(mode: LinerateThetaMode) -> Self {
        match mode {
            LinerateThetaMode::Arrival => delay::ThetaMode::Arrival,
            LinerateThetaMode::Stationary => delay::ThetaMode::Stationary,
        }
    }
}

/// Opaque network description.
pub struct LinerateConfig {
    inner: NetworkConfig,
}

/// Opaque converged fixed-point solution.
pub struct LinerateSolution {
    inner: ApproxSolution,
}

/// Opaque simulation report.
pub struct LinerateSimReport {
    inner: SimReport,
}

/// Opaque delay distribution.
pub struct LineratePmf {
    inner: DiscretePmf,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap();
    });
}

fn status_of(err: &Error) -> LinerateStatus {
    match err {
        Error::InvalidConfig(_) | Error::InvalidSettings(_) | Error::InvalidArgument(_) => {
            LinerateStatus::InvalidArgument
        }
        Error::NonConvergence { .. } | Error::FlowConservation { .. } => {
            LinerateStatus::NonConvergence
        }
        Error::StateCapExceeded { .. }
        | Error::ReducibleChain
        | Error::InfiniteDelay
        | Error::NodePermanentlyFull
        | Error::ZeroThroughput
        | Error::TailBudgetUnreachable { .. } => LinerateStatus::Infeasible,
    }
}

fn fail(err: Error) -> LinerateStatus {
    let status = status_of(&err);
    set_error(&err.to_string());
    status
}

/// Runs `body` with panics converted to `Internal` instead of unwinding
/// across the C boundary.
fn guarded(body: impl FnOnce() -> LinerateStatus) -> LinerateStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            LinerateStatus::Internal
        }
    }
}

macro_rules! deref {
    ($ptr:expr) => {
        match unsafe { $ptr.as_ref() } {
            Some(value) => value,
            None => {
                set_error("null handle");
                return LinerateStatus::NullPointer;
            }
        }
    };
}

macro_rules! out_ptr {
    ($ptr:expr) => {
        match unsafe { $ptr.as_mut() } {
            Some(slot) => slot,
            None => {
                set_error("null out-pointer");
                return LinerateStatus::NullPointer;
            }
        }
    };
}

/// Version string of the underlying library; static storage, do not free.
#[no_mangle]
pub extern "C" fn linerate_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Copies the calling thread's last error message (NUL terminated) into
/// `buf` and returns the full length including the terminator. When `buf`
/// is null or too small, only the required length is reported.
///
/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_last_error_message(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let msg = slot.borrow();
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && cap >= bytes.len() {
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, bytes.len());
            }
        }
        bytes.len()
    })
}

/// Builds and validates a config from `n_erasures` link erasures and
/// `n_buffers` buffer sizes.
///
/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_config_new(
    erasures: *const f64,
    n_erasures: usize,
    buffers: *const u32,
    n_buffers: usize,
    out: *mut *mut LinerateConfig,
) -> LinerateStatus {
    guarded(|| {
        let out = out_ptr!(out);
        if erasures.is_null() || buffers.is_null() {
            set_error("null input array");
            return LinerateStatus::NullPointer;
        }
        let erasures = unsafe { std::slice::from_raw_parts(erasures, n_erasures) }.to_vec();
        let buffers = unsafe { std::slice::from_raw_parts(buffers, n_buffers) }.to_vec();
        match NetworkConfig::new(erasures, buffers, None) {
            Ok(config) => {
                *out = Box::into_raw(Box::new(LinerateConfig { inner: config }));
                LinerateStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Parses the JSON document format (keys `hops`, `erasures`, `buffers`,
/// optional `packet_size_bytes`).
///
/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_config_from_json(
    json: *const c_char,
    out: *mut *mut LinerateConfig,
) -> LinerateStatus {
    guarded(|| {
        let out = out_ptr!(out);
        if json.is_null() {
            set_error("null json pointer");
            return LinerateStatus::NullPointer;
        }
        let text = match unsafe { CStr::from_ptr(json) }.to_str() {
            Ok(text) => text,
            Err(_) => {
                set_error("config json is not valid UTF-8");
                return LinerateStatus::InvalidArgument;
            }
        };
        match serde_json::from_str::<NetworkConfig>(text) {
            Ok(config) => {
                *out = Box::into_raw(Box::new(LinerateConfig { inner: config }));
                LinerateStatus::Ok
            }
            Err(err) => {
                set_error(&format!("cannot parse config: {err}"));
                LinerateStatus::InvalidArgument
            }
        }
    })
}

/// Serializes a config to its JSON document form. Two-call protocol: the
/// required length (including NUL) is always written to `*len`; the text is
/// copied only when `buf` is large enough.
///
/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_config_to_json(
    config: *const LinerateConfig,
    buf: *mut c_char,
    cap: usize,
    len: *mut usize,
) -> LinerateStatus {
    guarded(|| {
        let config = deref!(config);
        let len = out_ptr!(len);
        let json = serde_json::to_string(&config.inner).expect("config serializes");
        let bytes = json.as_bytes();
        *len = bytes.len() + 1;
        if buf.is_null() || cap < bytes.len() + 1 {
            return LinerateStatus::BufferTooSmall;
        }
        unsafe {
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, bytes.len());
            *buf.add(bytes.len()) = 0;
        }
        LinerateStatus::Ok
    })
}

/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_config_hops(
    config: *const LinerateConfig,
    out: *mut usize,
) -> LinerateStatus {
    guarded(|| {
        let config = deref!(config);
        *out_ptr!(out) = config.inner.hops();
        LinerateStatus::Ok
    })
}

/// Joint state count, saturating at `UINT64_MAX`.
///
/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_config_state_count(
    config: *const LinerateConfig,
    out: *mut u64,
) -> LinerateStatus {
    guarded(|| {
        let config = deref!(config);
        *out_ptr!(out) = u64::try_from(config.inner.state_count()).unwrap_or(u64::MAX);
        LinerateStatus::Ok
    })
}

/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_config_free(config: *mut LinerateConfig) {
    if !config.is_null() {
        drop(unsafe { Box::from_raw(config) });
    }
}

/// Runs the fixed-point solver. Pass `tolerance <= 0` or
/// `max_iterations == 0` to use the defaults (1e-10, 100000).
///
/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_solve(
    config: *const LinerateConfig,
    tolerance: f64,
    max_iterations: u64,
    out: *mut *mut LinerateSolution,
) -> LinerateStatus {
    guarded(|| {
        let config = deref!(config);
        let out = out_ptr!(out);
        let tolerance = if tolerance > 0.0 {
            tolerance
        } else {
            approx::DEFAULT_TOLERANCE
        };
        let max_iterations = if max_iterations > 0 {
            max_iterations
        } else {
            approx::DEFAULT_MAX_ITERATIONS
        };
        match approx::solve(&config.inner, tolerance, max_iterations) {
            Ok(solution) => {
                *out = Box::into_raw(Box::new(LinerateSolution { inner: solution }));
                LinerateStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_solution_capacity(
    solution: *const LinerateSolution,
    out: *mut f64,
) -> LinerateStatus {
    guarded(|| {
        let solution = deref!(solution);
        let out = out_ptr!(out);
        match approx::capacity(&solution.inner) {
            Ok(capacity) => {
                *out = capacity;
                LinerateStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_solution_iterations(
    solution: *const LinerateSolution,
    out: *mut u64,
) -> LinerateStatus {
    guarded(|| {
        let solution = deref!(solution);
        *out_ptr!(out) = solution.inner.iterations;
        LinerateStatus::Ok
    })
}

/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_solution_residual(
    solution: *const LinerateSolution,
    out: *mut f64,
) -> LinerateStatus {
    guarded(|| {
        let solution = deref!(solution);
        *out_ptr!(out) = solution.inner.residual;
        LinerateStatus::Ok
    })
}

fn copy_slice(values: &[f64], buf: *mut f64, cap: usize, len: *mut usize) -> LinerateStatus {
    let len = match unsafe { len.as_mut() } {
        Some(slot) => slot,
        None => {
            set_error("null length pointer");
            return LinerateStatus::NullPointer;
        }
    };
    *len = values.len();
    if buf.is_null() || cap < values.len() {
        return LinerateStatus::BufferTooSmall;
    }
    unsafe {
        ptr::copy_nonoverlapping(values.as_ptr(), buf, values.len());
    }
    LinerateStatus::Ok
}

/// Arrival rates r_1..r_h. Two-call protocol as in
/// [`linerate_config_to_json`].
///
/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_solution_arrival_rates(
    solution: *const LinerateSolution,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> LinerateStatus {
    guarded(|| {
        let solution = deref!(solution);
        copy_slice(&solution.inner.arrival_rates, buf, cap, len)
    })
}

/// Blocking probabilities p_b1..p_bh (the last entry is 0).
///
/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_solution_blocking_probs(
    solution: *const LinerateSolution,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> LinerateStatus {
    guarded(|| {
        let solution = deref!(solution);
        copy_slice(&solution.inner.blocking_probs, buf, cap, len)
    })
}

/// Stationary occupancy PMF of intermediate node `node` (1-based).
///
/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_solution_occupancy(
    solution: *const LinerateSolution,
    node: usize,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> LinerateStatus {
    guarded(|| {
        let solution = deref!(solution);
        let Some(pmf) = node
            .checked_sub(1)
            .and_then(|j| solution.inner.occupancies.get(j))
        else {
            set_error("node index out of range");
            return LinerateStatus::InvalidArgument;
        };
        copy_slice(pmf.masses(), buf, cap, len)
    })
}

/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_solution_free(solution: *mut LinerateSolution) {
    if !solution.is_null() {
        drop(unsafe { Box::from_raw(solution) });
    }
}

/// Exact joint-chain throughput; refuses chains larger than `state_cap`
/// states (pass 0 for the default cap of 2^20).
///
/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_exact_throughput(
    config: *const LinerateConfig,
    state_cap: usize,
    out: *mut f64,
) -> LinerateStatus {
    guarded(|| {
        let config = deref!(config);
        let out = out_ptr!(out);
        let cap = if state_cap > 0 {
            state_cap
        } else {
            exact::DEFAULT_STATE_CAP
        };
        match exact::solve_exact(&config.inner, cap) {
            Ok(result) => {
                *out = result.throughput;
                LinerateStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// Runs a seeded simulation. Pass `warmup = UINT64_MAX` for the default
/// warmup of `max(10 * total buffer, 10^4)` epochs; `replications >= 2`
/// pools independent replications.
///
/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_simulate(
    config: *const LinerateConfig,
    epochs: u64,
    warmup: u64,
    seed: u64,
    replications: u32,
    out: *mut *mut LinerateSimReport,
) -> LinerateStatus {
    guarded(|| {
        let config = deref!(config);
        let out = out_ptr!(out);
        let settings = sim::SimSettings {
            epochs,
            warmup_epochs: if warmup == u64::MAX {
                sim::default_warmup(&config.inner).min(epochs / 2)
            } else {
                warmup
            },
            seed,
            replications: replications.max(1),
        };
        let result = if settings.replications > 1 {
            sim::replicate(&config.inner, &settings)
        } else {
            sim::simulate(&config.inner, &settings)
        };
        match result {
            Ok(report) => {
                *out = Box::into_raw(Box::new(LinerateSimReport { inner: report }));
                LinerateStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_sim_report_throughput(
    report: *const LinerateSimReport,
    out: *mut f64,
) -> LinerateStatus {
    guarded(|| {
        let report = deref!(report);
        *out_ptr!(out) = report.inner.throughput;
        LinerateStatus::Ok
    })
}

/// Standard error across replications; NaN for a single replication.
///
/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_sim_report_stderr(
    report: *const LinerateSimReport,
    out: *mut f64,
) -> LinerateStatus {
    guarded(|| {
        let report = deref!(report);
        *out_ptr!(out) = report.inner.stderr_throughput.unwrap_or(f64::NAN);
        LinerateStatus::Ok
    })
}

/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_sim_report_delivered(
    report: *const LinerateSimReport,
    out: *mut u64,
) -> LinerateStatus {
    guarded(|| {
        let report = deref!(report);
        *out_ptr!(out) = report.inner.delivered;
        LinerateStatus::Ok
    })
}

/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_sim_report_mean_delay(
    report: *const LinerateSimReport,
    out: *mut f64,
) -> LinerateStatus {
    guarded(|| {
        let report = deref!(report);
        *out_ptr!(out) = report.inner.mean_delay();
        LinerateStatus::Ok
    })
}

/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_sim_report_free(report: *mut LinerateSimReport) {
    if !report.is_null() {
        drop(unsafe { Box::from_raw(report) });
    }
}

/// Analytic total-delay distribution for a solved network. Pass
/// `tail_budget <= 0` for the default 1e-9.
///
/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_total_delay(
    config: *const LinerateConfig,
    solution: *const LinerateSolution,
    tail_budget: f64,
    theta_mode: LinerateThetaMode,
    out: *mut *mut LineratePmf,
) -> LinerateStatus {
    guarded(|| {
        let config = deref!(config);
        let solution = deref!(solution);
        let out = out_ptr!(out);
        let budget = if tail_budget > 0.0 {
            tail_budget
        } else {
            linerate::pmf::DEFAULT_TAIL_BUDGET
        };
        match delay::total_delay(&config.inner, &solution.inner, budget, theta_mode.into()) {
            Ok(pmf) => {
                *out = Box::into_raw(Box::new(LineratePmf { inner: pmf }));
                LinerateStatus::Ok
            }
            Err(err) => fail(err),
        }
    })
}

/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_pmf_min_support(
    pmf: *const LineratePmf,
    out: *mut u64,
) -> LinerateStatus {
    guarded(|| {
        let pmf = deref!(pmf);
        *out_ptr!(out) = pmf.inner.min_support();
        LinerateStatus::Ok
    })
}

/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_pmf_len(pmf: *const LineratePmf, out: *mut usize) -> LinerateStatus {
    guarded(|| {
        let pmf = deref!(pmf);
        *out_ptr!(out) = pmf.inner.masses().len();
        LinerateStatus::Ok
    })
}

/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_pmf_tail_mass(
    pmf: *const LineratePmf,
    out: *mut f64,
) -> LinerateStatus {
    guarded(|| {
        let pmf = deref!(pmf);
        *out_ptr!(out) = pmf.inner.tail_mass();
        LinerateStatus::Ok
    })
}

/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_pmf_mean(pmf: *const LineratePmf, out: *mut f64) -> LinerateStatus {
    guarded(|| {
        let pmf = deref!(pmf);
        *out_ptr!(out) = pmf.inner.mean();
        LinerateStatus::Ok
    })
}

/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_pmf_variance(
    pmf: *const LineratePmf,
    out: *mut f64,
) -> LinerateStatus {
    guarded(|| {
        let pmf = deref!(pmf);
        *out_ptr!(out) = pmf.inner.variance();
        LinerateStatus::Ok
    })
}

/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_pmf_quantile(
    pmf: *const LineratePmf,
    q: f64,
    out: *mut u64,
) -> LinerateStatus {
    guarded(|| {
        let pmf = deref!(pmf);
        let out = out_ptr!(out);
        if !(0.0..=1.0).contains(&q) {
            set_error("quantile must lie in [0, 1]");
            return LinerateStatus::InvalidArgument;
        }
        *out = pmf.inner.quantile(q);
        LinerateStatus::Ok
    })
}

/// Probability masses over `min_support..`. Two-call protocol.
///
/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_pmf_masses(
    pmf: *const LineratePmf,
    buf: *mut f64,
    cap: usize,
    len: *mut usize,
) -> LinerateStatus {
    guarded(|| {
        let pmf = deref!(pmf);
        copy_slice(pmf.inner.masses(), buf, cap, len)
    })
}

/// # Safety
/// Pointer arguments must be valid for their access or null (nulls are
/// rejected with a status code); handles must have been created by this
/// library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn linerate_pmf_free(pmf: *mut LineratePmf) {
    if !pmf.is_null() {
        drop(unsafe { Box::from_raw(pmf) });
    }
}
