//! C ABI for collapselab.
//!
//! Conventions:
//! - Every fallible call returns a [`ClabStatus`]; outputs go through
//!   pointers that must be non-null and correctly sized.
//! - `clab_last_error_message` returns a thread-local, NUL-terminated
//!   description of the most recent failure on this thread.
//! - Networks are opaque handles created by `clab_network_from_json` or
//!   `clab_network_reference` and released with `clab_network_free`.
//! - Panics never cross the boundary; they surface as `CLAB_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use num_traits::ToPrimitive;

use collapselab::collapse::{classify_state, default_tolerance, CollapseKind, Grid};
use collapselab::error::Error;
use collapselab::exact;
use collapselab::init::{BiasMode, InitializerSpec, Scheme};
use collapselab::mc;
use collapselab::net::{ActivationKind, Architecture, Network, NetworkDocument};
use collapselab::targets::TargetId;
use collapselab::train::LossKind;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Unsupported = 3,
    NumericalFailure = 4,
    ParseError = 5,
    IoError = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Weight-initialization scheme selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClabScheme {
    HeNormal = 0,
    LecunNormal = 1,
    GlorotUniform = 2,
    SymmetricUniform = 3,
    Rademacher = 4,
    Orthogonal = 5,
    Lsuv = 6,
}

/// Elementwise activation selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClabActivation {
    Relu = 0,
    Selu = 1,
    Identity = 2,
}

/// Built-in analytic target selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClabTarget {
    Abs1d = 0,
    Xsin5x = 1,
    Stepsin = 2,
    Abs2d = 3,
}

/// Loss selector.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClabLoss {
    Mse = 0,
    Mae = 1,
}

/// Collapse classification outcome.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClabCollapseKind {
    Fitted = 0,
    FullCollapse = 1,
    PartialCollapse = 2,
    Other = 3,
}

/// A Monte Carlo estimate with its 95% confidence interval.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct ClabEstimate {
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: u64,
    pub seed: u64,
}

/// Opaque handle to an immutable network.
pub struct ClabNetwork(Network);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> ClabStatus {
    match err {
        Error::Shape(_) | Error::InvalidArgument(_) => ClabStatus::InvalidArgument,
        Error::Unsupported(_) => ClabStatus::Unsupported,
        Error::Numerical(_) => ClabStatus::NumericalFailure,
        Error::Io(_) => ClabStatus::IoError,
        Error::Json(_) => ClabStatus::ParseError,
    }
}

fn guard(f: impl FnOnce() -> ClabStatus) -> ClabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic across the C boundary".to_string());
            set_error(&msg);
            ClabStatus::Panic
        }
    }
}

fn fail(err: Error) -> ClabStatus {
    let status = status_of(&err);
    set_error(&err.to_string());
    status
}

impl ClabScheme {
    fn to_scheme(self) -> Scheme {
        match self {
            ClabScheme::HeNormal => Scheme::HeNormal,
            ClabScheme::LecunNormal => Scheme::LecunNormal,
            ClabScheme::GlorotUniform => Scheme::GlorotUniform,
            ClabScheme::SymmetricUniform => Scheme::SymmetricUniform,
            ClabScheme::Rademacher => Scheme::Rademacher,
            ClabScheme::Orthogonal => Scheme::Orthogonal,
            ClabScheme::Lsuv => Scheme::Lsuv,
        }
    }
}

impl ClabTarget {
    fn to_target(self) -> TargetId {
        match self {
            ClabTarget::Abs1d => TargetId::Abs1d,
            ClabTarget::Xsin5x => TargetId::Xsin5x,
            ClabTarget::Stepsin => TargetId::Stepsin,
            ClabTarget::Abs2d => TargetId::Abs2d,
        }
    }
}

/// Version string of the underlying library; static, do not free.
#[no_mangle]
pub extern "C" fn clab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Identity of the random generator algorithm; static, do not free.
#[no_mangle]
pub extern "C" fn clab_generator_id() -> *const c_char {
    concat!("chacha8-zig128-v1", "\0").as_ptr() as *const c_char
}

/// Message for the most recent error on this thread; valid until the next
/// failing call on the same thread. Do not free.
#[no_mangle]
pub extern "C" fn clab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Exact probability that a bias-free width-2 scalar-input chain of
/// `depth` layers is a constant function at initialization.
///
/// # Safety
/// `out_probability` must point to a writable f64.
#[no_mangle]
pub unsafe extern "C" fn clab_exact_constant_probability(
    depth: usize,
    last_layer_relu: bool,
    out_probability: *mut f64,
) -> ClabStatus {
    guard(|| {
        if out_probability.is_null() {
            set_error("out_probability is null");
            return ClabStatus::NullPointer;
        }
        match exact::exact_constant_probability(depth, last_layer_relu) {
            Ok(p) => {
                unsafe { *out_probability = p.to_f64().unwrap_or(f64::NAN) };
                ClabStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Writes the exact probability as a decimal rational string "num/den"
/// into `buf` (NUL-terminated). `written` receives the full length
/// including the terminator; if `buf_len` is too small the status is
/// `CLAB_STATUS_BUFFER_TOO_SMALL` and `written` still holds the required
/// length.
///
/// # Safety
/// `buf` must point to `buf_len` writable bytes; `written` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn clab_exact_constant_probability_rational(
    depth: usize,
    last_layer_relu: bool,
    buf: *mut c_char,
    buf_len: usize,
    written: *mut usize,
) -> ClabStatus {
    guard(|| {
        if buf.is_null() || written.is_null() {
            set_error("buffer or length pointer is null");
            return ClabStatus::NullPointer;
        }
        let p = match exact::exact_constant_probability(depth, last_layer_relu) {
            Ok(p) => p,
            Err(e) => return fail(e),
        };
        let text = p.to_string();
        let needed = text.len() + 1;
        unsafe { *written = needed };
        if buf_len < needed {
            set_error("rational string does not fit the buffer");
            return ClabStatus::BufferTooSmall;
        }
        unsafe {
            std::ptr::copy_nonoverlapping(text.as_ptr(), buf as *mut u8, text.len());
            *buf.add(text.len()) = 0;
        }
        ClabStatus::Ok
    })
}

/// Closed-form probability that a symmetric zero-bias (or nonzero-bias)
/// initialization maps a fixed nonzero input to a constant output.
///
/// # Safety
/// `widths` must point to `widths_len` readable entries; `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn clab_collapse_probability_bound(
    widths: *const usize,
    widths_len: usize,
    last_layer_relu: bool,
    biases_nonzero: bool,
    out: *mut f64,
) -> ClabStatus {
    guard(|| {
        if widths.is_null() || out.is_null() {
            set_error("widths or out is null");
            return ClabStatus::NullPointer;
        }
        let widths = unsafe { std::slice::from_raw_parts(widths, widths_len) };
        if widths.is_empty() || widths.contains(&0) {
            set_error("widths must be non-empty and positive");
            return ClabStatus::InvalidArgument;
        }
        let p = exact::collapse_probability_bound(widths, last_layer_relu, biases_nonzero);
        unsafe { *out = p };
        ClabStatus::Ok
    })
}

/// Largest depth keeping the zero-bias collapse bound below `p` at the
/// given width.
///
/// # Safety
/// `out_depth` must point to a writable u64.
#[no_mangle]
pub unsafe extern "C" fn clab_max_safe_depth(width: usize, p: f64, out_depth: *mut u64) -> ClabStatus {
    guard(|| {
        if out_depth.is_null() {
            set_error("out_depth is null");
            return ClabStatus::NullPointer;
        }
        match exact::max_safe_depth(width, p) {
            Ok(d) => {
                unsafe { *out_depth = d };
                ClabStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Expected squared-length trajectory; `out` receives `depth` values.
/// When `converged` is non-null it reports whether doubling the
/// quadrature order moved any layer by more than 1e-10 (always true for
/// the ReLU closed form).
///
/// # Safety
/// `out` must point to `depth` writable f64s; `converged` may be null.
#[no_mangle]
pub unsafe extern "C" fn clab_length_map(
    sigma_w_sq: f64,
    sigma_b_sq: f64,
    q0: f64,
    depth: usize,
    activation: ClabActivation,
    out: *mut f64,
    converged: *mut bool,
) -> ClabStatus {
    guard(|| {
        if out.is_null() {
            set_error("out is null");
            return ClabStatus::NullPointer;
        }
        let kind = match activation {
            ClabActivation::Relu => ActivationKind::Relu,
            ClabActivation::Selu => ActivationKind::Selu,
            ClabActivation::Identity => ActivationKind::Identity,
        };
        let params = exact::LengthMapParams {
            sigma_w_sq,
            sigma_b_sq,
            q0,
            depth,
            activation: kind,
        };
        let (trajectory, ok) = if kind == ActivationKind::Relu {
            match exact::length_map_relu(&params) {
                Ok(t) => (t, true),
                Err(e) => return fail(e),
            }
        } else {
            match exact::length_map_general(&params) {
                Ok((t, info)) => (t, info.converged),
                Err(e) => return fail(e),
            }
        };
        unsafe {
            std::ptr::copy_nonoverlapping(trajectory.0.as_ptr(), out, depth);
            if !converged.is_null() {
                *converged = ok;
            }
        }
        ClabStatus::Ok
    })
}

/// Monte Carlo estimate of the zero-function probability of a bias-free
/// constant-width chain with ReLU on every layer.
///
/// # Safety
/// `out` must point to a writable [`ClabEstimate`].
#[no_mangle]
pub unsafe extern "C" fn clab_mc_zero_function(
    width: usize,
    depth: usize,
    scheme: ClabScheme,
    samples: u64,
    seed: u64,
    out: *mut ClabEstimate,
) -> ClabStatus {
    guard(|| {
        if out.is_null() {
            set_error("out is null");
            return ClabStatus::NullPointer;
        }
        let arch = match Architecture::chain(1, width, depth, true, true) {
            Ok(a) => a,
            Err(e) => return fail(e),
        };
        let spec = InitializerSpec {
            scheme: scheme.to_scheme(),
            bias_mode: BiasMode::Zero,
            seed,
        };
        match mc::estimate_zero_function(&arch, &spec, samples, seed) {
            Ok(e) => {
                unsafe {
                    *out = ClabEstimate {
                        p_hat: e.p_hat,
                        ci_low: e.ci_low,
                        ci_high: e.ci_high,
                        n: e.n,
                        seed: e.seed,
                    };
                }
                ClabStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Loads a network from its JSON document; returns null on error (consult
/// `clab_last_error_message`).
///
/// # Safety
/// `json` must be a NUL-terminated UTF-8 string.
#[no_mangle]
pub unsafe extern "C" fn clab_network_from_json(json: *const c_char) -> *mut ClabNetwork {
    let result = catch_unwind(AssertUnwindSafe(|| {
        if json.is_null() {
            set_error("json is null");
            return std::ptr::null_mut();
        }
        let text = match unsafe { CStr::from_ptr(json) }.to_str() {
            Ok(t) => t,
            Err(_) => {
                set_error("json is not valid UTF-8");
                return std::ptr::null_mut();
            }
        };
        match NetworkDocument::from_json(text).and_then(|doc| doc.to_network()) {
            Ok(net) => Box::into_raw(Box::new(ClabNetwork(net))),
            Err(e) => {
                set_error(&e.to_string());
                std::ptr::null_mut()
            }
        }
    }));
    match result {
        Ok(ptr) => ptr,
        Err(_) => {
            set_error("panic across the C boundary");
            std::ptr::null_mut()
        }
    }
}

/// Builds the exact minimal representation of `abs1d` or `abs2d`; null
/// for targets without one.
#[no_mangle]
pub extern "C" fn clab_network_reference(target: ClabTarget) -> *mut ClabNetwork {
    match collapselab::net::reference_network(target.to_target()) {
        Ok(net) => Box::into_raw(Box::new(ClabNetwork(net))),
        Err(e) => {
            set_error(&e.to_string());
            std::ptr::null_mut()
        }
    }
}

/// Releases a network handle; null is a no-op.
///
/// # Safety
/// `net` must have come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn clab_network_free(net: *mut ClabNetwork) {
    if !net.is_null() {
        drop(unsafe { Box::from_raw(net) });
    }
}

/// Input dimension of a network; 0 when the handle is null.
///
/// # Safety
/// `net` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn clab_network_input_dim(net: *const ClabNetwork) -> usize {
    if net.is_null() {
        return 0;
    }
    unsafe { &*net }.0.arch().d_in
}

/// Output dimension of a network; 0 when the handle is null.
///
/// # Safety
/// `net` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn clab_network_output_dim(net: *const ClabNetwork) -> usize {
    if net.is_null() {
        return 0;
    }
    unsafe { &*net }.0.arch().d_out()
}

/// Evaluates the network at one input point.
///
/// # Safety
/// `input` must hold `input_len` readable f64s matching the input
/// dimension; `output` must hold `output_len` writable f64s matching the
/// output dimension.
#[no_mangle]
pub unsafe extern "C" fn clab_network_forward(
    net: *const ClabNetwork,
    input: *const f64,
    input_len: usize,
    output: *mut f64,
    output_len: usize,
) -> ClabStatus {
    guard(|| {
        if net.is_null() || input.is_null() || output.is_null() {
            set_error("net, input, or output is null");
            return ClabStatus::NullPointer;
        }
        let net = unsafe { &(*net).0 };
        if input_len != net.arch().d_in || output_len != net.arch().d_out() {
            set_error("input or output length does not match the architecture");
            return ClabStatus::InvalidArgument;
        }
        let input = unsafe { std::slice::from_raw_parts(input, input_len) };
        match net.output(input) {
            Ok(values) => {
                unsafe { std::ptr::copy_nonoverlapping(values.as_ptr(), output, output_len) };
                ClabStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Classifies a network against a target. `tolerance <= 0` selects the
/// default (2e-2 of the target's output range). `out_constant`, when
/// non-null with `constant_len` equal to the output dimension, receives
/// the collapse constant (NaN-filled unless fully collapsed).
/// `out_zero_layer` receives the 1-based dead layer index or -1.
///
/// # Safety
/// Pointer arguments must be null or valid as described.
#[no_mangle]
pub unsafe extern "C" fn clab_classify(
    net: *const ClabNetwork,
    target: ClabTarget,
    loss: ClabLoss,
    tolerance: f64,
    out_kind: *mut ClabCollapseKind,
    out_constant: *mut f64,
    constant_len: usize,
    out_zero_layer: *mut i64,
) -> ClabStatus {
    guard(|| {
        if net.is_null() || out_kind.is_null() {
            set_error("net or out_kind is null");
            return ClabStatus::NullPointer;
        }
        let net = unsafe { &(*net).0 };
        let target = target.to_target();
        let loss = match loss {
            ClabLoss::Mse => LossKind::Mse,
            ClabLoss::Mae => LossKind::Mae,
        };
        let grid = Grid::default_for(target.d_in());
        let tol = if tolerance > 0.0 {
            tolerance
        } else {
            default_tolerance(target, &grid)
        };
        let report = match classify_state(net, target, &grid, loss, tol) {
            Ok(r) => r,
            Err(e) => return fail(e),
        };
        unsafe {
            *out_kind = match report.kind {
                CollapseKind::Fitted => ClabCollapseKind::Fitted,
                CollapseKind::FullCollapse => ClabCollapseKind::FullCollapse,
                CollapseKind::PartialCollapse => ClabCollapseKind::PartialCollapse,
                CollapseKind::Other => ClabCollapseKind::Other,
            };
            if !out_constant.is_null() {
                if constant_len != net.arch().d_out() {
                    set_error("constant_len does not match the output dimension");
                    return ClabStatus::InvalidArgument;
                }
                let slot = std::slice::from_raw_parts_mut(out_constant, constant_len);
                match &report.constant_value {
                    Some(c) => slot.copy_from_slice(c),
                    None => slot.fill(f64::NAN),
                }
            }
            if !out_zero_layer.is_null() {
                *out_zero_layer = report.zero_layer.map(|l| l as i64).unwrap_or(-1);
            }
        }
        ClabStatus::Ok
    })
}
