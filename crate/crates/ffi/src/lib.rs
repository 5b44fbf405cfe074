//! C ABI over the `anarchy` crate.
//!
//! Instances live behind opaque handles created from JSON and released with
//! the matching `_free`. Every fallible call returns an [`AnarchyStatus`];
//! the message of the last failure on the calling thread is available from
//! [`anarchy_last_error`]. Rationals cross the boundary as `"p/q"` strings
//! owned by the library and released with [`anarchy_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use anarchy::flow::{greedy_fractional_flow, FlowInstance};
use anarchy::maxtsp::{fisher_round, max_weight_cycle_cover, CompleteDigraph, CycleCover};
use anarchy::mechanism::{compose_smoothness, poa_from_smoothness, SmoothnessParams};
use anarchy::packing::{check_pip_social_cost, solve_packing_lp, PackingInstance};
use anarchy::rational::{format, parse, Rational};
use anarchy::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AnarchyStatus {
    Ok = 0,
    NullPointer = 1,
    Structural = 2,
    Infeasible = 3,
    Precondition = 4,
    SizeGuard = 5,
    Parse = 6,
    Io = 7,
    BufferTooSmall = 8,
    Panic = 9,
}

/// Packing instance handle.
pub struct AnarchyPacking(PackingInstance);
/// Complete digraph handle for max-TSP.
pub struct AnarchyGraph(CompleteDigraph);
/// Capacitated flow instance handle.
pub struct AnarchyFlow(FlowInstance);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> AnarchyStatus {
    match e {
        Error::Structural(_) => AnarchyStatus::Structural,
        Error::Infeasible(_) => AnarchyStatus::Infeasible,
        Error::Precondition(_) => AnarchyStatus::Precondition,
        Error::SizeGuard { .. } => AnarchyStatus::SizeGuard,
        Error::Parse(_) | Error::Json(_) => AnarchyStatus::Parse,
        Error::Io(_) => AnarchyStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Lib(Error),
    Buffer(usize),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Lib(e)
    }
}

/// Runs `f`, converting errors and panics into a status plus a message.
fn guard<F: FnOnce() -> Result<(), Fail>>(f: F) -> AnarchyStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => AnarchyStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            AnarchyStatus::NullPointer
        }
        Ok(Err(Fail::Lib(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Fail::Buffer(need))) => {
            set_error(format!("output buffer too small, need {need} entries"));
            AnarchyStatus::BufferTooSmall
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            AnarchyStatus::Panic
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &'static str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Fail::Lib(Error::Parse(format!("{what}: {e}"))))
}

unsafe fn read_rational(p: *const c_char, what: &'static str) -> Result<Rational, Fail> {
    Ok(parse(read_str(p, what)?)?)
}

unsafe fn handle<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null(what))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &'static str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn write_rational(out: *mut *mut c_char, r: &Rational) -> Result<(), Fail> {
    let s = CString::new(format(r)).expect("rationals contain no nul");
    write_out(out, s.into_raw(), "string output")
}

unsafe fn from_json<T: serde::de::DeserializeOwned, H>(json: *const c_char, out: *mut *mut H, wrap: fn(T) -> H) -> AnarchyStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let value: T = serde_json::from_str(text).map_err(Error::from)?;
        write_out(out, Box::into_raw(Box::new(wrap(value))), "handle output")
    })
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn anarchy_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn anarchy_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// `max(1, mu) / lambda` for rationals given as `"p/q"`.
///
/// # Safety
/// Inputs must be nul-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anarchy_poa_from_smoothness(lambda: *const c_char, mu: *const c_char, out: *mut *mut c_char) -> AnarchyStatus {
    guard(|| {
        let p = SmoothnessParams::half_value(read_rational(lambda, "lambda")?, read_rational(mu, "mu")?)?;
        write_rational(out, &poa_from_smoothness(&p)?)
    })
}

/// Half-value smoothness after an `alpha`-approximate oblivious rounding;
/// writes the composed lambda and mu.
///
/// # Safety
/// Inputs must be nul-terminated strings; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn anarchy_compose_smoothness(
    lambda: *const c_char,
    mu: *const c_char,
    alpha: *const c_char,
    lambda_out: *mut *mut c_char,
    mu_out: *mut *mut c_char,
) -> AnarchyStatus {
    guard(|| {
        let p = SmoothnessParams::half_value(read_rational(lambda, "lambda")?, read_rational(mu, "mu")?)?;
        let c = compose_smoothness(&p, &read_rational(alpha, "alpha")?)?;
        if lambda_out.is_null() || mu_out.is_null() {
            return Err(Fail::Null("composed outputs"));
        }
        write_rational(lambda_out, &c.lambda)?;
        write_rational(mu_out, &c.mu)
    })
}

/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anarchy_packing_from_json(json: *const c_char, out: *mut *mut AnarchyPacking) -> AnarchyStatus {
    from_json(json, out, AnarchyPacking)
}

/// # Safety
/// `h` must be null or a handle from `anarchy_packing_from_json`.
#[no_mangle]
pub unsafe extern "C" fn anarchy_packing_free(h: *mut AnarchyPacking) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Fractional optimum `W^v(c)` at truthful bids.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anarchy_packing_lp_welfare(h: *const AnarchyPacking, out: *mut *mut c_char) -> AnarchyStatus {
    guard(|| {
        let inst = &handle(h, "packing handle")?.0;
        write_rational(out, &solve_packing_lp(inst, &inst.values)?.welfare)
    })
}

/// Social-cost bound at truthful bids with `x-bar` the LP optimum; writes 1
/// to `holds` when it holds and 0 otherwise.
///
/// # Safety
/// `h` must be a live handle; `holds` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anarchy_packing_check_social_cost(h: *const AnarchyPacking, holds: *mut i32) -> AnarchyStatus {
    guard(|| {
        let inst = &handle(h, "packing handle")?.0;
        let xbar = solve_packing_lp(inst, &inst.values)?.allocation;
        let r = check_pip_social_cost(inst, &inst.values, &xbar)?;
        write_out(holds, i32::from(r.holds), "holds output")
    })
}

/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anarchy_graph_from_json(json: *const c_char, out: *mut *mut AnarchyGraph) -> AnarchyStatus {
    from_json(json, out, AnarchyGraph)
}

/// # Safety
/// `h` must be null or a handle from `anarchy_graph_from_json`.
#[no_mangle]
pub unsafe extern "C" fn anarchy_graph_free(h: *mut AnarchyGraph) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// # Safety
/// `h` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn anarchy_graph_vertices(h: *const AnarchyGraph) -> usize {
    h.as_ref().map_or(0, |g| g.0.n)
}

fn write_slice(out: *mut usize, len: usize, data: &[usize]) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("index buffer"));
    }
    if len < data.len() {
        return Err(Fail::Buffer(data.len()));
    }
    // SAFETY: the caller guarantees `out` holds `len >= data.len()` entries.
    unsafe { ptr::copy_nonoverlapping(data.as_ptr(), out, data.len()) };
    Ok(())
}

/// Maximum-weight cycle cover: writes `succ` (n entries) and the weight.
///
/// # Safety
/// `h` must be a live handle; `succ` must hold `len` entries; `weight` must
/// be writable.
#[no_mangle]
pub unsafe extern "C" fn anarchy_graph_cycle_cover(
    h: *const AnarchyGraph,
    succ: *mut usize,
    len: usize,
    weight: *mut *mut c_char,
) -> AnarchyStatus {
    guard(|| {
        let g = &handle(h, "graph handle")?.0;
        let (cover, w) = max_weight_cycle_cover(g)?;
        write_slice(succ, len, &cover.succ)?;
        write_rational(weight, &w)
    })
}

/// Random-drop rounding of the cycle cover `succ` into a tour written to
/// `order` (n entries). Never reads edge weights.
///
/// # Safety
/// `succ` must hold `n` entries and `order` must hold `len` entries.
#[no_mangle]
pub unsafe extern "C" fn anarchy_fisher_round(succ: *const usize, n: usize, seed: u64, order: *mut usize, len: usize) -> AnarchyStatus {
    guard(|| {
        if succ.is_null() {
            return Err(Fail::Null("successor array"));
        }
        let cover = CycleCover::new(std::slice::from_raw_parts(succ, n).to_vec())?;
        write_slice(order, len, &fisher_round(&cover, seed).order)
    })
}

/// # Safety
/// `json` must be a nul-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anarchy_flow_from_json(json: *const c_char, out: *mut *mut AnarchyFlow) -> AnarchyStatus {
    from_json(json, out, AnarchyFlow)
}

/// # Safety
/// `h` must be null or a handle from `anarchy_flow_from_json`.
#[no_mangle]
pub unsafe extern "C" fn anarchy_flow_free(h: *mut AnarchyFlow) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Greedy fractional flow welfare at truthful bids.
///
/// # Safety
/// `h` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn anarchy_flow_greedy_welfare(h: *const AnarchyFlow, out: *mut *mut c_char) -> AnarchyStatus {
    guard(|| {
        let inst = &handle(h, "flow handle")?.0;
        write_rational(out, &greedy_fractional_flow(inst, &inst.values())?.welfare)
    })
}
