//! C ABI over `harmonic-lattice`.
//!
//! Box functions are opaque handles owned by the caller and released with
//! [`hl_box_function_free`]. Every fallible call returns an [`HlStatus`]; the
//! message of the last failure on the calling thread is available from
//! [`hl_last_error_message`]. Arrays are row-major over `{0,…,N}^d`, and
//! boundary data follows the lexicographic order of the boundary vertices.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use harmonic_lattice::boxes::{
    dirichlet_extension, gradient_comparison, neumann_extension, BoxHarmonic, DirichletData,
    NeumannData,
};
use harmonic_lattice::halfspace::periodized_poisson_kernel;
use harmonic_lattice::lattice::{BoxDomain, LatticeFunction, PNorm};
use harmonic_lattice::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HlStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ShapeMismatch = 3,
    OutOfDomain = 4,
    Incompatible = 5,
    NoConvergence = 6,
    Residual = 7,
    Panic = 8,
    Other = 9,
}

/// Opaque harmonic function on a box.
pub struct HlBoxFunction {
    inner: BoxHarmonic,
}

/// Gradient norms on the tangential, normal and full edge sets. Undefined ratios are NaN.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct HlGradientReport {
    pub tan_norm: f64,
    pub nor_norm: f64,
    pub full_norm: f64,
    pub nor_over_tan: f64,
    pub tan_over_nor: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> HlStatus {
    match e {
        Error::InvalidArgument(_) | Error::InvalidExponent(_) | Error::Degenerate(_) => {
            HlStatus::InvalidArgument
        }
        Error::ShapeMismatch { .. } => HlStatus::ShapeMismatch,
        Error::OutOfDomain { .. } => HlStatus::OutOfDomain,
        Error::Incompatible(_) => HlStatus::Incompatible,
        Error::NoConvergence { .. } | Error::NonContraction { .. } => HlStatus::NoConvergence,
        Error::Residual { .. } => HlStatus::Residual,
        _ => HlStatus::Other,
    }
}

/// Runs `f`, recording any error or panic.
fn guard(f: impl FnOnce() -> Result<(), (HlStatus, String)>) -> HlStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HlStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            HlStatus::Panic
        }
    }
}

fn lib_err(e: Error) -> (HlStatus, String) {
    (status_of(&e), e.to_string())
}

fn null_err(name: &str) -> (HlStatus, String) {
    (HlStatus::NullPointer, format!("{name} is null"))
}

unsafe fn slice_in<'a>(ptr: *const f64, len: usize, name: &str) -> Result<&'a [f64], (HlStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null_err(name));
    }
    // SAFETY: the caller guarantees `ptr` points to `len` readable doubles.
    Ok(unsafe { std::slice::from_raw_parts(ptr, len) })
}

fn emit(out: *mut *mut HlBoxFunction, u: BoxHarmonic) {
    let handle = Box::into_raw(Box::new(HlBoxFunction { inner: u }));
    // SAFETY: `out` was checked non-null by the caller of `emit`.
    unsafe { *out = handle };
}

/// Number of boundary vertices of `{0,…,N}^d`, the length of Dirichlet data.
///
/// # Safety
/// `out` must be a valid pointer to a `size_t`.
#[no_mangle]
pub unsafe extern "C" fn hl_boundary_vertex_count(d: usize, n: usize, out: *mut usize) -> HlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        let domain = BoxDomain::new(d, n).map_err(lib_err)?;
        unsafe { *out = domain.boundary_vertices().len() };
        Ok(())
    })
}

/// Number of inward normal edges, the length of Neumann data.
///
/// # Safety
/// `out` must be a valid pointer to a `size_t`.
#[no_mangle]
pub unsafe extern "C" fn hl_normal_edge_count(d: usize, n: usize, out: *mut usize) -> HlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        let domain = BoxDomain::new(d, n).map_err(lib_err)?;
        unsafe { *out = domain.normal_edges().len() };
        Ok(())
    })
}

/// Harmonic extension of boundary values.
///
/// # Safety
/// `values` must point to `len` doubles and `out` to writable handle storage.
#[no_mangle]
pub unsafe extern "C" fn hl_dirichlet_extension(
    d: usize,
    n: usize,
    values: *const f64,
    len: usize,
    out: *mut *mut HlBoxFunction,
) -> HlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        let v = unsafe { slice_in(values, len, "values")? };
        let domain = BoxDomain::new(d, n).map_err(lib_err)?;
        let data = DirichletData::new(domain, v.to_vec()).map_err(lib_err)?;
        emit(out, dirichlet_extension(&data).map_err(lib_err)?);
        Ok(())
    })
}

/// Harmonic function with the given inward normal differences; the data must sum to zero.
///
/// # Safety
/// `values` must point to `len` doubles and `out` to writable handle storage.
#[no_mangle]
pub unsafe extern "C" fn hl_neumann_extension(
    d: usize,
    n: usize,
    values: *const f64,
    len: usize,
    out: *mut *mut HlBoxFunction,
) -> HlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        let v = unsafe { slice_in(values, len, "values")? };
        let domain = BoxDomain::new(d, n).map_err(lib_err)?;
        let data = NeumannData::new(domain, v.to_vec()).map_err(lib_err)?;
        emit(out, neumann_extension(&data).map_err(lib_err)?);
        Ok(())
    })
}

/// Number of vertices, `(N+1)^d`; 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn hl_box_function_len(f: *const HlBoxFunction) -> usize {
    match unsafe { f.as_ref() } {
        Some(f) => f.inner.domain().num_vertices(),
        None => 0,
    }
}

/// Copies all values, row-major, into `out[0..len]`; `len` must equal the vertex count.
///
/// # Safety
/// `f` must be a live handle and `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hl_box_function_values(
    f: *const HlBoxFunction,
    out: *mut f64,
    len: usize,
) -> HlStatus {
    guard(|| {
        let f = unsafe { f.as_ref() }.ok_or_else(|| null_err("f"))?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let values = f.inner.values();
        if len != values.len() {
            return Err(lib_err(Error::ShapeMismatch {
                expected: vec![values.len()],
                got: vec![len],
            }));
        }
        let dst = unsafe { std::slice::from_raw_parts_mut(out, len) };
        for (d, v) in dst.iter_mut().zip(values.iter()) {
            *d = *v;
        }
        Ok(())
    })
}

/// Value at the vertex `x[0..d]`.
///
/// # Safety
/// `f` must be a live handle, `x` must point to `d` integers and `out` to a double.
#[no_mangle]
pub unsafe extern "C" fn hl_box_function_value_at(
    f: *const HlBoxFunction,
    x: *const i64,
    d: usize,
    out: *mut f64,
) -> HlStatus {
    guard(|| {
        let f = unsafe { f.as_ref() }.ok_or_else(|| null_err("f"))?;
        if x.is_null() {
            return Err(null_err("x"));
        }
        if out.is_null() {
            return Err(null_err("out"));
        }
        let x = unsafe { std::slice::from_raw_parts(x, d) };
        if d != f.inner.domain().d() {
            return Err(lib_err(Error::ShapeMismatch {
                expected: vec![f.inner.domain().d()],
                got: vec![d],
            }));
        }
        let v = f.inner.value(x).map_err(lib_err)?;
        unsafe { *out = v };
        Ok(())
    })
}

/// Gradient norms for exponent `p ≥ 1` (pass `INFINITY` for the max norm).
///
/// # Safety
/// `f` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn hl_gradient_comparison(
    f: *const HlBoxFunction,
    p: f64,
    out: *mut HlGradientReport,
) -> HlStatus {
    guard(|| {
        let f = unsafe { f.as_ref() }.ok_or_else(|| null_err("f"))?;
        if out.is_null() {
            return Err(null_err("out"));
        }
        let p = PNorm::new(p).map_err(lib_err)?;
        let r = gradient_comparison(&f.inner, f.inner.domain(), p).map_err(lib_err)?;
        unsafe {
            *out = HlGradientReport {
                tan_norm: r.tan_norm,
                nor_norm: r.nor_norm,
                full_norm: r.full_norm,
                nor_over_tan: r.nor_over_tan.unwrap_or(f64::NAN),
                tan_over_nor: r.tan_over_nor.unwrap_or(f64::NAN),
            }
        };
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hl_box_function_free(f: *mut HlBoxFunction) {
    if !f.is_null() {
        // SAFETY: handles come from `Box::into_raw` in this crate.
        drop(unsafe { Box::from_raw(f) });
    }
}

/// Periodized exit distribution from height `z`, written row-major into `out[0..len]`,
/// `len = (2L)^{d−1}`, with coordinate `x` stored at index `x mod 2L`.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn hl_periodized_poisson_kernel(
    z: usize,
    d: usize,
    l: usize,
    out: *mut f64,
    len: usize,
) -> HlStatus {
    guard(|| {
        if out.is_null() {
            return Err(null_err("out"));
        }
        let p = periodized_poisson_kernel(z, d, l).map_err(lib_err)?;
        if len != p.len() {
            return Err(lib_err(Error::ShapeMismatch {
                expected: vec![p.len()],
                got: vec![len],
            }));
        }
        let dst = unsafe { std::slice::from_raw_parts_mut(out, len) };
        for (d, v) in dst.iter_mut().zip(p.iter()) {
            *d = *v;
        }
        Ok(())
    })
}

/// Message of the last failure on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn hl_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn hl_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
