//! C ABI for the lagmesh solver.
//!
//! Every entry point returns a [`LagmeshStatus`]; on failure the message is
//! available from [`lagmesh_last_error_message`] on the same thread. Results
//! come back as opaque handles that must be released with the matching
//! `_free` function. Strings returned by `*_string` functions are owned by
//! the caller and released with [`lagmesh_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use lagmesh::basis::DomainSpec;
use lagmesh::numeric::{format_real_scalar, parse_scalar};
use lagmesh::orthopoly::{build_mesh_with, cache_root_from_env, MeshKey, MeshRecord, PolyFamily};
use lagmesh::potential::parse_potential;
use lagmesh::spectrum::{
    solve_eigenfunctions, solve_eigensystem, solve_eigenvalues, Method, SolveOptions, SpectrumResult,
};
use lagmesh::{Error, PrecisionContext};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagmeshStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Malformed input: parse or validation failure.
    InvalidInput = 3,
    /// The numerics failed (non-convergence, evaluation failure, ...).
    NumericalFailure = 4,
    /// Reading or writing the mesh cache failed.
    Io = 5,
    /// An index argument was out of range.
    OutOfRange = 6,
    /// The requested quantity was not computed for this result.
    Unavailable = 7,
    /// Internal error; the library caught a panic.
    Internal = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagmeshFamily {
    Legendre = 0,
    Laguerre = 1,
    Hermite = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagmeshMethod {
    Dense = 0,
    Partial = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagmeshMode {
    Eigenvalues = 0,
    Eigenfunctions = 1,
    Eigensystem = 2,
}

/// Solve parameters. String fields may be null to take the default
/// (`scaling` 1, `mass` 1, `shift` 0, no expectation, in-memory meshes).
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LagmeshSolveConfig {
    pub levels: usize,
    pub dimension: usize,
    pub precision: u32,
    pub scaling: *const c_char,
    pub mass: *const c_char,
    pub shift: *const c_char,
    pub method: LagmeshMethod,
    /// Observable whose expectation value is computed per state.
    pub expectation: *const c_char,
    pub coefficients: bool,
    pub discrete: bool,
    pub cache_dir: *const c_char,
}

/// Opaque solve result.
pub struct LagmeshSpectrum {
    result: SpectrumResult,
}

/// Opaque mesh record.
pub struct LagmeshMesh {
    record: MeshRecord,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let clean = message.replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(clean).expect("nul bytes removed"));
}

fn status_of(e: &Error) -> LagmeshStatus {
    match e {
        Error::Io { .. } | Error::CacheCorruption { .. } => LagmeshStatus::Io,
        e if e.is_user_error() => LagmeshStatus::InvalidInput,
        _ => LagmeshStatus::NumericalFailure,
    }
}

struct Fail(LagmeshStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LagmeshStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            LagmeshStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LagmeshStatus::Internal
        }
    }
}

unsafe fn opt_str<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Fail> {
    if p.is_null() {
        return Ok(None);
    }
    CStr::from_ptr(p)
        .to_str()
        .map(Some)
        .map_err(|_| Fail(LagmeshStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn req_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    opt_str(p, what)?.ok_or_else(|| Fail(LagmeshStatus::NullPointer, format!("{what} is null")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(LagmeshStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail(LagmeshStatus::NullPointer, format!("{what} is null")))
}

fn index_check(i: usize, len: usize, what: &str) -> Result<(), Fail> {
    if i < len {
        Ok(())
    } else {
        Err(Fail(LagmeshStatus::OutOfRange, format!("{what} {i} out of range 0..{len}")))
    }
}

fn real_param(text: &str, ctx: &PrecisionContext, what: &str) -> Result<lagmesh::BigReal, Fail> {
    let z = parse_scalar(text, ctx)?;
    if !z.imag().is_zero() {
        return Err(Fail(LagmeshStatus::InvalidInput, format!("{what} must be real")));
    }
    Ok(z.real().clone())
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("formatted numbers contain no nul").into_raw()
}

/// Message of the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next library call on this thread.
#[no_mangle]
pub extern "C" fn lagmesh_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn lagmesh_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// A config with every optional field at its default.
#[no_mangle]
pub extern "C" fn lagmesh_solve_config_default(levels: usize, dimension: usize, precision: u32) -> LagmeshSolveConfig {
    LagmeshSolveConfig {
        levels,
        dimension,
        precision,
        scaling: ptr::null(),
        mass: ptr::null(),
        shift: ptr::null(),
        method: LagmeshMethod::Dense,
        expectation: ptr::null(),
        coefficients: false,
        discrete: false,
        cache_dir: ptr::null(),
    }
}

/// Solves for the lowest levels of `potential` on `domain` ("a,b", with
/// "inf"/"-inf" allowed) and stores the result in `*out`.
///
/// # Safety
/// `potential`, `domain` and `config` must be valid; string fields of
/// `config` must be null or nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lagmesh_solve(
    potential: *const c_char,
    domain: *const c_char,
    config: *const LagmeshSolveConfig,
    mode: LagmeshMode,
    out: *mut *mut LagmeshSpectrum,
) -> LagmeshStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let potential = parse_potential(req_str(potential, "potential")?)?;
        let cfg = handle(config, "config")?;
        let mut opts = SolveOptions::new(cfg.levels, cfg.dimension, cfg.precision);
        let ctx = opts.validate()?;
        let domain = DomainSpec::parse(req_str(domain, "domain")?, &ctx)?;
        if let Some(s) = opt_str(cfg.scaling, "scaling")? {
            opts.scaling = real_param(s, &ctx, "scaling")?;
        }
        if let Some(s) = opt_str(cfg.mass, "mass")? {
            opts.mass = parse_scalar(s, &ctx)?;
        }
        if let Some(s) = opt_str(cfg.shift, "shift")? {
            opts.potential_shift = real_param(s, &ctx, "shift")?;
        }
        opts.method = match cfg.method {
            LagmeshMethod::Dense => Method::Dense,
            LagmeshMethod::Partial => Method::Partial,
        };
        if let Some(s) = opt_str(cfg.expectation, "expectation")? {
            opts.expectation = Some(parse_potential(s)?);
        }
        opts.want_coefficients = cfg.coefficients;
        opts.want_discrete = cfg.discrete;
        opts.cache_dir = opt_str(cfg.cache_dir, "cache_dir")?.map(PathBuf::from);
        let result = match mode {
            LagmeshMode::Eigenvalues => solve_eigenvalues(&potential, &domain, &opts)?,
            LagmeshMode::Eigenfunctions => solve_eigenfunctions(&potential, &domain, &opts)?,
            LagmeshMode::Eigensystem => solve_eigensystem(&potential, &domain, &opts)?,
        };
        *out = Box::into_raw(Box::new(LagmeshSpectrum { result }));
        Ok(())
    })
}

/// Releases a spectrum; null is ignored.
///
/// # Safety
/// `s` must come from [`lagmesh_solve`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn lagmesh_spectrum_free(s: *mut LagmeshSpectrum) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Number of returned levels (0 for a null handle).
///
/// # Safety
/// `s` must be null or a live spectrum handle.
#[no_mangle]
pub unsafe extern "C" fn lagmesh_spectrum_len(s: *const LagmeshSpectrum) -> usize {
    s.as_ref().map_or(0, |s| s.result.energies.len())
}

/// Energy `index` rounded to double precision.
///
/// # Safety
/// `s` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lagmesh_spectrum_energy(
    s: *const LagmeshSpectrum,
    index: usize,
    re: *mut f64,
    im: *mut f64,
) -> LagmeshStatus {
    guard(|| {
        let e = &handle(s, "spectrum")?.result.energies;
        index_check(index, e.len(), "level")?;
        *out_ptr(re, "re")? = e[index].real().to_f64();
        *out_ptr(im, "im")? = e[index].imag().to_f64();
        Ok(())
    })
}

/// Real and imaginary parts of energy `index` as decimal strings with
/// `digits` significant digits. Free both with [`lagmesh_string_free`].
///
/// # Safety
/// `s` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lagmesh_spectrum_energy_string(
    s: *const LagmeshSpectrum,
    index: usize,
    digits: usize,
    re: *mut *mut c_char,
    im: *mut *mut c_char,
) -> LagmeshStatus {
    guard(|| {
        let e = &handle(s, "spectrum")?.result.energies;
        index_check(index, e.len(), "level")?;
        let r = format_real_scalar(e[index].real(), digits)?;
        let i = format_real_scalar(e[index].imag(), digits)?;
        let (re, im) = (out_ptr(re, "re")?, out_ptr(im, "im")?);
        *re = to_c_string(r);
        *im = to_c_string(i);
        Ok(())
    })
}

/// Expansion coefficient `k` of state `state` (double precision).
///
/// # Safety
/// `s` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lagmesh_spectrum_coefficient(
    s: *const LagmeshSpectrum,
    state: usize,
    k: usize,
    re: *mut f64,
    im: *mut f64,
) -> LagmeshStatus {
    guard(|| {
        let cs = handle(s, "spectrum")?
            .result
            .coefficients
            .as_ref()
            .ok_or_else(|| Fail(LagmeshStatus::Unavailable, "coefficients were not requested".into()))?;
        index_check(state, cs.len(), "state")?;
        index_check(k, cs[state].len(), "coefficient")?;
        *out_ptr(re, "re")? = cs[state][k].real().to_f64();
        *out_ptr(im, "im")? = cs[state][k].imag().to_f64();
        Ok(())
    })
}

/// Mesh point `k` and the wavefunction of state `state` there.
///
/// # Safety
/// `s` must be a live handle; `x`, `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lagmesh_spectrum_discrete(
    s: *const LagmeshSpectrum,
    state: usize,
    k: usize,
    x: *mut f64,
    re: *mut f64,
    im: *mut f64,
) -> LagmeshStatus {
    guard(|| {
        let ps = handle(s, "spectrum")?
            .result
            .discrete_psi
            .as_ref()
            .ok_or_else(|| Fail(LagmeshStatus::Unavailable, "discrete wavefunctions were not requested".into()))?;
        index_check(state, ps.len(), "state")?;
        index_check(k, ps[state].len(), "mesh point")?;
        let (px, psi) = &ps[state][k];
        *out_ptr(x, "x")? = px.to_f64();
        *out_ptr(re, "re")? = psi.real().to_f64();
        *out_ptr(im, "im")? = psi.imag().to_f64();
        Ok(())
    })
}

/// Expectation value of the configured observable in state `state`.
///
/// # Safety
/// `s` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lagmesh_spectrum_expectation(
    s: *const LagmeshSpectrum,
    state: usize,
    re: *mut f64,
    im: *mut f64,
) -> LagmeshStatus {
    guard(|| {
        let ex = handle(s, "spectrum")?
            .result
            .expectations
            .as_ref()
            .ok_or_else(|| Fail(LagmeshStatus::Unavailable, "no expectation observable was set".into()))?;
        index_check(state, ex.len(), "state")?;
        *out_ptr(re, "re")? = ex[state].real().to_f64();
        *out_ptr(im, "im")? = ex[state].imag().to_f64();
        Ok(())
    })
}

/// Upper bound on the eigenpair residuals of the solve.
///
/// # Safety
/// `s` must be a live handle; `bound` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lagmesh_spectrum_residual_bound(s: *const LagmeshSpectrum, bound: *mut f64) -> LagmeshStatus {
    guard(|| {
        *out_ptr(bound, "bound")? = handle(s, "spectrum")?.result.metadata.residual_bound.to_f64();
        Ok(())
    })
}

/// Builds or loads a mesh. A null `cache_dir` uses `$LAGMESH_CACHE`
/// (default `./meshes`). With `weights` false only the points file is
/// written; the handle always carries weights.
///
/// # Safety
/// `cache_dir` must be null or nul-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lagmesh_build_mesh(
    family: LagmeshFamily,
    dimension: usize,
    precision: u32,
    weights: bool,
    cache_dir: *const c_char,
    out: *mut *mut LagmeshMesh,
) -> LagmeshStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let family = match family {
            LagmeshFamily::Legendre => PolyFamily::Legendre,
            LagmeshFamily::Laguerre => PolyFamily::Laguerre,
            LagmeshFamily::Hermite => PolyFamily::Hermite,
        };
        let root = opt_str(cache_dir, "cache_dir")?.map_or_else(cache_root_from_env, PathBuf::from);
        let key = MeshKey::new(family, dimension, precision)?;
        let build = build_mesh_with(key, &root, weights)?;
        *out = Box::into_raw(Box::new(LagmeshMesh { record: build.record }));
        Ok(())
    })
}

/// Releases a mesh; null is ignored.
///
/// # Safety
/// `m` must come from [`lagmesh_build_mesh`] and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn lagmesh_mesh_free(m: *mut LagmeshMesh) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Number of mesh points (0 for a null handle).
///
/// # Safety
/// `m` must be null or a live mesh handle.
#[no_mangle]
pub unsafe extern "C" fn lagmesh_mesh_len(m: *const LagmeshMesh) -> usize {
    m.as_ref().map_or(0, |m| m.record.dimension())
}

/// Point `index` and its Lagrange weight `lambda` in double precision.
///
/// # Safety
/// `m` must be a live handle; `x` and `lambda` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lagmesh_mesh_point(
    m: *const LagmeshMesh,
    index: usize,
    x: *mut f64,
    lambda: *mut f64,
) -> LagmeshStatus {
    guard(|| {
        let r = &handle(m, "mesh")?.record;
        index_check(index, r.dimension(), "mesh point")?;
        *out_ptr(x, "x")? = r.points[index].to_f64();
        *out_ptr(lambda, "lambda")? = r.lagrange_weights[index].to_f64();
        Ok(())
    })
}

/// Point `index` as a decimal string with `digits` significant digits.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn lagmesh_mesh_point_string(
    m: *const LagmeshMesh,
    index: usize,
    digits: usize,
    out: *mut *mut c_char,
) -> LagmeshStatus {
    guard(|| {
        let r = &handle(m, "mesh")?.record;
        index_check(index, r.dimension(), "mesh point")?;
        let s = format_real_scalar(&r.points[index], digits)?;
        *out_ptr(out, "out")? = to_c_string(s);
        Ok(())
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from a `*_string` function and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn lagmesh_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
