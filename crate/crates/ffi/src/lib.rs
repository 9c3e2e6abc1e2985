//! C ABI over `relay_planner`.
//!
//! Every fallible call returns an [`RpStatus`] and writes its result through
//! an out-pointer. On failure, [`rp_last_error`] describes what went wrong on
//! the calling thread. Handles are opaque and must be released with the
//! matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use relay_planner::oracle::TurningPointSweep;
use relay_planner::{fitmodels, oracle, planner, Environment, Error, ExactModel, FitModel, LinkBudget};

/// Result code of every fallible call.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpStatus {
    Ok = 0,
    NullPointer = 1,
    /// An argument is outside its domain.
    Domain = 2,
    /// A fitted model has parameters outside their admissible ranges.
    Validation = 3,
    /// A numerical procedure failed: boundary minimizer, band truncation,
    /// rank deficiency, fit failure or a missing bracket.
    Numeric = 4,
    /// Inconsistent inputs, such as a model fitted for another SNR.
    Config = 5,
    /// The caller's buffer is too short.
    BufferTooSmall = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

/// Placement case of a link.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RpCase {
    DirectConcave = 0,
    DirectMixed = 1,
    RelayOptimal = 2,
}

/// Link description. `packet_bits` and `alpha` default to 2048 and 1.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct RpLinkSpec {
    pub l_km: f64,
    pub snr0_db: f64,
    pub p_r_w: f64,
    pub packet_bits: u64,
    pub alpha: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RpModelParams {
    pub omega: f64,
    pub lambda: f64,
    pub psi: f64,
    pub gamma: f64,
    pub delta: f64,
    pub snr0_db: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RpHopBudget {
    pub f0_khz: f64,
    pub f_lo_khz: f64,
    pub f_hi_khz: f64,
    pub width_khz: f64,
    /// Required acoustic power at 0 dB SNR, in µPa².
    pub acoustic_power_unit_snr: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct RpPlanSummary {
    pub hop_count: u64,
    pub hop_length_km: f64,
    pub total_energy_joule: f64,
    pub total_delay_sec: f64,
    pub open_distance_km: f64,
}

/// Channel and hardware constants.
pub struct RpEnvironment(Environment);

/// Fitted bandwidth and power laws for one target SNR.
pub struct RpModel(FitModel);

/// Relay plan produced by [`rp_plan_link`].
pub struct RpPlan(planner::DeploymentPlan);

/// Memoized numerical link budget. Safe to share across threads.
pub struct RpExactModel(ExactModel);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

enum Failure {
    Null(&'static str),
    Core(Error),
    Buffer(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> RpStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RpStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            set_error(format!("null pointer: {name}"));
            RpStatus::NullPointer
        }
        Ok(Err(Failure::Buffer(need))) => {
            set_error(format!("buffer too small: {need} elements required"));
            RpStatus::BufferTooSmall
        }
        Ok(Err(Failure::Core(e))) => {
            let status = match e {
                Error::Domain { .. } => RpStatus::Domain,
                Error::Validation(_) => RpStatus::Validation,
                Error::Config(_) => RpStatus::Config,
                _ => RpStatus::Numeric,
            };
            set_error(e.to_string());
            status
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            RpStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn put<T>(p: *mut T, name: &'static str, v: T) -> Result<(), Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    p.write(v);
    Ok(())
}

fn boxed<T>(v: T) -> *mut T {
    Box::into_raw(Box::new(v))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

fn spec(s: &RpLinkSpec) -> Result<planner::LinkSpec, Failure> {
    Ok(planner::LinkSpec::new(s.l_km, s.snr0_db, s.p_r_w, s.packet_bits, s.alpha)?)
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn rp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rp_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => panic!("version string"),
    };
    VERSION.as_ptr()
}

/// Link spec with the default packet size and spreading-loss alpha.
#[no_mangle]
pub extern "C" fn rp_link_spec_default(l_km: f64, snr0_db: f64, p_r_w: f64) -> RpLinkSpec {
    RpLinkSpec {
        l_km,
        snr0_db,
        p_r_w,
        packet_bits: planner::DEFAULT_PACKET_BITS,
        alpha: 1.0,
    }
}

// ---- environment ----

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rp_environment_new(
    k: f64,
    s: f64,
    w: f64,
    c: f64,
    eta: f64,
    out: *mut *mut RpEnvironment,
) -> RpStatus {
    guard(|| {
        let env = Environment::new(k, s, w, c, eta)?;
        put(out, "out", boxed(RpEnvironment(env)))
    })
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rp_environment_default(out: *mut *mut RpEnvironment) -> RpStatus {
    guard(|| put(out, "out", boxed(RpEnvironment(Environment::default()))))
}

/// # Safety
/// `env` must be NULL or a handle from `rp_environment_*`, freed once.
#[no_mangle]
pub unsafe extern "C" fn rp_environment_free(env: *mut RpEnvironment) {
    free(env)
}

// ---- channel ----

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn rp_absorption_db_per_km(f_khz: f64, out: *mut f64) -> RpStatus {
    guard(|| put(out, "out", relay_planner::acoustics::absorption_db_per_km(f_khz)?))
}

/// # Safety
/// `env` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rp_attenuation_noise_product_db(
    env: *const RpEnvironment,
    l_km: f64,
    f_khz: f64,
    out: *mut f64,
) -> RpStatus {
    guard(|| {
        let env = get(env, "env")?;
        put(out, "out", relay_planner::acoustics::attenuation_noise_product_db(l_km, f_khz, &env.0)?)
    })
}

/// Optimal frequency, 3-dB band and required power for one hop.
///
/// # Safety
/// `env` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rp_hop_budget(env: *const RpEnvironment, l_km: f64, out: *mut RpHopBudget) -> RpStatus {
    guard(|| {
        let env = get(env, "env")?;
        let h = LinkBudget::new(env.0).hop_budget(l_km)?;
        put(
            out,
            "out",
            RpHopBudget {
                f0_khz: h.band.f0_khz,
                f_lo_khz: h.band.f_lo_khz,
                f_hi_khz: h.band.f_hi_khz,
                width_khz: h.band.width_khz,
                acoustic_power_unit_snr: h.acoustic_power_unit_snr,
            },
        )
    })
}

/// Electrical transmit power in watts needed to reach `snr0_db` over `l_km`.
///
/// # Safety
/// `env` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rp_transmit_power_w(
    env: *const RpEnvironment,
    l_km: f64,
    snr0_db: f64,
    out: *mut f64,
) -> RpStatus {
    guard(|| {
        let env = get(env, "env")?;
        put(out, "out", LinkBudget::new(env.0).required_transmit_power_w(l_km, snr0_db)?)
    })
}

// ---- models ----

/// Model with the published fit parameters.
///
/// # Safety
/// `env` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rp_model_published(
    env: *const RpEnvironment,
    snr0_db: f64,
    out: *mut *mut RpModel,
) -> RpStatus {
    guard(|| {
        let env = get(env, "env")?;
        if !snr0_db.is_finite() {
            return Err(Error::Domain {
                name: "snr0_db",
                value: snr0_db,
                expected: "must be finite",
            }
            .into());
        }
        put(out, "out", boxed(RpModel(FitModel::published(snr0_db, &env.0))))
    })
}

/// Fits a model to the numerical link budget. When `distances` is NULL the
/// default log-spaced grid over 1..100 km is used. Range violations are
/// reported as `Validation` and no handle is returned.
///
/// # Safety
/// `env` and `out` must be valid pointers; `distances` must be NULL or point
/// to `count` values.
#[no_mangle]
pub unsafe extern "C" fn rp_model_fit(
    env: *const RpEnvironment,
    snr0_db: f64,
    distances: *const f64,
    count: usize,
    out: *mut *mut RpModel,
) -> RpStatus {
    guard(|| {
        let env = get(env, "env")?;
        let grid = if distances.is_null() {
            fitmodels::default_fit_distances()
        } else {
            std::slice::from_raw_parts(distances, count).to_vec()
        };
        let model = fitmodels::fit_models(&LinkBudget::new(env.0), &grid, &[snr0_db])?.remove(0);
        model.validate()?;
        put(out, "out", boxed(RpModel(model)))
    })
}

/// Model from explicit parameters.
///
/// # Safety
/// `params` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rp_model_from_params(params: *const RpModelParams, out: *mut *mut RpModel) -> RpStatus {
    guard(|| {
        let p = get(params, "params")?;
        let model = FitModel {
            omega: p.omega,
            lambda: p.lambda,
            delta: p.delta,
            psi: p.psi,
            gamma: p.gamma,
            snr0_db: p.snr0_db,
        };
        model.validate()?;
        put(out, "out", boxed(RpModel(model)))
    })
}

/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rp_model_params(model: *const RpModel, out: *mut RpModelParams) -> RpStatus {
    guard(|| {
        let m = &get(model, "model")?.0;
        put(
            out,
            "out",
            RpModelParams {
                omega: m.omega,
                lambda: m.lambda,
                psi: m.psi,
                gamma: m.gamma,
                delta: m.delta,
                snr0_db: m.snr0_db,
            },
        )
    })
}

/// # Safety
/// `model` must be NULL or a handle from `rp_model_*`, freed once.
#[no_mangle]
pub unsafe extern "C" fn rp_model_free(model: *mut RpModel) {
    free(model)
}

// ---- planner ----

/// Distance above which one midpoint relay saves energy.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rp_open_distance(model: *const RpModel, p_r_w: f64, out: *mut f64) -> RpStatus {
    guard(|| {
        let m = get(model, "model")?;
        put(out, "out", planner::open_distance(&m.0, p_r_w)?)
    })
}

/// # Safety
/// `model`, `t1_km` and `t2_km` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rp_thresholds(
    model: *const RpModel,
    p_r_w: f64,
    t1_km: *mut f64,
    t2_km: *mut f64,
) -> RpStatus {
    guard(|| {
        let m = get(model, "model")?;
        let t = planner::thresholds(&m.0, p_r_w)?;
        put(t1_km, "t1_km", t.t1_km)?;
        put(t2_km, "t2_km", t.t2_km)
    })
}

/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rp_classify(model: *const RpModel, l_km: f64, p_r_w: f64, out: *mut RpCase) -> RpStatus {
    guard(|| {
        let m = get(model, "model")?;
        let c = match planner::classify_case(l_km, &m.0, p_r_w)?.label {
            planner::CaseLabel::DirectConcave => RpCase::DirectConcave,
            planner::CaseLabel::DirectMixed => RpCase::DirectMixed,
            planner::CaseLabel::RelayOptimal => RpCase::RelayOptimal,
        };
        put(out, "out", c)
    })
}

/// Energy in joules to send one packet directly.
///
/// # Safety
/// `model`, `spec` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rp_direct_energy(model: *const RpModel, spec: *const RpLinkSpec, out: *mut f64) -> RpStatus {
    guard(|| {
        let m = get(model, "model")?;
        let s = self::spec(get(spec, "spec")?)?;
        put(out, "out", planner::direct_energy(&s, &m.0)?)
    })
}

/// Energy in joules with one relay at `x_km`, strictly inside the link.
///
/// # Safety
/// `model`, `spec` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rp_relay_energy(
    model: *const RpModel,
    spec: *const RpLinkSpec,
    x_km: f64,
    out: *mut f64,
) -> RpStatus {
    guard(|| {
        let m = get(model, "model")?;
        let s = self::spec(get(spec, "spec")?)?;
        put(out, "out", planner::relay_energy(x_km, &s, &m.0)?)
    })
}

/// # Safety
/// `model`, `env`, `spec` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rp_direct_delay(
    model: *const RpModel,
    env: *const RpEnvironment,
    spec: *const RpLinkSpec,
    out: *mut f64,
) -> RpStatus {
    guard(|| {
        let m = get(model, "model")?;
        let env = get(env, "env")?;
        let s = self::spec(get(spec, "spec")?)?;
        put(out, "out", planner::direct_delay(&s, &m.0, &env.0)?)
    })
}

/// # Safety
/// `model`, `env`, `spec` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rp_relay_delay(
    model: *const RpModel,
    env: *const RpEnvironment,
    spec: *const RpLinkSpec,
    x_km: f64,
    out: *mut f64,
) -> RpStatus {
    guard(|| {
        let m = get(model, "model")?;
        let env = get(env, "env")?;
        let s = self::spec(get(spec, "spec")?)?;
        put(out, "out", planner::relay_delay(x_km, &s, &m.0, &env.0)?)
    })
}

/// Equal-hop relay plan for the link.
///
/// # Safety
/// `model`, `env`, `spec` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rp_plan_link(
    model: *const RpModel,
    env: *const RpEnvironment,
    spec: *const RpLinkSpec,
    out: *mut *mut RpPlan,
) -> RpStatus {
    guard(|| {
        let m = get(model, "model")?;
        let env = get(env, "env")?;
        let s = self::spec(get(spec, "spec")?)?;
        put(out, "out", boxed(RpPlan(planner::plan_link(&s, &m.0, &env.0)?)))
    })
}

/// # Safety
/// `plan` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rp_plan_summary(plan: *const RpPlan, out: *mut RpPlanSummary) -> RpStatus {
    guard(|| {
        let p = &get(plan, "plan")?.0;
        put(
            out,
            "out",
            RpPlanSummary {
                hop_count: p.hop_count,
                hop_length_km: p.hop_length_km,
                total_energy_joule: p.total_energy_joule,
                total_delay_sec: p.total_delay_sec,
                open_distance_km: p.open_distance_km,
            },
        )
    })
}

/// Copies relay positions (km from the source) into `buf`. `written`
/// always receives the number of relays; if `capacity` is too small nothing
/// is copied and `BufferTooSmall` is returned. `buf` may be NULL when
/// `capacity` is 0.
///
/// # Safety
/// `plan` and `written` must be valid pointers; `buf` must hold `capacity`
/// values.
#[no_mangle]
pub unsafe extern "C" fn rp_plan_relay_positions(
    plan: *const RpPlan,
    buf: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> RpStatus {
    guard(|| {
        let xs = &get(plan, "plan")?.0.relay_positions;
        put(written, "written", xs.len())?;
        if capacity < xs.len() {
            return Err(Failure::Buffer(xs.len()));
        }
        if !xs.is_empty() {
            if buf.is_null() {
                return Err(Failure::Null("buf"));
            }
            ptr::copy_nonoverlapping(xs.as_ptr(), buf, xs.len());
        }
        Ok(())
    })
}

/// # Safety
/// `plan` must be NULL or a handle from `rp_plan_link`, freed once.
#[no_mangle]
pub unsafe extern "C" fn rp_plan_free(plan: *mut RpPlan) {
    free(plan)
}

// ---- numerical oracle ----

/// # Safety
/// `env` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rp_exact_model_new(env: *const RpEnvironment, out: *mut *mut RpExactModel) -> RpStatus {
    guard(|| {
        let env = get(env, "env")?;
        put(out, "out", boxed(RpExactModel(ExactModel::new(env.0)?)))
    })
}

/// Energy with the numerical link budget; `x_km` of 0 or `l_km` means direct.
///
/// # Safety
/// `model`, `spec` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rp_exact_energy(
    model: *const RpExactModel,
    spec: *const RpLinkSpec,
    x_km: f64,
    out: *mut f64,
) -> RpStatus {
    guard(|| {
        let m = get(model, "model")?;
        let s = self::spec(get(spec, "spec")?)?;
        put(out, "out", m.0.energy(x_km, &s)?)
    })
}

/// Grid minimizer of the numerical energy over relay positions. A
/// non-positive `step_km` selects the default of `l_km / 400`.
///
/// # Safety
/// `model`, `spec`, `best_x_km` and `best_energy_joule` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rp_exact_argmin(
    model: *const RpExactModel,
    spec: *const RpLinkSpec,
    step_km: f64,
    best_x_km: *mut f64,
    best_energy_joule: *mut f64,
) -> RpStatus {
    guard(|| {
        let m = get(model, "model")?;
        let s = self::spec(get(spec, "spec")?)?;
        let step = if step_km > 0.0 { step_km } else { oracle::default_step(s.l_km) };
        let r = m.0.grid_argmin_relay(&s, step)?;
        put(best_x_km, "best_x_km", r.best_x)?;
        put(best_energy_joule, "best_energy_joule", r.best_energy_joule)
    })
}

/// Turning point of the numerical model: the shortest link on a
/// `0, l_step_km, ..., l_max_km` grid where a relay saves energy.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn rp_exact_open_distance(
    model: *const RpExactModel,
    snr0_db: f64,
    p_r_w: f64,
    l_step_km: f64,
    l_max_km: f64,
    x_step_km: f64,
    out: *mut f64,
) -> RpStatus {
    guard(|| {
        let m = get(model, "model")?;
        let grid = oracle::distance_grid(l_step_km, l_max_km)?;
        let sweep = TurningPointSweep {
            x_step_km,
            ..TurningPointSweep::default()
        };
        put(out, "out", m.0.realistic_open_distance(snr0_db, p_r_w, &grid, &sweep)?)
    })
}

/// # Safety
/// `model` must be NULL or a handle from `rp_exact_model_new`, freed once.
#[no_mangle]
pub unsafe extern "C" fn rp_exact_model_free(model: *mut RpExactModel) {
    free(model)
}
