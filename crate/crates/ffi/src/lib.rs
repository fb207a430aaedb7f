//! C ABI over `franson-core`.
//!
//! Every fallible function returns a [`FransonStatus`]. On failure a
//! description is kept per thread and can be read with
//! [`franson_last_error_message`]. Handles are opaque and must be released
//! with their matching `_free` function. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use franson_core::bell::{self, ChshSearch, ChshSettings};
use franson_core::coincidence::FransonModel as CoreModel;
use franson_core::io::{self as cio, Command, Format};
use franson_core::model::{self, Deformation, ModeCoefficients, UnitSystem};
use franson_core::montecarlo::{self, PhaseParams, Simulator};
use franson_core::num_complex::Complex64;
use franson_core::perturbation::{self, LevelMap, ModelSystem};
use franson_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FransonStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ValidationFailed = 3,
    NonPerturbative = 4,
    UndefinedCorrelation = 5,
    Io = 6,
    MalformedConfig = 7,
    Internal = 8,
}

impl From<&Error> for FransonStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NonPerturbative { .. } => FransonStatus::NonPerturbative,
            Error::UndefinedCorrelation => FransonStatus::UndefinedCorrelation,
            Error::Validation(_) => FransonStatus::ValidationFailed,
            Error::Io { .. } => FransonStatus::Io,
            Error::Config(_) => FransonStatus::MalformedConfig,
            Error::Serialize(_) => FransonStatus::Internal,
            _ => FransonStatus::InvalidArgument,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Runs `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), FfiError>) -> FransonStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FransonStatus::Ok,
        Ok(Err(FfiError::Null(what))) => {
            set_error(format!("null pointer: {what}"));
            FransonStatus::NullPointer
        }
        Ok(Err(FfiError::Core(e))) => {
            set_error(e.to_string());
            FransonStatus::from(&e)
        }
        Err(_) => {
            set_error("internal panic".into());
            FransonStatus::Internal
        }
    }
}

enum FfiError {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for FfiError {
    fn from(e: Error) -> Self {
        FfiError::Core(e)
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, FfiError> {
    p.as_mut().ok_or(FfiError::Null(what))
}

unsafe fn in_ref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, FfiError> {
    p.as_ref().ok_or(FfiError::Null(what))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &'static str) -> Result<&'a [T], FfiError> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(FfiError::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message for the last failure on this thread, or NULL. Valid until the
/// next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn franson_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn franson_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FransonComplex {
    pub re: f64,
    pub im: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FransonSystemKind {
    HarmonicOscillator = 0,
    InfiniteWell = 1,
}

/// `param` is ω for the oscillator and the width L for the well.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FransonSystem {
    pub kind: FransonSystemKind,
    pub mass: f64,
    pub param: f64,
}

impl FransonSystem {
    fn to_core(self) -> Result<ModelSystem, Error> {
        match self.kind {
            FransonSystemKind::HarmonicOscillator => ModelSystem::harmonic_oscillator(self.mass, self.param),
            FransonSystemKind::InfiniteWell => ModelSystem::infinite_well(self.mass, self.param),
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FransonCascade {
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FransonInterferometer {
    pub delta_t: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub window: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FransonPhaseParams {
    pub delta_e: f64,
    pub delta_e_p: f64,
    pub beta: f64,
    pub hbar: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FransonCountRecord {
    pub n_pairs: u64,
    pub n_coincident: u64,
    pub n_accidental: u64,
    pub n_cross_rejected: u64,
    pub n_late: u64,
    pub n_singles: u64,
    pub rate_estimate: f64,
    pub std_error: f64,
    pub seed: u64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FransonChshSettings {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FransonChshResult {
    pub s_value: f64,
    pub settings: FransonChshSettings,
    /// E(a,b), E(a,b′), E(a′,b), E(a′,b′).
    pub correlations: [f64; 4],
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FransonPhase {
    pub phi1_prime: f64,
    pub phi2_prime: f64,
    pub total: f64,
}

impl From<bell::ChshResult> for FransonChshResult {
    fn from(r: bell::ChshResult) -> Self {
        let s = r.settings;
        Self {
            s_value: r.s_value,
            settings: FransonChshSettings { a: s.a, a_prime: s.a_prime, b: s.b, b_prime: s.b_prime },
            correlations: r.correlations,
        }
    }
}

unsafe fn modes_from(
    c: *const FransonComplex,
    c_prime: *const FransonComplex,
    n_modes: usize,
) -> Result<ModeCoefficients, FfiError> {
    let conv = |v: &[FransonComplex]| v.iter().map(|z| Complex64::new(z.re, z.im)).collect();
    let c = slice(c, n_modes, "c")?;
    let cp = slice(c_prime, n_modes, "c_prime")?;
    Ok(ModeCoefficients::new(conv(c), conv(cp))?)
}

/// Analytic coincidence-rate model.
pub struct FransonModel(CoreModel);

/// Creates a model with zero interferometer phases and full visibility.
///
/// # Safety
/// `c` and `c_prime` must point to `n_modes` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn franson_model_new(
    c: *const FransonComplex,
    c_prime: *const FransonComplex,
    n_modes: usize,
    phase: *const FransonPhaseParams,
    delta_t: f64,
    out: *mut *mut FransonModel,
) -> FransonStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let p = in_ref(phase, "phase")?;
        let modes = modes_from(c, c_prime, n_modes)?;
        model::GupParams::new(p.beta)?;
        UnitSystem::new(p.hbar)?;
        for (v, name) in [(p.delta_e, "delta_e"), (p.delta_e_p, "delta_e_p"), (delta_t, "delta_t")] {
            if !v.is_finite() {
                return Err(Error::NonFinite(name).into());
            }
        }
        let m = CoreModel::ideal(&modes, p.beta, p.delta_e, p.delta_e_p, delta_t, p.hbar);
        *out = Box::into_raw(Box::new(FransonModel(m)));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`franson_model_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn franson_model_free(model: *mut FransonModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Applies the finite-linewidth visibility exp(−ΔT·(1/τ1 + 1/τ3)).
///
/// # Safety
/// `model` and `cascade` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn franson_model_set_damping(
    model: *mut FransonModel,
    cascade: *const FransonCascade,
) -> FransonStatus {
    guard(|| {
        let m = out_ref(model, "model")?;
        let c = in_ref(cascade, "cascade")?;
        m.0 = m.0.with_damping(&core_cascade(c));
        Ok(())
    })
}

/// Coincidence rate at phases (φ1, φ2).
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn franson_model_rate(
    model: *const FransonModel,
    phi1: f64,
    phi2: f64,
    out: *mut f64,
) -> FransonStatus {
    guard(|| {
        let m = in_ref(model, "model")?;
        let out = out_ref(out, "out")?;
        *out = m.0.with_phases(phi1, phi2).rate()?;
        Ok(())
    })
}

/// Phase decomposition at phases (φ1, φ2).
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn franson_model_phase(
    model: *const FransonModel,
    phi1: f64,
    phi2: f64,
    out: *mut FransonPhase,
) -> FransonStatus {
    guard(|| {
        let m = in_ref(model, "model")?;
        let out = out_ref(out, "out")?;
        let p = m.0.with_phases(phi1, phi2).phase()?;
        *out = FransonPhase { phi1_prime: p.phi1_prime, phi2_prime: p.phi2_prime, total: p.total };
        Ok(())
    })
}

/// Fringe shift βΔE_pΔT/ℏ.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn franson_model_fringe_shift(model: *const FransonModel, out: *mut f64) -> FransonStatus {
    guard(|| {
        let m = in_ref(model, "model")?;
        *out_ref(out, "out")? = m.0.fringe_shift();
        Ok(())
    })
}

/// CHSH value at fixed settings.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn franson_model_chsh(
    model: *const FransonModel,
    settings: *const FransonChshSettings,
    out: *mut FransonChshResult,
) -> FransonStatus {
    guard(|| {
        let m = in_ref(model, "model")?;
        let s = in_ref(settings, "settings")?;
        let out = out_ref(out, "out")?;
        *out = bell::chsh(&m.0, ChshSettings::new(s.a, s.a_prime, s.b, s.b_prime))?.into();
        Ok(())
    })
}

/// Maximum CHSH value over all settings. `resolution` = 0 selects the defaults.
///
/// # Safety
/// `model` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn franson_model_max_chsh(
    model: *const FransonModel,
    resolution: usize,
    refinements: usize,
    out: *mut FransonChshResult,
) -> FransonStatus {
    guard(|| {
        let m = in_ref(model, "model")?;
        let out = out_ref(out, "out")?;
        let search = if resolution == 0 { ChshSearch::default() } else { ChshSearch { resolution, refinements } };
        *out = bell::max_chsh(&m.0, search)?.into();
        Ok(())
    })
}

fn core_cascade(c: &FransonCascade) -> model::CascadeSpec {
    model::CascadeSpec { e1: c.e1, e2: c.e2, e3: c.e3, tau1: c.tau1, tau2: c.tau2, tau3: c.tau3 }
}

fn core_ifc(i: &FransonInterferometer) -> model::InterferometerConfig {
    model::InterferometerConfig {
        delta_t: i.delta_t,
        phi1: i.phi1,
        phi2: i.phi2,
        eta1: i.eta1,
        eta2: i.eta2,
        window: i.window,
    }
}

/// Event-level simulation of `n_pairs` pairs.
///
/// # Safety
/// Struct pointers must be valid; `c` and `c_prime` must hold `n_modes` elements.
#[no_mangle]
pub unsafe extern "C" fn franson_simulate_pairs(
    n_pairs: u64,
    cascade: *const FransonCascade,
    interferometer: *const FransonInterferometer,
    phase: *const FransonPhaseParams,
    c: *const FransonComplex,
    c_prime: *const FransonComplex,
    n_modes: usize,
    seed: u64,
    out: *mut FransonCountRecord,
) -> FransonStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let cascade = core_cascade(in_ref(cascade, "cascade")?);
        let ifc = core_ifc(in_ref(interferometer, "interferometer")?);
        let p = in_ref(phase, "phase")?;
        let phase = PhaseParams { delta_e: p.delta_e, delta_e_p: p.delta_e_p, beta: p.beta, hbar: p.hbar };
        let modes = modes_from(c, c_prime, n_modes)?;
        let r = Simulator::new(&cascade, &ifc, &phase, &modes)?.run(n_pairs, seed)?;
        *out = FransonCountRecord {
            n_pairs: r.n_pairs,
            n_coincident: r.n_coincident,
            n_accidental: r.n_accidental,
            n_cross_rejected: r.n_cross_rejected,
            n_late: r.n_late,
            n_singles: r.n_singles,
            rate_estimate: r.rate_estimate,
            std_error: r.std_error,
            seed: r.seed,
        };
        Ok(())
    })
}

/// Share of coincidences from distinguishable paths.
#[no_mangle]
pub extern "C" fn franson_accidental_fraction(record: FransonCountRecord) -> f64 {
    let r = montecarlo::CountRecord {
        n_pairs: record.n_pairs,
        n_coincident: record.n_coincident,
        n_accidental: record.n_accidental,
        n_cross_rejected: record.n_cross_rejected,
        n_late: record.n_late,
        n_singles: record.n_singles,
        rate_estimate: record.rate_estimate,
        std_error: record.std_error,
        seed: record.seed,
    };
    montecarlo::accidental_fraction(&r)
}

/// Unperturbed level energy.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn franson_unperturbed_energy(
    system: FransonSystem,
    n: u32,
    hbar: f64,
    out: *mut f64,
) -> FransonStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = perturbation::unperturbed_energy(&system.to_core()?, n, &UnitSystem::new(hbar)?)?;
        Ok(())
    })
}

/// First-order coefficient ⟨n|p⁴|n⟩/m of the level shift.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn franson_perturbation_energy(
    system: FransonSystem,
    n: u32,
    hbar: f64,
    out: *mut f64,
) -> FransonStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let units = UnitSystem::new(hbar)?;
        *out = perturbation::perturbation_energy(&system.to_core()?, n, Deformation::QuadraticMomentum, &units)?;
        Ok(())
    })
}

/// ΔE = E(n1) − E(n3) and ΔE_p for a cascade n1 → n2 → n3.
///
/// # Safety
/// `delta_e` and `delta_e_p` must be writable.
#[no_mangle]
pub unsafe extern "C" fn franson_cascade_deltas(
    system: FransonSystem,
    n1: u32,
    n2: u32,
    n3: u32,
    hbar: f64,
    delta_e: *mut f64,
    delta_e_p: *mut f64,
) -> FransonStatus {
    guard(|| {
        let de = out_ref(delta_e, "delta_e")?;
        let dep = out_ref(delta_e_p, "delta_e_p")?;
        let units = UnitSystem::new(hbar)?;
        let levels = LevelMap { n1, n2, n3 };
        let (a, b) = perturbation::cascade_deltas(&system.to_core()?, &levels, Deformation::QuadraticMomentum, &units)?;
        *de = a;
        *dep = b;
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FransonCommand {
    Levels = 0,
    Rate = 1,
    Sweep = 2,
    Mc = 3,
    Chsh = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FransonFormat {
    Csv = 0,
    Json = 1,
}

/// Runs a subcommand on a TOML configuration file and returns the encoded
/// result envelope in `*out`, to be released with [`franson_string_free`].
/// A configuration that fails validation yields `ValidationFailed` with the
/// envelope still written unless `override_validation` is non-zero.
///
/// # Safety
/// `config_path` must be a NUL-terminated UTF-8 path; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn franson_run_config(
    config_path: *const c_char,
    command: FransonCommand,
    format: FransonFormat,
    override_validation: i32,
    out: *mut *mut c_char,
) -> FransonStatus {
    let mut failed_validation = false;
    let status = guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        if config_path.is_null() {
            return Err(FfiError::Null("config_path"));
        }
        let path = CStr::from_ptr(config_path)
            .to_str()
            .map_err(|_| Error::InvalidParameter("config path is not UTF-8".into()))?;
        let mut cfg = cio::load_config(&PathBuf::from(path))?;
        cio::apply_overrides(&mut cfg, None, override_validation != 0)?;
        let command = match command {
            FransonCommand::Levels => Command::Levels,
            FransonCommand::Rate => Command::Rate,
            FransonCommand::Sweep => Command::Sweep,
            FransonCommand::Mc => Command::Mc,
            FransonCommand::Chsh => Command::Chsh,
        };
        let format = match format {
            FransonFormat::Csv => Format::Csv,
            FransonFormat::Json => Format::Json,
        };
        let env = cio::build_envelope(command, cfg)?;
        failed_validation = env.payload.is_none();
        let text = env.encode(format)?;
        *out = CString::new(text).map_err(|e| Error::Serialize(e.to_string()))?.into_raw();
        Ok(())
    });
    if status == FransonStatus::Ok && failed_validation {
        set_error("configuration failed validation".into());
        return FransonStatus::ValidationFailed;
    }
    status
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn franson_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
