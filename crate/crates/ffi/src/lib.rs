//! C interface to `exprsynth`.
//!
//! Objects are opaque handles created by `exs_*` constructors and released
//! with the matching `_free` function. Every fallible call returns an
//! [`ExsStatus`]; on failure [`exs_last_error`] describes what went wrong on
//! the calling thread. Strings and byte buffers returned through out
//! parameters are owned by the caller and freed with [`exs_string_free`] and
//! [`exs_bytes_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use exprsynth::io::params_file::{read_params, write_params_binary, write_params_text};
use exprsynth::io::request::{extract_document, render_score, RenderRequest};
use exprsynth::io::score_file::{parse_score, Score};
use exprsynth::io::wav::{write_wav, SampleFormat};
use exprsynth::metrics::{multi_scale_spectral_loss, SpectralLossConfig};
use exprsynth::performance::{generate_synth_params, PerformanceModelConfig};
use exprsynth::score::NormalizationSpec;
use exprsynth::synth::{synthesize, AudioBuffer, SynthParams};
use exprsynth::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExsStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// Input could not be parsed (syntax, schema or file format).
    ParseError = 3,
    /// Input parsed but violates a semantic rule (overlapping notes, lengths).
    ValidationError = 4,
    /// An argument value is out of its allowed range.
    InvalidArgument = 5,
    /// Reading or writing a file failed.
    IoError = 6,
    /// An internal error; the library caught a panic.
    Internal = 7,
}

/// A parsed, validated score.
pub struct ExsScore {
    inner: Score,
}

/// Frame-wise synthesis parameters.
pub struct ExsParams {
    inner: SynthParams,
}

/// Mono audio at 16 kHz.
pub struct ExsAudio {
    inner: AudioBuffer,
    /// Samples as f32 for `exs_audio_samples`.
    samples_f32: Vec<f32>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ExsStatus {
    match e {
        Error::Format(_) => ExsStatus::ParseError,
        Error::Io(_) => ExsStatus::IoError,
        e if e.is_semantic() => ExsStatus::ValidationError,
        _ => ExsStatus::InvalidArgument,
    }
}

struct Fail(ExsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> ExsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            ExsStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error".into());
            ExsStatus::Internal
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(ExsStatus::NullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(ExsStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(ExsStatus::NullArgument, format!("{name} is null")))
}

fn out_arg<T>(p: *mut T, name: &str) -> Result<(), Fail> {
    if p.is_null() {
        Err(Fail(ExsStatus::NullArgument, format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn audio_handle(inner: AudioBuffer) -> *mut ExsAudio {
    let samples_f32 = inner.samples.iter().map(|&s| s as f32).collect();
    Box::into_raw(Box::new(ExsAudio { inner, samples_f32 }))
}

fn bytes_out(bytes: Vec<u8>, out: *mut *mut u8, out_len: *mut usize) {
    let boxed = bytes.into_boxed_slice();
    let len = boxed.len();
    unsafe {
        *out_len = len;
        *out = Box::into_raw(boxed) as *mut u8;
    }
}

fn string_out(s: String, out: *mut *mut c_char) -> Result<(), Fail> {
    let c = CString::new(s).map_err(|_| Fail(ExsStatus::Internal, "string contains nul".into()))?;
    unsafe { *out = c.into_raw() };
    Ok(())
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next `exs_*` call on the same thread.
#[no_mangle]
pub extern "C" fn exs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn exs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Parses a JSON score document.
#[no_mangle]
pub unsafe extern "C" fn exs_score_parse(
    json: *const c_char,
    out: *mut *mut ExsScore,
) -> ExsStatus {
    guard(|| {
        out_arg(out, "out")?;
        let score = parse_score(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(ExsScore { inner: score }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn exs_score_note_count(score: *const ExsScore) -> usize {
    score.as_ref().map_or(0, |s| s.inner.sequence.len())
}

#[no_mangle]
pub unsafe extern "C" fn exs_score_total_frames(score: *const ExsScore) -> usize {
    score.as_ref().map_or(0, |s| s.inner.sequence.total_frames)
}

#[no_mangle]
pub unsafe extern "C" fn exs_score_free(score: *mut ExsScore) {
    if !score.is_null() {
        drop(Box::from_raw(score));
    }
}

/// Generates synthesis parameters for `score`. `config_json` may be null or a
/// JSON object of performance-model overrides. `out_clamps` (nullable)
/// receives the number of controls the model could not realise exactly.
#[no_mangle]
pub unsafe extern "C" fn exs_generate(
    score: *const ExsScore,
    config_json: *const c_char,
    out: *mut *mut ExsParams,
    out_clamps: *mut usize,
) -> ExsStatus {
    guard(|| {
        out_arg(out, "out")?;
        let score = &ref_arg(score, "score")?.inner;
        let cfg: PerformanceModelConfig = if config_json.is_null() {
            PerformanceModelConfig::default()
        } else {
            exprsynth::io::score_file::from_json_with_path(str_arg(config_json, "config_json")?)?
        };
        cfg.validate()?;
        let spec = NormalizationSpec::default();
        let expr = score.resolved_expression(&cfg.default_expression);
        let (params, report) = generate_synth_params(&score.sequence, &expr, &cfg, &spec)?;
        if !out_clamps.is_null() {
            *out_clamps = report.clamps.len();
        }
        *out = Box::into_raw(Box::new(ExsParams { inner: params }));
        Ok(())
    })
}

/// Reads a parameter dump (binary or JSON text).
#[no_mangle]
pub unsafe extern "C" fn exs_params_read(
    data: *const u8,
    len: usize,
    out: *mut *mut ExsParams,
) -> ExsStatus {
    guard(|| {
        out_arg(out, "out")?;
        if data.is_null() {
            return Err(Fail(ExsStatus::NullArgument, "data is null".into()));
        }
        let params = read_params(std::slice::from_raw_parts(data, len))?;
        *out = Box::into_raw(Box::new(ExsParams { inner: params }));
        Ok(())
    })
}

/// Serializes parameters; `text` non-zero selects JSON, otherwise binary.
#[no_mangle]
pub unsafe extern "C" fn exs_params_write(
    params: *const ExsParams,
    text: c_int,
    out: *mut *mut u8,
    out_len: *mut usize,
) -> ExsStatus {
    guard(|| {
        out_arg(out, "out")?;
        out_arg(out_len, "out_len")?;
        let p = &ref_arg(params, "params")?.inner;
        let bytes = if text != 0 {
            write_params_text(p).into_bytes()
        } else {
            write_params_binary(p)
        };
        bytes_out(bytes, out, out_len);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn exs_params_frame_count(params: *const ExsParams) -> usize {
    params.as_ref().map_or(0, |p| p.inner.n_frames())
}

#[no_mangle]
pub unsafe extern "C" fn exs_params_free(params: *mut ExsParams) {
    if !params.is_null() {
        drop(Box::from_raw(params));
    }
}

/// Renders parameters to audio without reverb.
#[no_mangle]
pub unsafe extern "C" fn exs_synthesize(
    params: *const ExsParams,
    noise_seed: u64,
    out: *mut *mut ExsAudio,
) -> ExsStatus {
    guard(|| {
        out_arg(out, "out")?;
        let p = &ref_arg(params, "params")?.inner;
        *out = audio_handle(synthesize(p, noise_seed, None)?);
        Ok(())
    })
}

/// Renders a full JSON render request (or bare score), the same operation the
/// command line and HTTP service perform. A reverb path in the request is read
/// from the local filesystem.
#[no_mangle]
pub unsafe extern "C" fn exs_render_request(
    request_json: *const c_char,
    out: *mut *mut ExsAudio,
) -> ExsStatus {
    guard(|| {
        out_arg(out, "out")?;
        let req = RenderRequest::parse(str_arg(request_json, "request_json")?)?;
        *out = audio_handle(req.render_local()?.audio);
        Ok(())
    })
}

/// Renders a parsed score with default settings.
#[no_mangle]
pub unsafe extern "C" fn exs_render_score(
    score: *const ExsScore,
    noise_seed: u64,
    out: *mut *mut ExsAudio,
) -> ExsStatus {
    guard(|| {
        out_arg(out, "out")?;
        let score = &ref_arg(score, "score")?.inner;
        let r = render_score(
            score,
            &PerformanceModelConfig::default(),
            &NormalizationSpec::default(),
            noise_seed,
            None,
        )?;
        *out = audio_handle(r.audio);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn exs_audio_len(audio: *const ExsAudio) -> usize {
    audio.as_ref().map_or(0, |a| a.inner.len())
}

#[no_mangle]
pub unsafe extern "C" fn exs_audio_sample_rate(audio: *const ExsAudio) -> u32 {
    audio.as_ref().map_or(0, |a| a.inner.sample_rate)
}

/// Borrowed pointer to the samples as f32, valid while `audio` lives.
#[no_mangle]
pub unsafe extern "C" fn exs_audio_samples(audio: *const ExsAudio) -> *const f32 {
    audio
        .as_ref()
        .map_or(ptr::null(), |a| a.samples_f32.as_ptr())
}

/// Encodes audio as WAV; `float32` non-zero selects 32-bit float samples.
#[no_mangle]
pub unsafe extern "C" fn exs_audio_to_wav(
    audio: *const ExsAudio,
    float32: c_int,
    out: *mut *mut u8,
    out_len: *mut usize,
) -> ExsStatus {
    guard(|| {
        out_arg(out, "out")?;
        out_arg(out_len, "out_len")?;
        let a = &ref_arg(audio, "audio")?.inner;
        let format = if float32 != 0 {
            SampleFormat::Float32
        } else {
            SampleFormat::Pcm16
        };
        bytes_out(write_wav(a, format), out, out_len);
        Ok(())
    })
}

/// Writes 16-bit PCM WAV to `path`.
#[no_mangle]
pub unsafe extern "C" fn exs_audio_write_wav(
    audio: *const ExsAudio,
    path: *const c_char,
) -> ExsStatus {
    guard(|| {
        let a = &ref_arg(audio, "audio")?.inner;
        let path = str_arg(path, "path")?;
        std::fs::write(path, write_wav(a, SampleFormat::Pcm16))
            .map_err(|e| Fail(ExsStatus::IoError, format!("{path}: {e}")))
    })
}

#[no_mangle]
pub unsafe extern "C" fn exs_audio_free(audio: *mut ExsAudio) {
    if !audio.is_null() {
        drop(Box::from_raw(audio));
    }
}

/// Extracts per-note expression; `out_json` receives a score document whose
/// notes carry the measured controls.
#[no_mangle]
pub unsafe extern "C" fn exs_extract_json(
    params: *const ExsParams,
    score: *const ExsScore,
    out_json: *mut *mut c_char,
) -> ExsStatus {
    guard(|| {
        out_arg(out_json, "out_json")?;
        let p = &ref_arg(params, "params")?.inner;
        let s = &ref_arg(score, "score")?.inner;
        let doc = extract_document(p, s, &NormalizationSpec::default())?;
        string_out(
            serde_json::to_string(&doc).expect("document serializes"),
            out_json,
        )
    })
}

/// Multi-scale spectral loss with the default FFT sizes.
#[no_mangle]
pub unsafe extern "C" fn exs_spectral_loss(
    a: *const ExsAudio,
    b: *const ExsAudio,
    out: *mut f64,
) -> ExsStatus {
    guard(|| {
        out_arg(out, "out")?;
        let a = &ref_arg(a, "a")?.inner;
        let b = &ref_arg(b, "b")?.inner;
        *out = multi_scale_spectral_loss(a, b, &SpectralLossConfig::default())?.spectral_loss;
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn exs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub unsafe extern "C" fn exs_bytes_free(data: *mut u8, len: usize) {
    if !data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(data, len)));
    }
}
