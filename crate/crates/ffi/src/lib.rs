//! C ABI over `unitkit`.
//!
//! Every fallible function returns a [`UkStatus`]; on failure a message is
//! available from [`uk_last_error_message`] on the same thread. Arrays are
//! passed as pointer + length and may be null when the length is 0. Objects
//! with internal state are opaque handles released with their `_free`
//! function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use unitkit::metrics::{self, EmbeddingPair, LengthPairs};
use unitkit::quantize;
use unitkit::{
    io, lengthreg, Codebook, ContinuousUnitSeq, DurationTable, Error, FeatureMatrix, OrigUnitSeq,
    RegulationMode,
};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UkStatus {
    Ok = 0,
    /// A required pointer was null.
    NullPointer = 1,
    /// Input failed validation (shapes, empty input, non-finite values, ...).
    InvalidInput = 2,
    /// The bounded regulator could not reach the target.
    Infeasible = 3,
    /// Reading or writing a file failed.
    Io = 4,
    /// A file or string was malformed.
    Format = 5,
    /// An output buffer was too small; the required size was written back.
    BufferTooSmall = 6,
    /// The library panicked. This is a bug.
    Panic = 7,
}

/// Length-control mode for [`uk_regulate`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UkMode {
    Bounded = 0,
    EarlyStop = 1,
    Unbounded = 2,
}

impl From<UkMode> for RegulationMode {
    fn from(m: UkMode) -> Self {
        match m {
            UkMode::Bounded => RegulationMode::Bounded,
            UkMode::EarlyStop => RegulationMode::EarlyStop,
            UkMode::Unbounded => RegulationMode::Unbounded,
        }
    }
}

/// A k-means codebook.
pub struct UkCodebook(Codebook);

/// A per-unit mean duration table.
pub struct UkDurationTable(DurationTable);

enum Failure {
    Null(&'static str),
    TooSmall { needed: usize, capacity: usize },
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type FfiResult<T = ()> = Result<T, Failure>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &Error) -> UkStatus {
    match e.root() {
        Error::Io(_) => UkStatus::Io,
        Error::Parse(_) | Error::Format(_) => UkStatus::Format,
        Error::InfeasibleAdjustment { .. } => UkStatus::Infeasible,
        _ => UkStatus::InvalidInput,
    }
}

fn guard(f: impl FnOnce() -> FfiResult) -> UkStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => UkStatus::Ok,
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("NullPointer: {what} is null"));
            UkStatus::NullPointer
        }
        Ok(Err(Failure::TooSmall { needed, capacity })) => {
            set_last_error(format!("BufferTooSmall: need {needed}, have {capacity}"));
            UkStatus::BufferTooSmall
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(format!("{}: {e}", e.kind()));
            status_of(&e)
        }
        Err(_) => {
            set_last_error("Panic: internal error".into());
            UkStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(p: *const T, n: usize, what: &'static str) -> FfiResult<&'a [T]> {
    if n == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts(p, n))
}

unsafe fn slice_mut<'a, T>(p: *mut T, n: usize, what: &'static str) -> FfiResult<&'a mut [T]> {
    if n == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(Failure::Null(what));
    }
    Ok(std::slice::from_raw_parts_mut(p, n))
}

unsafe fn out<'a, T>(p: *mut T, what: &'static str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn path<'a>(p: *const c_char) -> FfiResult<&'a Path> {
    if p.is_null() {
        return Err(Failure::Null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Error::InvalidArgument("path is not valid UTF-8".into()))?;
    Ok(Path::new(s))
}

/// Splits a flat buffer into consecutive pieces of the given lengths.
fn split<T: Clone>(flat: &[T], lens: &[usize]) -> FfiResult<Vec<Vec<T>>> {
    let total: usize = lens.iter().sum();
    if total != flat.len() {
        return Err(Error::LengthMismatch {
            left: total,
            right: flat.len(),
        }
        .into());
    }
    let mut rest = flat;
    Ok(lens
        .iter()
        .map(|&n| {
            let (head, tail) = rest.split_at(n);
            rest = tail;
            head.to_vec()
        })
        .collect())
}

fn length_pairs(pred: &[usize], refs: &[usize]) -> FfiResult<LengthPairs> {
    if pred.len() != refs.len() {
        return Err(Error::LengthMismatch {
            left: pred.len(),
            right: refs.len(),
        }
        .into());
    }
    Ok(LengthPairs::new(
        pred.iter().copied().zip(refs.iter().copied()).collect(),
    )?)
}

/// Message for the last failed call on this thread, or null if it
/// succeeded. The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn uk_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn uk_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Collapses `n` frame-level units into runs.
///
/// `out_units` and `out_durations` must hold `n` entries; the number of runs
/// is written to `out_len`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn uk_collapse(
    frames: *const u32,
    n: usize,
    out_units: *mut u32,
    out_durations: *mut usize,
    out_len: *mut usize,
) -> UkStatus {
    guard(|| {
        let z = ContinuousUnitSeq::new(slice(frames, n, "frames")?.to_vec());
        let out_len = out(out_len, "out_len")?;
        let (u, d) = unitkit::collapse(&z);
        slice_mut(out_units, n, "out_units")?[..u.len()].copy_from_slice(u.units());
        slice_mut(out_durations, n, "out_durations")?[..d.len()].copy_from_slice(&d);
        *out_len = u.len();
        Ok(())
    })
}

/// Expands `n` units by their durations into `out_frames` (capacity `cap`).
///
/// The frame count is written to `out_len`. If `cap` is too small nothing
/// is written to `out_frames`, `out_len` receives the required size and the call
/// returns `BufferTooSmall`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn uk_expand(
    units: *const u32,
    durations: *const usize,
    n: usize,
    out_frames: *mut u32,
    cap: usize,
    out_len: *mut usize,
) -> UkStatus {
    guard(|| {
        let u = OrigUnitSeq::new(slice(units, n, "units")?.to_vec())?;
        let d = slice(durations, n, "durations")?;
        let out_len = out(out_len, "out_len")?;
        let needed = d.iter().try_fold(0usize, |acc, &x| acc.checked_add(x));
        let needed = needed.ok_or_else(|| Error::InvalidArgument("durations overflow".into()))?;
        *out_len = needed;
        if needed > cap {
            return Err(Failure::TooSmall {
                needed,
                capacity: cap,
            });
        }
        let z = unitkit::expand(&u, d)?;
        slice_mut(out_frames, cap, "out_frames")?[..needed].copy_from_slice(z.units());
        Ok(())
    })
}

/// Rescales `n` predicted durations so they sum to `target`. `out_scaled` holds `n`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn uk_allocate_proportional(
    durations: *const f64,
    n: usize,
    target: usize,
    out_scaled: *mut f64,
) -> UkStatus {
    guard(|| {
        let scaled = lengthreg::allocate_proportional(slice(durations, n, "durations")?, target)?;
        slice_mut(out_scaled, n, "out_scaled")?.copy_from_slice(&scaled);
        Ok(())
    })
}

/// Rounds already-rescaled durations to integers summing exactly to `target`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn uk_integerize_bounded(
    scaled: *const f64,
    n: usize,
    target: usize,
    out_durations: *mut usize,
) -> UkStatus {
    guard(|| {
        let a = lengthreg::integerize_bounded(slice(scaled, n, "scaled")?, target)?;
        slice_mut(out_durations, n, "out_durations")?.copy_from_slice(a.durations());
        Ok(())
    })
}

/// Realizes `n` predicted durations under `mode`. `out_durations` holds `n` entries.
/// `target` is ignored for `Unbounded`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn uk_regulate(
    mode: UkMode,
    durations: *const f64,
    n: usize,
    target: usize,
    out_durations: *mut usize,
) -> UkStatus {
    guard(|| {
        let r = lengthreg::regulate(mode.into(), slice(durations, n, "durations")?, target)?;
        slice_mut(out_durations, n, "out_durations")?.copy_from_slice(&r);
        Ok(())
    })
}

/// Fits a k-means codebook on `rows` x `dims` row-major features.
///
/// On success `*out` owns a new handle; `out_wcss` may be null.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn uk_codebook_fit(
    features: *const f64,
    rows: usize,
    dims: usize,
    k: usize,
    max_iters: usize,
    seed: u64,
    out_wcss: *mut f64,
    out_codebook: *mut *mut UkCodebook,
) -> UkStatus {
    guard(|| {
        let out_codebook = out(out_codebook, "out_codebook")?;
        let len = rows
            .checked_mul(dims)
            .ok_or_else(|| Error::ShapeMismatch(format!("{rows} x {dims} overflows")))?;
        let x = FeatureMatrix::new(rows, dims, slice(features, len, "features")?.to_vec())?;
        let fit = quantize::kmeans_fit(&x, k, max_iters, seed)?;
        if let Some(w) = out_wcss.as_mut() {
            *w = fit.wcss();
        }
        *out_codebook = Box::into_raw(Box::new(UkCodebook(fit.codebook)));
        Ok(())
    })
}

/// Loads a codebook file written by [`uk_codebook_save`] or the CLI.
///
/// # Safety
/// `path` must be a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn uk_codebook_load(
    path_: *const c_char,
    out_codebook: *mut *mut UkCodebook,
) -> UkStatus {
    guard(|| {
        let out_codebook = out(out_codebook, "out_codebook")?;
        let cb = io::read_codebook(path(path_)?)?;
        *out_codebook = Box::into_raw(Box::new(UkCodebook(cb)));
        Ok(())
    })
}

/// Writes the codebook atomically to `path`.
///
/// # Safety
/// `codebook` must come from this library; `path` must be nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn uk_codebook_save(codebook: *const UkCodebook, path_: *const c_char) -> UkStatus {
    guard(|| {
        let cb = codebook.as_ref().ok_or(Failure::Null("codebook"))?;
        io::write_codebook(path(path_)?, &cb.0)?;
        Ok(())
    })
}

/// Number of centroids, or 0 for a null handle.
///
/// # Safety
/// `codebook` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn uk_codebook_k(codebook: *const UkCodebook) -> usize {
    codebook.as_ref().map_or(0, |c| c.0.k())
}

/// Feature dimension, or 0 for a null handle.
///
/// # Safety
/// `codebook` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn uk_codebook_dims(codebook: *const UkCodebook) -> usize {
    codebook.as_ref().map_or(0, |c| c.0.dims())
}

/// Assigns each of `rows` feature rows to its nearest centroid.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn uk_codebook_assign(
    codebook: *const UkCodebook,
    features: *const f64,
    rows: usize,
    dims: usize,
    out_units: *mut u32,
) -> UkStatus {
    guard(|| {
        let cb = codebook.as_ref().ok_or(Failure::Null("codebook"))?;
        let len = rows
            .checked_mul(dims)
            .ok_or_else(|| Error::ShapeMismatch(format!("{rows} x {dims} overflows")))?;
        let x = FeatureMatrix::new(rows, dims, slice(features, len, "features")?.to_vec())?;
        let z = quantize::quantize_assign(&cb.0, &x)?;
        slice_mut(out_units, rows, "out_units")?.copy_from_slice(z.units());
        Ok(())
    })
}

/// Releases a codebook. Null is ignored.
///
/// # Safety
/// `codebook` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn uk_codebook_free(codebook: *mut UkCodebook) {
    if !codebook.is_null() {
        drop(Box::from_raw(codebook));
    }
}

/// Fits a duration table from `n_seqs` deduplicated sequences.
///
/// `units` and `durations` are flat concatenations; `lens[i]` is the length
/// of sequence `i`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn uk_duration_table_fit(
    units: *const u32,
    durations: *const usize,
    lens: *const usize,
    n_seqs: usize,
    out_table: *mut *mut UkDurationTable,
) -> UkStatus {
    guard(|| {
        let out_table = out(out_table, "out_table")?;
        let lens = slice(lens, n_seqs, "lens")?;
        let total = lens.iter().sum();
        let units = split(slice(units, total, "units")?, lens)?
            .into_iter()
            .map(OrigUnitSeq::new)
            .collect::<Result<Vec<_>, _>>()?;
        let durations = split(slice(durations, total, "durations")?, lens)?;
        let table = lengthreg::fit_duration_table(units.iter().zip(durations.iter().map(Vec::as_slice)))?;
        *out_table = Box::into_raw(Box::new(UkDurationTable(table)));
        Ok(())
    })
}

/// Loads a JSON duration table as written by `unitkit fit-durations`.
///
/// # Safety
/// `path` must be a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn uk_duration_table_load(
    path_: *const c_char,
    out_table: *mut *mut UkDurationTable,
) -> UkStatus {
    guard(|| {
        let out_table = out(out_table, "out_table")?;
        let table = unitkit::cli::read_duration_table(path(path_)?)?;
        *out_table = Box::into_raw(Box::new(UkDurationTable(table)));
        Ok(())
    })
}

/// Predicted durations for `n` deduplicated units.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn uk_duration_table_predict(
    table: *const UkDurationTable,
    units: *const u32,
    n: usize,
    out_durations: *mut f64,
) -> UkStatus {
    guard(|| {
        let t = table.as_ref().ok_or(Failure::Null("table"))?;
        let u = OrigUnitSeq::new(slice(units, n, "units")?.to_vec())?;
        let d = lengthreg::predict_durations(&t.0, &u);
        slice_mut(out_durations, n, "out_durations")?.copy_from_slice(&d);
        Ok(())
    })
}

/// Releases a duration table. Null is ignored.
///
/// # Safety
/// `table` must be null or come from this library, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn uk_duration_table_free(table: *mut UkDurationTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Mean of predicted/reference length ratios over `n` pairs.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn uk_length_ratio(
    pred_lens: *const usize,
    ref_lens: *const usize,
    n: usize,
    out_value: *mut f64,
) -> UkStatus {
    guard(|| {
        let pairs = length_pairs(slice(pred_lens, n, "pred_lens")?, slice(ref_lens, n, "ref_lens")?)?;
        *out(out_value, "out_value")? = metrics::length_ratio(&pairs);
        Ok(())
    })
}

/// Percentage of pairs whose length is within `k` percent of the reference.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn uk_length_compliance(
    pred_lens: *const usize,
    ref_lens: *const usize,
    n: usize,
    k: f64,
    out_value: *mut f64,
) -> UkStatus {
    guard(|| {
        let pairs = length_pairs(slice(pred_lens, n, "pred_lens")?, slice(ref_lens, n, "ref_lens")?)?;
        *out(out_value, "out_value")? = metrics::length_compliance(&pairs, k)?;
        Ok(())
    })
}

/// Corpus BLEU (0..100) over `n_sents` hypothesis/reference pairs of unit ids.
///
/// Sentences are flat concatenations split by `hyp_lens` and `ref_lens`.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn uk_corpus_bleu(
    hyp: *const u32,
    hyp_lens: *const usize,
    reference: *const u32,
    ref_lens: *const usize,
    n_sents: usize,
    out_value: *mut f64,
) -> UkStatus {
    guard(|| {
        let hyp_lens = slice(hyp_lens, n_sents, "hyp_lens")?;
        let ref_lens = slice(ref_lens, n_sents, "ref_lens")?;
        let hyps = split(slice(hyp, hyp_lens.iter().sum(), "hyp")?, hyp_lens)?;
        let refs = split(slice(reference, ref_lens.iter().sum(), "reference")?, ref_lens)?;
        *out(out_value, "out_value")? = metrics::corpus_bleu(&hyps, &refs)?;
        Ok(())
    })
}

/// Cluster purity of `n` cluster ids against reference labels.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn uk_purity(
    labels: *const u32,
    clusters: *const u32,
    n: usize,
    out_value: *mut f64,
) -> UkStatus {
    guard(|| {
        let v = quantize::purity(slice(labels, n, "labels")?, slice(clusters, n, "clusters")?)?;
        *out(out_value, "out_value")? = v;
        Ok(())
    })
}

/// Normalized mutual information of `n` cluster ids against reference labels.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn uk_nmi(
    labels: *const u32,
    clusters: *const u32,
    n: usize,
    out_value: *mut f64,
) -> UkStatus {
    guard(|| {
        let v = quantize::nmi(slice(labels, n, "labels")?, slice(clusters, n, "clusters")?)?;
        *out(out_value, "out_value")? = v;
        Ok(())
    })
}

/// Cosine similarity of a visual and an audio embedding of `dims` entries.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn uk_sync_similarity(
    visual: *const f64,
    audio: *const f64,
    dims: usize,
    eps: f64,
    out_value: *mut f64,
) -> UkStatus {
    guard(|| {
        let p = EmbeddingPair::new(
            slice(visual, dims, "visual")?.to_vec(),
            slice(audio, dims, "audio")?.to_vec(),
        )?;
        *out(out_value, "out_value")? = metrics::sync_similarity(&p, eps);
        Ok(())
    })
}

/// Weighted synthesizer loss `(1 - ls - lg) * l_lip + ls * l_sync + lg * l_g`.
///
/// # Safety
/// `out_value` must be valid.
#[no_mangle]
pub unsafe extern "C" fn uk_combined_loss(
    l_lip: f64,
    l_sync: f64,
    l_g: f64,
    lambda_sync: f64,
    lambda_gen: f64,
    out_value: *mut f64,
) -> UkStatus {
    guard(|| {
        *out(out_value, "out_value")? = metrics::combined_loss(l_lip, l_sync, l_g, lambda_sync, lambda_gen)?;
        Ok(())
    })
}
