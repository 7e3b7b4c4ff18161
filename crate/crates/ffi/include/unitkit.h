#ifndef UNITKIT_H
#define UNITKIT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum UkStatus {
  UK_STATUS_OK = 0,
  // A required pointer was null.
  UK_STATUS_NULL_POINTER = 1,
  // Input failed validation (shapes, empty input, non-finite values, ...).
  UK_STATUS_INVALID_INPUT = 2,
  // The bounded regulator could not reach the target.
  UK_STATUS_INFEASIBLE = 3,
  // Reading or writing a file failed.
  UK_STATUS_IO = 4,
  // A file or string was malformed.
  UK_STATUS_FORMAT = 5,
  // An output buffer was too small; the required size was written back.
  UK_STATUS_BUFFER_TOO_SMALL = 6,
  // The library panicked. This is a bug.
  UK_STATUS_PANIC = 7,
} UkStatus;

// Length-control mode for [`uk_regulate`].
typedef enum UkMode {
  UK_MODE_BOUNDED = 0,
  UK_MODE_EARLY_STOP = 1,
  UK_MODE_UNBOUNDED = 2,
} UkMode;

// A k-means codebook.
typedef struct UkCodebook UkCodebook;

// A per-unit mean duration table.
typedef struct UkDurationTable UkDurationTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failed call on this thread, or null if it
// succeeded. The pointer stays valid until the next call on this thread.
const char *uk_last_error_message(void);

// Library version as a static nul-terminated string.
const char *uk_version(void);

// Collapses `n` frame-level units into runs.
//
// `out_units` and `out_durations` must hold `n` entries; the number of runs
// is written to `out_len`.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum UkStatus uk_collapse(const uint32_t *frames,
                          size_t n,
                          uint32_t *out_units,
                          size_t *out_durations,
                          size_t *out_len);

// Expands `n` units by their durations into `out_frames` (capacity `cap`).
//
// The frame count is written to `out_len`. If `cap` is too small nothing
// is written to `out_frames`, `out_len` receives the required size and the call
// returns `BufferTooSmall`.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum UkStatus uk_expand(const uint32_t *units,
                        const size_t *durations,
                        size_t n,
                        uint32_t *out_frames,
                        size_t cap,
                        size_t *out_len);

// Rescales `n` predicted durations so they sum to `target`. `out_scaled` holds `n`.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum UkStatus uk_allocate_proportional(const double *durations,
                                       size_t n,
                                       size_t target,
                                       double *out_scaled);

// Rounds already-rescaled durations to integers summing exactly to `target`.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum UkStatus uk_integerize_bounded(const double *scaled,
                                    size_t n,
                                    size_t target,
                                    size_t *out_durations);

// Realizes `n` predicted durations under `mode`. `out_durations` holds `n` entries.
// `target` is ignored for `Unbounded`.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum UkStatus uk_regulate(enum UkMode mode,
                          const double *durations,
                          size_t n,
                          size_t target,
                          size_t *out_durations);

// Fits a k-means codebook on `rows` x `dims` row-major features.
//
// On success `*out` owns a new handle; `out_wcss` may be null.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum UkStatus uk_codebook_fit(const double *features,
                              size_t rows,
                              size_t dims,
                              size_t k,
                              size_t max_iters,
                              uint64_t seed,
                              double *out_wcss,
                              struct UkCodebook **out_codebook);

// Loads a codebook file written by [`uk_codebook_save`] or the CLI.
//
// # Safety
// `path` must be a nul-terminated string.
enum UkStatus uk_codebook_load(const char *path_, struct UkCodebook **out_codebook);

// Writes the codebook atomically to `path`.
//
// # Safety
// `codebook` must come from this library; `path` must be nul-terminated.
enum UkStatus uk_codebook_save(const struct UkCodebook *codebook, const char *path_);

// Number of centroids, or 0 for a null handle.
//
// # Safety
// `codebook` must be null or come from this library.
size_t uk_codebook_k(const struct UkCodebook *codebook);

// Feature dimension, or 0 for a null handle.
//
// # Safety
// `codebook` must be null or come from this library.
size_t uk_codebook_dims(const struct UkCodebook *codebook);

// Assigns each of `rows` feature rows to its nearest centroid.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum UkStatus uk_codebook_assign(const struct UkCodebook *codebook,
                                 const double *features,
                                 size_t rows,
                                 size_t dims,
                                 uint32_t *out_units);

// Releases a codebook. Null is ignored.
//
// # Safety
// `codebook` must be null or come from this library, and not be used again.
void uk_codebook_free(struct UkCodebook *codebook);

// Fits a duration table from `n_seqs` deduplicated sequences.
//
// `units` and `durations` are flat concatenations; `lens[i]` is the length
// of sequence `i`.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum UkStatus uk_duration_table_fit(const uint32_t *units,
                                    const size_t *durations,
                                    const size_t *lens,
                                    size_t n_seqs,
                                    struct UkDurationTable **out_table);

// Loads a JSON duration table as written by `unitkit fit-durations`.
//
// # Safety
// `path` must be a nul-terminated string.
enum UkStatus uk_duration_table_load(const char *path_, struct UkDurationTable **out_table);

// Predicted durations for `n` deduplicated units.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum UkStatus uk_duration_table_predict(const struct UkDurationTable *table,
                                        const uint32_t *units,
                                        size_t n,
                                        double *out_durations);

// Releases a duration table. Null is ignored.
//
// # Safety
// `table` must be null or come from this library, and not be used again.
void uk_duration_table_free(struct UkDurationTable *table);

// Mean of predicted/reference length ratios over `n` pairs.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum UkStatus uk_length_ratio(const size_t *pred_lens,
                              const size_t *ref_lens,
                              size_t n,
                              double *out_value);

// Percentage of pairs whose length is within `k` percent of the reference.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum UkStatus uk_length_compliance(const size_t *pred_lens,
                                   const size_t *ref_lens,
                                   size_t n,
                                   double k,
                                   double *out_value);

// Corpus BLEU (0..100) over `n_sents` hypothesis/reference pairs of unit ids.
//
// Sentences are flat concatenations split by `hyp_lens` and `ref_lens`.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum UkStatus uk_corpus_bleu(const uint32_t *hyp,
                             const size_t *hyp_lens,
                             const uint32_t *reference,
                             const size_t *ref_lens,
                             size_t n_sents,
                             double *out_value);

// Cluster purity of `n` cluster ids against reference labels.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum UkStatus uk_purity(const uint32_t *labels,
                        const uint32_t *clusters,
                        size_t n,
                        double *out_value);

// Normalized mutual information of `n` cluster ids against reference labels.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum UkStatus uk_nmi(const uint32_t *labels, const uint32_t *clusters, size_t n, double *out_value);

// Cosine similarity of a visual and an audio embedding of `dims` entries.
//
// # Safety
// Pointers must be valid for the stated lengths.
enum UkStatus uk_sync_similarity(const double *visual,
                                 const double *audio,
                                 size_t dims,
                                 double eps,
                                 double *out_value);

// Weighted synthesizer loss `(1 - ls - lg) * l_lip + ls * l_sync + lg * l_g`.
//
// # Safety
// `out_value` must be valid.
enum UkStatus uk_combined_loss(double l_lip,
                               double l_sync,
                               double l_g,
                               double lambda_sync,
                               double lambda_gen,
                               double *out_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UNITKIT_H */
