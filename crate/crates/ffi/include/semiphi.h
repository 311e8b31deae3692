#ifndef SEMIPHI_H
#define SEMIPHI_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SemiphiStatus {
  SEMIPHI_STATUS_OK = 0,
  SEMIPHI_STATUS_NULL_ARGUMENT = 1,
  SEMIPHI_STATUS_INVALID_UTF8 = 2,
  SEMIPHI_STATUS_PARSE = 3,
  SEMIPHI_STATUS_IO = 4,
  SEMIPHI_STATUS_SHAPE_MISMATCH = 5,
  SEMIPHI_STATUS_UNSUPPORTED_DIMS = 6,
  /**
   * Input maps lack a required property (Hermitian, CP, unital, ...).
   */
  SEMIPHI_STATUS_INVALID_INPUT = 7,
  /**
   * The instance was decided against (not semi-phi, not equivalent, ...).
   */
  SEMIPHI_STATUS_REJECTED = 8,
  /**
   * Iterative method ran out of budget or the problem is ill-conditioned.
   */
  SEMIPHI_STATUS_NUMERICAL = 9,
  SEMIPHI_STATUS_INTERNAL = 10,
} SemiphiStatus;

typedef enum SemiphiKind {
  SEMIPHI_KIND_PHI_MAP = 0,
  SEMIPHI_KIND_SUBORDINATE = 1,
  SEMIPHI_KIND_ADVERSARIAL = 2,
} SemiphiKind;

typedef enum SemiphiVerdict {
  SEMIPHI_VERDICT_COMPLETELY_SEMI_PHI = 0,
  SEMIPHI_VERDICT_NOT_SEMI_PHI = 1,
  SEMIPHI_VERDICT_UNDECIDED = 2,
} SemiphiVerdict;

/**
 * Outcome of a certification run.
 */
typedef struct SemiphiCertificate SemiphiCertificate;

/**
 * A validated instance `(Phi, phi)`.
 */
typedef struct SemiphiInstance SemiphiInstance;

/**
 * Solver settings. Pass `NULL` wherever a pointer to options is accepted
 * to use [`semiphi_options_default`].
 */
typedef struct SemiphiOptions {
  double tol;
  size_t max_iter;
  uint64_t seed;
} SemiphiOptions;

/**
 * `E = M_{p x n}` acting from `C^d1` to `C^d2`.
 */
typedef struct SemiphiDims {
  size_t p;
  size_t n;
  size_t d1;
  size_t d2;
} SemiphiDims;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *semiphi_version(void);

/**
 * Message of the last failed call on this thread, or `NULL` if it succeeded.
 * The pointer stays valid until the next library call on this thread.
 */
const char *semiphi_last_error(void);

/**
 * # Safety
 * `s` must be `NULL` or a string returned by this library, not yet freed.
 */
void semiphi_string_free(char *s);

struct SemiphiOptions semiphi_options_default(void);

/**
 * Parse and validate an instance document.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` writable.
 */
enum SemiphiStatus semiphi_instance_from_json(const char *json, struct SemiphiInstance **out);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` writable.
 */
enum SemiphiStatus semiphi_instance_read(const char *path, struct SemiphiInstance **out);

/**
 * Seeded instance. For `SEMIPHI_KIND_SUBORDINATE`, `parent_out` may receive
 * the dominating phi-map; it must be `NULL` for the other kinds.
 *
 * # Safety
 * `out` must be writable; `parent_out` must be `NULL` or writable.
 */
enum SemiphiStatus semiphi_instance_generate(enum SemiphiKind kind,
                                             struct SemiphiDims dims,
                                             uint64_t seed,
                                             double scale,
                                             struct SemiphiInstance **out,
                                             struct SemiphiInstance **parent_out);

/**
 * # Safety
 * `inst` must be `NULL` or a live handle; it is invalid afterwards.
 */
void semiphi_instance_free(struct SemiphiInstance *inst);

/**
 * # Safety
 * `inst` must be a live handle and `out` writable.
 */
enum SemiphiStatus semiphi_instance_dims(const struct SemiphiInstance *inst,
                                         struct SemiphiDims *out);

/**
 * Instance document, including ground truth when the instance was generated.
 *
 * # Safety
 * `inst` must be a live handle and `out_json` writable.
 */
enum SemiphiStatus semiphi_instance_to_json(const struct SemiphiInstance *inst, char **out_json);

/**
 * Decide whether the instance is completely semi-phi. A verdict of any kind
 * is a successful call.
 *
 * # Safety
 * `inst` must be a live handle, `opts` `NULL` or valid, `out` writable.
 */
enum SemiphiStatus semiphi_certify(const struct SemiphiInstance *inst,
                                   const struct SemiphiOptions *opts,
                                   struct SemiphiCertificate **out);

/**
 * # Safety
 * `cert` must be `NULL` or a live handle; it is invalid afterwards.
 */
void semiphi_certificate_free(struct SemiphiCertificate *cert);

/**
 * # Safety
 * `cert` must be a live handle and `out` writable.
 */
enum SemiphiStatus semiphi_certificate_verdict(const struct SemiphiCertificate *cert,
                                               enum SemiphiVerdict *out);

/**
 * Smallest eigenvalue of the Gram kernel; negative exactly when the
 * instance is rejected outright.
 *
 * # Safety
 * `cert` must be a live handle and `out` writable.
 */
enum SemiphiStatus semiphi_certificate_gram_min_eig(const struct SemiphiCertificate *cert,
                                                    double *out);

/**
 * Solver iterations, `0` when the solver did not run.
 *
 * # Safety
 * `cert` must be a live handle and `out` writable.
 */
enum SemiphiStatus semiphi_certificate_iterations(const struct SemiphiCertificate *cert,
                                                  size_t *out);

/**
 * Full check report.
 *
 * # Safety
 * `cert` must be a live handle and `out_json` writable.
 */
enum SemiphiStatus semiphi_certificate_to_json(const struct SemiphiCertificate *cert,
                                               char **out_json);

/**
 * Dilation pair report, minimized when `minimized` is true.
 *
 * # Safety
 * `inst` must be a live handle, `opts` `NULL` or valid, `out_json` writable.
 */
enum SemiphiStatus semiphi_dilate(const struct SemiphiInstance *inst,
                                  const struct SemiphiOptions *opts,
                                  bool minimized,
                                  char **out_json);

/**
 * Equivalence of two independently built minimal pairs.
 *
 * # Safety
 * `inst` must be a live handle, `opts` `NULL` or valid, `out_json` writable.
 */
enum SemiphiStatus semiphi_equiv(const struct SemiphiInstance *inst,
                                 const struct SemiphiOptions *opts,
                                 char **out_json);

/**
 * Commutant of the minimal dilation.
 *
 * # Safety
 * `inst` must be a live handle, `opts` `NULL` or valid, `out_json` writable.
 */
enum SemiphiStatus semiphi_commutant(const struct SemiphiInstance *inst,
                                     const struct SemiphiOptions *opts,
                                     char **out_json);

/**
 * Whether `sub << dom`, with free `(1,1)` corners when `relaxed`.
 *
 * # Safety
 * `sub` and `dom` must be live handles, `opts` `NULL` or valid, `out_json`
 * writable.
 */
enum SemiphiStatus semiphi_order(const struct SemiphiInstance *sub,
                                 const struct SemiphiInstance *dom,
                                 const struct SemiphiOptions *opts,
                                 bool relaxed,
                                 char **out_json);

/**
 * Radon-Nikodym derivative of `sub` with respect to `dom`.
 *
 * # Safety
 * `sub` and `dom` must be live handles, `opts` `NULL` or valid, `out_json`
 * writable.
 */
enum SemiphiStatus semiphi_rn(const struct SemiphiInstance *sub,
                              const struct SemiphiInstance *dom,
                              const struct SemiphiOptions *opts,
                              bool relaxed,
                              char **out_json);

/**
 * Purity of the instance's `phi`.
 *
 * # Safety
 * `inst` must be a live handle, `opts` `NULL` or valid, `out_json` writable.
 */
enum SemiphiStatus semiphi_purity(const struct SemiphiInstance *inst,
                                  const struct SemiphiOptions *opts,
                                  char **out_json);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SEMIPHI_H */
