#ifndef SPECTRAL_SURGERY_H
#define SPECTRAL_SURGERY_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  SS_STATUS_OK = 0,
  SS_STATUS_NULL_POINTER = 1,
  SS_STATUS_INVALID_ARGUMENT = 2,
  SS_STATUS_EMPTY_DOMAIN = 3,
  SS_STATUS_NOT_CONVERGED = 4,
  SS_STATUS_NOT_SUBSET = 5,
  SS_STATUS_IO = 6,
  SS_STATUS_PARSE = 7,
  SS_STATUS_INTERNAL = 8,
} SsStatus;

typedef enum {
  SS_VERDICT_PASS = 0,
  SS_VERDICT_NO_OP = 1,
  SS_VERDICT_FAIL = 2,
} SsVerdict;

/**
 * Opaque rasterized domain.
 */
typedef struct SsDomain SsDomain;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *ss_last_error(void);

/**
 * Builds a domain from `nx * ny` occupancy bytes, row-major with row 0 at
 * the lowest second coordinate. Nonzero bytes are occupied; the border must
 * be empty.
 */
SsStatus ss_domain_from_cells(size_t nx,
                              size_t ny,
                              double h,
                              double origin_x,
                              double origin_y,
                              const uint8_t *cells,
                              SsDomain **out_domain);

/**
 * Rasterizes a corpus spec given as JSON, for example
 * `{"id":"b","generator":"ball","radius":0.5,"h":0.0078125,"seed":1}`.
 */
SsStatus ss_domain_generate(const char *spec_json, SsDomain **out_domain);

/**
 * Loads a PBM bitmap and its JSON sidecar.
 */
SsStatus ss_domain_load(const char *path, SsDomain **out_domain);

SsStatus ss_domain_save(const SsDomain *d, const char *path);

/**
 * Releases a domain. Null is ignored.
 */
void ss_domain_free(SsDomain *d);

/**
 * Releases a string returned by the library. Null is ignored.
 */
void ss_string_free(char *s);

SsStatus ss_domain_cell_count(const SsDomain *d, size_t *out_count);

SsStatus ss_domain_measure(const SsDomain *d, double *out_measure);

SsStatus ss_domain_perimeter(const SsDomain *d, double *out_perimeter);

/**
 * New domain dilated by `t` about the origin.
 */
SsStatus ss_domain_rescale(const SsDomain *d, double t, SsDomain **out_domain);

/**
 * Maximum and integral of the torsion function. `tol <= 0` selects the
 * default solver tolerance.
 */
SsStatus ss_torsion(const SsDomain *d, double tol, double *out_max, double *out_integral);

/**
 * Writes the `k` lowest Dirichlet eigenvalues, ascending, to `out_values`,
 * which must hold `k` doubles.
 */
SsStatus ss_eigenvalues(const SsDomain *d, size_t k, double *out_values);

/**
 * Strip surgery protecting the `k` lowest eigenvalues below `k_threshold`.
 * `mode_factor` 1 is faithful mode, anything else scales the energy
 * penalty. `p_bound <= 0` uses the input perimeter. On success the output
 * domain, the JSON report (free with [`ss_string_free`]) and the verdict are
 * written; `out_report_json` may be null.
 */
SsStatus ss_strip_surgery(const SsDomain *d,
                          double k_threshold,
                          size_t k,
                          double p_bound,
                          double mode_factor,
                          SsDomain **out_domain,
                          char **out_report_json,
                          SsVerdict *out_verdict);

/**
 * Penalized-energy truncation and rescale; outputs as in
 * [`ss_strip_surgery`].
 */
SsStatus ss_bounded_surgery(const SsDomain *d,
                            double k_threshold,
                            size_t k,
                            double mode_factor,
                            SsDomain **out_domain,
                            char **out_report_json,
                            SsVerdict *out_verdict);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPECTRAL_SURGERY_H */
