/*
 * lspart C API: partitioning-based least squares regression with
 * data-driven kappa selection, bias-corrected pointwise inference and
 * uniform confidence bands.
 *
 * All objects are opaque handles owned by the caller and released with the
 * matching *_free function. Functions returning lspart_status write their
 * result through the final out-pointer only on LSPART_OK; on failure
 * lspart_last_error() describes the problem (per thread). Pointers returned
 * by accessors are borrowed and stay valid until the owning handle is freed.
 */
#ifndef LSPART_LSPART_H
#define LSPART_LSPART_H

#include <stddef.h>
#include <stdint.h>

#if defined(LSPART_BUILDING)
#define LSPART_API __attribute__((visibility("default")))
#else
#define LSPART_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum lspart_status {
    LSPART_OK = 0,
    LSPART_ERR_INPUT = 2,   /* invalid data or options, out-of-support points */
    LSPART_ERR_NUMERIC = 3  /* numerical breakdown or any other failure */
} lspart_status;

enum { LSPART_BSPLINE = 0, LSPART_PIECEWISE_POLY = 1 };
enum { LSPART_SPACING_UNIFORM = 0, LSPART_SPACING_QUANTILE = 1 };
enum { LSPART_SELECT_ROT = 0, LSPART_SELECT_DPI = 1 };
enum { LSPART_HC_DEFAULT = -1, LSPART_HC0 = 0, LSPART_HC1 = 1, LSPART_HC2 = 2, LSPART_HC3 = 3 };

typedef struct lspart_sample lspart_sample;
typedef struct lspart_result lspart_result;
typedef struct lspart_tuning lspart_tuning;
typedef struct lspart_coverage lspart_coverage;

typedef struct lspart_options {
    int family;             /* LSPART_BSPLINE or LSPART_PIECEWISE_POLY */
    int m;                  /* basis order (degree + 1) */
    int m_bc;               /* order of the bias-correction basis, > m */
    const int* deriv;       /* d derivative orders, NULL for zeros */
    const int* kappa;       /* 1 or d entries; NULL selects kappa from data */
    size_t kappa_len;
    int selector;           /* LSPART_SELECT_ROT or LSPART_SELECT_DPI */
    int spacing;            /* LSPART_SPACING_UNIFORM or LSPART_SPACING_QUANTILE */
    int bc;                 /* 0 none, 1 higher-order, 2 least squares, 3 plug-in */
    int hc;                 /* LSPART_HC_DEFAULT: hc0 for j = 0, hc3 for j >= 1 */
    double alpha;
    int band;               /* nonzero computes uniform bands */
    int nsim;
    uint64_t seed;
    int grid_points;        /* default grid size per dimension when no grid is given */
    int shared_kappa;       /* linear combinations: one kappa from the pooled sample */
    int all_corrections;    /* report j = 0..3 instead of {0, bc} */
} lspart_options;

LSPART_API void lspart_options_init(lspart_options* options);
LSPART_API const char* lspart_last_error(void);
LSPART_API const char* lspart_version(void);

/* x is row-major n x d. */
LSPART_API lspart_status lspart_sample_create(const double* y, const double* x, size_t n, size_t d,
                                              lspart_sample** out);
LSPART_API void lspart_sample_free(lspart_sample* sample);
LSPART_API size_t lspart_sample_size(const lspart_sample* sample);
LSPART_API size_t lspart_sample_dims(const lspart_sample* sample);

/* grid is row-major n_grid x d; NULL uses the default quantile grid. */
LSPART_API lspart_status lspart_fit(const lspart_sample* sample, const lspart_options* options,
                                    const double* grid, size_t n_grid, lspart_result** out);
/* theta(x) = sum_g weights[g] mu_g(x); NULL grid spans the common support. */
LSPART_API lspart_status lspart_lincom(const lspart_sample* const* groups, const double* weights,
                                       size_t n_groups, const lspart_options* options,
                                       const double* grid, size_t n_grid, lspart_result** out);
LSPART_API void lspart_result_free(lspart_result* result);

LSPART_API size_t lspart_result_num_points(const lspart_result* result);
LSPART_API size_t lspart_result_dims(const lspart_result* result);
LSPART_API const double* lspart_result_point(const lspart_result* result, size_t i);
LSPART_API size_t lspart_result_num_corrections(const lspart_result* result);
LSPART_API int lspart_result_correction(const lspart_result* result, size_t k);
LSPART_API int lspart_result_hc(const lspart_result* result, size_t k);
/* Arrays of lspart_result_num_points values for correction slot k. */
LSPART_API const double* lspart_result_estimate(const lspart_result* result, size_t k);
LSPART_API const double* lspart_result_se(const lspart_result* result, size_t k);
LSPART_API const double* lspart_result_ci_lo(const lspart_result* result, size_t k);
LSPART_API const double* lspart_result_ci_hi(const lspart_result* result, size_t k);
/* NULL when bands were not requested. */
LSPART_API const double* lspart_result_band_lo(const lspart_result* result, size_t k);
LSPART_API const double* lspart_result_band_hi(const lspart_result* result, size_t k);
LSPART_API int lspart_result_has_band(const lspart_result* result);
LSPART_API double lspart_result_critical_value(const lspart_result* result, size_t k);
LSPART_API size_t lspart_result_num_groups(const lspart_result* result);
LSPART_API size_t lspart_result_group_n(const lspart_result* result, size_t g);
LSPART_API int lspart_result_group_kappa(const lspart_result* result, size_t g, size_t dim);
LSPART_API int lspart_result_group_basis_dim(const lspart_result* result, size_t g);
LSPART_API int lspart_result_group_aux_basis_dim(const lspart_result* result, size_t g);
LSPART_API int lspart_result_group_effective_rank(const lspart_result* result, size_t g);
/* Borrowed; NULL when kappa was supplied. */
LSPART_API const lspart_tuning* lspart_result_group_tuning(const lspart_result* result, size_t g);
LSPART_API size_t lspart_result_num_warnings(const lspart_result* result);
LSPART_API const char* lspart_result_warning(const lspart_result* result, size_t i);

/* Runs the selector in options (DPI also reports the ROT stage). */
LSPART_API lspart_status lspart_select(const lspart_sample* sample, const lspart_options* options,
                                       lspart_tuning** out);
LSPART_API void lspart_tuning_free(lspart_tuning* tuning);
LSPART_API int lspart_tuning_kappa(const lspart_tuning* tuning);
LSPART_API int lspart_tuning_kappa_rot(const lspart_tuning* tuning);
LSPART_API int lspart_tuning_has_dpi(const lspart_tuning* tuning);
LSPART_API int lspart_tuning_kappa_dpi(const lspart_tuning* tuning);
LSPART_API double lspart_tuning_bias_constant(const lspart_tuning* tuning);
LSPART_API double lspart_tuning_variance_constant(const lspart_tuning* tuning);
LSPART_API double lspart_tuning_rot_bias_constant(const lspart_tuning* tuning);
LSPART_API double lspart_tuning_rot_variance_constant(const lspart_tuning* tuning);
LSPART_API double lspart_tuning_rate_exponent(const lspart_tuning* tuning);
LSPART_API int lspart_tuning_kappa_cap(const lspart_tuning* tuning);
LSPART_API int lspart_tuning_fallback(const lspart_tuning* tuning);
LSPART_API size_t lspart_tuning_num_warnings(const lspart_tuning* tuning);
LSPART_API const char* lspart_tuning_warning(const lspart_tuning* tuning, size_t i);

LSPART_API size_t lspart_dgp_count(void);
LSPART_API const char* lspart_dgp_id(size_t i);
LSPART_API const char* lspart_dgp_description(size_t i);
LSPART_API int lspart_dgp_dims(size_t i);
/* Draws a sample from a built-in DGP with the given seed. */
LSPART_API lspart_status lspart_dgp_sample(const char* dgp_id, size_t n, uint64_t seed,
                                           lspart_sample** out);

/* Monte Carlo coverage of every correction j = 0..3 on a built-in DGP. */
LSPART_API lspart_status lspart_simulate(const char* dgp_id, size_t n, size_t reps,
                                         const lspart_options* options, lspart_coverage** out);
LSPART_API void lspart_coverage_free(lspart_coverage* coverage);
LSPART_API double lspart_coverage_mean_kappa(const lspart_coverage* coverage);
LSPART_API size_t lspart_coverage_num_points(const lspart_coverage* coverage);
LSPART_API const double* lspart_coverage_median_point(const lspart_coverage* coverage);
LSPART_API size_t lspart_coverage_num_rows(const lspart_coverage* coverage);
LSPART_API int lspart_coverage_correction(const lspart_coverage* coverage, size_t k);
LSPART_API int lspart_coverage_hc(const lspart_coverage* coverage, size_t k);
LSPART_API double lspart_coverage_pointwise(const lspart_coverage* coverage, size_t k);
LSPART_API double lspart_coverage_median(const lspart_coverage* coverage, size_t k);
LSPART_API int lspart_coverage_has_band(const lspart_coverage* coverage);
LSPART_API double lspart_coverage_band(const lspart_coverage* coverage, size_t k);
LSPART_API double lspart_coverage_ci_width(const lspart_coverage* coverage, size_t k);
LSPART_API double lspart_coverage_band_width(const lspart_coverage* coverage, size_t k);

#ifdef __cplusplus
}
#endif

#endif /* LSPART_LSPART_H */
