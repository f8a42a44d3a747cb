/* C interface to the smoothfit shared library.
 *
 * Objects are opaque handles released with their *_free function. Every
 * call returning sf_status leaves a message for the calling thread in
 * sf_last_error() when it fails. Matrices are dense row-major n x d. */
#ifndef SMOOTHFIT_H
#define SMOOTHFIT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(SMOOTHFIT_BUILDING_LIBRARY)
#    define SF_API __declspec(dllexport)
#  else
#    define SF_API __declspec(dllimport)
#  endif
#else
#  define SF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sf_status {
  SF_OK = 0,
  SF_ERR_INVALID_INPUT = 1,
  SF_ERR_INVALID_BANDWIDTH = 2,
  SF_ERR_DOMAIN = 3,
  SF_ERR_EMPTY_NEIGHBORHOOD = 4,
  SF_ERR_SINGULAR_MOMENT = 5,
  SF_ERR_NON_CONVERGENCE = 6,
  SF_ERR_SELECTOR_FAILURE = 7,
  SF_ERR_SAMPLER_DEGENERATE = 8,
  SF_ERR_NUMERIC = 9,
  SF_ERR_IO = 10,
  SF_ERR_INTERNAL = 11
} sf_status;

typedef enum sf_smoother { SF_SMOOTHER_NW = 0, SF_SMOOTHER_LL = 1 } sf_smoother;

typedef enum sf_select_method {
  SF_SELECT_PLS = 0,
  SF_SELECT_PL = 1,       /* full candidate grid */
  SF_SELECT_PL_COORD = 2, /* coordinate-wise plug-in */
  SF_SELECT_PL_STAR = 3
} sf_select_method;

typedef enum sf_model { SF_MODEL_M1 = 0, SF_MODEL_M2 = 1 } sf_model;

/* Centering of the true components in ASE and ASE_j. */
typedef enum sf_centering { SF_CENTER_POPULATION = 0, SF_CENTER_SAMPLE = 1 } sf_centering;

typedef struct sf_dataset sf_dataset;
typedef struct sf_fit sf_fit;
typedef struct sf_selection sf_selection;
typedef struct sf_report sf_report;

typedef struct sf_fit_options {
  int smoother;       /* sf_smoother */
  const char* kernel; /* "biweight" or "epanechnikov"; NULL means biweight */
  int grid_points;
  int max_sweeps;
  double tol;
} sf_fit_options;

typedef struct sf_select_options {
  int method; /* sf_select_method */
  sf_fit_options fit;
  int n_candidates;
  double box_lo, box_hi; /* units of n^(-1/5) */
  double h0;
  double outer_tol;
  int max_outer;
  double pilot_factor;
  double trim_cut; /* NW trim, units of n^(-1/5); negative selects the default */
} sf_select_options;

typedef struct sf_sim_options {
  int model; /* sf_model */
  int n;
  double rho;
  double sigma2;
  double cov_var;
  int replicates;
  uint64_t seed;
  int centering;       /* sf_centering */
  int threads;         /* 0: SMOOTHFIT_THREADS or hardware concurrency */
  const char* methods; /* comma list, NULL for the model default */
  sf_select_options search;
} sf_sim_options;

SF_API const char* sf_version(void);
SF_API const char* sf_last_error(void);
SF_API const char* sf_status_name(sf_status status);
SF_API void sf_string_free(char* s);

SF_API sf_status sf_dataset_from_arrays(const double* x, const double* y, size_t n, size_t d,
                                        sf_dataset** out);
SF_API sf_status sf_dataset_read_csv(const char* path, sf_dataset** out);
SF_API sf_status sf_dataset_shape(const sf_dataset* data, size_t* n, size_t* d);
/* Min-max scales the covariates; the map is reported in later JSON output. */
SF_API sf_status sf_dataset_rescale_minmax(sf_dataset* data);
SF_API void sf_dataset_free(sf_dataset* data);

SF_API void sf_fit_options_default(sf_fit_options* opts);
SF_API sf_status sf_fit_run(const sf_dataset* data, const double* h, size_t d,
                            const sf_fit_options* opts, sf_fit** out);
SF_API sf_status sf_fit_predict(const sf_fit* fit, const double* x, size_t m, double* out);
SF_API sf_status sf_fit_bandwidths(const sf_fit* fit, double* out, size_t d);
/* selection may be NULL. */
SF_API sf_status sf_fit_to_json(const sf_fit* fit, const sf_selection* selection, char** json);
SF_API void sf_fit_free(sf_fit* fit);

SF_API void sf_select_options_default(sf_select_options* opts);
SF_API sf_status sf_select_run(const sf_dataset* data, const sf_select_options* opts,
                               sf_selection** out);
SF_API sf_status sf_selection_bandwidths(const sf_selection* sel, double* out, size_t d);
SF_API sf_status sf_selection_to_json(const sf_selection* sel, char** json);
SF_API void sf_selection_free(sf_selection* sel);

SF_API void sf_sim_options_default(sf_sim_options* opts);
SF_API sf_status sf_simulate_run(const sf_sim_options* opts, sf_report** out);
SF_API sf_status sf_report_replicates(const sf_report* report, size_t* count, size_t* failed);
SF_API sf_status sf_report_to_json(const sf_report* report, char** json);
SF_API sf_status sf_report_quantiles_csv(const sf_report* report, char** csv);
SF_API sf_status sf_report_logdiff_csv(const sf_report* report, char** csv);
SF_API void sf_report_free(sf_report* report);

#ifdef __cplusplus
}
#endif

#endif
