#ifndef MSTLAB_H
#define MSTLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define MST_API __declspec(dllexport)
#else
#define MST_API __attribute__((visibility("default")))
#endif

typedef enum {
  MST_OK = 0,
  MST_INVALID_ARGUMENT = 1,
  MST_DOMAIN = 2,
  MST_REGIME = 3,
  MST_CONVERGENCE = 4,
  MST_BUDGET = 5,
  MST_INTERNAL = 6
} mst_status;

typedef enum { MST_MARY = 0, MST_FBBST = 1, MST_QUADTREE = 2 } mst_family;

/* Message of the last failing call on this thread ("" if none). */
MST_API const char* mst_last_error(void);
MST_API const char* mst_version(void);
/* Strings returned through char** out parameters are owned by the caller. */
MST_API void mst_string_free(char* s);
MST_API mst_status mst_parse_family(const char* name, int* family);

/* Indicial spectrum */
typedef struct mst_spectrum mst_spectrum;
MST_API mst_status mst_spectrum_solve(int family, int param, int precision_bits, mst_spectrum** out);
MST_API void mst_spectrum_free(mst_spectrum* s);
MST_API size_t mst_spectrum_size(const mst_spectrum* s);
MST_API mst_status mst_spectrum_root(const mst_spectrum* s, size_t k, double* re, double* im);
MST_API mst_status mst_spectrum_alpha_beta(const mst_spectrum* s, double* alpha, double* beta);
MST_API mst_status mst_spectrum_json(const mst_spectrum* s, char** out);

/* 0 linear / 1 periodic covariance; 0 gaussian / 1 periodic distribution */
MST_API mst_status mst_regime(int family, int param, int* covariance, int* distribution);

/* Closed-form quadtree exponents (alpha_hat, beta_hat) and regime as JSON. */
MST_API mst_status mst_quadtree_exponents_json(int d, char** out);

/* Moment tables. mode: 0 exact rational, 1 float. */
typedef struct mst_table mst_table;
MST_API mst_status mst_table_compute(int family, int param, int n_max, int mode, int allow_large, mst_table** out);
MST_API void mst_table_free(mst_table* t);
MST_API mst_status mst_table_value(const mst_table* t, const char* row, int n, double* out);
MST_API mst_status mst_table_cell(const mst_table* t, const char* row, int n, char** out);
MST_API mst_status mst_table_csv(const mst_table* t, char** out);
MST_API mst_status mst_table_diagnostics(const mst_table* t, double* cancellation, int* precision_warning);

/* Constants and periodic functions */
MST_API mst_status mst_constants_json(int family, int param, double c_plus_re, double c_plus_im, char** out);
MST_API mst_status mst_table_alpha_csv(int from, int to, char** out);
MST_API mst_status mst_table_c2_csv(int from, int to, char** out);
/* kind: F1 F2 Frho G1 G2 P1 P2; printed != 0 selects the uncorrected formulas */
MST_API mst_status mst_periodic_eval(const char* kind, int param, int printed, double c_plus_re, double c_plus_im,
                                     double z, double* out);
MST_API mst_status mst_periodic_csv(const char* kind, int param, int printed, double c_plus_re, double c_plus_im,
                                    int points, char** out);

/* Simulation. method: 0 split recursion, 1 explicit tree (mary only). */
typedef struct mst_simstats mst_simstats;
MST_API mst_status mst_simulate(int family, int param, int64_t n, int64_t reps, uint64_t seed, int threads, int method,
                                mst_simstats** out);
MST_API void mst_simstats_free(mst_simstats* s);
MST_API mst_status mst_simstats_mean(const mst_simstats* s, int i, double* out);
MST_API mst_status mst_simstats_cov(const mst_simstats* s, int i, int j, double* out);
MST_API mst_status mst_simstats_corr(const mst_simstats* s, int i, int j, double* out);
MST_API mst_status mst_simstats_json(const mst_simstats* s, char** out);
MST_API mst_status mst_corr_profile_csv(int family, int param, const int64_t* grid, size_t grid_len, int64_t reps,
                                        uint64_t seed, int threads, double c_plus_re, double c_plus_im, char** out);

/* Fixed-point population dynamics */
typedef struct mst_pool mst_pool;
typedef struct {
  const char* map;      /* uniK TN_periodic TNprime_normal Tmed_periodic Tmed_normal Tquad_periodic Tquad_normal */
  int param;
  int toll_n;           /* uniK: use b_N instead of b_K */
  int iterate_normal;   /* normal maps: iterate the second slot */
  double c_plus_re, c_plus_im;
  int64_t pool_size;
  int generations;
  uint64_t seed;
  int threads;
} mst_fixpoint_config;
MST_API void mst_fixpoint_config_default(mst_fixpoint_config* c);
MST_API mst_status mst_fixpoint_run(const mst_fixpoint_config* c, mst_pool** out);
MST_API void mst_pool_free(mst_pool* p);
MST_API mst_status mst_pool_trace_csv(const mst_pool* p, char** out);
MST_API mst_status mst_pool_samples_csv(const mst_pool* p, char** out);
MST_API mst_status mst_pool_diagnostics_json(const mst_pool* p, char** out);

/* Acceptance suite: one report line per criterion. */
MST_API mst_status mst_verify(int quick, int threads, const char* cli_path, char** report, int* unexpected_failures,
                              int* expected_failures);

#ifdef __cplusplus
}
#endif

#endif
