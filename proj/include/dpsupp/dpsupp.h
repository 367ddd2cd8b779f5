/* Copyright 2026 The dpsupp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to libdpsupp. Every call returns a dps_status; on failure the
 * context keeps a message readable through dps_last_error. Text results are
 * returned in dps_buffer handles owned by the caller. */

#ifndef DPSUPP_DPSUPP_H_
#define DPSUPP_DPSUPP_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define DPS_API __attribute__((visibility("default")))

typedef enum dps_status {
  DPS_OK = 0,
  DPS_ERR_INVALID_ARGUMENT = 1,
  DPS_ERR_INFEASIBLE = 2,
  DPS_ERR_DOMAIN = 3,
  DPS_ERR_IO = 4,
  DPS_ERR_TOO_LARGE = 5,
  DPS_ERR_INTERNAL = 99
} dps_status;

typedef struct dps_context dps_context;
typedef struct dps_buffer dps_buffer;

typedef struct dps_params {
  double epsilon;
  double delta;
} dps_params;

typedef struct dps_bound {
  double eps_s;
  double delta_s;
  double argmax_p;
  int branch;           /* 1, 2 or 3 */
  int outside_verified; /* eps above the verified range */
  int infinite;         /* m = 0 or M = 1 */
} dps_bound;

typedef enum dps_verdict { DPS_PASS = 0, DPS_FAIL = 1, DPS_INCONCLUSIVE = 2 } dps_verdict;

typedef struct dps_verify_report {
  double numeric_max; /* log scale */
  double closed_form; /* log scale */
  double gap;
  uint64_t evaluations;
  int verdict; /* dps_verdict */
  double arg_n, arg_pj, arg_pk, arg_c, arg_t;
  int superfluous_ok;
} dps_verify_report;

typedef struct dps_kernel_bounds {
  double eps_fwd, eps_bwd;
  double delta_fwd, delta_bwd;
  int support_ok;
} dps_kernel_bounds;

typedef struct dps_sensitivity {
  int infinite;
  uint64_t value;
  uint64_t witness;
} dps_sensitivity;

DPS_API const char* dps_version(void);
DPS_API const char* dps_status_name(dps_status s);
DPS_API const char* dps_verdict_name(int verdict);

DPS_API dps_status dps_context_new(uint64_t seed, dps_context** out);
DPS_API void dps_context_free(dps_context* ctx);
/* Message of the last failed call on this context, "" if none. */
DPS_API const char* dps_last_error(const dps_context* ctx);
DPS_API dps_status dps_context_set_scale(dps_context* ctx, double scale);
DPS_API dps_status dps_context_set_threads(dps_context* ctx, size_t threads);

DPS_API const char* dps_buffer_data(const dps_buffer* buf);
DPS_API size_t dps_buffer_size(const dps_buffer* buf);
DPS_API void dps_buffer_free(dps_buffer* buf);

DPS_API dps_status dps_amplify_poisson(dps_context* ctx, dps_params pp, double p,
                                       dps_params* out);
DPS_API dps_status dps_calibrate_sampling(dps_context* ctx, dps_params target, double p,
                                          dps_params* out);
DPS_API dps_status dps_calibrate_suppression(dps_context* ctx, dps_params target,
                                             double m, double M, dps_params* out);
/* sensitivity < 0 stands for an infinite sensitivity. */
DPS_API dps_status dps_group_bound(dps_context* ctx, dps_params pp, int64_t sensitivity,
                                   dps_params* out);
DPS_API dps_status dps_epsilon_s(dps_context* ctx, double eps, double delta, double m,
                                 double M, dps_bound* out);

DPS_API dps_status dps_verify_forward(dps_context* ctx, double eps, double m, double M,
                                      uint64_t budget, dps_verify_report* out);
DPS_API dps_status dps_verify_inverse(dps_context* ctx, double eps, double m, double M,
                                      dps_verify_report* out);

/* Kernel bounds for D (n occurrences) and D' = D plus y (bit n).
 * occ_d has 2^n entries and occ_dp has 2^(n+1), indexed by kept-mask. */
DPS_API dps_status dps_kernel_bounds_of(dps_context* ctx, size_t n, const double* occ_d,
                                        const double* occ_dp, dps_params base,
                                        dps_kernel_bounds* out);

/* tables: n_tables rows of n_outputs probabilities; pairs: n_pairs index pairs. */
DPS_API dps_status dps_tight_epsilon(dps_context* ctx, const double* tables, size_t n_tables,
                                     size_t n_outputs, const size_t* pairs, size_t n_pairs,
                                     double delta, double* out_eps);

/* family: "set" (S_A on subsets of {1..4}, A = {1,3}), "threshold"
 * (average-distance threshold, K = 1/2, N = 2, size n*N) or "top"
 * (top-half suppression, databases up to size n). */
DPS_API dps_status dps_sensitivity_family(dps_context* ctx, const char* family, size_t n,
                                          dps_sensitivity* out);

/* kind: "sampling" or "suppression"; config: key=value lines. The context's
 * seed and scale apply unless the config sets them. format: "jsonl" or "csv". */
DPS_API dps_status dps_run_experiment(dps_context* ctx, const char* kind, const char* config,
                                      const char* format, dps_buffer** out);

/* Synthetic clusters as CSV (raw x,y then normalized x,y). */
DPS_API dps_status dps_synth(dps_context* ctx, dps_buffer** out);

DPS_API dps_status dps_metric_mpe(dps_context* ctx, double true_mean, double noisy_mean,
                                  double* out);
DPS_API dps_status dps_wilson_ci(dps_context* ctx, uint64_t successes, uint64_t n,
                                 double level, double* low, double* high);

#ifdef __cplusplus
}
#endif

#endif /* DPSUPP_DPSUPP_H_ */
