// Copyright 2026 The dpsupp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpsupp/dpsupp.h"

#include <cmath>
#include <cstring>
#include <new>
#include <sstream>
#include <string>

#include "dpsupp/accounting.hpp"
#include "dpsupp/harness.hpp"
#include "dpsupp/oracle.hpp"

struct dps_context {
  std::uint64_t seed = 1;
  double scale = 0.2;
  std::size_t threads = 0;
  std::string error;
};

struct dps_buffer {
  std::string text;
};

namespace {

using namespace dpsupp;

dps_status fail(dps_context* ctx, dps_status s, const std::string& msg) {
  if (ctx) ctx->error = msg;
  return s;
}

// Runs fn and maps exceptions to status codes.
template <typename Fn>
dps_status guard(dps_context* ctx, Fn&& fn) {
  if (!ctx) return DPS_ERR_INVALID_ARGUMENT;
  ctx->error.clear();
  try {
    fn();
    return DPS_OK;
  } catch (const Error& e) {
    return fail(ctx, static_cast<dps_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(ctx, DPS_ERR_TOO_LARGE, "out of memory");
  } catch (const std::exception& e) {
    return fail(ctx, DPS_ERR_INTERNAL, e.what());
  }
}

void need(const void* p, const char* name) {
  if (!p) throw Error(Errc::kInvalidArgument, std::string(name) + " is null");
}

dps_params to_c(const PrivacyParams& pp) { return {pp.epsilon, pp.delta}; }

dps_verify_report to_c(const VerificationReport& r) {
  dps_verify_report o{};
  o.numeric_max = r.numeric_max;
  o.closed_form = r.closed_form;
  o.gap = r.gap;
  o.evaluations = r.evaluations;
  o.verdict = static_cast<int>(r.verdict == Verdict::kPass   ? DPS_PASS
                               : r.verdict == Verdict::kFail ? DPS_FAIL
                                                             : DPS_INCONCLUSIVE);
  o.arg_n = r.arg_n;
  o.arg_pj = r.arg_pj;
  o.arg_pk = r.arg_pk;
  o.arg_c = r.arg_c;
  o.arg_t = r.arg_t;
  o.superfluous_ok = r.superfluous_ok ? 1 : 0;
  return o;
}

}  // namespace

extern "C" {

const char* dps_version(void) { return "0.1.0"; }

const char* dps_status_name(dps_status s) {
  switch (s) {
    case DPS_OK:
      return "ok";
    case DPS_ERR_INVALID_ARGUMENT:
      return "invalid_argument";
    case DPS_ERR_INFEASIBLE:
      return "infeasible";
    case DPS_ERR_DOMAIN:
      return "domain";
    case DPS_ERR_IO:
      return "io";
    case DPS_ERR_TOO_LARGE:
      return "too_large";
    case DPS_ERR_INTERNAL:
      return "internal";
  }
  return "unknown";
}

const char* dps_verdict_name(int verdict) {
  switch (verdict) {
    case DPS_PASS:
      return "pass";
    case DPS_FAIL:
      return "fail";
    case DPS_INCONCLUSIVE:
      return "inconclusive";
    default:
      return "unknown";
  }
}

dps_status dps_context_new(uint64_t seed, dps_context** out) {
  if (!out) return DPS_ERR_INVALID_ARGUMENT;
  *out = new (std::nothrow) dps_context;
  if (!*out) return DPS_ERR_TOO_LARGE;
  (*out)->seed = seed;
  return DPS_OK;
}

void dps_context_free(dps_context* ctx) { delete ctx; }

const char* dps_last_error(const dps_context* ctx) { return ctx ? ctx->error.c_str() : ""; }

dps_status dps_context_set_scale(dps_context* ctx, double scale) {
  return guard(ctx, [&] {
    if (!(scale > 0.0) || !std::isfinite(scale)) {
      throw Error(Errc::kInvalidArgument, "scale must be > 0");
    }
    ctx->scale = scale;
  });
}

dps_status dps_context_set_threads(dps_context* ctx, size_t threads) {
  return guard(ctx, [&] { ctx->threads = threads; });
}

const char* dps_buffer_data(const dps_buffer* buf) { return buf ? buf->text.c_str() : ""; }
size_t dps_buffer_size(const dps_buffer* buf) { return buf ? buf->text.size() : 0; }
void dps_buffer_free(dps_buffer* buf) { delete buf; }

dps_status dps_amplify_poisson(dps_context* ctx, dps_params pp, double p, dps_params* out) {
  return guard(ctx, [&] {
    need(out, "out");
    *out = to_c(amplify_poisson(PrivacyParams::make(pp.epsilon, pp.delta), p));
  });
}

dps_status dps_calibrate_sampling(dps_context* ctx, dps_params target, double p,
                                  dps_params* out) {
  return guard(ctx, [&] {
    need(out, "out");
    *out = to_c(calibrate_sampling(PrivacyParams::make(target.epsilon, target.delta), p));
  });
}

dps_status dps_calibrate_suppression(dps_context* ctx, dps_params target, double m, double M,
                                     dps_params* out) {
  return guard(ctx, [&] {
    need(out, "out");
    *out = to_c(calibrate_suppression(PrivacyParams::make(target.epsilon, target.delta),
                                      MMParams::make(m, M)));
  });
}

dps_status dps_group_bound(dps_context* ctx, dps_params pp, int64_t sensitivity,
                           dps_params* out) {
  return guard(ctx, [&] {
    need(out, "out");
    std::optional<std::uint64_t> s;
    if (sensitivity >= 0) s = static_cast<std::uint64_t>(sensitivity);
    *out = to_c(group_bound_deterministic(PrivacyParams::make(pp.epsilon, pp.delta), s));
  });
}

dps_status dps_epsilon_s(dps_context* ctx, double eps, double delta, double m, double M,
                         dps_bound* out) {
  return guard(ctx, [&] {
    need(out, "out");
    const auto r = epsilon_s(eps, MMParams{m, M}, delta);
    out->eps_s = r.eps_s;
    out->delta_s = r.delta_s;
    out->argmax_p = r.argmax_p;
    out->branch = static_cast<int>(r.active_branch);
    out->outside_verified = r.outside_verified ? 1 : 0;
    out->infinite = r.infinite ? 1 : 0;
  });
}

dps_status dps_verify_forward(dps_context* ctx, double eps, double m, double M, uint64_t budget,
                              dps_verify_report* out) {
  return guard(ctx, [&] {
    need(out, "out");
    *out = to_c(verify_bound_forward(eps, MMParams::make(m, M), budget, ctx->seed));
  });
}

dps_status dps_verify_inverse(dps_context* ctx, double eps, double m, double M,
                              dps_verify_report* out) {
  return guard(ctx, [&] {
    need(out, "out");
    *out = to_c(verify_bound_inverse(eps, MMParams::make(m, M)));
  });
}

dps_status dps_kernel_bounds_of(dps_context* ctx, size_t n, const double* occ_d,
                                const double* occ_dp, dps_params base, dps_kernel_bounds* out) {
  return guard(ctx, [&] {
    need(occ_d, "occ_d");
    need(occ_dp, "occ_dp");
    need(out, "out");
    if (n + 1 > kMaxKernelSize) throw Error(Errc::kTooLarge, "kernel exceeds 20 occurrences");
    // Occurrences only need to be distinguishable; use 0..n as records.
    std::vector<Record> recs;
    for (std::size_t i = 0; i <= n; ++i) recs.push_back({static_cast<double>(i)});
    const ValueBounds b{0.0, static_cast<double>(n)};
    SuppressionKernel kd, kdp;
    kdp.base = Database(recs, {b});
    recs.pop_back();
    kd.base = Database(recs, {b});
    kd.occ.assign(occ_d, occ_d + (std::size_t{1} << n));
    kdp.occ.assign(occ_dp, occ_dp + (std::size_t{1} << (n + 1)));
    const Record y{static_cast<double>(n)};
    for (const auto* k : {&kd, &kdp}) {
      double s = 0.0;
      for (double v : k->occ) {
        if (!(v >= 0.0)) throw Error(Errc::kInvalidArgument, "negative kernel probability");
        s += v;
      }
      if (std::fabs(s - 1.0) > 1e-9) throw Error(Errc::kInvalidArgument, "kernel does not sum to 1");
    }
    out->support_ok = support_condition_holds(kd, kdp, y) ? 1 : 0;
    if (!out->support_ok) {
      throw Error(Errc::kDomain, "support condition violated");
    }
    const auto kb =
        suppression_theorem_bounds(kd, kdp, y, PrivacyParams::make(base.epsilon, base.delta));
    out->eps_fwd = kb.eps_fwd;
    out->eps_bwd = kb.eps_bwd;
    out->delta_fwd = kb.delta_fwd;
    out->delta_bwd = kb.delta_bwd;
  });
}

dps_status dps_tight_epsilon(dps_context* ctx, const double* tables, size_t n_tables,
                             size_t n_outputs, const size_t* pairs, size_t n_pairs, double delta,
                             double* out_eps) {
  return guard(ctx, [&] {
    need(tables, "tables");
    need(out_eps, "out_eps");
    if (n_pairs) need(pairs, "pairs");
    std::vector<Distribution> t(n_tables);
    for (std::size_t i = 0; i < n_tables; ++i) {
      t[i].assign(tables + i * n_outputs, tables + (i + 1) * n_outputs);
    }
    std::vector<std::pair<std::size_t, std::size_t>> pp;
    for (std::size_t i = 0; i < n_pairs; ++i) {
      if (pairs[2 * i] >= n_tables || pairs[2 * i + 1] >= n_tables) {
        throw Error(Errc::kInvalidArgument, "pair index out of range");
      }
      pp.emplace_back(pairs[2 * i], pairs[2 * i + 1]);
    }
    *out_eps = tight_dp_of_finite_mechanism(t, pp, delta);
  });
}

dps_status dps_sensitivity_family(dps_context* ctx, const char* family, size_t n,
                                  dps_sensitivity* out) {
  return guard(ctx, [&] {
    need(family, "family");
    need(out, "out");
    const std::string f = family;
    SensitivityResult r;
    if (f == "set") {
      r = sensitivity_set_family(4, {1.0, 3.0});
    } else if (f == "threshold") {
      r = sensitivity_threshold_family(n, 2, 0.5);
    } else if (f == "top") {
      r = sensitivity_top_fraction_family(n, 0.5);
    } else {
      throw Error(Errc::kInvalidArgument, "unknown family '" + f + "'");
    }
    out->infinite = r.infinite ? 1 : 0;
    out->value = r.value;
    out->witness = r.witness;
  });
}

dps_status dps_run_experiment(dps_context* ctx, const char* kind, const char* config,
                              const char* format, dps_buffer** out) {
  return guard(ctx, [&] {
    need(kind, "kind");
    need(out, "out");
    const std::string k = kind;
    const std::string fmt = format ? format : "jsonl";
    if (fmt != "jsonl" && fmt != "csv") throw Error(Errc::kInvalidArgument, "format is jsonl or csv");
    ExperimentConfig cfg;
    cfg.seed = ctx->seed;
    cfg.scale = ctx->scale;
    cfg.threads = ctx->threads;
    if (config) {
      std::istringstream in(config);
      std::string line;
      while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error(Errc::kInvalidArgument, "expected key=value: " + line);
        cfg.set(line.substr(0, eq), line.substr(eq + 1));
      }
    }
    std::vector<ExperimentRow> rows;
    if (k == "sampling") {
      rows = run_sampling_experiment(cfg);
    } else if (k == "suppression") {
      rows = run_suppression_experiment(cfg);
    } else {
      throw Error(Errc::kInvalidArgument, "experiment kind is sampling or suppression");
    }
    auto* buf = new dps_buffer;
    if (fmt == "csv") buf->text = csv_header() + "\n";
    for (const auto& r : rows) buf->text += (fmt == "csv" ? row_to_csv(r) : row_to_json(r)) + "\n";
    *out = buf;
  });
}

dps_status dps_synth(dps_context* ctx, dps_buffer** out) {
  return guard(ctx, [&] {
    need(out, "out");
    const auto s = gen_synthetic_clusters(ctx->seed);
    auto* buf = new dps_buffer;
    buf->text = "raw_x,raw_y,x,y\n";
    for (std::size_t i = 0; i < s.raw.size(); ++i) {
      buf->text += format_double(s.raw[i][0]) + "," + format_double(s.raw[i][1]) + "," +
                   format_double(s.data[i][0]) + "," + format_double(s.data[i][1]) + "\n";
    }
    *out = buf;
  });
}

dps_status dps_metric_mpe(dps_context* ctx, double true_mean, double noisy_mean, double* out) {
  return guard(ctx, [&] {
    need(out, "out");
    *out = metric_mpe(true_mean, noisy_mean);
  });
}

dps_status dps_wilson_ci(dps_context* ctx, uint64_t successes, uint64_t n, double level,
                         double* low, double* high) {
  return guard(ctx, [&] {
    need(low, "low");
    need(high, "high");
    const auto [lo, hi] = wilson_ci(successes, n, level);
    *low = lo;
    *high = hi;
  });
}

}  // extern "C"
