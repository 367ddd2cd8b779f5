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

#ifndef DPSUPP_ORACLE_HPP_
#define DPSUPP_ORACLE_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dpsupp/accounting.hpp"
#include "dpsupp/core.hpp"
#include "dpsupp/suppression.hpp"

namespace dpsupp {

struct KernelBounds {
  double eps_fwd = 0.0;    // from S(D) towards S(D')
  double eps_bwd = 0.0;    // from S(D') towards S(D)
  double delta_fwd = 0.0;
  double delta_bwd = 0.0;
  std::size_t pairs = 0;   // neighbor pairs inspected (exhaustive search)
};

// kd is the kernel on D (n records); kdp the kernel on D' = D plus y, with
// y stored as the last occurrence (bit n). Throws on a base mismatch.
bool support_condition_holds(const SuppressionKernel& kd,
                             const SuppressionKernel& kdp, const Record& y);

KernelBounds suppression_theorem_bounds(const SuppressionKernel& kd,
                                        const SuppressionKernel& kdp,
                                        const Record& y,
                                        const PrivacyParams& base);

// Max of suppression_theorem_bounds over every neighbor pair reachable from
// the family (deletions of an occurrence and additions from the universe).
KernelBounds exhaustive_epsilon_s(const SuppressionAlgorithm& alg,
                                  const std::vector<Database>& family,
                                  const std::vector<Record>& universe,
                                  const PrivacyParams& base,
                                  std::size_t max_pairs = 100000);

using Distribution = std::vector<double>;

double hockey_stick(const Distribution& p, const Distribution& q, double eps);

// Least eps with hockey_stick <= delta in both directions of every pair.
// Returns +inf when no finite eps works.
double tight_dp_of_finite_mechanism(
    const std::vector<Distribution>& tables,
    const std::vector<std::pair<std::size_t, std::size_t>>& neighbor_pairs,
    double delta);

struct SensitivityResult {
  bool infinite = false;
  std::uint64_t value = 0;
  std::size_t witness = 0;  // index of the pair achieving the value
};

SensitivityResult deterministic_sensitivity(
    const std::function<Database(const Database&)>& s,
    const std::vector<Database>& class_i,
    const std::vector<std::pair<Database, Database>>& pairs);

// S_A (keep records in A) over every subset of the universe {1..u}.
SensitivityResult sensitivity_set_family(std::size_t universe,
                                         const std::vector<double>& a_values);

// The average-distance threshold family: multisets over {0,1} with |x-y|
// distance and size at most n*big_n; the pair (D_n, D'_n) is listed first.
SensitivityResult sensitivity_threshold_family(std::size_t n, std::size_t big_n,
                                               double K);

// Same construction for the top-fraction suppression with fraction P.
SensitivityResult sensitivity_top_fraction_family(std::size_t max_size, double P);

std::vector<double> polytope_upper_limits(const std::vector<double>& a,
                                          const MMParams& mm);
std::vector<std::vector<double>> polytope_vertices(const std::vector<double>& a,
                                                   const MMParams& mm);
bool polytope_contains(const std::vector<double>& z, const std::vector<double>& a,
                       const MMParams& mm, double tol);

// log f_{J,N}(a; z) with J the first j indices.
double log_f_jn(double eps, const MMParams& mm, const std::vector<double>& a,
                const std::vector<double>& z, std::size_t j);

// Grid brute force of max log f_{J,N} over a in [m,M]^N, all |J|, and the
// polytope vertices, for small N.
double brute_force_small_n(double eps, const MMParams& mm, std::size_t n,
                           std::size_t grid);

// Log of the forward objective pieces at a fixed N.
double log_h_full(double eps, const MMParams& mm, double n, double c);
double log_h_bar(double eps, const MMParams& mm, double n, double pj, double pk,
                 double c, double t);

enum class Verdict { kPass, kFail, kInconclusive };
const char* verdict_name(Verdict v);

struct VerificationReport {
  double numeric_max = 0.0;   // log scale
  double closed_form = 0.0;   // log scale
  double gap = 0.0;           // closed_form - numeric_max
  std::uint64_t evaluations = 0;
  bool within_tolerance = false;
  Verdict verdict = Verdict::kInconclusive;
  // Where the numeric maximum was found.
  double arg_n = 0.0, arg_pj = 0.0, arg_pk = 0.0, arg_c = 0.0, arg_t = 0.0;
  // Inverse only: the dropped fourth term stays below eps_s.
  bool superfluous_ok = true;
};

constexpr double kVerifyTolerance = 2e-7;

std::vector<double> verification_n_ladder();

VerificationReport verify_bound_forward(double eps, const MMParams& mm,
                                        std::uint64_t budget,
                                        std::uint64_t seed = 1);

VerificationReport verify_bound_inverse(double eps, const MMParams& mm);

struct DEOptions {
  std::size_t population = 0;  // 0 picks 15 * dim
  double f = 0.7;
  double cr = 0.9;
  std::uint64_t max_evals = 20000;
  double tol = 1e-13;
};

struct DEResult {
  std::vector<double> x;
  double value = 0.0;
  std::uint64_t evals = 0;
  bool converged = false;
};

// Maximizes f over a box with rand/1/bin differential evolution followed by
// a short pattern-search polish.
DEResult differential_evolution_max(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<std::pair<double, double>>& bounds, const DEOptions& opt,
    RandomStream& rng);

}  // namespace dpsupp

#endif  // DPSUPP_ORACLE_HPP_
