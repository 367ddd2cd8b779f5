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

#ifndef DPSUPP_ACCOUNTING_HPP_
#define DPSUPP_ACCOUNTING_HPP_

#include <cstdint>
#include <optional>

#include "dpsupp/core.hpp"

namespace dpsupp {

// Transformation parameters m <= M for outlier-score suppression.
struct MMParams {
  double m = 0.5;
  double M = 0.5;
  static MMParams make(double m, double M);  // requires 0 < m <= M < 1
};

enum class Branch { kL1 = 1, kL2 = 2, kL3 = 3 };

const char* branch_name(Branch b);

struct BoundReport {
  double eps_s = 0.0;
  double delta_s = 0.0;
  double argmax_p = 0.0;
  Branch active_branch = Branch::kL1;
  bool outside_verified = false;  // eps > 100
  bool infinite = false;          // m = 0 or M = 1
};

PrivacyParams amplify_poisson(const PrivacyParams& pp, double keep_prob);

// Inverse of amplify_poisson. Throws kInfeasible when delta/p > 1.
PrivacyParams calibrate_sampling(const PrivacyParams& target, double keep_prob);

// Group-privacy style bound for deterministic suppression with sensitivity
// `sensitivity`; std::nullopt stands for an infinite sensitivity.
PrivacyParams group_bound_deterministic(
    const PrivacyParams& pp, std::optional<std::uint64_t> sensitivity);

// The three pieces of the outlier-score bound, in log form.
double bound_l1(double eps, const MMParams& mm, double p);
double bound_l2(double eps, const MMParams& mm, double p);
double bound_l3(double eps, const MMParams& mm);

// Closed-form argmax of l1 (kL1) or l2 (kL2) over [0,1].
double maximizer_p(double eps, const MMParams& mm, Branch branch);

// The unclamped cubic root used by maximizer_p (exposed for tests).
double cubic_root_closed_form(double a, double b, double c, double d);

// m may be 0 and M may be 1 here; those limits report infinite = true.
BoundReport epsilon_s(double eps, const MMParams& mm, double delta = 0.0);

double delta_s(double delta, const MMParams& mm);

// Finds (eps'', delta'') with epsilon_s(eps'') = target.epsilon and
// delta_s(delta'') = target.delta. Throws kInfeasible when impossible and
// kDomain if the monotonicity assumption fails during bisection.
PrivacyParams calibrate_suppression(const PrivacyParams& target,
                                    const MMParams& mm);

double poisson_floor(double eps, const MMParams& mm);

}  // namespace dpsupp

#endif  // DPSUPP_ACCOUNTING_HPP_
