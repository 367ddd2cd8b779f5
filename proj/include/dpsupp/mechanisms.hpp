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

#ifndef DPSUPP_MECHANISMS_HPP_
#define DPSUPP_MECHANISMS_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "dpsupp/core.hpp"

namespace dpsupp {

enum class NoiseKind { kLaplace, kGaussian, kExponential };

enum class ModeVariant { kRnmLaplace, kRnmGaussian, kRnmExponential, kExpMech };

enum class MechanismKind { kNoisyAverage, kRnm, kExpMechMode, kDPLloyd, kKMedian };

struct MechanismSpec {
  MechanismKind kind = MechanismKind::kNoisyAverage;
  NoiseKind noise = NoiseKind::kLaplace;
  PrivacyParams params;
  std::size_t k = 5;
  std::size_t iterations = 5;
};

struct ClusteringResult {
  std::vector<Record> centers;
  std::vector<std::size_t> assignment;
};

// Collects every sub-budget a mechanism spends, for composition audits.
struct BudgetAudit {
  std::vector<PrivacyParams> spent;
  void add(double eps, double delta) { spent.push_back({eps, delta}); }
  PrivacyParams total() const;
};

double laplace_draw(double scale, RandomStream& rng);
// Exponential variate with the given scale (mean); rate = 1/scale.
double exponential_draw(double scale, RandomStream& rng);
double gaussian_draw(double sigma, RandomStream& rng);

// Exact privacy profile of the Gaussian mechanism.
double gaussian_profile_delta(double eps, double sigma, double sensitivity);
double analytic_gaussian_sigma(double eps, double delta, double sensitivity);

// Noisy sum over noisy count. Empty input is allowed; the noisy count is
// clamped to 1 before dividing.
double noisy_average(const Database& d, const PrivacyParams& params,
                     NoiseKind noise, RandomStream& rng,
                     BudgetAudit* audit = nullptr);

std::size_t report_noisy_max(const std::vector<double>& counts,
                             const std::vector<double>& sensitivities,
                             const PrivacyParams& params, NoiseKind noise,
                             RandomStream& rng, BudgetAudit* audit = nullptr);

// Returns the sampled index.
std::size_t exponential_mechanism(const std::vector<double>& scores,
                                  double score_sensitivity, double eps,
                                  RandomStream& rng,
                                  BudgetAudit* audit = nullptr);

// Histogram over every integer in the bounds of a 1-dim database.
std::vector<double> integer_histogram(const Database& d);

double compute_mode(const Database& d, ModeVariant variant,
                    const PrivacyParams& params, RandomStream& rng,
                    BudgetAudit* audit = nullptr);

std::size_t nearest_center(const Record& r, const std::vector<Record>& centers);

ClusteringResult dp_lloyd(const Database& d, std::size_t k,
                          const PrivacyParams& params, std::size_t iterations,
                          RandomStream& rng, BudgetAudit* audit = nullptr);

ClusteringResult dp_kmedian(const Database& d,
                            const std::vector<Record>& candidates, std::size_t k,
                            const PrivacyParams& params, std::size_t iterations,
                            RandomStream& rng, BudgetAudit* audit = nullptr);

const char* noise_name(NoiseKind n);
const char* mode_variant_name(ModeVariant v);

}  // namespace dpsupp

#endif  // DPSUPP_MECHANISMS_HPP_
