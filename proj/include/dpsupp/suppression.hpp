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

#ifndef DPSUPP_SUPPRESSION_HPP_
#define DPSUPP_SUPPRESSION_HPP_

#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "dpsupp/core.hpp"

namespace dpsupp {

enum class DistanceKind { kAbsScaled, kDiscrete, kL2Scaled, kCustom };

// Normalized metric on records with values in [0,1].
class DistanceFn {
 public:
  static DistanceFn abs_scaled(const ValueBounds& b);
  static DistanceFn discrete();
  static DistanceFn l2_scaled(const std::vector<ValueBounds>& bounds);
  static DistanceFn custom(std::function<double(const Record&, const Record&)> fn);

  double operator()(const Record& a, const Record& b) const;
  DistanceKind kind() const { return kind_; }
  double scale() const { return scale_; }

 private:
  DistanceKind kind_ = DistanceKind::kDiscrete;
  double scale_ = 1.0;
  std::function<double(const Record&, const Record&)> fn_;
};

struct MMTransform {
  double m = 0.5;
  double M = 0.5;
  DistanceFn base = DistanceFn::discrete();
  double operator()(const Record& a, const Record& b) const {
    return m + (M - m) * base(a, b);
  }
};

// avg(x, D) = (1/|D|) sum_y d(x, y) per occurrence, own term included.
// 1-dim absolute and discrete distances use O(n log n) paths.
std::vector<double> average_distances(const Database& d, const DistanceFn& dist);

Database poisson_sample(const Database& d, double keep_prob, RandomStream& rng);

std::vector<double> outlier_scores(const Database& d, const MMTransform& t);

Database outlier_score_suppress(const Database& d, const MMTransform& t,
                                RandomStream& rng);
// Same, reusing precomputed scores (one per occurrence).
Database suppress_with_scores(const Database& d, const std::vector<double>& scores,
                              RandomStream& rng);

Database suppress_by_set(const Database& d,
                         const std::function<bool(const Record&)>& in_a);

Database suppress_by_avg_threshold(const Database& d, double K,
                                   const DistanceFn& dist);

Database suppress_top_fraction(const Database& d, double P, const DistanceFn& dist);

using SubMultiset = std::vector<Record>;  // canonical (sorted) form

// Exact output distribution of a suppression algorithm on a small database.
// `occ[mask]` is the probability that exactly the occurrences in `mask` are
// kept; duplicates stay distinguishable here, and aggregate() merges
// identical sub-multisets.
struct SuppressionKernel {
  Database base;
  std::vector<double> occ;

  std::map<SubMultiset, double, CanonicalLess> aggregate() const;
  double prob(const SubMultiset& c) const;
  double total() const;
  SubMultiset subset_of(std::uint64_t mask) const;
};

constexpr std::size_t kMaxKernelSize = 20;

class SuppressionAlgorithm {
 public:
  virtual ~SuppressionAlgorithm() = default;
  virtual Database apply(const Database& d, RandomStream& rng) const = 0;
  virtual SuppressionKernel kernel(const Database& d) const = 0;
  virtual bool deterministic() const { return false; }
};

class PoissonSampling : public SuppressionAlgorithm {
 public:
  explicit PoissonSampling(double keep_prob) : keep_(keep_prob) {}
  Database apply(const Database& d, RandomStream& rng) const override;
  SuppressionKernel kernel(const Database& d) const override;

 private:
  double keep_;
};

class OutlierScoreSuppression : public SuppressionAlgorithm {
 public:
  explicit OutlierScoreSuppression(MMTransform t) : t_(std::move(t)) {}
  Database apply(const Database& d, RandomStream& rng) const override;
  SuppressionKernel kernel(const Database& d) const override;
  const MMTransform& transform() const { return t_; }

 private:
  MMTransform t_;
};

class DeterministicSuppression : public SuppressionAlgorithm {
 public:
  explicit DeterministicSuppression(std::function<Database(const Database&)> fn)
      : fn_(std::move(fn)) {}
  Database apply(const Database& d, RandomStream&) const override { return fn_(d); }
  Database apply(const Database& d) const { return fn_(d); }
  SuppressionKernel kernel(const Database& d) const override;
  bool deterministic() const override { return true; }

 private:
  std::function<Database(const Database&)> fn_;
};

// Independent per-occurrence keep probabilities to a kernel.
SuppressionKernel product_kernel(const Database& d, const std::vector<double>& keep);

SuppressionKernel kernel_of(const SuppressionAlgorithm& alg, const Database& d);

}  // namespace dpsupp

#endif  // DPSUPP_SUPPRESSION_HPP_
