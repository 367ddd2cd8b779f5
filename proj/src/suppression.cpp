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

#include "dpsupp/suppression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <thread>

namespace dpsupp {

DistanceFn DistanceFn::abs_scaled(const ValueBounds& b) {
  DistanceFn f;
  f.kind_ = DistanceKind::kAbsScaled;
  f.scale_ = b.width();
  return f;
}

DistanceFn DistanceFn::discrete() {
  DistanceFn f;
  f.kind_ = DistanceKind::kDiscrete;
  return f;
}

DistanceFn DistanceFn::l2_scaled(const std::vector<ValueBounds>& bounds) {
  DistanceFn f;
  f.kind_ = DistanceKind::kL2Scaled;
  double s = 0.0;
  for (const auto& b : bounds) s += b.width() * b.width();
  f.scale_ = std::sqrt(s);
  return f;
}

DistanceFn DistanceFn::custom(std::function<double(const Record&, const Record&)> fn) {
  DistanceFn f;
  f.kind_ = DistanceKind::kCustom;
  f.fn_ = std::move(fn);
  return f;
}

double DistanceFn::operator()(const Record& a, const Record& b) const {
  switch (kind_) {
    case DistanceKind::kAbsScaled:
      return std::fabs(a[0] - b[0]) / scale_;
    case DistanceKind::kDiscrete:
      return a == b ? 0.0 : 1.0;
    case DistanceKind::kL2Scaled: {
      double s = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
      return std::sqrt(s) / scale_;
    }
    case DistanceKind::kCustom:
      return fn_(a, b);
  }
  return 0.0;
}

std::vector<double> average_distances(const Database& d, const DistanceFn& dist) {
  const std::size_t n = d.size();
  std::vector<double> avg(n, 0.0);
  if (n == 0) return avg;
  const double dn = static_cast<double>(n);
  if (dist.kind() == DistanceKind::kAbsScaled && d.dim() == 1) {
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return d[a][0] < d[b][0]; });
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + d[order[i]][0];
    // One evaluation per run of equal values, so copies tie exactly.
    for (std::size_t i0 = 0, i1; i0 < n; i0 = i1) {
      const double v = d[order[i0]][0];
      for (i1 = i0 + 1; i1 < n && d[order[i1]][0] == v;) ++i1;
      const double left = v * static_cast<double>(i0) - prefix[i0];
      const double right = (prefix[n] - prefix[i1]) - v * static_cast<double>(n - i1);
      const double a = (left + right) / (dist.scale() * dn);
      for (std::size_t i = i0; i < i1; ++i) avg[order[i]] = a;
    }
    return avg;
  }
  if (dist.kind() == DistanceKind::kDiscrete) {
    std::map<Record, std::size_t> counts;
    for (const auto& r : d.records()) ++counts[r];
    for (std::size_t i = 0; i < n; ++i) {
      avg[i] = static_cast<double>(n - counts[d[i]]) / dn;
    }
    return avg;
  }
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += dist(d[i], d[j]);
      avg[i] = s / dn;
    }
  };
  const std::size_t threads =
      n < 2000 ? 1 : std::max(1u, std::thread::hardware_concurrency());
  if (threads == 1) {
    work(0, n);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t t = 0; t < threads; ++t) {
      const std::size_t b = t * chunk, e = std::min(n, b + chunk);
      if (b < e) pool.emplace_back(work, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return avg;
}

Database poisson_sample(const Database& d, double keep_prob, RandomStream& rng) {
  if (!(keep_prob >= 0.0 && keep_prob <= 1.0)) {
    throw Error(Errc::kInvalidArgument, "keep probability must lie in [0,1]");
  }
  std::vector<std::size_t> kept;
  kept.reserve(static_cast<std::size_t>(keep_prob * static_cast<double>(d.size())) + 16);
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (rng.bernoulli(keep_prob)) kept.push_back(i);
  }
  return d.subset(kept);
}

std::vector<double> outlier_scores(const Database& d, const MMTransform& t) {
  if (d.empty()) throw Error(Errc::kInvalidArgument, "outlier scores need a nonempty database");
  auto s = average_distances(d, t.base);
  for (auto& v : s) v = t.m + (t.M - t.m) * v;
  return s;
}

Database suppress_with_scores(const Database& d, const std::vector<double>& scores,
                              RandomStream& rng) {
  std::vector<std::size_t> kept;
  kept.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!rng.bernoulli(scores[i])) kept.push_back(i);
  }
  return d.subset(kept);
}

Database outlier_score_suppress(const Database& d, const MMTransform& t,
                                RandomStream& rng) {
  if (d.empty()) return d;
  return suppress_with_scores(d, outlier_scores(d, t), rng);
}

Database suppress_by_set(const Database& d,
                         const std::function<bool(const Record&)>& in_a) {
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (in_a(d[i])) kept.push_back(i);
  }
  return d.subset(kept);
}

Database suppress_by_avg_threshold(const Database& d, double K, const DistanceFn& dist) {
  const auto avg = average_distances(d, dist);
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (avg[i] <= K) kept.push_back(i);
  }
  return d.subset(kept);
}

Database suppress_top_fraction(const Database& d, double P, const DistanceFn& dist) {
  if (!(P > 0.0 && P <= 0.5)) throw Error(Errc::kInvalidArgument, "fraction must lie in (0,0.5]");
  const auto k = static_cast<std::size_t>(std::floor(P * static_cast<double>(d.size())));
  if (k == 0) return d;
  const auto avg = average_distances(d, dist);
  auto sorted = avg;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double cutoff = sorted[k - 1];
  // Everything tied with the k-th largest goes too.
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (avg[i] < cutoff) kept.push_back(i);
  }
  return d.subset(kept);
}

SubMultiset SuppressionKernel::subset_of(std::uint64_t mask) const {
  SubMultiset c;
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (mask >> i & 1U) c.push_back(base[i]);
  }
  std::sort(c.begin(), c.end(), record_less);
  return c;
}

std::map<SubMultiset, double, CanonicalLess> SuppressionKernel::aggregate() const {
  std::map<SubMultiset, double, CanonicalLess> out;
  for (std::uint64_t mask = 0; mask < occ.size(); ++mask) {
    if (occ[mask] > 0.0) out[subset_of(mask)] += occ[mask];
  }
  return out;
}

double SuppressionKernel::prob(const SubMultiset& c) const {
  double p = 0.0;
  for (std::uint64_t mask = 0; mask < occ.size(); ++mask) {
    if (occ[mask] > 0.0 && subset_of(mask) == c) p += occ[mask];
  }
  return p;
}

double SuppressionKernel::total() const {
  double s = 0.0;
  for (double p : occ) s += p;
  return s;
}

SuppressionKernel product_kernel(const Database& d, const std::vector<double>& keep) {
  const std::size_t n = d.size();
  if (n > kMaxKernelSize) throw Error(Errc::kTooLarge, "kernel database exceeds 20 records");
  SuppressionKernel k;
  k.base = d;
  const std::uint64_t total = std::uint64_t{1} << n;
  k.occ.assign(total, 0.0);
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    double p = 1.0;
    for (std::size_t i = 0; i < n; ++i) p *= (mask >> i & 1U) ? keep[i] : 1.0 - keep[i];
    k.occ[mask] = p;
  }
  return k;
}

Database PoissonSampling::apply(const Database& d, RandomStream& rng) const {
  return poisson_sample(d, keep_, rng);
}

SuppressionKernel PoissonSampling::kernel(const Database& d) const {
  return product_kernel(d, std::vector<double>(d.size(), keep_));
}

Database OutlierScoreSuppression::apply(const Database& d, RandomStream& rng) const {
  return outlier_score_suppress(d, t_, rng);
}

SuppressionKernel OutlierScoreSuppression::kernel(const Database& d) const {
  if (d.empty()) return product_kernel(d, {});
  auto keep = outlier_scores(d, t_);
  for (auto& v : keep) v = 1.0 - v;
  return product_kernel(d, keep);
}

SuppressionKernel DeterministicSuppression::kernel(const Database& d) const {
  if (d.size() > kMaxKernelSize) throw Error(Errc::kTooLarge, "kernel database exceeds 20 records");
  SuppressionKernel k;
  k.base = d;
  k.occ.assign(std::uint64_t{1} << d.size(), 0.0);
  // Match each output record to the lowest unused equal occurrence.
  const Database out = fn_(d);
  std::uint64_t mask = 0;
  for (const auto& r : out.records()) {
    bool found = false;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!(mask >> i & 1U) && d[i] == r) {
        mask |= std::uint64_t{1} << i;
        found = true;
        break;
      }
    }
    if (!found) throw Error(Errc::kDomain, "suppression output is not a sub-multiset");
  }
  k.occ[mask] = 1.0;
  return k;
}

SuppressionKernel kernel_of(const SuppressionAlgorithm& alg, const Database& d) {
  return alg.kernel(d);
}

}  // namespace dpsupp
