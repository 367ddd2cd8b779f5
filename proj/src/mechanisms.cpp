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

#include "dpsupp/mechanisms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dpsupp {

namespace {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// log Phi(x). The far left tail uses the asymptotic series, since erfc
// underflows long before e^eps * Phi(x) becomes negligible.
double log_normal_cdf(double x) {
  if (x > -30.0) return std::log(std_normal_cdf(x));
  const double r = 1.0 / (x * x);
  return -0.5 * x * x - std::log(-x) - 0.5 * std::log(2.0 * M_PI) +
         std::log1p(-r + 3.0 * r * r - 15.0 * r * r * r + 105.0 * r * r * r * r);
}

double sq_dist(const Record& a, const Record& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

void require_positive_eps(double eps) {
  if (!(eps > 0.0)) {
    throw Error(Errc::kInvalidArgument, "mechanism needs epsilon > 0");
  }
}

}  // namespace

PrivacyParams BudgetAudit::total() const {
  PrivacyParams t;
  for (const auto& s : spent) {
    t.epsilon += s.epsilon;
    t.delta += s.delta;
  }
  return t;
}

const char* noise_name(NoiseKind n) {
  switch (n) {
    case NoiseKind::kLaplace:
      return "laplace";
    case NoiseKind::kGaussian:
      return "gaussian";
    case NoiseKind::kExponential:
      return "exponential";
  }
  return "?";
}

const char* mode_variant_name(ModeVariant v) {
  switch (v) {
    case ModeVariant::kRnmLaplace:
      return "rnm-laplace";
    case ModeVariant::kRnmGaussian:
      return "rnm-gaussian";
    case ModeVariant::kRnmExponential:
      return "rnm-exponential";
    case ModeVariant::kExpMech:
      return "expmech";
  }
  return "?";
}

double laplace_draw(double scale, RandomStream& rng) {
  if (!(scale > 0.0)) throw Error(Errc::kInvalidArgument, "laplace scale must be > 0");
  const double u = rng.uniform_open() - 0.5;
  const double mag = -std::log1p(-2.0 * std::fabs(u));
  return u < 0.0 ? -scale * mag : scale * mag;
}

double exponential_draw(double scale, RandomStream& rng) {
  if (!(scale > 0.0)) {
    throw Error(Errc::kInvalidArgument, "exponential scale must be > 0");
  }
  return -scale * std::log(rng.uniform_open());
}

double gaussian_draw(double sigma, RandomStream& rng) {
  if (!(sigma >= 0.0)) throw Error(Errc::kInvalidArgument, "sigma must be >= 0");
  return sigma * rng.normal();
}

double gaussian_profile_delta(double eps, double sigma, double sens) {
  if (sens == 0.0) return 0.0;
  const double a = sens / (2.0 * sigma);
  const double b = eps * sigma / sens;
  const double first = std_normal_cdf(a - b);
  const double second = std::exp(eps + log_normal_cdf(-a - b));
  return first - second;
}

double analytic_gaussian_sigma(double eps, double delta, double sens) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error(Errc::kInvalidArgument, "gaussian mechanism needs delta in (0,1)");
  }
  if (!(eps >= 0.0)) throw Error(Errc::kInvalidArgument, "epsilon must be >= 0");
  if (!(sens >= 0.0)) throw Error(Errc::kInvalidArgument, "sensitivity must be >= 0");
  if (sens == 0.0) return 0.0;
  // Work at unit sensitivity; sigma scales linearly.
  double hi = 1.0;
  while (gaussian_profile_delta(eps, hi, 1.0) > delta) hi *= 2.0;
  double lo = hi;
  while (lo > 1e-300 && gaussian_profile_delta(eps, lo, 1.0) <= delta) lo /= 2.0;
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (gaussian_profile_delta(eps, mid, 1.0) > delta) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi * sens;
}

double noisy_average(const Database& d, const PrivacyParams& params,
                     NoiseKind noise, RandomStream& rng, BudgetAudit* audit) {
  if (d.dim() != 1) throw Error(Errc::kInvalidArgument, "noisy_average needs 1-dim data");
  require_positive_eps(params.epsilon);
  const auto& b = d.bounds()[0];
  const double sum_sens = std::max(std::fabs(b.lower), std::fabs(b.upper));
  double sum = 0.0;
  for (const auto& r : d.records()) sum += r[0];
  const double count = static_cast<double>(d.size());
  const double half = params.epsilon / 2.0;
  double zs = 0.0, zc = 0.0;
  if (noise == NoiseKind::kLaplace) {
    zs = laplace_draw(sum_sens / half, rng);
    zc = laplace_draw(1.0 / half, rng);
    if (audit) {
      audit->add(half, 0.0);
      audit->add(half, 0.0);
    }
  } else if (noise == NoiseKind::kGaussian) {
    const double hd = params.delta / 2.0;
    zs = gaussian_draw(analytic_gaussian_sigma(half, hd, sum_sens), rng);
    zc = gaussian_draw(analytic_gaussian_sigma(half, hd, 1.0), rng);
    if (audit) {
      audit->add(half, hd);
      audit->add(half, hd);
    }
  } else {
    throw Error(Errc::kInvalidArgument, "noisy_average supports laplace or gaussian");
  }
  const double noisy_count = std::max(1.0, count + zc);
  return (sum + zs) / noisy_count;
}

std::size_t report_noisy_max(const std::vector<double>& counts,
                             const std::vector<double>& sens,
                             const PrivacyParams& params, NoiseKind noise,
                             RandomStream& rng, BudgetAudit* audit) {
  if (counts.empty()) throw Error(Errc::kInvalidArgument, "empty count vector");
  if (sens.size() != counts.size()) {
    throw Error(Errc::kInvalidArgument, "sensitivity vector size mismatch");
  }
  for (double s : sens) {
    if (!(s > 0.0)) throw Error(Errc::kInvalidArgument, "sensitivities must be > 0");
  }
  require_positive_eps(params.epsilon);
  std::size_t best = 0;
  double best_v = -std::numeric_limits<double>::infinity();
  // Gaussian sigma depends only on the sensitivity; cache the last one.
  double cached_sens = -1.0, cached_sigma = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    double z = 0.0;
    switch (noise) {
      case NoiseKind::kLaplace:
        z = laplace_draw(sens[i] / params.epsilon, rng);
        break;
      case NoiseKind::kExponential:
        z = exponential_draw(2.0 * sens[i] / params.epsilon, rng);
        break;
      case NoiseKind::kGaussian:
        if (sens[i] != cached_sens) {
          cached_sens = sens[i];
          cached_sigma = analytic_gaussian_sigma(params.epsilon, params.delta, sens[i]);
        }
        z = gaussian_draw(cached_sigma, rng);
        break;
    }
    const double v = counts[i] + z;
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  // Bins act on disjoint records, so the whole vector costs one (eps, delta).
  if (audit) {
    audit->add(params.epsilon, noise == NoiseKind::kGaussian ? params.delta : 0.0);
  }
  return best;
}

std::size_t exponential_mechanism(const std::vector<double>& scores,
                                  double score_sensitivity, double eps,
                                  RandomStream& rng, BudgetAudit* audit) {
  if (scores.empty()) throw Error(Errc::kInvalidArgument, "empty item list");
  if (!(score_sensitivity > 0.0)) {
    throw Error(Errc::kInvalidArgument, "score sensitivity must be > 0");
  }
  if (!(eps >= 0.0)) throw Error(Errc::kInvalidArgument, "epsilon must be >= 0");
  std::vector<double> logw(scores.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scores.size(); ++i) {
    logw[i] = eps * scores[i] / (2.0 * score_sensitivity);
    mx = std::max(mx, logw[i]);
  }
  double total = 0.0;
  for (auto& w : logw) {
    w = std::exp(w - mx);
    total += w;
  }
  const double u = rng.uniform() * total;
  double acc = 0.0;
  std::size_t pick = scores.size() - 1;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    acc += logw[i];
    if (u < acc) {
      pick = i;
      break;
    }
  }
  if (audit) audit->add(eps, 0.0);
  return pick;
}

std::vector<double> integer_histogram(const Database& d) {
  if (d.dim() != 1) throw Error(Errc::kInvalidArgument, "histogram needs 1-dim data");
  const auto& b = d.bounds()[0];
  if (b.lower != std::floor(b.lower) || b.upper != std::floor(b.upper)) {
    throw Error(Errc::kInvalidArgument, "mode needs integral bounds");
  }
  const auto bins = static_cast<std::size_t>(b.upper - b.lower) + 1;
  std::vector<double> h(bins, 0.0);
  for (const auto& r : d.records()) {
    const double v = std::round(r[0]);
    h[static_cast<std::size_t>(v - b.lower)] += 1.0;
  }
  return h;
}

double compute_mode(const Database& d, ModeVariant variant,
                    const PrivacyParams& params, RandomStream& rng,
                    BudgetAudit* audit) {
  const auto h = integer_histogram(d);
  const double lower = d.bounds()[0].lower;
  std::size_t idx = 0;
  if (variant == ModeVariant::kExpMech) {
    const double mx = *std::max_element(h.begin(), h.end());
    std::vector<double> scores(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) scores[i] = h[i] - mx;
    idx = exponential_mechanism(scores, 1.0, params.epsilon, rng, audit);
  } else {
    const std::vector<double> sens(h.size(), 1.0);
    NoiseKind noise = NoiseKind::kLaplace;
    if (variant == ModeVariant::kRnmGaussian) noise = NoiseKind::kGaussian;
    if (variant == ModeVariant::kRnmExponential) noise = NoiseKind::kExponential;
    idx = report_noisy_max(h, sens, params, noise, rng, audit);
  }
  return lower + static_cast<double>(idx);
}

std::size_t nearest_center(const Record& r, const std::vector<Record>& centers) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double dd = sq_dist(r, centers[c]);
    if (dd < bd) {
      bd = dd;
      best = c;
    }
  }
  return best;
}

ClusteringResult dp_lloyd(const Database& d, std::size_t k,
                          const PrivacyParams& params, std::size_t iterations,
                          RandomStream& rng, BudgetAudit* audit) {
  if (k == 0) throw Error(Errc::kInvalidArgument, "k must be positive");
  if (iterations == 0) throw Error(Errc::kInvalidArgument, "iterations must be positive");
  require_positive_eps(params.epsilon);
  const std::size_t dim = d.dim();
  const auto& bounds = d.bounds();
  double sum_sens = 0.0;  // L1 sensitivity of the per-cluster sum vector
  for (const auto& b : bounds) sum_sens += std::max(std::fabs(b.lower), std::fabs(b.upper));

  ClusteringResult res;
  res.centers.assign(k, Record(dim, 0.0));
  for (auto& c : res.centers) {
    for (std::size_t j = 0; j < dim; ++j) {
      c[j] = bounds[j].lower + rng.uniform() * bounds[j].width();
    }
  }
  const double eps_it = params.epsilon / static_cast<double>(iterations);
  const double half = eps_it / 2.0;
  std::vector<Record> sums(k, Record(dim, 0.0));
  std::vector<double> counts(k, 0.0);
  for (std::size_t it = 0; it < iterations; ++it) {
    for (auto& s : sums) std::fill(s.begin(), s.end(), 0.0);
    std::fill(counts.begin(), counts.end(), 0.0);
    for (const auto& r : d.records()) {
      const std::size_t c = nearest_center(r, res.centers);
      counts[c] += 1.0;
      for (std::size_t j = 0; j < dim; ++j) sums[c][j] += r[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      const double nc = counts[c] + laplace_draw(1.0 / half, rng);
      Record ns(dim);
      for (std::size_t j = 0; j < dim; ++j) {
        ns[j] = sums[c][j] + laplace_draw(sum_sens / half, rng);
      }
      if (nc <= 0.0) continue;  // keeps the previous center
      for (std::size_t j = 0; j < dim; ++j) {
        res.centers[c][j] = std::clamp(ns[j] / nc, bounds[j].lower, bounds[j].upper);
      }
    }
    // Clusters are disjoint, so one iteration costs eps_it overall.
    if (audit) {
      audit->add(half, 0.0);
      audit->add(half, 0.0);
    }
  }
  res.assignment.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    res.assignment[i] = nearest_center(d[i], res.centers);
  }
  return res;
}

namespace {

double kmedian_total_cost(const Database& d, const std::vector<Record>& cands,
                          const std::vector<std::size_t>& medians) {
  double total = 0.0;
  for (const auto& r : d.records()) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t m : medians) best = std::min(best, sq_dist(r, cands[m]));
    total += std::sqrt(best);
  }
  return total;
}

}  // namespace

ClusteringResult dp_kmedian(const Database& d, const std::vector<Record>& cands,
                            std::size_t k, const PrivacyParams& params,
                            std::size_t iterations, RandomStream& rng,
                            BudgetAudit* audit) {
  if (k == 0) throw Error(Errc::kInvalidArgument, "k must be positive");
  if (k > cands.size()) throw Error(Errc::kInvalidArgument, "k exceeds candidate count");
  require_positive_eps(params.epsilon);
  const std::size_t n = d.size();
  double diam2 = 0.0;
  for (const auto& b : d.bounds()) diam2 += b.width() * b.width();
  const double sens = std::sqrt(diam2);
  const double eps_step = params.epsilon / static_cast<double>(iterations + 1);

  // Initial medians: k distinct candidates, partial Fisher-Yates.
  std::vector<std::size_t> perm(cands.size());
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + rng.uniform_int(cands.size() - i);
    std::swap(perm[i], perm[j]);
  }
  std::vector<std::size_t> medians(perm.begin(), perm.begin() + k);
  std::vector<char> is_median(cands.size(), 0);
  for (std::size_t m : medians) is_median[m] = 1;

  std::vector<std::vector<std::size_t>> history{medians};
  std::vector<double> d1(n), d2(n);
  std::vector<std::size_t> i1(n);
  std::vector<double> without(n);
  std::vector<double> scores;
  std::vector<std::pair<std::size_t, std::size_t>> swaps;
  for (std::size_t it = 0; it < iterations; ++it) {
    if (k == cands.size()) {
      history.push_back(medians);
      continue;
    }
    for (std::size_t x = 0; x < n; ++x) {
      d1[x] = d2[x] = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < k; ++a) {
        const double dd = std::sqrt(sq_dist(d[x], cands[medians[a]]));
        if (dd < d1[x]) {
          d2[x] = d1[x];
          d1[x] = dd;
          i1[x] = a;
        } else if (dd < d2[x]) {
          d2[x] = dd;
        }
      }
    }
    scores.clear();
    swaps.clear();
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t x = 0; x < n; ++x) without[x] = (i1[x] == a) ? d2[x] : d1[x];
      for (std::size_t c = 0; c < cands.size(); ++c) {
        if (is_median[c]) continue;
        double cost = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
          cost += std::min(without[x], std::sqrt(sq_dist(d[x], cands[c])));
        }
        scores.push_back(-cost);
        swaps.emplace_back(a, c);
      }
    }
    const auto pick = exponential_mechanism(scores, sens, eps_step, rng, audit);
    const auto [a, c] = swaps[pick];
    is_median[medians[a]] = 0;
    medians[a] = c;
    is_median[c] = 1;
    history.push_back(medians);
  }
  if (k == cands.size() && audit) {
    for (std::size_t it = 0; it < iterations; ++it) audit->add(eps_step, 0.0);
  }
  std::vector<double> final_scores;
  final_scores.reserve(history.size());
  for (const auto& h : history) final_scores.push_back(-kmedian_total_cost(d, cands, h));
  const auto chosen = exponential_mechanism(final_scores, sens, eps_step, rng, audit);

  ClusteringResult res;
  for (std::size_t m : history[chosen]) res.centers.push_back(cands[m]);
  res.assignment.resize(n);
  for (std::size_t x = 0; x < n; ++x) res.assignment[x] = nearest_center(d[x], res.centers);
  return res;
}

}  // namespace dpsupp
