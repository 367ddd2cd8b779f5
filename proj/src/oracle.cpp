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

#include "dpsupp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>

namespace dpsupp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_pair(const SuppressionKernel& kd, const SuppressionKernel& kdp,
                const Record& y) {
  const std::size_t n = kd.base.size();
  if (kdp.base.size() != n + 1) {
    throw Error(Errc::kInvalidArgument, "kernel base mismatch: D' must be D plus y");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (kd.base[i] != kdp.base[i]) {
      throw Error(Errc::kInvalidArgument, "kernel base mismatch at occurrence " +
                                              std::to_string(i));
    }
  }
  if (kdp.base[n] != y) {
    throw Error(Errc::kInvalidArgument, "kernel base mismatch: last occurrence is not y");
  }
  if (kd.occ.size() != (std::uint64_t{1} << n) ||
      kdp.occ.size() != (std::uint64_t{1} << (n + 1))) {
    throw Error(Errc::kInvalidArgument, "kernel table has the wrong size");
  }
}

}  // namespace

bool support_condition_holds(const SuppressionKernel& kd,
                             const SuppressionKernel& kdp, const Record& y) {
  check_pair(kd, kdp, y);
  const std::size_t n = kd.base.size();
  const std::uint64_t ybit = std::uint64_t{1} << n;
  for (std::uint64_t c = 0; c < kd.occ.size(); ++c) {
    const bool in_d = kd.occ[c] > 0.0;
    const bool in_dp = kdp.occ[c] > 0.0 || kdp.occ[c | ybit] > 0.0;
    if (in_d != in_dp) return false;
  }
  return true;
}

KernelBounds suppression_theorem_bounds(const SuppressionKernel& kd,
                                        const SuppressionKernel& kdp,
                                        const Record& y,
                                        const PrivacyParams& base) {
  if (!support_condition_holds(kd, kdp, y)) {
    throw Error(Errc::kDomain, "support condition violated");
  }
  const std::size_t n = kd.base.size();
  const std::uint64_t ybit = std::uint64_t{1} << n;
  const double em = std::exp(-base.epsilon);
  const double ep = std::exp(base.epsilon);
  double fwd = 0.0, bwd = 0.0, dsum = 0.0;
  for (std::uint64_t c = 0; c < kd.occ.size(); ++c) {
    const double p = kd.occ[c];
    if (p <= 0.0) continue;
    const double a = kdp.occ[c];
    const double b = kdp.occ[c | ybit];
    const double den = a + em * b;
    fwd = std::max(fwd, p / den);
    bwd = std::max(bwd, (a + ep * b) / p);
    dsum += p * em * b / den;
  }
  double py = 0.0;
  for (std::uint64_t c = 0; c < kdp.occ.size(); ++c) {
    if (c & ybit) py += kdp.occ[c];
  }
  KernelBounds kb;
  kb.eps_fwd = std::max(0.0, std::log(fwd));
  kb.eps_bwd = std::max(0.0, std::log(bwd));
  kb.delta_fwd = std::min(1.0, base.delta * dsum);
  kb.delta_bwd = std::min(1.0, base.delta * py);
  kb.pairs = 1;
  return kb;
}

KernelBounds exhaustive_epsilon_s(const SuppressionAlgorithm& alg,
                                  const std::vector<Database>& family,
                                  const std::vector<Record>& universe,
                                  const PrivacyParams& base,
                                  std::size_t max_pairs) {
  KernelBounds best;
  auto visit = [&](const Database& d, const Record& y) {
    if (d.size() + 1 > 12) {
      throw Error(Errc::kTooLarge, "exhaustive search is limited to 12 records");
    }
    if (++best.pairs > max_pairs) {
      throw Error(Errc::kTooLarge, "neighbor pair cap exceeded");
    }
    const Database dp = d.with(y);
    const auto kb = suppression_theorem_bounds(alg.kernel(d), alg.kernel(dp), y, base);
    best.eps_fwd = std::max(best.eps_fwd, kb.eps_fwd);
    best.eps_bwd = std::max(best.eps_bwd, kb.eps_bwd);
    best.delta_fwd = std::max(best.delta_fwd, kb.delta_fwd);
    best.delta_bwd = std::max(best.delta_bwd, kb.delta_bwd);
  };
  for (const auto& d : family) {
    for (const auto& y : universe) visit(d, y);
    for (std::size_t i = 0; i < d.size(); ++i) visit(d.without(i), d[i]);
  }
  return best;
}

double hockey_stick(const Distribution& p, const Distribution& q, double eps) {
  const double e = std::exp(eps);
  double s = 0.0;
  for (std::size_t o = 0; o < p.size(); ++o) s += std::max(p[o] - e * q[o], 0.0);
  return s;
}

double tight_dp_of_finite_mechanism(
    const std::vector<Distribution>& tables,
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs, double delta) {
  for (const auto& t : tables) {
    double s = 0.0;
    for (double v : t) {
      if (v < 0.0) throw Error(Errc::kInvalidArgument, "negative probability");
      s += v;
    }
    if (std::fabs(s - 1.0) > 1e-9) {
      throw Error(Errc::kInvalidArgument, "distribution not normalized");
    }
    if (t.size() != tables.front().size()) {
      throw Error(Errc::kInvalidArgument, "output alphabets differ");
    }
  }
  constexpr double kSlack = 1e-14;
  double result = 0.0;
  auto one_direction = [&](const Distribution& p, const Distribution& q) {
    double hi = 0.0;
    for (std::size_t o = 0; o < p.size(); ++o) {
      if (p[o] > 0.0 && q[o] > 0.0) hi = std::max(hi, std::log(p[o] / q[o]));
    }
    if (hockey_stick(p, q, hi) > delta + kSlack) return kInf;
    if (hockey_stick(p, q, 0.0) <= delta + kSlack) return 0.0;
    double lo = 0.0;
    while (hi - lo > 1e-13) {
      const double mid = 0.5 * (lo + hi);
      if (hockey_stick(p, q, mid) <= delta + kSlack) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    return hi;
  };
  for (const auto& [i, j] : pairs) {
    const auto& p = tables.at(i);
    const auto& q = tables.at(j);
    result = std::max(result, one_direction(p, q));
    result = std::max(result, one_direction(q, p));
  }
  return result;
}

SensitivityResult deterministic_sensitivity(
    const std::function<Database(const Database&)>& s,
    const std::vector<Database>& class_i,
    const std::vector<std::pair<Database, Database>>& pairs) {
  std::map<std::vector<Record>, std::size_t, CanonicalLess> index;
  std::vector<Database> nodes;
  for (const auto& d : class_i) {
    if (index.emplace(d.canonical(), nodes.size()).second) nodes.push_back(d);
  }
  const std::size_t k = nodes.size();
  std::vector<std::vector<std::size_t>> adj(k);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      if (symmetric_difference_size(nodes[i], nodes[j]) == 1) {
        adj[i].push_back(j);
        adj[j].push_back(i);
      }
    }
  }
  auto locate = [&](const Database& d) {
    auto it = index.find(d.canonical());
    if (it == index.end()) {
      throw Error(Errc::kDomain, "suppression image outside the intermediate class");
    }
    return it->second;
  };
  SensitivityResult res;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const std::size_t src = locate(s(pairs[p].first));
    const std::size_t dst = locate(s(pairs[p].second));
    std::vector<std::int64_t> dist(k, -1);
    std::deque<std::size_t> queue{src};
    dist[src] = 0;
    while (!queue.empty() && dist[dst] < 0) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t v : adj[u]) {
        if (dist[v] < 0) {
          dist[v] = dist[u] + 1;
          queue.push_back(v);
        }
      }
    }
    if (dist[dst] < 0) {
      res.infinite = true;
      res.witness = p;
      return res;
    }
    if (p == 0 || static_cast<std::uint64_t>(dist[dst]) > res.value) {
      res.value = static_cast<std::uint64_t>(dist[dst]);
      res.witness = p;
    }
  }
  return res;
}

std::vector<double> polytope_upper_limits(const std::vector<double>& a,
                                          const MMParams& mm) {
  const std::size_t n = a.size();
  const double dn = static_cast<double>(n);
  double sum = 0.0;
  for (double v : a) sum += v;
  std::vector<double> lim(n);
  for (std::size_t i = 0; i < n; ++i) {
    lim[i] = std::min(mm.m + (dn - 1.0) * mm.M, (dn - 2.0) * (a[i] - mm.m) + sum) / dn;
  }
  return lim;
}

std::vector<std::vector<double>> polytope_vertices(const std::vector<double>& a,
                                                   const MMParams& mm) {
  const std::size_t n = a.size();
  if (n == 0) throw Error(Errc::kInvalidArgument, "need N >= 1");
  if (n == 1) return {{mm.m}};
  const auto lim = polytope_upper_limits(a, mm);
  if (n == 2) return {{mm.m, mm.m}, {lim[0], lim[0]}};
  if (n > 20) throw Error(Errc::kTooLarge, "vertex enumeration limited to N <= 20");
  const double dn = static_cast<double>(n);
  std::vector<std::vector<double>> out;
  out.reserve(std::size_t{1} << n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    double rest = 0.0;
    std::size_t kk = 0;
    for (std::size_t l = 0; l < n; ++l) {
      if (mask >> l & 1U) {
        ++kk;
      } else {
        rest += lim[l];
      }
    }
    const double b = ((dn - 2.0) * mm.m + rest) / (2.0 * dn - 2.0 - static_cast<double>(kk));
    std::vector<double> z(n);
    for (std::size_t l = 0; l < n; ++l) z[l] = (mask >> l & 1U) ? b : lim[l];
    out.push_back(std::move(z));
  }
  return out;
}

bool polytope_contains(const std::vector<double>& z, const std::vector<double>& a,
                       const MMParams& mm, double tol) {
  const std::size_t n = a.size();
  const auto lim = polytope_upper_limits(a, mm);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (z[i] < mm.m - tol || z[i] > lim[i] + tol) return false;
    sum += z[i];
  }
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (sum > (2.0 * dn - 2.0) * z[i] - (dn - 2.0) * mm.m + tol) return false;
  }
  return true;
}

}  // namespace dpsupp

namespace dpsupp {

namespace {

// Every multiset over {0,1} with at most max_size records, plus all
// add-one neighbor pairs between them.
struct BinaryFamily {
  std::vector<Database> dbs;
  std::vector<std::pair<Database, Database>> pairs;
};

Database binary_db(std::size_t zeros, std::size_t ones) {
  std::vector<Record> r(zeros, Record{0.0});
  r.insert(r.end(), ones, Record{1.0});
  return Database(std::move(r), {{0.0, 1.0}});
}

BinaryFamily binary_family(std::size_t max_size) {
  BinaryFamily f;
  for (std::size_t a = 0; a <= max_size; ++a) {
    for (std::size_t b = 0; a + b <= max_size; ++b) {
      f.dbs.push_back(binary_db(a, b));
      if (a + b < max_size) {
        f.pairs.emplace_back(binary_db(a, b), binary_db(a + 1, b));
        f.pairs.emplace_back(binary_db(a, b), binary_db(a, b + 1));
      }
    }
  }
  return f;
}

}  // namespace

SensitivityResult sensitivity_set_family(std::size_t universe,
                                         const std::vector<double>& a_values) {
  if (universe == 0 || universe > 12) {
    throw Error(Errc::kInvalidArgument, "universe size must lie in 1..12");
  }
  const ValueBounds b{1.0, static_cast<double>(universe)};
  auto subset = [&](std::uint64_t mask) {
    std::vector<Record> r;
    for (std::size_t i = 0; i < universe; ++i) {
      if (mask >> i & 1U) r.push_back({static_cast<double>(i + 1)});
    }
    return Database(std::move(r), {b});
  };
  std::vector<Database> dbs;
  std::vector<std::pair<Database, Database>> pairs;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << universe); ++mask) {
    dbs.push_back(subset(mask));
    for (std::size_t i = 0; i < universe; ++i) {
      if (!(mask >> i & 1U)) pairs.emplace_back(subset(mask), subset(mask | (std::uint64_t{1} << i)));
    }
  }
  const auto in_a = [&](const Record& r) {
    return std::find(a_values.begin(), a_values.end(), r[0]) != a_values.end();
  };
  return deterministic_sensitivity(
      [&](const Database& d) { return suppress_by_set(d, in_a); }, dbs, pairs);
}

SensitivityResult sensitivity_threshold_family(std::size_t n, std::size_t big_n, double K) {
  if (n == 0 || big_n < 2) throw Error(Errc::kInvalidArgument, "need n >= 1 and N >= 2");
  const double nk = static_cast<double>(big_n) * K;
  if (!(K > 0.0 && K < 1.0) || std::fabs(nk - std::round(nk)) > 1e-12) {
    throw Error(Errc::kInvalidArgument, "K must lie in (0,1) with N*K integral");
  }
  const std::size_t size = n * big_n;
  if (size > 24) throw Error(Errc::kTooLarge, "family limited to n*N <= 24");
  const auto xs = static_cast<std::size_t>(std::llround(static_cast<double>(n) * nk));
  // D_n: n*N*K copies of x' = 0 and n*N*(1-K) copies of y' = 1, distance 1.
  // D'_n drops one copy of y', which is what makes y' an outlier there.
  auto fam = binary_family(size);
  fam.pairs.insert(fam.pairs.begin(), {binary_db(xs, size - xs - 1), binary_db(xs, size - xs)});
  const auto dist = DistanceFn::abs_scaled({0.0, 1.0});
  return deterministic_sensitivity(
      [&](const Database& d) { return suppress_by_avg_threshold(d, K, dist); }, fam.dbs,
      fam.pairs);
}

SensitivityResult sensitivity_top_fraction_family(std::size_t max_size, double P) {
  if (max_size == 0 || max_size > 24) throw Error(Errc::kInvalidArgument, "size must lie in 1..24");
  const auto fam = binary_family(max_size);
  const auto dist = DistanceFn::abs_scaled({0.0, 1.0});
  return deterministic_sensitivity(
      [&](const Database& d) { return suppress_top_fraction(d, P, dist); }, fam.dbs, fam.pairs);
}

}  // namespace dpsupp
