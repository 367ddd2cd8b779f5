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

// Numerical check of the outlier-score bound: the objective pieces, a small
// differential-evolution maximizer, and the forward/inverse sweeps.

#include <algorithm>
#include <cmath>
#include <limits>

#include "dpsupp/oracle.hpp"

namespace dpsupp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Consts {
  double e, em1, m, M;
  Consts(double eps, const MMParams& mm)
      : e(std::exp(eps)), em1(std::expm1(eps)), m(mm.m), M(mm.M) {}
  // log(e^eps - (e^eps - 1) x)
  double first(double x) const {
    const double v = e - em1 * x;
    return v > 0.0 ? std::log(v) : kNegInf;
  }
};

// e * log((N + 1 + r) / (N + 1)) written with the excess r = ratio - 1.
double pow_term(double expo, double excess, double n) {
  if (expo == 0.0) return 0.0;
  const double arg = excess / (n + 1.0);
  if (arg <= -1.0) return kNegInf;
  return expo * std::log1p(arg);
}

double log_g_diag(const Consts& k, double n, double j, double c, double t) {
  const double u = ((n - 1.0) * (k.M + k.m) - j * c) / (2.0 * n - j - 2.0);
  if (t > u) return kNegInf;
  const double x = (k.m + j * c + (n - j) * t) / (n + 1.0);
  const double z = ((2.0 * n - j - 2.0) * t - (n - 2.0) * k.m + j * c) / n;
  if (z >= 1.0) return kNegInf;
  return k.first(x) + pow_term(j, (c - k.m) / k.m, n) +
         pow_term(n - j, (z - t) / (1.0 - z), n);
}

double log_g_k(const Consts& k, double n, double j, double kk, double c, double t) {
  const double rest = n - j - kk - 1.0;  // occurrences pinned at m
  const double u = ((n - 1.0) * (k.M + k.m) - (j * c + rest * k.m)) / (n + kk - 1.0);
  if (t > u) return kNegInf;
  const double b = ((n - 1.0) * (k.M + k.m) - (j * c + rest * k.m + t)) / (n + kk - 2.0);
  const double s = j * c + t + rest * k.m + kk * b;
  const double z = ((n - 2.0) * (t - k.m) + s) / n;
  const double w = (k.m + (n - 1.0) * k.M) / n;
  const double sn = s / n;
  if (z >= 1.0 || sn >= 1.0 || w >= 1.0) return kNegInf;
  return k.first((k.m + s) / (n + 1.0)) + pow_term(1.0, (z - t) / (1.0 - z), n) +
         pow_term(j, (c - k.m) / k.m, n) + pow_term(rest, (sn - k.m) / (1.0 - sn), n) +
         pow_term(kk, (w - b) / (1.0 - w), n);
}

double closed_form_forward(double eps, const MMParams& mm) {
  const double p1 = maximizer_p(eps, mm, Branch::kL1);
  const double p2 = maximizer_p(eps, mm, Branch::kL2);
  double v = std::max(bound_l1(eps, mm, p1), bound_l2(eps, mm, p2));
  for (double p : {0.0, 1.0}) {
    v = std::max({v, bound_l1(eps, mm, p), bound_l2(eps, mm, p)});
  }
  return v;
}

// The N = 1 and N = 2 cases, straight from f_{J,N} on their polytopes.
double log_small_case(const Consts& k, int n, int j, const std::vector<double>& x) {
  if (n == 1) {
    const double a = x[0];
    const double head = k.first((k.m + a) / 2.0);
    if (j == 1) return head + std::log((1.0 + a / k.m) / 2.0);
    return head + std::log((1.0 + (1.0 - a) / (1.0 - k.m)) / 2.0);
  }
  const double a1 = x[0], a2 = x[1];
  const double mp = 0.5 * std::min(k.M + k.m, a1 + a2);
  const double t = k.m + x[2] * (mp - k.m);
  double v = k.first((k.m + a1 + a2) / 3.0);
  const double aa[2] = {a1, a2};
  for (int i = 0; i < 2; ++i) {
    const double ratio = i < j ? aa[i] / t : (1.0 - aa[i]) / (1.0 - t);
    v += std::log((2.0 + ratio) / 3.0);
  }
  return v;
}

void pattern_polish(const std::function<double(const std::vector<double>&)>& f,
                    const std::vector<std::pair<double, double>>& bounds,
                    std::vector<double>& x, double& fx, std::uint64_t& evals,
                    std::uint64_t max_evals) {
  const std::size_t dim = x.size();
  std::vector<double> step(dim);
  for (std::size_t i = 0; i < dim; ++i) step[i] = 0.05 * (bounds[i].second - bounds[i].first);
  std::uint64_t used = 0;
  while (used < max_evals) {
    bool improved = false;
    bool any_step = false;
    for (std::size_t i = 0; i < dim; ++i) {
      const double width = bounds[i].second - bounds[i].first;
      if (step[i] <= 1e-14 * std::max(width, 1e-300)) continue;
      any_step = true;
      for (double dir : {1.0, -1.0}) {
        auto y = x;
        y[i] = std::clamp(y[i] + dir * step[i], bounds[i].first, bounds[i].second);
        if (y[i] == x[i]) continue;
        const double fy = f(y);
        ++evals;
        ++used;
        if (fy > fx) {
          x = std::move(y);
          fx = fy;
          improved = true;
          break;
        }
      }
    }
    if (!any_step) break;
    if (!improved) {
      for (auto& s : step) s *= 0.5;
    }
  }
}

}  // namespace

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kPass:
      return "pass";
    case Verdict::kFail:
      return "fail";
    case Verdict::kInconclusive:
      return "inconclusive";
  }
  return "?";
}

double log_f_jn(double eps, const MMParams& mm, const std::vector<double>& a,
                const std::vector<double>& z, std::size_t j) {
  const Consts k(eps, mm);
  const double n = static_cast<double>(a.size());
  double sum = 0.0;
  for (double v : a) sum += v;
  double v = k.first((mm.m + sum) / (n + 1.0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double ratio = i < j ? a[i] / z[i] : (1.0 - a[i]) / (1.0 - z[i]);
    v += std::log((n + ratio) / (n + 1.0));
  }
  return v;
}

double brute_force_small_n(double eps, const MMParams& mm, std::size_t n,
                           std::size_t grid) {
  if (n == 0 || n > 8) throw Error(Errc::kInvalidArgument, "brute force supports 1 <= N <= 8");
  if (grid < 2) grid = 2;
  std::vector<double> levels(grid);
  for (std::size_t g = 0; g < grid; ++g) {
    levels[g] = mm.m + (mm.M - mm.m) * static_cast<double>(g) / static_cast<double>(grid - 1);
  }
  double best = kNegInf;
  std::vector<std::size_t> idx(n, 0);
  std::vector<double> a(n);
  while (true) {
    for (std::size_t i = 0; i < n; ++i) a[i] = levels[idx[i]];
    std::vector<std::vector<double>> verts;
    if (n == 2) {
      // The N = 2 polytope is a segment; walk it rather than its endpoints.
      const double top = polytope_upper_limits(a, mm)[0];
      for (std::size_t g = 0; g < grid; ++g) {
        const double t = mm.m + (top - mm.m) * static_cast<double>(g) / static_cast<double>(grid - 1);
        verts.push_back({t, t});
      }
    } else {
      verts = polytope_vertices(a, mm);
    }
    for (const auto& z : verts) {
      for (std::size_t j = 0; j <= n; ++j) best = std::max(best, log_f_jn(eps, mm, a, z, j));
    }
    std::size_t pos = 0;
    while (pos < n && ++idx[pos] == grid) idx[pos++] = 0;
    if (pos == n) break;
  }
  return best;
}

double log_h_full(double eps, const MMParams& mm, double n, double c) {
  const Consts k(eps, mm);
  return k.first((mm.m + n * c) / (n + 1.0)) + pow_term(n, (c - mm.m) / mm.m, n);
}

double log_h_bar(double eps, const MMParams& mm, double n, double pj, double pk,
                 double c, double t) {
  const Consts k(eps, mm);
  pj = std::clamp(pj, 0.0, 1.0 - 1.0 / n);
  const double j = pj * n;
  const double free = std::max(0.0, n - j - 1.0);
  const double kk = pk * free;
  return std::max(log_g_diag(k, n, j, c, t), log_g_k(k, n, j, kk, c, t));
}

std::vector<double> verification_n_ladder() {
  std::vector<double> ladder;
  for (int n = 3; n <= 20; ++n) ladder.push_back(n);
  for (int i = 1; i <= 24; ++i) {
    const double v = std::round(20.0 * std::pow(50.0, i / 24.0));
    if (v > ladder.back()) ladder.push_back(v);
  }
  for (double v = 1e4; v <= 1e9; v *= 10.0) ladder.push_back(v);
  return ladder;
}

DEResult differential_evolution_max(
    const std::function<double(const std::vector<double>&)>& f,
    const std::vector<std::pair<double, double>>& bounds, const DEOptions& opt,
    RandomStream& rng) {
  const std::size_t dim = bounds.size();
  const std::size_t np = opt.population ? opt.population : std::max<std::size_t>(15 * dim, 8);
  std::vector<std::vector<double>> pop(np, std::vector<double>(dim));
  std::vector<double> fit(np);
  DEResult res;
  for (std::size_t i = 0; i < np; ++i) {
    for (std::size_t d = 0; d < dim; ++d) {
      pop[i][d] = bounds[d].first + rng.uniform() * (bounds[d].second - bounds[d].first);
    }
    fit[i] = f(pop[i]);
    ++res.evals;
  }
  std::size_t best = static_cast<std::size_t>(std::max_element(fit.begin(), fit.end()) - fit.begin());
  std::vector<double> trial(dim);
  const std::uint64_t polish_budget = opt.max_evals / 10;
  while (res.evals + np <= opt.max_evals - std::min(opt.max_evals, polish_budget)) {
    for (std::size_t i = 0; i < np; ++i) {
      std::size_t r1, r2, r3;
      do r1 = rng.uniform_int(np); while (r1 == i);
      do r2 = rng.uniform_int(np); while (r2 == i || r2 == r1);
      do r3 = rng.uniform_int(np); while (r3 == i || r3 == r1 || r3 == r2);
      const std::size_t forced = rng.uniform_int(dim);
      for (std::size_t d = 0; d < dim; ++d) {
        if (d == forced || rng.uniform() < opt.cr) {
          const double v = pop[r1][d] + opt.f * (pop[r2][d] - pop[r3][d]);
          trial[d] = std::clamp(v, bounds[d].first, bounds[d].second);
        } else {
          trial[d] = pop[i][d];
        }
      }
      const double ft = f(trial);
      ++res.evals;
      if (ft >= fit[i]) {
        pop[i] = trial;
        fit[i] = ft;
        if (ft > fit[best]) best = i;
      }
    }
    const double worst = *std::min_element(fit.begin(), fit.end());
    if (std::isfinite(worst) && fit[best] - worst < opt.tol) {
      res.converged = true;
      break;
    }
  }
  res.x = pop[best];
  res.value = fit[best];
  pattern_polish(f, bounds, res.x, res.value, res.evals, std::max<std::uint64_t>(polish_budget, 200));
  return res;
}

VerificationReport verify_bound_forward(double eps, const MMParams& mm,
                                        std::uint64_t budget, std::uint64_t seed) {
  VerificationReport rep;
  rep.closed_form = closed_form_forward(eps, mm);
  const Consts k(eps, mm);
  RandomStream root(seed, {"verify-forward"});
  double best = kNegInf;
  auto take = [&](double v, double n, double pj, double pk, double c, double t) {
    if (v > best) {
      best = v;
      rep.arg_n = n;
      rep.arg_pj = pj;
      rep.arg_pk = pk;
      rep.arg_c = c;
      rep.arg_t = t;
    }
  };
  const auto ladder = verification_n_ladder();
  const std::uint64_t per_run =
      std::max<std::uint64_t>(2000, budget / (ladder.size() + 5));

  // N = 1 and N = 2.
  for (int j = 0; j <= 1; ++j) {
    for (int g = 0; g <= 400; ++g) {
      const double a = mm.m + (mm.M - mm.m) * g / 400.0;
      take(log_small_case(k, 1, j, {a}), 1, j, 0, a, mm.m);
      ++rep.evaluations;
    }
  }
  for (int j = 0; j <= 2; ++j) {
    auto rs = root.child("n2").child(static_cast<std::uint64_t>(j));
    const std::vector<std::pair<double, double>> b = {{mm.m, mm.M}, {mm.m, mm.M}, {0.0, 1.0}};
    DEOptions opt;
    opt.max_evals = per_run;
    auto r = differential_evolution_max(
        [&](const std::vector<double>& x) { return log_small_case(k, 2, j, x); }, b, opt, rs);
    rep.evaluations += r.evals;
    take(r.value, 2, j / 2.0, 0, r.x[0], r.x[2]);
  }

  const std::vector<std::pair<double, double>> box = {
      {0.0, 1.0}, {0.0, 1.0}, {mm.m, mm.M}, {mm.m, mm.M}};
  for (double n : ladder) {
    // Every J = [N] configuration.
    for (int g = 0; g <= 200; ++g) {
      const double c = mm.m + (mm.M - mm.m) * g / 200.0;
      take(log_h_full(eps, mm, n, c), n, 1.0, 0.0, c, mm.m);
      ++rep.evaluations;
    }
    auto obj = [&](const std::vector<double>& x) {
      return log_h_bar(eps, mm, n, x[0], x[1], x[2], x[3]);
    };
    // Coarse deterministic grid as a safety net.
    std::vector<double> gbest;
    double gval = kNegInf;
    for (int a = 0; a <= 50; ++a) {
      for (double pk : {0.0, 0.5, 1.0}) {
        for (double c : {mm.m, 0.5 * (mm.m + mm.M), mm.M}) {
          std::vector<double> x = {a / 50.0, pk, c, mm.m};
          const double v = obj(x);
          ++rep.evaluations;
          if (v > gval) {
            gval = v;
            gbest = x;
          }
        }
      }
    }
    pattern_polish(obj, box, gbest, gval, rep.evaluations, 2000);
    take(gval, n, gbest[0], gbest[1], gbest[2], gbest[3]);

    auto rs = root.child(static_cast<std::uint64_t>(n));
    DEOptions opt;
    opt.max_evals = per_run;
    auto r = differential_evolution_max(obj, box, opt, rs);
    rep.evaluations += r.evals;
    take(r.value, n, r.x[0], r.x[1], r.x[2], r.x[3]);
  }

  rep.numeric_max = best;
  rep.gap = rep.closed_form - rep.numeric_max;
  if (rep.numeric_max > rep.closed_form + kVerifyTolerance) {
    rep.verdict = Verdict::kFail;
  } else if (rep.gap >= kVerifyTolerance) {
    rep.verdict = Verdict::kInconclusive;
  } else {
    rep.verdict = Verdict::kPass;
  }
  rep.within_tolerance = rep.verdict == Verdict::kPass;
  return rep;
}

VerificationReport verify_bound_inverse(double eps, const MMParams& mm) {
  VerificationReport rep;
  const double m = mm.m, M = mm.M;
  const double em = std::exp(-eps);
  const double r = (1.0 - M) / (1.0 - m);
  auto term = [&](double n) {
    return -std::log(em + (1.0 - em) * (m + n * M) / (n + 1.0)) +
           n * std::log1p((1.0 - r) / (n + r));
  };
  double best = kNegInf;
  auto visit = [&](double n) {
    const double v = term(n);
    ++rep.evaluations;
    if (v > best) {
      best = v;
      rep.arg_n = n;
    }
  };
  for (int n = 1; n <= 100000; ++n) visit(n);
  for (double lg = 5.0; lg <= 9.0 + 1e-12; lg += 0.01) visit(std::round(std::pow(10.0, lg)));
  const double second = -std::log(em + (1.0 - em) * m) + 1.0 - m / M;
  const double limit = -std::log(em + (1.0 - em) * M) + 1.0 - r;
  rep.numeric_max = std::max(best, second);
  rep.closed_form = std::max(limit, second);
  rep.gap = rep.closed_form - rep.numeric_max;
  rep.superfluous_ok = second <= epsilon_s(eps, mm).eps_s + 1e-12;
  if (rep.numeric_max > rep.closed_form + kVerifyTolerance) {
    rep.verdict = Verdict::kFail;
  } else if (rep.gap >= kVerifyTolerance) {
    rep.verdict = Verdict::kInconclusive;
  } else {
    rep.verdict = Verdict::kPass;
  }
  rep.within_tolerance = rep.verdict == Verdict::kPass;
  return rep;
}

}  // namespace dpsupp
