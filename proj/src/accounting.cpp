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

#include "dpsupp/accounting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dpsupp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_prob(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(Errc::kInvalidArgument, std::string(what) + " must lie in [0,1]");
  }
}

// log(e^eps - (e^eps - 1) x), written so that large eps does not overflow.
double log_first(double eps, double x) {
  // Grid scans call this with a fixed eps; skip the repeated expm1.
  thread_local double last_eps = -1.0, last_em1 = 0.0;
  if (eps != last_eps) {
    last_eps = eps;
    last_em1 = std::expm1(-eps);
  }
  return eps + std::log1p(x * last_em1);
}

}  // namespace

MMParams MMParams::make(double m, double M) {
  if (!(m > 0.0 && m < 1.0 && M > 0.0 && M < 1.0)) {
    throw Error(Errc::kInvalidArgument, "m and M must lie in (0,1)");
  }
  if (!(m <= M)) throw Error(Errc::kInvalidArgument, "need m <= M");
  return MMParams{m, M};
}

const char* branch_name(Branch b) {
  switch (b) {
    case Branch::kL1:
      return "l1";
    case Branch::kL2:
      return "l2";
    case Branch::kL3:
      return "l3";
  }
  return "?";
}

PrivacyParams amplify_poisson(const PrivacyParams& pp, double p) {
  check_prob(p, "keep probability");
  PrivacyParams out;
  out.epsilon = std::log1p(p * std::expm1(pp.epsilon));
  out.delta = pp.delta * p;
  return out;
}

PrivacyParams calibrate_sampling(const PrivacyParams& target, double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw Error(Errc::kInvalidArgument, "keep probability must lie in (0,1]");
  }
  if (target.delta / p > 1.0) {
    throw Error(Errc::kInfeasible, "delta/p exceeds 1");
  }
  PrivacyParams out;
  // ln((e^eps - (1-p))/p) = ln(1 + expm1(eps)/p)
  out.epsilon = std::log1p(std::expm1(target.epsilon) / p);
  out.delta = target.delta / p;
  return out;
}

PrivacyParams group_bound_deterministic(
    const PrivacyParams& pp, std::optional<std::uint64_t> sensitivity) {
  if (!sensitivity) {
    if (pp.epsilon == 0.0 && pp.delta == 0.0) return {0.0, 0.0};
    return {kInf, 1.0};
  }
  const std::uint64_t k = *sensitivity;
  if (k == 0) return {0.0, 0.0};
  PrivacyParams out;
  out.epsilon = pp.epsilon * static_cast<double>(k);
  double sum = 0.0;
  if (pp.epsilon == 0.0) {
    sum = static_cast<double>(k);
  } else {
    // sum_{j<k} e^{eps j} = expm1(eps k) / expm1(eps)
    sum = std::expm1(pp.epsilon * static_cast<double>(k)) / std::expm1(pp.epsilon);
  }
  out.delta = std::min(1.0, pp.delta * sum);
  return out;
}

double bound_l1(double eps, const MMParams& mm, double p) {
  const double m = mm.m, M = mm.M;
  const double s = p * M + (1.0 - p) * m;
  return log_first(eps, s) + p * M / m + (1.0 - p) * (1.0 - m) / (1.0 - s) - 1.0;
}

double bound_l2(double eps, const MMParams& mm, double p) {
  const double m = mm.m, M = mm.M;
  const double q = ((M + m) - p * M) / (2.0 - p);
  return log_first(eps, p * M + (1.0 - p) * q) + p * M / m + (1.0 - p) * (1.0 - q) / (1.0 - M) - 1.0;
}

double bound_l3(double eps, const MMParams& mm) {
  const double m = mm.m, M = mm.M;
  const double em = std::exp(-eps);
  return -std::log(em + (1.0 - em) * M) + 1.0 - (1.0 - M) / (1.0 - m);
}

double cubic_root_closed_form(double a, double b, double c, double d) {
  const double d0 = b * b - 3.0 * a * c;
  const double d1 = 2.0 * b * b * b - 9.0 * a * b * c + 27.0 * a * a * d;
  const double disc = d1 * d1 - 4.0 * d0 * d0 * d0;
  if (disc > 0.0) {
    const double s = std::sqrt(disc);
    return -(b + std::cbrt((d1 + s) / 2.0) + std::cbrt((d1 - s) / 2.0)) /
           (3.0 * a);
  }
  const double r = std::sqrt(d0 * d0 * d0);
  double arg = r > 0.0 ? d1 / (2.0 * r) : 1.0;
  arg = std::clamp(arg, -1.0, 1.0);
  return -(b + 2.0 * std::sqrt(std::max(d0, 0.0)) * std::cos(std::acos(arg) / 3.0)) /
         (3.0 * a);
}

double maximizer_p(double eps, const MMParams& mm, Branch branch) {
  const double m = mm.m, M = mm.M;
  if (branch == Branch::kL3) return 0.0;
  if (m == M) return 0.0;
  double v = 0.0;
  if (eps == 0.0) {
    if (branch == Branch::kL1) {
      v = (1.0 - m) / (M - m) -
          std::sqrt(M * m * (1.0 - m) * (1.0 - M)) / (M * (M - m));
    } else {
      v = 2.0 - std::sqrt(m * (1.0 - M)) / (1.0 - M);
    }
  } else {
    // Coefficients divided through by e^eps; the root is unchanged and
    // nothing overflows for large eps.
    const double E = 1.0;
    const double Em1 = -std::expm1(-eps);
    const double one = std::exp(-eps);
    double a, b, c, d;
    if (branch == Branch::kL1) {
      a = Em1 * (M / m) * (M - m) * (M - m);
      b = -((M - m) / m) * ((m * m - 4.0 * M * m + 2.0 * M) * Em1 + E * M);
      c = ((1.0 - m) / m) * (Em1 * (2.0 * m * m - 4.0 * M * m - m) + (3.0 * E - one) * M);
      d = -(1.0 - m) * (Em1 * (m - 2.0) + E / m);
    } else {
      a = (E - Em1 * m) / m;
      b = -(6.0 * E - Em1 * (M + 5.0 * m)) / m;
      c = (1.0 / ((1.0 - M) * m)) *
          (m * (Em1 * (m + 9.0 * M - 9.0) - E) +
           4.0 * M * (Em1 * M - 4.0 * E + one) + 12.0 * E);
      d = -(2.0 * E - Em1 * (M + m)) * ((4.0 - 4.0 * M - m) / ((1.0 - M) * m)) +
          2.0 * Em1;
    }
    v = cubic_root_closed_form(a, b, c, d);
  }
  if (std::isnan(v)) return 0.0;
  return std::clamp(v, 0.0, 1.0);
}

BoundReport epsilon_s(double eps, const MMParams& mm, double delta) {
  if (!(eps >= 0.0)) throw Error(Errc::kInvalidArgument, "epsilon must be >= 0");
  if (!(mm.m >= 0.0 && mm.M <= 1.0 && mm.m <= mm.M)) {
    throw Error(Errc::kInvalidArgument, "need 0 <= m <= M <= 1");
  }
  BoundReport r;
  r.delta_s = delta * (1.0 - mm.m);
  r.outside_verified = eps > 100.0;
  if (mm.m == 0.0 || mm.M == 1.0) {
    r.infinite = true;
    r.eps_s = kInf;
    return r;
  }
  struct Cand {
    double v;
    double p;
    Branch b;
  };
  const double p1 = maximizer_p(eps, mm, Branch::kL1);
  const double p2 = maximizer_p(eps, mm, Branch::kL2);
  Cand best{bound_l3(eps, mm), 0.0, Branch::kL3};
  const Cand cands[] = {
      {bound_l1(eps, mm, p1), p1, Branch::kL1},
      {bound_l1(eps, mm, 0.0), 0.0, Branch::kL1},
      {bound_l1(eps, mm, 1.0), 1.0, Branch::kL1},
      {bound_l2(eps, mm, p2), p2, Branch::kL2},
      {bound_l2(eps, mm, 0.0), 0.0, Branch::kL2},
      {bound_l2(eps, mm, 1.0), 1.0, Branch::kL2},
  };
  for (const auto& c : cands) {
    if (c.v > best.v) best = c;
  }
  r.eps_s = best.v;
  r.argmax_p = best.p;
  r.active_branch = best.b;
  return r;
}

double delta_s(double delta, const MMParams& mm) {
  check_prob(delta, "delta");
  return delta * (1.0 - mm.m);
}

PrivacyParams calibrate_suppression(const PrivacyParams& target,
                                    const MMParams& mm) {
  const double dd = target.delta / (1.0 - mm.m);
  if (dd > 1.0) throw Error(Errc::kInfeasible, "delta/(1-m) exceeds 1");
  auto f = [&](double e) { return epsilon_s(e, mm).eps_s; };
  double lo = 0.0, hi = 200.0;
  double flo = f(lo), fhi = f(hi);
  if (target.epsilon < flo) {
    std::ostringstream os;
    os << "target epsilon " << target.epsilon << " below eps_s(0,m,M) = " << flo;
    throw Error(Errc::kInfeasible, os.str());
  }
  if (target.epsilon > fhi) {
    throw Error(Errc::kDomain, "target epsilon beyond calibration range");
  }
  while (hi - lo > 1e-11) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm < flo - 1e-12 || fm > fhi + 1e-12) {
      std::ostringstream os;
      os << "eps_s not monotone in eps near " << mid << " (m=" << mm.m
         << ", M=" << mm.M << ")";
      throw Error(Errc::kDomain, os.str());
    }
    if (fm <= target.epsilon) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  return PrivacyParams{lo, dd};
}

double poisson_floor(double eps, const MMParams& mm) {
  return std::log1p((1.0 - mm.m) * std::expm1(eps));
}

}  // namespace dpsupp
