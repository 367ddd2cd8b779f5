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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dpsupp/oracle.hpp"

using namespace dpsupp;

namespace {

const ValueBounds kUnit{0.0, 1.0};

Database db1(std::initializer_list<double> xs) {
  std::vector<Record> r;
  for (double x : xs) r.push_back({x});
  return Database(r, {kUnit});
}

}  // namespace

TEST_CASE("poisson kernel bounds equal the amplification bound") {
  for (double p : {0.1, 0.5, 0.9}) {
    for (double e : {0.25, 1.0, 3.0}) {
      const PoissonSampling s(p);
      const auto d = db1({0.1, 0.4, 0.4});
      const Record y{0.8};
      const auto kb =
          suppression_theorem_bounds(s.kernel(d), s.kernel(d.with(y)), y, {e, 1e-5});
      const auto amp = amplify_poisson({e, 1e-5}, p);
      // Removal direction is the smaller one; the larger side is exact.
      CHECK(kb.eps_fwd == doctest::Approx(-std::log1p(p * std::expm1(-e))).epsilon(1e-12));
      CHECK(kb.eps_bwd == doctest::Approx(amp.epsilon).epsilon(1e-12));
      CHECK(kb.delta_bwd == doctest::Approx(amp.delta).epsilon(1e-12));
      CHECK(kb.delta_fwd <= amp.delta * (1 + 1e-12));
    }
  }
}

TEST_CASE("outlier-score kernels stay within the closed-form bound") {
  RandomStream rng(21, {"kernels"});
  for (int t = 0; t < 60; ++t) {
    const double m = 0.05 + 0.9 * rng.uniform();
    const double M = m + (0.95 - m) * rng.uniform();
    const double e = 2.0 * rng.uniform();
    const OutlierScoreSuppression alg({m, M, DistanceFn::abs_scaled(kUnit)});
    std::vector<Record> r;
    const auto n = rng.uniform_int(7);
    for (std::uint64_t i = 0; i < n; ++i) r.push_back({std::round(4 * rng.uniform()) / 4});
    const Database d(r, {kUnit});
    const Record y{std::round(4 * rng.uniform()) / 4};
    const auto kb = suppression_theorem_bounds(alg.kernel(d), alg.kernel(d.with(y)), y, {e, 0});
    const double bound = epsilon_s(e, {m, M}).eps_s;
    CHECK(kb.eps_fwd <= bound + 1e-9);
    CHECK(kb.eps_bwd <= bound + 1e-9);
  }
}

TEST_CASE("support condition") {
  const PoissonSampling s(0.5);
  const auto d = db1({0.2});
  const Record y{0.6};
  CHECK(support_condition_holds(s.kernel(d), s.kernel(d.with(y)), y));
  // Removing y's neighbour deterministically breaks it.
  const DeterministicSuppression keep_all([](const Database& x) { return x; });
  const DeterministicSuppression drop_small([](const Database& x) {
    return suppress_by_set(x, [&](const Record& r) { return x.size() < 2 || r[0] > 0.5; });
  });
  CHECK(support_condition_holds(keep_all.kernel(d), keep_all.kernel(d.with(y)), y));
  CHECK_FALSE(support_condition_holds(drop_small.kernel(d), drop_small.kernel(d.with(y)), y));
  CHECK_THROWS_AS(suppression_theorem_bounds(drop_small.kernel(d), drop_small.kernel(d.with(y)),
                                             y, {1.0, 0.0}),
                  Error);
  CHECK_THROWS_AS(support_condition_holds(s.kernel(d), s.kernel(d), y), Error);
}

TEST_CASE("exhaustive search over a small family") {
  const OutlierScoreSuppression alg({0.3, 0.6, DistanceFn::abs_scaled(kUnit)});
  const std::vector<Database> fam = {db1({}), db1({0.0}), db1({0.0, 1.0}), db1({1.0, 1.0, 0.5})};
  const auto kb = exhaustive_epsilon_s(alg, fam, {{0.0}, {0.5}, {1.0}}, {1.0, 0.0});
  CHECK(kb.pairs == 4 * 3 + 6);
  CHECK(kb.eps_fwd <= epsilon_s(1.0, {0.3, 0.6}).eps_s + 1e-9);
  CHECK(kb.eps_fwd > 0.0);
  CHECK_THROWS_AS(exhaustive_epsilon_s(alg, fam, {{0.0}}, {1.0, 0.0}, 3), Error);
}

TEST_CASE("tight dp of finite mechanisms") {
  // Randomized response with flip probability 1/(1+e).
  const double e = 1.0;
  const double q = 1.0 / (1.0 + std::exp(e));
  const std::vector<Distribution> rr = {{1 - q, q}, {q, 1 - q}};
  CHECK(tight_dp_of_finite_mechanism(rr, {{0, 1}}, 0.0) == doctest::Approx(e).epsilon(1e-10));
  CHECK(tight_dp_of_finite_mechanism(rr, {{0, 1}}, 1.0) == 0.0);
  CHECK(hockey_stick({1 - q, q}, {q, 1 - q}, e) == doctest::Approx(0.0));
  // Disjoint support needs delta.
  const std::vector<Distribution> split = {{0.9, 0.1, 0.0}, {0.9, 0.0, 0.1}};
  CHECK(std::isinf(tight_dp_of_finite_mechanism(split, {{0, 1}}, 0.05)));
  CHECK(tight_dp_of_finite_mechanism(split, {{0, 1}}, 0.1) == 0.0);
  CHECK_THROWS_AS(tight_dp_of_finite_mechanism({{0.5, 0.4}}, {}, 0.0), Error);

  // Poisson-sampled randomized response is tight at the amplification bound.
  const double p = 0.4;
  const std::vector<Distribution> amp = {{1 - q, q}, {(1 - p) * (1 - q) + p * q, (1 - p) * q + p * (1 - q)}};
  CHECK(tight_dp_of_finite_mechanism(amp, {{0, 1}}, 0.0) ==
        doctest::Approx(amplify_poisson({e, 0.0}, p).epsilon).epsilon(1e-9));
}

TEST_CASE("deterministic sensitivities") {
  const auto set = sensitivity_set_family(4, {1.0, 3.0});
  CHECK_FALSE(set.infinite);
  CHECK(set.value == 1);
  for (std::size_t n = 1; n <= 3; ++n) {
    const auto thr = sensitivity_threshold_family(n, 2, 0.5);
    CHECK_FALSE(thr.infinite);
    CHECK(thr.value == n);
  }
  CHECK(sensitivity_threshold_family(3, 2, 0.5).witness == 0);
  for (std::size_t size : {4, 8, 12}) {
    const auto top = sensitivity_top_fraction_family(size, 0.5);
    CHECK(top.value == size / 2);
  }
  CHECK_THROWS_AS(sensitivity_threshold_family(1, 3, 0.5), Error);

  // A suppression that can leave the class gets caught.
  const auto fam = std::vector<Database>{db1({}), db1({0.0})};
  CHECK_THROWS_AS(deterministic_sensitivity([](const Database&) { return db1({0.5}); }, fam,
                                            {{fam[0], fam[1]}}),
                  Error);
}

TEST_CASE("polytope") {
  const MMParams mm{0.2, 0.7};
  const std::vector<double> a = {0.2, 0.5, 0.7, 0.4};
  const auto verts = polytope_vertices(a, mm);
  CHECK(verts.size() == 16);
  for (const auto& v : verts) CHECK(polytope_contains(v, a, mm, 1e-12));
  CHECK(polytope_contains(std::vector<double>(4, 0.2), a, mm, 1e-12));
  CHECK_FALSE(polytope_contains({0.1, 0.3, 0.3, 0.3}, a, mm, 1e-12));
  CHECK(polytope_vertices({0.3}, mm) == std::vector<std::vector<double>>{{0.2}});
}

TEST_CASE("brute force agrees with the closed form on small N") {
  for (double e : {0.5, 1.0}) {
    for (auto mm : {MMParams{0.2, 0.6}, MMParams{0.4, 0.9}}) {
      const double cf = epsilon_s(e, mm).eps_s;
      for (std::size_t n : {1, 2, 3}) {
        const double bf = brute_force_small_n(e, mm, n, 12);
        CHECK(bf <= cf + 1e-9);
      }
    }
  }
}
