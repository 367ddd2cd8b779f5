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

#include "dpsupp/harness.hpp"
#include "dpsupp/mechanisms.hpp"

using namespace dpsupp;

namespace {

Database constant_db(double v, std::size_t n, ValueBounds b = {0.0, 125.0}) {
  return Database(std::vector<Record>(n, Record{v}), {b});
}

}  // namespace

TEST_CASE("laplace draws") {
  RandomStream rng(1, {"lap"});
  double sum = 0.0;
  int beyond = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double x = laplace_draw(1.0, rng);
    sum += x;
    beyond += std::fabs(x) > std::log(2.0);
  }
  CHECK(std::fabs(sum / n) < 0.02);
  CHECK(std::fabs(static_cast<double>(beyond) / n - 0.5) < 0.01);

  RandomStream s1(5, {"h"}), s2(5, {"h"});
  for (int i = 0; i < 50; ++i) CHECK(laplace_draw(2.0, s2) == doctest::Approx(2.0 * laplace_draw(1.0, s1)).epsilon(1e-15));
  CHECK_THROWS_AS(laplace_draw(0.0, s1), Error);
}

TEST_CASE("analytic gaussian calibration") {
  CHECK(analytic_gaussian_sigma(1.0, 1e-6, 0.0) == 0.0);
  const double s = analytic_gaussian_sigma(1.0, 1e-6, 1.0);
  CHECK(s <= std::sqrt(2.0 * std::log(1.25e6)));
  CHECK(s > 0.0);
  CHECK(analytic_gaussian_sigma(1.0, 1e-6, 3.0) == doctest::Approx(3.0 * s).epsilon(1e-9));
  for (double eps : {0.1, 0.5, 1.0, 3.0}) {
    for (double delta : {1e-3, 1e-6, 1e-9}) {
      const double sig = analytic_gaussian_sigma(eps, delta, 1.0);
      const double prof = gaussian_profile_delta(eps, sig, 1.0);
      CHECK(prof <= delta + 1e-12);
      CHECK(prof >= delta - 1e-6);
    }
  }
}

TEST_CASE("noisy average noiseless limit and budget split") {
  RandomStream rng(2);
  const auto d = constant_db(40.0, 50);
  for (auto noise : {NoiseKind::kLaplace, NoiseKind::kGaussian}) {
    BudgetAudit audit;
    const double delta = noise == NoiseKind::kGaussian ? 1e-6 : 0.0;
    const double v = noisy_average(d, {1e6, delta}, noise, rng, &audit);
    CHECK(std::fabs(v - 40.0) < 0.02);
    CHECK(audit.total().epsilon == doctest::Approx(1e6));
    CHECK(audit.total().delta == doctest::Approx(delta));
  }
  // Empty input goes through the clamped count.
  const Database empty(std::vector<Record>{}, {{0.0, 125.0}});
  CHECK(std::isfinite(noisy_average(empty, {1.0, 0.0}, NoiseKind::kLaplace, rng)));
}

TEST_CASE("report noisy max") {
  RandomStream rng(3, {"rnm"});
  int hits = 0;
  for (int i = 0; i < 10000; ++i) {
    hits += report_noisy_max({10, 0, 0}, {1, 1, 1}, {1e6, 0.0}, NoiseKind::kLaplace, rng) == 0;
  }
  CHECK(hits > 9990);

  // Equal counts: uniform within 3-sigma bands.
  std::vector<int> freq(4, 0);
  for (int i = 0; i < 10000; ++i) {
    ++freq[report_noisy_max({5, 5, 5, 5}, {1, 1, 1, 1}, {1.0, 0.0}, NoiseKind::kExponential, rng)];
  }
  const double sd = std::sqrt(10000 * 0.25 * 0.75);
  for (int f : freq) CHECK(std::fabs(f - 2500.0) < 3 * sd);

  // [3, 0] with Laplace(1): compare with an independent Monte-Carlo oracle.
  RandomStream oracle(99, {"oracle"});
  int ok = 0;
  const int big = 1000000;
  for (int i = 0; i < big; ++i) ok += 3.0 + laplace_draw(1.0, oracle) > laplace_draw(1.0, oracle);
  int correct = 0;
  for (int i = 0; i < 20000; ++i) {
    correct += report_noisy_max({3, 0}, {1, 1}, {1.0, 0.0}, NoiseKind::kLaplace, rng) == 0;
  }
  CHECK(std::fabs(correct / 20000.0 - static_cast<double>(ok) / big) < 0.01);
}

TEST_CASE("exponential mechanism") {
  RandomStream rng(4, {"em"});
  int first = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) first += exponential_mechanism({0.0, -1.0}, 1.0, 2.0, rng) == 0;
  CHECK(std::fabs(static_cast<double>(first) / n - 1.0 / (1.0 + std::exp(-1.0))) < 0.005);

  std::vector<int> freq(3, 0);
  for (int i = 0; i < 30000; ++i) ++freq[exponential_mechanism({0.0, -5.0, -9.0}, 1.0, 0.0, rng)];
  const double sd = std::sqrt(30000 * (1.0 / 3) * (2.0 / 3));
  for (int f : freq) CHECK(std::fabs(f - 10000.0) < 3 * sd);
}

TEST_CASE("mode mechanisms") {
  RandomStream rng(5);
  const auto single = Database({{7.0}}, {{0.0, 20.0}});
  for (auto v : {ModeVariant::kRnmLaplace, ModeVariant::kRnmGaussian, ModeVariant::kRnmExponential,
                 ModeVariant::kExpMech}) {
    CHECK(compute_mode(single, v, {1e6, 1e-6}, rng) == 7.0);
  }
  BudgetAudit audit;
  compute_mode(single, ModeVariant::kRnmGaussian, {1.0, 1e-6}, rng, &audit);
  CHECK(audit.total().epsilon == doctest::Approx(1.0));
  CHECK(audit.total().delta == doctest::Approx(1e-6));
}

TEST_CASE("mode on a dominant value never fails") {
  const auto d = load_column(DPSUPP_DATA_DIR "/adult.csv", "hours-per-week", {0.0, 100.0});
  const double truth = true_mode(d);
  CHECK(truth == 40.0);
  RandomStream rng(6, {"hpw"});
  int wrong = 0;
  for (int i = 0; i < 2000; ++i) {
    wrong += compute_mode(d, ModeVariant::kRnmLaplace, {0.25, 0.0}, rng) != truth;
  }
  CHECK(wrong == 0);
}

TEST_CASE("dp lloyd") {
  RandomStream rng(7);
  std::vector<Record> pts = {{0.2, -0.4}, {0.4, 0.0}, {-0.3, 0.1}, {0.1, 0.5}};
  const Database d(pts, {{-1.0, 1.0}, {-1.0, 1.0}});
  BudgetAudit audit;
  const auto res = dp_lloyd(d, 1, {1e7, 0.0}, 1, rng, &audit);
  CHECK(res.centers[0][0] == doctest::Approx(0.1).epsilon(1e-3));
  CHECK(res.centers[0][1] == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(audit.total().epsilon == doctest::Approx(1e7));

  BudgetAudit a5;
  dp_lloyd(d, 3, {1.0, 0.0}, 5, rng, &a5);
  CHECK(a5.total().epsilon == doctest::Approx(1.0));
}

TEST_CASE("dp k-median") {
  RandomStream rng(8);
  const std::vector<Record> cands = {{0.0, 0.0}, {0.5, 0.0}, {0.0, 0.5}};
  const Database d({{0.0, 0.0}, {0.5, 0.0}, {0.0, 0.5}}, {{0.0, 0.5}, {0.0, 0.5}});
  const auto all = dp_kmedian(d, cands, 3, {1.0, 0.0}, 4, rng);
  CHECK(all.centers.size() == 3);
  CHECK(metric_kmedian_cost(d, all.centers) == 0.0);

  // One cluster of identical points: large eps picks that point.
  const Database same(std::vector<Record>(20, Record{0.5, 0.0}), {{0.0, 0.5}, {0.0, 0.5}});
  int hit = 0;
  for (int i = 0; i < 50; ++i) {
    BudgetAudit audit;
    const auto r = dp_kmedian(same, cands, 1, {1e4, 0.0}, 3, rng, &audit);
    hit += r.centers[0] == Record{0.5, 0.0};
    CHECK(audit.total().epsilon == doctest::Approx(1e4));
  }
  CHECK(hit == 50);
}
