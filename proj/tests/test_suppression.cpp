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
#include <map>

#include "dpsupp/suppression.hpp"

using namespace dpsupp;

namespace {

const ValueBounds kUnit{0.0, 1.0};

Database db1(std::initializer_list<double> xs, ValueBounds b = kUnit) {
  std::vector<Record> r;
  for (double x : xs) r.push_back({x});
  return Database(r, {b});
}

bool is_sub_multiset(const Database& sub, const Database& d) {
  std::map<Record, int> c;
  for (const auto& r : d.records()) ++c[r];
  for (const auto& r : sub.records()) {
    if (--c[r] < 0) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("mm transform properties") {
  RandomStream rng(1);
  const auto base = DistanceFn::l2_scaled({kUnit, kUnit});
  for (int t = 0; t < 500; ++t) {
    const double m = rng.uniform() * 0.9;
    const double M = m + rng.uniform() * (0.99 - m);
    const MMTransform tr{m, M, base};
    const Record x{rng.uniform(), rng.uniform()}, y{rng.uniform(), rng.uniform()},
        z{rng.uniform(), rng.uniform()};
    CHECK(tr(x, x) == doctest::Approx(m));
    CHECK(tr(x, y) == doctest::Approx(tr(y, x)));
    CHECK(tr(x, y) >= m - 1e-15);
    CHECK(tr(x, y) <= M + 1e-15);
    CHECK(tr(x, y) <= tr(x, z) + tr(z, y) - m + 1e-12);
  }
}

TEST_CASE("poisson sampling") {
  RandomStream rng(2);
  const auto d = db1({0.1, 0.2, 0.3});
  CHECK(poisson_sample(d, 0.0, rng).empty());
  CHECK(poisson_sample(d, 1.0, rng).canonical() == d.canonical());
  std::vector<Record> many(1000, Record{0.5});
  const Database big(many, {kUnit});
  double total = 0.0;
  for (int i = 0; i < 10000; ++i) total += static_cast<double>(poisson_sample(big, 0.3, rng).size());
  CHECK(std::fabs(total / 10000.0 - 300.0) < 15.0);
  CHECK_THROWS_AS(poisson_sample(d, 1.5, rng), Error);
}

TEST_CASE("outlier scores") {
  const MMTransform t{0.1, 0.9, DistanceFn::abs_scaled(kUnit)};
  const auto same = outlier_scores(db1({0.4, 0.4}), t);
  CHECK(same[0] == doctest::Approx(0.1));
  CHECK(same[1] == doctest::Approx(0.1));
  const auto s = outlier_scores(db1({0.0, 1.0, 1.0}), t);
  CHECK(s[0] == doctest::Approx(19.0 / 30.0).epsilon(1e-12));
  CHECK(s[1] == doctest::Approx(11.0 / 30.0).epsilon(1e-12));
  CHECK(s[2] == doctest::Approx(11.0 / 30.0).epsilon(1e-12));

  // The fast 1-d path agrees with the generic pairwise path.
  RandomStream rng(3);
  std::vector<Record> r;
  for (int i = 0; i < 60; ++i) r.push_back({std::round(rng.uniform() * 20.0) / 20.0});
  const Database d(r, {kUnit});
  const auto fast = average_distances(d, DistanceFn::abs_scaled(kUnit));
  const auto slow = average_distances(
      d, DistanceFn::custom([](const Record& a, const Record& b) { return std::fabs(a[0] - b[0]); }));
  const auto disc = average_distances(d, DistanceFn::discrete());
  const auto disc_slow = average_distances(
      d, DistanceFn::custom([](const Record& a, const Record& b) { return a == b ? 0.0 : 1.0; }));
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
    CHECK(disc[i] == doctest::Approx(disc_slow[i]).epsilon(1e-12));
  }
  for (double m : {0.05, 0.3}) {
    const auto sc = outlier_scores(d, {m, 0.8, DistanceFn::abs_scaled(kUnit)});
    for (double v : sc) {
      CHECK(v >= m - 1e-15);
      CHECK(v <= 0.8 + 1e-15);
    }
  }
}

TEST_CASE("outlier-score suppression on the diagonal matches Poisson sampling") {
  const double q = 0.3;
  const auto d = db1({0.0, 0.2, 0.7, 1.0});
  const MMTransform t{q, q, DistanceFn::abs_scaled(kUnit)};
  RandomStream a(4, {"s"}), b(4, {"p"});
  const int reps = 100000;
  std::map<std::vector<Record>, int> fs, fp;
  for (int i = 0; i < reps; ++i) {
    ++fs[outlier_score_suppress(d, t, a).canonical()];
    ++fp[poisson_sample(d, 1.0 - q, b).canonical()];
  }
  // Chi-square against the exact product distribution, 15 degrees of freedom.
  const auto k = PoissonSampling(1.0 - q).kernel(d).aggregate();
  double chi_s = 0.0, chi_p = 0.0;
  for (const auto& [c, p] : k) {
    const double e = p * reps;
    chi_s += (fs[c] - e) * (fs[c] - e) / e;
    chi_p += (fp[c] - e) * (fp[c] - e) / e;
  }
  CHECK(chi_s < 37.7);  // 0.999 quantile of chi2(15)
  CHECK(chi_p < 37.7);
}

TEST_CASE("outlier-score suppression marginals") {
  const MMTransform t{0.2, 0.8, DistanceFn::abs_scaled(kUnit)};
  RandomStream rng(5);
  const auto dup = db1({0.5, 0.5});
  int empty = 0;
  const int reps = 40000;
  for (int i = 0; i < reps; ++i) empty += outlier_score_suppress(dup, t, rng).empty();
  const double sd = std::sqrt(reps * 0.04 * 0.96);
  CHECK(std::fabs(empty - reps * 0.04) < 3 * sd);

  const auto d = db1({0.0, 0.1, 0.2, 0.9});
  const auto out = outlier_scores(d, t);
  double expect = 0.0;
  for (double o : out) expect += 1.0 - o;
  double total = 0.0;
  int last_deleted = 0;
  for (int i = 0; i < reps; ++i) {
    const auto s = outlier_score_suppress(d, t, rng);
    CHECK(is_sub_multiset(s, d));
    total += static_cast<double>(s.size());
    bool has = false;
    for (const auto& r : s.records()) has |= r[0] == 0.9;
    last_deleted += !has;
  }
  CHECK(std::fabs(total / reps - expect) < 0.02);
  CHECK(std::fabs(static_cast<double>(last_deleted) / reps - out[3]) <
        3 * std::sqrt(out[3] * (1 - out[3]) / reps));
}

TEST_CASE("deterministic suppressions") {
  const ValueBounds ages{0.0, 125.0};
  const auto d = db1({50, 101, 120}, ages);
  const auto kept = suppress_by_set(d, [](const Record& r) { return r[0] <= 100; });
  CHECK(kept.canonical() == std::vector<Record>{{50}});
  CHECK(suppress_by_set(d, [](const Record&) { return true; }).size() == 3);
  CHECK(suppress_by_set(d, [](const Record&) { return false; }).empty());

  const auto dist = DistanceFn::abs_scaled(kUnit);
  CHECK(suppress_by_avg_threshold(db1({0.3}), 0.1, dist).size() == 1);
  CHECK(suppress_by_avg_threshold(db1({0.0, 1.0}), 0.2, dist).empty());

  // Threshold family at n = 2, N = 2, K = 1/2: two copies of x', two of y'.
  const auto dn = db1({0, 0, 1, 1});
  const auto dpn = db1({0, 0, 1});
  CHECK(suppress_by_avg_threshold(dn, 0.5, dist).size() == 4);
  const auto s2 = suppress_by_avg_threshold(dpn, 0.5, dist);
  CHECK(s2.canonical() == std::vector<Record>{{0}, {0}});

  CHECK(suppress_top_fraction(db1({0.1, 0.9, 0.5}), 0.3, dist).size() == 3);
  CHECK(suppress_top_fraction(db1({0.4, 0.4, 0.4, 0.4}), 0.25, dist).empty());
  // Top-fraction family with p = 1/2, N = 4: two x' copies, two y' copies.
  const auto top = suppress_top_fraction(db1({0, 0, 1, 1}), 0.5, dist);
  CHECK(top.size() == 0);  // all four tie, so all go
  const auto top3 = suppress_top_fraction(db1({0, 1, 1, 1, 1}), 0.2, dist);
  CHECK(top3.canonical() == std::vector<Record>{{1}, {1}, {1}, {1}});
  const auto top3n = suppress_top_fraction(db1({1, 1, 1, 1}), 0.4, dist);
  CHECK(top3n.empty());
}

TEST_CASE("kernels") {
  const double p = 0.3;
  const auto d = db1({0.1, 0.7});
  const auto k = PoissonSampling(p).kernel(d);
  CHECK(k.occ[0] == doctest::Approx((1 - p) * (1 - p)));
  CHECK(k.occ[1] == doctest::Approx(p * (1 - p)));
  CHECK(k.occ[2] == doctest::Approx(p * (1 - p)));
  CHECK(k.occ[3] == doctest::Approx(p * p));
  CHECK(std::fabs(k.total() - 1.0) < 1e-12);

  const DeterministicSuppression sa(
      [](const Database& x) { return suppress_by_set(x, [](const Record& r) { return r[0] < 0.5; }); });
  const auto kd = sa.kernel(d);
  CHECK(kd.occ[1] == 1.0);
  CHECK(kd.total() == 1.0);

  const OutlierScoreSuppression os({0.2, 0.6, DistanceFn::abs_scaled(kUnit)});
  RandomStream rng(6);
  for (int t = 0; t < 20; ++t) {
    std::vector<Record> r;
    const auto n = 1 + rng.uniform_int(8);
    for (std::uint64_t i = 0; i < n; ++i) r.push_back({rng.uniform()});
    CHECK(std::fabs(os.kernel(Database(r, {kUnit})).total() - 1.0) < 1e-12);
  }
  std::vector<Record> big(21, Record{0.5});
  CHECK_THROWS_AS(PoissonSampling(0.5).kernel(Database(big, {kUnit})), Error);
}

TEST_CASE("set suppression is database independent") {
  const auto in_a = [](const Record& r) { return r[0] < 0.5; };
  const Record x{0.25};
  for (const auto& d : {db1({0.25}), db1({0.25, 0.9}), db1({0.25, 0.25, 0.1, 0.8})}) {
    const auto s = suppress_by_set(d, in_a);
    bool kept = false;
    for (const auto& r : s.records()) kept |= r == x;
    CHECK(kept);
  }
}
