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

#include "dpsupp/core.hpp"

using namespace dpsupp;

namespace {

const ValueBounds kB{0.0, 10.0};

Database db(std::initializer_list<double> xs) {
  std::vector<Record> r;
  for (double x : xs) r.push_back({x});
  return Database(r, {kB});
}

}  // namespace

TEST_CASE("privacy params validate and order") {
  CHECK_NOTHROW(PrivacyParams::make(0.0, 0.0));
  CHECK_THROWS_AS(PrivacyParams::make(-0.1, 0.0), Error);
  CHECK_THROWS_AS(PrivacyParams::make(1.0, 1.5), Error);
  CHECK(PrivacyParams{1.0, 0.1}.dominates({1.0, 0.2}));
  CHECK_FALSE(PrivacyParams{1.1, 0.1}.dominates({1.0, 0.2}));
}

TEST_CASE("database rejects out-of-bounds records") {
  CHECK_THROWS_AS(db({11.0}), Error);
  try {
    db({1.0, -1.0});
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kDomain);
  }
  CHECK_THROWS_AS(Database({{1.0, 2.0}}, {kB}), Error);
}

TEST_CASE("symmetric difference examples") {
  const auto d = db({1, 2});
  CHECK(symmetric_difference_size(d, d) == 0);
  CHECK(symmetric_difference_size(d, d.with({3})) == 1);
  CHECK(symmetric_difference_size(db({1, 1, 2}), db({1, 3})) == 3);
}

TEST_CASE("symmetric difference is a metric on small multisets") {
  RandomStream rng(11, {"metric"});
  auto random_db = [&] {
    std::vector<Record> r;
    const auto n = rng.uniform_int(5);
    for (std::uint64_t i = 0; i < n; ++i) r.push_back({static_cast<double>(rng.uniform_int(3))});
    return Database(r, {kB});
  };
  for (int t = 0; t < 300; ++t) {
    const auto a = random_db(), b = random_db(), c = random_db();
    CHECK((symmetric_difference_size(a, b) == 0) == (a.canonical() == b.canonical()));
    CHECK(symmetric_difference_size(a, b) == symmetric_difference_size(b, a));
    CHECK(symmetric_difference_size(a, c) <=
          symmetric_difference_size(a, b) + symmetric_difference_size(b, c));
  }
}

TEST_CASE("unbounded neighbor enumeration") {
  const Record x{1}, y{2};
  auto canon = [](const std::vector<Database>& v) {
    std::vector<std::vector<Record>> out;
    for (const auto& d : v) out.push_back(d.canonical());
    return out;
  };
  const Database empty(std::vector<Record>{}, {kB});
  CHECK(canon(enumerate_unbounded_neighbors(empty, {x})) ==
        std::vector<std::vector<Record>>{{x}});
  CHECK(canon(enumerate_unbounded_neighbors(db({1}), {x})) ==
        std::vector<std::vector<Record>>{{}, {x, x}});
  CHECK(canon(enumerate_unbounded_neighbors(db({1, 2}), {x, y})) ==
        std::vector<std::vector<Record>>{{y}, {x}, {x, x, y}, {x, y, y}});
  const auto d = db({1, 1, 2, 3});
  for (const auto& nb : enumerate_unbounded_neighbors(d, {x, y, {5}})) {
    CHECK(symmetric_difference_size(d, nb) == 1);
  }
}

TEST_CASE("random streams are reproducible and path-keyed") {
  RandomStream a(42, {"x", "y"}), b(42, {"x", "y"}), c(42, {"x", "z"});
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    CHECK(u == b.uniform());
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    differs |= (u != c.uniform());
  }
  CHECK(differs);
  // Children do not consume draws from the parent.
  RandomStream p(7), q(7);
  (void)p.child("k").uniform();
  CHECK(p.uniform() == q.uniform());
  CHECK(RandomStream(7).child(3).uniform() == RandomStream(7).child(3).uniform());
}
