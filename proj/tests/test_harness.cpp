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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include <json.hpp>

#include "dpsupp/harness.hpp"

using namespace dpsupp;

namespace {

std::string temp_file(const std::string& name, const std::string& body) {
  const std::string path = std::string(DPSUPP_BINARY_DIR) + "/" + name;
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST_CASE("utility metrics") {
  CHECK(metric_mpe(40.0, 41.0) == doctest::Approx(2.5));
  CHECK(metric_mpe(40.0, 39.0) == doctest::Approx(2.5));
  CHECK(metric_mode_error({1, 2, 1, 1, 3, 1, 1, 2, 1, 1}, 1.0) == doctest::Approx(0.3));
  const Database two({{0.0, 2.0}, {0.0, -2.0}}, {{-2, 2}, {-2, 2}});
  CHECK(metric_kmedian_cost(two, {{0.0, 0.0}}) == doctest::Approx(2.0));
  CHECK(metric_nicv(two, {{0.0, 0.0}}) == doctest::Approx(4.0));
  const Database twice({{0.0, 2.0}, {0.0, -2.0}, {0.0, 2.0}, {0.0, -2.0}}, {{-2, 2}, {-2, 2}});
  CHECK(metric_nicv(twice, {{0.0, 0.0}}) == doctest::Approx(4.0));
}

TEST_CASE("confidence intervals") {
  const auto [lo, hi] = wilson_ci(5, 10);
  CHECK(lo == doctest::Approx(0.2366).epsilon(1e-3));
  CHECK(hi == doctest::Approx(0.7634).epsilon(1e-3));
  const auto [z0, z1] = wilson_ci(0, 20);
  CHECK(z0 == 0.0);
  CHECK(z1 > 0.0);

  // Coverage over 1000 batches of 200 Bernoulli(0.3) draws.
  RandomStream rng(10, {"coverage"});
  int covered = 0;
  for (int b = 0; b < 1000; ++b) {
    std::uint64_t s = 0;
    for (int i = 0; i < 200; ++i) s += rng.bernoulli(0.3);
    const auto [l, h] = wilson_ci(s, 200);
    covered += l <= 0.3 && 0.3 <= h;
  }
  CHECK(std::abs(covered - 950) <= 30);

  const auto t = t_ci({1.0, 2.0, 3.0, 4.0});
  CHECK(t.mean == doctest::Approx(2.5));
  CHECK(t.low < 2.5);
  CHECK(t.high > 2.5);
  const auto w = welch_diff_ci({1, 2, 3, 4}, {0, 1, 2, 3});
  CHECK(w.mean == doctest::Approx(1.0));
  CHECK(w.low < 1.0);
}

TEST_CASE("ground truth helpers") {
  const Database d({{1.0}, {2.0}, {2.0}, {3.0}, {3.0}}, {{0, 5}});
  CHECK(true_mean(d) == doctest::Approx(2.2));
  CHECK(true_mode(d) == 2.0);  // lowest value wins ties
}

TEST_CASE("column loading") {
  const std::string adult = std::string(DPSUPP_DATA_DIR) + "/adult.csv";
  const auto age = load_column(adult, "age", *known_bounds("adult", "age"));
  CHECK(age.size() == 32561);
  CHECK_THROWS_AS(load_column(adult, "no-such-column", {0, 1}), Error);
  try {
    load_column(adult, "age", {0, 50});
    FAIL("expected a bounds violation");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kDomain);
  }
  try {
    load_column(std::string(DPSUPP_DATA_DIR) + "/missing.csv", "age", {0, 125});
    FAIL("expected an io error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::kIo);
  }
  const auto bad = temp_file("bad.csv", "a,b\n1,2\nx,3\n");
  try {
    load_column(bad, "a", {0, 10});
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("row 2") != std::string::npos);
  }
  const auto scaled = load_columns_scaled(temp_file("two.csv", "u,v\n0,10\n5,20\n10,30\n"), {"u", "v"});
  CHECK(scaled.size() == 3);
  CHECK(scaled[0] == Record{-1.0, -1.0});
  CHECK(scaled[2] == Record{1.0, 1.0});
  CHECK(scaled[1][0] == doctest::Approx(0.0));
}

TEST_CASE("synthetic clusters") {
  const auto a = gen_synthetic_clusters(7);
  const auto b = gen_synthetic_clusters(7);
  CHECK(a.data.size() == 100);
  CHECK(a.raw.size() == 100);
  CHECK(a.candidates.size() == 10000);
  for (const auto& r : a.raw) {
    CHECK(r[0] >= 1);
    CHECK(r[0] <= 100);
    CHECK(r[1] == std::round(r[1]));
  }
  CHECK(a.data.canonical() == b.data.canonical());
  CHECK(gen_synthetic_clusters(8).data.canonical() != a.data.canonical());
  CHECK(synthetic_normalize(1.0) == 0.0);
  CHECK(std::hypot(synthetic_normalize(100), synthetic_normalize(100)) == doctest::Approx(1.0));
}

TEST_CASE("config parsing") {
  ExperimentConfig c;
  c.set("epsilon", "0.5,1");
  CHECK(c.epsilons == std::vector<double>{0.5, 1.0});
  c.set("p", "0.1:0.3:0.1");
  REQUIRE(c.ps.size() == 3);
  CHECK(c.ps[2] == doctest::Approx(0.3));
  c.set("noise", "gaussian");
  CHECK(c.noise == NoiseKind::kGaussian);
  CHECK_THROWS_AS(c.set("bogus", "1"), Error);
  CHECK_THROWS_AS(c.set("reps", "many"), Error);
  const auto path = temp_file("cfg.txt", "# comment\nmechanism = rnm\nscale=0.5\n\nseed=9\n");
  const auto cfg = ExperimentConfig::from_kv(ExperimentConfig::read_kv_file(path));
  CHECK(cfg.mechanism == "rnm");
  CHECK(cfg.seed == 9);
  CHECK(cfg.effective_reps() == 1000);
  CHECK(cfg.utility() == UtilityKind::kModeError);
  ExperimentConfig km;
  km.mechanism = "kmedian";
  CHECK(km.effective_dataset() == "synthetic");
}

TEST_CASE("experiments are deterministic and well formed") {
  ExperimentConfig c;
  c.data_dir = DPSUPP_DATA_DIR;
  c.epsilons = {1.0};
  c.ps = {0.5, 1.0};
  c.reps = 20;
  c.seed = 3;
  const auto r1 = run_sampling_experiment(c);
  c.threads = 1;
  const auto r2 = run_sampling_experiment(c);
  REQUIRE(r1.size() == r2.size());
  std::set<std::string> seen;
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(row_to_json(r1[i]) == row_to_json(r2[i]));
    CHECK(seen.insert(row_to_json(r1[i])).second);
    const auto j = nlohmann::json::parse(row_to_json(r1[i]));
    for (const char* key : {"dataset", "column", "mechanism", "noise", "epsilon", "delta", "p", "m",
                            "M", "variant", "metric", "mean", "ci_low", "ci_high", "reps",
                            "infeasible"}) {
      CHECK(j.contains(key));
    }
  }
  const auto csv = row_to_csv(r1.front());
  const auto header = csv_header();
  CHECK(std::count(csv.begin(), csv.end(), ',') == std::count(header.begin(), header.end(), ','));

  ExperimentConfig s;
  s.data_dir = DPSUPP_DATA_DIR;
  s.epsilons = {1.0};
  s.ms = {0.1};
  s.Ms = {0.9};
  s.reps = 10;
  const auto rows = run_suppression_experiment(s);
  bool has_diff = false;
  for (const auto& r : rows) has_diff |= r.metric.find("_diff") != std::string::npos;
  CHECK(has_diff);
}

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, 12345.678}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}
