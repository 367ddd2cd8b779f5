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

#ifndef DPSUPP_HARNESS_HPP_
#define DPSUPP_HARNESS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dpsupp/accounting.hpp"
#include "dpsupp/core.hpp"
#include "dpsupp/mechanisms.hpp"

namespace dpsupp {

// Logical bounds of the fixture columns; nullopt for unknown columns.
std::optional<ValueBounds> known_bounds(const std::string& dataset,
                                        const std::string& column);

// One numeric column as a 1-dim database. Errors name the 1-based data row.
Database load_column(const std::string& path, const std::string& column,
                     const ValueBounds& bounds);

// Several columns, min-max scaled into [-1,1] per column.
Database load_columns_scaled(const std::string& path,
                             const std::vector<std::string>& columns);

struct SyntheticClusters {
  Database data;                   // normalized, bounding-box diameter 1
  std::vector<Record> raw;         // integer points in {1..100}^2
  std::vector<Record> candidates;  // the normalized {1..100}^2 grid
};

SyntheticClusters gen_synthetic_clusters(std::uint64_t seed);

// Maps a raw coordinate in [1,100] to the normalized scale.
double synthetic_normalize(double v);

double metric_mpe(double true_mean, double noisy_mean);
double metric_mode_error(const std::vector<double>& outputs, double true_mode);
double metric_kmedian_cost(const Database& d, const std::vector<Record>& medians);
double metric_nicv(const Database& d, const std::vector<Record>& centers);

std::pair<double, double> wilson_ci(std::uint64_t successes, std::uint64_t n,
                                    double level = 0.95);

struct MeanCI {
  double mean = 0.0;
  double low = 0.0;
  double high = 0.0;
};

// Student-t interval for the mean.
MeanCI t_ci(const std::vector<double>& xs, double level = 0.95);

// Welch interval for mean(a) - mean(b).
MeanCI welch_diff_ci(const std::vector<double>& a, const std::vector<double>& b,
                     double level = 0.95);

double true_mean(const Database& d);
// Most frequent value; ties go to the lowest value.
double true_mode(const Database& d);

enum class UtilityKind { kMPE, kModeError, kKMedianCost, kNICV };
enum class Variant { kPlain, kPreprocessed, kPreprocessedRecalibrated };

const char* utility_name(UtilityKind u);
const char* variant_name(Variant v);

struct ExperimentConfig {
  // Empty picks the mechanism default: adult/age, the six Adult numeric
  // columns for DPLloyd, and the synthetic clusters for k-median.
  std::string dataset;
  std::string column;  // comma-separated for multi-column data
  std::string data_dir = "data";
  // noisy_average | rnm | expmech | dplloyd | kmedian
  std::string mechanism = "noisy_average";
  NoiseKind noise = NoiseKind::kLaplace;
  std::vector<double> epsilons = {0.25, 0.5, 1.0, 2.0};
  double delta = -1.0;  // negative: |D|^-2 for Gaussian noise, 0 otherwise
  std::vector<double> ps;
  std::vector<double> ms;
  std::vector<double> Ms;
  std::size_t reps = 0;  // 0: mechanism default times scale
  double scale = 0.2;
  std::uint64_t seed = 1;
  bool recalibrate = true;
  std::size_t k = 0;           // 0: 5 for DPLloyd, 4 for k-median
  std::size_t iterations = 0;  // 0: 5 for DPLloyd, 10 for k-median
  std::size_t threads = 0;     // 0: hardware concurrency

  // Applies one key=value setting; unknown keys throw kInvalidArgument.
  void set(const std::string& key, const std::string& value);
  static ExperimentConfig from_kv(const std::map<std::string, std::string>& kv);
  // Reads key=value lines; '#' starts a comment.
  static std::map<std::string, std::string> read_kv_file(const std::string& path);

  std::size_t effective_reps() const;
  std::string effective_dataset() const;
  std::string effective_column() const;
  UtilityKind utility() const;
};

struct ExperimentRow {
  std::string dataset;
  std::string column;
  std::string mechanism;
  std::string noise;
  double epsilon = 0.0;
  double delta = 0.0;
  std::optional<double> p;
  std::optional<double> m;
  std::optional<double> M;
  Variant variant = Variant::kPlain;
  std::string metric;
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::size_t reps = 0;
  bool infeasible = false;
};

std::vector<ExperimentRow> run_sampling_experiment(const ExperimentConfig& cfg);

// Per (eps, m, M) cell: the utility of the composed mechanism and the
// difference u(M) - u(M o S), both with their intervals.
std::vector<ExperimentRow> run_suppression_experiment(const ExperimentConfig& cfg);

std::string row_to_json(const ExperimentRow& row);
std::string csv_header();
std::string row_to_csv(const ExperimentRow& row);

// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace dpsupp

#endif  // DPSUPP_HARNESS_HPP_
