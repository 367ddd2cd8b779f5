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

#include "dpsupp/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <json.hpp>

#include "dpsupp/suppression.hpp"

namespace dpsupp {

namespace {

const char* const kAdultNumeric =
    "age,fnlwgt,education-num,capital-gain,capital-loss,hours-per-week";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == sep && !quoted) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(trim(cur));
  return out;
}

bool parse_double(const std::string& s, double& v) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = b + s.size();
  if (*b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  return ec == std::errc() && ptr == e && std::isfinite(v);
}

double parse_number(const std::string& key, const std::string& s) {
  double v = 0.0;
  if (!parse_double(trim(s), v)) {
    throw Error(Errc::kInvalidArgument, "bad number for " + key + ": '" + s + "'");
  }
  return v;
}

// "a,b,c" or "start:stop:step".
std::vector<double> parse_list(const std::string& key, const std::string& s) {
  std::vector<double> out;
  if (s.find(':') != std::string::npos) {
    const auto parts = split(s, ':');
    if (parts.size() != 3) throw Error(Errc::kInvalidArgument, key + ": range is start:stop:step");
    const double a = parse_number(key, parts[0]);
    const double b = parse_number(key, parts[1]);
    const double st = parse_number(key, parts[2]);
    if (!(st > 0.0) || b < a) throw Error(Errc::kInvalidArgument, key + ": empty range");
    const auto n = static_cast<std::size_t>(std::floor((b - a) / st + 1e-9));
    for (std::size_t i = 0; i <= n; ++i) {
      // Round to the step's grid so 0.1 + 2*0.1 prints as 0.3.
      out.push_back(std::round((a + st * static_cast<double>(i)) * 1e12) / 1e12);
    }
    return out;
  }
  for (const auto& part : split(s, ',')) {
    if (!part.empty()) out.push_back(parse_number(key, part));
  }
  if (out.empty()) throw Error(Errc::kInvalidArgument, key + ": empty list");
  return out;
}

std::uint64_t parse_count(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw Error(Errc::kInvalidArgument, "bad integer for " + key + ": '" + s + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
  const std::string t = trim(s);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw Error(Errc::kInvalidArgument, "bad boolean for " + key + ": '" + s + "'");
}

NoiseKind parse_noise(const std::string& s) {
  if (s == "laplace") return NoiseKind::kLaplace;
  if (s == "gaussian") return NoiseKind::kGaussian;
  if (s == "exponential") return NoiseKind::kExponential;
  throw Error(Errc::kInvalidArgument, "unknown noise '" + s + "'");
}

std::vector<double> default_grid(double lo, double hi, double step) {
  std::vector<double> g;
  const auto n = static_cast<std::size_t>(std::round((hi - lo) / step));
  for (std::size_t i = 0; i <= n; ++i) {
    g.push_back(std::round((lo + step * static_cast<double>(i)) * 1e12) / 1e12);
  }
  return g;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw Error(Errc::kIo, path + ": missing header row");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  t.header = split(line, ',');
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    t.rows.push_back(split(line, ','));
  }
  return t;
}

std::size_t column_index(const CsvTable& t, const std::string& column,
                         const std::string& path) {
  const auto it = std::find(t.header.begin(), t.header.end(), column);
  if (it == t.header.end()) {
    throw Error(Errc::kInvalidArgument, path + ": no column named '" + column + "'");
  }
  return static_cast<std::size_t>(it - t.header.begin());
}

double cell_value(const CsvTable& t, std::size_t row, std::size_t col,
                  const std::string& column) {
  const auto& r = t.rows[row];
  double v = 0.0;
  if (col >= r.size() || !parse_double(r[col], v)) {
    throw Error(Errc::kInvalidArgument,
                "row " + std::to_string(row + 1) + ": column '" + column +
                    "' is not numeric");
  }
  return v;
}

std::size_t worker_count(std::size_t requested, std::size_t jobs) {
  std::size_t t = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return std::max<std::size_t>(1, std::min(t, jobs));
}

// Runs job(i) for i in [0, n) on a small pool; the first exception wins.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t)>& job) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::mutex mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!err) err = std::current_exception();
        next = n;
      }
    }
  };
  const std::size_t w = worker_count(threads, n);
  if (w == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < w; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (err) std::rethrow_exception(err);
}

// Everything a cell needs, built once per experiment.
struct Workload {
  ExperimentConfig cfg;
  std::string dataset;
  std::string column;
  Database d;
  DistanceFn dist;
  std::vector<Record> candidates;
  UtilityKind util = UtilityKind::kMPE;
  double tmean = 0.0;
  double tmode = 0.0;
  double delta = 0.0;
  std::size_t reps = 0;
  std::size_t k = 0;
  std::size_t iterations = 0;

  // Utility of one run on the (possibly reduced) input, against the full D.
  double run(const Database& input, const PrivacyParams& pp, RandomStream& rng) const {
    const auto& mech = cfg.mechanism;
    if (mech == "noisy_average") {
      return metric_mpe(tmean, noisy_average(input, pp, cfg.noise, rng));
    }
    if (mech == "rnm" || mech == "expmech") {
      ModeVariant v = ModeVariant::kExpMech;
      if (mech == "rnm") {
        v = cfg.noise == NoiseKind::kGaussian      ? ModeVariant::kRnmGaussian
            : cfg.noise == NoiseKind::kExponential ? ModeVariant::kRnmExponential
                                                   : ModeVariant::kRnmLaplace;
      }
      return compute_mode(input, v, pp, rng) == tmode ? 0.0 : 1.0;
    }
    if (mech == "dplloyd") {
      return metric_nicv(d, dp_lloyd(input, k, pp, iterations, rng).centers);
    }
    return metric_kmedian_cost(d, dp_kmedian(input, candidates, k, pp, iterations, rng).centers);
  }

  ExperimentRow base_row(double eps) const {
    ExperimentRow r;
    r.dataset = dataset;
    r.column = column;
    r.mechanism = cfg.mechanism;
    r.noise = (cfg.mechanism == "expmech") ? "none" : noise_name(cfg.noise);
    r.epsilon = eps;
    r.delta = delta;
    r.metric = utility_name(util);
    r.reps = reps;
    return r;
  }

  void fill_stats(ExperimentRow& r, const std::vector<double>& xs) const {
    if (util == UtilityKind::kModeError) {
      const auto wrong = static_cast<std::uint64_t>(std::accumulate(xs.begin(), xs.end(), 0.0));
      const auto [lo, hi] = wilson_ci(wrong, xs.size());
      r.mean = static_cast<double>(wrong) / static_cast<double>(xs.size());
      r.ci_low = lo;
      r.ci_high = hi;
    } else {
      const auto ci = t_ci(xs);
      r.mean = ci.mean;
      r.ci_low = ci.low;
      r.ci_high = ci.high;
    }
  }
};

Workload prepare(const ExperimentConfig& cfg) {
  Workload w;
  w.cfg = cfg;
  const auto& mech = cfg.mechanism;
  if (mech != "noisy_average" && mech != "rnm" && mech != "expmech" && mech != "dplloyd" &&
      mech != "kmedian") {
    throw Error(Errc::kInvalidArgument, "unknown mechanism '" + mech + "'");
  }
  if (cfg.epsilons.empty()) throw Error(Errc::kInvalidArgument, "empty epsilon grid");
  for (double e : cfg.epsilons) {
    if (!(e > 0.0) || !std::isfinite(e)) throw Error(Errc::kInvalidArgument, "epsilon must be > 0");
  }
  w.dataset = cfg.effective_dataset();
  w.column = cfg.effective_column();
  w.util = cfg.utility();
  w.reps = cfg.effective_reps();
  w.k = cfg.k ? cfg.k : (mech == "kmedian" ? 4 : 5);
  w.iterations = cfg.iterations ? cfg.iterations : (mech == "kmedian" ? 10 : 5);
  if (mech == "kmedian") {
    auto syn = gen_synthetic_clusters(cfg.seed);
    w.d = std::move(syn.data);
    w.candidates = std::move(syn.candidates);
    w.dist = DistanceFn::l2_scaled(w.d.bounds());
  } else {
    const std::string path = cfg.data_dir + "/" + w.dataset + ".csv";
    if (mech == "dplloyd") {
      w.d = load_columns_scaled(path, split(w.column, ','));
      w.dist = DistanceFn::l2_scaled(w.d.bounds());
    } else {
      const auto b = known_bounds(w.dataset, w.column);
      if (!b) {
        throw Error(Errc::kInvalidArgument,
                    "no logical bounds known for " + w.dataset + "/" + w.column);
      }
      w.d = load_column(path, w.column, *b);
      w.dist = (mech == "noisy_average") ? DistanceFn::abs_scaled(*b) : DistanceFn::discrete();
    }
  }
  if (w.d.empty()) throw Error(Errc::kInvalidArgument, "dataset is empty");
  if (mech == "noisy_average") w.tmean = true_mean(w.d);
  if (mech == "rnm" || mech == "expmech") w.tmode = true_mode(w.d);
  const bool gaussian = cfg.noise == NoiseKind::kGaussian && mech != "expmech";
  if (cfg.delta >= 0.0) {
    w.delta = cfg.delta;
  } else {
    const double n = static_cast<double>(w.d.size());
    w.delta = gaussian ? 1.0 / (n * n) : 0.0;
  }
  if (gaussian && !(w.delta > 0.0)) {
    throw Error(Errc::kInvalidArgument, "gaussian noise needs delta > 0");
  }
  return w;
}

std::string coord(const std::string& name, double v) { return name + "=" + format_double(v); }

std::vector<std::string> cell_path(const Workload& w, const std::string& kind) {
  return {kind, w.dataset, w.column, w.cfg.mechanism, noise_name(w.cfg.noise)};
}

// Plain runs for every epsilon; shared by both experiments.
std::vector<std::vector<double>> plain_samples(const Workload& w, const std::string& kind) {
  const auto& eps = w.cfg.epsilons;
  std::vector<std::vector<double>> out(eps.size());
  parallel_for(eps.size(), w.cfg.threads, [&](std::size_t e) {
    auto path = cell_path(w, kind);
    path.push_back(coord("eps", eps[e]));
    path.push_back("plain");
    const RandomStream cell(w.cfg.seed, path);
    out[e].resize(w.reps);
    for (std::size_t r = 0; r < w.reps; ++r) {
      auto rng = cell.child(static_cast<std::uint64_t>(r));
      out[e][r] = w.run(w.d, {eps[e], w.delta}, rng);
    }
  });
  return out;
}

// Marks calibrations that leave no usable budget.
bool degenerate(const PrivacyParams& pp) { return !(pp.epsilon >= 1e-9) || pp.delta >= 1.0; }

}  // namespace

std::optional<ValueBounds> known_bounds(const std::string& dataset,
                                        const std::string& column) {
  static const std::map<std::pair<std::string, std::string>, ValueBounds> table = {
      {{"adult", "age"}, {0.0, 125.0}},
      {{"adult", "hours-per-week"}, {0.0, 100.0}},
      {{"census", "FEDTAX"}, {0.0, 31889.0}},
      {{"census", "FICA"}, {0.0, 11890.0}},
      {{"irish", "Age"}, {0.0, 125.0}},
      {{"irish", "Education"}, {1.0, 10.0}},
  };
  const auto it = table.find({dataset, column});
  if (it == table.end()) return std::nullopt;
  return it->second;
}

Database load_column(const std::string& path, const std::string& column,
                     const ValueBounds& bounds) {
  const auto t = read_csv(path);
  const std::size_t col = column_index(t, column, path);
  std::vector<Record> recs;
  recs.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double v = cell_value(t, i, col, column);
    if (v < bounds.lower || v > bounds.upper) {
      throw Error(Errc::kDomain, "row " + std::to_string(i + 1) + ": value " +
                                     format_double(v) + " outside [" +
                                     format_double(bounds.lower) + "," +
                                     format_double(bounds.upper) + "]");
    }
    recs.push_back({v});
  }
  return Database(std::move(recs), {bounds});
}

Database load_columns_scaled(const std::string& path,
                             const std::vector<std::string>& columns) {
  if (columns.empty()) throw Error(Errc::kInvalidArgument, "no columns selected");
  const auto t = read_csv(path);
  const std::size_t dim = columns.size();
  std::vector<std::size_t> cols;
  for (const auto& c : columns) cols.push_back(column_index(t, c, path));
  std::vector<Record> recs(t.rows.size(), Record(dim));
  std::vector<double> lo(dim, INFINITY), hi(dim, -INFINITY);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      const double v = cell_value(t, i, cols[j], columns[j]);
      recs[i][j] = v;
      lo[j] = std::min(lo[j], v);
      hi[j] = std::max(hi[j], v);
    }
  }
  for (auto& r : recs) {
    for (std::size_t j = 0; j < dim; ++j) {
      r[j] = hi[j] > lo[j] ? std::clamp(2.0 * (r[j] - lo[j]) / (hi[j] - lo[j]) - 1.0, -1.0, 1.0)
                           : 0.0;
    }
  }
  return Database(std::move(recs), std::vector<ValueBounds>(dim, {-1.0, 1.0}));
}

double synthetic_normalize(double v) { return (v - 1.0) / (99.0 * std::sqrt(2.0)); }

SyntheticClusters gen_synthetic_clusters(std::uint64_t seed) {
  RandomStream rng(seed, {"synthetic-clusters"});
  std::vector<Record> centers(4);
  for (auto& c : centers) {
    c = {10.0 + static_cast<double>(rng.uniform_int(81)),
         10.0 + static_cast<double>(rng.uniform_int(81))};
  }
  SyntheticClusters out;
  std::vector<Record> norm;
  for (int i = 0; i < 100; ++i) {
    const auto& c = centers[rng.uniform_int(4)];
    Record raw(2), z(2);
    for (int j = 0; j < 2; ++j) {
      raw[j] = std::clamp(std::round(c[j] + 10.0 * rng.normal()), 1.0, 100.0);
      z[j] = synthetic_normalize(raw[j]);
    }
    out.raw.push_back(raw);
    norm.push_back(z);
  }
  const double top = synthetic_normalize(100.0);
  out.data = Database(std::move(norm), {{0.0, top}, {0.0, top}});
  out.candidates.reserve(10000);
  for (int x = 1; x <= 100; ++x) {
    for (int y = 1; y <= 100; ++y) {
      out.candidates.push_back({synthetic_normalize(x), synthetic_normalize(y)});
    }
  }
  return out;
}

double metric_mpe(double true_mean, double noisy_mean) {
  if (true_mean == 0.0) throw Error(Errc::kInvalidArgument, "MPE undefined for a zero mean");
  return 100.0 * std::fabs(noisy_mean - true_mean) / std::fabs(true_mean);
}

double metric_mode_error(const std::vector<double>& outputs, double true_mode) {
  if (outputs.empty()) throw Error(Errc::kInvalidArgument, "no mode outputs");
  std::size_t wrong = 0;
  for (double o : outputs) wrong += (o != true_mode);
  return static_cast<double>(wrong) / static_cast<double>(outputs.size());
}

namespace {

double nearest_sq(const Record& r, const std::vector<Record>& cs) {
  double best = INFINITY;
  for (const auto& c : cs) {
    double s = 0.0;
    for (std::size_t j = 0; j < r.size(); ++j) s += (r[j] - c[j]) * (r[j] - c[j]);
    best = std::min(best, s);
  }
  return best;
}

}  // namespace

double metric_kmedian_cost(const Database& d, const std::vector<Record>& medians) {
  if (medians.empty()) throw Error(Errc::kInvalidArgument, "empty median list");
  if (d.empty()) throw Error(Errc::kInvalidArgument, "cost needs a nonempty database");
  double s = 0.0;
  for (const auto& r : d.records()) s += std::sqrt(nearest_sq(r, medians));
  return s / static_cast<double>(d.size());
}

double metric_nicv(const Database& d, const std::vector<Record>& centers) {
  if (centers.empty()) throw Error(Errc::kInvalidArgument, "empty center list");
  if (d.empty()) throw Error(Errc::kInvalidArgument, "NICV needs a nonempty database");
  double s = 0.0;
  for (const auto& r : d.records()) s += nearest_sq(r, centers);
  return s / static_cast<double>(d.size());
}

std::pair<double, double> wilson_ci(std::uint64_t successes, std::uint64_t n, double level) {
  if (n == 0) throw Error(Errc::kInvalidArgument, "wilson interval needs n > 0");
  if (successes > n) throw Error(Errc::kInvalidArgument, "successes exceed n");
  if (!(level > 0.0 && level < 1.0)) throw Error(Errc::kInvalidArgument, "level must lie in (0,1)");
  const double z = boost::math::quantile(boost::math::normal(), 0.5 + level / 2.0);
  const double dn = static_cast<double>(n);
  const double ph = static_cast<double>(successes) / dn;
  const double z2 = z * z;
  const double den = 1.0 + z2 / dn;
  const double center = (ph + z2 / (2.0 * dn)) / den;
  const double half = z / den * std::sqrt(ph * (1.0 - ph) / dn + z2 / (4.0 * dn * dn));
  double lo = std::max(0.0, center - half);
  double hi = std::min(1.0, center + half);
  if (successes == 0) lo = 0.0;
  if (successes == n) hi = 1.0;
  return {lo, hi};
}

MeanCI t_ci(const std::vector<double>& xs, double level) {
  if (xs.empty()) throw Error(Errc::kInvalidArgument, "interval needs samples");
  MeanCI ci;
  const double n = static_cast<double>(xs.size());
  ci.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  ci.low = ci.high = ci.mean;
  if (xs.size() < 2) return ci;
  double ss = 0.0;
  for (double x : xs) ss += (x - ci.mean) * (x - ci.mean);
  const double se = std::sqrt(ss / (n - 1.0) / n);
  if (se == 0.0) return ci;
  const double t = boost::math::quantile(boost::math::students_t(n - 1.0), 0.5 + level / 2.0);
  ci.low = ci.mean - t * se;
  ci.high = ci.mean + t * se;
  return ci;
}

MeanCI welch_diff_ci(const std::vector<double>& a, const std::vector<double>& b, double level) {
  if (a.empty() || b.empty()) throw Error(Errc::kInvalidArgument, "interval needs samples");
  auto moments = [](const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    const double mu = std::accumulate(x.begin(), x.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : x) ss += (v - mu) * (v - mu);
    return std::pair<double, double>{mu, x.size() > 1 ? ss / (n - 1.0) : 0.0};
  };
  const auto [ma, va] = moments(a);
  const auto [mb, vb] = moments(b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  MeanCI ci;
  ci.mean = ma - mb;
  ci.low = ci.high = ci.mean;
  const double qa = va / na, qb = vb / nb;
  const double se2 = qa + qb;
  if (!(se2 > 0.0)) return ci;
  double df = se2 * se2;
  double den = 0.0;
  if (na > 1.0) den += qa * qa / (na - 1.0);
  if (nb > 1.0) den += qb * qb / (nb - 1.0);
  df = den > 0.0 ? df / den : 1.0;
  const double t = boost::math::quantile(boost::math::students_t(std::max(df, 1.0)), 0.5 + level / 2.0);
  ci.low = ci.mean - t * std::sqrt(se2);
  ci.high = ci.mean + t * std::sqrt(se2);
  return ci;
}

double true_mean(const Database& d) {
  if (d.empty() || d.dim() != 1) throw Error(Errc::kInvalidArgument, "mean needs 1-dim data");
  double s = 0.0;
  for (const auto& r : d.records()) s += r[0];
  return s / static_cast<double>(d.size());
}

double true_mode(const Database& d) {
  if (d.empty() || d.dim() != 1) throw Error(Errc::kInvalidArgument, "mode needs 1-dim data");
  std::map<double, std::size_t> counts;
  for (const auto& r : d.records()) ++counts[r[0]];
  double best = counts.begin()->first;
  std::size_t top = 0;
  for (const auto& [v, c] : counts) {
    if (c > top) {
      top = c;
      best = v;
    }
  }
  return best;
}

const char* utility_name(UtilityKind u) {
  switch (u) {
    case UtilityKind::kMPE:
      return "MPE";
    case UtilityKind::kModeError:
      return "ModeError";
    case UtilityKind::kKMedianCost:
      return "KMedianCost";
    case UtilityKind::kNICV:
      return "NICV";
  }
  return "?";
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kPlain:
      return "Plain";
    case Variant::kPreprocessed:
      return "Preprocessed";
    case Variant::kPreprocessedRecalibrated:
      return "PreprocessedRecalibrated";
  }
  return "?";
}

void ExperimentConfig::set(const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in);
  const std::string value = trim(value_in);
  if (key == "dataset") {
    dataset = value;
  } else if (key == "column") {
    column = value;
  } else if (key == "data_dir" || key == "data-dir") {
    data_dir = value;
  } else if (key == "mechanism") {
    mechanism = value;
  } else if (key == "noise") {
    noise = parse_noise(value);
  } else if (key == "epsilon" || key == "epsilons" || key == "eps") {
    epsilons = parse_list(key, value);
  } else if (key == "delta") {
    delta = value == "auto" ? -1.0 : parse_number(key, value);
  } else if (key == "p" || key == "ps") {
    ps = parse_list(key, value);
  } else if (key == "m" || key == "ms") {
    ms = parse_list(key, value);
  } else if (key == "M" || key == "Ms") {
    Ms = parse_list(key, value);
  } else if (key == "reps") {
    reps = parse_count(key, value);
  } else if (key == "scale") {
    scale = parse_number(key, value);
    if (!(scale > 0.0)) throw Error(Errc::kInvalidArgument, "scale must be > 0");
  } else if (key == "seed") {
    seed = parse_count(key, value);
  } else if (key == "recalibrate") {
    recalibrate = parse_bool(key, value);
  } else if (key == "k") {
    k = parse_count(key, value);
  } else if (key == "iterations") {
    iterations = parse_count(key, value);
  } else if (key == "threads") {
    threads = parse_count(key, value);
  } else {
    throw Error(Errc::kInvalidArgument, "unknown config key '" + key + "'");
  }
}

ExperimentConfig ExperimentConfig::from_kv(const std::map<std::string, std::string>& kv) {
  ExperimentConfig c;
  for (const auto& [k, v] : kv) c.set(k, v);
  return c;
}

std::map<std::string, std::string> ExperimentConfig::read_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open config " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(Errc::kInvalidArgument,
                  path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::size_t ExperimentConfig::effective_reps() const {
  if (reps) return reps;
  double base = 500.0;
  if (mechanism == "rnm" || mechanism == "expmech") base = 2000.0;
  if (mechanism == "kmedian") base = 20.0;
  return std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(base * scale)));
}

std::string ExperimentConfig::effective_dataset() const {
  if (!dataset.empty()) return dataset;
  return mechanism == "kmedian" ? "synthetic" : "adult";
}

std::string ExperimentConfig::effective_column() const {
  if (!column.empty()) return column;
  if (mechanism == "kmedian") return "x,y";
  if (mechanism == "dplloyd") return kAdultNumeric;
  return "age";
}

UtilityKind ExperimentConfig::utility() const {
  if (mechanism == "rnm" || mechanism == "expmech") return UtilityKind::kModeError;
  if (mechanism == "dplloyd") return UtilityKind::kNICV;
  if (mechanism == "kmedian") return UtilityKind::kKMedianCost;
  return UtilityKind::kMPE;
}

std::vector<ExperimentRow> run_sampling_experiment(const ExperimentConfig& cfg) {
  const Workload w = prepare(cfg);
  const auto ps = cfg.ps.empty() ? default_grid(0.01, 0.99, 0.01) : cfg.ps;
  for (double p : ps) {
    if (!(p > 0.0 && p <= 1.0)) throw Error(Errc::kInvalidArgument, "p must lie in (0,1]");
  }
  const auto& eps = cfg.epsilons;
  const auto plain = plain_samples(w, "sampling");
  const Variant var = cfg.recalibrate ? Variant::kPreprocessedRecalibrated : Variant::kPreprocessed;

  std::vector<ExperimentRow> cells(eps.size() * ps.size());
  parallel_for(cells.size(), cfg.threads, [&](std::size_t idx) {
    const double e = eps[idx / ps.size()];
    const double p = ps[idx % ps.size()];
    ExperimentRow row = w.base_row(e);
    row.p = p;
    row.variant = var;
    PrivacyParams pp{e, w.delta};
    try {
      if (cfg.recalibrate) pp = calibrate_sampling({e, w.delta}, p);
    } catch (const Error& err) {
      if (err.code() != Errc::kInfeasible) throw;
      row.infeasible = true;
    }
    if (row.infeasible || degenerate(pp)) {
      row.infeasible = true;
      row.reps = 0;
      cells[idx] = row;
      return;
    }
    auto path = cell_path(w, "sampling");
    path.push_back(coord("eps", e));
    path.push_back(coord("p", p));
    path.push_back(variant_name(var));
    const RandomStream cell(cfg.seed, path);
    std::vector<double> xs(w.reps);
    for (std::size_t r = 0; r < w.reps; ++r) {
      auto rng = cell.child(static_cast<std::uint64_t>(r));
      const Database sub = poisson_sample(w.d, p, rng);
      xs[r] = w.run(sub, pp, rng);
    }
    w.fill_stats(row, xs);
    cells[idx] = row;
  });

  std::vector<ExperimentRow> rows;
  for (std::size_t e = 0; e < eps.size(); ++e) {
    ExperimentRow row = w.base_row(eps[e]);
    w.fill_stats(row, plain[e]);
    rows.push_back(row);
    for (std::size_t j = 0; j < ps.size(); ++j) rows.push_back(cells[e * ps.size() + j]);
  }
  return rows;
}

std::vector<ExperimentRow> run_suppression_experiment(const ExperimentConfig& cfg) {
  const Workload w = prepare(cfg);
  const auto ms = cfg.ms.empty() ? default_grid(0.1, 0.9, 0.1) : cfg.ms;
  const auto Ms = cfg.Ms.empty() ? default_grid(0.1, 0.9, 0.1) : cfg.Ms;
  struct Cell {
    double eps, m, M;
  };
  std::vector<Cell> grid;
  for (double e : cfg.epsilons) {
    for (double m : ms) {
      for (double M : Ms) {
        if (!(m > 0.0 && M < 1.0)) throw Error(Errc::kInvalidArgument, "need 0 < m <= M < 1");
        if (m <= M) grid.push_back({e, m, M});
      }
    }
  }
  const auto avg = average_distances(w.d, w.dist);
  const auto plain = plain_samples(w, "suppression");
  auto eps_index = [&](double e) {
    return static_cast<std::size_t>(
        std::find(cfg.epsilons.begin(), cfg.epsilons.end(), e) - cfg.epsilons.begin());
  };
  const Variant var = cfg.recalibrate ? Variant::kPreprocessedRecalibrated : Variant::kPreprocessed;
  const std::string diff_metric = std::string(utility_name(w.util)) + "_diff";

  std::vector<std::pair<ExperimentRow, ExperimentRow>> out(grid.size());
  parallel_for(grid.size(), cfg.threads, [&](std::size_t idx) {
    const Cell c = grid[idx];
    ExperimentRow row = w.base_row(c.eps);
    row.m = c.m;
    row.M = c.M;
    row.variant = var;
    ExperimentRow diff = row;
    diff.metric = diff_metric;
    PrivacyParams pp{c.eps, w.delta};
    try {
      if (cfg.recalibrate) pp = calibrate_suppression({c.eps, w.delta}, MMParams::make(c.m, c.M));
    } catch (const Error& err) {
      if (err.code() != Errc::kInfeasible) throw;
      row.infeasible = true;
    }
    if (row.infeasible || degenerate(pp)) {
      row.infeasible = diff.infeasible = true;
      row.reps = diff.reps = 0;
      out[idx] = {row, diff};
      return;
    }
    std::vector<double> scores(avg.size());
    for (std::size_t i = 0; i < avg.size(); ++i) scores[i] = c.m + (c.M - c.m) * avg[i];
    auto path = cell_path(w, "suppression");
    path.push_back(coord("eps", c.eps));
    path.push_back(coord("m", c.m));
    path.push_back(coord("M", c.M));
    path.push_back(variant_name(var));
    const RandomStream cell(cfg.seed, path);
    std::vector<double> xs(w.reps);
    for (std::size_t r = 0; r < w.reps; ++r) {
      auto rng = cell.child(static_cast<std::uint64_t>(r));
      const Database sub = suppress_with_scores(w.d, scores, rng);
      xs[r] = w.run(sub, pp, rng);
    }
    w.fill_stats(row, xs);
    const auto dci = welch_diff_ci(plain[eps_index(c.eps)], xs);
    diff.mean = dci.mean;
    diff.ci_low = dci.low;
    diff.ci_high = dci.high;
    out[idx] = {row, diff};
  });

  std::vector<ExperimentRow> rows;
  for (std::size_t e = 0; e < cfg.epsilons.size(); ++e) {
    ExperimentRow row = w.base_row(cfg.epsilons[e]);
    w.fill_stats(row, plain[e]);
    rows.push_back(row);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (eps_index(grid[i].eps) != e) continue;
      rows.push_back(out[i].first);
      rows.push_back(out[i].second);
    }
  }
  return rows;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string row_to_json(const ExperimentRow& r) {
  nlohmann::ordered_json j;
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  auto num = [](double v) {
    return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
  };
  j["dataset"] = r.dataset;
  j["column"] = r.column;
  j["mechanism"] = r.mechanism;
  j["noise"] = r.noise;
  j["epsilon"] = r.epsilon;
  j["delta"] = r.delta;
  j["p"] = opt(r.p);
  j["m"] = opt(r.m);
  j["M"] = opt(r.M);
  j["variant"] = variant_name(r.variant);
  j["metric"] = r.metric;
  if (r.infeasible) {
    j["mean"] = nullptr;
    j["ci_low"] = nullptr;
    j["ci_high"] = nullptr;
  } else {
    j["mean"] = num(r.mean);
    j["ci_low"] = num(r.ci_low);
    j["ci_high"] = num(r.ci_high);
  }
  j["reps"] = r.reps;
  j["infeasible"] = r.infeasible;
  return j.dump();
}

std::string csv_header() {
  return "dataset,column,mechanism,noise,epsilon,delta,p,m,M,variant,metric,mean,ci_low,"
         "ci_high,reps,infeasible";
}

std::string row_to_csv(const ExperimentRow& r) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  auto quote = [](const std::string& s) {
    return s.find(',') == std::string::npos ? s : "\"" + s + "\"";
  };
  std::ostringstream os;
  os << quote(r.dataset) << ',' << quote(r.column) << ',' << r.mechanism << ',' << r.noise << ','
     << format_double(r.epsilon) << ',' << format_double(r.delta) << ',' << opt(r.p) << ','
     << opt(r.m) << ',' << opt(r.M) << ',' << variant_name(r.variant) << ',' << r.metric << ',';
  if (r.infeasible) {
    os << ",,";
  } else {
    os << format_double(r.mean) << ',' << format_double(r.ci_low) << ','
       << format_double(r.ci_high);
  }
  os << ',' << r.reps << ',' << (r.infeasible ? "true" : "false");
  return os.str();
}

}  // namespace dpsupp
