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

// Command-line front end. Everything goes through the C API.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dpsupp/dpsupp.h"

namespace {

using json = nlohmann::ordered_json;

struct CliError : std::runtime_error {
  int code;
  CliError(int c, const std::string& m) : std::runtime_error(m), code(c) {}
};

dps_context* g_ctx = nullptr;

void check(dps_status s) {
  if (s != DPS_OK) {
    throw CliError(static_cast<int>(s),
                   std::string(dps_status_name(s)) + ": " + dps_last_error(g_ctx));
  }
}

json num(double v) { return std::isfinite(v) ? json(v) : json(v > 0 ? "inf" : "-inf"); }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r\n") - b + 1);
}

std::map<std::string, std::string> read_kv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError(DPS_ERR_IO, "cannot open config " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw CliError(DPS_ERR_INVALID_ARGUMENT,
                     path + ":" + std::to_string(lineno) + ": expected key=value");
    }
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CliError(DPS_ERR_IO, "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw CliError(DPS_ERR_INVALID_ARGUMENT, where + ": not a number: '" + s + "'");
  }
}

std::uint64_t to_mask(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    std::uint64_t v = 0;
    if (s.rfind("0b", 0) == 0) {
      v = std::stoull(s.substr(2), &pos, 2);
      pos += 2;
    } else {
      v = std::stoull(s, &pos, 10);
    }
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw CliError(DPS_ERR_INVALID_ARGUMENT, where + ": bad subset mask '" + s + "'");
  }
}

// Kernel file: "n=<records in D>", then "[D]" and "[D']" sections of
// "mask, probability" lines. Bit n of a D' mask is the added record.
json oracle_kernel(const std::string& path, double eps, double delta) {
  std::istringstream in(slurp(path));
  std::string line;
  long n = -1;
  int section = 0;
  std::vector<double> d, dp;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path + ":" + std::to_string(lineno);
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    if (line.rfind("n=", 0) == 0 || line.rfind("size=", 0) == 0) {
      n = static_cast<long>(to_double(line.substr(line.find('=') + 1), where));
      if (n < 0 || n > 19) throw CliError(DPS_ERR_TOO_LARGE, where + ": n must lie in 0..19");
      d.assign(std::size_t{1} << n, 0.0);
      dp.assign(std::size_t{1} << (n + 1), 0.0);
      continue;
    }
    if (line == "[D]") {
      section = 1;
      continue;
    }
    if (line == "[D']") {
      section = 2;
      continue;
    }
    if (n < 0 || section == 0) {
      throw CliError(DPS_ERR_INVALID_ARGUMENT, where + ": expected n= and a section header first");
    }
    const auto parts = split(line, ',');
    if (parts.size() != 2) throw CliError(DPS_ERR_INVALID_ARGUMENT, where + ": expected mask, prob");
    const auto mask = to_mask(parts[0], where);
    auto& table = section == 1 ? d : dp;
    if (mask >= table.size()) throw CliError(DPS_ERR_INVALID_ARGUMENT, where + ": mask out of range");
    table[mask] += to_double(parts[1], where);
  }
  if (n < 0) throw CliError(DPS_ERR_INVALID_ARGUMENT, path + ": missing n=");
  dps_kernel_bounds kb{};
  check(dps_kernel_bounds_of(g_ctx, static_cast<std::size_t>(n), d.data(), dp.data(),
                             {eps, delta}, &kb));
  return json{{"n", n},           {"epsilon", eps},         {"delta", delta},
              {"eps_fwd", num(kb.eps_fwd)}, {"eps_bwd", num(kb.eps_bwd)},
              {"eps", num(std::max(kb.eps_fwd, kb.eps_bwd))},
              {"delta_fwd", kb.delta_fwd}, {"delta_bwd", kb.delta_bwd}};
}

// Tight file: "table: p0, p1, ..." lines and "pair: i, j" lines.
json oracle_tight(const std::string& path, double delta) {
  std::istringstream in(slurp(path));
  std::string line;
  std::vector<std::vector<double>> tables;
  std::vector<std::size_t> pairs;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = path + ":" + std::to_string(lineno);
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw CliError(DPS_ERR_INVALID_ARGUMENT, where + ": expected table: or pair:");
    const std::string tag = trim(line.substr(0, colon));
    const auto vals = split(line.substr(colon + 1), ',');
    if (tag == "table") {
      std::vector<double> t;
      for (const auto& v : vals) t.push_back(to_double(v, where));
      tables.push_back(std::move(t));
    } else if (tag == "pair" && vals.size() == 2) {
      pairs.push_back(static_cast<std::size_t>(to_mask(vals[0], where)));
      pairs.push_back(static_cast<std::size_t>(to_mask(vals[1], where)));
    } else {
      throw CliError(DPS_ERR_INVALID_ARGUMENT, where + ": expected table: or pair: i, j");
    }
  }
  if (tables.empty()) throw CliError(DPS_ERR_INVALID_ARGUMENT, path + ": no tables");
  const std::size_t width = tables.front().size();
  std::vector<double> flat;
  for (const auto& t : tables) {
    if (t.size() != width) throw CliError(DPS_ERR_INVALID_ARGUMENT, path + ": tables differ in width");
    flat.insert(flat.end(), t.begin(), t.end());
  }
  double eps = 0.0;
  check(dps_tight_epsilon(g_ctx, flat.data(), tables.size(), width, pairs.data(), pairs.size() / 2,
                          delta, &eps));
  return json{{"delta", delta}, {"epsilon", num(eps)}, {"tables", tables.size()},
              {"pairs", pairs.size() / 2}};
}

json report_json(const dps_verify_report& r, const char* dir, double eps, double m, double M) {
  return json{{"direction", dir},
              {"epsilon", eps},
              {"m", m},
              {"M", M},
              {"numeric_max", num(r.numeric_max)},
              {"closed_form", num(r.closed_form)},
              {"gap", num(r.gap)},
              {"evaluations", r.evaluations},
              {"verdict", dps_verdict_name(r.verdict)},
              {"arg_n", r.arg_n},
              {"arg_pj", r.arg_pj},
              {"arg_pk", r.arg_pk},
              {"arg_c", r.arg_c},
              {"arg_t", r.arg_t},
              {"superfluous_ok", r.superfluous_ok != 0}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dpsupp: sampling and suppression accounting for differential privacy"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string out_path;
  std::string format = "jsonl";
  double scale = 0.2;
  std::string config_path;
  auto* o_seed = app.add_option("--seed", seed, "master seed");
  auto* o_out = app.add_option("--out", out_path, "output file (default stdout)");
  auto* o_fmt = app.add_option("--format", format, "jsonl or csv")
                    ->check(CLI::IsMember({"jsonl", "csv"}));
  auto* o_scale = app.add_option("--scale", scale, "repetition scale");
  app.add_option("--config", config_path, "key=value file; flags override it");

  double eps = 1.0, delta = 0.0, p = 0.5, m = 0.1, M = 0.9;
  std::int64_t sens = -2;

  auto* amplify = app.add_subcommand("amplify", "privacy of M o S_p for an (eps,delta)-DP M");
  amplify->add_option("--epsilon", eps)->required();
  amplify->add_option("--delta", delta);
  amplify->add_option("--p", p, "keep probability")->required();
  amplify->add_option("--sensitivity", sens, "deterministic group bound instead (-1 = inf)");

  auto* calibrate = app.add_subcommand("calibrate", "parameters that hit a target after preprocessing");
  calibrate->add_option("--epsilon", eps)->required();
  calibrate->add_option("--delta", delta);
  auto* c_p = calibrate->add_option("--p", p, "Poisson keep probability");
  auto* c_m = calibrate->add_option("--m", m);
  auto* c_M = calibrate->add_option("--M", M);
  c_p->excludes(c_m)->excludes(c_M);

  auto* epss = app.add_subcommand("eps-s", "outlier-score suppression bound");
  epss->add_option("--epsilon", eps)->required();
  epss->add_option("--delta", delta);
  epss->add_option("--m", m)->required();
  epss->add_option("--M", M)->required();

  std::uint64_t budget = 200000;
  auto* verify = app.add_subcommand("verify", "numerical check of the outlier-score bound");
  verify->require_subcommand(1);
  auto* v_fwd = verify->add_subcommand("forward");
  auto* v_inv = verify->add_subcommand("inverse");
  for (auto* sc : {v_fwd, v_inv}) {
    sc->add_option("--epsilon", eps)->required();
    sc->add_option("--m", m)->required();
    sc->add_option("--M", M)->required();
  }
  v_fwd->add_option("--budget", budget, "objective evaluations");

  std::string file, family = "set";
  std::size_t fam_n = 1;
  auto* oracle = app.add_subcommand("oracle", "exact ground-truth computations");
  oracle->require_subcommand(1);
  auto* o_kernel = oracle->add_subcommand("kernel", "kernel bounds from mask,prob tables");
  o_kernel->add_option("file", file)->required()->check(CLI::ExistingFile);
  o_kernel->add_option("--epsilon", eps)->required();
  o_kernel->add_option("--delta", delta);
  auto* o_tight = oracle->add_subcommand("tight", "tight epsilon of a finite mechanism");
  o_tight->add_option("file", file)->required()->check(CLI::ExistingFile);
  o_tight->add_option("--delta", delta);
  auto* o_sens = oracle->add_subcommand("sensitivity", "sensitivity of a deterministic family");
  o_sens->add_option("--family", family)->check(CLI::IsMember({"set", "threshold", "top"}));
  o_sens->add_option("--n", fam_n);

  // run flags mirror config keys; flag values win over the config file.
  std::map<std::string, std::string> run_flags;
  auto* run = app.add_subcommand("run", "experiment grids");
  run->require_subcommand(1);
  auto* r_samp = run->add_subcommand("sampling");
  auto* r_supp = run->add_subcommand("suppression");
  const std::vector<std::string> run_keys = {
      "dataset", "column", "data-dir", "mechanism", "noise", "epsilon", "delta", "p", "m",
      "M",       "reps",   "recalibrate", "k",      "iterations", "threads"};
  std::map<std::string, std::string> run_values;
  for (auto* sc : {r_samp, r_supp}) {
    for (const auto& k : run_keys) sc->add_option("--" + k, run_values[k + "@" + sc->get_name()]);
  }

  std::string metric_kind;
  double true_mean = 0.0, noisy_mean = 0.0, level = 0.95;
  std::uint64_t succ = 0, trials = 0;
  auto* metrics = app.add_subcommand("metrics", "utility metrics");
  metrics->require_subcommand(1);
  auto* m_mpe = metrics->add_subcommand("mpe");
  m_mpe->add_option("--true", true_mean)->required();
  m_mpe->add_option("--noisy", noisy_mean)->required();
  auto* m_wilson = metrics->add_subcommand("wilson");
  m_wilson->add_option("--successes", succ)->required();
  m_wilson->add_option("--n", trials)->required();
  m_wilson->add_option("--level", level);

  auto* synth = app.add_subcommand("synth", "synthetic cluster database as CSV");

  CLI11_PARSE(app, argc, argv);

  int rc = 0;
  try {
    std::map<std::string, std::string> cfg;
    if (!config_path.empty()) cfg = read_kv(config_path);
    auto take = [&](const char* key, CLI::Option* opt, auto& target) {
      auto it = cfg.find(key);
      if (it == cfg.end()) return;
      if (!opt->count()) {
        std::istringstream is(it->second);
        is >> target;
      }
      cfg.erase(it);
    };
    take("seed", o_seed, seed);
    take("scale", o_scale, scale);
    take("format", o_fmt, format);
    take("out", o_out, out_path);

    check(dps_context_new(seed, &g_ctx));
    check(dps_context_set_scale(g_ctx, scale));

    std::ostringstream text;
    if (*amplify) {
      dps_params r{};
      if (sens != -2) {
        check(dps_group_bound(g_ctx, {eps, delta}, sens, &r));
      } else {
        check(dps_amplify_poisson(g_ctx, {eps, delta}, p, &r));
      }
      text << json{{"epsilon", num(r.epsilon)}, {"delta", r.delta}}.dump() << "\n";
    } else if (*calibrate) {
      dps_params r{};
      if (c_m->count() || c_M->count()) {
        check(dps_calibrate_suppression(g_ctx, {eps, delta}, m, M, &r));
      } else {
        check(dps_calibrate_sampling(g_ctx, {eps, delta}, p, &r));
      }
      text << json{{"epsilon", num(r.epsilon)}, {"delta", r.delta}}.dump() << "\n";
    } else if (*epss) {
      dps_bound b{};
      check(dps_epsilon_s(g_ctx, eps, delta, m, M, &b));
      text << json{{"epsilon", eps},
                   {"m", m},
                   {"M", M},
                   {"eps_s", num(b.eps_s)},
                   {"delta_s", b.delta_s},
                   {"argmax_p", b.argmax_p},
                   {"branch", "l" + std::to_string(b.branch)},
                   {"outside_verified", b.outside_verified != 0},
                   {"infinite", b.infinite != 0}}
                  .dump()
           << "\n";
    } else if (*verify) {
      dps_verify_report r{};
      if (*v_fwd) {
        check(dps_verify_forward(g_ctx, eps, m, M, budget, &r));
        text << report_json(r, "forward", eps, m, M).dump() << "\n";
      } else {
        check(dps_verify_inverse(g_ctx, eps, m, M, &r));
        text << report_json(r, "inverse", eps, m, M).dump() << "\n";
      }
    } else if (*oracle) {
      if (*o_kernel) {
        text << oracle_kernel(file, eps, delta).dump() << "\n";
      } else if (*o_tight) {
        text << oracle_tight(file, delta).dump() << "\n";
      } else {
        dps_sensitivity s{};
        check(dps_sensitivity_family(g_ctx, family.c_str(), fam_n, &s));
        text << json{{"family", family},
                     {"n", fam_n},
                     {"infinite", s.infinite != 0},
                     {"sensitivity", s.infinite ? json("inf") : json(s.value)},
                     {"witness", s.witness}}
                    .dump()
             << "\n";
      }
    } else if (*run) {
      auto* sc = *r_samp ? r_samp : r_supp;
      std::map<std::string, std::string> merged;
      for (const auto& [key, v] : cfg) {
        std::string k = key;
        std::replace(k.begin(), k.end(), '_', '-');
        merged[k] = v;
      }
      for (const auto& k : run_keys) {
        const auto& v = run_values[k + "@" + sc->get_name()];
        if (sc->get_option("--" + k)->count()) merged[k] = v;
      }
      std::string conf;
      for (const auto& [k, v] : merged) conf += k + "=" + v + "\n";
      dps_buffer* buf = nullptr;
      check(dps_run_experiment(g_ctx, sc->get_name().c_str(), conf.c_str(), format.c_str(), &buf));
      text << dps_buffer_data(buf);
      dps_buffer_free(buf);
    } else if (*metrics) {
      if (*m_mpe) {
        double v = 0.0;
        check(dps_metric_mpe(g_ctx, true_mean, noisy_mean, &v));
        text << json{{"metric", "MPE"}, {"value", v}}.dump() << "\n";
      } else {
        double lo = 0.0, hi = 0.0;
        check(dps_wilson_ci(g_ctx, succ, trials, level, &lo, &hi));
        text << json{{"metric", "wilson"}, {"successes", succ}, {"n", trials},
                     {"level", level}, {"low", lo}, {"high", hi}}
                    .dump()
             << "\n";
      }
    } else if (*synth) {
      dps_buffer* buf = nullptr;
      check(dps_synth(g_ctx, &buf));
      text << dps_buffer_data(buf);
      dps_buffer_free(buf);
    }

    if (out_path.empty()) {
      std::cout << text.str();
    } else {
      std::ofstream out(out_path);
      if (!out) throw CliError(DPS_ERR_IO, "cannot write " + out_path);
      out << text.str();
    }
  } catch (const CliError& e) {
    std::cerr << "dpsupp: " << e.what() << "\n";
    rc = e.code;
  }
  dps_context_free(g_ctx);
  return rc;
}
