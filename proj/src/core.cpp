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

#include "dpsupp/core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <utility>

namespace dpsupp {

PrivacyParams PrivacyParams::make(double epsilon, double delta) {
  if (!(epsilon >= 0.0)) {
    throw Error(Errc::kInvalidArgument, "epsilon must be >= 0");
  }
  if (!(delta >= 0.0 && delta <= 1.0)) {
    throw Error(Errc::kInvalidArgument, "delta must lie in [0,1]");
  }
  return PrivacyParams{epsilon, delta};
}

bool record_less(const Record& a, const Record& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool CanonicalLess::operator()(const std::vector<Record>& a,
                               const std::vector<Record>& b) const {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      record_less);
}

Database::Database(std::vector<Record> records, std::vector<ValueBounds> bounds)
    : records_(std::move(records)), bounds_(std::move(bounds)) {
  if (bounds_.empty()) {
    throw Error(Errc::kInvalidArgument, "database needs at least one dimension");
  }
  for (const auto& b : bounds_) {
    if (!(b.lower < b.upper)) {
      throw Error(Errc::kInvalidArgument, "bounds need lower < upper");
    }
  }
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const Record& r = records_[i];
    if (r.size() != bounds_.size()) {
      throw Error(Errc::kInvalidArgument,
                  "record " + std::to_string(i) + " has wrong dimension");
    }
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (!(r[j] >= bounds_[j].lower && r[j] <= bounds_[j].upper)) {
        throw Error(Errc::kDomain, "record " + std::to_string(i) +
                                       " outside bounds in dimension " +
                                       std::to_string(j));
      }
    }
  }
}

Database Database::with(const Record& r) const {
  auto recs = records_;
  recs.push_back(r);
  return Database(std::move(recs), bounds_);
}

Database Database::without(std::size_t index) const {
  if (index >= records_.size()) {
    throw Error(Errc::kInvalidArgument, "index out of range");
  }
  Database out;
  out.bounds_ = bounds_;
  out.records_.reserve(records_.size() - 1);
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (i != index) out.records_.push_back(records_[i]);
  }
  return out;
}

Database Database::subset(const std::vector<std::size_t>& indices) const {
  Database out;
  out.bounds_ = bounds_;
  out.records_.reserve(indices.size());
  for (std::size_t i : indices) out.records_.push_back(records_.at(i));
  return out;
}

std::vector<Record> Database::canonical() const {
  auto recs = records_;
  std::sort(recs.begin(), recs.end(), record_less);
  return recs;
}

std::size_t symmetric_difference_size(const Database& d1, const Database& d2) {
  if (d1.dim() != d2.dim()) {
    throw Error(Errc::kInvalidArgument, "dimension mismatch");
  }
  auto a = d1.canonical();
  auto b = d2.canonical();
  std::size_t i = 0, j = 0, diff = 0;
  while (i < a.size() && j < b.size()) {
    if (record_less(a[i], b[j])) {
      ++diff;
      ++i;
    } else if (record_less(b[j], a[i])) {
      ++diff;
      ++j;
    } else {
      ++i;
      ++j;
    }
  }
  return diff + (a.size() - i) + (b.size() - j);
}

std::vector<Database> enumerate_unbounded_neighbors(
    const Database& d, const std::vector<Record>& universe) {
  std::vector<Database> out;
  std::set<std::vector<Record>, CanonicalLess> seen;
  for (std::size_t i = 0; i < d.size(); ++i) {
    Database n = d.without(i);
    if (seen.insert(n.canonical()).second) out.push_back(std::move(n));
  }
  for (const auto& y : universe) {
    Database n = d.with(y);
    if (seen.insert(n.canonical()).second) out.push_back(std::move(n));
  }
  return out;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master_seed,
                          const std::vector<std::string>& path) {
  std::uint64_t h = splitmix64(master_seed);
  for (const auto& label : path) {
    h = splitmix64(h ^ fnv1a(label));
  }
  return h;
}

RandomStream::RandomStream(std::uint64_t master_seed,
                           std::vector<std::string> path)
    : master_seed_(master_seed),
      path_(std::move(path)),
      engine_(derive_seed(master_seed_, path_)) {}

RandomStream RandomStream::child(const std::string& label) const {
  auto p = path_;
  p.push_back(label);
  return RandomStream(master_seed_, std::move(p));
}

RandomStream RandomStream::child(std::uint64_t index) const {
  return child(std::to_string(index));
}

double RandomStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform_open() {
  double u;
  do {
    u = uniform();
  } while (u == 0.0);
  return u;
}

std::uint64_t RandomStream::uniform_int(std::uint64_t n) {
  if (n == 0) throw Error(Errc::kInvalidArgument, "uniform_int needs n > 0");
  std::uniform_int_distribution<std::uint64_t> dist(0, n - 1);
  return dist(engine_);
}

double RandomStream::normal() {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(engine_);
}

}  // namespace dpsupp
