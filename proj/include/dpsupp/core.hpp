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

#ifndef DPSUPP_CORE_HPP_
#define DPSUPP_CORE_HPP_

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dpsupp {

enum class Errc {
  kInvalidArgument = 1,
  kInfeasible = 2,
  kDomain = 3,
  kIo = 4,
  kTooLarge = 5,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

struct PrivacyParams {
  double epsilon = 0.0;
  double delta = 0.0;

  // Validating constructor. Plain aggregate init skips the checks.
  static PrivacyParams make(double epsilon, double delta);

  // (e1,d1) dominates (e2,d2) iff e1 <= e2 and d1 <= d2.
  bool dominates(const PrivacyParams& other) const {
    return epsilon <= other.epsilon && delta <= other.delta;
  }
};

struct ValueBounds {
  double lower = 0.0;
  double upper = 1.0;
  double width() const { return upper - lower; }
};

using Record = std::vector<double>;

// Lexicographic order used for canonical multiset forms.
bool record_less(const Record& a, const Record& b);

// Orders canonical multiset forms (sorted record vectors).
struct CanonicalLess {
  bool operator()(const std::vector<Record>& a,
                  const std::vector<Record>& b) const;
};

class Database {
 public:
  Database() = default;
  // Rejects records outside bounds or with the wrong dimension.
  Database(std::vector<Record> records, std::vector<ValueBounds> bounds);

  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  std::size_t dim() const { return bounds_.size(); }
  const std::vector<Record>& records() const { return records_; }
  const Record& operator[](std::size_t i) const { return records_[i]; }
  const std::vector<ValueBounds>& bounds() const { return bounds_; }

  Database with(const Record& r) const;
  Database without(std::size_t index) const;
  // Sub-multiset built from occurrence indices; bounds carry over.
  Database subset(const std::vector<std::size_t>& indices) const;
  // Records sorted lexicographically; equal multisets give equal vectors.
  std::vector<Record> canonical() const;

 private:
  std::vector<Record> records_;
  std::vector<ValueBounds> bounds_;
};

std::size_t symmetric_difference_size(const Database& d1, const Database& d2);

std::vector<Database> enumerate_unbounded_neighbors(
    const Database& d, const std::vector<Record>& universe);

// Deterministic stream keyed by (master_seed, path). Children derive new
// streams without consuming draws from the parent.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t master_seed,
                        std::vector<std::string> path = {});

  RandomStream child(const std::string& label) const;
  RandomStream child(std::uint64_t index) const;

  std::uint64_t master_seed() const { return master_seed_; }
  const std::vector<std::string>& path() const { return path_; }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0,1) with 53 random bits.
  double uniform();
  // Uniform on (0,1).
  double uniform_open();
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t uniform_int(std::uint64_t n);  // [0, n)
  double normal();

  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t master_seed_;
  std::vector<std::string> path_;
  std::mt19937_64 engine_;
};

std::uint64_t derive_seed(std::uint64_t master_seed,
                          const std::vector<std::string>& path);

}  // namespace dpsupp

#endif  // DPSUPP_CORE_HPP_
