// Copyright 2026 The archprint Authors
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

// Domain types and the vector primitives every template computation is built
// on. Everything here is immutable after construction and free of hidden
// state, so values can be shared freely between threads.

#ifndef ARCHPRINT_CORE_HPP_
#define ARCHPRINT_CORE_HPP_

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "archprint/error.hpp"

namespace archprint {

using ArchitectureId = int;
using ProbeId = int;

// One weight variant of one architecture. Variants [0, k_profile) are the
// profiling models; holdout variants follow them.
struct ModelId {
  ArchitectureId architecture = 0;
  int variant = 0;

  friend bool operator==(const ModelId&, const ModelId&) = default;
};

std::string to_string(const ModelId& id);
// Parses "<arch>:<variant>".
ModelId parse_model_id(std::string_view text);

// Ordered class labels; the position of a label is its class index.
class LabelSpace {
 public:
  explicit LabelSpace(std::vector<std::string> labels);

  // The ten CIFAR-10 class names.
  static LabelSpace cifar10();
  // "c0", "c1", ... for synthetic spaces of arbitrary size.
  static LabelSpace numbered(int size);

  int size() const { return static_cast<int>(labels_.size()); }
  const std::string& label(int index) const;
  std::optional<int> index_of(std::string_view label) const;
  const std::vector<std::string>& labels() const { return labels_; }

  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;

 private:
  std::vector<std::string> labels_;
};

struct TopNEntry {
  int class_index = 0;
  double probability = 0.0;

  friend bool operator==(const TopNEntry&, const TopNEntry&) = default;
};

// Top-n classification answer of a prediction API.
struct TopNResponse {
  std::vector<TopNEntry> entries;

  int n() const { return static_cast<int>(entries.size()); }
  double mass() const;

  friend bool operator==(const TopNResponse&, const TopNResponse&) = default;
};

// Checks every TopNResponse invariant against `space` and throws
// kInvalidResponse on violation: n <= |L|, indices in range and distinct,
// probabilities in [0, 1] and non-increasing, total mass <= 1 + 1e-9.
void validate_response(const TopNResponse& response, const LabelSpace& space);

// Dense length-|L| probability vector.
struct ClassificationVector {
  std::vector<double> values;

  ClassificationVector() = default;
  explicit ClassificationVector(std::vector<double> v) : values(std::move(v)) {}

  int size() const { return static_cast<int>(values.size()); }
  operator std::span<const double>() const { return values; }

  friend bool operator==(const ClassificationVector&,
                         const ClassificationVector&) = default;
};

// Places each top-n probability at its class index; every other entry is 0.
ClassificationVector expand_topn(const TopNResponse& response,
                                 const LabelSpace& space);

double euclidean_distance(std::span<const double> a, std::span<const double> b);

// Component-wise arithmetic mean. Components are summed in input order and
// divided once, so the result is reproducible bit-for-bit by any loop that
// does the same.
ClassificationVector elementwise_mean(
    std::span<const std::span<const double>> vectors);
ClassificationVector elementwise_mean(
    std::span<const ClassificationVector> vectors);

// Derives an independent 64-bit stream seed from a tuple of integers. The
// mapping is fixed by std::seed_seq and therefore portable.
std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts);

// Diagnostics to stderr, gated by ARCHPRINT_LOG=off|info|debug.
enum class LogLevel { kOff = 0, kInfo = 1, kDebug = 2 };
LogLevel log_level();
void log_message(LogLevel level, std::string_view message);

}  // namespace archprint

#endif  // ARCHPRINT_CORE_HPP_
