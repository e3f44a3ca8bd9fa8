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

// Synthetic model zoo.
//
// Each architecture j owns, for every probe i, a base class distribution
// b[i][j] drawn from a symmetric Dirichlet. A weight variant p of that
// architecture answers probe i with b[i][j] multiplied component-wise by
// exp(sigma * eps), eps ~ N(0, 1), and renormalized. Architectures therefore
// disagree on how they misclassify a probe while variants of one architecture
// stay close to each other. Latency is a per-architecture uniform window
// around a base value and is independent of the classification channel.

#ifndef ARCHPRINT_ZOO_HPP_
#define ARCHPRINT_ZOO_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "archprint/core.hpp"

namespace archprint {

struct LatencySpec {
  std::int64_t base_latency_ns = 1'000'000;
  std::int64_t jitter_ns = 0;

  friend bool operator==(const LatencySpec&, const LatencySpec&) = default;
};

struct ZooConfig {
  int architectures = 27;
  int k_profile = 10;
  int k_holdout = 5;
  int probes = 1000;
  LabelSpace label_space = LabelSpace::cifar10();
  // Per-class Dirichlet concentration of every base distribution.
  double inter_concentration = 0.5;
  // Scale of the log-space Gaussian perturbation applied per weight variant.
  double intra_noise = 0.05;
  int top_n = 5;
  std::vector<LatencySpec> timing = {};
  std::vector<std::string> architecture_names = {};
  std::uint64_t seed = 42;

  int variants() const { return k_profile + k_holdout; }
  // Throws kInvalidConfig.
  void validate() const;

  friend bool operator==(const ZooConfig&, const ZooConfig&) = default;
};

// 27 named architectures, 10 + 5 variants, 1000 probes, CIFAR-10 labels and
// the default timing layout.
ZooConfig default_zoo_config(std::uint64_t seed);

// 27 latency windows spread geometrically over [0.5 ms, 20 ms]. Six of them
// (VGG-11, VGG-13, ResNet-34, ResNet-50, Inception-v3, ResNeXt-101) sit in one
// cluster whose windows all overlap pairwise; every other window is disjoint
// from its neighbours.
std::vector<LatencySpec> default_timing_layout();
std::vector<std::string> default_architecture_names();

// Geometric spread over [0.5 ms, 20 ms] with no deliberate overlaps, for zoos
// of arbitrary size. Jitter is 6% of each base.
std::vector<LatencySpec> spread_timing_layout(int architectures);

class OracleModel {
 public:
  OracleModel(ModelId id, int label_count, std::vector<double> response_table,
              LatencySpec latency);

  const ModelId& id() const { return id_; }
  int probes() const { return static_cast<int>(table_.size()) / label_count_; }
  int label_count() const { return label_count_; }
  const LatencySpec& latency() const { return latency_; }
  // Full probability row for `probe`; throws kUnknownProbe.
  std::span<const double> row(ProbeId probe) const;
  const std::vector<double>& table() const { return table_; }

 private:
  ModelId id_;
  int label_count_;
  std::vector<double> table_;
  LatencySpec latency_;
};

struct Zoo {
  ZooConfig config;
  // Architecture-major: profiling[j * k_profile + p].
  std::vector<OracleModel> profiling;
  // Architecture-major: holdout[j * k_holdout + h], variant id k_profile + h.
  std::vector<OracleModel> holdout;

  const OracleModel& model(const ModelId& id) const;
  std::vector<const OracleModel*> profiling_models(ArchitectureId j) const;
};

Zoo generate_zoo(const ZooConfig& config);

// Highest-probability classes of the model's row, ties by lower class index.
TopNResponse query_oracle(const OracleModel& model, ProbeId probe, int top_n);

// base + U{-jitter, ..., +jitter}, clamped to >= 1.
std::int64_t sample_latency(const LatencySpec& latency, std::mt19937_64& rng);
inline std::int64_t sample_latency(const OracleModel& model, std::mt19937_64& rng) {
  return sample_latency(model.latency(), rng);
}

void save_zoo(const Zoo& zoo, const std::string& path);
// Throws kZooLoadFailure.
Zoo load_zoo(const std::string& path);

}  // namespace archprint

#endif  // ARCHPRINT_ZOO_HPP_
