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

#include "archprint/zoo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "archprint/io.hpp"

namespace archprint {
namespace {

constexpr double kLayoutMinNs = 500'000.0;
constexpr double kLayoutMaxNs = 20'000'000.0;
constexpr double kLayoutJitter = 0.06;

LatencySpec window_at(double base_ns) {
  const auto base = static_cast<std::int64_t>(std::llround(base_ns));
  return {base, static_cast<std::int64_t>(std::llround(base_ns * kLayoutJitter))};
}

// Draws one symmetric-Dirichlet row of width `classes`.
void draw_dirichlet(std::mt19937_64& rng, double concentration, std::span<double> out) {
  std::gamma_distribution<double> gamma(concentration, 1.0);
  double total = 0.0;
  for (auto& v : out) {
    v = gamma(rng);
    total += v;
  }
  if (!(total > 0.0)) {
    // Every gamma draw underflowed; fall back to the uniform row.
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(out.size()));
    return;
  }
  for (auto& v : out) v /= total;
}

}  // namespace

void ZooConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); };
  if (architectures < 2) fail("zoo needs at least 2 architectures");
  if (k_profile < 1) fail("k_profile must be >= 1");
  if (k_holdout < 0) fail("k_holdout must be >= 0");
  if (probes < 1) fail("probe count must be >= 1");
  if (!(inter_concentration > 0.0) || !std::isfinite(inter_concentration)) {
    fail("inter_concentration must be a positive real");
  }
  if (!(intra_noise >= 0.0) || !std::isfinite(intra_noise)) {
    fail("intra_noise must be a non-negative real");
  }
  if (top_n < 1 || top_n > label_space.size()) fail("top_n must lie in [1, |L|]");
  if (static_cast<int>(timing.size()) != architectures) {
    fail("timing layout has " + std::to_string(timing.size()) + " entries for " +
         std::to_string(architectures) + " architectures");
  }
  for (const auto& t : timing) {
    if (t.base_latency_ns <= 0) fail("base latency must be positive");
    if (t.jitter_ns < 0) fail("jitter must be non-negative");
  }
  if (!architecture_names.empty() &&
      static_cast<int>(architecture_names.size()) != architectures) {
    fail("architecture_names must be empty or have one name per architecture");
  }
}

std::vector<std::string> default_architecture_names() {
  return {"AlexNet",          "VGG-11",           "VGG-13",          "VGG-16",
          "VGG-19",           "ResNet-18",        "ResNet-34",       "ResNet-50",
          "ResNet-101",       "ResNet-152",       "SqueezeNet-1.0",  "SqueezeNet-1.1",
          "DenseNet-121",     "DenseNet-161",     "DenseNet-169",    "DenseNet-201",
          "Inception-v3",     "GoogLeNet",        "ShuffleNet-V2",   "MobileNet-V2",
          "ResNeXt-50-32x4d", "ResNeXt-101-32x8d", "WideResNet-50-2", "WideResNet-101-2",
          "MNASNet-1.0",      "ViT-B/16",         "Swin-B"};
}

std::vector<LatencySpec> default_timing_layout() {
  constexpr int kSlots = 22;
  constexpr int kClusterSlot = 10;
  const std::vector<int> cluster = {1, 2, 6, 7, 16, 21};
  const double cluster_factors[] = {0.970, 0.982, 0.994, 1.006, 1.018, 1.030};

  auto slot_base = [&](int t) {
    return kLayoutMinNs * std::pow(kLayoutMaxNs / kLayoutMinNs,
                                   static_cast<double>(t) / (kSlots - 1));
  };

  std::vector<LatencySpec> layout(27);
  int next_slot = 0;
  int next_cluster = 0;
  for (int j = 0; j < 27; ++j) {
    if (std::find(cluster.begin(), cluster.end(), j) != cluster.end()) {
      layout[j] = window_at(slot_base(kClusterSlot) * cluster_factors[next_cluster++]);
    } else {
      if (next_slot == kClusterSlot) ++next_slot;
      layout[j] = window_at(slot_base(next_slot++));
    }
  }
  return layout;
}

std::vector<LatencySpec> spread_timing_layout(int architectures) {
  std::vector<LatencySpec> layout;
  layout.reserve(architectures);
  for (int j = 0; j < architectures; ++j) {
    const double t = architectures > 1 ? static_cast<double>(j) / (architectures - 1) : 0.0;
    layout.push_back(window_at(kLayoutMinNs * std::pow(kLayoutMaxNs / kLayoutMinNs, t)));
  }
  return layout;
}

ZooConfig default_zoo_config(std::uint64_t seed) {
  ZooConfig config;
  config.timing = default_timing_layout();
  config.architecture_names = default_architecture_names();
  config.seed = seed;
  return config;
}

OracleModel::OracleModel(ModelId id, int label_count, std::vector<double> response_table,
                         LatencySpec latency)
    : id_(id), label_count_(label_count), table_(std::move(response_table)), latency_(latency) {
  if (label_count_ < 2 || table_.empty() || table_.size() % label_count_ != 0) {
    throw Error(ErrorCode::kInvalidConfig, "response table is not a whole number of rows");
  }
}

std::span<const double> OracleModel::row(ProbeId probe) const {
  if (probe < 0 || probe >= probes()) {
    throw Error(ErrorCode::kUnknownProbe, "probe " + std::to_string(probe) + " not in table");
  }
  return std::span<const double>(table_).subspan(
      static_cast<size_t>(probe) * label_count_, label_count_);
}

const OracleModel& Zoo::model(const ModelId& id) const {
  const auto& c = config;
  if (id.architecture < 0 || id.architecture >= c.architectures || id.variant < 0 ||
      id.variant >= c.variants()) {
    throw Error(ErrorCode::kInvalidConfig, "model " + to_string(id) + " is not in the zoo");
  }
  if (id.variant < c.k_profile) {
    return profiling[static_cast<size_t>(id.architecture) * c.k_profile + id.variant];
  }
  return holdout[static_cast<size_t>(id.architecture) * c.k_holdout +
                 (id.variant - c.k_profile)];
}

std::vector<const OracleModel*> Zoo::profiling_models(ArchitectureId j) const {
  std::vector<const OracleModel*> out;
  for (int p = 0; p < config.k_profile; ++p) {
    out.push_back(&profiling[static_cast<size_t>(j) * config.k_profile + p]);
  }
  return out;
}

Zoo generate_zoo(const ZooConfig& config) {
  config.validate();
  const int classes = config.label_space.size();
  const size_t row_count = static_cast<size_t>(config.probes);
  const size_t width = static_cast<size_t>(classes);

  Zoo zoo;
  zoo.config = config;
  zoo.profiling.reserve(static_cast<size_t>(config.architectures) * config.k_profile);
  zoo.holdout.reserve(static_cast<size_t>(config.architectures) * config.k_holdout);

  std::vector<double> base(row_count * width);
  for (int j = 0; j < config.architectures; ++j) {
    std::mt19937_64 base_rng(derive_seed({config.seed, 0, static_cast<std::uint64_t>(j)}));
    for (size_t i = 0; i < row_count; ++i) {
      draw_dirichlet(base_rng, config.inter_concentration,
                     std::span<double>(base).subspan(i * width, width));
    }

    for (int p = 0; p < config.variants(); ++p) {
      std::mt19937_64 rng(derive_seed(
          {config.seed, 1, static_cast<std::uint64_t>(j), static_cast<std::uint64_t>(p)}));
      std::normal_distribution<double> noise(0.0, 1.0);
      std::vector<double> table(base.size());
      for (size_t i = 0; i < row_count; ++i) {
        double total = 0.0;
        for (size_t c = 0; c < width; ++c) {
          const double b = base[i * width + c];
          const double eps = noise(rng);
          const double v = config.intra_noise == 0.0 ? b : b * std::exp(config.intra_noise * eps);
          table[i * width + c] = v;
          total += v;
        }
        for (size_t c = 0; c < width; ++c) table[i * width + c] /= total;
      }
      OracleModel model({j, p}, classes, std::move(table), config.timing[j]);
      if (p < config.k_profile) {
        zoo.profiling.push_back(std::move(model));
      } else {
        zoo.holdout.push_back(std::move(model));
      }
    }
  }
  return zoo;
}

TopNResponse query_oracle(const OracleModel& model, ProbeId probe, int top_n) {
  const auto row = model.row(probe);
  if (top_n < 1 || top_n > model.label_count()) {
    throw Error(ErrorCode::kInvalidConfig, "top_n must lie in [1, |L|]");
  }
  std::vector<int> order(row.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + top_n, order.end(), [&](int a, int b) {
    if (row[a] != row[b]) return row[a] > row[b];
    return a < b;
  });
  TopNResponse response;
  response.entries.reserve(top_n);
  for (int e = 0; e < top_n; ++e) response.entries.push_back({order[e], row[order[e]]});
  return response;
}

std::int64_t sample_latency(const LatencySpec& latency, std::mt19937_64& rng) {
  std::int64_t value = latency.base_latency_ns;
  if (latency.jitter_ns > 0) {
    std::uniform_int_distribution<std::int64_t> offset(-latency.jitter_ns, latency.jitter_ns);
    value += offset(rng);
  }
  return std::max<std::int64_t>(value, 1);
}

void save_zoo(const Zoo& zoo, const std::string& path) {
  write_json_file(path, zoo_to_json(zoo));
}

Zoo load_zoo(const std::string& path) {
  try {
    return zoo_from_json(read_json_file(path));
  } catch (const Error& e) {
    throw Error(ErrorCode::kZooLoadFailure, path + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kZooLoadFailure, path + ": " + e.what());
  }
}

}  // namespace archprint
