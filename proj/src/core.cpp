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

#include "archprint/core.hpp"

#include <cmath>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <random>
#include <unordered_set>

namespace archprint {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::kDuplicateClass: return "DuplicateClass";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kEmptyInput: return "EmptyInput";
    case ErrorCode::kInvalidResponse: return "InvalidResponse";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kUnknownProbe: return "UnknownProbe";
    case ErrorCode::kUnknownArchitecture: return "UnknownArchitecture";
    case ErrorCode::kInconsistentDims: return "InconsistentDims";
    case ErrorCode::kKTooSmall: return "KTooSmall";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kMissingCell: return "MissingCell";
    case ErrorCode::kProbabilityOutOfRange: return "ProbabilityOutOfRange";
    case ErrorCode::kEmptyTraces: return "EmptyTraces";
    case ErrorCode::kLoggingDisabled: return "LoggingDisabled";
    case ErrorCode::kBindFailure: return "BindFailure";
    case ErrorCode::kZooLoadFailure: return "ZooLoadFailure";
    case ErrorCode::kTransport: return "Transport";
    case ErrorCode::kProtocol: return "ProtocolError";
    case ErrorCode::kRemote: return "RemoteError";
    case ErrorCode::kIo: return "IoError";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kBindFailure:
    case ErrorCode::kTransport:
    case ErrorCode::kProtocol:
    case ErrorCode::kRemote:
    case ErrorCode::kIo:
    case ErrorCode::kLoggingDisabled:
      return false;
    default:
      return true;
  }
}

std::string to_string(const ModelId& id) {
  return std::to_string(id.architecture) + ":" + std::to_string(id.variant);
}

ModelId parse_model_id(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorCode::kInvalidConfig,
                "model id must be <arch>:<variant>, got '" + std::string(text) + "'");
  }
  try {
    size_t used_a = 0;
    size_t used_v = 0;
    const std::string arch(text.substr(0, colon));
    const std::string variant(text.substr(colon + 1));
    ModelId id{std::stoi(arch, &used_a), std::stoi(variant, &used_v)};
    if (used_a != arch.size() || used_v != variant.size() || id.architecture < 0 ||
        id.variant < 0) {
      throw std::invalid_argument("trailing characters");
    }
    return id;
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kInvalidConfig,
                "model id must be <arch>:<variant>, got '" + std::string(text) + "'");
  }
}

LabelSpace::LabelSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  if (labels_.size() < 2) {
    throw Error(ErrorCode::kInvalidConfig, "label space needs at least 2 labels");
  }
  std::unordered_set<std::string> seen;
  for (const auto& l : labels_) {
    if (!seen.insert(l).second) {
      throw Error(ErrorCode::kInvalidConfig, "duplicate label '" + l + "'");
    }
  }
}

LabelSpace LabelSpace::cifar10() {
  return LabelSpace({"airplane", "automobile", "bird", "cat", "deer", "dog", "frog",
                     "horse", "ship", "truck"});
}

LabelSpace LabelSpace::numbered(int size) {
  std::vector<std::string> labels;
  labels.reserve(size > 0 ? size : 0);
  for (int c = 0; c < size; ++c) labels.push_back("c" + std::to_string(c));
  return LabelSpace(std::move(labels));
}

const std::string& LabelSpace::label(int index) const {
  if (index < 0 || index >= size()) {
    throw Error(ErrorCode::kIndexOutOfRange,
                "class index " + std::to_string(index) + " outside label space");
  }
  return labels_[index];
}

std::optional<int> LabelSpace::index_of(std::string_view label) const {
  for (int c = 0; c < size(); ++c) {
    if (labels_[c] == label) return c;
  }
  return std::nullopt;
}

double TopNResponse::mass() const {
  double sum = 0.0;
  for (const auto& e : entries) sum += e.probability;
  return sum;
}

void validate_response(const TopNResponse& response, const LabelSpace& space) {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidResponse, what);
  };
  if (response.n() > space.size()) {
    fail("top-n of " + std::to_string(response.n()) + " exceeds |L| = " +
         std::to_string(space.size()));
  }
  std::vector<bool> seen(space.size(), false);
  for (size_t e = 0; e < response.entries.size(); ++e) {
    const auto& entry = response.entries[e];
    if (entry.class_index < 0 || entry.class_index >= space.size()) {
      fail("class index " + std::to_string(entry.class_index) + " out of range");
    }
    if (seen[entry.class_index]) {
      fail("class index " + std::to_string(entry.class_index) + " repeated");
    }
    seen[entry.class_index] = true;
    if (!(entry.probability >= 0.0 && entry.probability <= 1.0)) {
      fail("probability " + std::to_string(entry.probability) + " outside [0, 1]");
    }
    if (e > 0 && entry.probability > response.entries[e - 1].probability) {
      fail("probabilities are not non-increasing");
    }
  }
  if (response.mass() > 1.0 + 1e-9) {
    fail("total probability mass exceeds 1");
  }
}

ClassificationVector expand_topn(const TopNResponse& response, const LabelSpace& space) {
  std::vector<double> values(space.size(), 0.0);
  std::vector<bool> placed(space.size(), false);
  for (const auto& entry : response.entries) {
    if (entry.class_index < 0 || entry.class_index >= space.size()) {
      throw Error(ErrorCode::kIndexOutOfRange,
                  "class index " + std::to_string(entry.class_index) +
                      " not below |L| = " + std::to_string(space.size()));
    }
    if (placed[entry.class_index]) {
      throw Error(ErrorCode::kDuplicateClass,
                  "class index " + std::to_string(entry.class_index) + " repeated");
    }
    placed[entry.class_index] = true;
    values[entry.class_index] = entry.probability;
  }
  return ClassificationVector(std::move(values));
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kLengthMismatch, "vectors of length " + std::to_string(a.size()) +
                                                " and " + std::to_string(b.size()));
  }
  double sum = 0.0;
  for (size_t c = 0; c < a.size(); ++c) {
    const double diff = a[c] - b[c];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

ClassificationVector elementwise_mean(std::span<const std::span<const double>> vectors) {
  if (vectors.empty()) {
    throw Error(ErrorCode::kEmptyInput, "mean of an empty list");
  }
  const size_t width = vectors.front().size();
  std::vector<double> sum(width, 0.0);
  for (const auto& v : vectors) {
    if (v.size() != width) {
      throw Error(ErrorCode::kLengthMismatch, "mean over vectors of different lengths");
    }
    for (size_t c = 0; c < width; ++c) sum[c] += v[c];
  }
  const double count = static_cast<double>(vectors.size());
  for (auto& s : sum) s /= count;
  return ClassificationVector(std::move(sum));
}

ClassificationVector elementwise_mean(std::span<const ClassificationVector> vectors) {
  std::vector<std::span<const double>> views(vectors.begin(), vectors.end());
  return elementwise_mean(std::span<const std::span<const double>>(views));
}

std::uint64_t derive_seed(std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  words.reserve(parts.size() * 2);
  for (auto p : parts) {
    words.push_back(static_cast<std::uint32_t>(p & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("ARCHPRINT_LOG");
    if (env == nullptr) return LogLevel::kOff;
    const std::string_view v(env);
    if (v == "debug") return LogLevel::kDebug;
    if (v == "info") return LogLevel::kInfo;
    return LogLevel::kOff;
  }();
  return level;
}

void log_message(LogLevel level, std::string_view message) {
  if (level == LogLevel::kOff || static_cast<int>(level) > static_cast<int>(log_level())) {
    return;
  }
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  std::cerr << (level == LogLevel::kDebug ? "[debug] " : "[info] ") << message << '\n';
}

}  // namespace archprint
