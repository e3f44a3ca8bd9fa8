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

#ifndef ARCHPRINT_CLIENT_HPP_
#define ARCHPRINT_CLIENT_HPP_

#include <chrono>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "archprint/core.hpp"
#include "archprint/zoo.hpp"

namespace archprint {

struct MeasuredResponse {
  TopNResponse response;
  std::int64_t latency_ns = 0;
  std::uint64_t sequence = 0;
};

// The adversary's view of a prediction API: top-n answers plus round-trip
// latency. A session is single-threaded and counts every request it sends,
// including failed ones.
class OracleSession {
 public:
  virtual ~OracleSession() = default;

  MeasuredResponse query(ProbeId probe);

  // `repetitions` back-to-back queries of `probe`; payloads are discarded.
  std::vector<std::int64_t> measure_latency(ProbeId probe, int repetitions = 10);

  std::uint64_t requests_sent() const { return requests_sent_; }

 protected:
  struct Reply {
    TopNResponse response;
    std::int64_t latency_ns = 0;
  };
  virtual Reply send(ProbeId probe) = 0;

 private:
  std::uint64_t requests_sent_ = 0;
  std::uint64_t next_sequence_ = 0;
};

// In-process adapter over an OracleModel.
class SimulatedSession : public OracleSession {
 public:
  enum class LatencyMode {
    // Report the sampled latency without waiting for it.
    kReport,
    // Sleep for the sampled latency and report measured elapsed time.
    kSleep,
  };

  SimulatedSession(const OracleModel& model, int top_n, std::uint64_t latency_seed,
                   LatencyMode mode = LatencyMode::kReport);

 protected:
  Reply send(ProbeId probe) override;

 private:
  const OracleModel& model_;
  int top_n_;
  std::mt19937_64 rng_;
  LatencyMode mode_;
};

// Client of the HTTP prediction service. Keeps one keep-alive connection so
// that connection setup never lands inside a latency sample.
class HttpSession : public OracleSession {
 public:
  // `endpoint` is "http://host:port" or "host:port".
  HttpSession(const std::string& endpoint, LabelSpace label_space,
              std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~HttpSession() override;

 protected:
  Reply send(ProbeId probe) override;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  LabelSpace label_space_;
};

// Parses a /predict body into a validated TopNResponse. Throws kProtocol.
TopNResponse parse_predict_payload(const std::string& body, const LabelSpace& label_space);

}  // namespace archprint

#endif  // ARCHPRINT_CLIENT_HPP_
