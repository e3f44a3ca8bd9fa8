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

// HTTP prediction service backed by one oracle model.
//
//   POST /predict  {"probe_id": <int>}
//     200 {"top": [{"label": <string>, "prob": <float>}, ...]}
//     400 {"error": "unknown_probe"} | {"error": "bad_request"}
//   GET /health    200 {"status":"ok"}
//
// Each prediction holds a single-flight lock while it sleeps for the model's
// sampled inference latency, so the round trip seen by a client is the
// timing side channel. Unknown probes are rejected before any delay.

#ifndef ARCHPRINT_SERVICE_HPP_
#define ARCHPRINT_SERVICE_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "archprint/core.hpp"
#include "archprint/zoo.hpp"

namespace archprint {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  // 0 binds an ephemeral port.
  int port = 0;
  int top_n = 5;
  // Added to every prediction outside the single-flight section.
  std::int64_t net_delay_ns = 0;
  // Keep the in-memory request log; also on when log_path is set.
  bool log_requests = false;
  // Appends one JSON line per prediction request.
  std::optional<std::string> log_path;
  std::uint64_t seed = 0;
};

struct RequestLogEntry {
  ProbeId probe_id = 0;
  // Monotonic nanoseconds since the service started.
  std::int64_t receive_ns = 0;
};

class PredictionService {
 public:
  PredictionService(OracleModel target, LabelSpace label_space, ServiceConfig config);
  ~PredictionService();

  PredictionService(const PredictionService&) = delete;
  PredictionService& operator=(const PredictionService&) = delete;

  // Binds and starts serving on a background thread. Returns the bound port.
  // Throws kBindFailure.
  int start();
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();
  void stop();

  int port() const;
  std::string endpoint() const;

  // Throws kLoggingDisabled when logging was not requested.
  std::vector<RequestLogEntry> request_log() const;

  // The exact /predict body served for `probe` (no delay, no logging).
  std::string predict_payload(ProbeId probe) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Rounds to 9 significant digits, the precision of the wire format.
double round_to_wire(double value);

}  // namespace archprint

#endif  // ARCHPRINT_SERVICE_HPP_
