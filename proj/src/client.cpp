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

#include "archprint/client.hpp"

#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace archprint {

using Clock = std::chrono::steady_clock;

MeasuredResponse OracleSession::query(ProbeId probe) {
  ++requests_sent_;
  Reply reply = send(probe);
  if (reply.latency_ns <= 0) reply.latency_ns = 1;
  return {std::move(reply.response), reply.latency_ns, next_sequence_++};
}

std::vector<std::int64_t> OracleSession::measure_latency(ProbeId probe, int repetitions) {
  if (repetitions < 1) throw Error(ErrorCode::kInvalidConfig, "repetitions must be >= 1");
  std::vector<std::int64_t> traces;
  traces.reserve(repetitions);
  for (int r = 0; r < repetitions; ++r) traces.push_back(query(probe).latency_ns);
  return traces;
}

SimulatedSession::SimulatedSession(const OracleModel& model, int top_n,
                                   std::uint64_t latency_seed, LatencyMode mode)
    : model_(model), top_n_(top_n), rng_(latency_seed), mode_(mode) {}

OracleSession::Reply SimulatedSession::send(ProbeId probe) {
  if (probe < 0 || probe >= model_.probes()) {
    throw Error(ErrorCode::kRemote, "unknown_probe");
  }
  const std::int64_t delay = sample_latency(model_, rng_);
  if (mode_ == LatencyMode::kReport) {
    return {query_oracle(model_, probe, top_n_), delay};
  }
  const auto start = Clock::now();
  std::this_thread::sleep_for(std::chrono::nanoseconds(delay));
  auto response = query_oracle(model_, probe, top_n_);
  const auto elapsed =
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
  return {std::move(response), elapsed};
}

struct HttpSession::Impl {
  explicit Impl(const std::string& endpoint) : client(endpoint) {}
  httplib::Client client;
  bool connected = false;
};

namespace {

std::string normalize_endpoint(const std::string& endpoint) {
  if (endpoint.rfind("http://", 0) == 0 || endpoint.rfind("https://", 0) == 0) {
    return endpoint;
  }
  return "http://" + endpoint;
}

}  // namespace

HttpSession::HttpSession(const std::string& endpoint, LabelSpace label_space,
                         std::chrono::milliseconds timeout)
    : impl_(std::make_unique<Impl>(normalize_endpoint(endpoint))),
      label_space_(std::move(label_space)) {
  if (!impl_->client.is_valid()) {
    throw Error(ErrorCode::kInvalidConfig, "invalid endpoint '" + endpoint + "'");
  }
  impl_->client.set_keep_alive(true);
  impl_->client.set_tcp_nodelay(true);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(timeout - secs);
  impl_->client.set_connection_timeout(secs.count(), usecs.count());
  impl_->client.set_read_timeout(secs.count(), usecs.count());
  impl_->client.set_write_timeout(secs.count(), usecs.count());
}

HttpSession::~HttpSession() = default;

OracleSession::Reply HttpSession::send(ProbeId probe) {
  if (!impl_->connected) {
    // Open the keep-alive connection outside of any timed request.
    auto health = impl_->client.Get("/health");
    if (!health) {
      throw Error(ErrorCode::kTransport,
                  "GET /health failed: " + httplib::to_string(health.error()));
    }
    impl_->connected = true;
  }
  const std::string body = nlohmann::json{{"probe_id", probe}}.dump();
  const auto start = Clock::now();
  auto result = impl_->client.Post("/predict", body, "application/json");
  const auto elapsed =
      std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count();
  if (!result) {
    throw Error(ErrorCode::kTransport, "POST /predict failed: " + httplib::to_string(result.error()));
  }
  if (result->status == 400) {
    std::string code = "bad_request";
    try {
      code = nlohmann::json::parse(result->body).at("error").get<std::string>();
    } catch (const std::exception&) {
      throw Error(ErrorCode::kProtocol, "malformed error payload: " + result->body);
    }
    throw Error(ErrorCode::kRemote, code);
  }
  if (result->status != 200) {
    throw Error(ErrorCode::kProtocol, "unexpected HTTP status " + std::to_string(result->status));
  }
  return {parse_predict_payload(result->body, label_space_), elapsed};
}

TopNResponse parse_predict_payload(const std::string& body, const LabelSpace& label_space) {
  TopNResponse response;
  try {
    const auto doc = nlohmann::json::parse(body);
    const auto& top = doc.at("top");
    if (!top.is_array()) throw Error(ErrorCode::kProtocol, "'top' is not an array");
    for (const auto& item : top) {
      const auto label = item.at("label").get<std::string>();
      const auto index = label_space.index_of(label);
      if (!index) throw Error(ErrorCode::kProtocol, "unknown label '" + label + "'");
      if (!item.at("prob").is_number()) throw Error(ErrorCode::kProtocol, "'prob' is not a number");
      response.entries.push_back({*index, item.at("prob").get<double>()});
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kProtocol, std::string("malformed prediction payload: ") + e.what());
  }
  try {
    validate_response(response, label_space);
  } catch (const Error& e) {
    throw Error(ErrorCode::kProtocol, e.what());
  }
  return response;
}

}  // namespace archprint
