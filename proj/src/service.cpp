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

#include "archprint/service.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace archprint {

using Clock = std::chrono::steady_clock;

double round_to_wire(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return std::strtod(buf, nullptr);
}

struct PredictionService::Impl {
  Impl(OracleModel model, LabelSpace labels, ServiceConfig cfg)
      : target(std::move(model)),
        label_space(std::move(labels)),
        config(std::move(cfg)),
        rng(config.seed) {}

  std::string payload(ProbeId probe) const {
    const auto response = query_oracle(target, probe, config.top_n);
    nlohmann::json top = nlohmann::json::array();
    for (const auto& e : response.entries) {
      top.push_back({{"label", label_space.label(e.class_index)},
                     {"prob", round_to_wire(e.probability)}});
    }
    return nlohmann::json{{"top", std::move(top)}}.dump();
  }

  void record(ProbeId probe, std::int64_t receive_ns) {
    if (!logging()) return;
    std::lock_guard<std::mutex> lock(log_mu);
    log.push_back({probe, receive_ns});
    if (log_file.is_open()) {
      log_file << nlohmann::json{{"probe_id", probe}, {"receive_ns", receive_ns}}.dump() << '\n';
      log_file.flush();
    }
  }

  bool logging() const { return config.log_requests || config.log_path.has_value(); }

  void handle_predict(const httplib::Request& req, httplib::Response& res) {
    const std::int64_t received =
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - started).count();
    ProbeId probe = -1;
    bool parsed = false;
    try {
      const auto body = nlohmann::json::parse(req.body);
      const auto& id = body.at("probe_id");
      if (id.is_number_integer()) {
        probe = id.get<ProbeId>();
        parsed = true;
      }
    } catch (const std::exception&) {
    }
    record(probe, received);
    if (!parsed) {
      res.status = 400;
      res.set_content(R"({"error":"bad_request"})", "application/json");
      return;
    }
    if (probe < 0 || probe >= target.probes()) {
      res.status = 400;
      res.set_content(R"({"error":"unknown_probe"})", "application/json");
      return;
    }
    if (config.net_delay_ns > 0) {
      std::this_thread::sleep_for(std::chrono::nanoseconds(config.net_delay_ns));
    }
    std::string body;
    {
      std::lock_guard<std::mutex> lock(predict_mu);
      const std::int64_t delay = sample_latency(target, rng);
      std::this_thread::sleep_for(std::chrono::nanoseconds(delay));
      body = payload(probe);
    }
    res.status = 200;
    res.set_content(body, "application/json");
  }

  OracleModel target;
  LabelSpace label_space;
  ServiceConfig config;
  std::mt19937_64 rng;  // guarded by predict_mu
  std::mutex predict_mu;

  mutable std::mutex log_mu;
  std::vector<RequestLogEntry> log;
  std::ofstream log_file;

  httplib::Server server;
  std::thread thread;
  int port = 0;
  Clock::time_point started = Clock::now();
};

PredictionService::PredictionService(OracleModel target, LabelSpace label_space,
                                     ServiceConfig config)
    : impl_(std::make_unique<Impl>(std::move(target), std::move(label_space),
                                   std::move(config))) {
  const auto& c = impl_->config;
  if (c.top_n < 1 || c.top_n > impl_->label_space.size()) {
    throw Error(ErrorCode::kInvalidConfig, "top_n must lie in [1, |L|]");
  }
  if (impl_->target.label_count() != impl_->label_space.size()) {
    throw Error(ErrorCode::kInvalidConfig, "target model and label space disagree on |L|");
  }
  if (c.net_delay_ns < 0) throw Error(ErrorCode::kInvalidConfig, "net delay must be >= 0");
  if (c.log_path) {
    impl_->log_file.open(*c.log_path, std::ios::app);
    if (!impl_->log_file) throw Error(ErrorCode::kIo, "cannot open log " + *c.log_path);
  }

  // Keep one connection open for a whole attack so no timed request pays
  // for a reconnect; a short idle timeout keeps stop() prompt.
  impl_->server.set_keep_alive_max_count(1 << 20);
  impl_->server.set_keep_alive_timeout(1);
  impl_->server.set_tcp_nodelay(true);
  // No SO_REUSEPORT: a second service must not share a port that is in use.
  impl_->server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });

  Impl* impl = impl_.get();
  impl_->server.Post("/predict", [impl](const httplib::Request& req, httplib::Response& res) {
    impl->handle_predict(req, res);
  });
  impl_->server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"status":"ok"})", "application/json");
  });
}

PredictionService::~PredictionService() { stop(); }

int PredictionService::start() {
  auto& s = impl_->server;
  const auto& c = impl_->config;
  if (c.port == 0) {
    impl_->port = s.bind_to_any_port(c.host);
    if (impl_->port < 0) impl_->port = 0;
  } else if (s.bind_to_port(c.host, c.port)) {
    impl_->port = c.port;
  }
  if (impl_->port <= 0) {
    throw Error(ErrorCode::kBindFailure,
                "cannot bind " + c.host + ":" + std::to_string(c.port));
  }
  impl_->started = Clock::now();
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  s.wait_until_ready();
  log_message(LogLevel::kInfo, "serving on " + endpoint());
  return impl_->port;
}

void PredictionService::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void PredictionService::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

int PredictionService::port() const { return impl_->port; }

std::string PredictionService::endpoint() const {
  return "http://" + impl_->config.host + ":" + std::to_string(impl_->port);
}

std::vector<RequestLogEntry> PredictionService::request_log() const {
  if (!impl_->logging()) {
    throw Error(ErrorCode::kLoggingDisabled, "request logging was not enabled");
  }
  std::lock_guard<std::mutex> lock(impl_->log_mu);
  return impl_->log;
}

std::string PredictionService::predict_payload(ProbeId probe) const {
  return impl_->payload(probe);
}

}  // namespace archprint
