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

// Campaign harness: profile a zoo, attack every holdout model `runs` times and
// aggregate shortlist recall, verdict accuracy and query spend.

#ifndef ARCHPRINT_EVALUATION_HPP_
#define ARCHPRINT_EVALUATION_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "archprint/attack.hpp"
#include "archprint/zoo.hpp"

namespace archprint {

enum class CampaignMode {
  // Oracles are called in-process and report simulated latencies. Fully
  // deterministic.
  kInProcess,
  // Every model is served over loopback HTTP and timed with the wall clock.
  kLoopback,
};

struct CampaignConfig {
  ZooConfig zoo = default_zoo_config(42);
  // Load the zoo from this file instead of generating it from `zoo`.
  std::optional<std::string> zoo_path;
  int repetitions = 10;
  int d = 5;
  int runs = 1;
  ProbeId timing_probe = 0;
  std::uint64_t seed = 42;
  CampaignMode mode = CampaignMode::kInProcess;

  void validate() const;
};

struct AttackRecord {
  ModelId target;
  int run = 0;
  bool correct = false;
  // True architecture in the shortlist by containment (no fallback).
  bool shortlisted = false;
  // Requests seen by the service (loopback mode), -1 in-process.
  std::int64_t server_requests = -1;
  AttackTranscript transcript;
};

struct ArchitectureSummary {
  ArchitectureId architecture = 0;
  std::string name;
  int attacks = 0;
  int aborted = 0;
  int shortlist_hits = 0;
  int fallbacks = 0;
  int correct = 0;
  // Per attack: share of probe votes cast for the true architecture; attacks
  // decided by timing alone score 1 when right and 0 when wrong.
  std::vector<double> vote_scores;
};

struct CampaignReport {
  CampaignConfig config;
  std::string template_hash;
  std::vector<ArchitectureSummary> architectures;
  std::vector<AttackRecord> attacks;
  int total_attacks = 0;
  int aborted_attacks = 0;
  double shortlist_hit_rate = 0.0;
  double accuracy = 0.0;
  double mean_queries = 0.0;
  int max_queries = 0;
};

CampaignReport run_campaign(const CampaignConfig& config);

// Recomputes every summary and aggregate of `report` from its attack records.
void summarize(CampaignReport& report);

enum class ReportFormat { kJson, kText, kCsv };

// JSON for machines, an aligned table for humans (4 significant digits), or
// a per-architecture CSV for external plotting.
void emit_report(const CampaignReport& report, ReportFormat format, const std::string& path);
// <prefix>.json, <prefix>.txt and <prefix>.csv.
void emit_report_files(const CampaignReport& report, const std::string& prefix);

std::string report_table(const CampaignReport& report);
std::string report_csv(const CampaignReport& report);

}  // namespace archprint

#endif  // ARCHPRINT_EVALUATION_HPP_
