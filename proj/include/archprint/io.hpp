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

// Versioned JSON documents for every artifact the pipeline exchanges. Each
// document carries a "format" tag and an integer "version"; readers reject
// anything else with kSchemaMismatch.

#ifndef ARCHPRINT_IO_HPP_
#define ARCHPRINT_IO_HPP_

#include <string>

#include "json.hpp"

#include "archprint/attack.hpp"
#include "archprint/evaluation.hpp"
#include "archprint/profiler.hpp"
#include "archprint/zoo.hpp"

namespace archprint {

using Json = nlohmann::json;

inline constexpr int kZooFormatVersion = 1;
inline constexpr int kTemplateFormatVersion = 1;
inline constexpr int kTimingFormatVersion = 1;
inline constexpr int kTranscriptFormatVersion = 1;
inline constexpr int kRankingFormatVersion = 1;
inline constexpr int kReportFormatVersion = 1;
inline constexpr int kDomFormatVersion = 1;

Json read_json_file(const std::string& path);
// Pretty-printing is off for large documents; output is deterministic.
void write_json_file(const std::string& path, const Json& doc, int indent = -1);

Json zoo_config_to_json(const ZooConfig& config);
ZooConfig zoo_config_from_json(const Json& j);

Json zoo_to_json(const Zoo& zoo);
Zoo zoo_from_json(const Json& j);

Json templates_to_json(const ArchitectureTemplate& templates);
ArchitectureTemplate templates_from_json(const Json& j);

Json timing_profile_to_json(const TimingProfile& profile);
TimingProfile timing_profile_from_json(const Json& j);

Json response_to_json(const TopNResponse& response, const LabelSpace* labels = nullptr);
TopNResponse response_from_json(const Json& j);

Json transcript_to_json(const AttackTranscript& transcript, bool include_wall_clock = true);
AttackTranscript transcript_from_json(const Json& j);

Json ranking_to_json(const ProbeRanking& ranking);
Json dom_to_json(const DoMReport& report);

Json campaign_config_to_json(const CampaignConfig& config);
CampaignConfig campaign_config_from_json(const Json& j);

// `include_wall_clock` = false drops fields measured with a real clock in
// loopback campaigns (timing traces and the aggregate T_X).
Json report_to_json(const CampaignReport& report, bool include_wall_clock = true);
CampaignReport report_from_json(const Json& j);

}  // namespace archprint

#endif  // ARCHPRINT_IO_HPP_
