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

// Two-stage architecture extraction.
//
// Stage 1 keeps the architectures whose profiled latency window contains the
// median of the target's timing traces. Stage 2 ranks probes by how far apart
// the shortlisted templates are on them, queries the top d, assigns each
// answer to its nearest template and takes a majority vote.

#ifndef ARCHPRINT_ATTACK_HPP_
#define ARCHPRINT_ATTACK_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "archprint/client.hpp"
#include "archprint/core.hpp"
#include "archprint/profiler.hpp"

namespace archprint {

struct ProbeRanking {
  // scores[row] for template row `row`; probe_ids[row] names the probe.
  std::vector<double> scores;
  std::vector<ProbeId> probe_ids;
  std::vector<ArchitectureId> restrict_to;
  // Probe ids by descending score, ties by ascending probe id.
  std::vector<ProbeId> order;
};

struct Shortlist {
  std::vector<ArchitectureId> candidates;
  std::int64_t target_ns = 0;
  std::vector<TimingWindow> windows;  // min/max only, aligned with candidates
  bool fallback = false;
};

struct ProbeOutcome {
  ProbeId probe = 0;
  TopNResponse response;
  ArchitectureId nearest = 0;
  double distance = 0.0;
};

struct VoteCount {
  ArchitectureId architecture = 0;
  int votes = 0;
  double distance_sum = 0.0;
};

struct AttackParams {
  int d = 5;
  int repetitions = 10;
  ProbeId timing_probe = 0;
};

struct AttackTranscript {
  std::vector<std::int64_t> timing_traces;
  std::int64_t target_ns = 0;
  Shortlist shortlist;
  std::vector<ProbeId> selected_probes;
  std::vector<ProbeOutcome> outcomes;
  std::vector<VoteCount> tally;  // ascending architecture id
  ArchitectureId verdict = -1;
  int queries_spent = 0;
  bool tie_broken = false;
  bool aborted = false;
  std::string error;
};

struct VoteResult {
  ArchitectureId verdict = 0;
  bool tie_broken = false;
  std::vector<VoteCount> tally;
};

// Lower median. Throws kEmptyTraces.
std::int64_t aggregate_target_timing(std::span<const std::int64_t> traces);

// {j : MIN_j <= T_X <= MAX_j}; if that is empty, the single architecture
// whose window is nearest to T_X (lower id on ties) with the fallback flag.
Shortlist shortlist_architectures(const TimingProfile& profile, std::int64_t target_ns);

// D[i] = sum over unordered pairs (j, m) of `restrict_to` of
// ||mean[i][j] - mean[i][m]||. Throws kUnknownArchitecture.
ProbeRanking rank_probes(const ArchitectureTemplate& templates,
                         std::span<const ArchitectureId> restrict_to);

// First d probe ids of the ranking order. Throws kInvalidConfig if d is not
// in [1, N].
std::vector<ProbeId> select_probes(const ProbeRanking& ranking, int d);

struct Match {
  ArchitectureId architecture = 0;
  double distance = 0.0;
};

// Nearest template among `restrict_to` (lower id on distance ties).
Match match_response(const ArchitectureTemplate& templates,
                     std::span<const ArchitectureId> restrict_to, ProbeId probe,
                     const TopNResponse& response);

// Most frequent vote; tally ties go to the smallest summed distance, then the
// lower architecture id.
VoteResult majority_vote(std::span<const ArchitectureId> votes,
                         std::span<const double> distances);

// Runs the whole pipeline against one target. Transport, protocol and remote
// errors end the attack early with `aborted` set and the spent queries
// recorded; other errors propagate.
AttackTranscript run_attack(OracleSession& session, const ArchitectureTemplate& templates,
                            const TimingProfile& profile, const AttackParams& params = {});

}  // namespace archprint

#endif  // ARCHPRINT_ATTACK_HPP_
