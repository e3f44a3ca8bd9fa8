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

#include "archprint/attack.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

namespace archprint {
namespace {

std::vector<ArchitectureId> checked_restriction(const ArchitectureTemplate& templates,
                                                std::span<const ArchitectureId> restrict_to) {
  if (restrict_to.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "architecture restriction is empty");
  }
  std::vector<ArchitectureId> ids(restrict_to.begin(), restrict_to.end());
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  for (ArchitectureId j : ids) {
    if (j < 0 || j >= templates.architectures()) {
      throw Error(ErrorCode::kUnknownArchitecture,
                  "architecture " + std::to_string(j) + " has no template");
    }
  }
  return ids;
}

std::int64_t gap_to_window(const TimingWindow& w, std::int64_t t) {
  if (t < w.min_ns) return w.min_ns - t;
  if (t > w.max_ns) return t - w.max_ns;
  return 0;
}

bool is_attack_failure(ErrorCode code) {
  return code == ErrorCode::kTransport || code == ErrorCode::kProtocol ||
         code == ErrorCode::kRemote;
}

}  // namespace

std::int64_t aggregate_target_timing(std::span<const std::int64_t> traces) {
  if (traces.empty()) throw Error(ErrorCode::kEmptyTraces, "no target timing traces");
  std::vector<std::int64_t> sorted(traces.begin(), traces.end());
  const size_t mid = (sorted.size() - 1) / 2;
  std::nth_element(sorted.begin(), sorted.begin() + mid, sorted.end());
  return sorted[mid];
}

Shortlist shortlist_architectures(const TimingProfile& profile, std::int64_t target_ns) {
  Shortlist s;
  s.target_ns = target_ns;
  for (int j = 0; j < profile.architectures(); ++j) {
    if (profile.windows[j].contains(target_ns)) s.candidates.push_back(j);
  }
  if (s.candidates.empty() && profile.architectures() > 0) {
    ArchitectureId best = 0;
    std::int64_t best_gap = std::numeric_limits<std::int64_t>::max();
    for (int j = 0; j < profile.architectures(); ++j) {
      const auto gap = gap_to_window(profile.windows[j], target_ns);
      if (gap < best_gap) {
        best_gap = gap;
        best = j;
      }
    }
    s.candidates.push_back(best);
    s.fallback = true;
  }
  for (ArchitectureId j : s.candidates) {
    s.windows.push_back({profile.windows[j].min_ns, profile.windows[j].max_ns, {}});
  }
  return s;
}

ProbeRanking rank_probes(const ArchitectureTemplate& templates,
                         std::span<const ArchitectureId> restrict_to) {
  ProbeRanking ranking;
  ranking.restrict_to = checked_restriction(templates, restrict_to);
  ranking.probe_ids = templates.probe_ids();
  ranking.scores.assign(templates.probes(), 0.0);
  const auto& ids = ranking.restrict_to;
  for (int row = 0; row < templates.probes(); ++row) {
    double total = 0.0;
    for (size_t a = 0; a + 1 < ids.size(); ++a) {
      for (size_t b = a + 1; b < ids.size(); ++b) {
        total += euclidean_distance(templates.mean(row, ids[a]), templates.mean(row, ids[b]));
      }
    }
    ranking.scores[row] = total;
  }
  std::vector<int> rows(templates.probes());
  std::iota(rows.begin(), rows.end(), 0);
  // Rows are in ascending probe id order, so a stable sort keeps lower ids first.
  std::stable_sort(rows.begin(), rows.end(),
                   [&](int a, int b) { return ranking.scores[a] > ranking.scores[b]; });
  ranking.order.reserve(rows.size());
  for (int row : rows) ranking.order.push_back(ranking.probe_ids[row]);
  return ranking;
}

std::vector<ProbeId> select_probes(const ProbeRanking& ranking, int d) {
  if (d < 1 || d > static_cast<int>(ranking.order.size())) {
    throw Error(ErrorCode::kInvalidConfig,
                "d = " + std::to_string(d) + " outside [1, " +
                    std::to_string(ranking.order.size()) + "]");
  }
  return {ranking.order.begin(), ranking.order.begin() + d};
}

Match match_response(const ArchitectureTemplate& templates,
                     std::span<const ArchitectureId> restrict_to, ProbeId probe,
                     const TopNResponse& response) {
  const auto ids = checked_restriction(templates, restrict_to);
  const int row = templates.row_of(probe);
  const auto observed = expand_topn(response, templates.label_space());
  Match best{ids.front(), std::numeric_limits<double>::infinity()};
  for (ArchitectureId j : ids) {
    const double d = euclidean_distance(observed, templates.mean(row, j));
    if (d < best.distance) best = {j, d};
  }
  return best;
}

VoteResult majority_vote(std::span<const ArchitectureId> votes,
                         std::span<const double> distances) {
  if (votes.empty()) throw Error(ErrorCode::kEmptyInput, "no votes");
  if (votes.size() != distances.size()) {
    throw Error(ErrorCode::kLengthMismatch, "votes and distances are not aligned");
  }
  std::map<ArchitectureId, VoteCount> counts;
  for (size_t v = 0; v < votes.size(); ++v) {
    auto& c = counts[votes[v]];
    c.architecture = votes[v];
    ++c.votes;
    c.distance_sum += distances[v];
  }
  VoteResult result;
  for (const auto& [id, count] : counts) result.tally.push_back(count);

  int top = 0;
  for (const auto& c : result.tally) top = std::max(top, c.votes);
  std::vector<VoteCount> leaders;
  for (const auto& c : result.tally) {
    if (c.votes == top) leaders.push_back(c);
  }
  result.verdict = leaders.front().architecture;
  result.tie_broken = leaders.size() > 1;
  double best = leaders.front().distance_sum;
  // Leaders are in ascending id order; strict < keeps the lower id on equal sums.
  for (const auto& c : leaders) {
    if (c.distance_sum < best) {
      best = c.distance_sum;
      result.verdict = c.architecture;
    }
  }
  return result;
}

AttackTranscript run_attack(OracleSession& session, const ArchitectureTemplate& templates,
                            const TimingProfile& profile, const AttackParams& params) {
  if (params.repetitions < 1) throw Error(ErrorCode::kInvalidConfig, "repetitions must be >= 1");
  if (params.d < 1 || params.d > templates.probes()) {
    throw Error(ErrorCode::kInvalidConfig, "d must lie in [1, N]");
  }
  if (profile.architectures() != templates.architectures()) {
    throw Error(ErrorCode::kInconsistentDims,
                "timing profile covers " + std::to_string(profile.architectures()) +
                    " architectures, templates cover " +
                    std::to_string(templates.architectures()));
  }

  AttackTranscript t;
  const auto sent_before = session.requests_sent();
  auto spent = [&] { return static_cast<int>(session.requests_sent() - sent_before); };
  try {
    for (int r = 0; r < params.repetitions; ++r) {
      t.timing_traces.push_back(session.query(params.timing_probe).latency_ns);
    }
    t.target_ns = aggregate_target_timing(t.timing_traces);
    t.shortlist = shortlist_architectures(profile, t.target_ns);
    const auto& candidates = t.shortlist.candidates;

    if (candidates.size() == 1) {
      t.verdict = candidates.front();
      t.queries_spent = spent();
      return t;
    }

    t.selected_probes = select_probes(rank_probes(templates, candidates), params.d);
    std::vector<ArchitectureId> votes;
    std::vector<double> distances;
    for (ProbeId probe : t.selected_probes) {
      auto answer = session.query(probe);
      const auto match = match_response(templates, candidates, probe, answer.response);
      t.outcomes.push_back({probe, std::move(answer.response), match.architecture,
                            match.distance});
      votes.push_back(match.architecture);
      distances.push_back(match.distance);
    }
    const auto vote = majority_vote(votes, distances);
    t.verdict = vote.verdict;
    t.tie_broken = vote.tie_broken;
    t.tally = vote.tally;
  } catch (const Error& e) {
    if (!is_attack_failure(e.code())) throw;
    t.aborted = true;
    t.error = e.what();
    t.verdict = -1;
  }
  t.queries_spent = spent();
  return t;
}

}  // namespace archprint
