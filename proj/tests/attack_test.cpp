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

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "archprint/attack.hpp"
#include "archprint/client.hpp"
#include "archprint/profiler.hpp"
#include "archprint/service.hpp"
#include "archprint/zoo.hpp"
#include "test_util.hpp"

namespace archprint {
namespace {

using testing::naive_distance;
using testing::naive_scores;
using testing::Nested;
using testing::random_simplex;
using testing::small_config;
using testing::template_from_nested;

TimingProfile windows(std::vector<std::pair<std::int64_t, std::int64_t>> ranges) {
  TimingProfile p;
  for (auto [lo, hi] : ranges) p.windows.push_back({lo, hi, {lo, hi}});
  p.repetitions = 1;
  p.models_per_architecture = 2;
  return p;
}

// Replays a fixed latency and answers from a model table; can fail after a
// given number of requests.
class ScriptedSession : public OracleSession {
 public:
  ScriptedSession(const OracleModel& model, std::int64_t latency, int fail_after = -1)
      : model_(model), latency_(latency), fail_after_(fail_after) {}

 protected:
  Reply send(ProbeId probe) override {
    if (fail_after_ >= 0 && static_cast<int>(requests_sent()) > fail_after_) {
      throw Error(ErrorCode::kTransport, "connection reset");
    }
    return {query_oracle(model_, probe, 5), latency_};
  }

 private:
  const OracleModel& model_;
  std::int64_t latency_;
  int fail_after_;
};

Nested random_means(int n, int z, int width, std::mt19937_64& rng) {
  Nested means(n, std::vector<std::vector<double>>(z));
  for (auto& row : means) {
    for (auto& v : row) v = random_simplex(width, rng);
  }
  return means;
}

// --- aggregate / shortlist ---------------------------------------------------

TEST(AggregateTiming, LowerMedian) {
  EXPECT_EQ(aggregate_target_timing(std::vector<std::int64_t>{7}), 7);
  EXPECT_EQ(aggregate_target_timing(std::vector<std::int64_t>{5, 9, 7}), 7);
  EXPECT_EQ(aggregate_target_timing(std::vector<std::int64_t>{4, 8, 6, 10}), 6);
  try {
    aggregate_target_timing(std::vector<std::int64_t>{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kEmptyTraces);
  }
}

TEST(Shortlist, Containment) {
  const auto p = windows({{5, 10}, {8, 12}, {20, 30}});
  const auto s = shortlist_architectures(p, 9);
  EXPECT_EQ(s.candidates, (std::vector<ArchitectureId>{0, 1}));
  EXPECT_FALSE(s.fallback);
  EXPECT_EQ(s.target_ns, 9);
  ASSERT_EQ(s.windows.size(), 2u);
  EXPECT_EQ(s.windows[1].max_ns, 12);
}

TEST(Shortlist, BoundsAreInclusive) {
  const auto p = windows({{5, 10}});
  EXPECT_EQ(shortlist_architectures(p, 10).candidates, std::vector<ArchitectureId>{0});
  EXPECT_EQ(shortlist_architectures(p, 5).candidates, std::vector<ArchitectureId>{0});
  EXPECT_FALSE(shortlist_architectures(p, 10).fallback);
}

TEST(Shortlist, FallbackPicksNearestWindow) {
  const auto p = windows({{5, 10}, {8, 12}, {20, 30}});
  const auto s = shortlist_architectures(p, 15);  // gaps 5, 3, 5
  EXPECT_EQ(s.candidates, std::vector<ArchitectureId>{1});
  EXPECT_TRUE(s.fallback);
  // Equal gaps resolve to the lower id.
  EXPECT_EQ(shortlist_architectures(windows({{1, 2}, {6, 7}}), 4).candidates,
            std::vector<ArchitectureId>{0});
}

TEST(Shortlist, ExactlyTheContainmentSetOnRandomInstances) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int z = 1 + static_cast<int>(rng() % 8);
    std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
    for (int j = 0; j < z; ++j) {
      const std::int64_t lo = 1 + static_cast<std::int64_t>(rng() % 50);
      ranges.emplace_back(lo, lo + static_cast<std::int64_t>(rng() % 20));
    }
    // Half the time land exactly on an endpoint.
    std::int64_t t = static_cast<std::int64_t>(rng() % 80);
    if (trial % 2 == 0) {
      const auto& r = ranges[rng() % z];
      t = (rng() % 2) ? r.first : r.second;
    }
    std::vector<ArchitectureId> expected;
    for (int j = 0; j < z; ++j) {
      if (ranges[j].first <= t && t <= ranges[j].second) expected.push_back(j);
    }
    const auto s = shortlist_architectures(windows(ranges), t);
    if (!expected.empty()) {
      EXPECT_EQ(s.candidates, expected);
      EXPECT_FALSE(s.fallback);
    } else {
      ASSERT_EQ(s.candidates.size(), 1u);
      EXPECT_TRUE(s.fallback);
    }
  }
}

// --- ranking / selection -----------------------------------------------------

TEST(RankProbes, SingleArchitectureScoresZero) {
  std::mt19937_64 rng(1);
  const auto t = template_from_nested(random_means(6, 3, 4, rng), LabelSpace::numbered(4));
  const ArchitectureId one[] = {2};
  const auto r = rank_probes(t, one);
  EXPECT_EQ(r.scores, std::vector<double>(6, 0.0));
  EXPECT_EQ(r.order, (std::vector<ProbeId>{0, 1, 2, 3, 4, 5}));
}

TEST(RankProbes, SinglePairOfBasisVectors) {
  const Nested means{{{1, 0}, {0, 1}}};
  const auto t = template_from_nested(means, LabelSpace::numbered(2));
  const ArchitectureId both[] = {0, 1};
  EXPECT_DOUBLE_EQ(rank_probes(t, both).scores[0], std::sqrt(2.0));
}

TEST(RankProbes, SmallTemplateMatchesBruteForce) {
  std::mt19937_64 rng(3);
  const auto means = random_means(4, 3, 5, rng);
  const auto t = template_from_nested(means, LabelSpace::numbered(5));
  const ArchitectureId all[] = {0, 1, 2};
  const auto scores = rank_probes(t, all).scores;
  const auto expected = naive_scores(means, {0, 1, 2});
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(scores[i], expected[i], 1e-12);
}

TEST(RankProbes, BruteForceEquivalenceOverSeeds) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    const int n = 1 + static_cast<int>(rng() % 8);
    const int z = 2 + static_cast<int>(rng() % 3);
    const int k = 1 + static_cast<int>(rng() % 3);
    const int width = 2 + static_cast<int>(rng() % 6);
    // Build a cube, average it naively, then compare rankings.
    std::vector<ProbeId> ids(n);
    std::iota(ids.begin(), ids.end(), 0);
    ResponseCube cube(ids, z, k, LabelSpace::numbered(width), Provenance::kSimulated);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < z; ++j) {
        for (int p = 0; p < k; ++p) {
          const auto v = random_simplex(width, rng);
          std::copy(v.begin(), v.end(), cube.mutable_cell(i, j, p).begin());
        }
      }
    }
    Nested means(n, std::vector<std::vector<double>>(z));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < z; ++j) means[i][j] = testing::naive_mean(cube, i, j);
    }
    std::vector<int> restrict_to;
    for (int j = 0; j < z; ++j) {
      if (rng() % 3 != 0 || restrict_to.empty()) restrict_to.push_back(j);
    }
    const auto ranking = rank_probes(build_templates(cube), restrict_to);
    const auto expected = naive_scores(means, restrict_to);
    for (int i = 0; i < n; ++i) ASSERT_NEAR(ranking.scores[i], expected[i], 1e-12) << seed;
    // Descending, ties by lower id.
    for (size_t a = 0; a + 1 < ranking.order.size(); ++a) {
      const double sa = expected[ranking.order[a]], sb = expected[ranking.order[a + 1]];
      ASSERT_TRUE(sa > sb + 1e-12 || (std::abs(sa - sb) <= 1e-12 &&
                                      ranking.order[a] < ranking.order[a + 1]))
          << seed;
    }
  }
}

TEST(RankProbes, UnknownArchitecture) {
  std::mt19937_64 rng(1);
  const auto t = template_from_nested(random_means(2, 2, 3, rng), LabelSpace::numbered(3));
  const ArchitectureId bad[] = {0, 2};
  try {
    rank_probes(t, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownArchitecture);
  }
}

TEST(SelectProbes, Examples) {
  ProbeRanking r;
  r.probe_ids = {0, 1, 2, 3};
  r.scores = {0.2, 0.9, 0.5, 0.1};
  r.order = {1, 2, 0, 3};
  EXPECT_EQ(select_probes(r, 4), r.order);
  EXPECT_EQ(select_probes(r, 1), std::vector<ProbeId>{1});
  EXPECT_THROW(select_probes(r, 0), Error);
  EXPECT_THROW(select_probes(r, 5), Error);

  const Nested flat(6, {{0.5, 0.5}, {0.5, 0.5}});
  const auto t = template_from_nested(flat, LabelSpace::numbered(2));
  const ArchitectureId both[] = {0, 1};
  EXPECT_EQ(select_probes(rank_probes(t, both), 3), (std::vector<ProbeId>{0, 1, 2}));
}

// --- matching / voting -------------------------------------------------------

TEST(MatchResponse, ExactMeanMatchesWithZeroDistance) {
  const Nested means{{{0.5, 0.3, 0.2}, {0.1, 0.1, 0.8}, {0.3, 0.3, 0.4}}};
  const auto t = template_from_nested(means, LabelSpace::numbered(3));
  const ArchitectureId all[] = {0, 1, 2};
  const auto m = match_response(t, all, 0, TopNResponse{{{2, 0.8}, {0, 0.1}, {1, 0.1}}});
  EXPECT_EQ(m.architecture, 1);
  EXPECT_EQ(m.distance, 0.0);
  const ArchitectureId only[] = {2};
  EXPECT_EQ(match_response(t, only, 0, TopNResponse{{{0, 1.0}}}).architecture, 2);
}

TEST(MatchResponse, AgreesWithExhaustiveScan) {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const int width = 3 + static_cast<int>(rng() % 5);
    const auto means = random_means(3, 4, width, rng);
    const auto t = template_from_nested(means, LabelSpace::numbered(width));
    const ProbeId probe = static_cast<ProbeId>(rng() % 3);
    auto probs = random_simplex(width, rng);
    TopNResponse r;
    std::vector<int> order(width);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return probs[a] > probs[b]; });
    for (int e = 0; e < std::min(width, 3); ++e) r.entries.push_back({order[e], probs[order[e]]});
    std::vector<double> dense(width, 0.0);
    for (const auto& e : r.entries) dense[e.class_index] = e.probability;
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int j = 0; j < 4; ++j) {
      const double d = naive_distance(dense, means[probe][j]);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    const ArchitectureId all[] = {0, 1, 2, 3};
    const auto m = match_response(t, all, probe, r);
    EXPECT_EQ(m.architecture, best);
    EXPECT_NEAR(m.distance, best_d, 1e-12);
  }
}

TEST(MatchResponse, EqualDistancesGoToLowerId) {
  const Nested means{{{1, 0}, {0, 1}}};
  const auto t = template_from_nested(means, LabelSpace::numbered(2));
  const ArchitectureId both[] = {1, 0};
  EXPECT_EQ(match_response(t, both, 0, TopNResponse{{{0, 0.5}, {1, 0.5}}}).architecture, 0);
  try {
    match_response(t, both, 3, TopNResponse{{{0, 0.5}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownProbe);
  }
}

TEST(MajorityVote, Examples) {
  auto r = majority_vote(std::vector<ArchitectureId>{4, 4, 7}, std::vector<double>{1, 1, 0.1});
  EXPECT_EQ(r.verdict, 4);
  EXPECT_FALSE(r.tie_broken);

  r = majority_vote(std::vector<ArchitectureId>{4, 7}, std::vector<double>{0.1, 0.5});
  EXPECT_EQ(r.verdict, 4);
  EXPECT_TRUE(r.tie_broken);
  r = majority_vote(std::vector<ArchitectureId>{7, 4}, std::vector<double>{0.1, 0.5});
  EXPECT_EQ(r.verdict, 7);
  EXPECT_TRUE(r.tie_broken);
  // Equal sums fall back to the lower id.
  r = majority_vote(std::vector<ArchitectureId>{7, 4}, std::vector<double>{0.5, 0.5});
  EXPECT_EQ(r.verdict, 4);

  r = majority_vote(std::vector<ArchitectureId>{3}, std::vector<double>{0.2});
  EXPECT_EQ(r.verdict, 3);
  EXPECT_FALSE(r.tie_broken);
  ASSERT_EQ(r.tally.size(), 1u);
  EXPECT_EQ(r.tally[0].votes, 1);

  EXPECT_THROW(majority_vote(std::vector<ArchitectureId>{}, std::vector<double>{}), Error);
  EXPECT_THROW(majority_vote(std::vector<ArchitectureId>{1}, std::vector<double>{}), Error);
}

TEST(AttackProperties, ScalingDistancesNeverChangesVerdicts) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 7);
    std::vector<ArchitectureId> votes(n);
    std::vector<double> dist(n);
    for (int v = 0; v < n; ++v) {
      votes[v] = static_cast<int>(rng() % 3);
      dist[v] = u(rng);
    }
    const double scale = std::ldexp(1.0, static_cast<int>(rng() % 20) - 10) * (1 + u(rng));
    auto scaled = dist;
    for (auto& d : scaled) d *= scale;
    const auto a = majority_vote(votes, dist);
    const auto b = majority_vote(votes, scaled);
    EXPECT_EQ(a.verdict, b.verdict);
    EXPECT_EQ(a.tie_broken, b.tie_broken);

    // Scaling the templates and the response together scales every distance.
    const auto means = random_means(1, 3, 4, rng);
    Nested big = means;
    for (auto& v : big[0]) {
      for (auto& x : v) x *= 0.5;
    }
    const ArchitectureId all[] = {0, 1, 2};
    const auto probs = random_simplex(4, rng);
    TopNResponse r;
    std::vector<int> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](int x, int y) { return probs[x] > probs[y]; });
    TopNResponse half;
    for (int c : order) {
      r.entries.push_back({c, probs[c]});
      half.entries.push_back({c, probs[c] * 0.5});
    }
    EXPECT_EQ(match_response(template_from_nested(means, LabelSpace::numbered(4)), all, 0, r)
                  .architecture,
              match_response(template_from_nested(big, LabelSpace::numbered(4)), all, 0, half)
                  .architecture);
  }
}

// --- run_attack --------------------------------------------------------------

struct Fixture {
  Zoo zoo;
  ArchitectureTemplate templates;
  TimingProfile profile;
};

Fixture degenerate_fixture(int z, std::int64_t overlap_base) {
  auto c = small_config(z, 3, 1, 50, 11);
  c.intra_noise = 0.0;
  for (auto& t : c.timing) t.jitter_ns = 0;
  if (overlap_base > 0) {
    for (auto& t : c.timing) t.base_latency_ns = overlap_base;
  }
  Zoo zoo = generate_zoo(c);
  auto templates = build_templates(collect_cube(zoo));
  std::vector<std::vector<std::vector<std::int64_t>>> traces(z);
  for (int j = 0; j < z; ++j) {
    for (const auto* m : zoo.profiling_models(j)) {
      SimulatedSession s(*m, 5, 1);
      traces[j].push_back(s.measure_latency(0, 10));
    }
  }
  auto profile = timing_profile_from_traces(traces);
  return {std::move(zoo), std::move(templates), std::move(profile)};
}

TEST(RunAttack, DefaultsStayWithinBudget) {
  const Zoo zoo = generate_zoo(default_zoo_config(42));
  const auto templates = build_templates(collect_cube(zoo));
  std::vector<std::unique_ptr<SimulatedSession>> owned;
  std::vector<std::vector<OracleSession*>> sessions(27);
  for (int j = 0; j < 27; ++j) {
    for (const auto* m : zoo.profiling_models(j)) {
      owned.push_back(std::make_unique<SimulatedSession>(*m, 5, 1000 + owned.size()));
      sessions[j].push_back(owned.back().get());
    }
  }
  const auto profile = profile_timing(sessions, 10);
  for (const auto& m : zoo.holdout) {
    SimulatedSession target(m, 5, 7);
    const auto t = run_attack(target, templates, profile, AttackParams{});
    EXPECT_LE(t.queries_spent, 15);
    EXPECT_EQ(t.queries_spent, 10 + static_cast<int>(t.outcomes.size()));
    EXPECT_EQ(t.queries_spent, static_cast<int>(target.requests_sent()));
  }
}

TEST(RunAttack, SingletonShortlistSkipsProbing) {
  const auto f = degenerate_fixture(3, 0);
  SimulatedSession target(f.zoo.model({2, 3}), 5, 1);
  const auto t = run_attack(target, f.templates, f.profile, AttackParams{});
  EXPECT_EQ(t.shortlist.candidates, std::vector<ArchitectureId>{2});
  EXPECT_EQ(t.queries_spent, 10);
  EXPECT_TRUE(t.selected_probes.empty());
  EXPECT_EQ(t.verdict, 2);
}

TEST(RunAttack, DegenerateZooIsUnanimous) {
  // All windows coincide so stage two always runs over every architecture.
  const auto f = degenerate_fixture(4, 3'000'000);
  for (int j = 0; j < 4; ++j) {
    for (int p = 0; p < 3; ++p) {
      SimulatedSession target(f.zoo.model({j, p}), 5, 1);
      const auto t = run_attack(target, f.templates, f.profile, AttackParams{});
      ASSERT_EQ(t.shortlist.candidates.size(), 4u);
      EXPECT_EQ(t.verdict, j);
      ASSERT_EQ(t.outcomes.size(), 5u);
      for (const auto& o : t.outcomes) EXPECT_EQ(o.nearest, j);
      ASSERT_EQ(t.tally.size(), 1u);
      EXPECT_EQ(t.tally[0].votes, 5);
      EXPECT_EQ(t.queries_spent, 15);
    }
  }
}

TEST(RunAttack, ShortlistContainsTrueArchitectureWhenWindowCoversTarget) {
  const Zoo zoo = generate_zoo(default_zoo_config(3));
  const auto templates = build_templates(collect_cube(zoo, std::vector<ProbeId>{0, 1, 2, 3, 4, 5}));
  std::vector<std::vector<std::vector<std::int64_t>>> traces(27);
  for (int j = 0; j < 27; ++j) {
    for (const auto* m : zoo.profiling_models(j)) {
      SimulatedSession s(*m, 5, derive_seed({3, static_cast<std::uint64_t>(j)}));
      traces[j].push_back(s.measure_latency(0, 10));
    }
  }
  const auto profile = timing_profile_from_traces(traces);
  for (const auto& m : zoo.holdout) {
    SimulatedSession target(m, 5, 55);
    const auto t = run_attack(target, templates, profile, AttackParams{5, 10, 0});
    if (profile.windows[m.id().architecture].contains(t.target_ns)) {
      EXPECT_NE(std::find(t.shortlist.candidates.begin(), t.shortlist.candidates.end(),
                          m.id().architecture),
                t.shortlist.candidates.end());
    }
  }
}

TEST(RunAttack, IdenticalInputsGiveIdenticalTranscripts) {
  const auto f = degenerate_fixture(4, 3'000'000);
  SimulatedSession a(f.zoo.model({1, 3}), 5, 9), b(f.zoo.model({1, 3}), 5, 9);
  const auto ta = run_attack(a, f.templates, f.profile, AttackParams{});
  const auto tb = run_attack(b, f.templates, f.profile, AttackParams{});
  EXPECT_EQ(ta.timing_traces, tb.timing_traces);
  EXPECT_EQ(ta.selected_probes, tb.selected_probes);
  EXPECT_EQ(ta.verdict, tb.verdict);
  ASSERT_EQ(ta.outcomes.size(), tb.outcomes.size());
  for (size_t o = 0; o < ta.outcomes.size(); ++o) {
    EXPECT_EQ(ta.outcomes[o].response, tb.outcomes[o].response);
    EXPECT_EQ(ta.outcomes[o].distance, tb.outcomes[o].distance);
  }
}

TEST(RunAttack, BudgetCeilingAcrossSmallParameters) {
  const auto f = degenerate_fixture(4, 3'000'000);
  for (int reps = 1; reps <= 10; ++reps) {
    for (int d = 1; d <= 5; ++d) {
      SimulatedSession target(f.zoo.model({0, 3}), 5, 1);
      const auto t = run_attack(target, f.templates, f.profile, AttackParams{d, reps, 0});
      EXPECT_LE(t.queries_spent, 15);
      EXPECT_EQ(t.queries_spent, reps + d);
    }
  }
}

TEST(RunAttack, TransportFailureAbortsWithSpentQueries) {
  const auto f = degenerate_fixture(4, 3'000'000);
  ScriptedSession target(f.zoo.model({0, 3}), 3'000'000, 12);
  const auto t = run_attack(target, f.templates, f.profile, AttackParams{});
  EXPECT_TRUE(t.aborted);
  EXPECT_EQ(t.verdict, -1);
  EXPECT_EQ(t.queries_spent, 13);
  EXPECT_EQ(t.outcomes.size(), 2u);
  EXPECT_NE(t.error.find("connection reset"), std::string::npos);
}

TEST(RunAttack, FallbackShortlistStillAnswers) {
  const auto f = degenerate_fixture(3, 0);
  ScriptedSession target(f.zoo.model({1, 3}), 1, -1);  // far below every window
  const auto t = run_attack(target, f.templates, f.profile, AttackParams{});
  EXPECT_TRUE(t.shortlist.fallback);
  EXPECT_EQ(t.shortlist.candidates, std::vector<ArchitectureId>{0});
  EXPECT_EQ(t.verdict, 0);
}

TEST(RunAttack, RejectsBadParameters) {
  const auto f = degenerate_fixture(3, 0);
  SimulatedSession target(f.zoo.model({0, 0}), 5, 1);
  EXPECT_THROW(run_attack(target, f.templates, f.profile, AttackParams{0, 10, 0}), Error);
  EXPECT_THROW(run_attack(target, f.templates, f.profile, AttackParams{5, 0, 0}), Error);
  EXPECT_THROW(run_attack(target, f.templates, f.profile, AttackParams{51, 10, 0}), Error);
  auto short_profile = f.profile;
  short_profile.windows.pop_back();
  EXPECT_THROW(run_attack(target, f.templates, short_profile, AttackParams{}), Error);
  EXPECT_EQ(target.requests_sent(), 0u);
}

TEST(RunAttack, LoopbackRequestLogAgreesWithTranscript) {
  const auto f = degenerate_fixture(4, 1'000'000);
  ServiceConfig sc;
  sc.log_requests = true;
  PredictionService service(f.zoo.model({2, 3}), f.zoo.config.label_space, sc);
  service.start();
  AttackTranscript t;
  {
    HttpSession session(service.endpoint(), f.zoo.config.label_space);
    // Loopback overhead pushes T_X above the simulated windows, so widen them.
    auto profile = f.profile;
    for (auto& w : profile.windows) w.max_ns += 50'000'000;
    t = run_attack(session, f.templates, profile, AttackParams{});
  }
  service.stop();
  EXPECT_FALSE(t.aborted);
  EXPECT_EQ(t.verdict, 2);
  EXPECT_EQ(t.queries_spent, 15);
  EXPECT_EQ(static_cast<int>(service.request_log().size()), t.queries_spent);
}

}  // namespace
}  // namespace archprint
