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

#include "archprint/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numeric>
#include <sstream>

#include "archprint/io.hpp"
#include "archprint/service.hpp"

namespace archprint {
namespace {

// Stream tags for derive_seed; zoo generation uses 0 and 1.
constexpr std::uint64_t kProfileStream = 2;
constexpr std::uint64_t kAttackStream = 3;

using u64 = std::uint64_t;

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

std::string architecture_name(const ZooConfig& zoo, ArchitectureId j) {
  if (j >= 0 && j < static_cast<int>(zoo.architecture_names.size())) {
    return zoo.architecture_names[j];
  }
  return "arch" + std::to_string(j);
}

TimingProfile profile_in_process(const Zoo& zoo, const CampaignConfig& config) {
  std::vector<std::unique_ptr<SimulatedSession>> owned;
  std::vector<std::vector<OracleSession*>> sessions(zoo.config.architectures);
  for (int j = 0; j < zoo.config.architectures; ++j) {
    for (const OracleModel* model : zoo.profiling_models(j)) {
      owned.push_back(std::make_unique<SimulatedSession>(
          *model, zoo.config.top_n,
          derive_seed({config.seed, kProfileStream, static_cast<u64>(j),
                       static_cast<u64>(model->id().variant)})));
      sessions[j].push_back(owned.back().get());
    }
  }
  return profile_timing(sessions, config.repetitions, config.timing_probe);
}

// Serves each profiling model in turn over loopback and times it through the
// same HTTP client path the attack uses.
TimingProfile profile_loopback(const Zoo& zoo, const CampaignConfig& config) {
  std::vector<std::vector<std::vector<std::int64_t>>> traces(zoo.config.architectures);
  for (int j = 0; j < zoo.config.architectures; ++j) {
    for (const OracleModel* model : zoo.profiling_models(j)) {
      ServiceConfig sc;
      sc.top_n = zoo.config.top_n;
      sc.seed = derive_seed({config.seed, kProfileStream, static_cast<u64>(j),
                             static_cast<u64>(model->id().variant)});
      PredictionService service(*model, zoo.config.label_space, sc);
      service.start();
      {
        HttpSession session(service.endpoint(), zoo.config.label_space);
        traces[j].push_back(session.measure_latency(config.timing_probe, config.repetitions));
      }
      service.stop();
    }
    log_message(LogLevel::kInfo, "profiled timing of architecture " + std::to_string(j));
  }
  return timing_profile_from_traces(traces, config.timing_probe);
}

}  // namespace

void CampaignConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::kInvalidConfig, what); };
  if (runs < 1) fail("runs must be >= 1");
  if (repetitions < 1) fail("repetitions must be >= 1");
  if (d < 1) fail("d must be >= 1");
  if (timing_probe < 0) fail("timing probe must be >= 0");
  if (!zoo_path) {
    zoo.validate();
    if (zoo.k_holdout < 1) fail("campaign needs at least one holdout model per architecture");
    if (d > zoo.probes) fail("d exceeds the number of probes");
  }
}

CampaignReport run_campaign(const CampaignConfig& config) {
  config.validate();
  const Zoo zoo = config.zoo_path ? load_zoo(*config.zoo_path) : generate_zoo(config.zoo);
  if (zoo.config.k_holdout < 1) {
    throw Error(ErrorCode::kInvalidConfig, "zoo has no holdout models to attack");
  }

  CampaignReport report;
  report.config = config;
  report.config.zoo = zoo.config;

  auto templates = build_templates(collect_cube(zoo));
  templates.architecture_names = zoo.config.architecture_names;
  report.template_hash = templates.source_hash();

  const TimingProfile profile = config.mode == CampaignMode::kLoopback
                                    ? profile_loopback(zoo, config)
                                    : profile_in_process(zoo, config);

  const AttackParams params{config.d, config.repetitions, config.timing_probe};
  for (int j = 0; j < zoo.config.architectures; ++j) {
    for (int h = 0; h < zoo.config.k_holdout; ++h) {
      const ModelId target{j, zoo.config.k_profile + h};
      const OracleModel& model = zoo.model(target);
      for (int run = 0; run < config.runs; ++run) {
        const u64 stream = derive_seed({config.seed, kAttackStream, static_cast<u64>(j),
                                        static_cast<u64>(h), static_cast<u64>(run)});
        AttackRecord record;
        record.target = target;
        record.run = run;
        if (config.mode == CampaignMode::kLoopback) {
          ServiceConfig sc;
          sc.top_n = zoo.config.top_n;
          sc.seed = stream;
          sc.log_requests = true;
          PredictionService service(model, zoo.config.label_space, sc);
          service.start();
          {
            HttpSession session(service.endpoint(), zoo.config.label_space);
            record.transcript = run_attack(session, templates, profile, params);
          }
          service.stop();
          record.server_requests = static_cast<std::int64_t>(service.request_log().size());
        } else {
          SimulatedSession session(model, zoo.config.top_n, stream);
          record.transcript = run_attack(session, templates, profile, params);
        }
        const auto& t = record.transcript;
        record.correct = !t.aborted && t.verdict == j;
        record.shortlisted =
            !t.aborted && !t.shortlist.fallback &&
            std::find(t.shortlist.candidates.begin(), t.shortlist.candidates.end(), j) !=
                t.shortlist.candidates.end();
        report.attacks.push_back(std::move(record));
      }
    }
    log_message(LogLevel::kInfo, "attacked holdout models of architecture " + std::to_string(j));
  }
  summarize(report);
  return report;
}

void summarize(CampaignReport& report) {
  const auto& zoo = report.config.zoo;
  report.architectures.clear();
  for (int j = 0; j < zoo.architectures; ++j) {
    ArchitectureSummary s;
    s.architecture = j;
    s.name = architecture_name(zoo, j);
    report.architectures.push_back(std::move(s));
  }
  report.total_attacks = static_cast<int>(report.attacks.size());
  report.aborted_attacks = 0;
  report.max_queries = 0;
  int completed = 0;
  int correct = 0;
  int hits = 0;
  double queries = 0.0;
  for (const auto& a : report.attacks) {
    const ArchitectureId j = a.target.architecture;
    if (j < 0 || j >= zoo.architectures) {
      throw Error(ErrorCode::kInconsistentDims, "attack on unknown architecture");
    }
    auto& s = report.architectures[j];
    const auto& t = a.transcript;
    ++s.attacks;
    queries += t.queries_spent;
    report.max_queries = std::max(report.max_queries, t.queries_spent);
    if (t.aborted) {
      ++s.aborted;
      ++report.aborted_attacks;
      continue;
    }
    ++completed;
    if (t.shortlist.fallback) ++s.fallbacks;
    if (a.shortlisted) {
      ++s.shortlist_hits;
      ++hits;
    }
    if (a.correct) {
      ++s.correct;
      ++correct;
    }
    double score = a.correct ? 1.0 : 0.0;
    if (!t.outcomes.empty()) {
      const auto votes = std::count_if(t.outcomes.begin(), t.outcomes.end(),
                                       [&](const ProbeOutcome& o) { return o.nearest == j; });
      score = static_cast<double>(votes) / static_cast<double>(t.outcomes.size());
    }
    s.vote_scores.push_back(score);
  }
  report.accuracy = completed > 0 ? static_cast<double>(correct) / completed : 0.0;
  report.shortlist_hit_rate = completed > 0 ? static_cast<double>(hits) / completed : 0.0;
  report.mean_queries =
      report.total_attacks > 0 ? queries / static_cast<double>(report.total_attacks) : 0.0;
}

std::string report_table(const CampaignReport& report) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"id", "architecture", "attacks", "shortlisted", "fallbacks", "correct",
                  "accuracy", "mean_vote"});
  for (const auto& s : report.architectures) {
    const int done = s.attacks - s.aborted;
    const double acc = done > 0 ? static_cast<double>(s.correct) / done : 0.0;
    const double vote =
        s.vote_scores.empty()
            ? 0.0
            : std::accumulate(s.vote_scores.begin(), s.vote_scores.end(), 0.0) /
                  static_cast<double>(s.vote_scores.size());
    rows.push_back({std::to_string(s.architecture), s.name, std::to_string(s.attacks),
                    std::to_string(s.shortlist_hits), std::to_string(s.fallbacks),
                    std::to_string(s.correct), fmt4(acc), fmt4(vote)});
  }
  std::vector<size_t> widths(rows.front().size(), 0);
  for (const auto& r : rows) {
    for (size_t c = 0; c < r.size(); ++c) widths[c] = std::max(widths[c], r[c].size());
  }
  std::ostringstream out;
  for (const auto& r : rows) {
    for (size_t c = 0; c < r.size(); ++c) {
      if (c > 0) out << "  ";
      // Name column left-aligned, numbers right-aligned.
      if (c == 1) {
        out << r[c] << std::string(widths[c] - r[c].size(), ' ');
      } else {
        out << std::string(widths[c] - r[c].size(), ' ') << r[c];
      }
    }
    out << '\n';
  }
  out << '\n'
      << "attacks             " << report.total_attacks << " (" << report.aborted_attacks
      << " aborted)\n"
      << "accuracy            " << fmt4(report.accuracy) << '\n'
      << "shortlist hit rate  " << fmt4(report.shortlist_hit_rate) << '\n'
      << "mean queries        " << fmt4(report.mean_queries) << '\n'
      << "max queries         " << report.max_queries << '\n';
  return out.str();
}

std::string report_csv(const CampaignReport& report) {
  std::ostringstream out;
  out << "architecture,name,attacks,aborted,shortlist_hits,fallbacks,correct,accuracy,"
         "mean_vote_score\n";
  for (const auto& s : report.architectures) {
    const int done = s.attacks - s.aborted;
    const double acc = done > 0 ? static_cast<double>(s.correct) / done : 0.0;
    const double vote =
        s.vote_scores.empty()
            ? 0.0
            : std::accumulate(s.vote_scores.begin(), s.vote_scores.end(), 0.0) /
                  static_cast<double>(s.vote_scores.size());
    out << s.architecture << ',' << s.name << ',' << s.attacks << ',' << s.aborted << ','
        << s.shortlist_hits << ',' << s.fallbacks << ',' << s.correct << ',' << fmt4(acc)
        << ',' << fmt4(vote) << '\n';
  }
  return out.str();
}

void emit_report(const CampaignReport& report, ReportFormat format, const std::string& path) {
  if (format == ReportFormat::kJson) {
    write_json_file(path, report_to_json(report));
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << (format == ReportFormat::kText ? report_table(report) : report_csv(report));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

void emit_report_files(const CampaignReport& report, const std::string& prefix) {
  emit_report(report, ReportFormat::kJson, prefix + ".json");
  emit_report(report, ReportFormat::kText, prefix + ".txt");
  emit_report(report, ReportFormat::kCsv, prefix + ".csv");
}

}  // namespace archprint
