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

#include "archprint/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace archprint {
namespace {

Json header(const char* format, int version) {
  return Json{{"format", format}, {"version", version}};
}

void check_header(const Json& j, const char* format, int version) {
  if (!j.is_object() || !j.contains("format") || j.at("format") != format) {
    throw Error(ErrorCode::kSchemaMismatch, std::string("expected a '") + format + "' document");
  }
  if (!j.contains("version") || j.at("version") != version) {
    throw Error(ErrorCode::kSchemaMismatch,
                std::string("unsupported ") + format + " version " +
                    (j.contains("version") ? j.at("version").dump() : "<missing>"));
  }
}

// Converts nlohmann type errors into schema errors naming the document.
template <typename F>
auto schema_guard(const char* what, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error&) {
    throw;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kSchemaMismatch, std::string(what) + ": " + e.what());
  }
}

const char* mode_name(CampaignMode mode) {
  return mode == CampaignMode::kLoopback ? "loopback" : "in_process";
}

CampaignMode mode_from_name(const std::string& name) {
  if (name == "in_process") return CampaignMode::kInProcess;
  if (name == "loopback") return CampaignMode::kLoopback;
  throw Error(ErrorCode::kInvalidConfig, "mode must be 'in_process' or 'loopback'");
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kSchemaMismatch, path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& doc, int indent) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << doc.dump(indent) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

Json zoo_config_to_json(const ZooConfig& c) {
  Json timing = Json::array();
  for (const auto& t : c.timing) {
    timing.push_back({{"base_latency_ns", t.base_latency_ns}, {"jitter_ns", t.jitter_ns}});
  }
  return Json{{"architectures", c.architectures},
              {"k_profile", c.k_profile},
              {"k_holdout", c.k_holdout},
              {"probes", c.probes},
              {"labels", c.label_space.labels()},
              {"inter_concentration", c.inter_concentration},
              {"intra_noise", c.intra_noise},
              {"top_n", c.top_n},
              {"timing", std::move(timing)},
              {"architecture_names", c.architecture_names},
              {"seed", c.seed}};
}

// Missing keys keep the defaults of default_zoo_config; a missing timing
// layout falls back to the default layout for 27 architectures and to the
// spread layout otherwise.
ZooConfig zoo_config_from_json(const Json& j) {
  return schema_guard("zoo config", [&] {
    ZooConfig c = default_zoo_config(j.value("seed", std::uint64_t{42}));
    c.architectures = j.value("architectures", c.architectures);
    c.k_profile = j.value("k_profile", c.k_profile);
    c.k_holdout = j.value("k_holdout", c.k_holdout);
    c.probes = j.value("probes", c.probes);
    if (j.contains("labels")) {
      c.label_space = LabelSpace(j.at("labels").get<std::vector<std::string>>());
    }
    c.inter_concentration = j.value("inter_concentration", c.inter_concentration);
    c.intra_noise = j.value("intra_noise", c.intra_noise);
    c.top_n = j.value("top_n", c.top_n);
    if (j.contains("timing")) {
      c.timing.clear();
      for (const auto& t : j.at("timing")) {
        c.timing.push_back({t.at("base_latency_ns").get<std::int64_t>(),
                            t.at("jitter_ns").get<std::int64_t>()});
      }
    } else if (c.architectures != 27) {
      c.timing = spread_timing_layout(c.architectures);
    }
    if (j.contains("architecture_names")) {
      c.architecture_names = j.at("architecture_names").get<std::vector<std::string>>();
    } else if (c.architectures != 27) {
      c.architecture_names.clear();
    }
    return c;
  });
}

Json zoo_to_json(const Zoo& zoo) {
  Json doc = header("archprint-zoo", kZooFormatVersion);
  doc["config"] = zoo_config_to_json(zoo.config);
  Json models = Json::array();
  auto add = [&](const OracleModel& m) {
    Json rows = Json::array();
    for (int i = 0; i < m.probes(); ++i) {
      const auto row = m.row(i);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    models.push_back({{"architecture", m.id().architecture},
                      {"variant", m.id().variant},
                      {"rows", std::move(rows)}});
  };
  for (const auto& m : zoo.profiling) add(m);
  for (const auto& m : zoo.holdout) add(m);
  doc["models"] = std::move(models);
  return doc;
}

Zoo zoo_from_json(const Json& j) {
  check_header(j, "archprint-zoo", kZooFormatVersion);
  return schema_guard("zoo", [&] {
    Zoo zoo;
    zoo.config = zoo_config_from_json(j.at("config"));
    zoo.config.validate();
    const auto& c = zoo.config;
    const int width = c.label_space.size();
    const auto& models = j.at("models");
    if (models.size() != static_cast<size_t>(c.architectures) * c.variants()) {
      throw Error(ErrorCode::kInconsistentDims, "model count does not match the config");
    }
    for (const auto& m : models) {
      const ModelId id{m.at("architecture").get<int>(), m.at("variant").get<int>()};
      if (id.architecture < 0 || id.architecture >= c.architectures || id.variant < 0 ||
          id.variant >= c.variants()) {
        throw Error(ErrorCode::kInconsistentDims, "model " + to_string(id) + " out of range");
      }
      const auto& rows = m.at("rows");
      if (rows.size() != static_cast<size_t>(c.probes)) {
        throw Error(ErrorCode::kInconsistentDims, "model " + to_string(id) + " row count");
      }
      std::vector<double> table;
      table.reserve(static_cast<size_t>(c.probes) * width);
      for (const auto& row : rows) {
        if (row.size() != static_cast<size_t>(width)) {
          throw Error(ErrorCode::kInconsistentDims, "model " + to_string(id) + " row width");
        }
        double sum = 0.0;
        for (const auto& v : row) {
          const double p = v.get<double>();
          if (!(p >= 0.0)) {
            throw Error(ErrorCode::kProbabilityOutOfRange,
                        "model " + to_string(id) + " has a negative probability");
          }
          sum += p;
          table.push_back(p);
        }
        if (std::fabs(sum - 1.0) > 1e-9) {
          throw Error(ErrorCode::kProbabilityOutOfRange,
                      "model " + to_string(id) + " has a row not summing to 1");
        }
      }
      OracleModel model(id, width, std::move(table), c.timing[id.architecture]);
      if (id.variant < c.k_profile) {
        zoo.profiling.push_back(std::move(model));
      } else {
        zoo.holdout.push_back(std::move(model));
      }
    }
    auto order = [](const OracleModel& a, const OracleModel& b) {
      if (a.id().architecture != b.id().architecture) {
        return a.id().architecture < b.id().architecture;
      }
      return a.id().variant < b.id().variant;
    };
    std::sort(zoo.profiling.begin(), zoo.profiling.end(), order);
    std::sort(zoo.holdout.begin(), zoo.holdout.end(), order);
    if (zoo.profiling.size() != static_cast<size_t>(c.architectures) * c.k_profile ||
        zoo.holdout.size() != static_cast<size_t>(c.architectures) * c.k_holdout) {
      throw Error(ErrorCode::kMissingCell, "profiling/holdout model counts do not match");
    }
    for (int jj = 0; jj < c.architectures; ++jj) {
      for (int p = 0; p < c.variants(); ++p) {
        if (!(zoo.model({jj, p}).id() == ModelId{jj, p})) {
          throw Error(ErrorCode::kMissingCell,
                      "model " + to_string({jj, p}) + " missing or duplicated");
        }
      }
    }
    return zoo;
  });
}

Json templates_to_json(const ArchitectureTemplate& t) {
  Json doc = header("archprint-templates", kTemplateFormatVersion);
  doc["label_space"] = t.label_space().labels();
  doc["dims"] = {{"probes", t.probes()},
                 {"architectures", t.architectures()},
                 {"variants", t.source_variants()}};
  doc["probe_ids"] = t.probe_ids();
  Json means = Json::array();
  for (int row = 0; row < t.probes(); ++row) {
    Json per_arch = Json::array();
    for (int j = 0; j < t.architectures(); ++j) {
      const auto m = t.mean(row, j);
      per_arch.push_back(std::vector<double>(m.begin(), m.end()));
    }
    means.push_back(std::move(per_arch));
  }
  doc["means"] = std::move(means);
  doc["source_hash"] = t.source_hash();
  doc["architecture_names"] = t.architecture_names;
  return doc;
}

ArchitectureTemplate templates_from_json(const Json& j) {
  check_header(j, "archprint-templates", kTemplateFormatVersion);
  return schema_guard("templates", [&] {
    LabelSpace labels(j.at("label_space").get<std::vector<std::string>>());
    const auto& dims = j.at("dims");
    const int n = dims.at("probes").get<int>();
    const int z = dims.at("architectures").get<int>();
    const int k = dims.at("variants").get<int>();
    auto ids = j.at("probe_ids").get<std::vector<ProbeId>>();
    if (static_cast<int>(ids.size()) != n) {
      throw Error(ErrorCode::kInconsistentDims, "probe_ids length differs from dims.probes");
    }
    const auto& means_json = j.at("means");
    if (means_json.size() != static_cast<size_t>(n)) {
      throw Error(ErrorCode::kInconsistentDims, "means has the wrong number of probes");
    }
    std::vector<double> means;
    means.reserve(static_cast<size_t>(n) * z * labels.size());
    for (const auto& per_arch : means_json) {
      if (per_arch.size() != static_cast<size_t>(z)) {
        throw Error(ErrorCode::kInconsistentDims, "means has the wrong number of architectures");
      }
      for (const auto& vec : per_arch) {
        if (vec.size() != static_cast<size_t>(labels.size())) {
          throw Error(ErrorCode::kInconsistentDims, "mean vector length differs from |L|");
        }
        for (const auto& v : vec) means.push_back(v.get<double>());
      }
    }
    ArchitectureTemplate t(std::move(ids), z, k, std::move(labels), std::move(means),
                           j.at("source_hash").get<std::string>());
    if (j.contains("architecture_names")) {
      t.architecture_names = j.at("architecture_names").get<std::vector<std::string>>();
    }
    return t;
  });
}

Json timing_profile_to_json(const TimingProfile& p) {
  Json doc = header("archprint-timing", kTimingFormatVersion);
  doc["repetitions"] = p.repetitions;
  doc["models_per_architecture"] = p.models_per_architecture;
  doc["timing_probe"] = p.timing_probe;
  Json archs = Json::array();
  for (size_t j = 0; j < p.windows.size(); ++j) {
    const auto& w = p.windows[j];
    archs.push_back(
        {{"id", j}, {"min_ns", w.min_ns}, {"max_ns", w.max_ns}, {"traces", w.traces}});
  }
  doc["architectures"] = std::move(archs);
  return doc;
}

TimingProfile timing_profile_from_json(const Json& j) {
  check_header(j, "archprint-timing", kTimingFormatVersion);
  return schema_guard("timing profile", [&] {
    TimingProfile p;
    p.repetitions = j.at("repetitions").get<int>();
    p.models_per_architecture = j.at("models_per_architecture").get<int>();
    p.timing_probe = j.value("timing_probe", 0);
    for (const auto& a : j.at("architectures")) {
      if (a.at("id").get<size_t>() != p.windows.size()) {
        throw Error(ErrorCode::kInconsistentDims, "architecture ids must be dense and ordered");
      }
      TimingWindow w{a.at("min_ns").get<std::int64_t>(), a.at("max_ns").get<std::int64_t>(),
                     a.value("traces", std::vector<std::int64_t>{})};
      if (w.min_ns <= 0 || w.min_ns > w.max_ns) {
        throw Error(ErrorCode::kInvalidConfig, "timing window must satisfy 0 < min <= max");
      }
      p.windows.push_back(std::move(w));
    }
    if (p.windows.empty()) throw Error(ErrorCode::kEmptyTraces, "timing profile is empty");
    return p;
  });
}

Json response_to_json(const TopNResponse& response, const LabelSpace* labels) {
  Json out = Json::array();
  for (const auto& e : response.entries) {
    Json item{{"class", e.class_index}, {"prob", e.probability}};
    if (labels != nullptr) item["label"] = labels->label(e.class_index);
    out.push_back(std::move(item));
  }
  return out;
}

TopNResponse response_from_json(const Json& j) {
  TopNResponse r;
  for (const auto& item : j) {
    r.entries.push_back({item.at("class").get<int>(), item.at("prob").get<double>()});
  }
  return r;
}

Json transcript_to_json(const AttackTranscript& t, bool include_wall_clock) {
  Json doc = header("archprint-transcript", kTranscriptFormatVersion);
  if (include_wall_clock) {
    doc["timing_traces"] = t.timing_traces;
    doc["target_ns"] = t.target_ns;
  }
  Json windows = Json::array();
  for (size_t c = 0; c < t.shortlist.candidates.size() && c < t.shortlist.windows.size(); ++c) {
    windows.push_back({{"architecture", t.shortlist.candidates[c]},
                       {"min_ns", t.shortlist.windows[c].min_ns},
                       {"max_ns", t.shortlist.windows[c].max_ns}});
  }
  doc["shortlist"] = {{"candidates", t.shortlist.candidates}, {"fallback", t.shortlist.fallback}};
  // Window bounds are measured latencies as well.
  if (include_wall_clock) doc["shortlist"]["windows"] = std::move(windows);
  doc["selected_probes"] = t.selected_probes;
  Json probes = Json::array();
  for (const auto& o : t.outcomes) {
    probes.push_back({{"probe", o.probe},
                      {"response", response_to_json(o.response)},
                      {"nearest", o.nearest},
                      {"distance", o.distance}});
  }
  doc["probes"] = std::move(probes);
  Json tally = Json::array();
  for (const auto& v : t.tally) {
    tally.push_back(
        {{"architecture", v.architecture}, {"votes", v.votes}, {"distance_sum", v.distance_sum}});
  }
  doc["tally"] = std::move(tally);
  doc["verdict"] = t.verdict;
  doc["queries_spent"] = t.queries_spent;
  doc["tie_broken"] = t.tie_broken;
  doc["aborted"] = t.aborted;
  doc["error"] = t.error;
  return doc;
}

AttackTranscript transcript_from_json(const Json& j) {
  check_header(j, "archprint-transcript", kTranscriptFormatVersion);
  return schema_guard("transcript", [&] {
    AttackTranscript t;
    t.timing_traces = j.value("timing_traces", std::vector<std::int64_t>{});
    t.target_ns = j.value("target_ns", std::int64_t{0});
    const auto& s = j.at("shortlist");
    t.shortlist.candidates = s.at("candidates").get<std::vector<ArchitectureId>>();
    t.shortlist.fallback = s.at("fallback").get<bool>();
    t.shortlist.target_ns = t.target_ns;
    for (const auto& w : s.value("windows", Json::array())) {
      t.shortlist.windows.push_back(
          {w.at("min_ns").get<std::int64_t>(), w.at("max_ns").get<std::int64_t>(), {}});
    }
    t.selected_probes = j.at("selected_probes").get<std::vector<ProbeId>>();
    for (const auto& o : j.at("probes")) {
      t.outcomes.push_back({o.at("probe").get<ProbeId>(), response_from_json(o.at("response")),
                            o.at("nearest").get<ArchitectureId>(),
                            o.at("distance").get<double>()});
    }
    for (const auto& v : j.at("tally")) {
      t.tally.push_back({v.at("architecture").get<ArchitectureId>(), v.at("votes").get<int>(),
                         v.at("distance_sum").get<double>()});
    }
    t.verdict = j.at("verdict").get<ArchitectureId>();
    t.queries_spent = j.at("queries_spent").get<int>();
    t.tie_broken = j.at("tie_broken").get<bool>();
    t.aborted = j.at("aborted").get<bool>();
    t.error = j.value("error", std::string{});
    return t;
  });
}

Json ranking_to_json(const ProbeRanking& r) {
  Json doc = header("archprint-ranking", kRankingFormatVersion);
  doc["restrict_to"] = r.restrict_to;
  doc["order"] = r.order;
  Json scores = Json::array();
  for (size_t row = 0; row < r.scores.size(); ++row) {
    scores.push_back({{"probe", r.probe_ids[row]}, {"score", r.scores[row]}});
  }
  doc["scores"] = std::move(scores);
  return doc;
}

Json dom_to_json(const DoMReport& r) {
  Json doc = header("archprint-dom", kDomFormatVersion);
  doc["probe"] = r.probe;
  doc["first"] = r.first;
  doc["second"] = r.second;
  doc["inter"] = r.inter;
  doc["intra_first"] = r.intra_first;
  doc["intra_second"] = r.intra_second;
  return doc;
}

Json campaign_config_to_json(const CampaignConfig& c) {
  Json doc{{"zoo", zoo_config_to_json(c.zoo)},
           {"repetitions", c.repetitions},
           {"d", c.d},
           {"runs", c.runs},
           {"timing_probe", c.timing_probe},
           {"seed", c.seed},
           {"mode", mode_name(c.mode)}};
  if (c.zoo_path) doc["zoo_path"] = *c.zoo_path;
  return doc;
}

CampaignConfig campaign_config_from_json(const Json& j) {
  return schema_guard("campaign config", [&] {
    if (!j.is_object()) throw Error(ErrorCode::kSchemaMismatch, "campaign config must be an object");
    static const char* kKeys[] = {"zoo", "zoo_path", "repetitions", "d",
                                  "runs", "timing_probe", "seed", "mode"};
    for (const auto& [key, value] : j.items()) {
      if (std::find(std::begin(kKeys), std::end(kKeys), key) == std::end(kKeys)) {
        throw Error(ErrorCode::kInvalidConfig, "unknown campaign config key '" + key + "'");
      }
    }
    CampaignConfig c;
    if (!j.contains("seed")) {
      throw Error(ErrorCode::kInvalidConfig, "campaign config needs an explicit seed");
    }
    c.seed = j.at("seed").get<std::uint64_t>();
    Json zoo = j.value("zoo", Json::object());
    if (!zoo.contains("seed")) zoo["seed"] = c.seed;
    c.zoo = zoo_config_from_json(zoo);
    if (j.contains("zoo_path")) c.zoo_path = j.at("zoo_path").get<std::string>();
    c.repetitions = j.value("repetitions", c.repetitions);
    c.d = j.value("d", c.d);
    c.runs = j.value("runs", c.runs);
    c.timing_probe = j.value("timing_probe", c.timing_probe);
    c.mode = mode_from_name(j.value("mode", std::string("in_process")));
    return c;
  });
}

Json report_to_json(const CampaignReport& r, bool include_wall_clock) {
  Json doc = header("archprint-report", kReportFormatVersion);
  doc["config"] = campaign_config_to_json(r.config);
  doc["template_hash"] = r.template_hash;
  doc["aggregates"] = {{"total_attacks", r.total_attacks},
                       {"aborted_attacks", r.aborted_attacks},
                       {"shortlist_hit_rate", r.shortlist_hit_rate},
                       {"accuracy", r.accuracy},
                       {"mean_queries", r.mean_queries},
                       {"max_queries", r.max_queries}};
  Json archs = Json::array();
  for (const auto& a : r.architectures) {
    archs.push_back({{"architecture", a.architecture},
                     {"name", a.name},
                     {"attacks", a.attacks},
                     {"aborted", a.aborted},
                     {"shortlist_hits", a.shortlist_hits},
                     {"fallbacks", a.fallbacks},
                     {"correct", a.correct},
                     {"vote_scores", a.vote_scores}});
  }
  doc["architectures"] = std::move(archs);
  Json attacks = Json::array();
  for (const auto& a : r.attacks) {
    attacks.push_back({{"architecture", a.target.architecture},
                       {"variant", a.target.variant},
                       {"run", a.run},
                       {"correct", a.correct},
                       {"shortlisted", a.shortlisted},
                       {"server_requests", a.server_requests},
                       {"transcript", transcript_to_json(a.transcript, include_wall_clock)}});
  }
  doc["attacks"] = std::move(attacks);
  return doc;
}

CampaignReport report_from_json(const Json& j) {
  check_header(j, "archprint-report", kReportFormatVersion);
  return schema_guard("report", [&] {
    CampaignReport r;
    r.config = campaign_config_from_json(j.at("config"));
    r.template_hash = j.at("template_hash").get<std::string>();
    const auto& agg = j.at("aggregates");
    r.total_attacks = agg.at("total_attacks").get<int>();
    r.aborted_attacks = agg.at("aborted_attacks").get<int>();
    r.shortlist_hit_rate = agg.at("shortlist_hit_rate").get<double>();
    r.accuracy = agg.at("accuracy").get<double>();
    r.mean_queries = agg.at("mean_queries").get<double>();
    r.max_queries = agg.at("max_queries").get<int>();
    for (const auto& a : j.at("architectures")) {
      ArchitectureSummary s;
      s.architecture = a.at("architecture").get<ArchitectureId>();
      s.name = a.at("name").get<std::string>();
      s.attacks = a.at("attacks").get<int>();
      s.aborted = a.at("aborted").get<int>();
      s.shortlist_hits = a.at("shortlist_hits").get<int>();
      s.fallbacks = a.at("fallbacks").get<int>();
      s.correct = a.at("correct").get<int>();
      s.vote_scores = a.at("vote_scores").get<std::vector<double>>();
      r.architectures.push_back(std::move(s));
    }
    for (const auto& a : j.at("attacks")) {
      AttackRecord rec;
      rec.target = {a.at("architecture").get<int>(), a.at("variant").get<int>()};
      rec.run = a.at("run").get<int>();
      rec.correct = a.at("correct").get<bool>();
      rec.shortlisted = a.at("shortlisted").get<bool>();
      rec.server_requests = a.at("server_requests").get<std::int64_t>();
      rec.transcript = transcript_from_json(a.at("transcript"));
      r.attacks.push_back(std::move(rec));
    }
    return r;
  });
}

}  // namespace archprint
