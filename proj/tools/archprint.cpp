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

// archprint: zoo generation, prediction service, profiling, attack and
// evaluation behind one subcommand-style binary.
//
// Exit codes: 0 success, 1 validation error, 2 runtime failure.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "archprint/attack.hpp"
#include "archprint/client.hpp"
#include "archprint/evaluation.hpp"
#include "archprint/io.hpp"
#include "archprint/profiler.hpp"
#include "archprint/service.hpp"
#include "archprint/zoo.hpp"

namespace {

using namespace archprint;

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

void emit_json(const Json& doc, const std::string& out_path) {
  if (out_path.empty() || out_path == "-") {
    std::cout << doc.dump(2) << '\n';
  } else {
    write_json_file(out_path, doc, 2);
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) {
    try {
      size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::kInvalidConfig, "'" + item + "' is not an integer");
    }
  }
  return out;
}

LabelSpace resolve_labels(const std::string& labels, const std::string& templates_path) {
  if (!labels.empty()) return LabelSpace(split_list(labels));
  if (!templates_path.empty()) {
    return templates_from_json(read_json_file(templates_path)).label_space();
  }
  return LabelSpace::cifar10();
}

// --- zoo gen ----------------------------------------------------------------

struct ZooGenArgs {
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string zoo_config;
  std::optional<int> architectures, k_profile, k_holdout, probes, top_n;
  std::optional<double> alpha, sigma;
};

void run_zoo_gen(const ZooGenArgs& a) {
  if (!a.seed) throw Error(ErrorCode::kInvalidConfig, "zoo gen requires --seed");
  Json base = a.zoo_config.empty() ? Json::object() : read_json_file(a.zoo_config);
  base["seed"] = *a.seed;
  if (a.architectures) {
    base["architectures"] = *a.architectures;
    if (*a.architectures != 27) {
      base.erase("timing");
      base.erase("architecture_names");
    }
  }
  if (a.k_profile) base["k_profile"] = *a.k_profile;
  if (a.k_holdout) base["k_holdout"] = *a.k_holdout;
  if (a.probes) base["probes"] = *a.probes;
  if (a.top_n) base["top_n"] = *a.top_n;
  if (a.alpha) base["inter_concentration"] = *a.alpha;
  if (a.sigma) base["intra_noise"] = *a.sigma;
  const Zoo zoo = generate_zoo(zoo_config_from_json(base));
  save_zoo(zoo, a.out);
  log_message(LogLevel::kInfo, "wrote zoo to " + a.out);
}

// --- serve ------------------------------------------------------------------

struct ServeArgs {
  std::string bind = "127.0.0.1:8080";
  std::string zoo;
  std::string target;
  std::optional<int> top_n;
  std::int64_t net_delay_ns = 0;
  std::string log;
  std::optional<std::uint64_t> seed;
};

void run_serve(const ServeArgs& a) {
  if (!a.seed) throw Error(ErrorCode::kInvalidConfig, "serve requires --seed");
  const auto colon = a.bind.rfind(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::kInvalidConfig, "--bind must be host:port");
  }
  ServiceConfig sc;
  sc.host = a.bind.substr(0, colon);
  try {
    sc.port = std::stoi(a.bind.substr(colon + 1));
  } catch (const std::logic_error&) {
    throw Error(ErrorCode::kInvalidConfig, "--bind port is not a number");
  }
  const Zoo zoo = load_zoo(a.zoo);
  const ModelId target = parse_model_id(a.target);
  sc.top_n = a.top_n.value_or(zoo.config.top_n);
  sc.net_delay_ns = a.net_delay_ns;
  if (!a.log.empty()) sc.log_path = a.log;
  sc.seed = *a.seed;

  PredictionService service(zoo.model(target), zoo.config.label_space, sc);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  service.start();
  std::cout << service.endpoint() << std::endl;
  while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
  service.stop();
}

// --- profile ----------------------------------------------------------------

struct ClassifyArgs {
  std::string zoo;
  std::string out;
  std::string cube_csv;
};

void run_profile_classify(const ClassifyArgs& a) {
  const Zoo zoo = load_zoo(a.zoo);
  const ResponseCube cube = collect_cube(zoo);
  if (!a.cube_csv.empty()) export_cube_csv(cube, a.cube_csv);
  auto templates = build_templates(cube);
  templates.architecture_names = zoo.config.architecture_names;
  write_json_file(a.out, templates_to_json(templates));
}

struct TimingArgs {
  std::string zoo;
  std::string endpoints;
  std::string templates;
  std::string labels;
  std::string out;
  std::string traces_csv;
  int reps = 10;
  int timing_probe = 0;
  bool live = false;
  std::optional<std::uint64_t> seed;
};

void run_profile_timing(const TimingArgs& a) {
  std::optional<Zoo> zoo;
  std::vector<std::vector<std::unique_ptr<OracleSession>>> owned;
  std::vector<std::unique_ptr<PredictionService>> services;

  if (!a.endpoints.empty()) {
    // {"architectures": [["http://host:port", ...], ...]}
    const auto doc = read_json_file(a.endpoints);
    const LabelSpace labels = resolve_labels(a.labels, a.templates);
    for (const auto& arch : doc.at("architectures")) {
      owned.emplace_back();
      for (const auto& url : arch) {
        owned.back().push_back(std::make_unique<HttpSession>(url.get<std::string>(), labels));
      }
    }
  } else {
    if (a.zoo.empty()) throw Error(ErrorCode::kInvalidConfig, "need --zoo or --endpoints");
    if (!a.seed) throw Error(ErrorCode::kInvalidConfig, "profile timing requires --seed");
    zoo.emplace(load_zoo(a.zoo));
    for (int j = 0; j < zoo->config.architectures; ++j) {
      owned.emplace_back();
      for (const OracleModel* model : zoo->profiling_models(j)) {
        const auto stream = derive_seed({*a.seed, static_cast<std::uint64_t>(j),
                                         static_cast<std::uint64_t>(model->id().variant)});
        if (a.live) {
          ServiceConfig sc;
          sc.top_n = zoo->config.top_n;
          sc.seed = stream;
          services.push_back(
              std::make_unique<PredictionService>(*model, zoo->config.label_space, sc));
          services.back()->start();
          owned.back().push_back(
              std::make_unique<HttpSession>(services.back()->endpoint(), zoo->config.label_space));
        } else {
          owned.back().push_back(
              std::make_unique<SimulatedSession>(*model, zoo->config.top_n, stream));
        }
      }
    }
  }

  std::vector<std::vector<std::vector<std::int64_t>>> traces(owned.size());
  for (size_t j = 0; j < owned.size(); ++j) {
    for (auto& session : owned[j]) {
      traces[j].push_back(session->measure_latency(a.timing_probe, a.reps));
    }
  }
  owned.clear();  // close client connections before the servers stop
  for (auto& s : services) s->stop();
  const TimingProfile profile = timing_profile_from_traces(traces, a.timing_probe);
  if (!a.traces_csv.empty()) {
    std::ofstream out(a.traces_csv, std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write " + a.traces_csv);
    export_timing_csv(traces, out);
  }
  write_json_file(a.out, timing_profile_to_json(profile));
}

// --- probe rank -------------------------------------------------------------

struct RankArgs {
  std::string templates;
  std::string archs;
  std::optional<int> d;
  std::string out;
};

void run_probe_rank(const RankArgs& a) {
  const auto templates = templates_from_json(read_json_file(a.templates));
  std::vector<ArchitectureId> restrict_to;
  if (a.archs.empty()) {
    for (int j = 0; j < templates.architectures(); ++j) restrict_to.push_back(j);
  } else {
    restrict_to = parse_int_list(a.archs);
  }
  auto ranking = rank_probes(templates, restrict_to);
  Json doc = ranking_to_json(ranking);
  if (a.d) doc["selected"] = select_probes(ranking, *a.d);
  emit_json(doc, a.out);
}

// --- attack -----------------------------------------------------------------

struct AttackArgs {
  std::string templates;
  std::string timing;
  std::string url;
  int d = 5;
  int reps = 10;
  int timing_probe = 0;
  std::string out;
};

int run_attack_cmd(const AttackArgs& a) {
  const auto templates = templates_from_json(read_json_file(a.templates));
  const auto profile = timing_profile_from_json(read_json_file(a.timing));
  HttpSession session(a.url, templates.label_space());
  const auto transcript =
      run_attack(session, templates, profile, AttackParams{a.d, a.reps, a.timing_probe});
  emit_json(transcript_to_json(transcript), a.out);
  if (transcript.aborted) {
    std::cerr << "attack aborted after " << transcript.queries_spent
              << " queries: " << transcript.error << '\n';
    return 2;
  }
  std::cerr << "verdict " << transcript.verdict;
  if (transcript.verdict < static_cast<int>(templates.architecture_names.size())) {
    std::cerr << " (" << templates.architecture_names[transcript.verdict] << ")";
  }
  std::cerr << ", " << transcript.queries_spent << " queries\n";
  return 0;
}

// --- evaluate ---------------------------------------------------------------

struct EvaluateArgs {
  std::string config;
  std::string out = "report";
  std::optional<std::uint64_t> seed;
  std::string mode;
};

void run_evaluate(const EvaluateArgs& a) {
  Json doc = read_json_file(a.config);
  if (a.seed) {
    doc["seed"] = *a.seed;
    if (doc.contains("zoo")) doc["zoo"]["seed"] = *a.seed;
  }
  if (!a.mode.empty()) doc["mode"] = a.mode;
  const auto config = campaign_config_from_json(doc);
  const auto report = run_campaign(config);
  emit_report_files(report, a.out);
  std::cout << "accuracy " << report.accuracy << " over " << report.total_attacks
            << " attacks; shortlist hit rate " << report.shortlist_hit_rate
            << "; max queries " << report.max_queries << '\n';
}

// --- ingest -----------------------------------------------------------------

struct IngestArgs {
  std::string cube_csv;
  std::string timing_csv;
  std::string labels;
  std::string out;
  std::string timing_out;
  int schema_version = kCubeCsvVersion;
  int timing_probe = 0;
};

void run_ingest(const IngestArgs& a) {
  const LabelSpace labels = resolve_labels(a.labels, "");
  const auto cube = ingest_log(a.cube_csv, labels, a.schema_version);
  write_json_file(a.out, templates_to_json(build_templates(cube)));
  if (!a.timing_csv.empty()) {
    if (a.timing_out.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "--timing-csv needs --timing-out");
    }
    write_json_file(a.timing_out,
                    timing_profile_to_json(ingest_timing_log(a.timing_csv, a.timing_probe)));
  }
}

// --- dom --------------------------------------------------------------------

struct DomArgs {
  std::string zoo;
  std::string cube_csv;
  std::string labels;
  int probe = 0;
  std::string pair;
  std::string out;
};

void run_dom(const DomArgs& a) {
  const auto pair = parse_int_list(a.pair);
  if (pair.size() != 2) throw Error(ErrorCode::kInvalidConfig, "--pair must be <j>,<m>");
  std::optional<ResponseCube> cube;
  if (!a.cube_csv.empty()) {
    cube.emplace(ingest_log(a.cube_csv, resolve_labels(a.labels, "")));
  } else if (!a.zoo.empty()) {
    const Zoo zoo = load_zoo(a.zoo);
    const ProbeId probe[] = {a.probe};
    cube.emplace(collect_cube(zoo, probe));
  } else {
    throw Error(ErrorCode::kInvalidConfig, "need --zoo or --cube-csv");
  }
  emit_json(dom_to_json(dom_report(*cube, a.probe, pair[0], pair[1])), a.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"archprint: black-box architecture fingerprinting toolkit"};
  app.require_subcommand(1);
  app.set_config("--config-file", "", "TOML/INI file with flag values; flags win")
      ->check(CLI::ExistingFile);
  app.allow_config_extras(CLI::config_extras_mode::error);

  // zoo gen
  ZooGenArgs zoo_args;
  auto* zoo_cmd = app.add_subcommand("zoo", "synthetic model zoo");
  zoo_cmd->require_subcommand(1);
  auto* zoo_gen = zoo_cmd->add_subcommand("gen", "generate a zoo file");
  zoo_gen->add_option("--seed", zoo_args.seed, "RNG seed (required)");
  zoo_gen->add_option("--out", zoo_args.out, "output zoo JSON")->required();
  zoo_gen->add_option("--zoo-config", zoo_args.zoo_config, "zoo config JSON")
      ->check(CLI::ExistingFile);
  zoo_gen->add_option("--architectures", zoo_args.architectures);
  zoo_gen->add_option("--k-profile", zoo_args.k_profile);
  zoo_gen->add_option("--k-holdout", zoo_args.k_holdout);
  zoo_gen->add_option("--probes", zoo_args.probes);
  zoo_gen->add_option("--top-n", zoo_args.top_n);
  zoo_gen->add_option("--alpha", zoo_args.alpha, "Dirichlet concentration per class");
  zoo_gen->add_option("--sigma", zoo_args.sigma, "log-space variant noise");

  // serve
  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "serve one zoo model over HTTP");
  serve->add_option("--bind", serve_args.bind, "host:port (port 0 = ephemeral)");
  serve->add_option("--zoo", serve_args.zoo)->required()->check(CLI::ExistingFile);
  serve->add_option("--target", serve_args.target, "<arch>:<variant>")->required();
  serve->add_option("--top-n", serve_args.top_n);
  serve->add_option("--net-delay-ns", serve_args.net_delay_ns);
  serve->add_option("--log", serve_args.log, "append request log (JSON lines)");
  serve->add_option("--seed", serve_args.seed, "latency RNG seed (required)");

  // profile classify / timing
  auto* profile = app.add_subcommand("profile", "build attacker profiles");
  profile->require_subcommand(1);
  ClassifyArgs classify_args;
  auto* classify = profile->add_subcommand("classify", "classification templates");
  classify->add_option("--zoo", classify_args.zoo)->required()->check(CLI::ExistingFile);
  classify->add_option("--out", classify_args.out, "templates JSON")->required();
  classify->add_option("--cube-csv", classify_args.cube_csv, "also export the response cube");
  TimingArgs timing_args;
  auto* timing = profile->add_subcommand("timing", "per-architecture latency windows");
  timing->add_option("--zoo", timing_args.zoo)->check(CLI::ExistingFile);
  timing->add_option("--endpoints", timing_args.endpoints, "JSON list of URLs per architecture")
      ->check(CLI::ExistingFile);
  timing->add_option("--templates", timing_args.templates, "label space source")
      ->check(CLI::ExistingFile);
  timing->add_option("--labels", timing_args.labels, "comma-separated label space");
  timing->add_option("--out", timing_args.out, "timing profile JSON")->required();
  timing->add_option("--traces-csv", timing_args.traces_csv, "also export raw traces");
  timing->add_option("--reps", timing_args.reps, "traces per model");
  timing->add_option("--timing-probe", timing_args.timing_probe);
  timing->add_flag("--live", timing_args.live, "serve each zoo model over loopback HTTP");
  timing->add_option("--seed", timing_args.seed, "latency RNG seed (required with --zoo)");

  // probe rank
  auto* probe = app.add_subcommand("probe", "probe selection");
  probe->require_subcommand(1);
  RankArgs rank_args;
  auto* rank = probe->add_subcommand("rank", "rank probes by template separation");
  rank->add_option("--templates", rank_args.templates)->required()->check(CLI::ExistingFile);
  rank->add_option("--archs", rank_args.archs, "comma-separated architecture ids");
  rank->add_option("--d", rank_args.d, "also report the top d probes");
  rank->add_option("--out", rank_args.out, "ranking JSON (default stdout)");

  // attack
  AttackArgs attack_args;
  auto* attack = app.add_subcommand("attack", "fingerprint a remote prediction API");
  attack->add_option("--templates", attack_args.templates)->required()->check(CLI::ExistingFile);
  attack->add_option("--timing", attack_args.timing)->required()->check(CLI::ExistingFile);
  attack->add_option("--url", attack_args.url, "service address")->required();
  attack->add_option("--d", attack_args.d, "probes to query");
  attack->add_option("--reps", attack_args.reps, "timing traces");
  attack->add_option("--timing-probe", attack_args.timing_probe);
  attack->add_option("--out", attack_args.out, "transcript JSON (default stdout)");

  // evaluate
  EvaluateArgs eval_args;
  auto* evaluate = app.add_subcommand("evaluate", "run a seeded campaign");
  evaluate->add_option("--config", eval_args.config, "campaign JSON")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--out", eval_args.out, "report path prefix");
  evaluate->add_option("--seed", eval_args.seed, "override the campaign seed");
  evaluate->add_option("--mode", eval_args.mode, "in_process | loopback");

  // ingest
  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "templates and timing from external logs");
  ingest->add_option("--cube-csv", ingest_args.cube_csv)->required()->check(CLI::ExistingFile);
  ingest->add_option("--timing-csv", ingest_args.timing_csv)->check(CLI::ExistingFile);
  ingest->add_option("--labels", ingest_args.labels, "comma-separated labels (default CIFAR-10)");
  ingest->add_option("--out", ingest_args.out, "templates JSON")->required();
  ingest->add_option("--timing-out", ingest_args.timing_out, "timing profile JSON");
  ingest->add_option("--schema-version", ingest_args.schema_version);
  ingest->add_option("--timing-probe", ingest_args.timing_probe);

  // dom
  DomArgs dom_args;
  auto* dom = app.add_subcommand("dom", "class-wise difference of means for one probe");
  dom->add_option("--zoo", dom_args.zoo)->check(CLI::ExistingFile);
  dom->add_option("--cube-csv", dom_args.cube_csv)->check(CLI::ExistingFile);
  dom->add_option("--labels", dom_args.labels);
  dom->add_option("--probe", dom_args.probe)->required();
  dom->add_option("--pair", dom_args.pair, "<j>,<m>")->required();
  dom->add_option("--out", dom_args.out, "DoM JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (zoo_gen->parsed()) run_zoo_gen(zoo_args);
    else if (serve->parsed()) run_serve(serve_args);
    else if (classify->parsed()) run_profile_classify(classify_args);
    else if (timing->parsed()) run_profile_timing(timing_args);
    else if (rank->parsed()) run_probe_rank(rank_args);
    else if (attack->parsed()) return run_attack_cmd(attack_args);
    else if (evaluate->parsed()) run_evaluate(eval_args);
    else if (ingest->parsed()) run_ingest(ingest_args);
    else if (dom->parsed()) run_dom(dom_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_validation_error(e.code()) ? 1 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
