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

#include "archprint/profiler.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <tuple>

namespace archprint {
namespace {

std::string cell_name(ProbeId probe, ArchitectureId j, int p) {
  return "(probe " + std::to_string(probe) + ", architecture " + std::to_string(j) +
         ", variant " + std::to_string(p) + ")";
}

void check_architecture(ArchitectureId j, int architectures) {
  if (j < 0 || j >= architectures) {
    throw Error(ErrorCode::kUnknownArchitecture,
                "architecture " + std::to_string(j) + " not in [0, " +
                    std::to_string(architectures) + ")");
  }
}

int row_lookup(const std::vector<ProbeId>& ids, ProbeId probe) {
  // Ids are kept sorted ascending.
  const auto it = std::lower_bound(ids.begin(), ids.end(), probe);
  if (it == ids.end() || *it != probe) {
    throw Error(ErrorCode::kUnknownProbe, "probe " + std::to_string(probe) + " not profiled");
  }
  return static_cast<int>(it - ids.begin());
}

void check_probe_ids(const std::vector<ProbeId>& ids) {
  if (ids.empty()) throw Error(ErrorCode::kInconsistentDims, "no probes");
  for (size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || (i > 0 && ids[i] <= ids[i - 1])) {
      throw Error(ErrorCode::kInconsistentDims,
                  "probe ids must be non-negative, unique and ascending");
    }
  }
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) { EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr); }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const void* data, size_t size) { EVP_DigestUpdate(ctx_, data, size); }
  void update_i64(std::int64_t v) {
    unsigned char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>((v >> (8 * b)) & 0xff);
    update(bytes, 8);
  }

  std::string hex() {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int size = 0;
    EVP_DigestFinal_ex(ctx_, digest, &size);
    static const char* kHex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < size; ++i) {
      out.push_back(kHex[digest[i] >> 4]);
      out.push_back(kHex[digest[i] & 0xf]);
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

template <typename T>
bool parse_field(std::string_view text, T& out) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string_view strip_line(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::string_view view(line);
  // UTF-8 byte order mark.
  if (view.size() >= 3 && std::memcmp(view.data(), "\xEF\xBB\xBF", 3) == 0) {
    view.remove_prefix(3);
  }
  return view;
}

[[noreturn]] void schema_error(size_t line_no, const std::string& what) {
  throw Error(ErrorCode::kSchemaMismatch, "row " + std::to_string(line_no) + ": " + what);
}

}  // namespace

ResponseCube::ResponseCube(std::vector<ProbeId> probe_ids, int architectures, int variants,
                           LabelSpace label_space, Provenance provenance)
    : probe_ids_(std::move(probe_ids)),
      architectures_(architectures),
      variants_(variants),
      label_space_(std::move(label_space)),
      provenance_(provenance) {
  check_probe_ids(probe_ids_);
  if (architectures_ < 1 || variants_ < 1) {
    throw Error(ErrorCode::kInconsistentDims, "cube needs >= 1 architecture and variant");
  }
  data_.assign(probe_ids_.size() * architectures_ * variants_ * label_space_.size(), 0.0);
}

size_t ResponseCube::offset(int row, ArchitectureId j, int p) const {
  if (row < 0 || row >= probes() || j < 0 || j >= architectures_ || p < 0 || p >= variants_) {
    throw Error(ErrorCode::kIndexOutOfRange, "cube cell out of range");
  }
  return ((static_cast<size_t>(row) * architectures_ + j) * variants_ + p) * label_space_.size();
}

std::span<const double> ResponseCube::cell(int row, ArchitectureId j, int p) const {
  return std::span<const double>(data_).subspan(offset(row, j, p), label_space_.size());
}

std::span<double> ResponseCube::mutable_cell(int row, ArchitectureId j, int p) {
  return std::span<double>(data_).subspan(offset(row, j, p), label_space_.size());
}

int ResponseCube::row_of(ProbeId probe) const { return row_lookup(probe_ids_, probe); }

std::string ResponseCube::content_hash() const {
  Sha256 sha;
  sha.update_i64(probes());
  sha.update_i64(architectures_);
  sha.update_i64(variants_);
  sha.update_i64(label_space_.size());
  for (ProbeId id : probe_ids_) sha.update_i64(id);
  for (const auto& l : label_space_.labels()) {
    sha.update_i64(static_cast<std::int64_t>(l.size()));
    sha.update(l.data(), l.size());
  }
  for (double v : data_) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    sha.update_i64(static_cast<std::int64_t>(bits));
  }
  return "sha256:" + sha.hex();
}

bool ResponseCube::bit_equal(const ResponseCube& other) const {
  return probe_ids_ == other.probe_ids_ && architectures_ == other.architectures_ &&
         variants_ == other.variants_ && label_space_ == other.label_space_ &&
         data_.size() == other.data_.size() &&
         std::memcmp(data_.data(), other.data_.data(), data_.size() * sizeof(double)) == 0;
}

ArchitectureTemplate::ArchitectureTemplate(std::vector<ProbeId> probe_ids, int architectures,
                                           int source_variants, LabelSpace label_space,
                                           std::vector<double> means, std::string source_hash)
    : probe_ids_(std::move(probe_ids)),
      architectures_(architectures),
      source_variants_(source_variants),
      label_space_(std::move(label_space)),
      means_(std::move(means)),
      source_hash_(std::move(source_hash)) {
  check_probe_ids(probe_ids_);
  if (architectures_ < 1 || source_variants_ < 1) {
    throw Error(ErrorCode::kInconsistentDims, "template needs >= 1 architecture and variant");
  }
  if (means_.size() != probe_ids_.size() * architectures_ * label_space_.size()) {
    throw Error(ErrorCode::kInconsistentDims, "template means do not match N x Z x |L|");
  }
}

std::span<const double> ArchitectureTemplate::mean(int row, ArchitectureId j) const {
  if (row < 0 || row >= probes()) {
    throw Error(ErrorCode::kIndexOutOfRange, "template row out of range");
  }
  check_architecture(j, architectures_);
  const size_t width = label_space_.size();
  return std::span<const double>(means_).subspan(
      (static_cast<size_t>(row) * architectures_ + j) * width, width);
}

int ArchitectureTemplate::row_of(ProbeId probe) const { return row_lookup(probe_ids_, probe); }

ResponseCube collect_cube(const std::vector<std::vector<OracleSession*>>& sessions,
                          std::span<const ProbeId> probes, const LabelSpace& label_space) {
  if (sessions.empty()) throw Error(ErrorCode::kInconsistentDims, "no architectures");
  const size_t k = sessions.front().size();
  for (const auto& arch : sessions) {
    if (arch.size() != k || k == 0) {
      throw Error(ErrorCode::kInconsistentDims,
                  "every architecture needs the same, non-zero number of models");
    }
  }
  std::vector<ProbeId> ids(probes.begin(), probes.end());
  ResponseCube cube(ids, static_cast<int>(sessions.size()), static_cast<int>(k), label_space,
                    Provenance::kSimulated);
  for (int row = 0; row < cube.probes(); ++row) {
    for (int j = 0; j < cube.architectures(); ++j) {
      for (int p = 0; p < cube.variants(); ++p) {
        const ProbeId probe = ids[row];
        try {
          const auto answer = sessions[j][p]->query(probe);
          const auto v = expand_topn(answer.response, label_space);
          std::copy(v.values.begin(), v.values.end(), cube.mutable_cell(row, j, p).begin());
        } catch (const Error& e) {
          throw Error(e.code(), cell_name(probe, j, p) + ": " + e.what());
        }
      }
    }
  }
  return cube;
}

ResponseCube collect_cube(const Zoo& zoo, std::span<const ProbeId> probes) {
  const auto& config = zoo.config;
  std::vector<ProbeId> ids(probes.begin(), probes.end());
  if (ids.empty()) {
    ids.resize(config.probes);
    std::iota(ids.begin(), ids.end(), 0);
  }
  std::sort(ids.begin(), ids.end());
  ResponseCube cube(ids, config.architectures, config.k_profile, config.label_space,
                    Provenance::kSimulated);
  for (int row = 0; row < cube.probes(); ++row) {
    for (int j = 0; j < cube.architectures(); ++j) {
      for (int p = 0; p < cube.variants(); ++p) {
        try {
          const auto& model = zoo.model({j, p});
          const auto v =
              expand_topn(query_oracle(model, ids[row], config.top_n), config.label_space);
          std::copy(v.values.begin(), v.values.end(), cube.mutable_cell(row, j, p).begin());
        } catch (const Error& e) {
          throw Error(e.code(), cell_name(ids[row], j, p) + ": " + e.what());
        }
      }
    }
  }
  return cube;
}

ArchitectureTemplate build_templates(const ResponseCube& cube) {
  const size_t width = cube.label_space().size();
  std::vector<double> means;
  means.reserve(static_cast<size_t>(cube.probes()) * cube.architectures() * width);
  std::vector<std::span<const double>> slices(cube.variants());
  for (int row = 0; row < cube.probes(); ++row) {
    for (int j = 0; j < cube.architectures(); ++j) {
      for (int p = 0; p < cube.variants(); ++p) slices[p] = cube.cell(row, j, p);
      const auto mean = elementwise_mean(std::span<const std::span<const double>>(slices));
      means.insert(means.end(), mean.values.begin(), mean.values.end());
    }
  }
  return ArchitectureTemplate(cube.probe_ids(), cube.architectures(), cube.variants(),
                              cube.label_space(), std::move(means), cube.content_hash());
}

TimingProfile timing_profile_from_traces(
    const std::vector<std::vector<std::vector<std::int64_t>>>& traces, ProbeId timing_probe) {
  if (traces.empty()) throw Error(ErrorCode::kEmptyTraces, "no architectures profiled");
  TimingProfile profile;
  profile.timing_probe = timing_probe;
  profile.models_per_architecture = static_cast<int>(traces.front().size());
  profile.repetitions =
      traces.front().empty() ? 0 : static_cast<int>(traces.front().front().size());
  for (size_t j = 0; j < traces.size(); ++j) {
    TimingWindow window;
    for (const auto& model_traces : traces[j]) {
      window.traces.insert(window.traces.end(), model_traces.begin(), model_traces.end());
    }
    if (window.traces.empty()) {
      throw Error(ErrorCode::kEmptyTraces,
                  "architecture " + std::to_string(j) + " has no timing traces");
    }
    const auto [lo, hi] = std::minmax_element(window.traces.begin(), window.traces.end());
    if (*lo <= 0) {
      throw Error(ErrorCode::kInvalidConfig,
                  "architecture " + std::to_string(j) + " has a non-positive trace");
    }
    window.min_ns = *lo;
    window.max_ns = *hi;
    profile.windows.push_back(std::move(window));
  }
  return profile;
}

TimingProfile profile_timing(const std::vector<std::vector<OracleSession*>>& sessions,
                             int repetitions, ProbeId timing_probe) {
  if (repetitions < 1) throw Error(ErrorCode::kInvalidConfig, "repetitions must be >= 1");
  std::vector<std::vector<std::vector<std::int64_t>>> traces(sessions.size());
  for (size_t j = 0; j < sessions.size(); ++j) {
    if (sessions[j].empty()) {
      throw Error(ErrorCode::kEmptyTraces,
                  "architecture " + std::to_string(j) + " has no models to profile");
    }
    for (size_t p = 0; p < sessions[j].size(); ++p) {
      traces[j].push_back(sessions[j][p]->measure_latency(timing_probe, repetitions));
    }
    log_message(LogLevel::kDebug, "profiled timing of architecture " + std::to_string(j));
  }
  return timing_profile_from_traces(traces, timing_probe);
}

DoMReport dom_report(const ResponseCube& cube, ProbeId probe, ArchitectureId first,
                     ArchitectureId second) {
  check_architecture(first, cube.architectures());
  check_architecture(second, cube.architectures());
  if (cube.variants() < 2) {
    throw Error(ErrorCode::kKTooSmall, "intra-architecture baseline needs k >= 2");
  }
  const int row = cube.row_of(probe);
  const int k = cube.variants();
  const int half = (k + 1) / 2;

  auto mean_of = [&](ArchitectureId j, int from, int to) {
    std::vector<std::span<const double>> slices;
    for (int p = from; p < to; ++p) slices.push_back(cube.cell(row, j, p));
    return elementwise_mean(std::span<const std::span<const double>>(slices));
  };
  auto abs_diff = [](const ClassificationVector& a, const ClassificationVector& b) {
    std::vector<double> out(a.values.size());
    for (size_t c = 0; c < out.size(); ++c) out[c] = std::fabs(a.values[c] - b.values[c]);
    return out;
  };

  DoMReport report;
  report.probe = probe;
  report.first = first;
  report.second = second;
  report.inter = abs_diff(mean_of(first, 0, k), mean_of(second, 0, k));
  report.intra_first = abs_diff(mean_of(first, 0, half), mean_of(first, half, k));
  report.intra_second = abs_diff(mean_of(second, 0, half), mean_of(second, half, k));
  return report;
}

void export_cube_csv(const ResponseCube& cube, std::ostream& out) {
  out << "probe,architecture,variant,class,probability\n";
  for (int row = 0; row < cube.probes(); ++row) {
    for (int j = 0; j < cube.architectures(); ++j) {
      for (int p = 0; p < cube.variants(); ++p) {
        const auto cell = cube.cell(row, j, p);
        bool wrote = false;
        for (size_t c = 0; c < cell.size(); ++c) {
          // An all-zero cell still needs one row to be present.
          const bool last = c + 1 == cell.size();
          if (cell[c] != 0.0 || (last && !wrote)) {
            out << cube.probe_ids()[row] << ',' << j << ',' << p << ',' << c << ','
                << format_double(cell[c]) << '\n';
            wrote = true;
          }
        }
      }
    }
  }
}

void export_cube_csv(const ResponseCube& cube, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  export_cube_csv(cube, out);
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

ResponseCube ingest_cube_csv(std::istream& in, const LabelSpace& label_space,
                             int schema_version) {
  if (schema_version != kCubeCsvVersion) {
    throw Error(ErrorCode::kSchemaMismatch,
                "unsupported cube CSV schema version " + std::to_string(schema_version));
  }
  struct Row {
    ProbeId probe;
    int arch;
    int variant;
    int cls;
    double prob;
  };
  std::vector<Row> rows;
  std::string line;
  size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kSchemaMismatch, "row 1: empty file, expected a header");
  }
  ++line_no;
  if (strip_line(line) != "probe,architecture,variant,class,probability") {
    schema_error(line_no, "header must be 'probe,architecture,variant,class,probability'");
  }
  std::vector<size_t> row_lines;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = strip_line(line);
    if (view.empty()) continue;
    const auto fields = split_fields(view);
    if (fields.size() != 5) schema_error(line_no, "expected 5 fields");
    Row r{};
    if (!parse_field(fields[0], r.probe) || r.probe < 0) schema_error(line_no, "bad probe id");
    if (!parse_field(fields[1], r.arch) || r.arch < 0) schema_error(line_no, "bad architecture");
    if (!parse_field(fields[2], r.variant) || r.variant < 0) schema_error(line_no, "bad variant");
    if (!parse_field(fields[3], r.cls) || r.cls < 0 || r.cls >= label_space.size()) {
      schema_error(line_no, "class must be an index in [0, " +
                                std::to_string(label_space.size()) + ")");
    }
    if (!parse_field(fields[4], r.prob)) schema_error(line_no, "bad probability");
    if (!(r.prob >= 0.0 && r.prob <= 1.0)) {
      throw Error(ErrorCode::kProbabilityOutOfRange,
                  "row " + std::to_string(line_no) + ": probability " +
                      std::string(fields[4]) + " outside [0, 1]");
    }
    rows.push_back(r);
    row_lines.push_back(line_no);
  }
  if (rows.empty()) throw Error(ErrorCode::kSchemaMismatch, "no data rows");

  std::set<ProbeId> probe_set;
  int architectures = 0;
  int variants = 0;
  for (const auto& r : rows) {
    probe_set.insert(r.probe);
    architectures = std::max(architectures, r.arch + 1);
    variants = std::max(variants, r.variant + 1);
  }
  std::vector<ProbeId> ids(probe_set.begin(), probe_set.end());
  ResponseCube cube(ids, architectures, variants, label_space, Provenance::kIngested);
  const size_t width = label_space.size();
  std::vector<char> present(static_cast<size_t>(cube.probes()) * architectures * variants, 0);
  std::vector<char> filled(present.size() * width, 0);
  for (size_t n = 0; n < rows.size(); ++n) {
    const auto& r = rows[n];
    const int row = cube.row_of(r.probe);
    const size_t cell = (static_cast<size_t>(row) * architectures + r.arch) * variants + r.variant;
    if (filled[cell * width + r.cls]) {
      schema_error(row_lines[n], "duplicate entry for " + cell_name(r.probe, r.arch, r.variant) +
                                     " class " + std::to_string(r.cls));
    }
    filled[cell * width + r.cls] = 1;
    present[cell] = 1;
    cube.mutable_cell(row, r.arch, r.variant)[r.cls] = r.prob;
  }
  for (int row = 0; row < cube.probes(); ++row) {
    for (int j = 0; j < architectures; ++j) {
      for (int p = 0; p < variants; ++p) {
        if (!present[(static_cast<size_t>(row) * architectures + j) * variants + p]) {
          throw Error(ErrorCode::kMissingCell, "no rows for " + cell_name(ids[row], j, p));
        }
        const auto cell = cube.cell(row, j, p);
        if (std::accumulate(cell.begin(), cell.end(), 0.0) > 1.0 + 1e-9) {
          throw Error(ErrorCode::kProbabilityOutOfRange,
                      "probabilities of " + cell_name(ids[row], j, p) + " sum above 1");
        }
      }
    }
  }
  return cube;
}

ResponseCube ingest_log(const std::string& path, const LabelSpace& label_space,
                        int schema_version) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  return ingest_cube_csv(in, label_space, schema_version);
}

void export_timing_csv(const std::vector<std::vector<std::vector<std::int64_t>>>& traces,
                       std::ostream& out) {
  out << "architecture,variant,trace_ns\n";
  for (size_t j = 0; j < traces.size(); ++j) {
    for (size_t p = 0; p < traces[j].size(); ++p) {
      for (auto t : traces[j][p]) out << j << ',' << p << ',' << t << '\n';
    }
  }
}

TimingProfile ingest_timing_csv(std::istream& in, ProbeId timing_probe) {
  std::string line;
  size_t line_no = 0;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kSchemaMismatch, "row 1: empty file, expected a header");
  }
  ++line_no;
  if (strip_line(line) != "architecture,variant,trace_ns") {
    schema_error(line_no, "header must be 'architecture,variant,trace_ns'");
  }
  std::map<int, std::map<int, std::vector<std::int64_t>>> by_arch;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = strip_line(line);
    if (view.empty()) continue;
    const auto fields = split_fields(view);
    if (fields.size() != 3) schema_error(line_no, "expected 3 fields");
    int arch = 0;
    int variant = 0;
    std::int64_t trace = 0;
    if (!parse_field(fields[0], arch) || arch < 0) schema_error(line_no, "bad architecture");
    if (!parse_field(fields[1], variant) || variant < 0) schema_error(line_no, "bad variant");
    if (!parse_field(fields[2], trace) || trace <= 0) {
      schema_error(line_no, "trace_ns must be a positive integer");
    }
    by_arch[arch][variant].push_back(trace);
  }
  if (by_arch.empty()) throw Error(ErrorCode::kEmptyTraces, "no timing rows");
  const int architectures = by_arch.rbegin()->first + 1;
  std::vector<std::vector<std::vector<std::int64_t>>> traces(architectures);
  for (int j = 0; j < architectures; ++j) {
    const auto it = by_arch.find(j);
    if (it == by_arch.end()) {
      throw Error(ErrorCode::kMissingCell,
                  "no timing rows for architecture " + std::to_string(j));
    }
    for (auto& [variant, values] : it->second) traces[j].push_back(std::move(values));
  }
  return timing_profile_from_traces(traces, timing_probe);
}

TimingProfile ingest_timing_log(const std::string& path, ProbeId timing_probe) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  return ingest_timing_csv(in, timing_probe);
}

}  // namespace archprint
