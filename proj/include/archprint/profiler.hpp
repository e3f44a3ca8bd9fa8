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

// Offline knowledge base of the attacker: response cubes, per-architecture
// templates, timing windows and difference-of-means diagnostics.

#ifndef ARCHPRINT_PROFILER_HPP_
#define ARCHPRINT_PROFILER_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "archprint/client.hpp"
#include "archprint/core.hpp"
#include "archprint/zoo.hpp"

namespace archprint {

enum class Provenance { kSimulated, kIngested };

// Expanded classification vectors V[i][j][p] for probe row i, architecture j
// and variant p. Row i answers probe probe_ids()[i].
class ResponseCube {
 public:
  ResponseCube(std::vector<ProbeId> probe_ids, int architectures, int variants,
               LabelSpace label_space, Provenance provenance);

  int probes() const { return static_cast<int>(probe_ids_.size()); }
  int architectures() const { return architectures_; }
  int variants() const { return variants_; }
  const std::vector<ProbeId>& probe_ids() const { return probe_ids_; }
  const LabelSpace& label_space() const { return label_space_; }
  Provenance provenance() const { return provenance_; }

  std::span<const double> cell(int row, ArchitectureId j, int p) const;
  std::span<double> mutable_cell(int row, ArchitectureId j, int p);
  const std::vector<double>& data() const { return data_; }

  // Row holding `probe`; throws kUnknownProbe.
  int row_of(ProbeId probe) const;

  // SHA-256 over dims, probe ids, labels and the raw vector bytes.
  std::string content_hash() const;

  // Bitwise equality of every stored double plus equal dims and labels.
  // Provenance is metadata and not compared.
  bool bit_equal(const ResponseCube& other) const;

 private:
  size_t offset(int row, ArchitectureId j, int p) const;

  std::vector<ProbeId> probe_ids_;
  int architectures_;
  int variants_;
  LabelSpace label_space_;
  Provenance provenance_;
  std::vector<double> data_;
};

// Per-(probe, architecture) mean over the variants of a cube.
class ArchitectureTemplate {
 public:
  ArchitectureTemplate(std::vector<ProbeId> probe_ids, int architectures, int source_variants,
                       LabelSpace label_space, std::vector<double> means,
                       std::string source_hash);

  int probes() const { return static_cast<int>(probe_ids_.size()); }
  int architectures() const { return architectures_; }
  int source_variants() const { return source_variants_; }
  const std::vector<ProbeId>& probe_ids() const { return probe_ids_; }
  const LabelSpace& label_space() const { return label_space_; }
  const std::string& source_hash() const { return source_hash_; }
  const std::vector<double>& means() const { return means_; }

  std::span<const double> mean(int row, ArchitectureId j) const;
  // Row holding `probe`; throws kUnknownProbe.
  int row_of(ProbeId probe) const;

  // Optional display names, one per architecture.
  std::vector<std::string> architecture_names;

  friend bool operator==(const ArchitectureTemplate&, const ArchitectureTemplate&) = default;

 private:
  std::vector<ProbeId> probe_ids_;
  int architectures_;
  int source_variants_;
  LabelSpace label_space_;
  std::vector<double> means_;
  std::string source_hash_;
};

struct TimingWindow {
  std::int64_t min_ns = 0;
  std::int64_t max_ns = 0;
  // Pooled traces of every profiled model of the architecture.
  std::vector<std::int64_t> traces;

  bool contains(std::int64_t t) const { return min_ns <= t && t <= max_ns; }

  friend bool operator==(const TimingWindow&, const TimingWindow&) = default;
};

struct TimingProfile {
  std::vector<TimingWindow> windows;  // indexed by ArchitectureId
  int repetitions = 0;
  int models_per_architecture = 0;
  ProbeId timing_probe = 0;

  int architectures() const { return static_cast<int>(windows.size()); }

  friend bool operator==(const TimingProfile&, const TimingProfile&) = default;
};

struct DoMReport {
  ProbeId probe = 0;
  ArchitectureId first = 0;
  ArchitectureId second = 0;
  // |mean_first - mean_second| per class.
  std::vector<double> inter;
  // |mean(first half of variants) - mean(rest)| per class, per architecture.
  std::vector<double> intra_first;
  std::vector<double> intra_second;
};

// Queries every (probe, architecture, variant) cell. sessions[j][p] is the
// oracle for variant p of architecture j; every architecture needs the same
// number of variants. Oracle failures are rethrown with cell coordinates.
ResponseCube collect_cube(const std::vector<std::vector<OracleSession*>>& sessions,
                          std::span<const ProbeId> probes, const LabelSpace& label_space);

// Same, straight from the profiling models of a zoo without going through a
// session (no latency). Probes default to every probe of the zoo; a given
// subset is sorted.
ResponseCube collect_cube(const Zoo& zoo, std::span<const ProbeId> probes = {});

ArchitectureTemplate build_templates(const ResponseCube& cube);

// sessions[j] holds the profiling oracles of architecture j; each is asked
// `repetitions` times for `timing_probe`. Any failure aborts the profile.
TimingProfile profile_timing(const std::vector<std::vector<OracleSession*>>& sessions,
                             int repetitions, ProbeId timing_probe = 0);

// traces[j][p] are the latency traces of variant p of architecture j.
TimingProfile timing_profile_from_traces(
    const std::vector<std::vector<std::vector<std::int64_t>>>& traces, ProbeId timing_probe = 0);

DoMReport dom_report(const ResponseCube& cube, ProbeId probe, ArchitectureId first,
                     ArchitectureId second);

// Cube CSV, schema version 1. Header "probe,architecture,variant,class,probability";
// one row per stored probability. Classes absent from a cell are 0, but every
// (probe, architecture, variant) cell needs at least one row. Export writes
// the non-zero entries of each cell.
inline constexpr int kCubeCsvVersion = 1;
void export_cube_csv(const ResponseCube& cube, std::ostream& out);
void export_cube_csv(const ResponseCube& cube, const std::string& path);
ResponseCube ingest_cube_csv(std::istream& in, const LabelSpace& label_space,
                             int schema_version = kCubeCsvVersion);
ResponseCube ingest_log(const std::string& path, const LabelSpace& label_space,
                        int schema_version = kCubeCsvVersion);

// Timing CSV, header "architecture,variant,trace_ns".
void export_timing_csv(const std::vector<std::vector<std::vector<std::int64_t>>>& traces,
                       std::ostream& out);
TimingProfile ingest_timing_csv(std::istream& in, ProbeId timing_probe = 0);
TimingProfile ingest_timing_log(const std::string& path, ProbeId timing_probe = 0);

}  // namespace archprint

#endif  // ARCHPRINT_PROFILER_HPP_
