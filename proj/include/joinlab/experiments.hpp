// Copyright 2026 The joinlab Authors
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

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "joinlab/joinings.hpp"
#include "json.hpp"

namespace joinlab {

struct RowProvenance {
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  double tail_bound_x = 0.0;
  double tail_bound_y = 0.0;
  std::string laws;
};

// One checked quantity. The row passes when lower <= estimate <= upper;
// reference is the oracle or bound the band was built from (NaN if none).
struct ReportRow {
  std::string check;
  std::string parameter;
  double estimate = 0.0;
  double standard_error = 0.0;
  double reference = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool pass = false;
  std::string reference_source;
  RowProvenance provenance;
};

struct Report {
  std::string experiment;
  std::vector<ReportRow> rows;
  bool all_pass() const;
};

nlohmann::json to_json(const Report& report);
void write_csv(const Report& report, std::ostream& out);
// Human-readable table, one line per row.
void write_text(const Report& report, std::ostream& out);

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  std::optional<std::size_t> samples;
  double se_multiplier = 4.0;
  nlohmann::json params = nlohmann::json::object();
  // Raw document, for depbound's systems/family/grid sections.
  nlohmann::json document = nlohmann::json::object();
};

// Throws InvalidArgument on schema violations; "seed" is mandatory.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
// Built-in defaults for a reproduce id (fixed seed).
ExperimentConfig default_config(const std::string& prop_id);
const std::vector<std::string>& experiment_ids();

// Independent child seed for a labelled sub-run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

SystemHandle system_from_json(const nlohmann::json& desc);
JoiningHandle joining_from_json(const nlohmann::json& desc, const SystemHandle& x,
                                const SystemHandle& y);

Report run_reproduce(const std::string& prop_id, const ExperimentConfig& config);
Report run_depbound(const ExperimentConfig& config);
// Writes the quotient to out_path; rows summarize blocks and exact law checks.
Report run_twin_quotient(const std::string& in_path, const std::string& out_path,
                         std::optional<double> tol = std::nullopt);

}  // namespace joinlab
