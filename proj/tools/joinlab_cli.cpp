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

// Command-line runner: reproduce, depbound, twin-quotient, constants.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "joinlab/analytics.hpp"
#include "joinlab/errors.hpp"
#include "joinlab/experiments.hpp"
#include "json.hpp"

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct OutputOptions {
  std::string format = "csv";
  std::string out_dir;
};

void add_output_flags(CLI::App* cmd, OutputOptions& out) {
  cmd->add_option("--format", out.format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--out", out.out_dir, "Directory for the report file");
}

void emit(const joinlab::Report& report, const OutputOptions& opts, const std::string& stem) {
  auto render = [&](std::ostream& os) {
    if (opts.format == "json") {
      os << joinlab::to_json(report).dump(2) << '\n';
    } else {
      joinlab::write_csv(report, os);
    }
  };
  if (opts.out_dir.empty()) {
    render(std::cout);
    return;
  }
  std::filesystem::create_directories(opts.out_dir);
  const auto path = std::filesystem::path(opts.out_dir) / (stem + "." + opts.format);
  std::ofstream file(path);
  joinlab::require(static_cast<bool>(file), "cannot write " + path.string());
  render(file);
  joinlab::write_text(report, std::cout);
  std::cout << "wrote " << path.string() << '\n';
}

int status(const joinlab::Report& report) {
  std::cerr << report.experiment << ": " << report.rows.size() << " rows, "
            << (report.all_pass() ? "all pass" : "FAILED") << '\n';
  return report.all_pass() ? kExitPass : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"joinlab: distance-array experiments for joinings of dynamical systems"};
  app.require_subcommand(1);

  std::string prop_id;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  OutputOptions out;

  auto* reproduce = app.add_subcommand("reproduce", "Run a named experiment");
  reproduce->add_option("prop-id", prop_id, "Experiment id")->required();
  reproduce->add_option("--config", config_path, "JSON config")->check(CLI::ExistingFile);
  reproduce->add_option("--seed", seed, "Master seed (overrides the config)");
  reproduce->add_option("--samples", samples, "Sample count N (overrides the config)");
  add_output_flags(reproduce, out);

  auto* depbound = app.add_subcommand("depbound", "Dep lower bounds over a joining family");
  depbound->add_option("--config", config_path, "JSON config")
      ->required()
      ->check(CLI::ExistingFile);
  depbound->add_option("--seed", seed, "Master seed (overrides the config)");
  depbound->add_option("--samples", samples, "Sample count N (overrides the config)");
  add_output_flags(depbound, out);

  std::string in_path, out_path;
  std::optional<double> tol;
  auto* twin = app.add_subcommand("twin-quotient", "Twin-free quotient of a kernel space");
  twin->add_option("IN", in_path, "Input kernel-space JSON")->required();
  twin->add_option("OUT", out_path, "Output kernel-space JSON")->required();
  twin->add_option("--tol", tol, "Twin tolerance (default 0 exact, 1e-9 real)");
  add_output_flags(twin, out);

  auto* constants = app.add_subcommand("constants", "Dump the oracle constant table");
  add_output_flags(constants, out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitPass : kExitUsage;
  }

  try {
    auto apply_overrides = [&](joinlab::ExperimentConfig& config) {
      if (seed) config.seed = *seed;
      if (samples) config.samples = *samples;
    };
    if (*reproduce) {
      auto config = config_path.empty() ? joinlab::default_config(prop_id)
                                        : joinlab::load_config(config_path);
      apply_overrides(config);
      const auto report = joinlab::run_reproduce(prop_id, config);
      emit(report, out, prop_id);
      return status(report);
    }
    if (*depbound) {
      auto config = joinlab::load_config(config_path);
      apply_overrides(config);
      const auto report = joinlab::run_depbound(config);
      emit(report, out, "depbound");
      return status(report);
    }
    if (*twin) {
      const auto report = joinlab::run_twin_quotient(in_path, out_path, tol);
      emit(report, out, "twin-quotient");
      return status(report);
    }
    if (*constants) {
      const auto table = joinlab::constants_table();
      std::ostream* os = &std::cout;
      std::ofstream file;
      if (!out.out_dir.empty()) {
        std::filesystem::create_directories(out.out_dir);
        file.open(std::filesystem::path(out.out_dir) / ("constants." + out.format));
        os = &file;
      }
      if (out.format == "json") {
        *os << table.dump(2) << '\n';
      } else {
        *os << "name,value,formula,route\n";
        for (const auto& row : table) {
          char value[40];
          std::snprintf(value, sizeof value, "%.17g", row.at("value").get<double>());
          *os << row.at("name").get<std::string>() << ',' << value << ",\""
              << row.at("formula").get<std::string>() << "\",\""
              << row.at("route").get<std::string>() << "\"\n";
        }
      }
      return kExitPass;
    }
  } catch (const joinlab::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const joinlab::CapExceeded& e) {
    std::cerr << "error: budget exceeded: " << e.what() << '\n';
    return kExitUsage;
  } catch (const joinlab::ToleranceInconsistency& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
