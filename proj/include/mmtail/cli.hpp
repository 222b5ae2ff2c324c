#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmtail/config.hpp"
#include "mmtail/montecarlo.hpp"
#include "mmtail/tail_analysis.hpp"
#include "mmtail/tailstat.hpp"

namespace mmtail {

inline constexpr const char* kVersion = "1.0.0";

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitAnalysis = 3;
inline constexpr int kExitValidation = 4;

struct CommandOptions {
  std::string config_path;
  std::string out_path;  // empty: standard output
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> samples;
  std::optional<std::string> tolerance_json;
  // validate: use this report instead of computing one.
  std::string report_path;
  // analyze: (alpha, g) table; validate: (y, y^alpha S(y)) table.
  std::string csv_path;
  // mgf: evaluation points; `time` selects the fixed-time MGF.
  std::vector<double> s_values;
  std::optional<double> time;
  // density: grid size and range.
  int points = 200;
  double t_max = 0.0;  // 0: ten times the mean trade time
  unsigned threads = 0;
};

/// Shortest round-trip decimal form (std::to_chars).
std::string format_double(double v);

nlohmann::json to_json(const TailReport& report);
TailReport report_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const ValidationSummary& summary);

/// Config with --seed, --samples and --tolerance-json applied.
RunConfig load_with_overrides(const CommandOptions& options);

TailReport analyze(const RunConfig& config);

void write_samples_csv(std::ostream& out, const SampleBatch& batch,
                       const RunConfig& config);

// Each command returns an exit code; errors are mapped by run_command.
int cmd_analyze(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_simulate(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_validate(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_density(const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_mgf(const CommandOptions& options, std::ostream& out, std::ostream& err);

/// Dispatch by subcommand name and translate exceptions to exit codes:
/// 2 for config errors, 3 for analysis errors, 1 for I/O failures.
int run_command(const std::string& name, const CommandOptions& options,
                std::ostream& out, std::ostream& err);

}  // namespace mmtail
