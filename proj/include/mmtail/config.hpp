#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmtail/process.hpp"
#include "mmtail/tail_analysis.hpp"
#include "mmtail/tailstat.hpp"
#include "mmtail/timing.hpp"

namespace mmtail {

struct AnalysisConfig {
  double alpha_max = kDefaultAlphaMax;
  TailSide side = TailSide::Upper;
  std::vector<double> beta_grid;  // empty: model-dependent default
  Tolerances tolerances;
  QuantileBand plateau_band;
  QuantileBand log_band = kDefaultLogBand;
};

struct SimulationConfig {
  std::uint64_t count = 1'000'000;
  std::uint64_t seed = 0;
  std::uint32_t streams = 8;
  double grid_spacing = 1.0;
};

/// Parsed run configuration. The IIM grid spacing lives in the simulation
/// block and is copied into the incidence timing so analysis and simulation
/// share it.
struct RunConfig {
  ModulatedModel model;
  TimingModel timing;
  AnalysisConfig analysis;
  SimulationConfig simulation;

  AnalysisOptions analysis_options() const;
};

/// Parse a configuration document. Unknown keys, missing fields, and
/// invariant violations throw Error(Config | InvalidModel | InvalidTiming)
/// whose message starts with the field path.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

/// Canonical form with every default filled in; parse(to_json(c)) == c.
nlohmann::json to_json(const RunConfig& config);
std::string canonical_text(const RunConfig& config);

/// FNV-1a 64-bit hash, formatted as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);
std::string config_hash(const RunConfig& config);
// Hash of the model and timing blocks only.
std::string model_hash(const RunConfig& config);

Tolerances parse_tolerances(const nlohmann::json& doc, const Tolerances& base,
                            const std::string& path);

nlohmann::json to_json(const JumpLaw& law);
nlohmann::json to_json(const ModulatedModel& model);
nlohmann::json to_json(const TimingModel& timing);

}  // namespace mmtail
