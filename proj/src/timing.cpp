#include "mmtail/timing.hpp"

#include <cmath>
#include <string>

#include "mmtail/erlang.hpp"
#include "mmtail/error.hpp"

namespace mmtail {

namespace {

constexpr double kWeightTol = 1e-12;

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::InvalidTiming, path + ": " + what);
}

std::string indexed(const char* field, std::size_t i) {
  return std::string("timing.") + field + "[" + std::to_string(i) + "]";
}

void validate_weights(const std::vector<double>& weights, std::size_t types) {
  if (weights.size() != types) {
    invalid("timing.weights", "length must match the number of types");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i])) {
      invalid(indexed("weights", i), "must be > 0");
    }
    total += weights[i];
  }
  if (std::abs(total - 1.0) > kWeightTol) {
    invalid("timing.weights", "must sum to 1");
  }
}

}  // namespace

void validate(const IncidenceTiming& t) {
  if (t.probabilities.empty()) {
    invalid("timing.probabilities", "at least one type is required");
  }
  for (std::size_t i = 0; i < t.probabilities.size(); ++i) {
    const double p = t.probabilities[i];
    if (!(p > 0.0 && p < 1.0)) invalid(indexed("probabilities", i), "must lie in (0, 1)");
    if (i > 0 && !(p > t.probabilities[i - 1])) {
      invalid(indexed("probabilities", i), "must be strictly increasing");
    }
  }
  validate_weights(t.weights, t.probabilities.size());
  if (t.successes < 1) invalid("timing.successes", "must be >= 1");
  if (!(t.grid_spacing > 0.0) || !std::isfinite(t.grid_spacing)) {
    invalid("simulation.grid_spacing", "must be > 0");
  }
}

void validate(const ArrivalTiming& t) {
  if (t.arrival_rates.empty()) {
    invalid("timing.arrival_rates", "at least one type is required");
  }
  for (std::size_t i = 0; i < t.arrival_rates.size(); ++i) {
    const double l = t.arrival_rates[i];
    if (!(l > 0.0) || !std::isfinite(l)) invalid(indexed("arrival_rates", i), "must be > 0");
    if (i > 0 && !(l > t.arrival_rates[i - 1])) {
      invalid(indexed("arrival_rates", i), "must be strictly increasing");
    }
  }
  validate_weights(t.weights, t.arrival_rates.size());
  for (std::size_t i = 0; i < t.completion_rates.size(); ++i) {
    const double nu = t.completion_rates[i];
    if (!(nu > 0.0) || !std::isfinite(nu)) {
      invalid(indexed("completion_rates", i), "must be > 0");
    }
  }
  if (t.completion_rates.size() + 1 > static_cast<std::size_t>(kMaxTotalShape)) {
    invalid("timing.completion_rates",
            "total stage count exceeds " + std::to_string(kMaxTotalShape));
  }
}

void validate(const TimingModel& timing) {
  std::visit([](const auto& t) { validate(t); }, timing);
}

std::string_view timing_tag(const TimingModel& timing) {
  if (const auto* iim = std::get_if<IncidenceTiming>(&timing)) {
    return iim->successes == 1 ? "IIM-geometric" : "IIM-negbin";
  }
  return "ITM";
}

}  // namespace mmtail
