#pragma once

#include <string_view>
#include <variant>
#include <vector>

namespace mmtail {

/// Intertrade-incidence timing: trades on the grid Delta, 2 Delta, ...; type
/// j succeeds with probability p_j and the price is observed at the n-th
/// success (n = 1 is the geometric case).
struct IncidenceTiming {
  std::vector<double> probabilities;
  std::vector<double> weights;
  int successes = 1;
  double grid_spacing = 1.0;
};

/// Intertrade-time timing: type j waits Exp(lambda_j) plus independent
/// Exp(nu_h) completion stages shared by all types.
struct ArrivalTiming {
  std::vector<double> arrival_rates;
  std::vector<double> weights;
  std::vector<double> completion_rates;
};

using TimingModel = std::variant<IncidenceTiming, ArrivalTiming>;

// Throw Error(InvalidTiming) with a field path ("timing.probabilities[0]").
void validate(const IncidenceTiming& timing);
void validate(const ArrivalTiming& timing);
void validate(const TimingModel& timing);

std::string_view timing_tag(const TimingModel& timing);

}  // namespace mmtail
