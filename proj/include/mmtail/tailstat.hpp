#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mmtail/montecarlo.hpp"
#include "mmtail/tail_analysis.hpp"

namespace mmtail {

// Estimators work on log-samples log(P_T) = X_T so that extreme draws never
// overflow; `hill` accepts raw positive samples for convenience.

struct HillEstimate {
  double alpha = 0.0;
  double standard_error = 0.0;
  std::size_t k = 0;
};

/// Threshold band as a range of exceedance probabilities: thresholds are
/// the empirical quantiles at survival levels log-spaced in [lower, upper].
struct QuantileBand {
  double lower = 1e-3;
  double upper = 1e-2;
  int thresholds = 20;
};

struct LogCorrectionFit {
  double beta = 0.0;
  double standard_error = 0.0;
  double loglog_spread = 0.0;
};

HillEstimate hill(std::span<const double> samples, std::size_t k);
HillEstimate hill_log(std::span<const double> log_samples, std::size_t k);

/// Default k = ceil(sqrt(n)).
std::size_t default_hill_k(std::size_t n);

/// Hill estimates at 10 values of k log-spaced in [10, n/10].
std::vector<HillEstimate> hill_sweep(std::span<const double> log_samples);

/// Survival curve: (log y, y^alpha S(y)) at each threshold of the band.
std::vector<std::pair<double, double>> scaled_survival(
    std::span<const double> log_samples, double alpha, const QuantileBand& band);

/// Average of y^alpha S(y) over the band thresholds.
double scale_plateau(std::span<const double> log_samples, double alpha,
                     const QuantileBand& band = {});

/// Least-squares slope of log(y^alpha S(y)) against log log y.
LogCorrectionFit log_correction_fit(std::span<const double> log_samples,
                                    double alpha, const QuantileBand& band);

inline constexpr QuantileBand kDefaultLogBand{1e-5, 1e-2, 16};

struct Tolerances {
  double hill_relative = 0.10;
  double scale_relative = 0.25;
  double log_correction_absolute = 0.4;
};

enum class Verdict { Pass, Fail, Unavailable };
std::string_view to_string(Verdict v) noexcept;

struct Check {
  std::string name;
  double target = 0.0;
  double estimate = 0.0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::Fail;
  std::string reason;
};

struct ValidationSummary {
  std::vector<Check> checks;
  HillEstimate hill;
  std::vector<HillEstimate> hill_sweep;

  bool passed() const noexcept;
};

/// Compare a report with the simulated batch: Hill vs alpha, the plateau vs
/// M/alpha when beta = 0, and the log-correction slope vs beta when beta >= 1.
/// Lower-tail reports are checked against -X_T.
ValidationSummary validate(const TailReport& report, const SampleBatch& batch,
                           const Tolerances& tolerances = {},
                           const QuantileBand& plateau_band = {},
                           const QuantileBand& log_band = kDefaultLogBand);

}  // namespace mmtail
