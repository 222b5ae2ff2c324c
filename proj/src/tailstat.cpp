#include "mmtail/tailstat.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "mmtail/error.hpp"

namespace mmtail {

namespace {

std::vector<double> sorted_descending(std::span<const double> xs) {
  std::vector<double> out(xs.begin(), xs.end());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

HillEstimate hill_sorted(const std::vector<double>& desc, std::size_t k) {
  if (k < 1 || k >= desc.size()) {
    throw Error(ErrorCode::InsufficientData,
                "Hill estimator needs 1 <= k < n (k = " + std::to_string(k) +
                    ", n = " + std::to_string(desc.size()) + ")");
  }
  const double base = desc[k];
  double excess = 0.0;
  for (std::size_t i = 0; i < k; ++i) excess += desc[i] - base;
  if (!(excess > 0.0) || !std::isfinite(excess)) {
    throw Error(ErrorCode::InsufficientData,
                "Hill estimator: zero log-excess over the top order statistics");
  }
  HillEstimate out;
  out.k = k;
  out.alpha = static_cast<double>(k) / excess;
  out.standard_error = out.alpha / std::sqrt(static_cast<double>(k));
  return out;
}

// Exceedance counts at survival levels log-spaced over the band.
std::vector<std::size_t> band_counts(std::size_t n, const QuantileBand& band) {
  if (!(band.lower > 0.0 && band.lower < band.upper && band.upper <= 1.0) ||
      band.thresholds < 1) {
    throw Error(ErrorCode::InsufficientData, "empty quantile band");
  }
  std::vector<std::size_t> counts;
  for (int i = 0; i < band.thresholds; ++i) {
    const double frac = band.thresholds == 1
                            ? 0.0
                            : static_cast<double>(i) / (band.thresholds - 1);
    const double level =
        std::exp(std::log(band.lower) + frac * (std::log(band.upper) - std::log(band.lower)));
    const auto m = static_cast<std::size_t>(std::llround(level * static_cast<double>(n)));
    if (m < 1 || m >= n) {
      throw Error(ErrorCode::InsufficientData,
                  "quantile band has no exceedances at the sample size");
    }
    if (counts.empty() || m != counts.back()) counts.push_back(m);
  }
  return counts;
}

std::vector<std::pair<double, double>> scaled_survival_sorted(
    const std::vector<double>& desc, double alpha, const QuantileBand& band) {
  const std::size_t n = desc.size();
  std::vector<std::pair<double, double>> out;
  for (const std::size_t m : band_counts(n, band)) {
    const double log_y = desc[m];
    const double survival = static_cast<double>(m) / static_cast<double>(n);
    out.emplace_back(log_y, std::exp(alpha * log_y) * survival);
  }
  return out;
}

double plateau_sorted(const std::vector<double>& desc, double alpha,
                      const QuantileBand& band) {
  const auto curve = scaled_survival_sorted(desc, alpha, band);
  double total = 0.0;
  for (const auto& [_, v] : curve) total += v;
  return total / static_cast<double>(curve.size());
}

LogCorrectionFit log_fit_sorted(const std::vector<double>& desc, double alpha,
                                const QuantileBand& band) {
  const auto curve = scaled_survival_sorted(desc, alpha, band);
  if (curve.size() < 3) {
    throw Error(ErrorCode::InsufficientData,
                "log-correction fit needs at least 3 distinct thresholds");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& [log_y, v] : curve) {
    if (!(log_y > 0.0)) {
      throw Error(ErrorCode::InsufficientData,
                  "log-correction fit needs thresholds above 1");
    }
    xs.push_back(std::log(log_y));
    ys.push_back(std::log(v));
  }
  const auto [mn, mx] = std::minmax_element(xs.begin(), xs.end());
  LogCorrectionFit fit;
  fit.loglog_spread = *mx - *mn;
  if (fit.loglog_spread < 0.5) {
    throw Error(ErrorCode::DegenerateSpread,
                "log log y spread " + std::to_string(fit.loglog_spread) +
                    " is below 0.5");
  }
  const double n = static_cast<double>(xs.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= n;
  mean_y /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
    sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
  }
  fit.beta = sxy / sxx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - mean_y - fit.beta * (xs[i] - mean_x);
    rss += r * r;
  }
  fit.standard_error = std::sqrt(rss / (n - 2.0) / sxx);
  return fit;
}

std::vector<HillEstimate> sweep_sorted(const std::vector<double>& desc) {
  std::vector<HillEstimate> out;
  const double k_max = static_cast<double>(desc.size()) / 10.0;
  if (k_max < 10.0) return out;
  for (int i = 0; i < 10; ++i) {
    const double k = std::exp(std::log(10.0) + i / 9.0 * (std::log(k_max) - std::log(10.0)));
    try {
      out.push_back(hill_sorted(desc, static_cast<std::size_t>(std::llround(k))));
    } catch (const Error&) {
    }
  }
  return out;
}

}  // namespace

HillEstimate hill(std::span<const double> samples, std::size_t k) {
  std::vector<double> logs;
  logs.reserve(samples.size());
  for (const double x : samples) {
    logs.push_back(x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity());
  }
  auto desc = sorted_descending(logs);
  if (k < desc.size() && !std::isfinite(desc[k])) {
    throw Error(ErrorCode::InsufficientData,
                "Hill estimator needs positive top order statistics");
  }
  return hill_sorted(desc, k);
}

HillEstimate hill_log(std::span<const double> log_samples, std::size_t k) {
  return hill_sorted(sorted_descending(log_samples), k);
}

std::size_t default_hill_k(std::size_t n) {
  return static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(n))));
}

std::vector<HillEstimate> hill_sweep(std::span<const double> log_samples) {
  return sweep_sorted(sorted_descending(log_samples));
}

std::vector<std::pair<double, double>> scaled_survival(
    std::span<const double> log_samples, double alpha, const QuantileBand& band) {
  return scaled_survival_sorted(sorted_descending(log_samples), alpha, band);
}

double scale_plateau(std::span<const double> log_samples, double alpha,
                     const QuantileBand& band) {
  return plateau_sorted(sorted_descending(log_samples), alpha, band);
}

LogCorrectionFit log_correction_fit(std::span<const double> log_samples,
                                    double alpha, const QuantileBand& band) {
  return log_fit_sorted(sorted_descending(log_samples), alpha, band);
}

std::string_view to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Unavailable: return "unavailable";
  }
  return "unknown";
}

bool ValidationSummary::passed() const noexcept {
  return std::none_of(checks.begin(), checks.end(),
                      [](const Check& c) { return c.verdict == Verdict::Fail; });
}

ValidationSummary validate(const TailReport& report, const SampleBatch& batch,
                           const Tolerances& tolerances,
                           const QuantileBand& plateau_band,
                           const QuantileBand& log_band) {
  std::vector<double> logs = batch.log_prices;
  if (report.side == TailSide::Lower) {
    for (auto& x : logs) x = -x;
  }
  std::sort(logs.begin(), logs.end(), std::greater<>());

  ValidationSummary summary;
  summary.hill_sweep = sweep_sorted(logs);

  Check hill_check{"hill_exponent", report.alpha, 0.0, tolerances.hill_relative,
                   Verdict::Fail, ""};
  try {
    summary.hill = hill_sorted(logs, default_hill_k(logs.size()));
    hill_check.estimate = summary.hill.alpha;
    const double rel = std::abs(summary.hill.alpha - report.alpha) / report.alpha;
    hill_check.verdict = rel <= tolerances.hill_relative ? Verdict::Pass : Verdict::Fail;
    std::ostringstream os;
    os << "relative error " << rel << " at k = " << summary.hill.k;
    hill_check.reason = os.str();
  } catch (const Error& e) {
    hill_check.reason = e.what();
  }
  summary.checks.push_back(hill_check);

  if (report.beta == 0) {
    Check scale_check{"scale_plateau", report.scale / report.alpha, 0.0,
                      tolerances.scale_relative, Verdict::Fail, ""};
    if (!report.paretian_limit) {
      scale_check.verdict = Verdict::Unavailable;
      scale_check.reason =
          "Paretian limit unavailable: singularity not unique on its axis";
    } else {
      try {
        scale_check.estimate = plateau_sorted(logs, report.alpha, plateau_band);
        const double rel =
            std::abs(scale_check.estimate - scale_check.target) / scale_check.target;
        scale_check.verdict =
            rel <= tolerances.scale_relative ? Verdict::Pass : Verdict::Fail;
        std::ostringstream os;
        os << "relative error " << rel;
        scale_check.reason = os.str();
      } catch (const Error& e) {
        scale_check.reason = e.what();
      }
    }
    summary.checks.push_back(scale_check);
  } else {
    Check log_check{"log_correction", static_cast<double>(report.beta), 0.0,
                    tolerances.log_correction_absolute, Verdict::Fail, ""};
    try {
      const LogCorrectionFit fit = log_fit_sorted(logs, report.alpha, log_band);
      log_check.estimate = fit.beta;
      const double err = std::abs(fit.beta - report.beta);
      log_check.verdict =
          err <= tolerances.log_correction_absolute ? Verdict::Pass : Verdict::Fail;
      std::ostringstream os;
      os << "absolute error " << err << ", slope se " << fit.standard_error;
      log_check.reason = os.str();
    } catch (const Error& e) {
      log_check.reason = e.what();
    }
    summary.checks.push_back(log_check);
  }
  return summary;
}

}  // namespace mmtail
