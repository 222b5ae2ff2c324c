#include "mmtail/tail_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "mmtail/error.hpp"
#include "mmtail/matrix_functions.hpp"

namespace mmtail {

std::string_view to_string(TailCase c) noexcept {
  switch (c) {
    case TailCase::IimGeometric: return "IIM-geometric";
    case TailCase::IimNegbin: return "IIM-negbin";
    case TailCase::ItmA: return "ITM-a";
    case TailCase::ItmB: return "ITM-b";
    case TailCase::ItmC: return "ITM-c";
  }
  return "unknown";
}

std::string_view to_string(TailSide s) noexcept {
  return s == TailSide::Upper ? "upper" : "lower";
}

namespace {

// w0' M 1
double sandwich(const ModulatedModel& model, const Eigen::MatrixXd& m) {
  return model.initial().dot(m.rowwise().sum());
}

// (w0'x)(y'x)^{order-1}(y'1) for the Perron pair.
double perron_weight(const ModulatedModel& model, const PerronData& p,
                     int order) {
  return model.initial().dot(p.right) *
         std::pow(p.left.dot(p.right), order - 1) * p.left.sum();
}

void fill_common_diagnostics(const LaplaceExponent& a, double alpha,
                             TailReport& report, const AnalysisOptions& options,
                             const std::function<double(double)>& mgf) {
  auto& diag = report.diagnostics;

  const int order = report.beta + 1;
  for (int k = 3; k <= 6; ++k) {
    const double h = std::pow(10.0, -k);
    const double value = std::pow(h, order) * mgf(-alpha + h);
    diag.residue_limit.push_back({h, value});
  }
  const double f5 = diag.residue_limit[2].value;
  const double f6 = diag.residue_limit[3].value;
  diag.residue_limit_extrapolated = (10.0 * f6 - f5) / 9.0;
  diag.residue_limit_relative_error =
      std::abs(diag.residue_limit_extrapolated - report.scale) /
      std::abs(report.scale);

  constexpr int kGrid = 61;
  std::vector<double> gs;
  for (int i = 0; i < kGrid; ++i) {
    const double x = 1.5 * alpha * i / (kGrid - 1);
    const double g = dominant_eigenvalue_at(a, -x);
    diag.exponent_grid.emplace_back(x, g);
    gs.push_back(g);
  }
  for (int i = 1; i + 1 < kGrid; ++i) {
    if (std::isfinite(gs[i + 1]) && gs[i - 1] - 2.0 * gs[i] + gs[i + 1] < -1e-8) {
      diag.convex_on_grid = false;
    }
  }

  for (int i = 0; i <= 24; ++i) {
    const double s = -alpha - 0.1 + (alpha + 0.2) * i / 24.0;
    if (!std::isfinite(dominant_eigenvalue_at(a, s))) diag.domain_finite = false;
  }

  const std::vector<double> grid = options.beta_grid.empty()
                                       ? default_beta_grid(a.model())
                                       : options.beta_grid;
  diag.beta_grid_size = grid.size();
  report.unique_singularity = uniqueness_scan(a, alpha, grid);
  if (report.beta == 0 && report.unique_singularity) {
    report.paretian_limit = report.scale / report.alpha;
  }
}

void require_positive_scale(double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw Error(ErrorCode::NonPositiveScale,
                "scale constant " + std::to_string(scale) + " is not positive");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Incidence model

double iim_mgf(const ModulatedModel& model, const IncidenceTiming& timing,
               double s) {
  validate(timing);
  const double delta = timing.grid_spacing;
  const Eigen::MatrixXd a = delta * matrix_laplace_exponent(model, s);
  const double bound = -std::log1p(-timing.probabilities.front());
  const double r = dominant_eigen(a).eigenvalue;
  if (!(r < bound)) {
    throw Error(ErrorCode::DomainViolation,
                "s = " + std::to_string(s) +
                    " lies outside the convergence region of M_T");
  }
  const Eigen::Index n = model.size();
  const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd ea = expm(a);
  double total = 0.0;
  for (std::size_t j = 0; j < timing.probabilities.size(); ++j) {
    const double p = timing.probabilities[j];
    // p e^{A} (I - (1-p) e^{A})^{-1} = (p/(1-p)) ((I - B_j)^{-1} - I)
    const Eigen::MatrixXd step =
        (ident - (1.0 - p) * ea).partialPivLu().solve(p * ea);
    Eigen::MatrixXd power = step;
    for (int i = 1; i < timing.successes; ++i) power = power * step;
    total += timing.weights[j] * sandwich(model, power);
  }
  return total;
}

namespace {

// Pole analysis of E[e^{s Y_T}] at s = -alpha for the process Y whose model is
// `model`; this is the upper tail of e^{-Y_T}.
TailReport iim_pole(const ModulatedModel& model, const IncidenceTiming& timing,
                    const AnalysisOptions& options) {
  validate(timing);
  const LaplaceExponent a(model);
  const double delta = timing.grid_spacing;
  const double p1 = timing.probabilities.front();
  const double q1 = timing.weights.front();
  const int n = timing.successes;
  const double log_fail = std::log1p(-p1);

  TailReport report;
  report.label = n == 1 ? TailCase::IimGeometric : TailCase::IimNegbin;
  report.beta = n - 1;
  report.target = -log_fail / delta;
  report.alpha = solve_alpha(a, report.target, options.alpha_max);

  // x_p, y_p: Perron pair of A(-alpha); they are the unit-eigenvalue vectors
  // of B(-alpha) = exp(log(1-p1) I + Delta A(-alpha)).
  const Eigen::MatrixXd a_at = a(-report.alpha);
  report.perron = dominant_eigen(a_at);
  const Eigen::Index dim = model.size();
  const Eigen::MatrixXd m =
      log_fail * Eigen::MatrixXd::Identity(dim, dim) + delta * a_at;
  const Eigen::MatrixXd d = delta * a.derivative(-report.alpha);
  const auto [b, b_prime] = expm_with_derivative(m, d);
  const double denom =
      -report.perron.left.dot(b_prime * report.perron.right);
  if (!(denom > 0.0)) {
    throw Error(ErrorCode::NonPositiveXi,
                "-y' B'(-alpha) x = " + std::to_string(denom));
  }
  const double cp = 1.0 / denom;
  report.diagnostics.residue_factor = cp;

  report.scale = q1 * std::pow(p1 / (1.0 - p1), n) * std::pow(cp, n) *
                 perron_weight(model, report.perron, n);
  require_positive_scale(report.scale);

  fill_common_diagnostics(a, report.alpha, report, options,
                          [&](double s) { return iim_mgf(model, timing, s); });
  return report;
}

}  // namespace

TailReport iim_report(const ModulatedModel& model, const IncidenceTiming& timing,
                      const AnalysisOptions& options) {
  return iim_pole(model.negated(), timing, options);
}

// ---------------------------------------------------------------------------
// Arrival-time model

ItmClassification itm_classify(const ArrivalTiming& timing) {
  validate(timing);
  ItmClassification out;
  const double lambda1 = timing.arrival_rates.front();
  if (timing.completion_rates.empty()) {
    out.label = TailCase::ItmA;
    out.lambda_min = lambda1;
    out.beta = 0;
    return out;
  }
  out.completion = merge_rates(timing.completion_rates);
  const double mu1 = out.completion.front().rate;
  const int r1 = out.completion.front().multiplicity;
  const std::vector<double> pair{lambda1, mu1};
  if (merge_rates(pair).size() == 1) {
    out.label = TailCase::ItmC;
    out.lambda_min = mu1;
    out.beta = r1;
  } else if (lambda1 < mu1) {
    out.label = TailCase::ItmA;
    out.lambda_min = lambda1;
    out.beta = 0;
  } else {
    out.label = TailCase::ItmB;
    out.lambda_min = mu1;
    out.beta = r1 - 1;
  }
  return out;
}

ErlangSpec itm_type_spec(const ArrivalTiming& timing, std::size_t type) {
  std::vector<double> rates;
  rates.reserve(timing.completion_rates.size() + 1);
  rates.push_back(timing.arrival_rates.at(type));
  rates.insert(rates.end(), timing.completion_rates.begin(),
               timing.completion_rates.end());
  return ErlangSpec::from_rates(rates);
}

double itm_mgf(const ModulatedModel& model, const ArrivalTiming& timing,
               double s) {
  const ItmClassification cls = itm_classify(timing);
  const Eigen::MatrixXd a = matrix_laplace_exponent(model, s);
  const double r = dominant_eigen(a).eigenvalue;
  if (!(r < cls.lambda_min)) {
    throw Error(ErrorCode::DomainViolation,
                "s = " + std::to_string(s) +
                    " lies outside the convergence region of M_T");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < timing.arrival_rates.size(); ++j) {
    total += timing.weights[j] *
             sandwich(model, matrix_erlang_expectation(a, itm_type_spec(timing, j)));
  }
  return total;
}

namespace {

TailReport itm_pole(const ModulatedModel& model, const ArrivalTiming& timing,
                    const AnalysisOptions& options) {
  const ItmClassification cls = itm_classify(timing);
  const LaplaceExponent a(model);

  TailReport report;
  report.label = cls.label;
  report.beta = cls.beta;
  report.target = cls.lambda_min;
  report.alpha = solve_alpha(a, cls.lambda_min, options.alpha_max);

  const ResidueData res = resolvent_residue(a, report.alpha, cls.lambda_min);
  report.perron = res.perron;
  report.diagnostics.residue_factor = res.xi;

  const std::size_t types = timing.arrival_rates.size();
  std::vector<ErlangSpec> specs;
  specs.reserve(types);
  for (std::size_t j = 0; j < types; ++j) {
    specs.push_back(itm_type_spec(timing, j));
    if (specs.back().ill_conditioned()) report.diagnostics.near_rate_tie = true;
  }

  // Slot (rate, shape) of the leading pole in a type's coefficient table.
  auto coefficient_at = [&](std::size_t type, double rate, int shape) {
    const auto k = specs[type].find_rate(rate);
    if (!k || specs[type].blocks()[*k].multiplicity != shape) {
      throw Error(ErrorCode::InvalidTiming,
                  "missing Erlang block for the leading pole");
    }
    return specs[type].coefficient(*k, shape);
  };

  const double q1 = timing.weights.front();
  switch (cls.label) {
    case TailCase::ItmA: {
      const double c111 = coefficient_at(0, timing.arrival_rates.front(), 1);
      report.scale = res.xi * q1 * c111 * perron_weight(model, res.perron, 1);
      break;
    }
    case TailCase::ItmB: {
      const int r1 = cls.completion.front().multiplicity;
      const double mu1 = cls.completion.front().rate;
      double weighted = 0.0;
      for (std::size_t j = 0; j < types; ++j) {
        weighted += timing.weights[j] * coefficient_at(j, mu1, r1);
      }
      report.scale = std::pow(res.xi, r1) * weighted *
                     perron_weight(model, res.perron, r1);
      break;
    }
    case TailCase::ItmC: {
      const int r1 = cls.completion.front().multiplicity;
      const double mu1 = cls.completion.front().rate;
      const double c_top = coefficient_at(0, mu1, r1 + 1);
      report.scale = std::pow(res.xi, r1 + 1) * q1 * c_top *
                     perron_weight(model, res.perron, r1 + 1);
      break;
    }
    default:
      break;
  }
  require_positive_scale(report.scale);

  // Rates within 1e-6 of each other that the 1e-9 merge kept apart.
  std::vector<double> all = timing.arrival_rates;
  all.insert(all.end(), timing.completion_rates.begin(),
             timing.completion_rates.end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i + 1 < all.size(); ++i) {
    const double gap = all[i + 1] - all[i];
    if (gap > kRateMergeTol * all[i + 1] && gap <= 1e-6 * all[i + 1]) {
      report.diagnostics.near_rate_tie = true;
    }
  }

  fill_common_diagnostics(a, report.alpha, report, options,
                          [&](double s) { return itm_mgf(model, timing, s); });
  return report;
}

}  // namespace

TailReport itm_report(const ModulatedModel& model, const ArrivalTiming& timing,
                      const AnalysisOptions& options) {
  return itm_pole(model.negated(), timing, options);
}

// ---------------------------------------------------------------------------

TailReport tail_report(const ModulatedModel& model, const TimingModel& timing,
                       const AnalysisOptions& options) {
  return std::visit(
      [&](const auto& t) -> TailReport {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, IncidenceTiming>) {
          return iim_report(model, t, options);
        } else {
          return itm_report(model, t, options);
        }
      },
      timing);
}

double timing_mgf(const ModulatedModel& model, const TimingModel& timing,
                  double s) {
  return std::visit(
      [&](const auto& t) -> double {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, IncidenceTiming>) {
          return iim_mgf(model, t, s);
        } else {
          return itm_mgf(model, t, s);
        }
      },
      timing);
}

TailReport lower_tail_report(const ModulatedModel& model,
                             const TimingModel& timing,
                             const AnalysisOptions& options) {
  TailReport report = std::visit(
      [&](const auto& t) -> TailReport {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, IncidenceTiming>) {
          return iim_pole(model, t, options);
        } else {
          return itm_pole(model, t, options);
        }
      },
      timing);
  report.side = TailSide::Lower;
  return report;
}

}  // namespace mmtail
