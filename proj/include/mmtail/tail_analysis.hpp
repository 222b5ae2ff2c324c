#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "mmtail/erlang.hpp"
#include "mmtail/process.hpp"
#include "mmtail/spectral.hpp"
#include "mmtail/timing.hpp"

namespace mmtail {

enum class TailCase { IimGeometric, IimNegbin, ItmA, ItmB, ItmC };
enum class TailSide { Upper, Lower };

std::string_view to_string(TailCase c) noexcept;
std::string_view to_string(TailSide s) noexcept;

struct AnalysisOptions {
  double alpha_max = kDefaultAlphaMax;
  // Uniqueness scan grid; the model-dependent default is used when empty.
  std::vector<double> beta_grid;
};

struct ResidueLimitPoint {
  double offset = 0.0;  // s + alpha
  double value = 0.0;   // (s + alpha)^{beta+1} M_T(s)
};

struct TailDiagnostics {
  // Numerical-limit check of the scale constant at s = -alpha + 10^{-k}.
  std::vector<ResidueLimitPoint> residue_limit;
  double residue_limit_extrapolated = 0.0;
  double residue_limit_relative_error = 0.0;
  // g(alpha) = r_D(A(-alpha)) on a uniform grid over [0, 1.5 alpha].
  std::vector<std::pair<double, double>> exponent_grid;
  bool convex_on_grid = true;
  // r_D(A(s)) finite on [-alpha - 0.1, 0.1].
  bool domain_finite = true;
  // Residue factor: c_p for IIM, xi for ITM.
  double residue_factor = 0.0;
  // ITM: some rates agree within 1e-6 but were not merged at 1e-9, or the
  // Erlang coefficient table is ill-conditioned.
  bool near_rate_tie = false;
  std::size_t beta_grid_size = 0;
};

struct TailReport {
  TailSide side = TailSide::Upper;
  TailCase label = TailCase::IimGeometric;
  double alpha = 0.0;
  int beta = 0;
  double scale = 0.0;  // M tilde
  // Boundary value c of r_D(A(-alpha)) = c.
  double target = 0.0;
  // tau(A(-alpha + i beta)) < tau(A(-alpha)) on the scan grid.
  bool unique_singularity = false;
  // M tilde / alpha when beta = 0 and the singularity is unique.
  std::optional<double> paretian_limit;
  PerronData perron;
  TailDiagnostics diagnostics;
};

struct ItmClassification {
  TailCase label = TailCase::ItmA;
  double lambda_min = 0.0;
  int beta = 0;
  // Merged completion stages (mu_k, r_k); empty for the exponential benchmark.
  std::vector<RateBlock> completion;
};

// Upper tail of P_T = e^{X_T}. The growth of E[P_T^alpha] = M_T(alpha) is
// the pole at s = -alpha of s -> E[e^{-s X_T}], so reports solve
// r_D(A~(-alpha)) = c for the exponent A~(z) = A(-z) of -X; every quantity
// in the report (Perron pair, residue factor, residue-limit table) refers to
// that map.
TailReport iim_report(const ModulatedModel& model, const IncidenceTiming& timing,
                      const AnalysisOptions& options = {});

double iim_mgf(const ModulatedModel& model, const IncidenceTiming& timing,
               double s);

ItmClassification itm_classify(const ArrivalTiming& timing);

// Generalized Erlang law of the trade time of type j.
ErlangSpec itm_type_spec(const ArrivalTiming& timing, std::size_t type);

TailReport itm_report(const ModulatedModel& model, const ArrivalTiming& timing,
                      const AnalysisOptions& options = {});

double itm_mgf(const ModulatedModel& model, const ArrivalTiming& timing,
               double s);

TailReport tail_report(const ModulatedModel& model, const TimingModel& timing,
                       const AnalysisOptions& options = {});

double timing_mgf(const ModulatedModel& model, const TimingModel& timing,
                  double s);

// Upper tail of 1/P_T: the same analysis applied to A itself, so the
// exponent solves r_D(A(-gamma)) = c.
TailReport lower_tail_report(const ModulatedModel& model,
                             const TimingModel& timing,
                             const AnalysisOptions& options = {});

}  // namespace mmtail
