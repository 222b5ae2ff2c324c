#include "mmtail/process.hpp"

#include <cmath>
#include <string>

#include "mmtail/error.hpp"
#include "mmtail/matrix_functions.hpp"

namespace mmtail {

namespace {

constexpr double kStochasticTol = 1e-12;

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::InvalidModel, path + ": " + what);
}

void validate_law(const JumpLaw& law, const std::string& path) {
  std::visit(
      [&](const auto& j) {
        using J = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<J, DegenerateJump>) {
          if (!std::isfinite(j.size)) invalid(path + ".size", "must be finite");
        } else if constexpr (std::is_same_v<J, GaussianJump>) {
          if (!std::isfinite(j.mean)) invalid(path + ".mean", "must be finite");
          if (!(j.variance >= 0.0) || !std::isfinite(j.variance)) {
            invalid(path + ".variance", "must be finite and >= 0");
          }
        } else {
          if (!std::isfinite(j.first) || !std::isfinite(j.second)) {
            invalid(path, "two-point atoms must be finite");
          }
          if (!(j.first_probability >= 0.0 && j.first_probability <= 1.0)) {
            invalid(path + ".first_probability", "must lie in [0, 1]");
          }
        }
      },
      law);
}

bool law_is_zero(const JumpLaw& law) {
  if (const auto* d = std::get_if<DegenerateJump>(&law)) return d->size == 0.0;
  return false;
}

}  // namespace

JumpLaw negated(const JumpLaw& law) {
  return std::visit(
      [](const auto& j) -> JumpLaw {
        using J = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<J, DegenerateJump>) {
          return DegenerateJump{-j.size};
        } else if constexpr (std::is_same_v<J, GaussianJump>) {
          return GaussianJump{-j.mean, j.variance};
        } else {
          return TwoPointJump{-j.first, -j.second, j.first_probability};
        }
      },
      law);
}

bool is_irreducible(const Eigen::MatrixXd& pattern, double tol) {
  const Eigen::Index n = pattern.rows();
  if (n <= 1) return true;
  // Strong connectivity: every node reachable from 0 in the graph and in its
  // transpose.
  auto reaches_all = [&](bool transpose) {
    std::vector<char> seen(n, 0);
    std::vector<Eigen::Index> stack{0};
    seen[0] = 1;
    Eigen::Index count = 1;
    while (!stack.empty()) {
      const Eigen::Index j = stack.back();
      stack.pop_back();
      for (Eigen::Index k = 0; k < n; ++k) {
        const double w = transpose ? pattern(k, j) : pattern(j, k);
        if (k != j && !seen[k] && std::abs(w) > tol) {
          seen[k] = 1;
          ++count;
          stack.push_back(k);
        }
      }
    }
    return count == n;
  };
  return reaches_all(false) && reaches_all(true);
}

ModulatedModel::ModulatedModel(
    std::vector<RegimeExponent> regimes, Eigen::MatrixXd generator,
    std::vector<std::vector<TransitionJump>> transition_jumps,
    Eigen::VectorXd initial)
    : regimes_(std::move(regimes)),
      generator_(std::move(generator)),
      transition_jumps_(std::move(transition_jumps)),
      initial_(std::move(initial)) {
  const auto n = static_cast<std::size_t>(generator_.rows());
  if (transition_jumps_.empty() && n > 0) {
    transition_jumps_.assign(n, std::vector<TransitionJump>(n));
  }
  validate();
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      if (transition_jumps_[j][k].probability > 0.0) has_transition_jumps_ = true;
    }
  }
}

ModulatedModel::ModulatedModel(std::vector<RegimeExponent> regimes,
                               Eigen::MatrixXd generator,
                               Eigen::VectorXd initial)
    : ModulatedModel(std::move(regimes), std::move(generator), {},
                     std::move(initial)) {}

void ModulatedModel::validate() const {
  const Eigen::Index n = generator_.rows();
  if (n < 1) invalid("model.generator", "must have at least one regime");
  if (static_cast<std::size_t>(n) > kMaxRegimes) {
    invalid("model.generator", "at most " + std::to_string(kMaxRegimes) +
                                   " regimes are supported");
  }
  if (generator_.cols() != n) invalid("model.generator", "must be square");
  if (static_cast<Eigen::Index>(regimes_.size()) != n) {
    invalid("model.regimes", "count must match generator dimension");
  }
  if (initial_.size() != n) {
    invalid("model.initial", "length must match generator dimension");
  }
  if (static_cast<Eigen::Index>(transition_jumps_.size()) != n) {
    invalid("model.transition_jumps", "must be an N x N table");
  }

  for (Eigen::Index j = 0; j < n; ++j) {
    const std::string rp = "model.regimes[" + std::to_string(j) + "]";
    const auto& r = regimes_[j];
    if (!std::isfinite(r.drift)) invalid(rp + ".drift", "must be finite");
    if (!(r.variance >= 0.0) || !std::isfinite(r.variance)) {
      invalid(rp + ".variance", "must be finite and >= 0");
    }
    if (!(r.jump_intensity >= 0.0) || !std::isfinite(r.jump_intensity)) {
      invalid(rp + ".jump_intensity", "must be finite and >= 0");
    }
    validate_law(r.jump, rp + ".jump");

    double row_sum = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
      const std::string gp = "model.generator[" + std::to_string(j) + "][" +
                             std::to_string(k) + "]";
      const double g = generator_(j, k);
      if (!std::isfinite(g)) invalid(gp, "must be finite");
      if (j != k && g < 0.0) invalid(gp, "off-diagonal rates must be >= 0");
      row_sum += g;
    }
    if (std::abs(row_sum) > kStochasticTol) {
      invalid("model.generator[" + std::to_string(j) + "]",
              "row must sum to 0");
    }

    if (static_cast<Eigen::Index>(transition_jumps_[j].size()) != n) {
      invalid("model.transition_jumps[" + std::to_string(j) + "]",
              "row length must match generator dimension");
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      const std::string tp = "model.transition_jumps[" + std::to_string(j) +
                             "][" + std::to_string(k) + "]";
      const auto& t = transition_jumps_[j][k];
      if (!(t.probability >= 0.0 && t.probability <= 1.0)) {
        invalid(tp + ".probability", "must lie in [0, 1]");
      }
      validate_law(t.jump, tp + ".jump");
      if (j == k && (t.probability != 0.0 || !law_is_zero(t.jump))) {
        invalid(tp, "diagonal transition jumps must be absent");
      }
    }
  }
  if (!is_irreducible(generator_)) {
    invalid("model.generator", "must be irreducible");
  }

  double total = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!(initial_(j) >= 0.0)) {
      invalid("model.initial[" + std::to_string(j) + "]", "must be >= 0");
    }
    total += initial_(j);
  }
  if (std::abs(total - 1.0) > kStochasticTol) {
    invalid("model.initial", "must sum to 1");
  }
}

ModulatedModel ModulatedModel::negated() const {
  std::vector<RegimeExponent> regimes = regimes_;
  for (auto& r : regimes) {
    r.drift = -r.drift;
    r.jump = mmtail::negated(r.jump);
  }
  auto jumps = transition_jumps_;
  for (auto& row : jumps) {
    for (auto& t : row) t.jump = mmtail::negated(t.jump);
  }
  return ModulatedModel(std::move(regimes), generator_, std::move(jumps),
                        initial_);
}

double mgf_at_time(const ModulatedModel& model, double s, double t) {
  const Eigen::MatrixXd a = matrix_laplace_exponent(model, s);
  const Eigen::MatrixXd e = expm(a * t);
  return model.initial().dot(e.rowwise().sum());
}

}  // namespace mmtail
