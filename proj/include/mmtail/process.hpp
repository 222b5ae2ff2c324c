#pragma once

#include <complex>
#include <cstddef>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace mmtail {

using Complex = std::complex<double>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

inline constexpr std::size_t kMaxRegimes = 64;

// Jump size laws with closed-form moment generating functions.
struct DegenerateJump {
  double size = 0.0;
};

struct GaussianJump {
  double mean = 0.0;
  double variance = 0.0;
};

struct TwoPointJump {
  double first = 0.0;
  double second = 0.0;
  double first_probability = 1.0;
};

using JumpLaw = std::variant<DegenerateJump, GaussianJump, TwoPointJump>;

// E[e^{zU}] for a jump U with the given law.
template <typename Scalar>
Scalar jump_mgf(const JumpLaw& law, const Scalar& z) {
  using std::exp;
  return std::visit(
      [&](const auto& j) -> Scalar {
        using J = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<J, DegenerateJump>) {
          return exp(z * j.size);
        } else if constexpr (std::is_same_v<J, GaussianJump>) {
          return exp(z * j.mean + 0.5 * j.variance * z * z);
        } else {
          return j.first_probability * exp(z * j.first) +
                 (1.0 - j.first_probability) * exp(z * j.second);
        }
      },
      law);
}

// d/dz E[e^{zU}].
template <typename Scalar>
Scalar jump_mgf_derivative(const JumpLaw& law, const Scalar& z) {
  using std::exp;
  return std::visit(
      [&](const auto& j) -> Scalar {
        using J = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<J, DegenerateJump>) {
          return j.size * exp(z * j.size);
        } else if constexpr (std::is_same_v<J, GaussianJump>) {
          return (j.mean + j.variance * z) *
                 exp(z * j.mean + 0.5 * j.variance * z * z);
        } else {
          return j.first_probability * j.first * exp(z * j.first) +
                 (1.0 - j.first_probability) * j.second * exp(z * j.second);
        }
      },
      law);
}

JumpLaw negated(const JumpLaw& law);

// Levy exponent of one regime: drift, Brownian variance and a compound
// Poisson component with intensity `jump_intensity`.
struct RegimeExponent {
  double drift = 0.0;
  double variance = 0.0;
  double jump_intensity = 0.0;
  JumpLaw jump = DegenerateJump{0.0};
};

struct TransitionJump {
  double probability = 0.0;
  JumpLaw jump = DegenerateJump{0.0};
};

// psi_j(z) = mu z + sigma^2 z^2 / 2 + kappa (phi(z) - 1).
template <typename Scalar>
Scalar levy_exponent(const RegimeExponent& r, const Scalar& z) {
  Scalar value = r.drift * z + 0.5 * r.variance * z * z;
  if (r.jump_intensity != 0.0) {
    value += r.jump_intensity * (jump_mgf(r.jump, z) - 1.0);
  }
  return value;
}

template <typename Scalar>
Scalar levy_exponent_derivative(const RegimeExponent& r, const Scalar& z) {
  Scalar value = r.drift + r.variance * z;
  if (r.jump_intensity != 0.0) {
    value += r.jump_intensity * jump_mgf_derivative(r.jump, z);
  }
  return value;
}

// E[e^{zV}] where V = U with probability rho and 0 otherwise.
template <typename Scalar>
Scalar transition_mgf(const TransitionJump& t, const Scalar& z) {
  if (t.probability == 0.0) return Scalar(1.0);
  return (1.0 - t.probability) + t.probability * jump_mgf(t.jump, z);
}

template <typename Scalar>
Scalar transition_mgf_derivative(const TransitionJump& t, const Scalar& z) {
  if (t.probability == 0.0) return Scalar(0.0);
  return t.probability * jump_mgf_derivative(t.jump, z);
}

/// Markov-modulated Levy process: N regimes switching under the irreducible
/// generator G, optional jumps at regime switches, and initial law w0.
///
/// Construction validates every invariant and throws Error(InvalidModel)
/// with a field path naming the offending entry.
class ModulatedModel {
 public:
  ModulatedModel(std::vector<RegimeExponent> regimes, Eigen::MatrixXd generator,
                 std::vector<std::vector<TransitionJump>> transition_jumps,
                 Eigen::VectorXd initial);

  // Model without transition jumps.
  ModulatedModel(std::vector<RegimeExponent> regimes, Eigen::MatrixXd generator,
                 Eigen::VectorXd initial);

  Eigen::Index size() const noexcept { return generator_.rows(); }
  const std::vector<RegimeExponent>& regimes() const noexcept {
    return regimes_;
  }
  const RegimeExponent& regime(Eigen::Index j) const { return regimes_[j]; }
  const Eigen::MatrixXd& generator() const noexcept { return generator_; }
  const TransitionJump& transition_jump(Eigen::Index j, Eigen::Index k) const {
    return transition_jumps_[j][k];
  }
  const std::vector<std::vector<TransitionJump>>& transition_jumps()
      const noexcept {
    return transition_jumps_;
  }
  const Eigen::VectorXd& initial() const noexcept { return initial_; }
  bool has_transition_jumps() const noexcept { return has_transition_jumps_; }

  // Model of -X: drifts, jump sizes and transition jump sizes negated.
  ModulatedModel negated() const;

 private:
  void validate() const;

  std::vector<RegimeExponent> regimes_;
  Eigen::MatrixXd generator_;
  std::vector<std::vector<TransitionJump>> transition_jumps_;
  Eigen::VectorXd initial_;
  bool has_transition_jumps_ = false;
};

bool is_irreducible(const Eigen::MatrixXd& pattern, double tol = 0.0);

/// A(z) = G .* Upsilon(z) + Psi(z).
template <typename Scalar>
MatrixX<Scalar> matrix_laplace_exponent(const ModulatedModel& model,
                                        const Scalar& z) {
  const Eigen::Index n = model.size();
  MatrixX<Scalar> a(n, n);
  const auto& g = model.generator();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (j == k) {
        a(j, j) = g(j, j) + levy_exponent(model.regime(j), z);
      } else if (g(j, k) == 0.0) {
        a(j, k) = Scalar(0.0);
      } else {
        a(j, k) = g(j, k) * transition_mgf(model.transition_jump(j, k), z);
      }
    }
  }
  return a;
}

/// Entrywise derivative A'(z).
template <typename Scalar>
MatrixX<Scalar> matrix_laplace_exponent_derivative(const ModulatedModel& model,
                                                   const Scalar& z) {
  const Eigen::Index n = model.size();
  MatrixX<Scalar> a = MatrixX<Scalar>::Zero(n, n);
  const auto& g = model.generator();
  for (Eigen::Index j = 0; j < n; ++j) {
    a(j, j) = levy_exponent_derivative(model.regime(j), z);
    for (Eigen::Index k = 0; k < n; ++k) {
      if (j != k && g(j, k) != 0.0) {
        a(j, k) =
            g(j, k) * transition_mgf_derivative(model.transition_jump(j, k), z);
      }
    }
  }
  return a;
}

/// Evaluable matrix function z -> A(z) together with A'(z), bound to a model.
class LaplaceExponent {
 public:
  explicit LaplaceExponent(ModulatedModel model) : model_(std::move(model)) {}

  const ModulatedModel& model() const noexcept { return model_; }
  Eigen::Index size() const noexcept { return model_.size(); }

  Eigen::MatrixXd operator()(double z) const {
    return matrix_laplace_exponent(model_, z);
  }
  Eigen::MatrixXcd operator()(const Complex& z) const {
    return matrix_laplace_exponent(model_, z);
  }
  Eigen::MatrixXd derivative(double z) const {
    return matrix_laplace_exponent_derivative(model_, z);
  }

 private:
  ModulatedModel model_;
};

/// M_t(s) = w0' exp(A(s) t) 1.
double mgf_at_time(const ModulatedModel& model, double s, double t);

}  // namespace mmtail
