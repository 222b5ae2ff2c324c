#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mmtail/error.hpp"
#include "mmtail/matrix_functions.hpp"
#include "mmtail/process.hpp"

namespace mmtail {

inline constexpr int kMaxTotalShape = 30;
inline constexpr double kRateMergeTol = 1e-9;

struct RateBlock {
  double rate = 0.0;
  int multiplicity = 0;

  friend bool operator==(const RateBlock&, const RateBlock&) = default;
};

/// Sort rates ascending and merge rates equal within relative 1e-9.
std::vector<RateBlock> merge_rates(std::span<const double> rates);

/// c_{k,l} for the sum of independent Erlang(a_k, b_k) blocks with pairwise
/// distinct rates; row k holds l = 1..b_k.
std::vector<std::vector<double>> erlang_coefficients(
    std::span<const RateBlock> blocks);

/// Generalized Erlang law: sum of Erlang blocks with distinct rates
/// a_1 < ... < a_D. The density is sum_k sum_l c_{k,l} t^{l-1} e^{-a_k t}/(l-1)!.
class ErlangSpec {
 public:
  explicit ErlangSpec(std::vector<RateBlock> blocks);

  // Merges the raw stage rates first.
  static ErlangSpec from_rates(std::span<const double> rates);

  const std::vector<RateBlock>& blocks() const noexcept { return blocks_; }
  const std::vector<std::vector<double>>& coefficients() const noexcept {
    return coefficients_;
  }
  double coefficient(std::size_t k, int l) const {
    return coefficients_.at(k).at(static_cast<std::size_t>(l - 1));
  }
  // Index of the block whose rate matches `rate` within the merge tolerance.
  std::optional<std::size_t> find_rate(double rate) const;
  double smallest_rate() const noexcept { return blocks_.front().rate; }
  int total_shape() const noexcept;
  double mean() const noexcept;
  // Min pairwise rate gap below 1e-3 * max rate: coefficients may be
  // ill-conditioned.
  bool ill_conditioned() const noexcept { return ill_conditioned_; }

  double density(double t) const;

 private:
  std::vector<RateBlock> blocks_;
  std::vector<std::vector<double>> coefficients_;
  bool ill_conditioned_ = false;
};

/// E[e^{A T}] = sum_k sum_l c_{k,l} (a_k I - A)^{-l}; requires tau(A) < a_1.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
matrix_erlang_expectation(const Eigen::MatrixBase<Derived>& a,
                          const ErlangSpec& spec) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index n = a.rows();
  const double tau = spectral_abscissa(a);
  if (!(tau < spec.smallest_rate())) {
    throw Error(ErrorCode::DomainViolation,
                "spectral abscissa " + std::to_string(tau) +
                    " is not below the smallest Erlang rate " +
                    std::to_string(spec.smallest_rate()));
  }
  const Mat ident = Mat::Identity(n, n);
  Mat total = Mat::Zero(n, n);
  const auto& blocks = spec.blocks();
  for (std::size_t k = 0; k < blocks.size(); ++k) {
    const Mat shifted = blocks[k].rate * ident - a;
    const Eigen::PartialPivLU<Mat> lu(shifted);
    Mat power = ident;
    for (int l = 1; l <= blocks[k].multiplicity; ++l) {
      power = lu.solve(power);
      total += spec.coefficient(k, l) * power;
    }
  }
  return total;
}

}  // namespace mmtail
