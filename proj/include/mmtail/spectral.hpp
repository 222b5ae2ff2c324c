#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mmtail/process.hpp"

namespace mmtail {

// Global tolerances of the spectral layer.
inline constexpr double kMetzlerTol = 1e-12;
inline constexpr double kImagTol = 1e-8;
inline constexpr double kRootTol = 1e-10;
inline constexpr double kEigenMatchTol = 1e-8;
inline constexpr double kDefaultAlphaMax = 50.0;

/// Dominant real eigenvalue of an irreducible Metzler matrix with its
/// strictly positive right (x) and left (y) eigenvectors, x(0) > 0 and
/// y'x = 1.
struct PerronData {
  double eigenvalue = 0.0;
  Eigen::VectorXd right;
  Eigen::VectorXd left;
  bool normalized = true;
};

/// Residue of (eta I - A(s))^{-1} at s = -alpha: R = xi x y'.
struct ResidueData {
  double pole = 0.0;
  Eigen::MatrixXd residue;
  double xi = 0.0;
  PerronData perron;
};

bool is_metzler(const Eigen::MatrixXd& m, double tol = kMetzlerTol);

PerronData dominant_eigen(const Eigen::MatrixXd& m);

/// r_D(A(s)); +inf when A(s) is not finite.
double dominant_eigenvalue_at(const LaplaceExponent& a, double s);

/// Unique alpha in (0, alpha_max] with r_D(A(-alpha)) = target.
double solve_alpha(const LaplaceExponent& a, double target,
                   double alpha_max = kDefaultAlphaMax);

ResidueData resolvent_residue(const LaplaceExponent& a, double alpha,
                              double eta);

/// True iff tau(A(-alpha + i beta)) < tau(A(-alpha)) - 1e-10 for every
/// nonzero beta in the grid.
bool uniqueness_scan(const LaplaceExponent& a, double alpha,
                     std::span<const double> beta_grid);

/// Default scan grid: a uniform grid on (0, 100] plus lattice periods
/// 2 pi m / a of every degenerate or two-point jump atom of the model.
std::vector<double> default_beta_grid(const ModulatedModel& model);

}  // namespace mmtail
