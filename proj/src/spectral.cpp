#include "mmtail/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "mmtail/error.hpp"
#include "mmtail/matrix_functions.hpp"

namespace mmtail {

namespace {

// Eigenvector of `m` for the eigenvalue of maximal real part, returned as a
// real vector with its largest-modulus entry scaled to be positive.
Eigen::VectorXd perron_vector(const Eigen::MatrixXd& m, double* eigenvalue) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, true);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::NonRealDominant, "eigendecomposition failed");
  }
  const auto& evals = es.eigenvalues();
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < evals.size(); ++i) {
    if (evals(i).real() > evals(best).real()) best = i;
  }
  if (std::abs(evals(best).imag()) > kImagTol) {
    throw Error(ErrorCode::NonRealDominant,
                "eigenvalue of maximal real part has imaginary part " +
                    std::to_string(evals(best).imag()));
  }
  *eigenvalue = evals(best).real();
  Eigen::VectorXcd v = es.eigenvectors().col(best);
  Eigen::Index pivot = 0;
  v.cwiseAbs().maxCoeff(&pivot);
  v /= v(pivot);
  return v.real();
}

}  // namespace

bool is_metzler(const Eigen::MatrixXd& m, double tol) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (i != j && m(i, j) < -tol) return false;
    }
  }
  return true;
}

namespace {

// Osborne balancing by powers of two: returns d with D^{-1} m D balanced,
// where D = diag(d). The similarity is exact and keeps the Metzler pattern.
Eigen::VectorXd balance(Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
  for (int sweep = 0; sweep < 100; ++sweep) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double col = m.col(i).cwiseAbs().sum() - std::abs(m(i, i));
      const double row = m.row(i).cwiseAbs().sum() - std::abs(m(i, i));
      if (col == 0.0 || row == 0.0) continue;
      int exponent = 0;
      std::frexp(std::sqrt(row / col), &exponent);
      const double f = std::ldexp(1.0, exponent - 1);
      if (f == 1.0 || (f > 0.5 && f < 2.0)) continue;
      if ((col * f + row / f) >= 0.95 * (col + row)) continue;
      m.col(i) *= f;
      m.row(i) /= f;
      d(i) *= f;
      changed = true;
    }
    if (!changed) break;
  }
  return d;
}

// Components far below the largest one carry eigensolver noise of either
// sign. A few steps of inverse iteration with an upper shift restore them:
// (sigma I - S)^{-1} is entrywise positive for sigma > rho(S).
Eigen::VectorXd polish(const Eigen::MatrixXd& s, double rho, Eigen::VectorXd v) {
  if (v.sum() < 0.0) v = -v;
  if ((v.array() > 0.0).all()) return v;
  v = v.cwiseAbs();
  const Eigen::Index n = s.rows();
  const double sigma = rho + 1e-6 * std::max(1.0, std::abs(rho));
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(sigma * Eigen::MatrixXd::Identity(n, n) - s);
  for (int i = 0; i < 3; ++i) {
    v = lu.solve(v);
    v /= v.cwiseAbs().maxCoeff();
  }
  return v;
}

}  // namespace

PerronData dominant_eigen(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorCode::NotMetzler, "matrix must be square and nonempty");
  }
  if (!detail::all_finite(m)) {
    throw Error(ErrorCode::NotMetzler, "matrix has non-finite entries");
  }
  if (!is_metzler(m)) {
    throw Error(ErrorCode::NotMetzler, "off-diagonal entries must be >= 0");
  }
  if (!is_irreducible(m, kMetzlerTol)) {
    throw Error(ErrorCode::NotIrreducible, "matrix is reducible");
  }
  const Eigen::Index n = m.rows();
  PerronData out;
  if (n == 1) {
    out.eigenvalue = m(0, 0);
    out.right = Eigen::VectorXd::Ones(1);
    out.left = Eigen::VectorXd::Ones(1);
    return out;
  }

  // Shift to a nonnegative matrix; the spectrum moves rigidly by `shift`.
  const double shift = 1.0 + std::max(0.0, -m.diagonal().minCoeff());
  Eigen::MatrixXd shifted = m + shift * Eigen::MatrixXd::Identity(n, n);
  const Eigen::VectorXd scaling = balance(shifted);

  double right_value = 0.0;
  double left_value = 0.0;
  out.right = perron_vector(shifted, &right_value);
  out.left = perron_vector(shifted.transpose(), &left_value);
  out.eigenvalue = right_value - shift;

  out.right = polish(shifted, right_value, out.right);
  out.left = polish(shifted.transpose(), left_value, out.left);
  // Undo the similarity: x = D x_b, y = D^{-1} y_b.
  out.right = out.right.cwiseProduct(scaling);
  out.left = out.left.cwiseQuotient(scaling);
  out.right /= out.right(0);
  const double overlap = out.left.dot(out.right);
  out.left /= overlap;
  if ((out.right.array() <= 0.0).any() || (out.left.array() <= 0.0).any()) {
    throw Error(ErrorCode::NonRealDominant,
                "Perron eigenvectors are not strictly positive");
  }
  return out;
}

double dominant_eigenvalue_at(const LaplaceExponent& a, double s) {
  const Eigen::MatrixXd m = a(s);
  if (!detail::all_finite(m)) return std::numeric_limits<double>::infinity();
  return dominant_eigen(m).eigenvalue;
}

double solve_alpha(const LaplaceExponent& a, double target, double alpha_max) {
  if (!(target > 0.0)) {
    throw Error(ErrorCode::DegenerateTarget,
                "target eigenvalue must be > 0, got " + std::to_string(target));
  }
  if (!(alpha_max > 0.0)) {
    throw Error(ErrorCode::DegenerateTarget, "alpha_max must be > 0");
  }
  auto g = [&](double alpha) { return dominant_eigenvalue_at(a, -alpha); };

  // g is convex with g(0) = 0 < target, so {g < target} is an interval
  // containing 0 and the first upward crossing is the only one.
  double lo = 0.0;
  double hi = std::min(1e-3, alpha_max);
  double g_hi = g(hi);
  while (g_hi < target) {
    if (hi >= alpha_max) throw NoSolutionError(g_hi, target, alpha_max);
    lo = hi;
    hi = std::min(2.0 * hi, alpha_max);
    g_hi = g(hi);
  }

  const double tol = kRootTol * std::max(1.0, target);
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double g_mid = g(mid);
    if (g_mid < target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double alpha = 0.5 * (lo + hi);
  const double residual = g(alpha) - target;
  if (!(std::abs(residual) <= tol)) {
    throw NoSolutionError(g(alpha_max), target, alpha_max);
  }
  return alpha;
}

ResidueData resolvent_residue(const LaplaceExponent& a, double alpha,
                              double eta) {
  const Eigen::MatrixXd at = a(-alpha);
  PerronData perron = dominant_eigen(at);
  if (std::abs(perron.eigenvalue - eta) > kEigenMatchTol * std::max(1.0, eta)) {
    throw Error(ErrorCode::DomainViolation,
                "r_D(A(-alpha)) = " + std::to_string(perron.eigenvalue) +
                    " does not match eta = " + std::to_string(eta));
  }
  const Eigen::MatrixXd d = a.derivative(-alpha);
  const double denom = -perron.left.dot(d * perron.right);
  if (!(denom > 0.0) || !std::isfinite(denom)) {
    throw Error(ErrorCode::NonPositiveXi,
                "-y' A'(-alpha) x = " + std::to_string(denom) +
                    " is not positive");
  }
  ResidueData out;
  out.pole = -alpha;
  out.xi = 1.0 / denom;
  out.residue = out.xi * perron.right * perron.left.transpose();
  out.perron = std::move(perron);
  return out;
}

bool uniqueness_scan(const LaplaceExponent& a, double alpha,
                     std::span<const double> beta_grid) {
  const double reference = spectral_abscissa(a(-alpha));
  for (const double beta : beta_grid) {
    if (beta == 0.0) continue;
    const double tau = spectral_abscissa(a(Complex(-alpha, beta)));
    if (!(tau < reference - 1e-10)) return false;
  }
  return true;
}

std::vector<double> default_beta_grid(const ModulatedModel& model) {
  std::vector<double> grid;
  constexpr int kSteps = 2000;
  constexpr double kMaxBeta = 100.0;
  grid.reserve(kSteps + 16);
  for (int i = 1; i <= kSteps; ++i) grid.push_back(kMaxBeta * i / kSteps);

  auto add_atom = [&](double atom) {
    if (atom == 0.0) return;
    for (int m = 1; m <= 3; ++m) {
      grid.push_back(2.0 * std::numbers::pi * m / std::abs(atom));
    }
  };
  auto add_law = [&](const JumpLaw& law) {
    if (const auto* d = std::get_if<DegenerateJump>(&law)) add_atom(d->size);
    if (const auto* t = std::get_if<TwoPointJump>(&law)) {
      add_atom(t->first);
      add_atom(t->second);
    }
  };
  for (const auto& r : model.regimes()) {
    if (r.jump_intensity > 0.0) add_law(r.jump);
  }
  for (const auto& row : model.transition_jumps()) {
    for (const auto& t : row) {
      if (t.probability > 0.0) add_law(t.jump);
    }
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace mmtail
