#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "mmtail/error.hpp"
#include "mmtail/spectral.hpp"
#include "support.hpp"

using namespace mmtail;
using mmtail::testing::brownian;
using mmtail::testing::two_regime;

namespace {

Eigen::MatrixXd mat2(double a, double b, double c, double d) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, c, d;
  return m;
}

// Reference abscissa from the complex eigensolver on the unshifted matrix.
double reference_abscissa(const Eigen::MatrixXd& m) {
  const Eigen::VectorXcd ev = Eigen::EigenSolver<Eigen::MatrixXd>(m).eigenvalues();
  double best = -INFINITY;
  for (Eigen::Index i = 0; i < ev.size(); ++i) best = std::max(best, ev(i).real());
  return best;
}

}  // namespace

TEST_CASE("dominant eigen pair of the two-state generator") {
  const PerronData p = dominant_eigen(mat2(-1, 1, 1, -1));
  CHECK(std::abs(p.eigenvalue) < 1e-10);
  CHECK(p.right(0) == doctest::Approx(p.right(1)));
  CHECK(p.left(0) == doctest::Approx(p.left(1)));
  CHECK(p.left.dot(p.right) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.right(0) > 0.0);
}

TEST_CASE("dominant eigen pair of small nonnegative matrices") {
  const PerronData sym = dominant_eigen(mat2(2, 1, 1, 2));
  CHECK(sym.eigenvalue == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(sym.right(0) == doctest::Approx(sym.right(1)));
  CHECK(sym.left(0) == doctest::Approx(sym.left(1)));

  const Eigen::MatrixXd m = mat2(0, 2, 3, 0);
  const PerronData p = dominant_eigen(m);
  CHECK(p.eigenvalue == doctest::Approx(std::sqrt(6.0)).epsilon(1e-12));
  CHECK(p.eigenvalue == doctest::Approx(reference_abscissa(m)).epsilon(1e-12));
}

TEST_CASE("dominant eigen pair invariants on random Metzler matrices") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> diag(-5.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::Index n = 1 + trial % 8;
    Eigen::MatrixXd m = mmtail::testing::random_sparse_generator(rng, n);
    for (Eigen::Index j = 0; j < n; ++j) m(j, j) += diag(rng);
    const PerronData p = dominant_eigen(m);
    const double norm = std::max(1.0, m.norm());
    CHECK((m * p.right - p.eigenvalue * p.right).norm() <= 1e-9 * norm);
    CHECK((p.left.transpose() * m - p.eigenvalue * p.left.transpose()).norm() <= 1e-9 * norm);
    CHECK(p.right.minCoeff() > 0.0);
    CHECK(p.left.minCoeff() > 0.0);
    CHECK(std::abs(p.left.dot(p.right) - 1.0) <= 1e-12);
    CHECK(p.eigenvalue == doctest::Approx(reference_abscissa(m)).epsilon(1e-9));

    // Shift equivariance.
    const double shift = diag(rng);
    const Eigen::MatrixXd shifted = m + shift * Eigen::MatrixXd::Identity(n, n);
    CHECK(std::abs(dominant_eigen(shifted).eigenvalue - (p.eigenvalue + shift)) <= 1e-10 * std::max(1.0, std::abs(p.eigenvalue)));
  }
}

TEST_CASE("r_D of a generator is zero with the stationary law as left vector") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 2 + trial % 6;
    const Eigen::MatrixXd g = mmtail::testing::random_sparse_generator(rng, n);
    const PerronData p = dominant_eigen(g);
    CHECK(std::abs(p.eigenvalue) <= 1e-10);
    // Stationary law: null vector of G' normalized to sum 1.
    Eigen::MatrixXd sys = g.transpose();
    sys.row(n - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs(n - 1) = 1.0;
    const Eigen::VectorXd pi = sys.partialPivLu().solve(rhs);
    const Eigen::VectorXd y = p.left / p.left.sum();
    CHECK((y - pi).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(p.right.maxCoeff() - p.right.minCoeff() < 1e-9 * p.right.maxCoeff());
  }
}

TEST_CASE("dominant_eigen rejects invalid input") {
  try {
    dominant_eigen(mat2(-1, -0.5, 1, -1));
    FAIL("expected NotMetzler");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotMetzler);
  }
  try {
    dominant_eigen(mat2(-1, 1, 0, -1));
    FAIL("expected NotIrreducible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotIrreducible);
  }
  CHECK(is_metzler(mat2(-5, 0, 1e-13 * 0, -1)));
  CHECK_FALSE(is_metzler(mat2(-5, -1e-11, 0, -1)));
}

TEST_CASE("solve_alpha closed forms") {
  CHECK(solve_alpha(LaplaceExponent(brownian(0.0, 1.0)), 0.5) == doctest::Approx(1.0).epsilon(1e-12));

  // r_D(A(-alpha)) = -mu alpha + sigma^2 alpha^2 / 2 = c.
  const double mu = -0.2;
  const double var = 1.0;
  const double c = 0.3;
  const double alpha = solve_alpha(LaplaceExponent(brownian(mu, var)), c);
  const double closed = (mu + std::sqrt(mu * mu + 2.0 * var * c)) / var;
  CHECK(std::abs(alpha - closed) < 1e-8);

  // The paper's quadratic root, for the exponent of -X.
  const double dual = solve_alpha(LaplaceExponent(brownian(-mu, var)), c);
  CHECK(std::abs(dual - (-mu + std::sqrt(mu * mu + 2.0 * var * c)) / var) < 1e-8);
}

TEST_CASE("solve_alpha agrees with a tabulated grid inversion") {
  const LaplaceExponent a(two_regime());
  const double c = 0.5;
  const double alpha = solve_alpha(a, c);

  // g on a uniform grid of 1e5 points over [0, 4], inverted by linear
  // interpolation on the increasing branch.
  const int n = 100000;
  const double hi = 4.0;
  std::vector<double> xs(n + 1);
  std::vector<double> gs(n + 1);
  for (int i = 0; i <= n; ++i) {
    xs[i] = hi * i / n;
    const Eigen::MatrixXd m = a(-xs[i]);
    gs[i] = Eigen::EigenSolver<Eigen::MatrixXd>(m).eigenvalues().real().maxCoeff();
  }
  double oracle = NAN;
  for (int i = 0; i < n; ++i) {
    if (gs[i] < c && gs[i + 1] >= c) {
      oracle = xs[i] + (c - gs[i]) * (xs[i + 1] - xs[i]) / (gs[i + 1] - gs[i]);
      break;
    }
  }
  CHECK(std::abs(alpha - oracle) < 1e-8);
  CHECK(std::abs(dominant_eigenvalue_at(a, -alpha) - c) <= 1e-10);
}

TEST_CASE("solve_alpha errors") {
  const LaplaceExponent a(brownian(0.0, 1.0));
  try {
    solve_alpha(a, 0.0);
    FAIL("expected DegenerateTarget");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateTarget);
  }
  try {
    solve_alpha(a, 2000.0, 50.0);
    FAIL("expected NoSolution");
  } catch (const NoSolutionError& e) {
    CHECK(e.code() == ErrorCode::NoSolution);
    CHECK(e.g_at_cap() == doctest::Approx(1250.0));
    CHECK(std::string(e.what()).find("1250") != std::string::npos);
  }
  // Drift-dominated: g(alpha) = 2 alpha + alpha^2 / 2 never reaches ... it
  // does; a pure negative drift with no variance makes g(alpha) = -alpha < 0.
  try {
    solve_alpha(LaplaceExponent(brownian(1.0, 0.0)), 0.1);
    FAIL("expected NoSolution");
  } catch (const NoSolutionError& e) {
    CHECK(e.g_at_cap() < 0.0);
  }
}

TEST_CASE("g has a single crossing whenever solve_alpha succeeds") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> target(0.05, 2.0);
  int solved = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const LaplaceExponent a(mmtail::testing::random_model(rng, 2 + trial % 3));
    const double c = target(rng);
    double alpha = 0.0;
    try {
      alpha = solve_alpha(a, c, 20.0);
    } catch (const NoSolutionError&) {
      continue;
    }
    ++solved;
    int crossings = 0;
    double prev = dominant_eigenvalue_at(a, 0.0) - c;
    for (int i = 1; i <= 400; ++i) {
      const double g = dominant_eigenvalue_at(a, -20.0 * i / 400) - c;
      if ((prev < 0.0) != (g < 0.0)) ++crossings;
      prev = g;
    }
    CHECK(crossings == 1);
    CHECK(std::abs(dominant_eigenvalue_at(a, -alpha) - c) <= 1e-10 * std::max(1.0, c));
  }
  CHECK(solved > 20);
}

TEST_CASE("convexity of alpha -> r_D(A(-alpha)) on random models") {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 200; ++trial) {
    const LaplaceExponent a(mmtail::testing::random_model(rng, 1 + trial % 5));
    const int n = 100;
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) g[i] = dominant_eigenvalue_at(a, -4.0 * i / (n - 1));
    for (int i = 1; i + 1 < n; ++i) CHECK(g[i - 1] - 2.0 * g[i] + g[i + 1] >= -1e-8);
  }
}

TEST_CASE("resolvent residue closed forms") {
  const LaplaceExponent a(brownian(0.0, 1.0));
  const ResidueData r1 = resolvent_residue(a, 1.0, 0.5);
  CHECK(r1.xi == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r1.residue(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r1.pole == -1.0);
  const ResidueData r2 = resolvent_residue(a, 2.0, 2.0);
  CHECK(r2.xi == doctest::Approx(0.5).epsilon(1e-12));

  try {
    resolvent_residue(a, 1.0, 0.7);
    FAIL("expected DomainViolation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DomainViolation);
  }
}

TEST_CASE("resolvent residue matches the numerical limit") {
  for (const ModulatedModel& model : {two_regime(), mmtail::testing::jump_model()}) {
    const LaplaceExponent a(model);
    const double eta = 0.5;
    const double alpha = solve_alpha(a, eta);
    const ResidueData res = resolvent_residue(a, alpha, eta);
    CHECK(res.xi > 0.0);
    const Eigen::Index n = model.size();
    const Eigen::MatrixXd rank_one = res.xi * res.perron.right * res.perron.left.transpose();
    CHECK((res.residue - rank_one).norm() <= 1e-10 * res.residue.norm());
    double last_error = INFINITY;
    for (int k = 4; k <= 7; ++k) {
      const double h = std::pow(10.0, -k);
      const Eigen::MatrixXd resolvent =
          (eta * Eigen::MatrixXd::Identity(n, n) - a(-alpha + h)).inverse();
      last_error = (h * resolvent - res.residue).cwiseAbs().maxCoeff();
    }
    CHECK(last_error < 1e-4);
  }
}

TEST_CASE("uniqueness scan") {
  const LaplaceExponent bm(brownian(0.0, 1.0));
  const std::vector<double> grid{-5.0, -1.0, -0.5, 0.5, 1.0, 5.0};
  CHECK(uniqueness_scan(bm, 1.0, grid));

  // Compound Poisson with Gaussian jumps and diffusion.
  const ModulatedModel cp({RegimeExponent{0.0, 0.5, 1.0, GaussianJump{0.1, 0.3}}},
                          Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1));
  const LaplaceExponent cpa(cp);
  const double alpha = solve_alpha(cpa, 0.4);
  CHECK(uniqueness_scan(cpa, alpha, default_beta_grid(cp)));
  CHECK(uniqueness_scan(cpa, alpha, grid));

  // Lattice: psi(z) = e^z - 1 is 2 pi i periodic.
  const ModulatedModel lattice({RegimeExponent{0.0, 0.0, 1.0, DegenerateJump{1.0}}},
                               Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1));
  const LaplaceExponent la(lattice);
  const std::vector<double> period{2.0 * std::numbers::pi};
  const double lattice_alpha = solve_alpha(LaplaceExponent(lattice.negated()), 0.5);
  CHECK_FALSE(uniqueness_scan(LaplaceExponent(lattice.negated()), lattice_alpha, period));
  const std::vector<double> defaults = default_beta_grid(lattice);
  CHECK(std::find_if(defaults.begin(), defaults.end(), [](double b) {
          return std::abs(b - 2.0 * std::numbers::pi) < 1e-12;
        }) != defaults.end());
  CHECK_FALSE(uniqueness_scan(la, 0.3, defaults));
}
