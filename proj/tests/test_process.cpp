#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "mmtail/error.hpp"
#include "mmtail/matrix_functions.hpp"
#include "mmtail/process.hpp"
#include "support.hpp"

using namespace mmtail;
using mmtail::testing::brownian;
using mmtail::testing::two_regime;

namespace {

template <typename F>
void require_code(ErrorCode code, F&& f) {
  try {
    f();
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == code);
  }
}

std::string error_message(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("levy exponent of a Brownian regime") {
  const RegimeExponent bm{0.0, 1.0, 0.0, DegenerateJump{0.0}};
  CHECK(levy_exponent(bm, 2.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(levy_exponent(bm, 0.0) == 0.0);
  const RegimeExponent any{0.3, 0.7, 2.0, TwoPointJump{0.5, -1.0, 0.3}};
  CHECK(levy_exponent(any, 0.0) == 0.0);
  CHECK(levy_exponent(any, Complex(0.0, 0.0)) == Complex(0.0, 0.0));
}

TEST_CASE("levy exponent with Gaussian jumps matches a sample average") {
  const RegimeExponent cp{0.0, 0.0, 1.0, GaussianJump{0.0, 1.0}};
  CHECK(levy_exponent(cp, 1.0) == doctest::Approx(std::exp(0.5) - 1.0).epsilon(1e-14));

  std::mt19937_64 rng(11);
  std::normal_distribution<double> u;
  const int n = 1'000'000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double v = std::exp(u(rng));
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum2 / n - mean * mean) / n);
  CHECK(std::abs(mean - 1.0 - levy_exponent(cp, 1.0)) < 3.0 * se);
}

TEST_CASE("jump exponent derivatives match finite differences") {
  const std::vector<RegimeExponent> regimes{
      {0.2, 0.5, 1.5, DegenerateJump{-0.3}},
      {-0.1, 0.2, 0.7, GaussianJump{0.1, 0.4}},
      {0.0, 1.0, 2.0, TwoPointJump{0.4, -0.6, 0.35}}};
  for (const auto& r : regimes) {
    for (const double z : {-2.0, -0.5, 0.0, 0.7, 1.9}) {
      const double h = 1e-6;
      const double fd = (levy_exponent(r, z + h) - levy_exponent(r, z - h)) / (2 * h);
      CHECK(levy_exponent_derivative(r, z) == doctest::Approx(fd).epsilon(1e-7));
    }
  }
}

TEST_CASE("matrix Laplace exponent examples") {
  const ModulatedModel model = two_regime();
  const LaplaceExponent a(model);
  CHECK((a(0.0) - model.generator()).cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd expected(2, 2);
  expected << -1.0 + (-0.1 + 0.5), 1.0, 1.0, -1.0 + (0.1 + 0.125);
  CHECK((a(1.0) - expected).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(a(1.0)(0, 0) == doctest::Approx(-0.6));
  CHECK(a(1.0)(1, 1) == doctest::Approx(-0.775));

  const ModulatedModel scalar = brownian(0.0, 1.0);
  CHECK(LaplaceExponent(scalar)(3.0)(0, 0) == doctest::Approx(4.5));

  const ModulatedModel jumps = mmtail::testing::jump_model();
  CHECK((LaplaceExponent(jumps)(0.0) - jumps.generator()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("A(z) derivative matches finite differences entrywise") {
  const LaplaceExponent a(mmtail::testing::jump_model());
  for (const double z : {-1.5, -0.3, 0.4, 1.2}) {
    const double h = 1e-6;
    const Eigen::MatrixXd fd = (a(z + h) - a(z - h)) / (2 * h);
    CHECK((a.derivative(z) - fd).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("A(s) is Metzler with the zero pattern of G") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 2 + trial % 5;
    const Eigen::MatrixXd g = mmtail::testing::random_sparse_generator(rng, n);
    std::vector<RegimeExponent> regimes(static_cast<std::size_t>(n),
                                        RegimeExponent{0.1, 0.5, 0.3, GaussianJump{0.0, 0.2}});
    std::vector<std::vector<TransitionJump>> jumps(
        static_cast<std::size_t>(n), std::vector<TransitionJump>(static_cast<std::size_t>(n)));
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index k = 0; k < n; ++k) {
        if (j != k) jumps[j][k] = TransitionJump{0.4, mmtail::testing::random_jump(rng)};
      }
    }
    const ModulatedModel model(regimes, g, jumps, Eigen::VectorXd::Constant(n, 1.0 / n));
    const LaplaceExponent a(model);
    for (const double s : {-3.0, -0.7, 0.0, 0.9, 2.5}) {
      const Eigen::MatrixXd m = a(s);
      for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index k = 0; k < n; ++k) {
          if (j == k) continue;
          CHECK(m(j, k) >= 0.0);
          CHECK((m(j, k) == 0.0) == (g(j, k) == 0.0));
        }
      }
    }
  }
}

TEST_CASE("A at conjugate arguments is the entrywise conjugate") {
  const LaplaceExponent a(mmtail::testing::jump_model());
  for (const Complex z : {Complex(-0.5, 1.3), Complex(0.8, -2.2), Complex(0.0, 7.0)}) {
    const Eigen::MatrixXcd lhs = a(std::conj(z));
    const Eigen::MatrixXcd rhs = a(z).conjugate();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("matrix exponential with derivative: closed forms") {
  const Eigen::MatrixXd zero = Eigen::MatrixXd::Zero(3, 3);
  const Eigen::MatrixXd ident = Eigen::MatrixXd::Identity(3, 3);
  const auto [e0, d0] = expm_with_derivative(zero, ident);
  CHECK((e0 - ident).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((d0 - ident).cwiseAbs().maxCoeff() < 1e-15);

  Eigen::MatrixXd m(1, 1);
  m << std::log(2.0);
  Eigen::MatrixXd d(1, 1);
  d << 3.0;
  const auto [e1, d1] = expm_with_derivative(m, d);
  CHECK(e1(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(d1(0, 0) == doctest::Approx(6.0).epsilon(1e-14));
}

TEST_CASE("matrix exponential agrees with an independent implementation") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 1 + trial % 6;
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n * n; ++i) m.data()[i] = (trial % 3 + 1) * z(rng);
    const Eigen::MatrixXd ours = expm(m);
    const Eigen::MatrixXd ref = m.exp();
    CHECK((ours - ref).norm() <= 1e-12 * ref.norm());
  }
}

TEST_CASE("derivative of exp at G along G matches central differences") {
  const Eigen::MatrixXd g = two_regime().generator();
  const auto [e, d] = expm_with_derivative(g, g);
  const double h = 1e-6;
  const Eigen::MatrixXd fd = (expm(Eigen::MatrixXd(g + h * g)) - expm(Eigen::MatrixXd(g - h * g))) / (2 * h);
  CHECK((d - fd).cwiseAbs().maxCoeff() < 1e-8);
  // Commuting direction: d/dt exp(G + tG) = G exp(G).
  CHECK((d - g * e).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("derivative block agrees with central differences on random Metzler pairs") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> off(0.0, 1.0);
  std::uniform_real_distribution<double> diag(-3.0, 0.5);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::MatrixXd m(4, 4);
    Eigen::MatrixXd d(4, 4);
    for (int j = 0; j < 4; ++j) {
      for (int k = 0; k < 4; ++k) {
        m(j, k) = j == k ? diag(rng) : off(rng);
        d(j, k) = j == k ? diag(rng) : off(rng);
      }
    }
    const auto [e, deriv] = expm_with_derivative(m, d);
    const double h = 1e-6;
    const Eigen::MatrixXd fd =
        (expm(Eigen::MatrixXd(m + h * d)) - expm(Eigen::MatrixXd(m - h * d))) / (2 * h);
    CHECK((deriv - fd).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("matrix exponential overflow cap") {
  Eigen::MatrixXd m(1, 1);
  m << 701.0;
  require_code(ErrorCode::Overflow, [&] { expm(m); });
  CHECK_NOTHROW(expm(m, 800.0));
  m << 699.0;
  CHECK(std::isfinite(expm(m)(0, 0)));
  m << std::nan("");
  require_code(ErrorCode::Overflow, [&] { expm(m); });
}

TEST_CASE("fixed-time MGF") {
  const ModulatedModel model = two_regime();
  CHECK(mgf_at_time(model, 0.0, 5.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mgf_at_time(mmtail::testing::jump_model(), 0.0, 3.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(mgf_at_time(brownian(0.0, 1.0), 1.0, 2.0) == doctest::Approx(std::exp(1.0)).epsilon(1e-14));

  // Semigroup: w0' e^{A t/2} e^{A t/2} 1.
  for (const double s : {-0.8, 0.3, 1.1}) {
    for (const double t : {0.5, 2.0, 7.0}) {
      const Eigen::MatrixXd half = expm(Eigen::MatrixXd(LaplaceExponent(model)(s) * (t / 2)));
      const double split = model.initial().dot((half * half).rowwise().sum());
      CHECK(std::abs(mgf_at_time(model, s, t) - split) <= 1e-10 * split);
      CHECK(mgf_at_time(model, s, t) > 0.0);
    }
  }
}

TEST_CASE("model validation reports field paths") {
  Eigen::MatrixXd g(2, 2);
  g << -1.0, 1.0, 1.0, -1.0;
  const RegimeExponent ok{0.0, 1.0, 0.0, DegenerateJump{0.0}};
  const Eigen::VectorXd w0 = Eigen::VectorXd::Constant(2, 0.5);

  CHECK(error_message([&] {
          ModulatedModel({ok, RegimeExponent{0.0, -1.0, 0.0, DegenerateJump{0.0}}}, g, w0);
        }).find("model.regimes[1].variance") != std::string::npos);
  CHECK(error_message([&] {
          ModulatedModel({RegimeExponent{0.0, 1.0, -0.5, DegenerateJump{0.0}}, ok}, g, w0);
        }).find("model.regimes[0].jump_intensity") != std::string::npos);
  CHECK(error_message([&] {
          ModulatedModel({RegimeExponent{0.0, 1.0, 1.0, GaussianJump{0.0, -1.0}}, ok}, g, w0);
        }).find("model.regimes[0]") != std::string::npos);

  Eigen::MatrixXd bad_rows = g;
  bad_rows(0, 0) = -0.9;
  require_code(ErrorCode::InvalidModel, [&] { ModulatedModel({ok, ok}, bad_rows, w0); });

  Eigen::MatrixXd negative = g;
  negative(0, 1) = -1.0;
  negative(0, 0) = 1.0;
  CHECK(error_message([&] { ModulatedModel({ok, ok}, negative, w0); })
            .find("model.generator[0][1]") != std::string::npos);

  Eigen::MatrixXd reducible(2, 2);
  reducible << -1.0, 1.0, 0.0, 0.0;
  require_code(ErrorCode::InvalidModel, [&] { ModulatedModel({ok, ok}, reducible, w0); });

  Eigen::VectorXd bad_w0(2);
  bad_w0 << 0.7, 0.7;
  require_code(ErrorCode::InvalidModel, [&] { ModulatedModel({ok, ok}, g, bad_w0); });
  bad_w0 << 1.2, -0.2;
  require_code(ErrorCode::InvalidModel, [&] { ModulatedModel({ok, ok}, g, bad_w0); });

  std::vector<std::vector<TransitionJump>> diag_jump(2, std::vector<TransitionJump>(2));
  diag_jump[0][0] = TransitionJump{0.5, DegenerateJump{1.0}};
  require_code(ErrorCode::InvalidModel, [&] { ModulatedModel({ok, ok}, g, diag_jump, w0); });

  std::vector<std::vector<TransitionJump>> bad_prob(2, std::vector<TransitionJump>(2));
  bad_prob[0][1] = TransitionJump{1.5, DegenerateJump{1.0}};
  require_code(ErrorCode::InvalidModel, [&] { ModulatedModel({ok, ok}, g, bad_prob, w0); });

  std::vector<RegimeExponent> too_many(65, ok);
  require_code(ErrorCode::InvalidModel, [&] {
    ModulatedModel(too_many, Eigen::MatrixXd::Zero(65, 65), Eigen::VectorXd::Constant(65, 1.0 / 65));
  });
}

TEST_CASE("irreducibility check") {
  Eigen::MatrixXd cycle = Eigen::MatrixXd::Zero(3, 3);
  cycle(0, 1) = cycle(1, 2) = cycle(2, 0) = 1.0;
  CHECK(is_irreducible(cycle));
  Eigen::MatrixXd chain = Eigen::MatrixXd::Zero(3, 3);
  chain(0, 1) = chain(1, 2) = 1.0;
  CHECK_FALSE(is_irreducible(chain));
  CHECK(is_irreducible(Eigen::MatrixXd::Zero(1, 1)));
}

TEST_CASE("negated model has exponent A(-z)") {
  const ModulatedModel model = mmtail::testing::jump_model();
  const LaplaceExponent a(model);
  const LaplaceExponent dual(model.negated());
  for (const double z : {-1.7, -0.2, 0.6, 2.1}) {
    CHECK((dual(z) - a(-z)).cwiseAbs().maxCoeff() < 1e-13);
  }
}
