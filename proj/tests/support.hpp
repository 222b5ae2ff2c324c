#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mmtail/erlang.hpp"
#include "mmtail/process.hpp"
#include "mmtail/timing.hpp"

namespace mmtail::testing {

inline ModulatedModel brownian(double drift, double variance) {
  return ModulatedModel({RegimeExponent{drift, variance, 0.0, DegenerateJump{0.0}}},
                        Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1));
}

// G = [[-1, 1], [1, -1]], regimes BM(-0.1, 1) and BM(0.1, 0.25), w0 uniform.
inline ModulatedModel two_regime() {
  Eigen::MatrixXd g(2, 2);
  g << -1.0, 1.0, 1.0, -1.0;
  return ModulatedModel({RegimeExponent{-0.1, 1.0, 0.0, DegenerateJump{0.0}},
                         RegimeExponent{0.1, 0.25, 0.0, DegenerateJump{0.0}}},
                        g, Eigen::VectorXd::Constant(2, 0.5));
}

// Two regimes with compound Poisson jumps of every law and switch jumps.
inline ModulatedModel jump_model() {
  Eigen::MatrixXd g(2, 2);
  g << -0.7, 0.7, 1.3, -1.3;
  std::vector<std::vector<TransitionJump>> jumps(2, std::vector<TransitionJump>(2));
  jumps[0][1] = TransitionJump{0.5, GaussianJump{0.2, 0.1}};
  jumps[1][0] = TransitionJump{0.3, TwoPointJump{-0.4, 0.3, 0.5}};
  return ModulatedModel({RegimeExponent{-0.05, 0.3, 0.8, GaussianJump{-0.1, 0.2}},
                         RegimeExponent{0.02, 0.1, 0.5, TwoPointJump{0.25, -0.3, 0.4}}},
                        g, jumps, Eigen::VectorXd((Eigen::VectorXd(2) << 0.3, 0.7).finished()));
}

inline IncidenceTiming geometric(double p) { return IncidenceTiming{{p}, {1.0}, 1, 1.0}; }

// Irreducible generator with all off-diagonal rates in [0.1, 2].
template <typename Rng>
Eigen::MatrixXd random_generator(Rng& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> rate(0.1, 2.0);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (j != k) g(j, k) = rate(rng);
    }
    g(j, j) = -(g.row(j).sum());
  }
  return g;
}

// Sparse irreducible generator: a directed cycle plus random chords.
template <typename Rng>
Eigen::MatrixXd random_sparse_generator(Rng& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> rate(0.05, 3.0);
  std::bernoulli_distribution chord(0.3);
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (n > 1) g(j, (j + 1) % n) = rate(rng);
    for (Eigen::Index k = 0; k < n; ++k) {
      if (k != j && k != (j + 1) % n && chord(rng)) g(j, k) = rate(rng);
    }
    g(j, j) = 0.0;
    g(j, j) = -(g.row(j).sum());
  }
  return g;
}

template <typename Rng>
JumpLaw random_jump(Rng& rng) {
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_real_distribution<double> size(-0.5, 0.5);
  std::uniform_real_distribution<double> var(0.0, 0.3);
  std::uniform_real_distribution<double> prob(0.0, 1.0);
  switch (kind(rng)) {
    case 0: return DegenerateJump{size(rng)};
    case 1: return GaussianJump{size(rng), var(rng)};
    default: return TwoPointJump{size(rng), size(rng), prob(rng)};
  }
}

// Random model with diffusion in every regime (nonlattice).
template <typename Rng>
ModulatedModel random_model(Rng& rng, Eigen::Index n, bool with_jumps = true) {
  std::uniform_real_distribution<double> drift(-0.5, 0.5);
  std::uniform_real_distribution<double> var(0.1, 1.5);
  std::uniform_real_distribution<double> intensity(0.0, 1.0);
  std::uniform_real_distribution<double> prob(0.0, 1.0);
  std::vector<RegimeExponent> regimes;
  for (Eigen::Index j = 0; j < n; ++j) {
    RegimeExponent r{drift(rng), var(rng), 0.0, DegenerateJump{0.0}};
    if (with_jumps) {
      r.jump_intensity = intensity(rng);
      r.jump = random_jump(rng);
    }
    regimes.push_back(r);
  }
  const Eigen::MatrixXd g = random_generator(rng, n);
  std::vector<std::vector<TransitionJump>> jumps(
      static_cast<std::size_t>(n), std::vector<TransitionJump>(static_cast<std::size_t>(n)));
  if (with_jumps) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index k = 0; k < n; ++k) {
        if (j != k) jumps[j][k] = TransitionJump{prob(rng), random_jump(rng)};
      }
    }
  }
  Eigen::VectorXd w0(n);
  for (Eigen::Index j = 0; j < n; ++j) w0(j) = prob(rng) + 0.05;
  w0 /= w0.sum();
  return ModulatedModel(std::move(regimes), g, std::move(jumps), w0);
}

// Density of a sum of exponential stages by repeated convolution on the grid
// t_i = i h. Each stage solves g' = a (f - g) exactly for piecewise-linear f.
inline std::vector<double> convolve_stages(const std::vector<double>& stage_rates,
                                           double h, std::size_t points) {
  std::vector<double> f(points);
  for (std::size_t i = 0; i < points; ++i) {
    f[i] = stage_rates.front() * std::exp(-stage_rates.front() * h * static_cast<double>(i));
  }
  std::vector<double> g(points);
  for (std::size_t s = 1; s < stage_rates.size(); ++s) {
    const double a = stage_rates[s];
    const double x = a * h;
    const double e = std::exp(-x);
    // Weights of f(t_i) and f(t_{i+1}) in a int_0^h e^{-a(h-u)} f(t_i + u) du.
    const double w1 = (x - 1.0 + e) / x;
    const double w0 = (1.0 - e) - w1;
    g[0] = 0.0;
    for (std::size_t i = 0; i + 1 < points; ++i) {
      g[i + 1] = e * g[i] + w0 * f[i] + w1 * f[i + 1];
    }
    f.swap(g);
  }
  return f;
}

// Richardson combination of the grid convolution at steps h and h/2.
inline std::vector<double> convolution_density(const std::vector<double>& stage_rates,
                                               double t_max, double h) {
  const auto n = static_cast<std::size_t>(std::llround(t_max / h));
  const std::vector<double> coarse = convolve_stages(stage_rates, h, n + 1);
  const std::vector<double> fine = convolve_stages(stage_rates, h / 2.0, 2 * n + 1);
  std::vector<double> out(n + 1);
  for (std::size_t i = 0; i <= n; ++i) out[i] = (4.0 * fine[2 * i] - coarse[i]) / 3.0;
  return out;
}

// Random well-conditioned Erlang blocks: rates in [0.1, 10], total shape <= max_shape.
template <typename Rng>
std::vector<RateBlock> random_blocks(Rng& rng, int max_shape) {
  std::uniform_real_distribution<double> rate(0.1, 10.0);
  std::uniform_int_distribution<int> total(1, max_shape);
  for (;;) {
    const int shape = total(rng);
    std::uniform_int_distribution<int> blocks(1, shape);
    const int d = blocks(rng);
    std::vector<int> mult(static_cast<std::size_t>(d), 1);
    std::uniform_int_distribution<int> pick(0, d - 1);
    for (int extra = shape - d; extra > 0; --extra) ++mult[static_cast<std::size_t>(pick(rng))];
    std::vector<double> rates;
    for (int k = 0; k < d; ++k) rates.push_back(rate(rng));
    std::sort(rates.begin(), rates.end());
    std::vector<RateBlock> out;
    for (int k = 0; k < d; ++k) out.push_back({rates[k], mult[k]});
    const ErlangSpec spec(out);
    if (spec.ill_conditioned()) continue;
    // Cancellation in the signed gamma mixture: keep sum |c_{k,l}| / a_k^l <= 1e6.
    double magnitude = 0.0;
    for (std::size_t k = 0; k < out.size(); ++k) {
      for (int l = 1; l <= out[k].multiplicity; ++l) {
        magnitude += std::abs(spec.coefficient(k, l)) / std::pow(out[k].rate, l);
      }
    }
    if (magnitude <= 1e6) return out;
  }
}

inline std::vector<double> expand_blocks(const std::vector<RateBlock>& blocks) {
  std::vector<double> out;
  for (const auto& b : blocks) out.insert(out.end(), static_cast<std::size_t>(b.multiplicity), b.rate);
  return out;
}

// Composite Simpson rule on [a, b] with an even number of panels.
template <typename F>
double simpson(F&& f, double a, double b, int panels) {
  if (panels % 2 != 0) ++panels;
  const double h = (b - a) / panels;
  double total = f(a) + f(b);
  for (int i = 1; i < panels; ++i) total += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
  return total * h / 3.0;
}

}  // namespace mmtail::testing
