#include "mmtail/erlang.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace mmtail {

namespace {

bool rates_match(double a, double b) {
  return std::abs(a - b) <= kRateMergeTol * std::max(std::abs(a), std::abs(b));
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double out = 1.0;
  for (int i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

}  // namespace

std::vector<RateBlock> merge_rates(std::span<const double> rates) {
  if (rates.empty()) throw Error(ErrorCode::EmptyInput, "no rates to merge");
  std::vector<double> sorted(rates.begin(), rates.end());
  for (const double r : sorted) {
    if (!(r > 0.0) || !std::isfinite(r)) {
      throw Error(ErrorCode::InvalidTiming,
                  "rates must be positive and finite, got " + std::to_string(r));
    }
  }
  std::sort(sorted.begin(), sorted.end());
  std::vector<RateBlock> out;
  for (const double r : sorted) {
    if (!out.empty() && rates_match(out.back().rate, r)) {
      ++out.back().multiplicity;
    } else {
      out.push_back({r, 1});
    }
  }
  return out;
}

std::vector<std::vector<double>> erlang_coefficients(
    std::span<const RateBlock> blocks) {
  if (blocks.empty()) throw Error(ErrorCode::EmptyInput, "no Erlang blocks");
  int total_shape = 0;
  for (const auto& b : blocks) {
    if (b.multiplicity < 1) {
      throw Error(ErrorCode::InvalidTiming, "Erlang shapes must be >= 1");
    }
    total_shape += b.multiplicity;
  }
  if (total_shape > kMaxTotalShape) {
    throw Error(ErrorCode::ShapeCapExceeded,
                "total Erlang shape " + std::to_string(total_shape) +
                    " exceeds cap " + std::to_string(kMaxTotalShape));
  }
  const std::size_t d = blocks.size();
  for (std::size_t i = 0; i + 1 < d; ++i) {
    if (!(blocks[i].rate < blocks[i + 1].rate) ||
        rates_match(blocks[i].rate, blocks[i + 1].rate)) {
      throw Error(ErrorCode::InvalidTiming,
                  "Erlang rates must be distinct and increasing");
    }
  }

  double prefactor = 1.0;
  for (const auto& b : blocks) prefactor *= std::pow(b.rate, b.multiplicity);

  std::vector<std::vector<double>> table(d);
  for (std::size_t k = 0; k < d; ++k) {
    const double ak = blocks[k].rate;
    const int bk = blocks[k].multiplicity;
    table[k].assign(static_cast<std::size_t>(bk), 0.0);
    for (int l = 1; l <= bk; ++l) {
      const int budget = bk - l;
      // Sum over (d_m)_{m != k} >= 0 with sum d_m = budget.
      double sum = 0.0;
      std::function<void(std::size_t, int, double)> visit =
          [&](std::size_t m, int remaining, double product) {
            if (m == d) {
              if (remaining == 0) sum += product;
              return;
            }
            if (m == k) {
              visit(m + 1, remaining, product);
              return;
            }
            const double gap = blocks[m].rate - ak;
            const int bm = blocks[m].multiplicity;
            for (int dm = 0; dm <= remaining; ++dm) {
              const double term = binomial(bm + dm - 1, dm) /
                                  std::pow(gap, bm + dm);
              visit(m + 1, remaining - dm, product * term);
            }
          };
      visit(0, budget, 1.0);
      const double sign = (budget % 2 == 0) ? 1.0 : -1.0;
      table[k][static_cast<std::size_t>(l - 1)] = prefactor * sign * sum;
    }
  }
  return table;
}

ErlangSpec::ErlangSpec(std::vector<RateBlock> blocks)
    : blocks_(std::move(blocks)), coefficients_(erlang_coefficients(blocks_)) {
  const double max_rate = blocks_.back().rate;
  for (std::size_t i = 0; i + 1 < blocks_.size(); ++i) {
    if (blocks_[i + 1].rate - blocks_[i].rate < 1e-3 * max_rate) {
      ill_conditioned_ = true;
    }
  }
}

ErlangSpec ErlangSpec::from_rates(std::span<const double> rates) {
  return ErlangSpec(merge_rates(rates));
}

std::optional<std::size_t> ErlangSpec::find_rate(double rate) const {
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    if (rates_match(blocks_[k].rate, rate)) return k;
  }
  return std::nullopt;
}

int ErlangSpec::total_shape() const noexcept {
  int total = 0;
  for (const auto& b : blocks_) total += b.multiplicity;
  return total;
}

double ErlangSpec::mean() const noexcept {
  double m = 0.0;
  for (const auto& b : blocks_) m += b.multiplicity / b.rate;
  return m;
}

double ErlangSpec::density(double t) const {
  if (!(t > 0.0)) return 0.0;
  double f = 0.0;
  for (std::size_t k = 0; k < blocks_.size(); ++k) {
    const double decay = std::exp(-blocks_[k].rate * t);
    double kernel = 1.0;  // t^{l-1}/(l-1)!
    for (int l = 1; l <= blocks_[k].multiplicity; ++l) {
      if (l > 1) kernel *= t / (l - 1);
      f += coefficients_[k][static_cast<std::size_t>(l - 1)] * kernel * decay;
    }
  }
  return std::max(0.0, f);
}

}  // namespace mmtail
