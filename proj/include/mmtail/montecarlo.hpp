#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mmtail/process.hpp"
#include "mmtail/random.hpp"
#include "mmtail/timing.hpp"

namespace mmtail {

struct TradeDraw {
  double time = 0.0;
  std::size_t type = 0;
};

struct PriceDraw {
  double log_price = 0.0;  // X_T
  double time = 0.0;       // T
};

/// Realized-price draws with their provenance. Samples are ordered by stream
/// index, then by position within the stream.
struct SampleBatch {
  std::vector<double> log_prices;
  std::vector<double> trade_times;
  std::vector<std::uint32_t> stream_index;
  std::uint64_t seed = 0;
  std::uint32_t streams = 1;
  std::string timing_tag;

  std::size_t count() const noexcept { return log_prices.size(); }
};

/// Exact sampler of X_t for a fixed model: Exp(-g_jj) sojourns, Gaussian
/// diffusion increments, Poisson jump counts, and switch jumps.
class PathSampler {
 public:
  explicit PathSampler(const ModulatedModel& model);

  double sample(double t, Philox4x32& rng) const;

 private:
  struct RegimeTable {
    double drift;
    double volatility;
    double jump_intensity;
    JumpLaw jump;
    double exit_rate;
    std::vector<double> next_cumulative;  // embedded-chain CDF over k
  };

  std::vector<RegimeTable> regimes_;
  std::vector<double> initial_cumulative_;
  std::vector<std::vector<TransitionJump>> switch_jumps_;
};

double sample_jump(const JumpLaw& law, Philox4x32& rng);
// Sum of `count` iid draws from `law`.
double sample_jump_sum(const JumpLaw& law, std::uint64_t count, Philox4x32& rng);
double sample_exponential(double rate, Philox4x32& rng);

TradeDraw sample_trade_time(const TimingModel& timing, Philox4x32& rng);

double sample_X_at(const ModulatedModel& model, double t, Philox4x32& rng);

PriceDraw sample_realized_price(const ModulatedModel& model,
                                const TimingModel& timing, Philox4x32& rng);

/// `count` draws of (X_T, T) split across `streams` substreams keyed by
/// (seed, stream index). Output is independent of `threads`
/// (0 = hardware concurrency).
SampleBatch run_batch(const ModulatedModel& model, const TimingModel& timing,
                      std::uint64_t count, std::uint64_t seed,
                      std::uint32_t streams, unsigned threads = 0);

}  // namespace mmtail
