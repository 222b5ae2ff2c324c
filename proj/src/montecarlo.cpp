#include "mmtail/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "mmtail/error.hpp"

namespace mmtail {

namespace {

std::size_t pick(const std::vector<double>& cumulative, double u) {
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  const auto idx = static_cast<std::size_t>(it - cumulative.begin());
  return std::min(idx, cumulative.size() - 1);
}

std::vector<double> cumulative_of(const std::vector<double>& weights) {
  std::vector<double> out(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    out[i] = acc;
  }
  for (auto& v : out) v /= acc;
  return out;
}

}  // namespace

double sample_exponential(double rate, Philox4x32& rng) {
  return -std::log(rng.uniform()) / rate;
}

double sample_jump(const JumpLaw& law, Philox4x32& rng) {
  return sample_jump_sum(law, 1, rng);
}

double sample_jump_sum(const JumpLaw& law, std::uint64_t count,
                       Philox4x32& rng) {
  if (count == 0) return 0.0;
  const double n = static_cast<double>(count);
  return std::visit(
      [&](const auto& j) -> double {
        using J = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<J, DegenerateJump>) {
          return n * j.size;
        } else if constexpr (std::is_same_v<J, GaussianJump>) {
          std::normal_distribution<double> z;
          return n * j.mean + std::sqrt(n * j.variance) * z(rng);
        } else {
          std::binomial_distribution<std::uint64_t> firsts(count,
                                                           j.first_probability);
          const double k = static_cast<double>(firsts(rng));
          return k * j.first + (n - k) * j.second;
        }
      },
      law);
}

PathSampler::PathSampler(const ModulatedModel& model) {
  const Eigen::Index n = model.size();
  const auto& g = model.generator();
  regimes_.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& r = model.regime(j);
    RegimeTable t{r.drift, std::sqrt(r.variance), r.jump_intensity, r.jump,
                  -g(j, j), {}};
    if (t.exit_rate > 0.0) {
      std::vector<double> w(static_cast<std::size_t>(n), 0.0);
      for (Eigen::Index k = 0; k < n; ++k) {
        if (k != j) w[static_cast<std::size_t>(k)] = g(j, k);
      }
      t.next_cumulative = cumulative_of(w);
    }
    regimes_.push_back(std::move(t));
  }
  std::vector<double> w0(model.initial().data(),
                         model.initial().data() + model.initial().size());
  initial_cumulative_ = cumulative_of(w0);
  switch_jumps_ = model.transition_jumps();
}

double PathSampler::sample(double t, Philox4x32& rng) const {
  std::size_t j = pick(initial_cumulative_, rng.uniform());
  double x = 0.0;
  double remaining = t;
  std::normal_distribution<double> normal;
  while (remaining > 0.0) {
    const RegimeTable& r = regimes_[j];
    const double hold = r.exit_rate > 0.0
                            ? sample_exponential(r.exit_rate, rng)
                            : std::numeric_limits<double>::infinity();
    const double h = std::min(hold, remaining);
    x += r.drift * h;
    if (r.volatility > 0.0) x += r.volatility * std::sqrt(h) * normal(rng);
    if (r.jump_intensity > 0.0) {
      std::poisson_distribution<std::uint64_t> jumps(r.jump_intensity * h);
      x += sample_jump_sum(r.jump, jumps(rng), rng);
    }
    if (hold >= remaining) break;
    remaining -= hold;
    const std::size_t k = pick(r.next_cumulative, rng.uniform());
    const TransitionJump& sj = switch_jumps_[j][k];
    if (sj.probability > 0.0 && rng.uniform() < sj.probability) {
      x += sample_jump(sj.jump, rng);
    }
    j = k;
  }
  return x;
}

TradeDraw sample_trade_time(const TimingModel& timing, Philox4x32& rng) {
  return std::visit(
      [&](const auto& t) -> TradeDraw {
        using T = std::decay_t<decltype(t)>;
        TradeDraw out;
        const std::vector<double> cumulative = cumulative_of(t.weights);
        out.type = pick(cumulative, rng.uniform());
        if constexpr (std::is_same_v<T, IncidenceTiming>) {
          const double p = t.probabilities[out.type];
          // Trials up to and including the n-th success.
          std::negative_binomial_distribution<std::uint64_t> failures(
              t.successes, p);
          const auto trials = failures(rng) + static_cast<std::uint64_t>(t.successes);
          out.time = t.grid_spacing * static_cast<double>(trials);
        } else {
          double time = sample_exponential(t.arrival_rates[out.type], rng);
          for (const double nu : t.completion_rates) {
            time += sample_exponential(nu, rng);
          }
          out.time = time;
        }
        return out;
      },
      timing);
}

double sample_X_at(const ModulatedModel& model, double t, Philox4x32& rng) {
  return PathSampler(model).sample(t, rng);
}

PriceDraw sample_realized_price(const ModulatedModel& model,
                                const TimingModel& timing, Philox4x32& rng) {
  const TradeDraw trade = sample_trade_time(timing, rng);
  return {sample_X_at(model, trade.time, rng), trade.time};
}

SampleBatch run_batch(const ModulatedModel& model, const TimingModel& timing,
                      std::uint64_t count, std::uint64_t seed,
                      std::uint32_t streams, unsigned threads) {
  if (count == 0) {
    throw Error(ErrorCode::InvalidTiming, "simulation.count must be >= 1");
  }
  if (streams == 0) {
    throw Error(ErrorCode::InvalidTiming, "simulation.streams must be >= 1");
  }
  validate(timing);
  const PathSampler sampler(model);

  SampleBatch batch;
  batch.seed = seed;
  batch.streams = streams;
  batch.timing_tag = std::string(timing_tag(timing));
  batch.log_prices.resize(count);
  batch.trade_times.resize(count);
  batch.stream_index.resize(count);

  // Stream i owns the contiguous slice [offset_i, offset_i + size_i).
  std::vector<std::uint64_t> offsets(streams + 1, 0);
  for (std::uint32_t i = 0; i < streams; ++i) {
    const std::uint64_t size = count / streams + (i < count % streams ? 1 : 0);
    offsets[i + 1] = offsets[i] + size;
  }

  auto run_stream = [&](std::uint32_t i) {
    Philox4x32 rng(seed, i);
    for (std::uint64_t idx = offsets[i]; idx < offsets[i + 1]; ++idx) {
      const TradeDraw trade = sample_trade_time(timing, rng);
      batch.log_prices[idx] = sampler.sample(trade.time, rng);
      batch.trade_times[idx] = trade.time;
      batch.stream_index[idx] = i;
    }
  };

  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                  : threads;
  workers = std::min<unsigned>(workers, streams);
  if (workers <= 1) {
    for (std::uint32_t i = 0; i < streams; ++i) run_stream(i);
    return batch;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::uint32_t i = w; i < streams; i += workers) run_stream(i);
    });
  }
  pool.clear();
  return batch;
}

}  // namespace mmtail
