#include "mmtail/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mmtail/error.hpp"
#include "mmtail/erlang.hpp"

namespace mmtail {

using nlohmann::json;

namespace {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Writes to the file at `path`, or to `fallback` when the path is empty.
class Output {
 public:
  Output(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw IoError(path + ": cannot open for writing");
      stream_ = &file_;
      path_ = path;
    }
  }

  std::ostream& stream() { return *stream_; }

  void close() {
    stream_->flush();
    if (!*stream_) throw IoError((path_.empty() ? "output" : path_) + ": write failed");
    if (file_.is_open()) file_.close();
  }

 private:
  std::ofstream file_;
  std::ostream* stream_;
  std::string path_;
};

void append_double(std::string& buf, double v) {
  char tmp[32];
  const auto res = std::to_chars(tmp, tmp + sizeof tmp, v);
  buf.append(tmp, res.ptr);
}

template <typename Int>
void append_int(std::string& buf, Int v) {
  char tmp[24];
  const auto res = std::to_chars(tmp, tmp + sizeof tmp, v);
  buf.append(tmp, res.ptr);
}

json provenance(const RunConfig& config) {
  return {{"tool", "mmtail"},
          {"version", kVersion},
          {"config_hash", config_hash(config)},
          {"model_hash", model_hash(config)}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, path + ": cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Config, path + ": " + e.what());
  }
}

double mean_trade_time(const TimingModel& timing) {
  return std::visit(
      [](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        double mean = 0.0;
        if constexpr (std::is_same_v<T, IncidenceTiming>) {
          for (std::size_t j = 0; j < t.probabilities.size(); ++j) {
            mean += t.weights[j] * t.successes * t.grid_spacing / t.probabilities[j];
          }
        } else {
          double stages = 0.0;
          for (const double nu : t.completion_rates) stages += 1.0 / nu;
          for (std::size_t j = 0; j < t.arrival_rates.size(); ++j) {
            mean += t.weights[j] * (1.0 / t.arrival_rates[j] + stages);
          }
        }
        return mean;
      },
      timing);
}

}  // namespace

std::string format_double(double v) {
  std::string out;
  append_double(out, v);
  return out;
}

json to_json(const TailReport& r) {
  const auto& d = r.diagnostics;
  json limit = json::array();
  for (const auto& p : d.residue_limit) {
    limit.push_back({{"offset", p.offset}, {"value", p.value}});
  }
  json grid = json::array();
  for (const auto& [a, g] : d.exponent_grid) grid.push_back({a, g});
  json right = json::array();
  json left = json::array();
  for (Eigen::Index i = 0; i < r.perron.right.size(); ++i) {
    right.push_back(r.perron.right(i));
    left.push_back(r.perron.left(i));
  }
  return {
      {"side", std::string(to_string(r.side))},
      {"case", std::string(to_string(r.label))},
      {"alpha", r.alpha},
      {"beta", r.beta},
      {"scale", r.scale},
      {"target", r.target},
      {"unique_singularity", r.unique_singularity},
      {"paretian_limit", r.paretian_limit ? json(*r.paretian_limit) : json(nullptr)},
      {"perron",
       {{"eigenvalue", r.perron.eigenvalue}, {"right", right}, {"left", left}}},
      {"diagnostics",
       {{"residue_limit", limit},
        {"residue_limit_extrapolated", d.residue_limit_extrapolated},
        {"residue_limit_relative_error", d.residue_limit_relative_error},
        {"exponent_grid", grid},
        {"convex_on_grid", d.convex_on_grid},
        {"domain_finite", d.domain_finite},
        {"residue_factor", d.residue_factor},
        {"near_rate_tie", d.near_rate_tie},
        {"beta_grid_size", d.beta_grid_size}}}};
}

TailReport report_from_json(const json& doc) {
  const json& r = doc.contains("report") ? doc.at("report") : doc;
  TailReport out;
  try {
    const std::string side = r.at("side").get<std::string>();
    if (side != "upper" && side != "lower") {
      throw Error(ErrorCode::Config, "report.side: expected upper or lower");
    }
    out.side = side == "upper" ? TailSide::Upper : TailSide::Lower;
    const std::string label = r.at("case").get<std::string>();
    bool known = false;
    for (const TailCase c : {TailCase::IimGeometric, TailCase::IimNegbin,
                             TailCase::ItmA, TailCase::ItmB, TailCase::ItmC}) {
      if (label == to_string(c)) {
        out.label = c;
        known = true;
      }
    }
    if (!known) throw Error(ErrorCode::Config, "report.case: unknown case label");
    out.alpha = r.at("alpha").get<double>();
    out.beta = r.at("beta").get<int>();
    out.scale = r.at("scale").get<double>();
    out.target = r.value("target", 0.0);
    out.unique_singularity = r.value("unique_singularity", false);
    if (r.contains("paretian_limit") && !r.at("paretian_limit").is_null()) {
      out.paretian_limit = r.at("paretian_limit").get<double>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, std::string("report: ") + e.what());
  }
  if (!(out.alpha > 0.0) || out.beta < 0 || !(out.scale > 0.0)) {
    throw Error(ErrorCode::Config, "report: need alpha > 0, beta >= 0, scale > 0");
  }
  return out;
}

json to_json(const ValidationSummary& s) {
  json checks = json::array();
  for (const Check& c : s.checks) {
    checks.push_back({{"name", c.name},
                      {"target", c.target},
                      {"estimate", c.estimate},
                      {"tolerance", c.tolerance},
                      {"verdict", std::string(to_string(c.verdict))},
                      {"reason", c.reason}});
  }
  json sweep = json::array();
  for (const HillEstimate& h : s.hill_sweep) {
    sweep.push_back({{"k", h.k}, {"alpha", h.alpha}, {"standard_error", h.standard_error}});
  }
  return {{"checks", checks},
          {"hill",
           {{"k", s.hill.k},
            {"alpha", s.hill.alpha},
            {"standard_error", s.hill.standard_error}}},
          {"hill_sweep", sweep},
          {"passed", s.passed()}};
}

RunConfig load_with_overrides(const CommandOptions& options) {
  if (options.config_path.empty()) {
    throw Error(ErrorCode::Config, "--config: required");
  }
  RunConfig config = load_config(options.config_path);
  if (options.seed) config.simulation.seed = *options.seed;
  if (options.samples) {
    if (*options.samples < 1) throw Error(ErrorCode::Config, "--samples: must be >= 1");
    if (*options.samples > (std::uint64_t{1} << 32)) {
      throw Error(ErrorCode::Config, "--samples: exceeds 2^32");
    }
    config.simulation.count = *options.samples;
  }
  if (options.tolerance_json) {
    json doc;
    try {
      doc = json::parse(*options.tolerance_json);
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::Config, std::string("--tolerance-json: ") + e.what());
    }
    config.analysis.tolerances =
        parse_tolerances(doc, config.analysis.tolerances, "--tolerance-json");
  }
  return config;
}

TailReport analyze(const RunConfig& config) {
  const AnalysisOptions options = config.analysis_options();
  return config.analysis.side == TailSide::Upper
             ? tail_report(config.model, config.timing, options)
             : lower_tail_report(config.model, config.timing, options);
}

void write_samples_csv(std::ostream& out, const SampleBatch& batch,
                       const RunConfig& config) {
  std::string buf;
  buf += "# seed=";
  append_int(buf, batch.seed);
  buf += ",streams=";
  append_int(buf, batch.streams);
  buf += ",count=";
  append_int(buf, batch.count());
  buf += ",model_hash=" + model_hash(config);
  buf += ",timing=" + batch.timing_tag + "\n";
  buf += "x_T,T,stream\n";
  constexpr std::size_t kFlush = 1 << 20;
  for (std::size_t i = 0; i < batch.count(); ++i) {
    append_double(buf, batch.log_prices[i]);
    buf += ',';
    append_double(buf, batch.trade_times[i]);
    buf += ',';
    append_int(buf, batch.stream_index[i]);
    buf += '\n';
    if (buf.size() > kFlush) {
      out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

int cmd_analyze(const CommandOptions& options, std::ostream& out, std::ostream&) {
  const RunConfig config = load_with_overrides(options);
  const TailReport report = analyze(config);
  const json doc = {{"provenance", provenance(config)}, {"report", to_json(report)}};
  Output o(options.out_path, out);
  o.stream() << doc.dump(2) << "\n";
  o.close();
  if (!options.csv_path.empty()) {
    Output table(options.csv_path, out);
    std::string buf = "alpha,g\n";
    for (const auto& [a, g] : report.diagnostics.exponent_grid) {
      append_double(buf, a);
      buf += ',';
      append_double(buf, g);
      buf += '\n';
    }
    table.stream() << buf;
    table.close();
  }
  return kExitOk;
}

int cmd_simulate(const CommandOptions& options, std::ostream& out, std::ostream&) {
  const RunConfig config = load_with_overrides(options);
  const SimulationConfig& s = config.simulation;
  const SampleBatch batch =
      run_batch(config.model, config.timing, s.count, s.seed, s.streams, options.threads);
  Output o(options.out_path, out);
  write_samples_csv(o.stream(), batch, config);
  o.close();
  return kExitOk;
}

int cmd_validate(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  const RunConfig config = load_with_overrides(options);
  const TailReport report = options.report_path.empty()
                                ? analyze(config)
                                : report_from_json(read_json_file(options.report_path));
  const SimulationConfig& s = config.simulation;
  const SampleBatch batch =
      run_batch(config.model, config.timing, s.count, s.seed, s.streams, options.threads);
  const AnalysisConfig& a = config.analysis;
  const ValidationSummary summary =
      validate(report, batch, a.tolerances, a.plateau_band, a.log_band);

  for (const Check& c : summary.checks) {
    err << c.name << ": target=" << format_double(c.target)
        << " estimate=" << format_double(c.estimate)
        << " tolerance=" << format_double(c.tolerance) << " verdict=" << to_string(c.verdict)
        << " (" << c.reason << ")\n";
  }

  const json doc = {{"provenance", provenance(config)},
                    {"report", to_json(report)},
                    {"validation", to_json(summary)},
                    {"samples", {{"count", batch.count()}, {"seed", batch.seed},
                                 {"streams", batch.streams}}}};
  Output o(options.out_path, out);
  o.stream() << doc.dump(2) << "\n";
  o.close();

  if (!options.csv_path.empty()) {
    std::vector<double> logs = batch.log_prices;
    if (report.side == TailSide::Lower) {
      for (auto& x : logs) x = -x;
    }
    const QuantileBand band = report.beta == 0 ? a.plateau_band : a.log_band;
    Output table(options.csv_path, out);
    std::string buf = "y,scaled_survival\n";
    for (const auto& [log_y, v] : scaled_survival(logs, report.alpha, band)) {
      append_double(buf, std::exp(log_y));
      buf += ',';
      append_double(buf, v);
      buf += '\n';
    }
    table.stream() << buf;
    table.close();
  }
  return summary.passed() ? kExitOk : kExitValidation;
}

int cmd_density(const CommandOptions& options, std::ostream& out, std::ostream&) {
  const RunConfig config = load_with_overrides(options);
  if (options.points < 1) throw Error(ErrorCode::Config, "--points: must be >= 1");
  std::string buf;
  std::visit(
      [&](const auto& t) {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, IncidenceTiming>) {
          // P(T = m Delta) for m = n, n + 1, ...
          buf = "t,probability\n";
          const int n = t.successes;
          for (int i = 0; i < options.points; ++i) {
            const int m = n + i;
            double pmf = 0.0;
            for (std::size_t j = 0; j < t.probabilities.size(); ++j) {
              const double p = t.probabilities[j];
              const double log_choose = std::lgamma(m) - std::lgamma(n) - std::lgamma(m - n + 1);
              pmf += t.weights[j] *
                     std::exp(log_choose + n * std::log(p) + (m - n) * std::log1p(-p));
            }
            append_double(buf, m * t.grid_spacing);
            buf += ',';
            append_double(buf, pmf);
            buf += '\n';
          }
        } else {
          buf = "t,density\n";
          const double t_max =
              options.t_max > 0.0 ? options.t_max : 10.0 * mean_trade_time(config.timing);
          std::vector<ErlangSpec> specs;
          for (std::size_t j = 0; j < t.arrival_rates.size(); ++j) {
            specs.push_back(itm_type_spec(t, j));
          }
          for (int i = 1; i <= options.points; ++i) {
            const double x = t_max * i / options.points;
            double f = 0.0;
            for (std::size_t j = 0; j < specs.size(); ++j) {
              f += t.weights[j] * specs[j].density(x);
            }
            append_double(buf, x);
            buf += ',';
            append_double(buf, f);
            buf += '\n';
          }
        }
      },
      config.timing);
  Output o(options.out_path, out);
  o.stream() << buf;
  o.close();
  return kExitOk;
}

int cmd_mgf(const CommandOptions& options, std::ostream& out, std::ostream&) {
  const RunConfig config = load_with_overrides(options);
  if (options.s_values.empty()) throw Error(ErrorCode::Config, "--s: at least one value");
  if (options.time && !(*options.time > 0.0)) {
    throw Error(ErrorCode::Config, "--time: must be positive");
  }
  std::string buf = "s,mgf\n";
  for (const double s : options.s_values) {
    const double v = options.time ? mgf_at_time(config.model, s, *options.time)
                                  : timing_mgf(config.model, config.timing, s);
    append_double(buf, s);
    buf += ',';
    append_double(buf, v);
    buf += '\n';
  }
  Output o(options.out_path, out);
  o.stream() << buf;
  o.close();
  return kExitOk;
}

int run_command(const std::string& name, const CommandOptions& options,
                std::ostream& out, std::ostream& err) {
  try {
    if (name == "analyze") return cmd_analyze(options, out, err);
    if (name == "simulate") return cmd_simulate(options, out, err);
    if (name == "validate") return cmd_validate(options, out, err);
    if (name == "density") return cmd_density(options, out, err);
    if (name == "mgf") return cmd_mgf(options, out, err);
    err << "error: unknown command " << name << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    switch (e.code()) {
      case ErrorCode::Config:
      case ErrorCode::InvalidModel:
      case ErrorCode::InvalidTiming:
        return kExitConfig;
      default:
        return kExitAnalysis;
    }
  } catch (const IoError& e) {
    err << "error [io]: " << e.what() << "\n";
    return kExitIo;
  }
}

}  // namespace mmtail
