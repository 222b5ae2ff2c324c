#include "mmtail/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "mmtail/error.hpp"

namespace mmtail {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::Config, path + ": " + what);
}

std::string index_path(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

// Object reader that tracks consumed keys so leftovers can be rejected.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) fail(path_, "expected an object");
  }

  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) const { return obj_.contains(key); }

  const json& at(const std::string& key) {
    if (!obj_.contains(key)) fail(child(key), "required field is missing");
    seen_.insert(key);
    return obj_.at(key);
  }

  const json* find(const std::string& key) {
    if (!obj_.contains(key)) return nullptr;
    seen_.insert(key);
    return &obj_.at(key);
  }

  double number(const std::string& key) { return as_number(at(key), child(key)); }

  double number(const std::string& key, double fallback) {
    const json* v = find(key);
    return v ? as_number(*v, child(key)) : fallback;
  }

  std::uint64_t unsigned_int(const std::string& key, std::uint64_t fallback) {
    const json* v = find(key);
    return v ? as_unsigned(*v, child(key)) : fallback;
  }

  std::string string(const std::string& key) {
    const json& v = at(key);
    if (!v.is_string()) fail(child(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key) {
    return as_numbers(at(key), child(key));
  }

  void finish() const {
    for (const auto& [key, _] : obj_.items()) {
      if (!seen_.contains(key)) fail(child(key), "unknown key");
    }
  }

  static double as_number(const json& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
  }

  static std::uint64_t as_unsigned(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    fail(path, "expected a nonnegative integer");
  }

  static std::vector<double> as_numbers(const json& v, const std::string& path) {
    if (!v.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      out.push_back(as_number(v[i], index_path(path, i)));
    }
    return out;
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

JumpLaw parse_jump(const json& doc, const std::string& path) {
  Fields f(doc, path);
  const std::string law = f.string("law");
  JumpLaw out;
  if (law == "degenerate") {
    out = DegenerateJump{f.number("size")};
  } else if (law == "gaussian") {
    out = GaussianJump{f.number("mean"), f.number("variance")};
  } else if (law == "two_point") {
    out = TwoPointJump{f.number("first"), f.number("second"),
                       f.number("first_probability")};
  } else {
    fail(f.child("law"), "expected one of degenerate, gaussian, two_point");
  }
  f.finish();
  return out;
}

RegimeExponent parse_regime(const json& doc, const std::string& path) {
  Fields f(doc, path);
  RegimeExponent r;
  r.drift = f.number("drift", 0.0);
  r.variance = f.number("variance", 0.0);
  r.jump_intensity = f.number("jump_intensity", 0.0);
  if (const json* j = f.find("jump")) r.jump = parse_jump(*j, f.child("jump"));
  f.finish();
  return r;
}

ModulatedModel parse_model(const json& doc) {
  Fields f(doc, "model");
  const json& regimes_doc = f.at("regimes");
  if (!regimes_doc.is_array() || regimes_doc.empty()) {
    fail("model.regimes", "expected a nonempty array");
  }
  const std::size_t n = regimes_doc.size();
  if (n > static_cast<std::size_t>(kMaxRegimes)) {
    fail("model.regimes", "at most " + std::to_string(kMaxRegimes) + " regimes");
  }
  std::vector<RegimeExponent> regimes;
  for (std::size_t i = 0; i < n; ++i) {
    regimes.push_back(parse_regime(regimes_doc[i], index_path("model.regimes", i)));
  }

  const json& g_doc = f.at("generator");
  if (!g_doc.is_array() || g_doc.size() != n) {
    fail("model.generator", "expected " + std::to_string(n) + " rows");
  }
  Eigen::MatrixXd g(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string row_path = index_path("model.generator", i);
    const std::vector<double> row = Fields::as_numbers(g_doc[i], row_path);
    if (row.size() != n) fail(row_path, "expected " + std::to_string(n) + " entries");
    for (std::size_t k = 0; k < n; ++k) {
      g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
    }
  }

  std::vector<std::vector<TransitionJump>> jumps(n, std::vector<TransitionJump>(n));
  if (const json* tj = f.find("transition_jumps")) {
    if (!tj->is_array()) fail("model.transition_jumps", "expected an array");
    for (std::size_t i = 0; i < tj->size(); ++i) {
      const std::string p = index_path("model.transition_jumps", i);
      Fields e((*tj)[i], p);
      const std::uint64_t from = e.unsigned_int("from", n);
      const std::uint64_t to = e.unsigned_int("to", n);
      if (from >= n) fail(e.child("from"), "regime index out of range");
      if (to >= n) fail(e.child("to"), "regime index out of range");
      TransitionJump jump;
      jump.probability = e.number("probability");
      jump.jump = parse_jump(e.at("jump"), e.child("jump"));
      e.finish();
      jumps[from][to] = jump;
    }
  }

  Eigen::VectorXd w0;
  if (const json* w = f.find("initial")) {
    const std::vector<double> v = Fields::as_numbers(*w, "model.initial");
    if (v.size() != n) fail("model.initial", "expected " + std::to_string(n) + " entries");
    w0 = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(n));
  } else {
    fail("model.initial", "required field is missing");
  }
  f.finish();
  return ModulatedModel(std::move(regimes), std::move(g), std::move(jumps),
                        std::move(w0));
}

TimingModel parse_timing(const json& doc, double grid_spacing) {
  Fields f(doc, "timing");
  const std::string kind = f.string("kind");
  auto weights = [&](std::size_t types) {
    if (!f.has("weights") && types == 1) return std::vector<double>{1.0};
    return f.numbers("weights");
  };
  TimingModel out;
  if (kind == "iim") {
    IncidenceTiming t;
    t.probabilities = f.numbers("probabilities");
    t.weights = weights(t.probabilities.size());
    const std::uint64_t n = f.unsigned_int("successes", 1);
    if (n < 1 || n > 1000) fail("timing.successes", "must lie in [1, 1000]");
    t.successes = static_cast<int>(n);
    t.grid_spacing = grid_spacing;
    out = t;
  } else if (kind == "itm") {
    ArrivalTiming t;
    t.arrival_rates = f.numbers("arrival_rates");
    t.weights = weights(t.arrival_rates.size());
    if (f.has("completion_rates")) t.completion_rates = f.numbers("completion_rates");
    if (grid_spacing != 1.0) {
      fail("simulation.grid_spacing", "applies to incidence timing only; must be 1");
    }
    out = t;
  } else {
    fail("timing.kind", "expected iim or itm");
  }
  f.finish();
  validate(out);
  return out;
}

QuantileBand parse_band(const json& doc, const std::string& path,
                        const QuantileBand& base) {
  Fields f(doc, path);
  QuantileBand b = base;
  b.lower = f.number("lower", base.lower);
  b.upper = f.number("upper", base.upper);
  const std::uint64_t k = f.unsigned_int("thresholds", static_cast<std::uint64_t>(base.thresholds));
  if (k < 1 || k > 10000) fail(f.child("thresholds"), "must lie in [1, 10000]");
  b.thresholds = static_cast<int>(k);
  f.finish();
  if (!(b.lower > 0.0 && b.lower < b.upper && b.upper <= 1.0)) {
    fail(path, "need 0 < lower < upper <= 1");
  }
  return b;
}

AnalysisConfig parse_analysis(const json& doc) {
  Fields f(doc, "analysis");
  AnalysisConfig a;
  a.alpha_max = f.number("alpha_max", a.alpha_max);
  if (!(a.alpha_max > 0.0)) fail("analysis.alpha_max", "must be positive");
  if (const json* side = f.find("tail_side")) {
    if (*side == "upper") {
      a.side = TailSide::Upper;
    } else if (*side == "lower") {
      a.side = TailSide::Lower;
    } else {
      fail("analysis.tail_side", "expected upper or lower");
    }
  }
  if (const json* grid = f.find("beta_grid")) {
    a.beta_grid = Fields::as_numbers(*grid, "analysis.beta_grid");
  }
  if (const json* t = f.find("tolerances")) {
    a.tolerances = parse_tolerances(*t, a.tolerances, "analysis.tolerances");
  }
  if (const json* b = f.find("plateau_band")) {
    a.plateau_band = parse_band(*b, "analysis.plateau_band", a.plateau_band);
  }
  if (const json* b = f.find("log_band")) {
    a.log_band = parse_band(*b, "analysis.log_band", a.log_band);
  }
  f.finish();
  return a;
}

SimulationConfig parse_simulation(const json& doc) {
  Fields f(doc, "simulation");
  SimulationConfig s;
  s.count = f.unsigned_int("count", s.count);
  if (s.count < 1) fail("simulation.count", "must be >= 1");
  if (s.count > (std::uint64_t{1} << 32)) fail("simulation.count", "exceeds 2^32");
  s.seed = f.unsigned_int("seed", s.seed);
  const std::uint64_t streams = f.unsigned_int("streams", s.streams);
  if (streams < 1 || streams > 65536) fail("simulation.streams", "must lie in [1, 65536]");
  s.streams = static_cast<std::uint32_t>(streams);
  s.grid_spacing = f.number("grid_spacing", s.grid_spacing);
  f.finish();
  return s;
}

json band_json(const QuantileBand& b) {
  return {{"lower", b.lower}, {"upper", b.upper}, {"thresholds", b.thresholds}};
}

json tolerances_json(const Tolerances& t) {
  return {{"hill_relative", t.hill_relative},
          {"scale_relative", t.scale_relative},
          {"log_correction_absolute", t.log_correction_absolute}};
}

}  // namespace

Tolerances parse_tolerances(const json& doc, const Tolerances& base,
                            const std::string& path) {
  Fields f(doc, path);
  Tolerances t = base;
  t.hill_relative = f.number("hill_relative", base.hill_relative);
  t.scale_relative = f.number("scale_relative", base.scale_relative);
  t.log_correction_absolute =
      f.number("log_correction_absolute", base.log_correction_absolute);
  f.finish();
  if (!(t.hill_relative >= 0.0)) fail(f.child("hill_relative"), "must be >= 0");
  if (!(t.scale_relative >= 0.0)) fail(f.child("scale_relative"), "must be >= 0");
  if (!(t.log_correction_absolute >= 0.0)) {
    fail(f.child("log_correction_absolute"), "must be >= 0");
  }
  return t;
}

AnalysisOptions RunConfig::analysis_options() const {
  AnalysisOptions o;
  o.alpha_max = analysis.alpha_max;
  o.beta_grid = analysis.beta_grid;
  return o;
}

RunConfig parse_config(const json& doc) {
  Fields f(doc, "");
  const json* sim_doc = f.find("simulation");
  const SimulationConfig sim =
      sim_doc ? parse_simulation(*sim_doc) : SimulationConfig{};
  ModulatedModel model = parse_model(f.at("model"));
  TimingModel timing = parse_timing(f.at("timing"), sim.grid_spacing);
  const json* an_doc = f.find("analysis");
  AnalysisConfig analysis = an_doc ? parse_analysis(*an_doc) : AnalysisConfig{};
  f.finish();
  return RunConfig{std::move(model), std::move(timing), std::move(analysis), sim};
}

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::Config, std::string("config: ") + e.what());
  }
  return parse_config(doc);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, path + ": cannot open config");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json to_json(const JumpLaw& law) {
  return std::visit(
      [](const auto& j) -> json {
        using J = std::decay_t<decltype(j)>;
        if constexpr (std::is_same_v<J, DegenerateJump>) {
          return {{"law", "degenerate"}, {"size", j.size}};
        } else if constexpr (std::is_same_v<J, GaussianJump>) {
          return {{"law", "gaussian"}, {"mean", j.mean}, {"variance", j.variance}};
        } else {
          return {{"law", "two_point"},
                  {"first", j.first},
                  {"second", j.second},
                  {"first_probability", j.first_probability}};
        }
      },
      law);
}

json to_json(const ModulatedModel& model) {
  const Eigen::Index n = model.size();
  json regimes = json::array();
  for (const auto& r : model.regimes()) {
    regimes.push_back({{"drift", r.drift},
                       {"variance", r.variance},
                       {"jump_intensity", r.jump_intensity},
                       {"jump", to_json(r.jump)}});
  }
  json generator = json::array();
  for (Eigen::Index i = 0; i < n; ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < n; ++k) row.push_back(model.generator()(i, k));
    generator.push_back(row);
  }
  json jumps = json::array();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const TransitionJump& t = model.transition_jump(i, k);
      if (t.probability == 0.0) continue;
      jumps.push_back({{"from", i},
                       {"to", k},
                       {"probability", t.probability},
                       {"jump", to_json(t.jump)}});
    }
  }
  json initial = json::array();
  for (Eigen::Index i = 0; i < n; ++i) initial.push_back(model.initial()(i));
  return {{"regimes", regimes},
          {"generator", generator},
          {"transition_jumps", jumps},
          {"initial", initial}};
}

json to_json(const TimingModel& timing) {
  return std::visit(
      [](const auto& t) -> json {
        using T = std::decay_t<decltype(t)>;
        if constexpr (std::is_same_v<T, IncidenceTiming>) {
          return {{"kind", "iim"},
                  {"probabilities", t.probabilities},
                  {"weights", t.weights},
                  {"successes", t.successes}};
        } else {
          return {{"kind", "itm"},
                  {"arrival_rates", t.arrival_rates},
                  {"weights", t.weights},
                  {"completion_rates", t.completion_rates}};
        }
      },
      timing);
}

json to_json(const RunConfig& config) {
  const AnalysisConfig& a = config.analysis;
  const SimulationConfig& s = config.simulation;
  return {{"model", to_json(config.model)},
          {"timing", to_json(config.timing)},
          {"analysis",
           {{"alpha_max", a.alpha_max},
            {"tail_side", std::string(to_string(a.side))},
            {"beta_grid", a.beta_grid},
            {"tolerances", tolerances_json(a.tolerances)},
            {"plateau_band", band_json(a.plateau_band)},
            {"log_band", band_json(a.log_band)}}},
          {"simulation",
           {{"count", s.count},
            {"seed", s.seed},
            {"streams", s.streams},
            {"grid_spacing", s.grid_spacing}}}};
}

std::string canonical_text(const RunConfig& config) {
  return to_json(config).dump(2) + "\n";
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_hash(const RunConfig& config) {
  return fnv1a_hex(to_json(config).dump());
}

std::string model_hash(const RunConfig& config) {
  const json doc = {{"model", to_json(config.model)},
                    {"timing", to_json(config.timing)},
                    {"grid_spacing", config.simulation.grid_spacing}};
  return fnv1a_hex(doc.dump());
}

}  // namespace mmtail
