#include "wavepacket/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "wavepacket/analytic.hpp"
#include "wavepacket/observables.hpp"
#include "wavepacket/spectral.hpp"

namespace wpl::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kOracleTolerance = 1e-6;
constexpr std::size_t kDefaultTimeSamples = 81;
constexpr double kDefaultTimeSpanInT0 = 4.0;
constexpr double kSplitStepsPerTimescale = 2000.0;

const std::map<std::string, Output>& output_names() {
  static const std::map<std::string, Output> names = {
      {"moments", Output::moments},
      {"spread", Output::spread},
      {"kinetic_split", Output::kinetic_split},
      {"wigner", Output::wigner},
      {"wavefunction", Output::wavefunction},
  };
  return names;
}

/// Reads numeric keys from one JSON object and rejects keys nobody asked for.
class ParamReader {
 public:
  ParamReader(const json& object, std::string path) : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) throw ConfigError("key '" + path_ + "': expected an object");
  }

  double required(const std::string& key) {
    used_.insert(key);
    if (!object_.contains(key)) throw ConfigError("key '" + where(key) + "': missing required number");
    return number(key);
  }

  double optional(const std::string& key, double fallback) {
    used_.insert(key);
    return object_.contains(key) ? number(key) : fallback;
  }

  bool has(const std::string& key) const { return object_.contains(key); }

  void finish() const {
    for (const auto& [key, value] : object_.items()) {
      if (!used_.count(key)) throw ConfigError("key '" + where(key) + "': unknown parameter");
    }
  }

 private:
  std::string where(const std::string& key) const { return path_ + "." + key; }

  double number(const std::string& key) const {
    const json& v = object_.at(key);
    if (!v.is_number()) throw ConfigError("key '" + where(key) + "': expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ConfigError("key '" + where(key) + "': must be finite");
    return d;
  }

  const json& object_;
  std::string path_;
  std::set<std::string> used_;
};

Constants read_constants(ParamReader& r) {
  return {r.optional("hbar", 1.0), r.optional("mass", 1.0)};
}

GaussianSpec read_gaussian(ParamReader& r, const Constants& c) {
  const bool has_beta = r.has("beta");
  const bool has_alpha = r.has("alpha");
  if (has_beta == has_alpha) {
    throw ConfigError("key 'params': give exactly one of 'beta' or 'alpha'");
  }
  const double x0 = r.required("x0");
  const double p0 = r.required("p0");
  if (has_beta) return GaussianSpec::from_beta(r.required("beta"), x0, p0, c);
  return GaussianSpec(r.required("alpha"), x0, p0, c);
}

PacketSpec read_spec(const std::string& family, const json& params) {
  ParamReader r(params, "params");
  const Constants c = read_constants(r);
  PacketSpec spec = [&]() -> PacketSpec {
    if (family == "gaussian") return read_gaussian(r, c);
    if (family == "squeezed") {
      const GaussianSpec g = read_gaussian(r, c);
      return SqueezedSpec(g, r.required("C"));
    }
    if (family == "superposition") {
      const PhasePoint a{r.required("xA"), r.required("pA")};
      const PhasePoint b{r.required("xB"), r.required("pB")};
      return SuperpositionSpec(a, b, r.required("beta"), r.required("theta"), c);
    }
    if (family == "sho") {
      return OscillatorSpec(r.required("beta"), r.required("p0"), r.required("omega"), c);
    }
    if (family == "accelerated") {
      const GaussianSpec g = read_gaussian(r, c);
      const double force = r.required("F");
      if (r.has("C")) return AccelerationSpec(SqueezedSpec(g, r.required("C")), force);
      return AccelerationSpec(g, force);
    }
    throw ConfigError("key 'family': unknown family '" + family +
                      "' (expected one of: gaussian, squeezed, superposition, sho, accelerated)");
  }();
  r.finish();
  return spec;
}

std::vector<double> read_times(const json& config, const PacketSpec& spec) {
  std::vector<double> times;
  if (!config.contains("times")) {
    const double end = kDefaultTimeSpanInT0 * spreading_time(spec);
    for (std::size_t i = 0; i < kDefaultTimeSamples; ++i) {
      times.push_back(end * static_cast<double>(i) / static_cast<double>(kDefaultTimeSamples - 1));
    }
    return times;
  }
  const json& t = config.at("times");
  if (t.is_array()) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (!t[i].is_number()) throw ConfigError("key 'times[" + std::to_string(i) + "]': expected a number");
      times.push_back(t[i].get<double>());
    }
  } else if (t.is_object()) {
    ParamReader r(t, "times");
    const double start = r.required("start");
    const double end = r.required("end");
    const double samples = r.required("samples");
    r.finish();
    if (samples < 1 || samples != std::floor(samples)) {
      throw ConfigError("key 'times.samples': expected a positive integer");
    }
    const auto count = static_cast<std::size_t>(samples);
    for (std::size_t i = 0; i < count; ++i) {
      times.push_back(count == 1 ? start
                                 : start + (end - start) * static_cast<double>(i) /
                                               static_cast<double>(count - 1));
    }
  } else {
    throw ConfigError("key 'times': expected a list of times or {start, end, samples}");
  }
  if (times.empty()) throw ConfigError("key 'times': no sample times");
  for (double v : times) {
    if (!std::isfinite(v) || v < 0.0) throw ConfigError("key 'times': times must be finite and >= 0");
  }
  return times;
}

std::string time_token(double t) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), t);
  return std::string(buffer, result.ptr);
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

void append_row(std::string& out, std::initializer_list<double> values) {
  bool first = true;
  for (double v : values) {
    if (!first) out += ',';
    out += format_number(v);
    first = false;
  }
  out += '\n';
}

void append_array(std::string& out, std::span<const double> values) {
  out += '[';
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    out += format_number(values[i]);
  }
  out += ']';
}

std::string aliasing_message(const ResolvedGrid& g, double padding) {
  std::ostringstream msg;
  msg << "grid of n=" << g.points << " points cannot hold the packet up to t=" << format_number(g.t_max)
      << ": span [" << format_number(g.xmin) << ", " << format_number(g.xmax) << "] at padding "
      << format_number(padding) << " needs n >= " << g.required_points;
  return msg.str();
}

ResolvedGrid resolve_grid(const Scenario& s, std::optional<std::size_t> override_points) {
  ResolvedGrid g;
  g.t_max = *std::max_element(s.times.begin(), s.times.end());
  g.points = override_points.value_or(s.grid.points.value_or(kDefaultGridPoints));
  if (!is_power_of_two(g.points) || g.points < kMinGridPoints) {
    throw ConfigError("key 'grid.n': must be a power of two >= 256");
  }
  g.required_points = required_points(s.spec, g.t_max, s.grid.padding);
  const Grid1D layout = make_grid(s.spec, g.t_max, s.grid.padding);
  g.xmin = layout.xmin();
  g.xmax = layout.xmax();
  return g;
}

std::vector<std::string> scenario_warnings(const Scenario& s) {
  std::vector<std::string> warnings;
  if (const auto* sup = std::get_if<SuperpositionSpec>(&s.spec)) {
    const double sep = sup->separation();
    if (sep < kFarApartThreshold) {
      std::ostringstream msg;
      msg << "superposition separation measure " << format_number(sep) << " is below "
          << kFarApartThreshold << "; far-apart moment formulas neglect overlap terms";
      warnings.push_back(msg.str());
    }
  }
  return warnings;
}

struct Sample {
  double time = 0.0;
  MomentReport moments;
  KineticFractions fractions;
  std::optional<KineticSplit> split;
  std::optional<ComplexField> field;
  std::vector<double> density;
  std::optional<WignerGrid> wigner;
};

double oracle_tolerance(const Scenario& s) {
  if (const auto* sup = std::get_if<SuperpositionSpec>(&s.spec)) {
    // Far-apart formulas drop overlap terms of order exp(-separation).
    const MomentReport m0 = superposition_moments_far(*sup, 0.0).report;
    return kOracleTolerance + 10.0 * std::exp(-sup->separation()) * (1.0 + m0.mean_x2 + m0.mean_p2);
  }
  return kOracleTolerance;
}

/// Oracle-evolved moments at each sample time, independent of the closed-form fields.
std::vector<MomentReport> oracle_moments(const Scenario& s, const Grid1D& grid, std::size_t threads) {
  const std::vector<double>& times = s.times;
  std::vector<MomentReport> out(times.size());
  const double t0 = spreading_time(s.spec);

  std::optional<Propagator> stepper;
  if (const auto* sho = std::get_if<OscillatorSpec>(&s.spec)) {
    const double scale = std::min(t0, 1.0 / sho->omega());
    stepper = Propagator::in_potential(harmonic_potential(grid, sho->omega()), scale / kSplitStepsPerTimescale);
  } else if (const auto* acc = std::get_if<AccelerationSpec>(&s.spec)) {
    stepper = Propagator::in_potential(linear_potential(grid, acc->force()), t0 / kSplitStepsPerTimescale);
  }

  const ComplexField phi0 = analytic_phi0(s.spec, grid);
  if (!stepper) {
    parallel_for(times.size(), threads,
                 [&](std::size_t i) { out[i] = quadrature_moments(evolve_free(phi0, times[i])); });
    return out;
  }

  std::vector<std::size_t> order(times.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return times[a] < times[b]; });
  ComplexField psi = to_position(phi0);
  for (std::size_t i : order) {
    psi = stepper->advance(psi, times[i] - psi.time());
    out[i] = quadrature_moments(psi);
  }
  return out;
}

}  // namespace

std::string output_name(Output output) {
  for (const auto& [name, value] : output_names()) {
    if (value == output) return name;
  }
  return "?";
}

bool Scenario::wants(Output output) const {
  return std::find(outputs.begin(), outputs.end(), output) != outputs.end();
}

Scenario parse_scenario(const json& config) {
  if (!config.is_object()) throw ConfigError("config: expected a JSON object");
  static const std::set<std::string> known = {"name", "family", "params", "times", "outputs", "grid", "oracle"};
  for (const auto& [key, value] : config.items()) {
    if (!known.count(key)) throw ConfigError("key '" + key + "': unknown top-level key");
  }

  Scenario s{.name = "", .spec = GaussianSpec(1.0, 0.0, 0.0), .times = {}, .outputs = {}, .grid = {},
             .oracle = false, .source = config};
  if (config.contains("name")) {
    if (!config.at("name").is_string()) throw ConfigError("key 'name': expected a string");
    s.name = config.at("name").get<std::string>();
  }
  if (!config.contains("family") || !config.at("family").is_string()) {
    throw ConfigError("key 'family': missing (expected one of: gaussian, squeezed, superposition, sho, accelerated)");
  }
  if (!config.contains("params")) throw ConfigError("key 'params': missing");
  try {
    s.spec = read_spec(config.at("family").get<std::string>(), config.at("params"));
  } catch (const SpecError& e) {
    throw ConfigError(std::string("key 'params': ") + e.what());
  }
  s.times = read_times(config, s.spec);

  if (!config.contains("outputs") || !config.at("outputs").is_array()) {
    throw ConfigError("key 'outputs': expected a list");
  }
  for (const json& o : config.at("outputs")) {
    if (!o.is_string()) throw ConfigError("key 'outputs': entries must be strings");
    const auto it = output_names().find(o.get<std::string>());
    if (it == output_names().end()) {
      throw ConfigError("key 'outputs': unknown output '" + o.get<std::string>() +
                        "' (expected one of: moments, spread, kinetic_split, wigner, wavefunction)");
    }
    if (!s.wants(it->second)) s.outputs.push_back(it->second);
  }
  if (s.outputs.empty()) throw ConfigError("key 'outputs': at least one output is required");

  if (config.contains("grid")) {
    ParamReader r(config.at("grid"), "grid");
    if (r.has("n")) {
      const double n = r.required("n");
      if (n < 1 || n != std::floor(n)) throw ConfigError("key 'grid.n': expected a positive integer");
      s.grid.points = static_cast<std::size_t>(n);
      if (!is_power_of_two(*s.grid.points) || *s.grid.points < kMinGridPoints) {
        throw ConfigError("key 'grid.n': must be a power of two >= 256");
      }
    }
    s.grid.padding = r.optional("padding", kDefaultPadding);
    if (s.grid.padding < 4.0) throw ConfigError("key 'grid.padding': must be >= 4");
    const double wp = r.optional("wigner_points", static_cast<double>(s.grid.wigner_points));
    if (wp < 2 || wp != std::floor(wp)) throw ConfigError("key 'grid.wigner_points': expected an integer >= 2");
    s.grid.wigner_points = static_cast<std::size_t>(wp);
    r.finish();
  }
  if (config.contains("oracle")) {
    if (!config.at("oracle").is_boolean()) throw ConfigError("key 'oracle': expected true or false");
    s.oracle = config.at("oracle").get<bool>();
  }
  return s;
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();
  json config;
  try {
    config = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte, text.size());
    std::size_t line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < byte; ++i) {
      if (text[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(column) +
                      ": JSON parse error");
  }
  return parse_scenario(config);
}

VerifyReport verify(const Scenario& scenario) {
  VerifyReport report;
  report.grid = resolve_grid(scenario, std::nullopt);
  report.warnings = scenario_warnings(scenario);
  if (report.grid.required_points > report.grid.points) {
    report.warnings.push_back(aliasing_message(report.grid, scenario.grid.padding));
  }
  return report;
}

bool RunManifest::oracle_passed() const {
  return std::all_of(oracle.begin(), oracle.end(), [](const OracleDeviation& d) { return d.passed(); });
}

json RunManifest::to_json() const {
  json j;
  j["scenario"] = scenario;
  j["version"] = version;
  j["grid"] = {{"n", grid.points},
               {"required_n", grid.required_points},
               {"xmin", grid.xmin},
               {"xmax", grid.xmax},
               {"t_max", grid.t_max}};
  j["files"] = json::array();
  for (const auto& f : files) j["files"].push_back(f.generic_string());
  if (!oracle.empty()) {
    json o = json::object();
    for (const auto& d : oracle) {
      o[d.quantity] = {{"max_deviation", d.max_deviation}, {"tolerance", d.tolerance}, {"passed", d.passed()}};
    }
    j["oracle"] = o;
  }
  j["warnings"] = warnings;
  return j;
}

RunManifest run(const Scenario& s, const fs::path& out_dir, const RunOptions& options) {
  RunManifest manifest;
  manifest.scenario = s.source;
  manifest.grid = resolve_grid(s, options.grid_points);
  manifest.warnings = scenario_warnings(s);
  if (manifest.grid.required_points > manifest.grid.points) {
    throw GridError(aliasing_message(manifest.grid, s.grid.padding));
  }
  const Grid1D grid = make_grid(s.spec, manifest.grid.t_max, s.grid.padding, manifest.grid.points);

  const bool needs_field = s.wants(Output::wavefunction) || s.wants(Output::wigner) ||
                           s.wants(Output::kinetic_split) || s.wants(Output::moments);
  const auto* gaussian = std::get_if<GaussianSpec>(&s.spec);
  const auto* squeezed = std::get_if<SqueezedSpec>(&s.spec);
  const std::size_t threads = std::max<std::size_t>(options.threads, 1);

  std::vector<Sample> samples(s.times.size());
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    Sample& sample = samples[i];
    sample.time = s.times[i];
    sample.moments = analytic_moments(s.spec, sample.time);
    if (!needs_field) return;
    sample.field = analytic_psi(s.spec, grid, sample.time);
    sample.split = kinetic_split(*sample.field, sample.moments.mean_x);
    if (gaussian) {
      sample.fractions = r_fraction_closed(*gaussian, sample.time);
    } else if (squeezed) {
      sample.fractions = r_fraction_closed(*squeezed, sample.time);
    } else {
      sample.fractions = {sample.split->r_plus, sample.split->r_minus};
    }
    if (s.wants(Output::wavefunction)) sample.density = kinetic_density(*sample.field);
    if (s.wants(Output::wigner)) sample.wigner = wigner_numeric(*sample.field, s.grid.wigner_points, 1);
  });

  if (s.oracle || options.force_oracle) {
    const std::vector<MomentReport> numeric = oracle_moments(s, grid, threads);
    const double tol = oracle_tolerance(s);
    OracleDeviation mean_x{"mean_x", 0.0, tol}, mean_p{"mean_p", 0.0, tol}, sigma_x{"sigma_x", 0.0, tol},
        sigma_p{"sigma_p", 0.0, tol}, cov{"cov_xp", 0.0, tol};
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const MomentReport& a = samples[i].moments;
      const MomentReport& q = numeric[i];
      mean_x.max_deviation = std::max(mean_x.max_deviation, std::abs(a.mean_x - q.mean_x));
      mean_p.max_deviation = std::max(mean_p.max_deviation, std::abs(a.mean_p - q.mean_p));
      sigma_x.max_deviation = std::max(sigma_x.max_deviation, std::abs(a.sigma_x - q.sigma_x));
      sigma_p.max_deviation = std::max(sigma_p.max_deviation, std::abs(a.sigma_p - q.sigma_p));
      cov.max_deviation = std::max(cov.max_deviation, std::abs(a.cov_xp - q.cov_xp));
    }
    manifest.oracle = {mean_x, mean_p, sigma_x, sigma_p, cov};
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw IoError("cannot create output directory " + out_dir.string());

  auto emit = [&](const std::string& name, const std::string& content) {
    write_file(out_dir / name, content);
    manifest.files.emplace_back(name);
  };

  if (s.wants(Output::moments)) {
    std::string csv = "time,mean_x,mean_p,sigma_x,sigma_p,cov_xp,rho,r_plus,r_minus\n";
    for (const Sample& m : samples) {
      const MomentReport& r = m.moments;
      append_row(csv, {m.time, r.mean_x, r.mean_p, r.sigma_x, r.sigma_p, r.cov_xp, r.rho,
                       m.fractions.r_plus, m.fractions.r_minus});
    }
    emit("moments.csv", csv);
  }
  if (s.wants(Output::spread)) {
    const MomentReport initial = analytic_moments(s.spec, 0.0);
    const double mass = constants_of(s.spec).mass;
    std::string csv = "time,sigma_x_sq,general_spread\n";
    for (const Sample& m : samples) {
      append_row(csv, {m.time, m.moments.sigma_x * m.moments.sigma_x, general_spread(initial, mass, m.time)});
    }
    emit("spread.csv", csv);
  }
  if (s.wants(Output::kinetic_split)) {
    std::string csv = "time,mean_x,total,t_plus,t_minus,r_plus,r_minus\n";
    for (const Sample& m : samples) {
      const KineticSplit& k = *m.split;
      append_row(csv, {m.time, m.moments.mean_x, k.total, k.t_plus, k.t_minus, k.r_plus, k.r_minus});
    }
    emit("kinetic_split.csv", csv);
  }
  if (s.wants(Output::wavefunction)) {
    for (const Sample& m : samples) {
      std::string csv = "x,re_psi,im_psi,abs_psi,kinetic_density\n";
      const ComplexField& f = *m.field;
      for (std::size_t j = 0; j < grid.size(); ++j) {
        const cplx v = f.values()[j];
        append_row(csv, {grid.x(j), v.real(), v.imag(), std::abs(v), m.density[j]});
      }
      emit("wavefunction_t" + time_token(m.time) + ".csv", csv);
    }
  }
  if (s.wants(Output::wigner)) {
    for (const Sample& m : samples) {
      const WignerGrid& w = *m.wigner;
      std::string text = "{\"x_axis\":";
      append_array(text, w.x_axis);
      text += ",\"p_axis\":";
      append_array(text, w.p_axis);
      text += ",\"values\":";
      append_array(text, w.values);
      text += ",\"contour_levels\":";
      append_array(text, contour_levels(w));
      text += "}\n";
      emit("wigner_t" + time_token(m.time) + ".json", text);
    }
  }

  write_file(out_dir / "manifest.json", manifest.to_json().dump(2) + "\n");
  return manifest;
}

std::string format_number(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::size_t threads_from_environment() {
  const char* env = std::getenv("WAVEPACKET_LAB_THREADS");
  if (!env) return 1;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || v < 1) return 1;
  return static_cast<std::size_t>(v);
}

}  // namespace wpl::cli
