#include "rabi/config.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "rabi/moment_hierarchy.hpp"

namespace rabi {

using nlohmann::json;

namespace {

Task task_from_string(std::string_view text) {
  if (text == "timeseries") return Task::timeseries;
  if (text == "hierarchy") return Task::hierarchy;
  if (text == "spectrum_scaling") return Task::spectrum_scaling;
  if (text == "delta") return Task::delta;
  if (text == "sweep") return Task::sweep;
  if (text == "convergence") return Task::convergence;
  if (text == "bloch_siegert") return Task::bloch_siegert;
  throw ConfigError("task: unknown task '" + std::string(text) + "'");
}

ModelSelection selection_from_string(std::string_view text) {
  if (text == "rwa") return ModelSelection::rwa;
  if (text == "full") return ModelSelection::full;
  if (text == "both") return ModelSelection::both;
  throw ConfigError("model_level must be rwa, full or both, got '" + std::string(text) + "'");
}

// Reads optional fields under a dotted prefix and records every default it fills.
class Reader {
 public:
  Reader(const json& doc, std::vector<std::string>& defaults) : doc_(doc), defaults_(defaults) {}

  const json* find(std::string_view path) const {
    const json* node = &doc_;
    std::size_t start = 0;
    while (start <= path.size()) {
      const std::size_t dot = path.find('.', start);
      const std::string key(path.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
      if (!node->is_object()) return nullptr;
      const auto it = node->find(key);
      if (it == node->end() || it->is_null()) return nullptr;
      node = &*it;
      if (dot == std::string_view::npos) break;
      start = dot + 1;
    }
    return node;
  }

  template <class T>
  T get(std::string_view path, T fallback) {
    const json* node = find(path);
    if (!node) {
      defaults_.emplace_back(path);
      return fallback;
    }
    try {
      return node->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string(path) + ": wrong type (" + e.what() + ")");
    }
  }

  bool has(std::string_view path) const { return find(path) != nullptr; }
  void note_default(std::string_view path) { defaults_.emplace_back(path); }

 private:
  const json& doc_;
  std::vector<std::string>& defaults_;
};

void check_known_keys(const json& doc) {
  static const std::set<std::string> top{"schema_version", "task", "model_level", "params", "rates",
                                         "initial_state", "dims", "hierarchy", "solver", "observables",
                                         "spectrum", "sweep", "bloch_siegert", "output", "defaults_applied"};
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  for (const auto& [key, _] : doc.items()) {
    if (!top.contains(key)) throw ConfigError(key + ": unknown config field");
  }
}

}  // namespace

std::string_view to_string(Task task) {
  switch (task) {
    case Task::timeseries: return "timeseries";
    case Task::hierarchy: return "hierarchy";
    case Task::spectrum_scaling: return "spectrum_scaling";
    case Task::delta: return "delta";
    case Task::sweep: return "sweep";
    case Task::convergence: return "convergence";
    case Task::bloch_siegert: return "bloch_siegert";
  }
  return "unknown";
}

std::string_view to_string(ModelSelection selection) {
  switch (selection) {
    case ModelSelection::rwa: return "rwa";
    case ModelSelection::full: return "full";
    case ModelSelection::both: return "both";
  }
  return "unknown";
}

RabiParams RunConfig::params(ModelLevel level) const {
  RabiParams p = RabiParams::for_level(level, coupling, omega0, d_a);
  return p;
}

IntegratorSettings RunConfig::integrator() const {
  IntegratorSettings s;
  s.rtol = solver.rtol;
  s.atol = solver.atol;
  s.stepper = solver.stepper;
  return s;
}

PropagationSettings RunConfig::propagation() const {
  PropagationSettings s;
  s.integrator = integrator();
  s.monitor_eigenvalues = solver.monitor_eigenvalues;
  s.eigen_monitor_stride = static_cast<std::size_t>(std::max(1, solver.eigen_monitor_stride));
  return s;
}

std::vector<ModelLevel> RunConfig::levels() const {
  switch (model_level) {
    case ModelSelection::rwa: return {ModelLevel::rwa};
    case ModelSelection::full: return {ModelLevel::full};
    case ModelSelection::both: return {ModelLevel::rwa, ModelLevel::full};
  }
  return {};
}

RunConfig config_from_json(const json& doc) {
  check_known_keys(doc);
  RunConfig c;
  Reader r(doc, c.defaults_applied);

  if (r.has("schema_version")) {
    const int version = r.get<int>("schema_version", kConfigSchemaVersion);
    if (version != kConfigSchemaVersion) {
      throw ConfigError("schema_version " + std::to_string(version) + " is not supported (expected " +
                        std::to_string(kConfigSchemaVersion) + ")");
    }
  }
  if (!r.has("task")) throw ConfigError("task: required field missing");
  c.task = task_from_string(r.get<std::string>("task", ""));

  const bool pairs = c.task == Task::delta || c.task == Task::sweep || c.task == Task::bloch_siegert;
  const std::string default_level = pairs ? "both" : "rwa";
  c.model_level = selection_from_string(r.get<std::string>("model_level", default_level));
  if (pairs && c.model_level != ModelSelection::both) {
    throw ConfigError("model_level: task " + std::string(to_string(c.task)) + " requires both models");
  }
  if ((c.task == Task::hierarchy || c.task == Task::spectrum_scaling) && c.model_level != ModelSelection::rwa) {
    throw ConfigError("model_level: task " + std::string(to_string(c.task)) +
                      " uses the rotating-wave moment equations; set model_level to rwa");
  }

  c.omega0 = r.get<double>("params.omega0", 1.0);
  c.coupling = r.get<double>("params.coupling", 0.05);
  c.d_a = r.get<double>("params.d_a", RabiParams::diamagnetic_lower_bound(c.coupling, c.omega0));
  for (ModelLevel level : c.levels()) {
    try {
      c.params(level).validate();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("params: ") + e.what());
    }
  }

  c.rates.gamma_a = r.get<double>("rates.gamma_a", 1e-3);
  c.rates.gamma_d = r.get<double>("rates.gamma_d", 1e-3);
  c.rates.gamma_p = r.get<double>("rates.gamma_p", 0.0);
  c.rates.gamma_sigma = r.get<double>("rates.gamma_sigma", 1e-3);
  c.rates.validate();

  c.initial.kind = initial_kind_from_string(r.get<std::string>("initial_state.kind", "fock_atom_ground"));
  c.initial.n0 = r.get<int>("initial_state.n0", c.initial.kind == InitialKind::coherent_atom_ground ? 0 : 10);
  {
    const auto alpha = r.get<std::vector<double>>("initial_state.alpha", {0.0, 0.0});
    if (alpha.size() != 2) throw ConfigError("initial_state.alpha must be [re, im]");
    c.initial.alpha = {alpha[0], alpha[1]};
  }

  c.n_max = r.get<int>("dims.n_max", c.task == Task::sweep ? 20 : 30);
  if (c.n_max < 1) throw ConfigError("dims.n_max must be >= 1");
  if (c.initial.kind != InitialKind::coherent_atom_ground && c.initial.n0 > c.n_max) {
    throw ConfigError("initial_state.n0 (" + std::to_string(c.initial.n0) + ") exceeds dims.n_max (" +
                      std::to_string(c.n_max) + ")");
  }
  c.initial.validate(SpaceDims(c.n_max));
  c.n_cut = r.get<int>("hierarchy.n_cut", default_hierarchy_cutoff(c.initial));
  if (c.n_cut < 1) throw ConfigError("hierarchy.n_cut must be >= 1");

  c.solver.rtol = r.get<double>("solver.rtol", 1e-8);
  c.solver.atol = r.get<double>("solver.atol", 1e-10);
  if (!(c.solver.rtol > 0.0) || !(c.solver.atol > 0.0)) throw ConfigError("solver.rtol and solver.atol must be > 0");
  c.solver.stepper = stepper_from_string(r.get<std::string>("solver.stepper", "rkf78"));
  c.solver.monitor_eigenvalues = r.get<bool>("solver.monitor_eigenvalues", 2 * (c.n_max + 1) <= 60);
  c.solver.eigen_monitor_stride = r.get<int>("solver.eigen_monitor_stride", 50);
  c.solver.convergence_threshold = r.get<double>("solver.convergence_threshold", 1e-4);
  c.solver.convergence_step = r.get<int>("solver.convergence_step", 5);
  if (c.solver.convergence_step < 1) throw ConfigError("solver.convergence_step must be >= 1");

  c.orders = r.get<std::vector<int>>("observables.orders", {1, 3, 5});
  if (c.orders.empty()) throw ConfigError("observables.orders must be nonempty");
  for (int n : c.orders) {
    if (n < 1) throw ConfigError("observables.orders entries must be >= 1");
    if (c.task != Task::hierarchy && n > c.n_max) {
      throw ConfigError("observables.orders entry " + std::to_string(n) + " exceeds dims.n_max (" +
                        std::to_string(c.n_max) + ")");
    }
    if (c.task == Task::hierarchy && n > c.n_cut) {
      throw ConfigError("observables.orders entry " + std::to_string(n) + " exceeds hierarchy.n_cut (" +
                        std::to_string(c.n_cut) + ")");
    }
  }

  c.spectrum.n_min = r.get<int>("spectrum.n_min", 2);
  c.spectrum.n_max = r.get<int>("spectrum.n_max", 20);
  if (c.task == Task::spectrum_scaling && (c.spectrum.n_min < 1 || c.spectrum.n_max <= c.spectrum.n_min)) {
    throw ConfigError("spectrum: need 1 <= n_min < n_max");
  }

  if (c.task == Task::sweep && !r.has("sweep")) {
    throw ConfigError("sweep: the sweep task requires a sweep section with its ranges");
  }
  std::vector<int> default_n(10);
  for (int i = 0; i < 10; ++i) default_n[i] = i + 1;
  c.sweep.n_values = r.get<std::vector<int>>("sweep.n_values", default_n);
  c.sweep.omega_min = r.get<double>("sweep.omega_min", 0.005);
  c.sweep.omega_max = r.get<double>("sweep.omega_max", 0.3);
  c.sweep.omega_count = r.get<int>("sweep.omega_count", 20);
  c.sweep.delta_threshold = r.get<double>("sweep.delta_threshold", 0.1);
  c.sweep.n_max_limit = r.get<int>("sweep.n_max_limit", 40);
  if (c.task == Task::sweep) {
    if (c.sweep.n_values.empty()) throw ConfigError("sweep.n_values must be nonempty");
    for (int n : c.sweep.n_values) {
      if (n < 1 || n > c.n_max) throw ConfigError("sweep.n_values entries must lie in [1, dims.n_max]");
    }
    if (!(c.sweep.omega_min > 0.0) || !(c.sweep.omega_max >= c.sweep.omega_min) || c.sweep.omega_count < 1) {
      throw ConfigError("sweep: need 0 < omega_min <= omega_max and omega_count >= 1");
    }
  }

  c.bloch_siegert.couplings = r.get<std::vector<double>>("bloch_siegert.couplings", {0.05, 0.1});
  c.bloch_siegert.horizon = r.get<double>("bloch_siegert.horizon", 20000.0);
  c.bloch_siegert.n_max = r.get<int>("bloch_siegert.n_max", 12);

  // Horizon and sampling interval resolved last: they depend on the model and state.
  const bool full_present = c.model_level != ModelSelection::rwa;
  const ModelLevel fastest_level = full_present ? ModelLevel::full : ModelLevel::rwa;
  const double max_coupling = c.task == Task::sweep ? c.sweep.omega_max : c.coupling;
  RabiParams fastest = RabiParams::for_level(fastest_level, max_coupling, c.omega0);
  c.solver.horizon = r.get<double>("solver.horizon", default_horizon(c.params(fastest_level), c.rates));
  // A sweep samples each column at its own default unless dt is given.
  const double default_dt = c.task == Task::sweep ? 0.0 : default_sampling_interval(fastest, c.initial.excitation_extent());
  c.solver.dt = r.get<double>("solver.dt", default_dt);
  if (!(c.solver.horizon > 0.0) || !(c.solver.dt > 0.0 || (c.task == Task::sweep && c.solver.dt == 0.0))) {
    throw ConfigError("solver.horizon and solver.dt must be > 0 (sweep: dt 0 selects per-column sampling)");
  }

  c.output_directory = r.get<std::string>("output.directory", "output");
  return c;
}

json config_to_json(const RunConfig& c) {
  json doc;
  doc["schema_version"] = kConfigSchemaVersion;
  doc["task"] = std::string(to_string(c.task));
  doc["model_level"] = std::string(to_string(c.model_level));
  doc["params"] = {{"omega0", c.omega0}, {"coupling", c.coupling}, {"d_a", c.d_a}};
  doc["rates"] = {{"gamma_a", c.rates.gamma_a},
                  {"gamma_d", c.rates.gamma_d},
                  {"gamma_p", c.rates.gamma_p},
                  {"gamma_sigma", c.rates.gamma_sigma}};
  doc["initial_state"] = {{"kind", std::string(to_string(c.initial.kind))},
                          {"n0", c.initial.n0},
                          {"alpha", {c.initial.alpha.real(), c.initial.alpha.imag()}}};
  doc["dims"] = {{"n_max", c.n_max}};
  doc["hierarchy"] = {{"n_cut", c.n_cut}};
  doc["solver"] = {{"rtol", c.solver.rtol},
                   {"atol", c.solver.atol},
                   {"stepper", std::string(to_string(c.solver.stepper))},
                   {"horizon", c.solver.horizon},
                   {"dt", c.solver.dt},
                   {"monitor_eigenvalues", c.solver.monitor_eigenvalues},
                   {"eigen_monitor_stride", c.solver.eigen_monitor_stride},
                   {"convergence_threshold", c.solver.convergence_threshold},
                   {"convergence_step", c.solver.convergence_step}};
  doc["observables"] = {{"orders", c.orders}};
  doc["spectrum"] = {{"n_min", c.spectrum.n_min}, {"n_max", c.spectrum.n_max}};
  doc["sweep"] = {{"n_values", c.sweep.n_values},
                  {"omega_min", c.sweep.omega_min},
                  {"omega_max", c.sweep.omega_max},
                  {"omega_count", c.sweep.omega_count},
                  {"delta_threshold", c.sweep.delta_threshold},
                  {"n_max_limit", c.sweep.n_max_limit}};
  doc["bloch_siegert"] = {{"couplings", c.bloch_siegert.couplings},
                          {"horizon", c.bloch_siegert.horizon},
                          {"n_max", c.bloch_siegert.n_max}};
  doc["output"] = {{"directory", c.output_directory}};
  return doc;
}

void apply_override(json& doc, std::string_view assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw ConfigError("override '" + std::string(assignment) + "' must look like key.path=value");
  }
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const std::size_t dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override key '" + key + "' has an empty component");
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

RunConfig parse_config(const std::filesystem::path& path, std::span<const std::string> overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return config_from_json(doc);
}

std::string config_hash(const RunConfig& config) {
  const std::string text = config_to_json(config).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace rabi
