#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rabi/integrator.hpp"
#include "rabi/lindblad_engine.hpp"
#include "rabi/rabi_model.hpp"

namespace rabi {

inline constexpr int kConfigSchemaVersion = 1;

enum class Task { timeseries, hierarchy, spectrum_scaling, delta, sweep, convergence, bloch_siegert };
enum class ModelSelection { rwa, full, both };

std::string_view to_string(Task task);
std::string_view to_string(ModelSelection selection);

struct SolverConfig {
  double rtol = 1e-8;
  double atol = 1e-10;
  StepperKind stepper = StepperKind::rkf78;
  double horizon = 0.0;
  double dt = 0.0;
  bool monitor_eigenvalues = false;
  int eigen_monitor_stride = 50;
  double convergence_threshold = 1e-4;
  int convergence_step = 5;
};

struct SpectrumConfig {
  int n_min = 2;
  int n_max = 20;
};

struct SweepConfig {
  std::vector<int> n_values;
  double omega_min = 0.005;
  double omega_max = 0.3;
  int omega_count = 20;
  double delta_threshold = 0.1;
  int n_max_limit = 40;
};

struct BlochSiegertConfig {
  std::vector<double> couplings;
  double horizon = 20000.0;
  int n_max = 12;
};

/// Fully resolved run description. Every optional field of the input file
/// is materialized here, and `defaults_applied` lists the fields that were
/// filled in rather than read.
struct RunConfig {
  Task task = Task::timeseries;
  ModelSelection model_level = ModelSelection::rwa;
  double omega0 = 1.0;
  double coupling = 0.05;
  double d_a = 0.0;
  RateSet rates;
  InitialState initial;
  int n_max = 30;
  int n_cut = 30;
  SolverConfig solver;
  std::vector<int> orders;
  SpectrumConfig spectrum;
  SweepConfig sweep;
  BlochSiegertConfig bloch_siegert;
  std::string output_directory = "output";
  std::vector<std::string> defaults_applied;

  RabiParams params(ModelLevel level) const;
  PropagationSettings propagation() const;
  IntegratorSettings integrator() const;
  std::vector<ModelLevel> levels() const;
};

/// Validates and resolves a config document. Throws ConfigError with the
/// dotted field name in the message.
RunConfig config_from_json(const nlohmann::json& doc);

/// Canonical document with all defaults materialized.
nlohmann::json config_to_json(const RunConfig& config);

/// Applies "a.b.c=value" overrides; value is parsed as JSON when possible,
/// otherwise taken as a string.
void apply_override(nlohmann::json& doc, std::string_view assignment);

RunConfig parse_config(const std::filesystem::path& path, std::span<const std::string> overrides = {});

/// FNV-1a 64 of the canonical config dump, as 16 hex digits.
std::string config_hash(const RunConfig& config);

/// printf("%.17g").
std::string format_double(double v);

}  // namespace rabi
