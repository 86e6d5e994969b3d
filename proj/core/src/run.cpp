#include "rabi/run.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "rabi/lindblad_engine.hpp"
#include "rabi/moment_hierarchy.hpp"
#include "rabi/regime_analysis.hpp"

#ifndef RABI_VERSION
#define RABI_VERSION "unknown"
#endif

namespace rabi {

using nlohmann::json;

namespace {

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::string& hash, const std::string& title)
      : out_(path), path_(path) {
    if (!out_) throw Error("cannot write " + path.string());
    out_ << "# " << title << "\n";
    out_ << "# config_hash: " << hash << "\n";
    out_ << "# code_version: " << RABI_VERSION << "\n";
  }

  void comment(const std::string& text) { out_ << "# " << text << "\n"; }

  void header(const std::vector<std::string>& names) { row_strings(names); }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (i) out_ << ',';
      out_ << format_double(values[i]);
    }
    out_ << '\n';
  }

  void row_strings(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::ofstream out_;
  std::filesystem::path path_;
};

json monitors_to_json(const MonitorSummary& m) {
  json j = {{"max_trace_error", m.max_trace_error},
            {"max_hermiticity_error", m.max_hermiticity_error},
            {"max_moment_imaginary", m.max_moment_imaginary},
            {"flagged", m.flagged},
            {"warnings", m.warnings},
            {"rhs_evaluations", m.rhs_evaluations},
            {"state_dimension", m.state_dimension},
            {"full_dimension", m.full_dimension}};
  j["min_eigenvalue"] = std::isnan(m.min_eigenvalue) ? json(nullptr) : json(m.min_eigenvalue);
  return j;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

class Runner {
 public:
  Runner(const RunConfig& config, const RunOptions& options)
      : c_(config),
        opt_(options),
        hash_(config_hash(config)),
        dir_(options.output_directory.empty() ? std::filesystem::path(config.output_directory)
                                              : options.output_directory) {}

  RunReport execute() {
    RunReport report;
    report.config_hash = hash_;
    std::filesystem::create_directories(dir_);
    manifest_["schema_version"] = kConfigSchemaVersion;
    manifest_["code_version"] = RABI_VERSION;
    manifest_["config_hash"] = hash_;
    manifest_["config"] = config_to_json(c_);
    manifest_["defaults_applied"] = c_.defaults_applied;
    manifest_["rate_convention"] =
        "cavity gamma_a(2 a rho a^dag - {a^dag a, rho}); atomic decay gamma_d and pump gamma_p likewise with "
        "sigma and sigma^dag; dephasing (gamma_sigma/2)(D rho D - rho). Units: omega0 = 1.";
    try {
      switch (c_.task) {
        case Task::timeseries: timeseries(); break;
        case Task::hierarchy: hierarchy(); break;
        case Task::spectrum_scaling: spectrum(); break;
        case Task::delta: delta(); break;
        case Task::sweep: sweep(); break;
        case Task::convergence: convergence(); break;
        case Task::bloch_siegert: bloch_siegert(); break;
      }
    } catch (const ConfigError& e) {
      exit_code_ = kExitConfigError;
      message_ = e.what();
    } catch (const Error& e) {
      exit_code_ = kExitNumericalFailure;
      message_ = e.what();
    }
    manifest_["monitors"] = monitors_to_json(monitors_);
    manifest_["status"] = {{"exit_code", exit_code_}, {"message", message_}};
    json outputs = json::array();
    for (const auto& p : outputs_) outputs.push_back(p.filename().string());
    manifest_["outputs"] = outputs;
    const auto manifest_path = dir_ / "manifest.json";
    std::ofstream(manifest_path) << manifest_.dump(2) << "\n";
    outputs_.push_back(manifest_path);

    report.exit_code = exit_code_;
    report.outputs = outputs_;
    report.message = message_;
    return report;
  }

 private:
  void log(const std::string& line) {
    if (opt_.log) *opt_.log << line << std::endl;
  }

  std::vector<double> grid() const { return uniform_grid(c_.solver.horizon, c_.solver.dt); }

  TimeSeries density_matrix_run(ModelLevel level, const std::vector<double>& times, int n_max) {
    const SpaceDims dims(n_max);
    const RabiParams params = c_.params(level);
    const auto observables = moment_observables(dims, c_.orders, true);
    TimeSeries ts = simulate_observables(build_liouvillian(params, c_.rates, dims),
                                         DensityMatrix::from_initial_state(c_.initial, dims), times, observables,
                                         c_.propagation());
    ts.metadata.params = params;
    ts.metadata.rates = c_.rates;
    monitors_.merge(ts.metadata.monitors);
    return ts;
  }

  void write_series(const TimeSeries& ts, const std::string& file, const std::string& title) {
    CsvWriter csv(dir_ / file, hash_, title);
    csv.comment("solver: " + ts.metadata.solver + ", truncation: " + std::to_string(ts.metadata.truncation) +
                ", model_level: " + std::string(to_string(ts.metadata.params.level())));
    std::vector<std::string> names{"t"};
    std::vector<const std::vector<Complex>*> cols;
    std::vector<int> orders;
    for (int n : c_.orders) {
      if (!ts.has(moment_name(n))) continue;
      names.push_back("re_" + moment_name(n));
      cols.push_back(&ts.at(moment_name(n)));
      orders.push_back(n);
    }
    for (int n : c_.orders) {
      if (!ts.has(moment_name(n, true))) continue;
      names.push_back("re_" + moment_name(n, true));
      cols.push_back(&ts.at(moment_name(n, true)));
    }
    for (int n : orders) names.push_back("t_times_" + std::to_string(n));
    csv.header(names);
    std::vector<double> row;
    for (std::size_t i = 0; i < ts.times.size(); ++i) {
      row.clear();
      row.push_back(ts.times[i]);
      for (const auto* col : cols) row.push_back((*col)[i].real());
      for (int n : orders) row.push_back(ts.times[i] * n);
      csv.row(row);
    }
    outputs_.push_back(csv.path());
  }

  void timeseries() {
    const auto times = grid();
    json runs = json::array();
    for (ModelLevel level : c_.levels()) {
      log("density-matrix run, model " + std::string(to_string(level)));
      const TimeSeries ts = density_matrix_run(level, times, c_.n_max);
      const std::string file = "timeseries_" + std::string(to_string(level)) + ".csv";
      write_series(ts, file, "density-matrix time series");
      runs.push_back({{"model_level", to_string(level)}, {"monitors", monitors_to_json(ts.metadata.monitors)}});
    }
    manifest_["runs"] = runs;
  }

  void hierarchy() {
    const auto times = grid();
    const HierarchyMatrix h = build_hierarchy(c_.params(ModelLevel::rwa), c_.rates, c_.n_cut);
    const TimeSeries ts = integrate_hierarchy(h, initial_moments_from_state(c_.initial, c_.n_cut), times,
                                              c_.integrator());
    monitors_.merge(ts.metadata.monitors);
    write_series(ts, "hierarchy.csv", "moment-hierarchy time series");
    manifest_["runs"] = json::array({{{"solver", "hierarchy"}, {"n_cut", c_.n_cut}}});
  }

  void spectrum() {
    const SpectralScaling s =
        spectral_scaling(c_.params(ModelLevel::rwa), c_.rates, c_.spectrum.n_min, c_.spectrum.n_max);
    CsvWriter csv(dir_ / "spectrum.csv", hash_, "leading-order block spectra");
    csv.header({"n", "re_lambda_max", "im_lambda_max", "oscillating_mode_damping", "lambda1_re", "lambda1_im",
                "lambda2_re", "lambda2_im", "lambda3_re", "lambda3_im", "lambda4_re", "lambda4_im"});
    for (const auto& sp : s.spectra) {
      std::vector<double> row{static_cast<double>(sp.n), sp.relaxation_rate(), sp.oscillation_frequency(),
                              sp.oscillating_mode_damping()};
      for (const auto& e : sp.eigenvalues) {
        row.push_back(e.real());
        row.push_back(e.imag());
      }
      csv.row(row);
    }
    outputs_.push_back(csv.path());
    manifest_["spectral_fit"] = {
        {"frequency_exponent", s.frequency.exponent},
        {"frequency_exponent_stderr", s.frequency.exponent_stderr},
        {"frequency_prefactor", s.frequency.prefactor},
        {"relaxation_exponent", s.relaxation.exponent},
        {"relaxation_exponent_stderr", s.relaxation.exponent_stderr},
        {"relaxation_prefactor", s.relaxation.prefactor},
        {"relaxation_linear_slope", s.relaxation_linear.slope},
        {"relaxation_linear_slope_stderr", s.relaxation_linear.slope_stderr},
        {"relaxation_linear_intercept", s.relaxation_linear.intercept}};
  }

  void delta() {
    const auto times = grid();
    const TimeSeries rwa = density_matrix_run(ModelLevel::rwa, times, c_.n_max);
    const TimeSeries full = density_matrix_run(ModelLevel::full, times, c_.n_max);
    write_series(rwa, "timeseries_rwa.csv", "density-matrix time series");
    write_series(full, "timeseries_full.csv", "density-matrix time series");
    CsvWriter csv(dir_ / "delta.csv", hash_, "integrated full-vs-rwa deviation per order");
    csv.header({"n", "delta", "ln_delta", "omega_sc", "label"});
    json undefined = json::array();
    for (int n : c_.orders) {
      const std::string omega_sc = format_double(strong_coupling_boundary(c_.rates, n));
      double d = 0.0;
      try {
        d = compute_delta(full, rwa, n);
      } catch (const NumericalError& e) {
        csv.row_strings({std::to_string(n), "nan", "nan", omega_sc, "undefined"});
        undefined.push_back({{"n", n}, {"reason", e.what()}});
        continue;
      }
      const Regime label = classify_regime(c_.params(ModelLevel::full), c_.rates, n, d, c_.sweep.delta_threshold);
      csv.row_strings({std::to_string(n), format_double(d), d > 0 ? format_double(std::log(d)) : "nan", omega_sc,
                       std::string(to_string(label))});
    }
    manifest_["undefined_delta"] = undefined;
    outputs_.push_back(csv.path());
  }

  void sweep() {
    SweepSettings s;
    s.rates = c_.rates;
    s.initial = c_.initial;
    s.n_max = c_.n_max;
    s.n_max_limit = c_.sweep.n_max_limit;
    s.propagation = c_.propagation();
    s.horizon = c_.solver.horizon;
    s.dt = c_.solver.dt;
    s.delta_threshold = c_.sweep.delta_threshold;
    s.convergence_step = c_.solver.convergence_step;
    s.convergence_threshold = c_.solver.convergence_threshold;
    s.threads = opt_.threads;
    const auto omegas = log_spaced(c_.sweep.omega_min, c_.sweep.omega_max, c_.sweep.omega_count);
    const RegimeGrid grid = sweep_regime_map(s, c_.sweep.n_values, omegas, [this](std::size_t done, std::size_t total) {
      log("sweep column " + std::to_string(done) + "/" + std::to_string(total));
    });

    json g;
    g["schema_version"] = kConfigSchemaVersion;
    g["config_hash"] = hash_;
    g["n_values"] = grid.n_values;
    g["omega_values"] = grid.omega_values;
    g["delta_threshold"] = grid.delta_threshold;
    g["horizon"] = grid.horizon;
    g["dt"] = grid.dt;
    g["n_max"] = grid.n_max;
    json delta = json::array(), ln_delta = json::array(), labels = json::array(), status = json::array();
    const auto ln = grid.ln_delta();
    for (std::size_t i = 0; i < grid.n_values.size(); ++i) {
      json dr = json::array(), lr = json::array(), lab = json::array(), st = json::array();
      for (std::size_t j = 0; j < grid.omega_values.size(); ++j) {
        dr.push_back(number_or_null(grid.delta[i][j]));
        lr.push_back(number_or_null(ln[i][j]));
        lab.push_back(grid.status[i][j] == CellStatus::failed ? "invalid" : std::string(to_string(grid.labels[i][j])));
        st.push_back(std::string(to_string(grid.status[i][j])));
      }
      delta.push_back(dr);
      ln_delta.push_back(lr);
      labels.push_back(lab);
      status.push_back(st);
    }
    g["delta"] = delta;
    g["ln_delta"] = ln_delta;
    g["labels"] = labels;
    g["status"] = status;
    json conv = json::array();
    for (double v : grid.convergence_difference) conv.push_back(number_or_null(v));
    g["convergence_difference"] = conv;
    g["messages"] = grid.messages;
    json sc = json::array(), usc = json::array();
    for (std::size_t i = 0; i < grid.n_values.size(); ++i) {
      sc.push_back(grid.strong_boundary[i]);
      usc.push_back(grid.usc_boundary[i] ? json(*grid.usc_boundary[i]) : json(nullptr));
    }
    g["boundaries"] = {{"omega_sc", sc}, {"omega_usc", usc}};
    g["complete"] = grid.complete();
    const auto grid_path = dir_ / "regime_grid.json";
    std::ofstream(grid_path) << g.dump(2) << "\n";
    outputs_.push_back(grid_path);

    CsvWriter cells(dir_ / "regime_grid.csv", hash_, "delta and regime label per (n, omega)");
    cells.header({"n", "omega", "delta", "ln_delta", "label", "status"});
    for (std::size_t i = 0; i < grid.n_values.size(); ++i) {
      for (std::size_t j = 0; j < grid.omega_values.size(); ++j) {
        cells.row_strings({std::to_string(grid.n_values[i]), format_double(grid.omega_values[j]),
                           format_double(grid.delta[i][j]), format_double(ln[i][j]),
                           std::string(to_string(grid.labels[i][j])), std::string(to_string(grid.status[i][j]))});
      }
    }
    outputs_.push_back(cells.path());

    CsvWriter bounds(dir_ / "boundaries.csv", hash_, "strong (2 gamma_a n^(2/3)) and ultra-strong boundaries");
    bounds.header({"n", "omega_sc", "omega_usc"});
    for (std::size_t i = 0; i < grid.n_values.size(); ++i) {
      bounds.row_strings({std::to_string(grid.n_values[i]), format_double(grid.strong_boundary[i]),
                          grid.usc_boundary[i] ? format_double(*grid.usc_boundary[i]) : "nan"});
    }
    outputs_.push_back(bounds.path());

    if (!grid.complete() && exit_code_ == kExitSuccess) {
      exit_code_ = kExitPartialSweep;
      message_ = "sweep finished with invalid or unconverged cells";
    }
  }

  void convergence() {
    const auto times = grid();
    std::vector<std::string> tracked;
    for (int n : c_.orders) tracked.push_back(moment_name(n));
    CsvWriter csv(dir_ / "convergence.csv", hash_, "truncation convergence of the tracked moments");
    csv.header({"model_level", "n_max_from", "n_max_to", "max_relative_difference", "worst_observable", "passed"});
    bool all_passed = true;
    for (ModelLevel level : c_.levels()) {
      const std::vector<int> n_list{c_.n_max, c_.n_max + c_.solver.convergence_step,
                                    c_.n_max + 2 * c_.solver.convergence_step};
      const ConvergenceReport report = convergence_check(
          [&](int n_max) { return density_matrix_run(level, times, n_max); }, n_list,
          c_.solver.convergence_threshold, tracked);
      for (const auto& step : report.steps) {
        csv.row_strings({std::string(to_string(level)), std::to_string(step.n_max_from), std::to_string(step.n_max_to),
                         format_double(step.max_relative_difference), step.worst_observable,
                         report.passed ? "true" : "false"});
      }
      all_passed = all_passed && report.passed;
    }
    outputs_.push_back(csv.path());
    manifest_["convergence_passed"] = all_passed;
  }

  void bloch_siegert() {
    BlochSiegertSettings s;
    s.rates = c_.rates;
    s.initial = c_.initial;
    s.n_max = c_.bloch_siegert.n_max;
    s.horizon = c_.bloch_siegert.horizon;
    s.propagation = c_.propagation();
    s.propagation.monitor_eigenvalues = false;
    CsvWriter csv(dir_ / "bloch_siegert.csv", hash_, "dominant-frequency shift of <a^dag a>, full minus rwa");
    csv.header({"coupling", "rwa_frequency", "full_frequency", "shift", "resolution"});
    for (double g : c_.bloch_siegert.couplings) {
      log("bloch-siegert runs at coupling " + format_double(g));
      const BlochSiegertResult r = bloch_siegert_shift(g, s);
      csv.row({g, r.rwa_frequency, r.full_frequency, r.shift, r.resolution});
    }
    outputs_.push_back(csv.path());
  }

  const RunConfig& c_;
  const RunOptions& opt_;
  std::string hash_;
  std::filesystem::path dir_;
  json manifest_;
  MonitorSummary monitors_;
  std::vector<std::filesystem::path> outputs_;
  int exit_code_ = kExitSuccess;
  std::string message_;
};

}  // namespace

RunReport run(const RunConfig& config, const RunOptions& options) {
  Runner runner(config, options);
  return runner.execute();
}

}  // namespace rabi
