#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rabi/integrator.hpp"
#include "rabi/operator_algebra.hpp"
#include "rabi/rabi_model.hpp"

namespace rabi {

enum class InitialKind { fock_atom_ground, fock_atom_excited, coherent_atom_ground };

std::string_view to_string(InitialKind kind);
InitialKind initial_kind_from_string(std::string_view text);

struct InitialState {
  InitialKind kind = InitialKind::fock_atom_ground;
  int n0 = 10;
  Complex alpha{0.0, 0.0};

  static InitialState fock(int n0, bool atom_excited = false);
  static InitialState coherent(Complex alpha);

  /// Throws ConfigError when n0 > n_max or |alpha|^2 > n_max / 4.
  void validate(SpaceDims dims) const;
  /// Largest photon number carried by the state (n0, or a ~ |alpha|^2 + 6|alpha| estimate).
  int photon_extent() const;
  /// Total initial excitation number estimate, used for grid-density defaults.
  int excitation_extent() const;
};

class DensityMatrix {
 public:
  DensityMatrix(SpaceDims dims, DenseMatrix values);

  static DensityMatrix pure(SpaceDims dims, const Eigen::VectorXcd& psi);
  static DensityMatrix from_initial_state(const InitialState& state, SpaceDims dims);

  const SpaceDims& dims() const { return dims_; }
  const DenseMatrix& values() const { return values_; }

  Complex trace() const { return values_.trace(); }
  double hermiticity_error() const;
  /// Smallest eigenvalue of the Hermitian part.
  double min_eigenvalue() const;
  Complex expectation(const SparseOperator& op) const;

  /// Column-stacked vec(rho).
  Eigen::VectorXcd vectorized() const;
  static DensityMatrix from_vectorized(SpaceDims dims, const Eigen::VectorXcd& vec);

 private:
  SpaceDims dims_;
  DenseMatrix values_;
};

/// Tr(O rho) summed over the nonzeros of O.
Complex expectation(const SparseOperator& op, const DenseMatrix& rho);

/// vec(rho_dot) = matrix * vec(rho), column stacking.
struct Liouvillian {
  SpaceDims dims;
  SparseMatrix matrix;
  /// Diagonal energies E_i of a free part H0 contained in the Hamiltonian.
  /// When set, propagation runs in the interaction picture of H0, where the
  /// generator only carries the beat frequencies (E_i - E_j) - (E_k - E_l).
  /// Empty: lab frame.
  std::vector<double> frame_energies;
};

Liouvillian build_liouvillian(const SparseOperator& hamiltonian,
                              const std::vector<DissipatorChannel>& channels);

/// Convenience: H plus the four channels.
Liouvillian build_liouvillian(const RabiParams& params, const RateSet& rates, SpaceDims dims);

DenseMatrix apply_liouvillian(const Liouvillian& l, const DenseMatrix& rho);

struct PropagationSettings {
  IntegratorSettings integrator;
  bool monitor_eigenvalues = false;
  std::size_t eigen_monitor_stride = 1;
  int eigen_monitor_max_dim = 60;
  /// Restrict L to the subspace reachable from rho0's support (exact).
  bool reduce_to_reachable = true;
  /// Integrate in the interaction picture of Liouvillian::frame_energies
  /// (exact; states handed to observers are always lab-frame).
  bool rotating_frame = true;
};

/// Worst invariant deviations seen at the sampled times.
struct MonitorSummary {
  double max_trace_error = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
  /// Largest |Im| of a moment column relative to max(1, largest |Re| of that column).
  double max_moment_imaginary = 0.0;
  bool flagged = false;
  std::vector<std::string> warnings;
  std::size_t rhs_evaluations = 0;
  std::size_t state_dimension = 0;
  std::size_t full_dimension = 0;

  void merge(const MonitorSummary& other);
};

using StateObserver = std::function<void(std::size_t index, double t, const DensityMatrix& rho)>;

/// Streams rho(t) at every requested time to `observer`.
MonitorSummary propagate(const Liouvillian& l, const DensityMatrix& rho0, std::span<const double> times,
                         const PropagationSettings& settings, const StateObserver& observer);

struct Trajectory {
  SpaceDims dims;
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  MonitorSummary monitors;
};

/// Stores every sampled state; intended for small spaces.
Trajectory propagate_states(const Liouvillian& l, const DensityMatrix& rho0, std::span<const double> times,
                            const PropagationSettings& settings);

struct NamedObservable {
  std::string name;
  SparseOperator op;
};

/// "adag3a3" for <a^dag^3 a^3>, "adag3a3_pop" for <a^dag^3 a^3 sigma^dag sigma>.
std::string moment_name(int n, bool with_population = false);

std::vector<NamedObservable> moment_observables(SpaceDims dims, std::span<const int> orders,
                                                bool with_population);

struct SeriesMetadata {
  std::string solver;  // "density_matrix" or "hierarchy"
  RabiParams params;
  RateSet rates;
  int truncation = 0;  // n_max for density_matrix, n_cut for hierarchy
  IntegratorSettings integrator;
  MonitorSummary monitors;
};

struct SeriesColumn {
  std::string name;
  std::vector<Complex> values;
};

class TimeSeries {
 public:
  std::vector<double> times;
  std::vector<SeriesColumn> columns;
  SeriesMetadata metadata;

  bool has(std::string_view name) const;
  /// Throws Error when the column is missing.
  const std::vector<Complex>& at(std::string_view name) const;
  void add(std::string name, std::vector<Complex> values);
  std::vector<double> real(std::string_view name) const;
};

TimeSeries sample_observables(const Trajectory& trajectory, const std::vector<NamedObservable>& observables);

/// Propagates and evaluates observables on the fly without storing states.
TimeSeries simulate_observables(const Liouvillian& l, const DensityMatrix& rho0, std::span<const double> times,
                                const std::vector<NamedObservable>& observables,
                                const PropagationSettings& settings);

/// 5/gamma_a when gamma_a > 0; 5/max_rate when only other rates are set;
/// 20 Rabi periods 2 pi / Omega for a closed system; 100 otherwise.
double default_horizon(const RabiParams& params, const RateSet& rates);

/// Sampling interval resolving the fastest Rabi oscillation 2 Omega sqrt(n + 1)
/// (n the excitation extent) by `points_per_period` samples, capped at 8
/// samples per 2 omega0 period when counter-rotating terms are present.
double default_sampling_interval(const RabiParams& params, int excitation_extent, int points_per_period = 20);

/// times[i] = i * horizon / steps with steps = ceil(horizon / dt).
std::vector<double> uniform_grid(double horizon, double dt);

/// max_t |a(t) - b(t)| / max_t |b(t)|; zero when both vanish identically.
double max_relative_difference(std::span<const Complex> a, std::span<const Complex> b);

struct ConvergenceStep {
  int n_max_from = 0;
  int n_max_to = 0;
  double max_relative_difference = 0.0;
  std::string worst_observable;
};

struct ConvergenceReport {
  double threshold = 1e-4;
  std::vector<ConvergenceStep> steps;
  /// The finest consecutive pair is within threshold.
  bool passed = false;

  bool monotone_decreasing() const;
};

/// Reruns at each truncation in `n_max_list` and compares the tracked
/// columns (all shared columns when `tracked` is empty).
ConvergenceReport convergence_check(const std::function<TimeSeries(int n_max)>& run_at,
                                    std::span<const int> n_max_list, double threshold = 1e-4,
                                    std::span<const std::string> tracked = {});

}  // namespace rabi
