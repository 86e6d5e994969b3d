#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rabi/lindblad_engine.hpp"
#include "rabi/rabi_model.hpp"

namespace rabi {

/// Composite trapezoid on a (possibly non-uniform) grid.
double trapezoid(std::span<const double> t, std::span<const double> y);

/// Normalized difference of the integrated squared magnitudes,
///   (int |with|^2 dt - int |without|^2 dt) / int |without|^2 dt.
/// Throws NumericalError when the denominator is below 1e-30.
double compute_delta(std::span<const double> times, std::span<const Complex> with,
                     std::span<const Complex> without);

/// Uses column adag{n}a{n}; both series must share the time grid.
double compute_delta(const TimeSeries& series_with, const TimeSeries& series_without, int n);

/// 2 gamma_a n^(2/3).
double strong_coupling_boundary(const RateSet& rates, int n);

/// n^(1/3) Omega > 2 gamma_a n.
bool is_strong_coupling(double coupling, const RateSet& rates, int n);

enum class Regime { weak, strong, ultra_strong, ultra_strong_not_strong };

std::string_view to_string(Regime regime);

/// ultra-strong iff delta >= delta_threshold; the two conditions combine into
/// the four labels (ultra_strong means both hold).
Regime classify_regime(const RabiParams& params, const RateSet& rates, int n, double delta,
                       double delta_threshold);

enum class CellStatus { ok, unconverged, failed };

std::string_view to_string(CellStatus status);

struct SweepSettings {
  RateSet rates;
  InitialState initial;
  /// Starting cutoff. With check_convergence, each column raises it in
  /// convergence_step increments until the check passes or the next step
  /// would exceed n_max_limit.
  int n_max = 20;
  int n_max_limit = 40;
  PropagationSettings propagation;
  /// Non-positive values select the defaults: default_horizon at the largest
  /// coupling, default_sampling_interval per column.
  double horizon = 0.0;
  double dt = 0.0;
  double delta_threshold = 0.1;
  bool check_convergence = true;
  int convergence_step = 5;
  double convergence_threshold = 1e-4;
  int threads = 1;
};

struct RegimeGrid {
  std::vector<int> n_values;
  std::vector<double> omega_values;
  /// Indexed [n][omega]; NaN where a cell failed.
  std::vector<std::vector<double>> delta;
  std::vector<std::vector<Regime>> labels;
  std::vector<std::vector<CellStatus>> status;
  /// Per omega column: truncation difference and failure message.
  std::vector<double> convergence_difference;
  std::vector<std::string> messages;
  /// 2 gamma_a n^(2/3) per n.
  std::vector<double> strong_boundary;
  /// Omega where delta first reaches the threshold, per n.
  std::vector<std::optional<double>> usc_boundary;
  double delta_threshold = 0.1;
  double horizon = 0.0;
  /// Per omega column: sampling interval and the cutoff the values come from.
  std::vector<double> dt;
  std::vector<int> n_max;

  bool complete() const;
  /// ln(delta), NaN where delta <= 0 or invalid.
  std::vector<std::vector<double>> ln_delta() const;
};

/// Logarithmically spaced values, endpoints included.
std::vector<double> log_spaced(double lo, double hi, int count);

/// First crossing of `threshold` along omega, interpolated linearly in
/// (ln omega, delta); nullopt when delta never reaches the threshold.
std::optional<double> usc_crossing(std::span<const double> omegas, std::span<const double> deltas, double threshold);

using SweepProgress = std::function<void(std::size_t done, std::size_t total)>;

/// One paired (rwa, full) density-matrix run per omega provides delta for
/// every n. Failures mark the column and the sweep continues.
RegimeGrid sweep_regime_map(const SweepSettings& settings, std::span<const int> n_values,
                            std::span<const double> omega_values, const SweepProgress& progress = {});

/// Turning points of a zigzag walk through `signal`: a reversal is counted
/// once the series has moved back by more than `relative_prominence` times the
/// magnitude of the running extremum. Noise and slow decays give zero.
int count_resolvable_extrema(std::span<const double> signal, double relative_prominence = 0.01);

struct SpectralPeak {
  double frequency = 0.0;   // angular
  double resolution = 0.0;  // 2 pi / T
  double magnitude = 0.0;
};

/// Dominant nonzero angular frequency of a uniformly sampled real signal:
/// mean removed, Hann window, zero-padded FFT with parabolic peak refinement.
SpectralPeak dominant_frequency(std::span<const double> times, std::span<const double> signal);

struct BlochSiegertSettings {
  RateSet rates;
  InitialState initial = InitialState::fock(0, true);
  int n_max = 12;
  double horizon = 20000.0;
  double dt = 0.0;
  PropagationSettings propagation;
};

struct BlochSiegertResult {
  double shift = 0.0;  // full - rwa
  double resolution = 0.0;
  double rwa_frequency = 0.0;
  double full_frequency = 0.0;
};

/// Dominant-frequency difference of <a^dag a>(t) between full and rwa runs.
BlochSiegertResult bloch_siegert_shift(double coupling, const BlochSiegertSettings& settings);

}  // namespace rabi
