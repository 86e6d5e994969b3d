#include "rabi/regime_analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <thread>

#include <unsupported/Eigen/FFT>

namespace rabi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kDeltaDenominatorFloor = 1e-30;

double integrated_power(std::span<const double> t, std::span<const Complex> x) {
  std::vector<double> p(x.size());
  std::transform(x.begin(), x.end(), p.begin(), [](Complex c) { return std::norm(c); });
  return trapezoid(t, p);
}

}  // namespace

double trapezoid(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size()) {
    throw DimensionError("trapezoid: grid and values differ in length");
  }
  double sum = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) {
    sum += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  }
  return sum;
}

double compute_delta(std::span<const double> times, std::span<const Complex> with, std::span<const Complex> without) {
  if (with.size() != times.size() || without.size() != times.size()) {
    throw DimensionError("compute_delta: series do not share the time grid");
  }
  const double den = integrated_power(times, without);
  if (std::abs(den) < kDeltaDenominatorFloor) {
    throw NumericalError("delta undefined: the reference series integrates to " + std::to_string(den));
  }
  return (integrated_power(times, with) - den) / den;
}

double compute_delta(const TimeSeries& series_with, const TimeSeries& series_without, int n) {
  if (series_with.times != series_without.times) {
    throw DimensionError("compute_delta: mismatched time grids");
  }
  const std::string name = moment_name(n);
  return compute_delta(series_with.times, series_with.at(name), series_without.at(name));
}

double strong_coupling_boundary(const RateSet& rates, int n) {
  return 2.0 * rates.gamma_a * std::pow(static_cast<double>(n), 2.0 / 3.0);
}

bool is_strong_coupling(double coupling, const RateSet& rates, int n) {
  const double nd = n;
  return std::cbrt(nd) * coupling > 2.0 * rates.gamma_a * nd;
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::weak: return "weak";
    case Regime::strong: return "strong";
    case Regime::ultra_strong: return "ultra_strong";
    case Regime::ultra_strong_not_strong: return "ultra_strong_not_strong";
  }
  return "unknown";
}

std::string_view to_string(CellStatus status) {
  switch (status) {
    case CellStatus::ok: return "ok";
    case CellStatus::unconverged: return "unconverged";
    case CellStatus::failed: return "failed";
  }
  return "unknown";
}

Regime classify_regime(const RabiParams& params, const RateSet& rates, int n, double delta, double delta_threshold) {
  if (std::isnan(delta)) {
    throw NumericalError("cannot classify order " + std::to_string(n) + ": delta is undefined");
  }
  const bool strong = is_strong_coupling(params.coupling, rates, n);
  const bool usc = delta >= delta_threshold;
  if (usc) return strong ? Regime::ultra_strong : Regime::ultra_strong_not_strong;
  return strong ? Regime::strong : Regime::weak;
}

bool RegimeGrid::complete() const {
  for (const auto& row : status) {
    for (auto s : row) {
      if (s != CellStatus::ok) return false;
    }
  }
  return true;
}

std::vector<std::vector<double>> RegimeGrid::ln_delta() const {
  std::vector<std::vector<double>> out = delta;
  for (auto& row : out) {
    for (auto& v : row) v = v > 0.0 ? std::log(v) : kNaN;
  }
  return out;
}

std::vector<double> log_spaced(double lo, double hi, int count) {
  if (count < 1 || !(lo > 0.0) || !(hi >= lo)) {
    throw ConfigError("log_spaced needs 0 < lo <= hi and count >= 1");
  }
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < count; ++i) out[i] = std::exp(a + (b - a) * i / (count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

std::optional<double> usc_crossing(std::span<const double> omegas, std::span<const double> deltas, double threshold) {
  for (std::size_t j = 0; j < omegas.size(); ++j) {
    if (std::isnan(deltas[j]) || deltas[j] < threshold) continue;
    if (j == 0 || std::isnan(deltas[j - 1])) return omegas[j];
    const double lo = std::log(omegas[j - 1]);
    const double hi = std::log(omegas[j]);
    const double f = (threshold - deltas[j - 1]) / (deltas[j] - deltas[j - 1]);
    return std::exp(lo + f * (hi - lo));
  }
  return std::nullopt;
}

namespace {

struct ColumnResult {
  std::vector<double> delta;
  CellStatus status = CellStatus::ok;
  double convergence_difference = kNaN;
  int n_max = 0;
  std::string message;
};

ColumnResult run_column(const SweepSettings& s, std::span<const int> n_values, double omega, double horizon,
                        double dt) {
  ColumnResult out;
  out.delta.assign(n_values.size(), kNaN);
  try {
    const std::vector<double> times = uniform_grid(horizon, dt);
    auto run_pair = [&](int n_max) {
      const SpaceDims dims(n_max);
      const DensityMatrix rho0 = DensityMatrix::from_initial_state(s.initial, dims);
      const auto observables = moment_observables(dims, n_values, false);
      std::array<TimeSeries, 2> pair;
      for (ModelLevel level : {ModelLevel::rwa, ModelLevel::full}) {
        const RabiParams params = RabiParams::for_level(level, omega);
        TimeSeries ts = simulate_observables(build_liouvillian(params, s.rates, dims), rho0, times, observables,
                                             s.propagation);
        ts.metadata.params = params;
        ts.metadata.rates = s.rates;
        pair[level == ModelLevel::full ? 1 : 0] = std::move(ts);
      }
      return pair;
    };

    auto difference = [&](const std::array<TimeSeries, 2>& a, const std::array<TimeSeries, 2>& b) {
      double worst = 0.0;
      for (int level = 0; level < 2; ++level) {
        for (int n : n_values) {
          const std::string name = moment_name(n);
          worst = std::max(worst, max_relative_difference(a[level].at(name), b[level].at(name)));
        }
      }
      return worst;
    };

    out.n_max = s.n_max;
    auto base = run_pair(out.n_max);
    if (s.check_convergence) {
      for (;;) {
        const int finer_cut = out.n_max + s.convergence_step;
        auto finer = run_pair(finer_cut);
        out.convergence_difference = difference(base, finer);
        if (out.convergence_difference <= s.convergence_threshold || finer_cut + s.convergence_step > s.n_max_limit) {
          break;
        }
        out.n_max = finer_cut;
        base = std::move(finer);
      }
      if (out.convergence_difference > s.convergence_threshold) {
        out.status = CellStatus::unconverged;
        out.message += "truncation difference " + std::to_string(out.convergence_difference) + " at n_max " +
                       std::to_string(out.n_max) + " exceeds threshold; ";
      }
    }
    for (std::size_t k = 0; k < n_values.size(); ++k) {
      out.delta[k] = compute_delta(base[1], base[0], n_values[k]);
    }
    for (const auto& ts : base) {
      if (ts.metadata.monitors.flagged) {
        out.message += "invariant monitor flagged (" + std::string(to_string(ts.metadata.params.level())) + ":";
        for (const auto& w : ts.metadata.monitors.warnings) out.message += " " + w;
        out.message += "); ";
      }
    }
  } catch (const Error& e) {
    out.status = CellStatus::failed;
    out.message = e.what();
    std::fill(out.delta.begin(), out.delta.end(), kNaN);
  }
  return out;
}

}  // namespace

RegimeGrid sweep_regime_map(const SweepSettings& settings, std::span<const int> n_values,
                            std::span<const double> omega_values, const SweepProgress& progress) {
  if (n_values.empty() || omega_values.empty()) {
    throw ConfigError("sweep ranges must be nonempty");
  }
  for (int n : n_values) {
    if (n < 1 || n > settings.n_max) {
      throw ConfigError("sweep order " + std::to_string(n) + " outside [1, n_max]");
    }
  }
  settings.rates.validate();
  settings.initial.validate(SpaceDims(settings.n_max));
  if (settings.check_convergence && settings.convergence_step < 1) {
    throw ConfigError("sweep convergence_step must be >= 1");
  }

  RegimeGrid grid;
  grid.n_values.assign(n_values.begin(), n_values.end());
  grid.omega_values.assign(omega_values.begin(), omega_values.end());
  grid.delta_threshold = settings.delta_threshold;
  const double max_omega = *std::max_element(omega_values.begin(), omega_values.end());
  grid.horizon = settings.horizon > 0.0 ? settings.horizon
                                        : default_horizon(RabiParams::for_level(ModelLevel::full, max_omega),
                                                          settings.rates);
  for (double omega : omega_values) {
    grid.dt.push_back(settings.dt > 0.0 ? settings.dt
                                        : default_sampling_interval(RabiParams::for_level(ModelLevel::full, omega),
                                                                    settings.initial.excitation_extent()));
  }

  const std::size_t columns = omega_values.size();
  std::vector<ColumnResult> results(columns);
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t j = next++; j < columns; j = next++) {
      results[j] = run_column(settings, n_values, omega_values[j], grid.horizon, grid.dt[j]);
      const std::size_t finished = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, columns);
      }
    }
  };
  const int threads = std::max(1, std::min<int>(settings.threads, static_cast<int>(columns)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  const std::size_t rows = n_values.size();
  grid.delta.assign(rows, std::vector<double>(columns, kNaN));
  grid.labels.assign(rows, std::vector<Regime>(columns, Regime::weak));
  grid.status.assign(rows, std::vector<CellStatus>(columns, CellStatus::ok));
  for (std::size_t j = 0; j < columns; ++j) {
    grid.convergence_difference.push_back(results[j].convergence_difference);
    grid.messages.push_back(results[j].message);
    grid.n_max.push_back(results[j].n_max);
    const RabiParams params = RabiParams::for_level(ModelLevel::full, omega_values[j]);
    for (std::size_t i = 0; i < rows; ++i) {
      grid.delta[i][j] = results[j].delta[i];
      grid.status[i][j] = results[j].status;
      if (results[j].status != CellStatus::failed) {
        grid.labels[i][j] = classify_regime(params, settings.rates, n_values[i], grid.delta[i][j],
                                            settings.delta_threshold);
      }
    }
  }
  for (std::size_t i = 0; i < rows; ++i) {
    grid.strong_boundary.push_back(strong_coupling_boundary(settings.rates, n_values[i]));
    grid.usc_boundary.push_back(usc_crossing(grid.omega_values, grid.delta[i], settings.delta_threshold));
  }
  return grid;
}

int count_resolvable_extrema(std::span<const double> signal, double relative_prominence) {
  if (signal.size() < 3) return 0;
  int count = 0;
  int direction = 0;
  double extremum = signal.front();
  for (std::size_t i = 1; i < signal.size(); ++i) {
    const double v = signal[i];
    const double threshold = relative_prominence * std::abs(extremum);
    if (direction == 0) {
      if (std::abs(v - extremum) > threshold) {
        direction = v > extremum ? 1 : -1;
        extremum = v;
      }
    } else if (direction > 0) {
      if (v > extremum) {
        extremum = v;
      } else if (extremum - v > threshold) {
        ++count;
        direction = -1;
        extremum = v;
      }
    } else {
      if (v < extremum) {
        extremum = v;
      } else if (v - extremum > threshold) {
        ++count;
        direction = 1;
        extremum = v;
      }
    }
  }
  return count;
}

SpectralPeak dominant_frequency(std::span<const double> times, std::span<const double> signal) {
  if (times.size() != signal.size() || times.size() < 8) {
    throw NumericalError("spectral analysis needs at least 8 paired samples");
  }
  const std::size_t m = times.size();
  const double dt = (times.back() - times.front()) / static_cast<double>(m - 1);
  for (std::size_t i = 1; i < m; ++i) {
    if (std::abs((times[i] - times[i - 1]) - dt) > 1e-6 * dt) {
      throw NumericalError("spectral analysis requires a uniform time grid");
    }
  }
  double mean = 0.0;
  for (double v : signal) mean += v;
  mean /= static_cast<double>(m);

  std::size_t padded = 1;
  while (padded < 16 * m) padded <<= 1;
  std::vector<double> windowed(padded, 0.0);
  double scale = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(m - 1));
    windowed[i] = w * (signal[i] - mean);
    scale = std::max(scale, std::abs(signal[i] - mean));
  }
  if (scale < 1e-14) {
    throw NumericalError("no identifiable spectral peak: the signal is constant");
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, windowed);

  // Skip the DC lobe of the window (main lobe half-width 2 bins of the unpadded length).
  const std::size_t half = padded / 2;
  const std::size_t skip = 2 * padded / m + 1;
  std::size_t best = 0;
  double best_mag = -1.0;
  for (std::size_t k = skip; k < half; ++k) {
    const double mag = std::abs(spectrum[k]);
    if (mag > best_mag) {
      best_mag = mag;
      best = k;
    }
  }
  if (best == 0 || best + 1 >= half || best_mag <= 0.0) {
    throw NumericalError("no identifiable spectral peak");
  }
  const double a = std::log(std::abs(spectrum[best - 1]));
  const double b = std::log(best_mag);
  const double c = std::log(std::abs(spectrum[best + 1]));
  const double denom = a - 2.0 * b + c;
  const double offset = denom != 0.0 ? 0.5 * (a - c) / denom : 0.0;
  const double bin = 2.0 * std::numbers::pi / (dt * static_cast<double>(padded));
  SpectralPeak peak;
  peak.frequency = (static_cast<double>(best) + offset) * bin;
  peak.resolution = 2.0 * std::numbers::pi / (times.back() - times.front());
  peak.magnitude = best_mag;
  return peak;
}

BlochSiegertResult bloch_siegert_shift(double coupling, const BlochSiegertSettings& settings) {
  const SpaceDims dims(settings.n_max);
  const DensityMatrix rho0 = DensityMatrix::from_initial_state(settings.initial, dims);
  const RabiParams full = RabiParams::for_level(ModelLevel::full, coupling);
  const double dt = settings.dt > 0.0 ? settings.dt
                                      : default_sampling_interval(full, settings.initial.excitation_extent());
  const std::vector<double> times = uniform_grid(settings.horizon, dt);
  const std::vector<NamedObservable> obs{{moment_name(1), make_moment_observable(dims, 1, AtomicFactor::none)}};

  BlochSiegertResult out;
  SpectralPeak peaks[2];
  for (ModelLevel level : {ModelLevel::rwa, ModelLevel::full}) {
    const RabiParams params = RabiParams::for_level(level, coupling);
    const TimeSeries ts = simulate_observables(build_liouvillian(params, settings.rates, dims), rho0, times, obs,
                                               settings.propagation);
    peaks[level == ModelLevel::full ? 1 : 0] = dominant_frequency(ts.times, ts.real(moment_name(1)));
  }
  out.rwa_frequency = peaks[0].frequency;
  out.full_frequency = peaks[1].frequency;
  out.shift = out.full_frequency - out.rwa_frequency;
  out.resolution = peaks[0].resolution;
  return out;
}

}  // namespace rabi
