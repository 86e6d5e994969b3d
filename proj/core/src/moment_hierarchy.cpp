#include "rabi/moment_hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace rabi {

MomentVector::MomentVector(int n_cut)
    : n_cut_(n_cut), field_(std::max(n_cut, 0)), population_(std::max(n_cut, 0)), coherence_(std::max(n_cut, 0)) {
  if (n_cut < 1) {
    throw ConfigError("hierarchy cutoff n_cut must be >= 1, got " + std::to_string(n_cut));
  }
}

void MomentVector::check(int n) const {
  if (n < 1 || n > n_cut_) {
    throw TruncationError("moment order " + std::to_string(n) + " outside [1, n_cut=" + std::to_string(n_cut_) + "]");
  }
}

double MomentVector::field(int n) const { check(n); return field_[n - 1]; }
double MomentVector::population(int n) const { check(n); return population_[n - 1]; }
Complex MomentVector::coherence(int n) const { check(n); return coherence_[n - 1]; }
void MomentVector::set_field(int n, double v) { check(n); field_[n - 1] = v; }
void MomentVector::set_population(int n, double v) { check(n); population_[n - 1] = v; }
void MomentVector::set_coherence(int n, Complex v) { check(n); coherence_[n - 1] = v; }

std::vector<double> MomentVector::to_real_state() const {
  std::vector<double> out(4 * static_cast<std::size_t>(n_cut_));
  for (int n = 1; n <= n_cut_; ++n) {
    out[HierarchyMatrix::field_index(n_cut_, n)] = field_[n - 1];
    out[HierarchyMatrix::population_index(n_cut_, n)] = population_[n - 1];
    out[HierarchyMatrix::coherence_re_index(n_cut_, n)] = coherence_[n - 1].real();
    out[HierarchyMatrix::coherence_im_index(n_cut_, n)] = coherence_[n - 1].imag();
  }
  return out;
}

MomentVector MomentVector::from_real_state(int n_cut, std::span<const double> state) {
  if (state.size() != 4 * static_cast<std::size_t>(n_cut)) {
    throw DimensionError("real moment state has length " + std::to_string(state.size()) + ", expected " +
                         std::to_string(4 * n_cut));
  }
  MomentVector m(n_cut);
  for (int n = 1; n <= n_cut; ++n) {
    m.field_[n - 1] = state[HierarchyMatrix::field_index(n_cut, n)];
    m.population_[n - 1] = state[HierarchyMatrix::population_index(n_cut, n)];
    m.coherence_[n - 1] = {state[HierarchyMatrix::coherence_re_index(n_cut, n)],
                           state[HierarchyMatrix::coherence_im_index(n_cut, n)]};
  }
  return m;
}

HierarchyMatrix build_hierarchy(const RabiParams& params, const RateSet& rates, int n_cut) {
  params.validate();
  rates.validate();
  if (params.include_counter_rotating || params.include_diamagnetic) {
    throw ConfigError("the moment hierarchy covers the rotating-wave model only (model_level rwa)");
  }
  if (n_cut < 1) {
    throw ConfigError("hierarchy cutoff n_cut must be >= 1, got " + std::to_string(n_cut));
  }
  const double g = params.coupling;
  const double ga = rates.gamma_a;
  const double gd = rates.gamma_d;
  const double gp = rates.gamma_p;
  const double gs = rates.gamma_sigma;

  const int dim = 4 * n_cut;
  std::vector<Eigen::Triplet<double>> t;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
  auto x1 = [n_cut](int n) { return HierarchyMatrix::field_index(n_cut, n); };
  auto x2 = [n_cut](int n) { return HierarchyMatrix::population_index(n_cut, n); };
  auto u = [n_cut](int n) { return HierarchyMatrix::coherence_re_index(n_cut, n); };
  auto v = [n_cut](int n) { return HierarchyMatrix::coherence_im_index(n_cut, n); };

  for (int n = 1; n <= n_cut; ++n) {
    const double nd = n;
    // x1' = -2 ga n x1 + i g n (x3 - conj x3) = -2 ga n x1 - 2 g n Im x3
    t.emplace_back(x1(n), x1(n), -2.0 * ga * nd);
    t.emplace_back(x1(n), v(n), -2.0 * g * nd);

    // x2' = 2 gp x1(n-1) - (2(n-1) ga + 2 gp + 2 gd) x2 - i g (x3 - conj x3)
    if (n == 1) {
      b[x2(n)] += 2.0 * gp;
    } else {
      t.emplace_back(x2(n), x1(n - 1), 2.0 * gp);
    }
    t.emplace_back(x2(n), x2(n), -(2.0 * (nd - 1.0) * ga + 2.0 * gp + 2.0 * gd));
    t.emplace_back(x2(n), v(n), 2.0 * g);

    // x3' = -((2n-1) ga + gs + gp + gd) x3 + i g x1(n) - 2 i g x2(n+1) - i g n x2(n)
    const double r3 = (2.0 * nd - 1.0) * ga + gs + gp + gd;
    t.emplace_back(u(n), u(n), -r3);
    t.emplace_back(v(n), v(n), -r3);
    t.emplace_back(v(n), x1(n), g);
    if (n < n_cut) t.emplace_back(v(n), x2(n + 1), -2.0 * g);
    t.emplace_back(v(n), x2(n), -g * nd);
  }

  HierarchyMatrix h;
  h.n_cut = n_cut;
  h.params = params;
  h.rates = rates;
  h.a.resize(dim, dim);
  h.a.setFromTriplets(t.begin(), t.end());
  h.a.prune(0.0);
  h.a.makeCompressed();
  h.b = std::move(b);
  return h;
}

Eigen::SparseMatrix<Complex, Eigen::RowMajor> HierarchyMatrix::complex_form() const {
  const double g = params.coupling;
  const double ga = rates.gamma_a;
  const double gd = rates.gamma_d;
  const double gp = rates.gamma_p;
  const double gs = rates.gamma_sigma;
  const Complex i(0.0, 1.0);
  const int N = n_cut;
  auto x1 = [](int n) { return n - 1; };
  auto x2 = [N](int n) { return N + n - 1; };
  auto x3 = [N](int n) { return 2 * N + n - 1; };
  auto x3c = [N](int n) { return 3 * N + n - 1; };
  std::vector<Eigen::Triplet<Complex>> t;
  for (int n = 1; n <= N; ++n) {
    const double nd = n;
    t.emplace_back(x1(n), x1(n), -2.0 * ga * nd);
    t.emplace_back(x1(n), x3(n), i * g * nd);
    t.emplace_back(x1(n), x3c(n), -i * g * nd);

    if (n > 1) t.emplace_back(x2(n), x1(n - 1), 2.0 * gp);
    t.emplace_back(x2(n), x2(n), -(2.0 * (nd - 1.0) * ga + 2.0 * gp + 2.0 * gd));
    t.emplace_back(x2(n), x3(n), -i * g);
    t.emplace_back(x2(n), x3c(n), i * g);

    const double r3 = (2.0 * nd - 1.0) * ga + gs + gp + gd;
    t.emplace_back(x3(n), x3(n), -r3);
    t.emplace_back(x3(n), x1(n), i * g);
    if (n < N) t.emplace_back(x3(n), x2(n + 1), -2.0 * i * g);
    t.emplace_back(x3(n), x2(n), -i * g * nd);

    t.emplace_back(x3c(n), x3c(n), -r3);
    t.emplace_back(x3c(n), x1(n), -i * g);
    if (n < N) t.emplace_back(x3c(n), x2(n + 1), 2.0 * i * g);
    t.emplace_back(x3c(n), x2(n), i * g * nd);
  }
  Eigen::SparseMatrix<Complex, Eigen::RowMajor> m(4 * N, 4 * N);
  m.setFromTriplets(t.begin(), t.end());
  m.prune(Complex(0.0, 0.0), 0.0);
  return m;
}

Eigen::VectorXcd HierarchyMatrix::complex_source() const {
  Eigen::VectorXcd src = Eigen::VectorXcd::Zero(4 * n_cut);
  src[n_cut] = 2.0 * rates.gamma_p;
  return src;
}

int default_hierarchy_cutoff(const InitialState& state) {
  return 2 * state.photon_extent() + 10;
}

MomentVector initial_moments_from_state(const InitialState& state, int n_cut) {
  MomentVector m(n_cut);
  switch (state.kind) {
    case InitialKind::fock_atom_ground:
    case InitialKind::fock_atom_excited: {
      if (state.n0 < 0) throw ConfigError("initial_state.n0 must be >= 0");
      const bool excited = state.kind == InitialKind::fock_atom_excited;
      for (int n = 1; n <= n_cut; ++n) {
        m.set_field(n, falling_factorial(state.n0, n));
        m.set_population(n, excited ? falling_factorial(state.n0, n - 1) : 0.0);
      }
      break;
    }
    case InitialKind::coherent_atom_ground: {
      const double mean = std::norm(state.alpha);
      double power = 1.0;
      for (int n = 1; n <= n_cut; ++n) {
        power *= mean;
        m.set_field(n, power);
      }
      break;
    }
  }
  return m;
}

namespace {

template <class Observer>
void run_hierarchy(const HierarchyMatrix& h, const MomentVector& x0, std::span<const double> times,
                   const IntegratorSettings& settings, Observer&& observer) {
  if (x0.n_cut() != h.n_cut) {
    throw DimensionError("initial moments have n_cut " + std::to_string(x0.n_cut()) + " but the hierarchy has " +
                         std::to_string(h.n_cut));
  }
  using State = std::vector<double>;
  State x = x0.to_real_state();
  auto rhs = [&h](const State& y, State& dydt, double) {
    dydt.resize(y.size());
    const Eigen::Map<const Eigen::VectorXd> in(y.data(), static_cast<Eigen::Index>(y.size()));
    Eigen::Map<Eigen::VectorXd> out(dydt.data(), static_cast<Eigen::Index>(dydt.size()));
    out.noalias() = h.a * in;
    out += h.b;
  };
  try {
    integrate_on_grid(rhs, x, times, settings, observer);
  } catch (const NumericalError& e) {
    throw NumericalError(std::string(e.what()) + " (hierarchy n_cut = " + std::to_string(h.n_cut) +
                         "; consider a smaller n_cut or an implicit stepper)");
  }
}

}  // namespace

std::vector<MomentVector> integrate_hierarchy_states(const HierarchyMatrix& h, const MomentVector& x0,
                                                     std::span<const double> times,
                                                     const IntegratorSettings& settings) {
  std::vector<MomentVector> out;
  out.reserve(times.size());
  run_hierarchy(h, x0, times, settings, [&](std::size_t, double, const std::vector<double>& y) {
    out.push_back(MomentVector::from_real_state(h.n_cut, y));
  });
  return out;
}

TimeSeries integrate_hierarchy(const HierarchyMatrix& h, const MomentVector& x0, std::span<const double> times,
                               const IntegratorSettings& settings) {
  const int N = h.n_cut;
  const std::size_t m = times.size();
  std::vector<std::vector<Complex>> field(N, std::vector<Complex>(m));
  std::vector<std::vector<Complex>> population(N, std::vector<Complex>(m));
  MonitorSummary mon;
  mon.state_dimension = 4 * static_cast<std::size_t>(N);
  mon.full_dimension = mon.state_dimension;
  double worst_field = 0.0;
  double worst_population = 0.0;

  run_hierarchy(h, x0, times, settings, [&](std::size_t i, double, const std::vector<double>& y) {
    for (int n = 1; n <= N; ++n) {
      const double f = y[HierarchyMatrix::field_index(N, n)];
      const double p = y[HierarchyMatrix::population_index(N, n)];
      field[n - 1][i] = f;
      population[n - 1][i] = p;
      const double f_scale = std::max(1.0, std::abs(f));
      worst_field = std::max(worst_field, -f / f_scale);
      const double bound = n == 1 ? 1.0 : y[HierarchyMatrix::field_index(N, n - 1)];
      const double p_scale = std::max(1.0, std::abs(bound));
      worst_population = std::max({worst_population, -p / p_scale, (p - bound) / p_scale});
    }
  });
  constexpr double kBoundTolerance = 1e-8;
  if (worst_field > kBoundTolerance) {
    mon.flagged = true;
    mon.warnings.push_back("negative field moment (relative) " + std::to_string(worst_field));
  }
  if (worst_population > kBoundTolerance) {
    mon.flagged = true;
    mon.warnings.push_back("population moment outside [0, field(n-1)] (relative) " + std::to_string(worst_population));
  }

  TimeSeries series;
  series.times.assign(times.begin(), times.end());
  series.metadata.solver = "hierarchy";
  series.metadata.params = h.params;
  series.metadata.rates = h.rates;
  series.metadata.truncation = N;
  series.metadata.integrator = settings;
  series.metadata.monitors = mon;
  for (int n = 1; n <= N; ++n) series.add(moment_name(n), std::move(field[n - 1]));
  series.add("sigma_pop", population[0]);
  for (int n = 1; n < N; ++n) series.add(moment_name(n, true), std::move(population[n]));
  return series;
}

Eigen::Matrix4cd reduced_block(const RabiParams& params, const RateSet& rates, int n) {
  if (n < 1) throw ConfigError("reduced block order must be >= 1");
  const double g = params.coupling;
  const double nd = n;
  const Complex i(0.0, 1.0);
  const double r1 = 2.0 * rates.gamma_a * nd;
  const double r2 = 2.0 * (nd - 1.0) * rates.gamma_a + 2.0 * rates.gamma_p + 2.0 * rates.gamma_d;
  const double r3 = (2.0 * nd - 1.0) * rates.gamma_a + rates.gamma_sigma + rates.gamma_p + rates.gamma_d;
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = -r1;
  m(0, 2) = i * g * nd;
  m(0, 3) = -i * g * nd;
  m(1, 1) = -r2;
  m(1, 2) = -i * g;
  m(1, 3) = i * g;
  m(2, 0) = i * g;
  m(2, 1) = -i * g * nd;
  m(2, 2) = -r3;
  m(3, 0) = -i * g;
  m(3, 1) = i * g * nd;
  m(3, 3) = -r3;
  return m;
}

double ReducedBlockSpectrum::oscillation_frequency() const {
  double w = 0.0;
  for (const auto& e : eigenvalues) w = std::max(w, std::abs(e.imag()));
  return w;
}

double ReducedBlockSpectrum::relaxation_rate() const {
  double r = 0.0;
  for (const auto& e : eigenvalues) r = std::max(r, std::abs(e.real()));
  return r;
}

double ReducedBlockSpectrum::oscillating_mode_damping() const {
  const auto it = std::max_element(eigenvalues.begin(), eigenvalues.end(),
                                   [](Complex a, Complex b) { return std::abs(a.imag()) < std::abs(b.imag()); });
  return -it->real();
}

ReducedBlockSpectrum reduced_block_spectrum(const RabiParams& params, const RateSet& rates, int n) {
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> solver(reduced_block(params, rates, n), false);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigenvalue solver failed for order " + std::to_string(n));
  }
  ReducedBlockSpectrum s;
  s.n = n;
  for (int k = 0; k < 4; ++k) s.eigenvalues[k] = solver.eigenvalues()[k];
  std::sort(s.eigenvalues.begin(), s.eigenvalues.end(), [](Complex a, Complex b) {
    if (a.imag() != b.imag()) return a.imag() < b.imag();
    return a.real() < b.real();
  });
  return s;
}

LinearFit fit_linear(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw NumericalError("linear fit needs at least two paired points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw NumericalError("linear fit with degenerate abscissae");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - (fit.intercept + fit.slope * x[i]);
      ssr += r * r;
    }
    fit.slope_stderr = std::sqrt(ssr / (n - 2.0) / sxx);
  }
  return fit;
}

PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw NumericalError("power-law fit needs positive data");
    lx[i] = std::log(x[i]);
  }
  for (std::size_t i = 0; i < y.size(); ++i) ly[i] = std::log(y[i]);
  const LinearFit lin = fit_linear(lx, ly);
  return {lin.slope, lin.slope_stderr, std::exp(lin.intercept)};
}

SpectralScaling spectral_scaling(const RabiParams& params, const RateSet& rates, int n_min, int n_max) {
  if (n_min < 1 || n_max <= n_min) {
    throw ConfigError("spectrum range needs 1 <= n_min < n_max");
  }
  SpectralScaling out;
  std::vector<double> ns, freq, relax;
  for (int n = n_min; n <= n_max; ++n) {
    out.spectra.push_back(reduced_block_spectrum(params, rates, n));
    ns.push_back(n);
    freq.push_back(out.spectra.back().oscillation_frequency());
    relax.push_back(out.spectra.back().relaxation_rate());
  }
  out.frequency = fit_power_law(ns, freq);
  out.relaxation = fit_power_law(ns, relax);
  out.relaxation_linear = fit_linear(ns, relax);
  return out;
}

}  // namespace rabi
