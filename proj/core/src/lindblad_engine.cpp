#include "rabi/lindblad_engine.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/KroneckerProduct>

namespace rabi {

namespace {

using ColSparse = Eigen::SparseMatrix<Complex, Eigen::ColMajor>;

constexpr double kTraceTolerance = 1e-10;
constexpr double kHermiticityTolerance = 1e-10;
constexpr double kMinEigenvalueTolerance = -1e-8;
constexpr double kMomentImagTolerance = 1e-8;
// Monitors flag a run once a deviation exceeds this multiple of the invariant tolerance.
constexpr double kFlagFactor = 10.0;

ColSparse kron(const ColSparse& a, const ColSparse& b) {
  ColSparse out = Eigen::kroneckerProduct(a, b);
  return out;
}

// Sorted indices of vec(rho) reachable from `seed` under the sparsity graph of `l`.
std::vector<int> reachable_indices(const SparseMatrix& l, const Eigen::VectorXcd& seed) {
  const ColSparse by_col = l;
  const int n = static_cast<int>(seed.size());
  std::vector<char> seen(n, 0);
  std::vector<int> stack;
  for (int i = 0; i < n; ++i) {
    if (seed[i] != Complex(0.0, 0.0)) {
      seen[i] = 1;
      stack.push_back(i);
    }
  }
  while (!stack.empty()) {
    const int j = stack.back();
    stack.pop_back();
    for (ColSparse::InnerIterator it(by_col, j); it; ++it) {
      const int i = static_cast<int>(it.row());
      if (!seen[i] && it.value() != Complex(0.0, 0.0)) {
        seen[i] = 1;
        stack.push_back(i);
      }
    }
  }
  std::vector<int> out;
  for (int i = 0; i < n; ++i) {
    if (seen[i]) out.push_back(i);
  }
  return out;
}

// Generator in the interaction picture of H0 = diag(E): entry (a, b) of L
// picks up exp(i (nu_a - nu_b) t) with nu = E_i - E_j for vec index i + j dim,
// and the -i nu_a diagonal of H0 drops out. The components of distinct
// frequency f_g sit side by side in `stacked`, so that one sparse product with
// [x; e^{i f_1 t} x; ...] applies the whole time-dependent generator.
struct FrameGenerator {
  std::vector<double> nu;
  std::vector<double> frequencies;
  SparseMatrix stacked;
};

FrameGenerator split_by_frequency(const SparseMatrix& l, const std::vector<int>& index, int dim,
                                  const std::vector<double>& energies) {
  FrameGenerator g;
  g.nu.resize(index.size());
  for (std::size_t a = 0; a < index.size(); ++a) {
    g.nu[a] = energies[index[a] % dim] - energies[index[a] / dim];
  }
  double scale = 0.0;
  for (double e : energies) scale = std::max(scale, std::abs(e));
  const double quantum = 1e-9 * std::max(1.0, scale);
  std::map<long long, std::vector<Eigen::Triplet<Complex>>> groups;
  for (int a = 0; a < l.outerSize(); ++a) {
    for (SparseMatrix::InnerIterator it(l, a); it; ++it) {
      const int b = static_cast<int>(it.col());
      Complex v = it.value();
      if (a == b) v += Complex(0.0, g.nu[a]);
      if (v == Complex(0.0, 0.0)) continue;
      groups[std::llround((g.nu[a] - g.nu[b]) / quantum)].emplace_back(a, b, v);
    }
  }
  std::vector<Eigen::Triplet<Complex>> all;
  const auto n = static_cast<int>(l.cols());
  for (auto& [key, triplets] : groups) {
    const int offset = static_cast<int>(g.frequencies.size()) * n;
    for (const auto& t : triplets) all.emplace_back(t.row(), t.col() + offset, t.value());
    g.frequencies.push_back(static_cast<double>(key) * quantum);
  }
  g.stacked.resize(l.rows(), static_cast<Eigen::Index>(std::max<std::size_t>(g.frequencies.size(), 1)) * n);
  g.stacked.setFromTriplets(all.begin(), all.end());
  g.stacked.makeCompressed();
  return g;
}

// Row r of m times x, in plain real arithmetic (about twice as fast as the
// std::complex product, which guards every multiply against NaN).
inline Complex row_product(const SparseMatrix& m, Eigen::Index r, const Complex* x) {
  const int* outer = m.outerIndexPtr();
  const int* inner = m.innerIndexPtr();
  const auto* v = reinterpret_cast<const double*>(m.valuePtr());
  const auto* xd = reinterpret_cast<const double*>(x);
  double re = 0.0;
  double im = 0.0;
  for (int k = outer[r]; k < outer[r + 1]; ++k) {
    const double a = v[2 * k];
    const double b = v[2 * k + 1];
    const double c = xd[2 * inner[k]];
    const double d = xd[2 * inner[k] + 1];
    re += a * c - b * d;
    im += a * d + b * c;
  }
  return {re, im};
}

SparseMatrix restrict_to(const SparseMatrix& l, const std::vector<int>& keep) {
  std::vector<int> position(l.rows(), -1);
  for (std::size_t k = 0; k < keep.size(); ++k) position[keep[k]] = static_cast<int>(k);
  std::vector<Eigen::Triplet<Complex>> t;
  for (std::size_t k = 0; k < keep.size(); ++k) {
    for (SparseMatrix::InnerIterator it(l, keep[k]); it; ++it) {
      const int c = position[it.col()];
      if (c >= 0) t.emplace_back(static_cast<int>(k), c, it.value());
    }
  }
  const auto m = static_cast<Eigen::Index>(keep.size());
  SparseMatrix out(m, m);
  out.setFromTriplets(t.begin(), t.end());
  out.makeCompressed();
  return out;
}

bool is_moment_name(std::string_view name) { return name.starts_with("adag"); }

}  // namespace

std::string_view to_string(InitialKind kind) {
  switch (kind) {
    case InitialKind::fock_atom_ground: return "fock_atom_ground";
    case InitialKind::fock_atom_excited: return "fock_atom_excited";
    case InitialKind::coherent_atom_ground: return "coherent_atom_ground";
  }
  return "unknown";
}

InitialKind initial_kind_from_string(std::string_view text) {
  if (text == "fock_atom_ground") return InitialKind::fock_atom_ground;
  if (text == "fock_atom_excited") return InitialKind::fock_atom_excited;
  if (text == "coherent_atom_ground") return InitialKind::coherent_atom_ground;
  throw ConfigError("initial_state.kind: unsupported state kind '" + std::string(text) + "'");
}

InitialState InitialState::fock(int n0, bool atom_excited) {
  InitialState s;
  s.kind = atom_excited ? InitialKind::fock_atom_excited : InitialKind::fock_atom_ground;
  s.n0 = n0;
  return s;
}

InitialState InitialState::coherent(Complex alpha) {
  InitialState s;
  s.kind = InitialKind::coherent_atom_ground;
  s.n0 = 0;
  s.alpha = alpha;
  return s;
}

void InitialState::validate(SpaceDims dims) const {
  if (kind == InitialKind::coherent_atom_ground) {
    if (std::norm(alpha) > dims.n_max() / 4.0) {
      throw ConfigError("initial_state.alpha: |alpha|^2 = " + std::to_string(std::norm(alpha)) +
                        " exceeds dims.n_max/4 = " + std::to_string(dims.n_max() / 4.0));
    }
    return;
  }
  if (n0 < 0) {
    throw ConfigError("initial_state.n0 must be >= 0");
  }
  if (n0 > dims.n_max()) {
    throw ConfigError("initial_state.n0 = " + std::to_string(n0) + " exceeds dims.n_max = " +
                      std::to_string(dims.n_max()));
  }
}

int InitialState::photon_extent() const {
  if (kind == InitialKind::coherent_atom_ground) {
    const double mean = std::norm(alpha);
    return static_cast<int>(std::ceil(mean + 6.0 * std::sqrt(mean)));
  }
  return n0;
}

int InitialState::excitation_extent() const {
  return photon_extent() + (kind == InitialKind::fock_atom_excited ? 1 : 0);
}

DensityMatrix::DensityMatrix(SpaceDims dims, DenseMatrix values) : dims_(dims), values_(std::move(values)) {
  if (values_.rows() != dims_.dim() || values_.cols() != dims_.dim()) {
    throw DimensionError("density matrix shape does not match dim " + std::to_string(dims_.dim()));
  }
}

DensityMatrix DensityMatrix::pure(SpaceDims dims, const Eigen::VectorXcd& psi) {
  if (psi.size() != dims.dim()) {
    throw DimensionError("state vector size does not match dim");
  }
  const Eigen::VectorXcd normalized = psi / psi.norm();
  return DensityMatrix(dims, normalized * normalized.adjoint());
}

DensityMatrix DensityMatrix::from_initial_state(const InitialState& state, SpaceDims dims) {
  state.validate(dims);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(dims.dim());
  switch (state.kind) {
    case InitialKind::fock_atom_ground:
      psi[dims.index(state.n0, 0)] = 1.0;
      break;
    case InitialKind::fock_atom_excited:
      psi[dims.index(state.n0, 1)] = 1.0;
      break;
    case InitialKind::coherent_atom_ground: {
      // c_k = alpha^k / sqrt(k!), normalization restored by pure().
      Complex c = 1.0;
      for (int k = 0; k <= dims.n_max(); ++k) {
        if (k > 0) c *= state.alpha / std::sqrt(static_cast<double>(k));
        psi[dims.index(k, 0)] = c;
      }
      break;
    }
  }
  return pure(dims, psi);
}

double DensityMatrix::hermiticity_error() const {
  return (values_ - values_.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::min_eigenvalue() const {
  const DenseMatrix herm = 0.5 * (values_ + values_.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

Complex DensityMatrix::expectation(const SparseOperator& op) const {
  if (!(op.dims() == dims_)) {
    throw DimensionError("observable dims differ from density matrix dims");
  }
  return rabi::expectation(op, values_);
}

Eigen::VectorXcd DensityMatrix::vectorized() const {
  return Eigen::Map<const Eigen::VectorXcd>(values_.data(), values_.size());
}

DensityMatrix DensityMatrix::from_vectorized(SpaceDims dims, const Eigen::VectorXcd& vec) {
  if (vec.size() != static_cast<Eigen::Index>(dims.dim()) * dims.dim()) {
    throw DimensionError("vectorized state has wrong length");
  }
  return DensityMatrix(dims, Eigen::Map<const DenseMatrix>(vec.data(), dims.dim(), dims.dim()));
}

Complex expectation(const SparseOperator& op, const DenseMatrix& rho) {
  Complex sum = 0.0;
  const SparseMatrix& m = op.matrix();
  for (int r = 0; r < m.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(m, r); it; ++it) {
      sum += it.value() * rho(it.col(), it.row());
    }
  }
  return sum;
}

Liouvillian build_liouvillian(const SparseOperator& hamiltonian, const std::vector<DissipatorChannel>& channels) {
  const SpaceDims dims = hamiltonian.dims();
  for (const auto& ch : channels) {
    if (!(ch.jump.dims() == dims)) {
      throw DimensionError("dissipator '" + ch.name + "' built for different dims than the Hamiltonian");
    }
  }
  ColSparse id(dims.dim(), dims.dim());
  id.setIdentity();
  const ColSparse h = hamiltonian.matrix();
  const ColSparse h_t = h.transpose();

  ColSparse l = Complex(0.0, -1.0) * kron(id, h) + Complex(0.0, 1.0) * kron(h_t, id);
  for (const auto& ch : channels) {
    if (ch.coefficient == 0.0) continue;
    const ColSparse c = ch.jump.matrix();
    const ColSparse c_conj = c.conjugate();
    const ColSparse cdc = ColSparse(c.adjoint()) * c;
    const ColSparse cdc_t = cdc.transpose();
    l += ch.coefficient * (2.0 * kron(c_conj, c) - kron(id, cdc) - kron(cdc_t, id));
  }
  l.prune(Complex(0.0, 0.0), 0.0);
  SparseMatrix row_major = l;
  row_major.makeCompressed();
  return {dims, std::move(row_major), {}};
}

Liouvillian build_liouvillian(const RabiParams& params, const RateSet& rates, SpaceDims dims) {
  Liouvillian l = build_liouvillian(build_hamiltonian(params, dims), build_dissipators(rates, dims));
  l.frame_energies.resize(dims.dim());
  for (int i = 0; i < dims.dim(); ++i) {
    l.frame_energies[i] = params.omega0 * (dims.photons_of(i) + dims.atom_of(i));
  }
  return l;
}

DenseMatrix apply_liouvillian(const Liouvillian& l, const DenseMatrix& rho) {
  if (rho.rows() != l.dims.dim()) {
    throw DimensionError("state dims differ from Liouvillian dims");
  }
  const Eigen::Map<const Eigen::VectorXcd> vec(rho.data(), rho.size());
  const Eigen::VectorXcd out = l.matrix * vec;
  return Eigen::Map<const DenseMatrix>(out.data(), rho.rows(), rho.cols());
}

void MonitorSummary::merge(const MonitorSummary& other) {
  max_trace_error = std::max(max_trace_error, other.max_trace_error);
  max_hermiticity_error = std::max(max_hermiticity_error, other.max_hermiticity_error);
  if (!std::isnan(other.min_eigenvalue)) {
    min_eigenvalue = std::isnan(min_eigenvalue) ? other.min_eigenvalue : std::min(min_eigenvalue, other.min_eigenvalue);
  }
  max_moment_imaginary = std::max(max_moment_imaginary, other.max_moment_imaginary);
  flagged = flagged || other.flagged;
  warnings.insert(warnings.end(), other.warnings.begin(), other.warnings.end());
  rhs_evaluations += other.rhs_evaluations;
  state_dimension = std::max(state_dimension, other.state_dimension);
  full_dimension = std::max(full_dimension, other.full_dimension);
}

MonitorSummary propagate(const Liouvillian& l, const DensityMatrix& rho0, std::span<const double> times,
                         const PropagationSettings& settings, const StateObserver& observer) {
  if (!(rho0.dims() == l.dims)) {
    throw DimensionError("initial state dims differ from Liouvillian dims");
  }
  const SpaceDims dims = l.dims;
  const int dim = dims.dim();
  const Eigen::VectorXcd full0 = rho0.vectorized();

  std::vector<int> keep;
  SparseMatrix reduced_storage;
  const SparseMatrix* generator = &l.matrix;
  if (settings.reduce_to_reachable) {
    keep = reachable_indices(l.matrix, full0);
    if (keep.size() < static_cast<std::size_t>(full0.size())) {
      reduced_storage = restrict_to(l.matrix, keep);
      generator = &reduced_storage;
    } else {
      keep.clear();
    }
  }
  const bool reduced = !keep.empty();
  if (!generator->isCompressed()) {
    reduced_storage = *generator;
    reduced_storage.makeCompressed();
    generator = &reduced_storage;
  }

  using State = std::vector<Complex>;
  State x;
  if (reduced) {
    x.reserve(keep.size());
    for (int idx : keep) x.push_back(full0[idx]);
  } else {
    x.assign(full0.data(), full0.data() + full0.size());
  }

  MonitorSummary summary;
  summary.state_dimension = x.size();
  summary.full_dimension = static_cast<std::size_t>(full0.size());

  const bool in_frame = settings.rotating_frame && static_cast<int>(l.frame_energies.size()) == dim;
  FrameGenerator frame;
  if (in_frame) {
    std::vector<int> index = keep;
    if (!reduced) {
      index.resize(full0.size());
      for (std::size_t k = 0; k < index.size(); ++k) index[k] = static_cast<int>(k);
    }
    frame = split_by_frequency(*generator, index, dim, l.frame_energies);
  } else {
    frame.frequencies = {0.0};
    frame.stacked = *generator;
  }

  State stacked_input(frame.frequencies.size() * x.size());
  auto rhs = [&](const State& y, State& dydt, double t) {
    const std::size_t n = y.size();
    dydt.resize(n);
    for (std::size_t g = 0; g < frame.frequencies.size(); ++g) {
      const double f = frame.frequencies[g];
      Complex* block = stacked_input.data() + g * n;
      if (f == 0.0) {
        std::copy(y.begin(), y.end(), block);
      } else {
        const Complex phase = std::polar(1.0, f * t);
        for (std::size_t k = 0; k < n; ++k) block[k] = phase * y[k];
      }
    }
    for (std::size_t r = 0; r < n; ++r) {
      dydt[r] = row_product(frame.stacked, static_cast<Eigen::Index>(r), stacked_input.data());
    }
  };

  DenseMatrix scratch = DenseMatrix::Zero(dim, dim);
  const bool eigen_monitor = settings.monitor_eigenvalues && dim <= settings.eigen_monitor_max_dim;
  const std::size_t stride = std::max<std::size_t>(1, settings.eigen_monitor_stride);

  auto on_sample = [&](std::size_t index, double t, const State& y) {
    Complex* data = scratch.data();
    for (std::size_t k = 0; k < y.size(); ++k) {
      const Complex v = in_frame ? y[k] * std::polar(1.0, -frame.nu[k] * t) : y[k];
      data[reduced ? keep[k] : static_cast<int>(k)] = v;
    }
    DensityMatrix rho(dims, scratch);
    const double trace_err = std::abs(rho.trace() - 1.0);
    const double herm_err = rho.hermiticity_error();
    summary.max_trace_error = std::max(summary.max_trace_error, trace_err);
    summary.max_hermiticity_error = std::max(summary.max_hermiticity_error, herm_err);
    if (eigen_monitor && index % stride == 0) {
      const double ev = rho.min_eigenvalue();
      summary.min_eigenvalue = std::isnan(summary.min_eigenvalue) ? ev : std::min(summary.min_eigenvalue, ev);
    }
    if (observer) observer(index, t, rho);
  };

  const IntegrationStats stats = integrate_on_grid(rhs, x, times, settings.integrator, on_sample);
  summary.rhs_evaluations = stats.rhs_evaluations;

  if (summary.max_trace_error > kFlagFactor * kTraceTolerance) {
    summary.flagged = true;
    summary.warnings.push_back("trace deviation " + std::to_string(summary.max_trace_error));
  }
  if (summary.max_hermiticity_error > kFlagFactor * kHermiticityTolerance) {
    summary.flagged = true;
    summary.warnings.push_back("hermiticity deviation " + std::to_string(summary.max_hermiticity_error));
  }
  if (!std::isnan(summary.min_eigenvalue) && summary.min_eigenvalue < kFlagFactor * kMinEigenvalueTolerance) {
    summary.flagged = true;
    summary.warnings.push_back("negative eigenvalue " + std::to_string(summary.min_eigenvalue));
  }
  return summary;
}

Trajectory propagate_states(const Liouvillian& l, const DensityMatrix& rho0, std::span<const double> times,
                            const PropagationSettings& settings) {
  Trajectory traj{l.dims, {times.begin(), times.end()}, {}, {}};
  traj.states.reserve(times.size());
  traj.monitors = propagate(l, rho0, times, settings,
                            [&](std::size_t, double, const DensityMatrix& rho) { traj.states.push_back(rho); });
  return traj;
}

std::string moment_name(int n, bool with_population) {
  std::string name = "adag" + std::to_string(n) + "a" + std::to_string(n);
  if (with_population) name += "_pop";
  return name;
}

std::vector<NamedObservable> moment_observables(SpaceDims dims, std::span<const int> orders, bool with_population) {
  std::vector<NamedObservable> out;
  for (int n : orders) {
    out.push_back({moment_name(n), make_moment_observable(dims, n, AtomicFactor::none)});
  }
  if (with_population) {
    for (int n : orders) {
      out.push_back({moment_name(n, true), make_moment_observable(dims, n, AtomicFactor::population)});
    }
  }
  return out;
}

bool TimeSeries::has(std::string_view name) const {
  return std::any_of(columns.begin(), columns.end(), [&](const SeriesColumn& c) { return c.name == name; });
}

const std::vector<Complex>& TimeSeries::at(std::string_view name) const {
  for (const auto& c : columns) {
    if (c.name == name) return c.values;
  }
  throw Error("time series has no column '" + std::string(name) + "'");
}

void TimeSeries::add(std::string name, std::vector<Complex> values) {
  if (values.size() != times.size()) {
    throw DimensionError("column '" + name + "' length differs from the time grid");
  }
  columns.push_back({std::move(name), std::move(values)});
}

std::vector<double> TimeSeries::real(std::string_view name) const {
  const auto& v = at(name);
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](Complex c) { return c.real(); });
  return out;
}

namespace {

void check_observable_dims(SpaceDims dims, const std::vector<NamedObservable>& observables) {
  for (const auto& o : observables) {
    if (!(o.op.dims() == dims)) {
      throw DimensionError("observable '" + o.name + "' dims differ from the trajectory");
    }
  }
}

void record_moment_imaginary(TimeSeries& series) {
  // Measured against the column's magnitude (floor 1): <a^dag^n a^n> reaches
  // n0! ~ 1e6 for n0 = 10, where 1e-8 absolute is below double resolution.
  double worst = 0.0;
  for (const auto& c : series.columns) {
    if (!is_moment_name(c.name)) continue;
    double scale = 1.0;
    double imag = 0.0;
    for (const auto& v : c.values) {
      scale = std::max(scale, std::abs(v.real()));
      imag = std::max(imag, std::abs(v.imag()));
    }
    worst = std::max(worst, imag / scale);
  }
  auto& mon = series.metadata.monitors;
  mon.max_moment_imaginary = std::max(mon.max_moment_imaginary, worst);
  if (worst > kFlagFactor * kMomentImagTolerance) {
    mon.flagged = true;
    mon.warnings.push_back("moment imaginary part " + std::to_string(worst));
  }
}

}  // namespace

TimeSeries sample_observables(const Trajectory& trajectory, const std::vector<NamedObservable>& observables) {
  check_observable_dims(trajectory.dims, observables);
  TimeSeries series;
  series.times = trajectory.times;
  series.metadata.solver = "density_matrix";
  series.metadata.truncation = trajectory.dims.n_max();
  series.metadata.monitors = trajectory.monitors;
  for (const auto& o : observables) {
    std::vector<Complex> values;
    values.reserve(trajectory.states.size());
    for (const auto& rho : trajectory.states) values.push_back(rho.expectation(o.op));
    series.add(o.name, std::move(values));
  }
  record_moment_imaginary(series);
  return series;
}

TimeSeries simulate_observables(const Liouvillian& l, const DensityMatrix& rho0, std::span<const double> times,
                                const std::vector<NamedObservable>& observables,
                                const PropagationSettings& settings) {
  check_observable_dims(l.dims, observables);
  std::vector<std::vector<Complex>> values(observables.size(), std::vector<Complex>(times.size()));
  const MonitorSummary mon = propagate(l, rho0, times, settings, [&](std::size_t i, double, const DensityMatrix& rho) {
    for (std::size_t k = 0; k < observables.size(); ++k) values[k][i] = expectation(observables[k].op, rho.values());
  });
  TimeSeries series;
  series.times.assign(times.begin(), times.end());
  series.metadata.solver = "density_matrix";
  series.metadata.truncation = l.dims.n_max();
  series.metadata.integrator = settings.integrator;
  series.metadata.monitors = mon;
  for (std::size_t k = 0; k < observables.size(); ++k) series.add(observables[k].name, std::move(values[k]));
  record_moment_imaginary(series);
  return series;
}

double default_horizon(const RabiParams& params, const RateSet& rates) {
  if (rates.gamma_a > 0.0) return 5.0 / rates.gamma_a;
  if (rates.any_positive()) return 5.0 / rates.max_rate();
  if (params.coupling > 0.0) return 20.0 * 2.0 * std::numbers::pi / params.coupling;
  return 100.0;
}

double default_sampling_interval(const RabiParams& params, int excitation_extent, int points_per_period) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  const double rabi = 2.0 * params.coupling * std::sqrt(static_cast<double>(excitation_extent) + 1.0);
  double dt = kTwoPi / ((rabi > 0.0 ? rabi : params.omega0) * points_per_period);
  // The counter-rotating ripple at 2 omega0 is small; 8 points per period keep
  // it from aliasing into the quadratures.
  if (params.include_counter_rotating) dt = std::min(dt, kTwoPi / (2.0 * params.omega0 * 8.0));
  return dt;
}

std::vector<double> uniform_grid(double horizon, double dt) {
  if (!(horizon >= 0.0) || !(dt > 0.0)) {
    throw ConfigError("time grid needs horizon >= 0 and dt > 0");
  }
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
  std::vector<double> out(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    out[i] = steps == 0 ? 0.0 : horizon * static_cast<double>(i) / static_cast<double>(steps);
  }
  return out;
}

double max_relative_difference(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.size() != b.size()) {
    throw DimensionError("series lengths differ");
  }
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff = std::max(diff, std::abs(a[i] - b[i]));
    scale = std::max(scale, std::abs(b[i]));
  }
  if (scale == 0.0) return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return diff / scale;
}

bool ConvergenceReport::monotone_decreasing() const {
  for (std::size_t i = 1; i < steps.size(); ++i) {
    if (steps[i].max_relative_difference > steps[i - 1].max_relative_difference) return false;
  }
  return true;
}

ConvergenceReport convergence_check(const std::function<TimeSeries(int n_max)>& run_at,
                                    std::span<const int> n_max_list, double threshold,
                                    std::span<const std::string> tracked) {
  if (n_max_list.size() < 2) {
    throw ConfigError("convergence_check needs at least two truncation values");
  }
  ConvergenceReport report;
  report.threshold = threshold;
  TimeSeries previous = run_at(n_max_list[0]);
  for (std::size_t i = 1; i < n_max_list.size(); ++i) {
    TimeSeries current = run_at(n_max_list[i]);
    ConvergenceStep step{n_max_list[i - 1], n_max_list[i], 0.0, {}};
    for (const auto& column : current.columns) {
      if (!tracked.empty() && std::find(tracked.begin(), tracked.end(), column.name) == tracked.end()) continue;
      if (!previous.has(column.name)) continue;
      const double d = max_relative_difference(previous.at(column.name), column.values);
      if (d > step.max_relative_difference || step.worst_observable.empty()) {
        step.max_relative_difference = std::max(step.max_relative_difference, d);
        if (d >= step.max_relative_difference) step.worst_observable = column.name;
      }
    }
    report.steps.push_back(step);
    previous = std::move(current);
  }
  report.passed = report.steps.back().max_relative_difference <= threshold;
  return report;
}

}  // namespace rabi
