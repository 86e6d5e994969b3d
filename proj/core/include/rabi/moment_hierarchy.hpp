#pragma once

#include <array>
#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "rabi/integrator.hpp"
#include "rabi/lindblad_engine.hpp"
#include "rabi/rabi_model.hpp"

namespace rabi {

/// J = 0 correlation variables for orders n = 1..n_cut:
///   field(n)      = <a^dag^n a^n>                       (real)
///   population(n) = <a^dag^(n-1) a^(n-1) sigma^dag sigma> (real; n = 1 is <sigma^dag sigma>)
///   coherence(n)  = <a^dag^n a^(n-1) sigma>             (complex)
/// The partner <a^dag^(n-1) a^n sigma^dag> is always conj(coherence(n)).
///
/// The coupling sign follows the printed moment equations, which correspond
/// to d<O>/dt = i<[H, O]> with Omega -> -Omega. field and population are
/// unaffected; coherence carries the opposite sign of Tr(rho a^dag^n a^(n-1) sigma).
class MomentVector {
 public:
  explicit MomentVector(int n_cut);

  int n_cut() const { return n_cut_; }
  double field(int n) const;
  double population(int n) const;
  Complex coherence(int n) const;
  void set_field(int n, double v);
  void set_population(int n, double v);
  void set_coherence(int n, Complex v);

  /// [field(1..N), population(1..N), Re coherence(1..N), Im coherence(1..N)].
  std::vector<double> to_real_state() const;
  static MomentVector from_real_state(int n_cut, std::span<const double> state);

 private:
  void check(int n) const;

  int n_cut_;
  std::vector<double> field_;
  std::vector<double> population_;
  std::vector<Complex> coherence_;
};

/// Affine system x_dot = A x + b on the real state layout of MomentVector.
/// b carries the pump source 2 gamma_P <a^dag^0 a^0> = 2 gamma_P in the
/// population(1) equation. Closure: population(n_cut + 1) = 0.
struct HierarchyMatrix {
  int n_cut = 0;
  RabiParams params;
  RateSet rates;
  Eigen::SparseMatrix<double, Eigen::RowMajor> a;
  Eigen::VectorXd b;

  static int field_index(int /*n_cut*/, int n) { return n - 1; }
  static int population_index(int n_cut, int n) { return n_cut + n - 1; }
  static int coherence_re_index(int n_cut, int n) { return 2 * n_cut + n - 1; }
  static int coherence_im_index(int n_cut, int n) { return 3 * n_cut + n - 1; }
  /// Order n that owns a real-state index.
  static int order_of(int n_cut, int index) { return index % n_cut + 1; }

  /// Same dynamics in the complex variables [x1(1..N), x2(1..N), x3(1..N), conj x3(1..N)].
  Eigen::SparseMatrix<Complex, Eigen::RowMajor> complex_form() const;
  Eigen::VectorXcd complex_source() const;
};

/// Requires an RWA parameter set (ConfigError otherwise) and n_cut >= 1.
HierarchyMatrix build_hierarchy(const RabiParams& params, const RateSet& rates, int n_cut);

/// Default cutoff 2 n0 + 10.
int default_hierarchy_cutoff(const InitialState& state);

MomentVector initial_moments_from_state(const InitialState& state, int n_cut);

/// Columns adag{n}a{n} for n = 1..n_cut and adag{n}a{n}_pop (= population(n + 1))
/// for n = 1..n_cut-1, plus sigma_pop for population(1).
TimeSeries integrate_hierarchy(const HierarchyMatrix& h, const MomentVector& x0, std::span<const double> times,
                               const IntegratorSettings& settings);

/// Moments of the full state at each sample, for callers that need coherences.
std::vector<MomentVector> integrate_hierarchy_states(const HierarchyMatrix& h, const MomentVector& x0,
                                                     std::span<const double> times,
                                                     const IntegratorSettings& settings);

/// Leading-order block of order n in (x1, x2, x3, conj x3): the moment
/// equations with the couplings to x1(n-1) and x2(n+1) dropped.
Eigen::Matrix4cd reduced_block(const RabiParams& params, const RateSet& rates, int n);

struct ReducedBlockSpectrum {
  int n = 0;
  /// Sorted by imaginary part, ascending.
  std::array<Complex, 4> eigenvalues{};

  /// max |Im lambda|
  double oscillation_frequency() const;
  /// max |Re lambda|
  double relaxation_rate() const;
  /// -Re lambda of the eigenvalue with the largest |Im lambda|.
  double oscillating_mode_damping() const;
};

ReducedBlockSpectrum reduced_block_spectrum(const RabiParams& params, const RateSet& rates, int n);

struct PowerLawFit {
  double exponent = 0.0;
  double exponent_stderr = 0.0;
  double prefactor = 0.0;  // exp(intercept)
};

/// Least squares of log y against log x.
PowerLawFit fit_power_law(std::span<const double> x, std::span<const double> y);

struct LinearFit {
  double slope = 0.0;
  double slope_stderr = 0.0;
  double intercept = 0.0;
};

LinearFit fit_linear(std::span<const double> x, std::span<const double> y);

struct SpectralScaling {
  std::vector<ReducedBlockSpectrum> spectra;
  PowerLawFit frequency;   // max |Im lambda| vs n
  PowerLawFit relaxation;  // max |Re lambda| vs n
  LinearFit relaxation_linear;
};

SpectralScaling spectral_scaling(const RabiParams& params, const RateSet& rates, int n_min, int n_max);

}  // namespace rabi
