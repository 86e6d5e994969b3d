#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rabi/operator_algebra.hpp"

namespace rabi {

/// External model switch. `full` turns on both the counter-rotating and the
/// diamagnetic terms.
enum class ModelLevel { rwa, full };

std::string_view to_string(ModelLevel level);
ModelLevel model_level_from_string(std::string_view text);

/// Frequencies are in units of omega0 throughout the toolkit, so omega0 = 1
/// unless a test rescales units on purpose.
struct RabiParams {
  double omega0 = 1.0;
  double coupling = 0.0;
  double d_a = 0.0;
  bool include_counter_rotating = false;
  bool include_diamagnetic = false;

  /// Sets both flags from the level; d_a defaults to coupling^2 / (2 omega0).
  static RabiParams for_level(ModelLevel level, double coupling, double omega0 = 1.0,
                              std::optional<double> d_a = std::nullopt);

  static double diamagnetic_lower_bound(double coupling, double omega0) {
    return coupling * coupling / (2.0 * omega0);
  }

  ModelLevel level() const { return include_counter_rotating ? ModelLevel::full : ModelLevel::rwa; }

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct RateSet {
  double gamma_a = 0.0;
  double gamma_d = 0.0;
  double gamma_p = 0.0;
  double gamma_sigma = 0.0;

  void validate() const;
  bool any_positive() const { return gamma_a > 0 || gamma_d > 0 || gamma_p > 0 || gamma_sigma > 0; }
  double max_rate() const;
};

/// H = w0 a^dag a + w0 sigma^dag sigma + Omega (a^dag sigma + a sigma^dag)
///     [+ Omega (a^dag sigma^dag + a sigma)] [+ D_a (a^dag + a)^2]
SparseOperator build_hamiltonian(const RabiParams& params, SpaceDims dims);

/// One Lindblad channel in the form
///   coefficient * (2 c rho c^dag - c^dag c rho - rho c^dag c).
///
/// Rate convention: the coefficients are chosen so that the moment equations
/// hold with the relaxation rates 2 gamma_a n, 2 gamma_D, 2 gamma_P and
/// gamma_sigma exactly, i.e. cavity/decay/pump use coefficient = gamma and
/// dephasing (c = D, D^2 = 1) uses gamma_sigma / 4, which equals
/// (gamma_sigma / 2)(D rho D - rho).
struct DissipatorChannel {
  std::string name;
  SparseOperator jump;
  double coefficient;
};

/// Always returns the four channels in the order cavity, atomic_decay, pump,
/// dephasing; zero-rate channels carry coefficient 0.
std::vector<DissipatorChannel> build_dissipators(const RateSet& rates, SpaceDims dims);

/// Dense L[rho] summed over channels; reference path for tests and monitors.
DenseMatrix apply_dissipators(const std::vector<DissipatorChannel>& channels, const DenseMatrix& rho);

}  // namespace rabi
