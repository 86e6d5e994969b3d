#include "rabi/rabi_model.hpp"

#include <algorithm>
#include <cmath>

namespace rabi {

std::string_view to_string(ModelLevel level) {
  return level == ModelLevel::full ? "full" : "rwa";
}

ModelLevel model_level_from_string(std::string_view text) {
  if (text == "rwa") return ModelLevel::rwa;
  if (text == "full") return ModelLevel::full;
  throw ConfigError("model_level must be 'rwa' or 'full', got '" + std::string(text) + "'");
}

RabiParams RabiParams::for_level(ModelLevel level, double coupling, double omega0,
                                 std::optional<double> d_a) {
  RabiParams p;
  p.omega0 = omega0;
  p.coupling = coupling;
  p.include_counter_rotating = level == ModelLevel::full;
  p.include_diamagnetic = level == ModelLevel::full;
  p.d_a = d_a.value_or(diamagnetic_lower_bound(coupling, omega0));
  return p;
}

void RabiParams::validate() const {
  if (!(omega0 > 0.0) || !std::isfinite(omega0)) {
    throw ConfigError("params.omega0 must be > 0");
  }
  if (!(coupling >= 0.0) || !std::isfinite(coupling)) {
    throw ConfigError("params.coupling must be >= 0");
  }
  if (include_diamagnetic && !include_counter_rotating) {
    throw ConfigError("the diamagnetic term requires the counter-rotating term (model_level full)");
  }
  if (include_diamagnetic) {
    const double bound = diamagnetic_lower_bound(coupling, omega0);
    if (d_a < bound * (1.0 - 1e-12)) {
      throw ConfigError("params.d_a = " + std::to_string(d_a) + " is below coupling^2/(2 omega0) = " +
                        std::to_string(bound) + "; the spectrum would be unbounded from below");
    }
  }
}

void RateSet::validate() const {
  const auto check = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string("rates.") + name + " must be >= 0");
    }
  };
  check(gamma_a, "gamma_a");
  check(gamma_d, "gamma_d");
  check(gamma_p, "gamma_p");
  check(gamma_sigma, "gamma_sigma");
}

double RateSet::max_rate() const {
  return std::max({gamma_a, gamma_d, gamma_p, gamma_sigma});
}

SparseOperator build_hamiltonian(const RabiParams& params, SpaceDims dims) {
  params.validate();
  const SparseOperator a = make_annihilator(dims);
  const SparseOperator a_dag = a.adjoint();
  const AtomicOps atom = make_atomic_ops(dims);

  SparseOperator h = op_scale(a_dag * a + atom.sigma_dag * atom.sigma, params.omega0);
  h = op_add_scaled(h, a_dag * atom.sigma + a * atom.sigma_dag, params.coupling);
  if (params.include_counter_rotating) {
    h = op_add_scaled(h, a_dag * atom.sigma_dag + a * atom.sigma, params.coupling);
  }
  if (params.include_diamagnetic) {
    const SparseOperator x = a_dag + a;
    h = op_add_scaled(h, x * x, params.d_a);
  }
  return SparseOperator(dims, h.matrix(), true);
}

std::vector<DissipatorChannel> build_dissipators(const RateSet& rates, SpaceDims dims) {
  rates.validate();
  const SparseOperator a = make_annihilator(dims);
  AtomicOps atom = make_atomic_ops(dims);
  std::vector<DissipatorChannel> out;
  out.push_back({"cavity", a, rates.gamma_a});
  out.push_back({"atomic_decay", atom.sigma, rates.gamma_d});
  out.push_back({"pump", atom.sigma_dag, rates.gamma_p});
  out.push_back({"dephasing", atom.inversion, rates.gamma_sigma / 4.0});
  return out;
}

DenseMatrix apply_dissipators(const std::vector<DissipatorChannel>& channels, const DenseMatrix& rho) {
  DenseMatrix out = DenseMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& ch : channels) {
    if (ch.coefficient == 0.0) continue;
    const DenseMatrix c = ch.jump.to_dense();
    const DenseMatrix cdc = c.adjoint() * c;
    out += ch.coefficient * (2.0 * c * rho * c.adjoint() - cdc * rho - rho * cdc);
  }
  return out;
}

}  // namespace rabi
