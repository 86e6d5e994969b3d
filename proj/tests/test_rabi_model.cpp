#include <cmath>

#include <doctest.h>

#include "rabi/error.hpp"
#include "rabi/lindblad_engine.hpp"
#include "rabi/rabi_model.hpp"
#include "test_helpers.hpp"

using namespace rabi;

namespace {

// Dense reference build, independent of the sparse operator layer.
DenseMatrix dense_hamiltonian(const RabiParams& p, int n_max) {
  const int dim = 2 * (n_max + 1);
  DenseMatrix a = DenseMatrix::Zero(dim, dim), s = DenseMatrix::Zero(dim, dim);
  for (int k = 0; k <= n_max; ++k) {
    s(2 * k, 2 * k + 1) = 1.0;
    if (k > 0)
      for (int q = 0; q < 2; ++q) a(2 * (k - 1) + q, 2 * k + q) = std::sqrt(double(k));
  }
  const DenseMatrix ad = a.adjoint(), sd = s.adjoint();
  DenseMatrix h = p.omega0 * ad * a + p.omega0 * sd * s + p.coupling * (ad * s + a * sd);
  if (p.include_counter_rotating) h += p.coupling * (ad * sd + a * s);
  if (p.include_diamagnetic) h += p.d_a * (ad + a) * (ad + a);
  return h;
}

}  // namespace

TEST_SUITE("rabi_model") {

TEST_CASE("uncoupled hamiltonian is diagonal") {
  const SpaceDims d(6);
  const auto h = build_hamiltonian(RabiParams::for_level(ModelLevel::rwa, 0.0), d);
  CHECK(h.nonzeros() == static_cast<std::size_t>(d.dim() - 1));  // |0,g> has zero energy
  for (int k = 0; k <= 6; ++k) CHECK(h.coeff(d.index(k, 1), d.index(k, 1)).real() == doctest::Approx(k + 1));
}

TEST_CASE("rwa hamiltonian conserves excitation number") {
  const SpaceDims d(12);
  const auto h = build_hamiltonian(RabiParams::for_level(ModelLevel::rwa, 0.07), d);
  const auto a = make_annihilator(d);
  const auto at = make_atomic_ops(d);
  const auto n_exc = a.adjoint() * a + at.sigma_dag * at.sigma;
  CHECK(max_abs(commutator(h, n_exc)) <= 1e-12);
  const auto h_full = build_hamiltonian(RabiParams::for_level(ModelLevel::full, 0.07), d);
  CHECK(max_abs(commutator(h_full, n_exc)) > 1e-3);
}

TEST_CASE("full hamiltonian matches dense construction") {
  const int n_max = 8;
  const auto p = RabiParams::for_level(ModelLevel::full, 0.05);
  CHECK(p.d_a == doctest::Approx(0.05 * 0.05 / 2.0));
  const auto h = build_hamiltonian(p, SpaceDims(n_max));
  CHECK(h.hermiticity_error() <= 1e-12);
  const DenseMatrix ref = dense_hamiltonian(p, n_max);
  CHECK(test::max_entry(h.to_dense() - ref) <= 1e-14);
  CHECK(h.coeff(0, 0).real() == doctest::Approx(p.d_a).epsilon(1e-14));
}

TEST_CASE("parameter validation") {
  auto p = RabiParams::for_level(ModelLevel::full, 0.1);
  p.d_a = 0.004;  // below 0.1^2 / 2
  CHECK_THROWS_AS(p.validate(), ConfigError);
  CHECK_THROWS_AS(build_hamiltonian(p, SpaceDims(3)), ConfigError);
  auto q = RabiParams::for_level(ModelLevel::rwa, 0.1);
  q.include_diamagnetic = true;
  q.d_a = 0.01;
  CHECK_THROWS_AS(q.validate(), ConfigError);
  auto r = RabiParams::for_level(ModelLevel::rwa, -0.1);
  CHECK_THROWS_AS(r.validate(), ConfigError);
  RateSet rates;
  rates.gamma_sigma = -1e-3;
  CHECK_THROWS_AS(rates.validate(), ConfigError);
  CHECK(model_level_from_string("full") == ModelLevel::full);
  CHECK_THROWS_AS(model_level_from_string("dicke"), ConfigError);
}

TEST_CASE("dissipator channels") {
  const SpaceDims d(4);
  RateSet rates{2e-3, 3e-3, 5e-4, 4e-3};
  const auto ch = build_dissipators(rates, d);
  REQUIRE(ch.size() == 4);
  CHECK(ch[0].name == "cavity");
  CHECK(ch[0].coefficient == 2e-3);
  CHECK(ch[1].coefficient == 3e-3);
  CHECK(ch[2].coefficient == 5e-4);
  CHECK(ch[3].coefficient == doctest::Approx(1e-3));

  SUBCASE("trace preserving on random states") {
    for (unsigned seed = 1; seed <= 5; ++seed) {
      const DenseMatrix rho = test::random_density(d.dim(), seed);
      CHECK(std::abs(apply_dissipators(ch, rho).trace()) <= 1e-12);
    }
  }
  SUBCASE("zero rates act as zero") {
    const auto none = build_dissipators(RateSet{}, d);
    const DenseMatrix rho = test::random_density(d.dim(), 9);
    CHECK(test::max_entry(apply_dissipators(none, rho)) == 0.0);
  }
}

TEST_CASE("dephasing damps atomic coherence at gamma_sigma") {
  const SpaceDims d(1);
  RateSet rates;
  rates.gamma_sigma = 0.02;
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(d.dim());
  psi(d.index(0, 0)) = psi(d.index(0, 1)) = 1.0 / std::sqrt(2.0);
  const auto rho0 = DensityMatrix::pure(d, psi);
  const auto l = build_liouvillian(RabiParams::for_level(ModelLevel::rwa, 0.0, 1.0), rates, d);
  PropagationSettings s;
  const std::vector<double> t{0.0, 10.0, 50.0};
  const auto traj = propagate_states(l, rho0, t, s);
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& r = traj.states[i].values();
    CHECK(std::abs(r(0, 1)) == doctest::Approx(0.5 * std::exp(-0.02 * t[i])).epsilon(1e-7));
    CHECK(r(0, 0).real() == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(r(1, 1).real() == doctest::Approx(0.5).epsilon(1e-10));
  }
}

TEST_CASE("cavity channel depletes a Fock state at 2 gamma_a k") {
  const SpaceDims d(6);
  RateSet rates;
  rates.gamma_a = 1e-3;
  const auto ch = build_dissipators(rates, d);
  const auto rho = DensityMatrix::from_initial_state(InitialState::fock(4), d);
  const DenseMatrix drho = apply_dissipators(ch, rho.values());
  const auto num = make_moment_observable(d, 1, AtomicFactor::none);
  CHECK(expectation(num, drho).real() == doctest::Approx(-2e-3 * 4));
}

}
