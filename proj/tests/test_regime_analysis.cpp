#include <cmath>
#include <numbers>

#include <doctest.h>

#include "rabi/error.hpp"
#include "rabi/regime_analysis.hpp"

using namespace rabi;

namespace {

std::vector<Complex> synthetic(const std::vector<double>& t, double scale) {
  std::vector<Complex> v;
  for (double x : t) v.emplace_back(scale * std::exp(-0.01 * x) * (2.0 + std::cos(0.3 * x)), 0.0);
  return v;
}

struct PairRun {
  TimeSeries rwa, full;
};

PairRun paired_run(double omega0, double coupling, const RateSet& rates, int n0, int n_max, double horizon, double dt,
                   std::vector<int> orders) {
  const SpaceDims d(n_max);
  const auto times = uniform_grid(horizon, dt);
  const auto rho0 = DensityMatrix::from_initial_state(InitialState::fock(n0), d);
  const auto obs = moment_observables(d, orders, false);
  PairRun out;
  for (ModelLevel level : {ModelLevel::rwa, ModelLevel::full}) {
    const auto p = RabiParams::for_level(level, coupling, omega0);
    auto ts = simulate_observables(build_liouvillian(p, rates, d), rho0, times, obs, PropagationSettings{});
    (level == ModelLevel::rwa ? out.rwa : out.full) = std::move(ts);
  }
  return out;
}

}  // namespace

TEST_SUITE("regime_analysis") {

TEST_CASE("trapezoid") {
  const std::vector<double> t{0.0, 1.0, 3.0};
  const std::vector<double> y{1.0, 3.0, 3.0};
  CHECK(trapezoid(t, y) == 8.0);
  CHECK_THROWS_AS(trapezoid(t, std::vector<double>{1.0}), DimensionError);
}

TEST_CASE("delta algebra") {
  const auto t = uniform_grid(500.0, 0.5);
  const auto base = synthetic(t, 1.0);
  CHECK(compute_delta(t, base, base) == 0.0);
  CHECK(compute_delta(t, synthetic(t, 2.0), base) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(compute_delta(t, synthetic(t, 0.5), base) == doctest::Approx(-0.75).epsilon(1e-14));
  const std::vector<Complex> zeros(t.size(), 0.0);
  CHECK_THROWS_AS(compute_delta(t, base, zeros), NumericalError);
  CHECK_THROWS_AS(compute_delta(t, base, std::vector<Complex>(3)), DimensionError);

  TimeSeries a, b;
  a.times = t;
  b.times = uniform_grid(500.0, 1.0);
  a.add("adag1a1", base);
  b.add("adag1a1", std::vector<Complex>(b.times.size(), 1.0));
  CHECK_THROWS_AS(compute_delta(a, b, 1), DimensionError);
}

TEST_CASE("strong coupling boundary") {
  RateSet r;
  r.gamma_a = 1e-3;
  CHECK(strong_coupling_boundary(r, 1) == doctest::Approx(2e-3).epsilon(1e-15));
  CHECK(strong_coupling_boundary(r, 8) == doctest::Approx(8e-3).epsilon(1e-15));
  CHECK(strong_coupling_boundary(r, 1000) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("regime classification") {
  RateSet r;
  r.gamma_a = 1e-4;
  CHECK(classify_regime(RabiParams::for_level(ModelLevel::full, 0.05), r, 1, 0.01, 0.1) == Regime::strong);
  CHECK(classify_regime(RabiParams::for_level(ModelLevel::full, 0.0), r, 7, 0.0, 0.1) == Regime::weak);
  CHECK(classify_regime(RabiParams::for_level(ModelLevel::full, 0.05), r, 1, 0.2, 0.1) == Regime::ultra_strong);
  RateSet slow;
  slow.gamma_a = 1e-2;
  CHECK(classify_regime(RabiParams::for_level(ModelLevel::full, 0.05), slow, 10, 0.5, 0.1) ==
        Regime::ultra_strong_not_strong);
  CHECK_THROWS_AS(classify_regime(RabiParams::for_level(ModelLevel::full, 0.05), r, 1, std::nan(""), 0.1),
                  NumericalError);
  CHECK(to_string(Regime::ultra_strong_not_strong) == "ultra_strong_not_strong");
}

TEST_CASE("log spacing and contour interpolation") {
  const auto w = log_spaced(0.005, 0.3, 20);
  CHECK(w.front() == 0.005);
  CHECK(w.back() == 0.3);
  CHECK(w[10] / w[9] == doctest::Approx(w[1] / w[0]));
  const std::vector<double> om{0.01, 0.02, 0.04};
  CHECK(*usc_crossing(om, std::vector<double>{0.0, 0.05, 0.15}, 0.1) == doctest::Approx(std::sqrt(0.02 * 0.04)));
  CHECK(*usc_crossing(om, std::vector<double>{0.2, 0.3, 0.4}, 0.1) == 0.01);
  CHECK_FALSE(usc_crossing(om, std::vector<double>{0.0, 0.01, 0.02}, 0.1).has_value());
}

TEST_CASE("extremum counting") {
  const auto t = uniform_grid(400.0, 0.5);
  std::vector<double> ringing, decay, flat(t.size(), 2.0);
  for (double x : t) {
    ringing.push_back(std::exp(-0.002 * x) * (1.0 + 0.5 * std::cos(0.1 * x)));
    decay.push_back(std::exp(-0.01 * x) * (1.0 + 1e-4 * std::cos(0.1 * x)));
  }
  CHECK(count_resolvable_extrema(ringing) == 12);
  CHECK(count_resolvable_extrema(decay) == 0);
  CHECK(count_resolvable_extrema(flat) == 0);
}

TEST_CASE("dominant frequency") {
  const auto t = uniform_grid(2000.0, 0.25);
  std::vector<double> y;
  for (double x : t) y.push_back(3.0 + std::exp(-1e-4 * x) * std::cos(0.731 * x));
  const auto peak = dominant_frequency(t, y);
  CHECK(peak.resolution == doctest::Approx(2.0 * std::numbers::pi / 2000.0));
  CHECK(std::abs(peak.frequency - 0.731) <= 0.1 * peak.resolution);
}

TEST_CASE("delta grows with the correlation order") {
  const RateSet rates{1e-3, 1e-3, 0.0, 1e-3};
  const auto pr = paired_run(1.0, 0.05, rates, 10, 16, 3000.0, 0.25, {1, 5});
  const double d1 = compute_delta(pr.full, pr.rwa, 1);
  const double d5 = compute_delta(pr.full, pr.rwa, 5);
  CHECK(d1 > 0.0);
  CHECK(d5 > d1);
}

TEST_CASE("delta and labels depend only on ratios to omega0") {
  const RateSet r1{4e-3, 2e-3, 0.0, 2e-3};
  const RateSet r2{8e-3, 4e-3, 0.0, 4e-3};
  const auto a = paired_run(1.0, 0.1, r1, 3, 10, 500.0, 0.25, {1, 3});
  const auto b = paired_run(2.0, 0.2, r2, 3, 10, 250.0, 0.125, {1, 3});
  for (int n : {1, 3}) {
    const double da = compute_delta(a.full, a.rwa, n);
    const double db = compute_delta(b.full, b.rwa, n);
    CHECK(db == doctest::Approx(da).epsilon(1e-5));
    // Coupling and rates expressed in units of the respective omega0.
    CHECK(classify_regime(RabiParams::for_level(ModelLevel::full, 0.1), r1, n, da, 0.1) ==
          classify_regime(RabiParams::for_level(ModelLevel::full, 0.1), RateSet{4e-3, 2e-3, 0.0, 2e-3}, n, db, 0.1));
  }
}

TEST_CASE("small sweep is deterministic and thread independent") {
  SweepSettings s;
  s.rates = RateSet{4e-3, 4e-3, 0.0, 4e-3};
  s.initial = InitialState::fock(3);
  s.n_max = 8;
  s.convergence_step = 3;
  s.convergence_threshold = 1e-3;
  const std::vector<int> n_values{1, 2, 3};
  const std::vector<double> omegas{0.02, 0.08, 0.2};
  const auto g1 = sweep_regime_map(s, n_values, omegas);
  s.threads = 3;
  const auto g2 = sweep_regime_map(s, n_values, omegas);
  CHECK(g1.delta == g2.delta);
  CHECK(g1.labels == g2.labels);
  CHECK(g1.complete());
  CHECK(g1.horizon == doctest::Approx(1250.0));
  REQUIRE(g1.n_max.size() == omegas.size());
  for (std::size_t j = 0; j < omegas.size(); ++j) {
    // The cutoff is raised only as far as the truncation check demands.
    CHECK(g1.n_max[j] >= s.n_max);
    CHECK(g1.n_max[j] + s.convergence_step <= s.n_max_limit);
    CHECK(g1.convergence_difference[j] <= s.convergence_threshold);
    CHECK(g1.dt[j] == default_sampling_interval(RabiParams::for_level(ModelLevel::full, omegas[j]), 3));
  }
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    CHECK(g1.strong_boundary[i] == strong_coupling_boundary(s.rates, n_values[i]));
    for (std::size_t j = 1; j < omegas.size(); ++j) CHECK(g1.delta[i][j] >= g1.delta[i][j - 1] - 1e-6);
  }
  CHECK_THROWS_AS(sweep_regime_map(s, std::vector<int>{9}, omegas), ConfigError);
}

TEST_CASE("failed sweep columns are marked and the sweep continues") {
  SweepSettings s;
  s.rates = RateSet{4e-3, 4e-3, 0.0, 4e-3};
  s.initial = InitialState::fock(2);
  s.n_max = 6;
  s.check_convergence = false;
  s.dt = 0.5;
  s.propagation.integrator.max_steps_per_sample = 2;
  s.propagation.integrator.initial_step = 1e-3;
  const std::vector<int> n_values{1, 2};
  const auto g = sweep_regime_map(s, n_values, std::vector<double>{0.01, 0.1});
  CHECK_FALSE(g.complete());
  CHECK(g.status[0][0] == CellStatus::failed);
  CHECK(std::isnan(g.delta[1][1]));
  CHECK_FALSE(g.messages[1].empty());
}

TEST_CASE("bloch-siegert shift vanishes with the coupling") {
  BlochSiegertSettings s;
  s.rates = RateSet{1e-5, 1e-5, 0.0, 1e-5};
  s.n_max = 6;
  s.horizon = 4000.0;
  const auto r = bloch_siegert_shift(0.01, s);
  CHECK(std::abs(r.shift) <= r.resolution);
  CHECK(r.rwa_frequency == doctest::Approx(0.02).epsilon(0.05));
}

}
