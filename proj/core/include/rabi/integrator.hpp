#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/numeric/odeint.hpp>

#include "rabi/error.hpp"

namespace rabi {

enum class StepperKind { rkf78, dopri5 };

inline std::string_view to_string(StepperKind kind) {
  return kind == StepperKind::rkf78 ? "rkf78" : "dopri5";
}

inline StepperKind stepper_from_string(std::string_view text) {
  if (text == "rkf78") return StepperKind::rkf78;
  if (text == "dopri5") return StepperKind::dopri5;
  throw ConfigError("solver.stepper must be 'rkf78' or 'dopri5', got '" + std::string(text) + "'");
}

struct IntegratorSettings {
  double rtol = 1e-8;
  double atol = 1e-10;
  StepperKind stepper = StepperKind::rkf78;
  double initial_step = 1e-2;
  /// Upper bound on accepted steps between two consecutive sample times.
  std::size_t max_steps_per_sample = 500000;
};

struct IntegrationStats {
  std::size_t rhs_evaluations = 0;
  std::size_t samples = 0;
};

namespace detail {

template <class State>
bool all_finite(const State& x) {
  for (const auto& v : x) {
    if constexpr (requires { v.real(); }) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    } else {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

}  // namespace detail

/// Integrates x' = rhs(x, dxdt, t) and calls observer(index, t, x) at every
/// entry of `times`, which must be non-decreasing. `x` holds the state at
/// times.back() on return. Failures are rethrown as NumericalError.
template <class State, class Rhs, class Observer>
IntegrationStats integrate_on_grid(Rhs&& rhs, State& x, std::span<const double> times,
                                   const IntegratorSettings& settings, Observer&& observer) {
  namespace odeint = boost::numeric::odeint;
  IntegrationStats stats;
  if (times.empty()) return stats;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] >= times[i - 1])) {
      throw NumericalError("time grid must be non-decreasing");
    }
  }

  auto system = [&](const State& y, State& dydt, double t) {
    ++stats.rhs_evaluations;
    rhs(y, dydt, t);
  };
  std::size_t index = 0;
  auto obs = [&](const State& y, double t) {
    if (!detail::all_finite(y)) {
      throw NumericalError("non-finite state at t = " + std::to_string(t));
    }
    observer(index++, t, y);
    ++stats.samples;
  };

  const double span = times.back() - times.front();
  double dt0 = settings.initial_step;
  if (times.size() > 1 && span > 0.0) {
    dt0 = std::min(dt0, span / static_cast<double>(times.size() - 1));
  }
  if (!(dt0 > 0.0)) dt0 = 1e-6;

  odeint::max_step_checker checker(static_cast<int>(settings.max_steps_per_sample));
  try {
    if (settings.stepper == StepperKind::rkf78) {
      auto stepper = odeint::make_controlled(settings.atol, settings.rtol,
                                             odeint::runge_kutta_fehlberg78<State>());
      odeint::integrate_times(stepper, system, x, times.begin(), times.end(), dt0, obs, checker);
    } else {
      auto stepper = odeint::make_dense_output(settings.atol, settings.rtol,
                                               odeint::runge_kutta_dopri5<State>());
      odeint::integrate_times(stepper, system, x, times.begin(), times.end(), dt0, obs, checker);
    }
  } catch (const odeint::step_adjustment_error& e) {
    throw NumericalError(std::string("step size underflow (") + e.what() +
                         "); the problem may be stiff: try a smaller cutoff or looser tolerances");
  } catch (const odeint::no_progress_error& e) {
    throw NumericalError(std::string("integrator made no progress: ") + e.what());
  } catch (const odeint::odeint_error& e) {
    throw NumericalError(std::string("integrator failure: ") + e.what());
  }
  return stats;
}

}  // namespace rabi
