#include "cepp/ode.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace cepp {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187, kA53 = 64448.0 / 6561,
                 kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33, kA63 = 46732.0 / 5247,
                 kA64 = 49.0 / 176, kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192, kB5 = -2187.0 / 6784,
                 kB6 = 11.0 / 84;
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;

struct Stepper {
  const MultiStrainModel& model;
  double rel_tol;
  double abs_tol;
  Vector k1;
  bool have_k1 = false;

  Vector f(const ModelState& y) const { return vector_field(model, y); }

  // One accepted adaptive step from (t, y). h carries the step suggestion
  // across calls; h_taken reports the advance actually made. FSAL reuses the
  // last stage.
  ModelState step(double t, const ModelState& y, double* h, double h_max, double* h_taken) {
    const int dim = static_cast<int>(y.size());
    if (!have_k1) {
      k1 = f(y);
      have_k1 = true;
    }
    for (int attempt = 0; attempt < 64; ++attempt) {
      const double hh = std::min(*h, h_max);
      const Vector k2 = f(y + hh * (kA21 * k1));
      const Vector k3 = f(y + hh * (kA31 * k1 + kA32 * k2));
      const Vector k4 = f(y + hh * (kA41 * k1 + kA42 * k2 + kA43 * k3));
      const Vector k5 = f(y + hh * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4));
      const Vector k6 = f(y + hh * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 + kA65 * k5));
      ModelState y_new = y + hh * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
      const Vector k7 = f(y_new);
      const Vector err_vec =
          hh * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 + kE7 * k7);

      double err = 0.0;
      for (int i = 0; i < dim; ++i) {
        const double scale = abs_tol + rel_tol * std::max(std::abs(y(i)), std::abs(y_new(i)));
        err = std::max(err, std::abs(err_vec(i)) / scale);
      }
      if (err <= 1.0) {
        const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
        *h = hh * std::min(5.0, std::max(0.2, grow));
        *h_taken = hh;
        k1 = k7;  // FSAL
        return y_new;
      }
      const double shrink = std::max(0.1, 0.9 * std::pow(err, -0.25));
      *h = hh * shrink;
      if (*h < 1e-14 * std::max(1.0, std::abs(t))) {
        std::ostringstream os;
        os << "step size collapse at t = " << t;
        throw ConvergenceError(os.str());
      }
    }
    throw ConvergenceError("step rejected 64 times in a row");
  }
};

}  // namespace

OrbitResult integrate(const MultiStrainModel& model, const ModelState& initial, double T,
                      const IntegrateOptions& options) {
  if (initial.size() != model.state_dim()) throw InvalidArgument("initial state dimension mismatch");
  if ((initial.array() < -1e-12).any()) throw InvalidArgument("initial state must be nonnegative");
  if (!(T > 0.0)) throw InvalidArgument("integration horizon must be positive");

  const int points = std::max(2, options.output_points);
  OrbitResult result;
  result.times.reserve(points);
  result.states.reserve(points);

  Stepper stepper{model, options.rel_tol, options.abs_tol, Vector(), false};
  ModelState y = initial.cwiseMax(0.0);
  double t = 0.0;
  double h = T / 1000.0;

  auto record = [&](double time, const ModelState& state) {
    result.times.push_back(time);
    result.states.push_back(state);
    if (options.candidate) result.lyapunov_values.push_back(options.candidate->value(state));
  };
  record(0.0, y);

  for (int k = 1; k < points; ++k) {
    const double t_target = T * k / static_cast<double>(points - 1);
    while (t < t_target - 1e-14 * T) {
      double h_taken = 0.0;
      const ModelState y_new = stepper.step(t, y, &h, t_target - t, &h_taken);
      const double min_coeff = y_new.minCoeff();
      if (min_coeff < -1e-12) {
        std::ostringstream os;
        os << "integration left the nonnegative orthant (component " << min_coeff << " at t = " << t
           << ")";
        throw ConvergenceError(os.str());
      }
      y = y_new.cwiseMax(0.0);
      t += h_taken;
    }
    record(t_target, y);
  }

  // Lyapunov monotonicity along the sampled orbit
  result.lyapunov_max_step_increase = -std::numeric_limits<double>::infinity();
  if (options.candidate && result.lyapunov_values.size() > 1) {
    for (std::size_t k = 1; k < result.lyapunov_values.size(); ++k)
      result.lyapunov_max_step_increase = std::max(
          result.lyapunov_max_step_increase, result.lyapunov_values[k] - result.lyapunov_values[k - 1]);
  } else {
    result.lyapunov_max_step_increase = 0.0;
  }
  result.limit_candidate = y;
  return result;
}

std::vector<ConvergenceVerdict> attractor_check(const MultiStrainModel& model,
                                                const FaceEquilibrium& predicted,
                                                const std::vector<ModelState>& initials,
                                                const AttractorCheckOptions& options) {
  if (!predicted.exists()) throw DomainError("attractor check needs an existing equilibrium");

  double horizon = options.horizon;
  if (horizon <= 0.0) {
    const Matrix jac = model_jacobian(model, predicted.state);
    Eigen::EigenSolver<Matrix> es(jac, false);
    const double abscissa = es.eigenvalues().real().maxCoeff();
    horizon = abscissa < -1e-12 ? std::min(1e4, std::max(10.0, 50.0 / -abscissa)) : 1e4;
  }

  std::vector<ConvergenceVerdict> verdicts;
  for (const auto& initial : initials) {
    IntegrateOptions opts;
    opts.rel_tol = options.rel_tol;
    opts.candidate = options.candidate;
    OrbitResult orbit = integrate(model, initial, horizon, opts);
    ConvergenceVerdict verdict;
    verdict.distance = (orbit.states.back() - predicted.state).lpNorm<Eigen::Infinity>();
    verdict.converged = verdict.distance < options.radius;
    verdict.max_step_increase = orbit.lyapunov_max_step_increase;
    verdict.lyapunov_monotone =
        !options.candidate || orbit.lyapunov_max_step_increase <= options.step_tolerance;
    verdicts.push_back(verdict);
  }
  return verdicts;
}

}  // namespace cepp
