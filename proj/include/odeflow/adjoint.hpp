#pragma once

#include "odeflow/ode_core.hpp"

namespace odeflow {

/// Per-sample terminal-loss gradient. loss = 0.5 * |x_t - x_t_star|^2.
struct GradientResult {
  Vector grad;
  double loss = 0.0;
  Vector x_t;
};

/// Row-wise results for a batch: grads is B x param_count, x_t is B x state_dim.
struct BatchGradientResult {
  Matrix grads;
  Vector losses;
  Matrix x_t;
};

/// Gradient of 0.5 * |phi^t(x0) - x_t_star|^2 with respect to theta.
///
/// Integrates the state forward to x_t, then solves the augmented system
///   x' = f(x),  y' = -(df/dx)^T y,  z' = -(df/dtheta)^T y
/// backward from t to 0 starting at (x_t, x_t - x_t_star, 0). The state is
/// re-integrated in reverse rather than replayed, and z(0) is the gradient.
/// Both passes use `cfg`.
[[nodiscard]] GradientResult adjoint_gradient(const DynamicsModel& model, const Vector& theta,
                                              const Vector& x0, const Vector& x_t_star, double t,
                                              const IntegratorConfig& cfg);

/// Same as adjoint_gradient for every row of x0s / x_t_stars. Rows are
/// independent; the result for a row does not depend on the rest of the batch.
[[nodiscard]] BatchGradientResult adjoint_gradient_batch(const DynamicsModel& model,
                                                         const Vector& theta, BatchIn x0s,
                                                         BatchIn x_t_stars, double t,
                                                         const IntegratorConfig& cfg);

/// d phi^t(x0) / d theta (state_dim x param_count) from the variational
/// equation s' = (df/dx) s + df/dtheta, s(0) = 0.
[[nodiscard]] Matrix forward_sensitivity(const DynamicsModel& model, const Vector& theta,
                                         const Vector& x0, double t, const IntegratorConfig& cfg);

/// Flattened sensitivities for a batch, one row per sample (see
/// DynamicsModel for the column layout).
[[nodiscard]] Matrix forward_sensitivity_batch(const DynamicsModel& model, const Vector& theta,
                                               BatchIn x0s, double t,
                                               const IntegratorConfig& cfg);

/// (1/N) sum_i S_i^T S_i over the rows of initial_states, S_i the forward
/// sensitivity at that state. Exactly symmetric.
[[nodiscard]] Matrix empirical_fisher(const DynamicsModel& model, const Vector& theta,
                                      BatchIn initial_states, double t,
                                      const IntegratorConfig& cfg);

/// Same reduction over precomputed flattened sensitivities.
[[nodiscard]] Matrix fisher_from_sensitivities(BatchIn sens, Eigen::Index state_dim,
                                               Eigen::Index param_count);

}  // namespace odeflow
