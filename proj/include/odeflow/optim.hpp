#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "odeflow/ode_core.hpp"

namespace odeflow {

enum class OptimizerMethod { kSgd, kAdam, kNatgrad, kFisherNatgrad };

[[nodiscard]] std::string to_string(OptimizerMethod method);
/// Accepts "sgd", "adam", "natgrad", "fisher-natgrad".
[[nodiscard]] OptimizerMethod parse_optimizer(const std::string& name);

/// Below this terminal second moment the variance-corrected step refuses to divide.
inline constexpr double kVarianceFloor = 1e-12;

/// Everything a run's optimizer carries between epochs. Only Adam mutates
/// anything beyond step_count.
struct OptimizerState {
  OptimizerMethod method = OptimizerMethod::kNatgrad;
  double eta = 0.05;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  Vector adam_m;
  Vector adam_v;
  std::int64_t step_count = 0;
  double fisher_damping = 1e-8;
};

/// Fresh state with zeroed Adam moments. Rejects eta <= 0; prints a warning
/// to stderr for the variance-corrected methods when eta >= 0.5, where the
/// per-step loss factor 1 - 2 eta no longer describes descent.
[[nodiscard]] OptimizerState make_optimizer(OptimizerMethod method, double eta,
                                            Eigen::Index param_count);

struct StepContext {
  Vector grad;                     // mean gradient over the dataset
  double terminal_variance = 0.0;  // mean squared terminal state
  double t = 1.0;
  std::optional<Matrix> fisher;
};

// theta - eta * grad
[[nodiscard]] Vector sgd_step(OptimizerState& state, const Vector& theta, const StepContext& ctx);

// Bias-corrected Adam.
[[nodiscard]] Vector adam_step(OptimizerState& state, const Vector& theta, const StepContext& ctx);

/// Variance-corrected step for a scalar parameter:
///   theta - eta * grad / (t^2 * terminal_variance).
/// Throws ZeroVariance when terminal_variance <= kVarianceFloor.
[[nodiscard]] Vector natgrad_step(OptimizerState& state, const Vector& theta,
                                  const StepContext& ctx);

/// theta - eta * (F + damping I)^{-1} grad with F = ctx.fisher. Throws
/// SingularFisher when the damped matrix cannot be inverted reliably.
[[nodiscard]] Vector fisher_natgrad_step(OptimizerState& state, const Vector& theta,
                                         const StepContext& ctx);

/// Dispatches on state.method.
[[nodiscard]] Vector apply_step(OptimizerState& state, const Vector& theta,
                                const StepContext& ctx);

}  // namespace odeflow
