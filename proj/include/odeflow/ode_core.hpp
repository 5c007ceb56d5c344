#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "odeflow/error.hpp"

namespace odeflow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Batches store one sample per row: a batch of B states of dimension n is a
// B x n matrix, so every state component is a contiguous column.
using BatchIn = Eigen::Ref<const Matrix>;
using BatchOut = Eigen::Ref<Matrix>;

/// Autonomous parameterized vector field x' = f(x; theta).
///
/// Implementations supply the point-wise evaluation and both Jacobians. The
/// batched entry points default to row-by-row loops over the point-wise
/// methods; models with cheap closed forms override them.
///
/// Sensitivity blocks ds/dtheta (state_dim x param_count per sample) are
/// flattened column-major into a row of length state_dim * param_count, i.e.
/// entry (r, c) lives at column c * state_dim + r.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  [[nodiscard]] virtual Eigen::Index state_dim() const = 0;
  [[nodiscard]] virtual Eigen::Index param_count() const = 0;
  [[nodiscard]] virtual std::string name() const = 0;

  [[nodiscard]] virtual Vector eval(const Vector& x, const Vector& theta) const = 0;
  [[nodiscard]] virtual Matrix jac_state(const Vector& x, const Vector& theta) const = 0;
  [[nodiscard]] virtual Matrix jac_param(const Vector& x, const Vector& theta) const = 0;

  /// Closed-form flow when one exists; std::nullopt otherwise.
  [[nodiscard]] virtual std::optional<Vector> exact_flow(const Vector& x0, const Vector& theta,
                                                         double t) const;

  // out.row(i) = f(xs.row(i))
  virtual void eval_batch(BatchIn xs, const Vector& theta, BatchOut out) const;
  // out.row(i) = (df/dx(xs.row(i))^T ys.row(i)^T)^T
  virtual void vjp_state_batch(BatchIn xs, const Vector& theta, BatchIn ys, BatchOut out) const;
  // out.row(i) = (df/dtheta(xs.row(i))^T ys.row(i)^T)^T
  virtual void vjp_param_batch(BatchIn xs, const Vector& theta, BatchIn ys, BatchOut out) const;
  // out.row(i) = vec(df/dx S_i + df/dtheta), S_i unflattened from sens.row(i)
  virtual void sensitivity_rhs_batch(BatchIn xs, const Vector& theta, BatchIn sens,
                                     BatchOut out) const;

  /// Throws DimensionMismatch unless x and theta fit this model.
  void check_dims(const Vector& x, const Vector& theta) const;
  void check_batch_dims(BatchIn xs, const Vector& theta) const;
};

enum class Method { kEuler, kRk4 };

[[nodiscard]] std::string to_string(Method method);
[[nodiscard]] Method parse_method(const std::string& name);

struct IntegratorConfig {
  double step_size = 0.01;
  Method method = Method::kRk4;

  void validate() const;
};

/// Uniform grid from t0 to t1 (either direction) with the last step shortened
/// so the final node is exactly t1.
struct StepGrid {
  double t0 = 0.0;
  double t1 = 0.0;
  double h = 0.0;  // signed
  std::int64_t steps = 0;

  [[nodiscard]] double time_at(std::int64_t k) const {
    return k >= steps ? t1 : t0 + static_cast<double>(k) * h;
  }
};

[[nodiscard]] StepGrid make_step_grid(double t0, double t1, double step_size);

struct Trajectory {
  std::vector<double> times;
  std::vector<Vector> states;
};

namespace detail {

struct RkWorkspace {
  Matrix k1, k2, k3, k4, tmp;

  void resize(Eigen::Index rows, Eigen::Index cols) {
    k1.resize(rows, cols);
    k2.resize(rows, cols);
    k3.resize(rows, cols);
    k4.resize(rows, cols);
    tmp.resize(rows, cols);
  }
};

[[noreturn]] void throw_non_finite(double time);

// x * 0 is 0 for finite x and NaN otherwise; Eigen vectorizes the sum, which
// allFinite() does not.
inline bool all_finite(const Matrix& m) {
  return std::isfinite((m.array() * 0.0).sum());
}

}  // namespace detail

/// Fixed-step integration of a batched autonomous system. `rhs(in, out)`
/// writes the derivative of `in` into `out` (same shape). `observe(time,
/// state)` runs after the initial state and after every step. Throws
/// NonFiniteState as soon as a step produces inf or NaN.
template <class Rhs, class Observer>
void integrate_batch(const Rhs& rhs, Matrix& state, double t0, double t1,
                     const IntegratorConfig& cfg, Observer&& observe) {
  cfg.validate();
  const StepGrid grid = make_step_grid(t0, t1, cfg.step_size);
  detail::RkWorkspace ws;
  ws.resize(state.rows(), state.cols());
  observe(t0, static_cast<const Matrix&>(state));

  for (std::int64_t k = 0; k < grid.steps; ++k) {
    const double ta = grid.time_at(k);
    const double tb = grid.time_at(k + 1);
    const double dt = tb - ta;
    switch (cfg.method) {
      case Method::kEuler:
        rhs(state, ws.k1);
        state += dt * ws.k1;
        break;
      case Method::kRk4: {
        const double half = 0.5 * dt;
        rhs(state, ws.k1);
        ws.tmp = state + half * ws.k1;
        rhs(ws.tmp, ws.k2);
        ws.tmp = state + half * ws.k2;
        rhs(ws.tmp, ws.k3);
        ws.tmp = state + dt * ws.k3;
        rhs(ws.tmp, ws.k4);
        state += (dt / 6.0) * (ws.k1 + 2.0 * ws.k2 + 2.0 * ws.k3 + ws.k4);
        break;
      }
    }
    if (!detail::all_finite(state)) {
      detail::throw_non_finite(tb);
    }
    observe(tb, static_cast<const Matrix&>(state));
  }
}

template <class Rhs>
void integrate_batch(const Rhs& rhs, Matrix& state, double t0, double t1,
                     const IntegratorConfig& cfg) {
  integrate_batch(rhs, state, t0, t1, cfg, [](double, const Matrix&) {});
}

/// Rows per block when a large batch is integrated block by block. Rows never
/// interact, so blocking only changes memory locality, never results.
inline constexpr Eigen::Index kBatchBlockRows = 256;

/// Calls `fn(first_row, row_count)` for consecutive blocks covering `rows`.
template <class Fn>
void for_each_row_block(Eigen::Index rows, Fn&& fn) {
  for (Eigen::Index begin = 0; begin < rows; begin += kBatchBlockRows) {
    fn(begin, std::min(kBatchBlockRows, rows - begin));
  }
}

/// Trajectory of x' = f(x; theta) from t0 to t1; t1 < t0 integrates backward.
[[nodiscard]] Trajectory integrate(const DynamicsModel& model, const Vector& theta,
                                   const Vector& x0, double t0, double t1,
                                   const IntegratorConfig& cfg);

/// Numerical flow map phi^t(x0), t >= 0.
[[nodiscard]] Vector flow_endpoint(const DynamicsModel& model, const Vector& theta,
                                   const Vector& x0, double t, const IntegratorConfig& cfg);

/// Row-wise flow map for a batch of initial states.
[[nodiscard]] Matrix flow_endpoint_batch(const DynamicsModel& model, const Vector& theta,
                                         BatchIn x0s, double t, const IntegratorConfig& cfg);

}  // namespace odeflow
