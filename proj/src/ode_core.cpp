#include "odeflow/ode_core.hpp"

#include <cmath>
#include <sstream>

namespace odeflow {

std::optional<Vector> DynamicsModel::exact_flow(const Vector&, const Vector&, double) const {
  return std::nullopt;
}

void DynamicsModel::eval_batch(BatchIn xs, const Vector& theta, BatchOut out) const {
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    out.row(i) = eval(xs.row(i).transpose(), theta).transpose();
  }
}

void DynamicsModel::vjp_state_batch(BatchIn xs, const Vector& theta, BatchIn ys,
                                    BatchOut out) const {
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    out.row(i) = ys.row(i) * jac_state(xs.row(i).transpose(), theta);
  }
}

void DynamicsModel::vjp_param_batch(BatchIn xs, const Vector& theta, BatchIn ys,
                                    BatchOut out) const {
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    out.row(i) = ys.row(i) * jac_param(xs.row(i).transpose(), theta);
  }
}

void DynamicsModel::sensitivity_rhs_batch(BatchIn xs, const Vector& theta, BatchIn sens,
                                          BatchOut out) const {
  const Eigen::Index n = state_dim();
  const Eigen::Index p = param_count();
  Matrix s(n, p);
  for (Eigen::Index i = 0; i < xs.rows(); ++i) {
    const Vector x = xs.row(i).transpose();
    for (Eigen::Index c = 0; c < p; ++c) {
      s.col(c) = sens.row(i).segment(c * n, n).transpose();
    }
    const Matrix ds = jac_state(x, theta) * s + jac_param(x, theta);
    for (Eigen::Index c = 0; c < p; ++c) {
      out.row(i).segment(c * n, n) = ds.col(c).transpose();
    }
  }
}

void DynamicsModel::check_dims(const Vector& x, const Vector& theta) const {
  if (x.size() != state_dim() || theta.size() != param_count()) {
    std::ostringstream os;
    os << name() << " expects state_dim=" << state_dim() << " param_count=" << param_count()
       << ", got x of size " << x.size() << " and theta of size " << theta.size();
    throw Error(ErrorCode::kDimensionMismatch, os.str());
  }
}

void DynamicsModel::check_batch_dims(BatchIn xs, const Vector& theta) const {
  if (xs.cols() != state_dim() || theta.size() != param_count()) {
    std::ostringstream os;
    os << name() << " expects state_dim=" << state_dim() << " param_count=" << param_count()
       << ", got batch with " << xs.cols() << " columns and theta of size " << theta.size();
    throw Error(ErrorCode::kDimensionMismatch, os.str());
  }
}

std::string to_string(Method method) {
  return method == Method::kEuler ? "euler" : "rk4";
}

Method parse_method(const std::string& name) {
  if (name == "euler") return Method::kEuler;
  if (name == "rk4") return Method::kRk4;
  throw Error(ErrorCode::kInvalidArgument, "unknown integration method '" + name + "'");
}

void IntegratorConfig::validate() const {
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw Error(ErrorCode::kInvalidArgument, "integrator step size must be positive and finite");
  }
}

StepGrid make_step_grid(double t0, double t1, double step_size) {
  if (!std::isfinite(t0) || !std::isfinite(t1)) {
    throw Error(ErrorCode::kInvalidArgument, "integration bounds must be finite");
  }
  StepGrid grid;
  grid.t0 = t0;
  grid.t1 = t1;
  const double span = std::abs(t1 - t0);
  if (span == 0.0) {
    return grid;
  }
  grid.h = t1 > t0 ? step_size : -step_size;
  // A ratio like 1.0 / 0.01 can land a few ulps above an integer; do not
  // spend an extra step on the rounding residue.
  const double ratio = span / step_size;
  grid.steps = static_cast<std::int64_t>(std::ceil(ratio - 1e-9 * ratio));
  if (grid.steps < 1) grid.steps = 1;
  return grid;
}

namespace detail {

void throw_non_finite(double time) {
  std::ostringstream os;
  os << "state became non-finite at t=" << time;
  throw Error(ErrorCode::kNonFiniteState, os.str());
}

}  // namespace detail

Trajectory integrate(const DynamicsModel& model, const Vector& theta, const Vector& x0, double t0,
                     double t1, const IntegratorConfig& cfg) {
  model.check_dims(x0, theta);
  if (!x0.allFinite()) {
    detail::throw_non_finite(t0);
  }
  Trajectory traj;
  Matrix state = x0.transpose();
  const auto rhs = [&](const Matrix& in, Matrix& out) { model.eval_batch(in, theta, out); };
  integrate_batch(rhs, state, t0, t1, cfg, [&](double time, const Matrix& s) {
    traj.times.push_back(time);
    traj.states.emplace_back(s.row(0).transpose());
  });
  return traj;
}

Vector flow_endpoint(const DynamicsModel& model, const Vector& theta, const Vector& x0, double t,
                     const IntegratorConfig& cfg) {
  model.check_dims(x0, theta);
  Matrix x0s = x0.transpose();
  return flow_endpoint_batch(model, theta, x0s, t, cfg).row(0).transpose();
}

Matrix flow_endpoint_batch(const DynamicsModel& model, const Vector& theta, BatchIn x0s, double t,
                           const IntegratorConfig& cfg) {
  model.check_batch_dims(x0s, theta);
  if (!(t >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "flow time must be non-negative");
  }
  if (!x0s.allFinite()) {
    detail::throw_non_finite(0.0);
  }
  Matrix result(x0s.rows(), x0s.cols());
  const auto rhs = [&](const Matrix& in, Matrix& out) { model.eval_batch(in, theta, out); };
  for_each_row_block(x0s.rows(), [&](Eigen::Index begin, Eigen::Index count) {
    Matrix state = x0s.middleRows(begin, count);
    integrate_batch(rhs, state, 0.0, t, cfg);
    result.middleRows(begin, count) = state;
  });
  return result;
}

}  // namespace odeflow
