#include "odeflow/adjoint.hpp"

#include <sstream>

namespace odeflow {

namespace {

void require_positive_time(double t) {
  if (!(t > 0.0)) {
    std::ostringstream os;
    os << "terminal time must be positive, got " << t;
    throw Error(ErrorCode::kNonPositiveTime, os.str());
  }
}

}  // namespace

BatchGradientResult adjoint_gradient_batch(const DynamicsModel& model, const Vector& theta,
                                           BatchIn x0s, BatchIn x_t_stars, double t,
                                           const IntegratorConfig& cfg) {
  require_positive_time(t);
  model.check_batch_dims(x0s, theta);
  if (x_t_stars.rows() != x0s.rows() || x_t_stars.cols() != x0s.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "target batch shape differs from initial states");
  }
  const Eigen::Index batch = x0s.rows();
  const Eigen::Index n = model.state_dim();
  const Eigen::Index p = model.param_count();

  BatchGradientResult result;
  result.grads.resize(batch, p);
  result.losses.resize(batch);
  result.x_t.resize(batch, n);

  const auto forward = [&](const Matrix& in, Matrix& out) { model.eval_batch(in, theta, out); };
  // Reverse pass in s = t - tau, running s from 0 to t:
  //   dx/ds = -f,  dy/ds = J_x^T y,  dz/ds = J_theta^T y.
  // Same node sequence as stepping tau from t down to 0, but only the state
  // columns need a sign flip.
  const auto backward = [&](const Matrix& in, Matrix& out) {
    const auto x = in.leftCols(n);
    const auto y = in.middleCols(n, n);
    model.eval_batch(x, theta, out.leftCols(n));
    out.leftCols(n) *= -1.0;
    model.vjp_state_batch(x, theta, y, out.middleCols(n, n));
    model.vjp_param_batch(x, theta, y, out.rightCols(p));
  };

  // Forward and reverse pass per block so each block stays cache resident.
  for_each_row_block(batch, [&](Eigen::Index begin, Eigen::Index count) {
    Matrix x = x0s.middleRows(begin, count);
    if (!x.allFinite()) {
      detail::throw_non_finite(0.0);
    }
    integrate_batch(forward, x, 0.0, t, cfg);

    Matrix aug(count, 2 * n + p);
    aug.leftCols(n) = x;
    aug.middleCols(n, n) = x - x_t_stars.middleRows(begin, count);
    aug.rightCols(p).setZero();
    result.x_t.middleRows(begin, count) = x;
    result.losses.segment(begin, count) = 0.5 * aug.middleCols(n, n).rowwise().squaredNorm();

    integrate_batch(backward, aug, 0.0, t, cfg);
    result.grads.middleRows(begin, count) = aug.rightCols(p);
  });
  return result;
}

GradientResult adjoint_gradient(const DynamicsModel& model, const Vector& theta, const Vector& x0,
                                const Vector& x_t_star, double t, const IntegratorConfig& cfg) {
  model.check_dims(x0, theta);
  if (x_t_star.size() != x0.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "target state size differs from initial state");
  }
  const Matrix x0s = x0.transpose();
  const Matrix stars = x_t_star.transpose();
  const BatchGradientResult batch = adjoint_gradient_batch(model, theta, x0s, stars, t, cfg);
  return GradientResult{batch.grads.row(0).transpose(), batch.losses[0],
                        batch.x_t.row(0).transpose()};
}

Matrix forward_sensitivity_batch(const DynamicsModel& model, const Vector& theta, BatchIn x0s,
                                 double t, const IntegratorConfig& cfg) {
  model.check_batch_dims(x0s, theta);
  if (!(t >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "sensitivity time must be non-negative");
  }
  const Eigen::Index n = model.state_dim();
  const Eigen::Index np = n * model.param_count();

  const auto rhs = [&](const Matrix& in, Matrix& out) {
    const auto x = in.leftCols(n);
    model.eval_batch(x, theta, out.leftCols(n));
    model.sensitivity_rhs_batch(x, theta, in.rightCols(np), out.rightCols(np));
  };
  Matrix sens(x0s.rows(), np);
  for_each_row_block(x0s.rows(), [&](Eigen::Index begin, Eigen::Index count) {
    Matrix aug(count, n + np);
    aug.leftCols(n) = x0s.middleRows(begin, count);
    aug.rightCols(np).setZero();
    integrate_batch(rhs, aug, 0.0, t, cfg);
    sens.middleRows(begin, count) = aug.rightCols(np);
  });
  return sens;
}

Matrix forward_sensitivity(const DynamicsModel& model, const Vector& theta, const Vector& x0,
                           double t, const IntegratorConfig& cfg) {
  model.check_dims(x0, theta);
  const Matrix x0s = x0.transpose();
  const Matrix flat = forward_sensitivity_batch(model, theta, x0s, t, cfg);
  const Eigen::Index n = model.state_dim();
  const Eigen::Index p = model.param_count();
  Matrix s(n, p);
  for (Eigen::Index c = 0; c < p; ++c) {
    s.col(c) = flat.row(0).segment(c * n, n).transpose();
  }
  return s;
}

Matrix fisher_from_sensitivities(BatchIn sens, Eigen::Index state_dim, Eigen::Index param_count) {
  if (sens.rows() == 0) {
    throw Error(ErrorCode::kEmptyDataset, "Fisher estimate needs at least one sample");
  }
  if (sens.cols() != state_dim * param_count) {
    throw Error(ErrorCode::kDimensionMismatch, "sensitivity width does not match model");
  }
  const double inv_n = 1.0 / static_cast<double>(sens.rows());
  Matrix fisher(param_count, param_count);
  for (Eigen::Index c1 = 0; c1 < param_count; ++c1) {
    for (Eigen::Index c2 = c1; c2 < param_count; ++c2) {
      double acc = 0.0;
      for (Eigen::Index r = 0; r < state_dim; ++r) {
        acc += sens.col(c1 * state_dim + r).dot(sens.col(c2 * state_dim + r));
      }
      fisher(c1, c2) = acc * inv_n;
      fisher(c2, c1) = fisher(c1, c2);
    }
  }
  return fisher;
}

Matrix empirical_fisher(const DynamicsModel& model, const Vector& theta, BatchIn initial_states,
                        double t, const IntegratorConfig& cfg) {
  if (initial_states.rows() == 0) {
    throw Error(ErrorCode::kEmptyDataset, "Fisher estimate needs at least one initial state");
  }
  const Matrix sens = forward_sensitivity_batch(model, theta, initial_states, t, cfg);
  return fisher_from_sensitivities(sens, model.state_dim(), model.param_count());
}

}  // namespace odeflow
