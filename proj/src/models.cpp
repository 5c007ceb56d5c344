#include "odeflow/models.hpp"

#include <cmath>

namespace odeflow {

// ---------------------------------------------------------------- Linear1D

Vector Linear1D::eval(const Vector& x, const Vector& theta) const {
  check_dims(x, theta);
  return theta[0] * x;
}

Matrix Linear1D::jac_state(const Vector& x, const Vector& theta) const {
  check_dims(x, theta);
  return Matrix::Constant(1, 1, theta[0]);
}

Matrix Linear1D::jac_param(const Vector& x, const Vector& theta) const {
  check_dims(x, theta);
  return Matrix::Constant(1, 1, x[0]);
}

std::optional<Vector> Linear1D::exact_flow(const Vector& x0, const Vector& theta, double t) const {
  check_dims(x0, theta);
  return Vector(std::exp(theta[0] * t) * x0);
}

void Linear1D::eval_batch(BatchIn xs, const Vector& theta, BatchOut out) const {
  out.noalias() = theta[0] * xs;
}

void Linear1D::vjp_state_batch(BatchIn, const Vector& theta, BatchIn ys, BatchOut out) const {
  out.noalias() = theta[0] * ys;
}

void Linear1D::vjp_param_batch(BatchIn xs, const Vector&, BatchIn ys, BatchOut out) const {
  out.array() = xs.array() * ys.array();
}

void Linear1D::sensitivity_rhs_batch(BatchIn xs, const Vector& theta, BatchIn sens,
                                     BatchOut out) const {
  out.array() = theta[0] * sens.array() + xs.array();
}

// ---------------------------------------------------------- DiagonalLinear

DiagonalLinear::DiagonalLinear(Eigen::Index dim) : dim_(dim) {
  if (dim < 1) {
    throw Error(ErrorCode::kInvalidArgument, "DiagonalLinear needs dim >= 1");
  }
}

Vector DiagonalLinear::eval(const Vector& x, const Vector& theta) const {
  check_dims(x, theta);
  return theta.cwiseProduct(x);
}

Matrix DiagonalLinear::jac_state(const Vector& x, const Vector& theta) const {
  check_dims(x, theta);
  return theta.asDiagonal();
}

Matrix DiagonalLinear::jac_param(const Vector& x, const Vector& theta) const {
  check_dims(x, theta);
  return x.asDiagonal();
}

std::optional<Vector> DiagonalLinear::exact_flow(const Vector& x0, const Vector& theta,
                                                 double t) const {
  check_dims(x0, theta);
  return Vector((theta.array() * t).exp() * x0.array());
}

void DiagonalLinear::eval_batch(BatchIn xs, const Vector& theta, BatchOut out) const {
  out.noalias() = xs * theta.asDiagonal();
}

void DiagonalLinear::vjp_state_batch(BatchIn, const Vector& theta, BatchIn ys,
                                     BatchOut out) const {
  out.noalias() = ys * theta.asDiagonal();
}

void DiagonalLinear::vjp_param_batch(BatchIn xs, const Vector&, BatchIn ys, BatchOut out) const {
  out.array() = xs.array() * ys.array();
}

void DiagonalLinear::sensitivity_rhs_batch(BatchIn xs, const Vector& theta, BatchIn sens,
                                           BatchOut out) const {
  const Eigen::Index n = dim_;
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) {
      const Eigen::Index col = c * n + r;
      if (r == c) {
        out.col(col).array() = theta[r] * sens.col(col).array() + xs.col(r).array();
      } else {
        out.col(col).noalias() = theta[r] * sens.col(col);
      }
    }
  }
}

// --------------------------------------------------------------- TanhLayer

TanhLayer::TanhLayer(Eigen::Index dim) : dim_(dim) {
  if (dim < 1) {
    throw Error(ErrorCode::kInvalidArgument, "TanhLayer needs dim >= 1");
  }
}

Vector TanhLayer::preactivation(const Vector& x, const Vector& theta) const {
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      w(theta.data(), dim_, dim_);
  return w * x + theta.tail(dim_);
}

Vector TanhLayer::eval(const Vector& x, const Vector& theta) const {
  check_dims(x, theta);
  return preactivation(x, theta).array().tanh();
}

Matrix TanhLayer::jac_state(const Vector& x, const Vector& theta) const {
  check_dims(x, theta);
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      w(theta.data(), dim_, dim_);
  const Vector slope = 1.0 - preactivation(x, theta).array().tanh().square();
  return slope.asDiagonal() * w;
}

Matrix TanhLayer::jac_param(const Vector& x, const Vector& theta) const {
  check_dims(x, theta);
  const Vector slope = 1.0 - preactivation(x, theta).array().tanh().square();
  Matrix jac = Matrix::Zero(dim_, param_count());
  for (Eigen::Index i = 0; i < dim_; ++i) {
    jac.row(i).segment(i * dim_, dim_) = slope[i] * x.transpose();
    jac(i, dim_ * dim_ + i) = slope[i];
  }
  return jac;
}

}  // namespace odeflow
