#pragma once

#include "odeflow/ode_core.hpp"

namespace odeflow {

/// x' = a x with the single parameter theta = (a).
class Linear1D final : public DynamicsModel {
 public:
  [[nodiscard]] Eigen::Index state_dim() const override { return 1; }
  [[nodiscard]] Eigen::Index param_count() const override { return 1; }
  [[nodiscard]] std::string name() const override { return "linear1d"; }

  [[nodiscard]] Vector eval(const Vector& x, const Vector& theta) const override;
  [[nodiscard]] Matrix jac_state(const Vector& x, const Vector& theta) const override;
  [[nodiscard]] Matrix jac_param(const Vector& x, const Vector& theta) const override;
  [[nodiscard]] std::optional<Vector> exact_flow(const Vector& x0, const Vector& theta,
                                                 double t) const override;

  void eval_batch(BatchIn xs, const Vector& theta, BatchOut out) const override;
  void vjp_state_batch(BatchIn xs, const Vector& theta, BatchIn ys, BatchOut out) const override;
  void vjp_param_batch(BatchIn xs, const Vector& theta, BatchIn ys, BatchOut out) const override;
  void sensitivity_rhs_batch(BatchIn xs, const Vector& theta, BatchIn sens,
                             BatchOut out) const override;
};

/// Decoupled linear system x_i' = a_i x_i, theta = (a_1, ..., a_n).
class DiagonalLinear final : public DynamicsModel {
 public:
  explicit DiagonalLinear(Eigen::Index dim);

  [[nodiscard]] Eigen::Index state_dim() const override { return dim_; }
  [[nodiscard]] Eigen::Index param_count() const override { return dim_; }
  [[nodiscard]] std::string name() const override { return "diagonal_linear"; }

  [[nodiscard]] Vector eval(const Vector& x, const Vector& theta) const override;
  [[nodiscard]] Matrix jac_state(const Vector& x, const Vector& theta) const override;
  [[nodiscard]] Matrix jac_param(const Vector& x, const Vector& theta) const override;
  [[nodiscard]] std::optional<Vector> exact_flow(const Vector& x0, const Vector& theta,
                                                 double t) const override;

  void eval_batch(BatchIn xs, const Vector& theta, BatchOut out) const override;
  void vjp_state_batch(BatchIn xs, const Vector& theta, BatchIn ys, BatchOut out) const override;
  void vjp_param_batch(BatchIn xs, const Vector& theta, BatchIn ys, BatchOut out) const override;
  void sensitivity_rhs_batch(BatchIn xs, const Vector& theta, BatchIn sens,
                             BatchOut out) const override;

 private:
  Eigen::Index dim_;
};

/// Single tanh layer x' = tanh(W x + b).
///
/// theta packs W row-major followed by b: theta[i * n + j] = W(i, j) and
/// theta[n * n + i] = b(i). Uses the generic batched fallbacks.
class TanhLayer final : public DynamicsModel {
 public:
  explicit TanhLayer(Eigen::Index dim);

  [[nodiscard]] Eigen::Index state_dim() const override { return dim_; }
  [[nodiscard]] Eigen::Index param_count() const override { return dim_ * dim_ + dim_; }
  [[nodiscard]] std::string name() const override { return "tanh_layer"; }

  [[nodiscard]] Vector eval(const Vector& x, const Vector& theta) const override;
  [[nodiscard]] Matrix jac_state(const Vector& x, const Vector& theta) const override;
  [[nodiscard]] Matrix jac_param(const Vector& x, const Vector& theta) const override;

 private:
  [[nodiscard]] Vector preactivation(const Vector& x, const Vector& theta) const;

  Eigen::Index dim_;
};

}  // namespace odeflow
