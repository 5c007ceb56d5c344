#include "odeflow/optim.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

namespace odeflow {

namespace {

void check_grad(const Vector& theta, const StepContext& ctx) {
  if (ctx.grad.size() != theta.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "gradient and parameter sizes differ");
  }
  if (!ctx.grad.allFinite()) {
    throw Error(ErrorCode::kNonFiniteValue, "gradient contains a non-finite entry");
  }
}

Vector finite_result(Vector theta) {
  if (!theta.allFinite()) {
    throw Error(ErrorCode::kNonFiniteValue, "update produced a non-finite parameter");
  }
  return theta;
}

}  // namespace

std::string to_string(OptimizerMethod method) {
  switch (method) {
    case OptimizerMethod::kSgd:
      return "sgd";
    case OptimizerMethod::kAdam:
      return "adam";
    case OptimizerMethod::kNatgrad:
      return "natgrad";
    case OptimizerMethod::kFisherNatgrad:
      return "fisher-natgrad";
  }
  return "unknown";
}

OptimizerMethod parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerMethod::kSgd;
  if (name == "adam") return OptimizerMethod::kAdam;
  if (name == "natgrad") return OptimizerMethod::kNatgrad;
  if (name == "fisher-natgrad") return OptimizerMethod::kFisherNatgrad;
  throw Error(ErrorCode::kInvalidArgument, "unknown optimizer '" + name + "'");
}

OptimizerState make_optimizer(OptimizerMethod method, double eta, Eigen::Index param_count) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw Error(ErrorCode::kInvalidArgument, "learning rate must be positive and finite");
  }
  if (param_count < 1) {
    throw Error(ErrorCode::kInvalidArgument, "optimizer needs at least one parameter");
  }
  if (eta >= 0.5 &&
      (method == OptimizerMethod::kNatgrad || method == OptimizerMethod::kFisherNatgrad)) {
    std::cerr << "warning: eta=" << eta << " >= 0.5; the variance-corrected step is not a"
              << " descent step at this learning rate\n";
  }
  OptimizerState state;
  state.method = method;
  state.eta = eta;
  state.adam_m = Vector::Zero(param_count);
  state.adam_v = Vector::Zero(param_count);
  return state;
}

Vector sgd_step(OptimizerState& state, const Vector& theta, const StepContext& ctx) {
  check_grad(theta, ctx);
  ++state.step_count;
  return finite_result(theta - state.eta * ctx.grad);
}

Vector adam_step(OptimizerState& state, const Vector& theta, const StepContext& ctx) {
  check_grad(theta, ctx);
  if (state.adam_m.size() != theta.size() || state.adam_v.size() != theta.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "Adam moments do not match parameter size");
  }
  ++state.step_count;
  const double k = static_cast<double>(state.step_count);
  state.adam_m = state.adam_beta1 * state.adam_m + (1.0 - state.adam_beta1) * ctx.grad;
  state.adam_v =
      state.adam_beta2 * state.adam_v + (1.0 - state.adam_beta2) * ctx.grad.cwiseAbs2();
  const Vector m_hat = state.adam_m / (1.0 - std::pow(state.adam_beta1, k));
  const Vector v_hat = state.adam_v / (1.0 - std::pow(state.adam_beta2, k));
  const Vector step = m_hat.array() / (v_hat.array().sqrt() + state.adam_eps);
  return finite_result(theta - state.eta * step);
}

Vector natgrad_step(OptimizerState& state, const Vector& theta, const StepContext& ctx) {
  if (theta.size() != 1) {
    throw Error(ErrorCode::kDimensionMismatch,
                "variance-corrected step is defined for a scalar parameter; use the Fisher variant");
  }
  check_grad(theta, ctx);
  if (!(ctx.t > 0.0)) {
    throw Error(ErrorCode::kNonPositiveTime, "terminal time must be positive");
  }
  if (!(ctx.terminal_variance > kVarianceFloor)) {
    std::ostringstream os;
    os << "terminal variance " << ctx.terminal_variance << " is at or below the floor "
       << kVarianceFloor;
    throw Error(ErrorCode::kZeroVariance, os.str());
  }
  ++state.step_count;
  const double fisher = ctx.t * ctx.t * ctx.terminal_variance;
  return finite_result(theta - state.eta * (ctx.grad / fisher));
}

Vector fisher_natgrad_step(OptimizerState& state, const Vector& theta, const StepContext& ctx) {
  check_grad(theta, ctx);
  if (!ctx.fisher) {
    throw Error(ErrorCode::kInvalidArgument, "Fisher-preconditioned step needs a Fisher matrix");
  }
  const Matrix& fisher = *ctx.fisher;
  if (fisher.rows() != theta.size() || fisher.cols() != theta.size()) {
    throw Error(ErrorCode::kDimensionMismatch, "Fisher matrix does not match parameter size");
  }
  Matrix damped = fisher;
  damped.diagonal().array() += state.fisher_damping;
  const Eigen::LDLT<Matrix> ldlt(damped);
  if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > std::numeric_limits<double>::epsilon())) {
    throw Error(ErrorCode::kSingularFisher, "damped Fisher matrix is singular to working precision");
  }
  ++state.step_count;
  const Vector direction = ldlt.solve(ctx.grad);
  return finite_result(theta - state.eta * direction);
}

Vector apply_step(OptimizerState& state, const Vector& theta, const StepContext& ctx) {
  switch (state.method) {
    case OptimizerMethod::kSgd:
      return sgd_step(state, theta, ctx);
    case OptimizerMethod::kAdam:
      return adam_step(state, theta, ctx);
    case OptimizerMethod::kNatgrad:
      return natgrad_step(state, theta, ctx);
    case OptimizerMethod::kFisherNatgrad:
      return fisher_natgrad_step(state, theta, ctx);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown optimizer method");
}

}  // namespace odeflow
