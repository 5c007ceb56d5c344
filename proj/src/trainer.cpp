#include "odeflow/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <sstream>
#include <thread>

#include "odeflow/adjoint.hpp"

namespace odeflow {

Dataset generate_dataset(const DynamicsModel& truth, const Vector& theta_star, Eigen::Index n,
                         double sigma2, double t, std::uint64_t seed) {
  if (n < 1) {
    throw Error(ErrorCode::kEmptyDataset, "dataset needs at least one sample");
  }
  if (!(sigma2 > 0.0) || !(t > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "dataset needs sigma2 > 0 and t > 0");
  }
  if (theta_star.size() != truth.param_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "true parameters do not match the truth model");
  }
  const Eigen::Index dim = truth.state_dim();
  Dataset data;
  data.t = t;
  data.seed = seed;
  data.x0.resize(n, dim);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(sigma2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      data.x0(i, j) = normal(rng);
    }
  }

  const Vector probe = data.x0.row(0).transpose();
  if (truth.exact_flow(probe, theta_star, t)) {
    data.x_t_star.resize(n, dim);
    for (Eigen::Index i = 0; i < n; ++i) {
      data.x_t_star.row(i) = truth.exact_flow(data.x0.row(i).transpose(), theta_star, t)->transpose();
    }
    if (!data.x_t_star.allFinite()) {
      throw Error(ErrorCode::kNonFiniteState, "true flow overflowed while building targets");
    }
  } else {
    IntegratorConfig fine;
    fine.step_size = 1e-4;
    fine.method = Method::kRk4;
    data.x_t_star = flow_endpoint_batch(truth, theta_star, data.x0, t, fine);
  }
  return data;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (!(eta > 0.0)) throw Error(ErrorCode::kInvalidArgument, "eta must be > 0");
  if (!(convergence_loss >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "convergence_loss must be >= 0");
  }
  if (n_samples < 1) throw Error(ErrorCode::kInvalidArgument, "n_samples must be >= 1");
  if (!(sigma2 > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sigma2 must be > 0");
  if (threads < 1) throw Error(ErrorCode::kInvalidArgument, "threads must be >= 1");
  if (!(fisher_damping >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "fisher_damping must be >= 0");
  }
  integrator.validate();
}

namespace {

BatchGradientResult chunked_gradients(const DynamicsModel& model, const Vector& theta,
                                      const Dataset& data, const TrainConfig& cfg) {
  const Eigen::Index n = data.size();
  const Eigen::Index chunks = std::min<Eigen::Index>(cfg.threads, n);
  if (chunks <= 1) {
    return adjoint_gradient_batch(model, theta, data.x0, data.x_t_star, data.t, cfg.integrator);
  }

  BatchGradientResult out;
  out.grads.resize(n, model.param_count());
  out.losses.resize(n);
  out.x_t.resize(n, model.state_dim());
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(chunks));
  {
    std::vector<std::jthread> workers;
    workers.reserve(static_cast<std::size_t>(chunks));
    for (Eigen::Index c = 0; c < chunks; ++c) {
      const Eigen::Index begin = n * c / chunks;
      const Eigen::Index count = n * (c + 1) / chunks - begin;
      workers.emplace_back([&, c, begin, count] {
        try {
          BatchGradientResult part = adjoint_gradient_batch(
              model, theta, data.x0.middleRows(begin, count),
              data.x_t_star.middleRows(begin, count), data.t, cfg.integrator);
          out.grads.middleRows(begin, count) = part.grads;
          out.losses.segment(begin, count) = part.losses;
          out.x_t.middleRows(begin, count) = part.x_t;
        } catch (...) {
          errors[static_cast<std::size_t>(c)] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace

EpochResult train_epoch(const DynamicsModel& model, const Vector& theta, const Dataset& data,
                        OptimizerState& opt, const TrainConfig& cfg, int epoch) {
  if (data.size() == 0) {
    throw Error(ErrorCode::kEmptyDataset, "cannot train on an empty dataset");
  }
  const BatchGradientResult per_sample = chunked_gradients(model, theta, data, cfg);

  // Sample-order reductions.
  const Eigen::Index n = data.size();
  Vector grad = Vector::Zero(model.param_count());
  double loss = 0.0;
  double second_moment = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    grad += per_sample.grads.row(i).transpose();
    loss += per_sample.losses[i];
    second_moment += per_sample.x_t.row(i).squaredNorm();
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  grad *= inv_n;
  loss *= inv_n;
  second_moment *= inv_n;

  StepContext ctx;
  ctx.grad = grad;
  ctx.terminal_variance = second_moment;
  ctx.t = data.t;
  if (opt.method == OptimizerMethod::kFisherNatgrad) {
    ctx.fisher = empirical_fisher(model, theta, data.x0, data.t, cfg.integrator);
  }

  EpochResult result;
  result.record.epoch = epoch;
  result.record.loss = loss;
  result.record.params = theta;
  result.record.terminal_variance = second_moment;
  result.record.grad_norm = grad.norm();
  result.params = apply_step(opt, theta, ctx);
  return result;
}

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::kCompleted:
      return "completed";
    case RunStatus::kConverged:
      return "converged";
    case RunStatus::kDiverged:
      return "diverged";
    case RunStatus::kFailed:
      return "failed";
  }
  return "unknown";
}

TrainResult train(const DynamicsModel& model, const Vector& theta0, const Dataset& data,
                  const TrainConfig& cfg) {
  cfg.validate();
  if (theta0.size() != model.param_count()) {
    throw Error(ErrorCode::kDimensionMismatch, "initial parameters do not match the model");
  }
  OptimizerState opt = make_optimizer(cfg.method, cfg.eta, model.param_count());
  opt.fisher_damping = cfg.fisher_damping;

  TrainResult result;
  result.params = theta0;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochResult step;
    try {
      step = train_epoch(model, result.params, data, opt, cfg, epoch);
    } catch (const Error& e) {
      const bool overflow =
          e.code() == ErrorCode::kNonFiniteState || e.code() == ErrorCode::kNonFiniteValue;
      result.status = overflow ? RunStatus::kDiverged : RunStatus::kFailed;
      std::ostringstream os;
      os << "epoch " << epoch << ": " << e.what();
      result.message = os.str();
      return result;
    }
    result.history.push_back(step.record);
    if (!std::isfinite(step.record.loss) || step.record.loss > kDivergenceLoss) {
      std::ostringstream os;
      os << "epoch " << epoch << ": loss " << step.record.loss << " exceeds " << kDivergenceLoss;
      result.status = RunStatus::kDiverged;
      result.message = os.str();
      return result;
    }
    result.params = step.params;
    if (step.record.loss < cfg.convergence_loss) {
      result.status = RunStatus::kConverged;
      return result;
    }
  }
  result.status = RunStatus::kCompleted;
  return result;
}

std::optional<double> log_loss_slope(const std::vector<TrainRecord>& history, int first_epoch,
                                     int last_epoch) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int count = 0;
  for (const TrainRecord& r : history) {
    if (r.epoch < first_epoch || r.epoch > last_epoch || !(r.loss > 0.0)) continue;
    const double x = r.epoch;
    const double y = std::log(r.loss);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++count;
  }
  if (count < 2) return std::nullopt;
  const double denom = count * sxx - sx * sx;
  if (denom == 0.0) return std::nullopt;
  return (count * sxy - sx * sy) / denom;
}

std::optional<int> epochs_to_loss(const std::vector<TrainRecord>& history, double threshold) {
  for (const TrainRecord& r : history) {
    if (r.loss < threshold) return r.epoch;
  }
  return std::nullopt;
}

}  // namespace odeflow
