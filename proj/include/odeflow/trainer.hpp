#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "odeflow/ode_core.hpp"
#include "odeflow/optim.hpp"

namespace odeflow {

inline constexpr std::uint64_t kDefaultSeed = 20240917;
inline constexpr double kDivergenceLoss = 1e12;

/// Pairs (x0, phi_truth^t(x0)), one per row.
struct Dataset {
  Matrix x0;
  Matrix x_t_star;
  double t = 1.0;
  std::uint64_t seed = kDefaultSeed;

  [[nodiscard]] Eigen::Index size() const { return x0.rows(); }
};

/// Draws n initial states i.i.d. N(0, sigma2 I) and pushes them through the
/// truth's flow (closed form when the model has one, rk4 with h = 1e-4
/// otherwise). Same arguments give a bit-identical dataset.
[[nodiscard]] Dataset generate_dataset(const DynamicsModel& truth, const Vector& theta_star,
                                       Eigen::Index n, double sigma2, double t,
                                       std::uint64_t seed);

struct TrainConfig {
  int epochs = 200;
  double eta = 0.05;
  OptimizerMethod method = OptimizerMethod::kNatgrad;
  double convergence_loss = 1e-12;
  IntegratorConfig integrator;
  Eigen::Index n_samples = 10000;
  double sigma2 = 1.0;
  std::uint64_t seed = kDefaultSeed;
  int threads = 1;
  double fisher_damping = 1e-8;

  void validate() const;
};

/// State of one epoch, measured at the parameters the epoch started from.
struct TrainRecord {
  int epoch = 0;
  double loss = 0.0;               // mean of 0.5 |x_t - x_t*|^2
  Vector params;
  double terminal_variance = 0.0;  // mean of |x_t|^2
  double grad_norm = 0.0;          // |mean gradient|_2
};

struct EpochResult {
  Vector params;  // after the update
  TrainRecord record;
};

/// One full-batch pass: per-sample adjoint gradients, mean gradient, terminal
/// second moment, then one optimizer update. Samples are split into
/// cfg.threads contiguous chunks; reductions run in sample order afterwards,
/// so the result does not depend on the thread count.
[[nodiscard]] EpochResult train_epoch(const DynamicsModel& model, const Vector& theta,
                                      const Dataset& data, OptimizerState& opt,
                                      const TrainConfig& cfg, int epoch = 1);

enum class RunStatus { kCompleted, kConverged, kDiverged, kFailed };

[[nodiscard]] std::string to_string(RunStatus status);

struct TrainResult {
  std::vector<TrainRecord> history;
  Vector params;
  RunStatus status = RunStatus::kCompleted;
  std::string message;

  [[nodiscard]] bool aborted() const {
    return status == RunStatus::kDiverged || status == RunStatus::kFailed;
  }
};

/// Repeats train_epoch until cfg.epochs are done or the recorded loss drops
/// below cfg.convergence_loss. A loss above kDivergenceLoss or a non-finite
/// state/parameter marks the run diverged; other numerical errors mark it
/// failed. Aborted runs keep the history recorded so far.
[[nodiscard]] TrainResult train(const DynamicsModel& model, const Vector& theta0,
                                const Dataset& data, const TrainConfig& cfg);

/// Least-squares slope of ln(loss) against epoch over records with epoch in
/// [first_epoch, last_epoch] and positive loss. Empty with fewer than two
/// usable records.
[[nodiscard]] std::optional<double> log_loss_slope(const std::vector<TrainRecord>& history,
                                                   int first_epoch, int last_epoch);

/// First recorded epoch whose loss is below `threshold`.
[[nodiscard]] std::optional<int> epochs_to_loss(const std::vector<TrainRecord>& history,
                                                double threshold);

}  // namespace odeflow
