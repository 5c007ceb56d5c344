#pragma once

#include <optional>
#include <vector>

namespace odeflow::linear1d {

// Closed forms for x' = a x fitted to x' = a_star x from x0 ~ N(0, sigma2),
// terminal loss at time t. Nothing here touches the numerical integrator.

struct Problem {
  double a_star = -1.0;
  double sigma2 = 1.0;
  double t = 1.0;

  /// Throws InvalidArgument unless sigma2 > 0 and t > 0.
  void validate() const;
};

/// (sigma2 / 2) (e^{a t} - e^{a* t})^2
[[nodiscard]] double loss_exact(const Problem& p, double a);

/// d/da of loss_exact: sigma2 t e^{a t} (e^{a t} - e^{a* t}).
[[nodiscard]] double loss_grad_exact(const Problem& p, double a);

/// Second moment of the learned flow's terminal state, sigma2 e^{2 a t}.
[[nodiscard]] double terminal_variance_exact(const Problem& p, double a);

/// t^2 * terminal_variance_exact.
[[nodiscard]] double fisher_exact(const Problem& p, double a);

/// a* - ln 2 / t. The loss is concave below this value and convex above.
[[nodiscard]] double concavity_boundary(const Problem& p);

struct LandscapePoint {
  double a = 0.0;
  std::optional<double> loss;  // empty where the loss overflowed
};

/// loss_exact on a uniform grid of n_points over [a_min, a_max]. Overflowed
/// points are kept with an empty loss.
[[nodiscard]] std::vector<LandscapePoint> landscape_sweep(const Problem& p, double a_min,
                                                          double a_max, int n_points);

}  // namespace odeflow::linear1d
