#include "odeflow/linear1d_oracle.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "odeflow/error.hpp"

namespace odeflow::linear1d {

namespace {

double finite_or_throw(double value, const char* what, double a) {
  if (!std::isfinite(value)) {
    std::ostringstream os;
    os << what << " overflowed at a=" << a;
    throw Error(ErrorCode::kNonFiniteValue, os.str());
  }
  return value;
}

}  // namespace

void Problem::validate() const {
  if (!(sigma2 > 0.0) || !(t > 0.0) || !std::isfinite(a_star) || !std::isfinite(sigma2) ||
      !std::isfinite(t)) {
    throw Error(ErrorCode::kInvalidArgument, "problem needs sigma2 > 0, t > 0, finite a_star");
  }
}

double loss_exact(const Problem& p, double a) {
  p.validate();
  const double diff = std::exp(a * p.t) - std::exp(p.a_star * p.t);
  return finite_or_throw(0.5 * p.sigma2 * diff * diff, "loss", a);
}

double loss_grad_exact(const Problem& p, double a) {
  p.validate();
  const double ea = std::exp(a * p.t);
  return finite_or_throw(p.sigma2 * p.t * ea * (ea - std::exp(p.a_star * p.t)), "loss gradient",
                         a);
}

double terminal_variance_exact(const Problem& p, double a) {
  p.validate();
  return finite_or_throw(p.sigma2 * std::exp(2.0 * a * p.t), "terminal variance", a);
}

double fisher_exact(const Problem& p, double a) {
  return finite_or_throw(p.t * p.t * terminal_variance_exact(p, a), "Fisher information", a);
}

double concavity_boundary(const Problem& p) {
  p.validate();
  return p.a_star - std::numbers::ln2 / p.t;
}

std::vector<LandscapePoint> landscape_sweep(const Problem& p, double a_min, double a_max,
                                            int n_points) {
  p.validate();
  if (!(a_min < a_max) || !std::isfinite(a_min) || !std::isfinite(a_max)) {
    throw Error(ErrorCode::kInvalidArgument, "landscape sweep needs finite a_min < a_max");
  }
  if (n_points < 2) {
    throw Error(ErrorCode::kInvalidArgument, "landscape sweep needs at least 2 points");
  }
  std::vector<LandscapePoint> out;
  out.reserve(static_cast<std::size_t>(n_points));
  const double span = a_max - a_min;
  const double last = static_cast<double>(n_points - 1);
  for (int i = 0; i < n_points; ++i) {
    // span * i / last keeps interior grid points such as a = a* exact.
    LandscapePoint point;
    point.a = i + 1 == n_points ? a_max : a_min + span * static_cast<double>(i) / last;
    try {
      point.loss = loss_exact(p, point.a);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNonFiniteValue) throw;
    }
    out.push_back(point);
  }
  return out;
}

}  // namespace odeflow::linear1d
