#pragma once

// Independent reference values for the tests. Nothing here calls into the
// library's oracle module; formulas are restated from scratch so a bug in one
// place cannot hide behind the same bug in the other.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ref {

// ---------------------------------------------------------------- x' = a x

inline double loss(double a, double a_star, double t, double sigma2) {
  const double d = std::exp(a * t) - std::exp(a_star * t);
  return 0.5 * sigma2 * d * d;
}

inline double loss_grad(double a, double a_star, double t, double sigma2) {
  const double ea = std::exp(a * t);
  return sigma2 * t * ea * (ea - std::exp(a_star * t));
}

inline double loss_second(double a, double a_star, double t, double sigma2) {
  const double ea = std::exp(a * t);
  return sigma2 * t * t * ea * (2.0 * ea - std::exp(a_star * t));
}

inline double terminal_variance(double a, double t, double sigma2) {
  return sigma2 * std::exp(2.0 * a * t);
}

// Per-sample adjoint target: d/da of 0.5 (e^{at} x0 - e^{a* t} x0)^2.
inline double sample_grad(double a, double a_star, double t, double x0) {
  const double ea = std::exp(a * t);
  return t * ea * (ea - std::exp(a_star * t)) * x0 * x0;
}

// Iterates a_{k+1} = a_k - eta * g(a_k) / scale(a_k) with exact quantities and
// returns the loss sequence Loss(a_0), ..., Loss(a_steps).
inline std::vector<double> exact_losses(double a0, double a_star, double t, double sigma2,
                                        double eta, int steps, bool variance_corrected) {
  std::vector<double> out;
  double a = a0;
  out.push_back(loss(a, a_star, t, sigma2));
  for (int k = 0; k < steps; ++k) {
    double g = loss_grad(a, a_star, t, sigma2);
    if (variance_corrected) g /= t * t * terminal_variance(a, t, sigma2);
    a -= eta * g;
    out.push_back(loss(a, a_star, t, sigma2));
  }
  return out;
}

// ------------------------------------------------------------- numerics

// Central difference of a scalar function of a vector, one coordinate at a time.
inline Eigen::VectorXd central_diff(const std::function<double(const Eigen::VectorXd&)>& f,
                                    const Eigen::VectorXd& at, double step) {
  Eigen::VectorXd g(at.size());
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    Eigen::VectorXd up = at;
    Eigen::VectorXd dn = at;
    up[i] += step;
    dn[i] -= step;
    g[i] = (f(up) - f(dn)) / (2.0 * step);
  }
  return g;
}

// Jacobian of a vector function by central differences.
inline Eigen::MatrixXd central_jac(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& at,
    double step) {
  const Eigen::VectorXd f0 = f(at);
  Eigen::MatrixXd j(f0.size(), at.size());
  for (Eigen::Index i = 0; i < at.size(); ++i) {
    Eigen::VectorXd up = at;
    Eigen::VectorXd dn = at;
    up[i] += step;
    dn[i] -= step;
    j.col(i) = (f(up) - f(dn)) / (2.0 * step);
  }
  return j;
}

inline double rel_err(const Eigen::VectorXd& got, const Eigen::VectorXd& want) {
  const double scale = std::max(want.norm(), 1e-12);
  return (got - want).norm() / scale;
}

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

// Mean and standard error of a sample.
struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  const double m = s / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  const double var = ss / static_cast<double>(v.size() - 1);
  return {m, std::sqrt(var / static_cast<double>(v.size()))};
}

// Per-test scratch directory, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("odeflow_" + tag + "_" + std::to_string(rd()) + "_" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace ref
