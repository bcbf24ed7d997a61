#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

#include "fairbalance/error.hpp"

namespace fairbalance {

/// Newton: Hessian solve per step, for up to a few hundred features.
/// L-BFGS: ten curvature pairs, no Hessian.
enum class Solver { newton, lbfgs };

struct FitConfig {
  Solver solver = Solver::newton;
  double l2_strength = 1.0;
  int max_iterations = 1000;
  double gradient_tolerance = 1e-6;
  double threshold = 0.5;

  /// Throws ArgumentError when a field is out of range.
  void validate() const {
    if (!(l2_strength >= 0.0) || !std::isfinite(l2_strength)) throw ArgumentError("l2_strength must be >= 0");
    if (max_iterations < 1) throw ArgumentError("max_iterations must be >= 1");
    if (!(gradient_tolerance > 0.0)) throw ArgumentError("gradient_tolerance must be > 0");
    if (!(threshold > 0.0 && threshold < 1.0)) throw ArgumentError("threshold must lie in (0, 1)");
  }
};

template <typename Scalar>
struct LogisticModel {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector coefficients;
  Scalar intercept{0};

  [[nodiscard]] bool is_finite() const { return coefficients.allFinite() && std::isfinite(intercept); }
  friend bool operator==(const LogisticModel& a, const LogisticModel& b) {
    return a.intercept == b.intercept && a.coefficients.size() == b.coefficients.size() &&
           a.coefficients == b.coefficients;
  }
};

template <typename Scalar>
struct FitReport {
  LogisticModel<Scalar> model;
  int iterations = 0;
  bool converged = false;
  Scalar gradient_norm{0};  // max-norm at the returned point
  std::vector<Scalar> objective_trace;  // objective after each accepted step, starting at the initial point
};

namespace detail {

template <typename Scalar>
[[nodiscard]] inline Scalar softplus(Scalar z) noexcept {
  return z > Scalar(0) ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

template <typename Scalar>
[[nodiscard]] inline Scalar sigmoid(Scalar z) noexcept {
  if (z >= Scalar(0)) return Scalar(1) / (Scalar(1) + std::exp(-z));
  const Scalar e = std::exp(z);
  return e / (Scalar(1) + e);
}

template <typename Scalar, typename DY, typename DW>
[[nodiscard]] Scalar data_loss(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& z, const Eigen::MatrixBase<DY>& y,
                               const Eigen::MatrixBase<DW>& w) {
  Scalar total{0};
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    total += w(i) * (softplus(z(i)) - static_cast<Scalar>(y(i)) * z(i));
  }
  return total;
}

template <typename Scalar, typename DY, typename DW>
[[nodiscard]] Eigen::Matrix<Scalar, Eigen::Dynamic, 1> residual(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& z,
                                                              const Eigen::MatrixBase<DY>& y,
                                                              const Eigen::MatrixBase<DW>& w) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> r(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) r(i) = w(i) * (sigmoid(z(i)) - static_cast<Scalar>(y(i)));
  return r;
}

/// Hessian of the objective in (coefficients, intercept); lower triangle only.
template <typename DX, typename DW, typename Scalar>
[[nodiscard]] Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> hessian_lower(
    const Eigen::MatrixBase<DX>& x, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& z, const Eigen::MatrixBase<DW>& w,
    Scalar l2) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::Index d = x.cols();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> c(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const Scalar p = sigmoid(z(i));
    c(i) = w(i) * p * (Scalar(1) - p);
  }
  const Matrix scaled = c.cwiseSqrt().asDiagonal() * x;
  Matrix h = Matrix::Zero(d + 1, d + 1);
  h.topLeftCorner(d, d).template selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
  h.bottomLeftCorner(1, d) = c.transpose() * x;
  h(d, d) = c.sum();
  h.diagonal().head(d).array() += l2;
  return h;
}

template <typename DX, typename DY, typename DW>
void check_inputs(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y, const Eigen::MatrixBase<DW>& w) {
  if (x.rows() != y.size() || x.rows() != w.size()) throw ArgumentError("features, labels and weights differ in rows");
  if (x.rows() == 0) throw ArgumentError("cannot fit on zero rows");
  if (!x.allFinite()) throw ArgumentError("features contain non-finite values");
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!(w(i) > 0) || !std::isfinite(static_cast<double>(w(i)))) {
      throw ArgumentError("sample weights must be positive and finite");
    }
  }
  bool has_zero = false, has_one = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y(i) == 0) has_zero = true;
    else if (y(i) == 1) has_one = true;
    else throw ArgumentError("labels must be 0 or 1");
  }
  if (!(has_zero && has_one)) throw DegenerateFitError("training labels contain a single class");
}

}  // namespace detail

/// Weighted negative log-likelihood plus ridge penalty:
///
///   sum_i w_i [log(1 + exp(z_i)) - y_i z_i] + (l2 / 2) |beta|^2,   z = X beta + b
///
/// The intercept is not penalized.
template <typename DX, typename DY, typename DW, typename DB>
[[nodiscard]] typename DX::Scalar weighted_objective(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y,
                                                     const Eigen::MatrixBase<DW>& w,
                                                     const Eigen::MatrixBase<DB>& coefficients,
                                                     typename DX::Scalar intercept, double l2_strength) {
  using Scalar = typename DX::Scalar;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z = (x * coefficients).array() + intercept;
  return detail::data_loss(z, y, w) + Scalar(0.5 * l2_strength) * coefficients.squaredNorm();
}

/// Gradient of weighted_objective; the last entry is d/d(intercept).
template <typename DX, typename DY, typename DW, typename DB>
[[nodiscard]] Eigen::Matrix<typename DX::Scalar, Eigen::Dynamic, 1> weighted_gradient(
    const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y, const Eigen::MatrixBase<DW>& w,
    const Eigen::MatrixBase<DB>& coefficients, typename DX::Scalar intercept, double l2_strength) {
  using Scalar = typename DX::Scalar;
  const Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z = (x * coefficients).array() + intercept;
  const auto r = detail::residual(z, y, w);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> g(x.cols() + 1);
  g.head(x.cols()).noalias() = x.transpose() * r;
  g.head(x.cols()) += Scalar(l2_strength) * coefficients;
  g(x.cols()) = r.sum();
  return g;
}

/// Minimizes weighted_objective from zero with Armijo backtracking along a
/// Newton or L-BFGS direction (steepest descent whenever that direction is
/// not a descent direction). Stops when the gradient max-norm drops below the
/// tolerance, after max_iterations steps, or when no step decreases the
/// objective any more. Every accepted step decreases the objective, and the
/// run is a pure function of its inputs.
template <typename DX, typename DY, typename DW>
[[nodiscard]] FitReport<typename DX::Scalar> fit_report(const Eigen::MatrixBase<DX>& x,
                                                          const Eigen::MatrixBase<DY>& y,
                                                          const Eigen::MatrixBase<DW>& w, const FitConfig& config = {}) {
  using Scalar = typename DX::Scalar;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  config.validate();
  detail::check_inputs(x, y, w);

  constexpr std::size_t memory = 10;
  constexpr Scalar armijo = Scalar(1e-4);
  constexpr int max_backtracks = 60;

  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const Scalar l2 = Scalar(config.l2_strength);
  const bool newton = config.solver == Solver::newton;

  Vector theta = Vector::Zero(d + 1);  // coefficients then intercept
  Vector z = Vector::Zero(n);
  auto objective = [&](const Vector& zz, const Vector& th) {
    return detail::data_loss(zz, y, w) + Scalar(0.5) * l2 * th.head(d).squaredNorm();
  };
  auto gradient = [&](const Vector& zz, const Vector& th) {
    const Vector r = detail::residual(zz, y, w);
    Vector g(d + 1);
    g.head(d).noalias() = x.transpose() * r;
    g.head(d) += l2 * th.head(d);
    g(d) = r.sum();
    return g;
  };

  FitReport<Scalar> report;
  Scalar f = objective(z, theta);
  Vector g = gradient(z, theta);
  report.objective_trace.push_back(f);

  std::deque<Vector> s_hist, y_hist;
  std::deque<Scalar> rho_hist;
  std::vector<Scalar> alpha(memory);

  int iter = 0;
  for (; iter < config.max_iterations; ++iter) {
    if (g.template lpNorm<Eigen::Infinity>() < Scalar(config.gradient_tolerance)) {
      report.converged = true;
      break;
    }

    Vector dir = -g;
    if (newton) {
      const Eigen::LDLT<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> ldlt(detail::hessian_lower(x, z, w, l2));
      if (ldlt.info() == Eigen::Success) dir = -ldlt.solve(g);
      if (!dir.allFinite()) dir = -g;
    } else {
      // Two-loop recursion for -H g.
      for (std::size_t k = s_hist.size(); k-- > 0;) {
        alpha[k] = rho_hist[k] * s_hist[k].dot(dir);
        dir -= alpha[k] * y_hist[k];
      }
      if (!s_hist.empty()) dir *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      for (std::size_t k = 0; k < s_hist.size(); ++k) {
        const Scalar beta = rho_hist[k] * y_hist[k].dot(dir);
        dir += (alpha[k] - beta) * s_hist[k];
      }
    }
    Scalar slope = g.dot(dir);
    if (!(slope < Scalar(0))) {
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
      dir = -g;
      slope = -g.squaredNorm();
    }

    Scalar step = !newton && s_hist.empty() ? std::min(Scalar(1), Scalar(1) / g.norm()) : Scalar(1);
    Vector xdir = x * dir.head(d);
    xdir.array() += dir(d);

    bool accepted = false;
    Vector z_next, theta_next;
    Scalar f_next{0};
    for (int bt = 0; bt < max_backtracks; ++bt, step *= Scalar(0.5)) {
      z_next = z + step * xdir;
      theta_next = theta + step * dir;
      f_next = objective(z_next, theta_next);
      if (f_next <= f + armijo * step * slope && f_next < f) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // at the resolution limit of the objective

    Vector g_next = gradient(z_next, theta_next);
    Vector s = theta_next - theta;
    Vector yk = g_next - g;
    const Scalar sy = s.dot(yk);
    if (!newton && sy > std::numeric_limits<Scalar>::epsilon() * yk.squaredNorm()) {
      if (s_hist.size() == memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
      rho_hist.push_back(Scalar(1) / sy);
      s_hist.push_back(std::move(s));
      y_hist.push_back(std::move(yk));
    }
    theta = std::move(theta_next);
    z = std::move(z_next);
    g = std::move(g_next);
    f = f_next;
    report.objective_trace.push_back(f);
  }
  if (!report.converged && g.template lpNorm<Eigen::Infinity>() < Scalar(config.gradient_tolerance)) {
    report.converged = true;
  }

  report.iterations = iter;
  report.gradient_norm = g.template lpNorm<Eigen::Infinity>();
  report.model.coefficients = theta.head(d);
  report.model.intercept = theta(d);
  return report;
}

template <typename DX, typename DY, typename DW>
[[nodiscard]] LogisticModel<typename DX::Scalar> fit(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y,
                                                     const Eigen::MatrixBase<DW>& w, const FitConfig& config = {}) {
  return fit_report(x, y, w, config).model;
}

/// sigma(X beta + b) per row.
template <typename Scalar, typename DX>
[[nodiscard]] Eigen::Matrix<Scalar, Eigen::Dynamic, 1> predict_proba(const LogisticModel<Scalar>& model,
                                                                     const Eigen::MatrixBase<DX>& x) {
  if (x.cols() != model.coefficients.size()) throw ArgumentError("feature width does not match the model");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> z = x * model.coefficients;
  return z.unaryExpr([&](Scalar v) { return detail::sigmoid(v + model.intercept); });
}

/// 1 where the probability is at least `threshold`.
template <typename DP>
[[nodiscard]] Eigen::VectorXi threshold_labels(const Eigen::MatrixBase<DP>& probabilities, double threshold) {
  return (probabilities.array() >= static_cast<typename DP::Scalar>(threshold)).template cast<int>();
}

template <typename Scalar, typename DX>
[[nodiscard]] Eigen::VectorXi predict(const LogisticModel<Scalar>& model, const Eigen::MatrixBase<DX>& x,
                                      double threshold = 0.5) {
  return threshold_labels(predict_proba(model, x), threshold);
}

}  // namespace fairbalance
