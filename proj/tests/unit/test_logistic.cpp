#include <doctest.h>

#include <boost/random/bernoulli_distribution.hpp>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>
#include <cmath>
#include <limits>

#include "fairbalance/error.hpp"
#include "fairbalance/logistic.hpp"

using namespace fairbalance;
using Eigen::Index;

namespace {

struct Problem {
  Eigen::MatrixXd x;
  Eigen::VectorXi y;
  Eigen::VectorXd w;
};

Problem random_problem(boost::random::mt19937_64& rng, Index n, Index d) {
  boost::random::normal_distribution<double> normal;
  boost::random::uniform_real_distribution<double> weight(0.2, 3.0);
  boost::random::bernoulli_distribution<> coin;
  Problem p{Eigen::MatrixXd(n, d), Eigen::VectorXi(n), Eigen::VectorXd(n)};
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) p.x(i, j) = normal(rng);
    p.y[i] = coin(rng);
    p.w[i] = weight(rng);
  }
  p.y[0] = 0;
  p.y[1] = 1;
  return p;
}

double objective(const Problem& p, const Eigen::VectorXd& beta, double l2) {
  const Index d = p.x.cols();
  return weighted_objective(p.x, p.y, p.w, beta.head(d), beta[d], l2);
}

// Central differences of the objective, intercept last.
Eigen::VectorXd numeric_gradient(const Problem& p, const Eigen::VectorXd& beta, double l2) {
  const double h = 1e-5;
  Eigen::VectorXd g(beta.size());
  for (Index j = 0; j < beta.size(); ++j) {
    Eigen::VectorXd up = beta, down = beta;
    up[j] += h;
    down[j] -= h;
    g[j] = (objective(p, up, l2) - objective(p, down, l2)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("separable 1-D data") {
  Eigen::MatrixXd x(4, 1);
  x << -2, -1, 1, 2;
  Eigen::VectorXi y(4);
  y << 0, 0, 1, 1;
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(4);
  const auto model = fit(x, y, w);
  CHECK(model.coefficients[0] > 0);
  CHECK(predict(model, x) == y);
}

TEST_CASE("analytic gradient matches central differences") {
  boost::random::mt19937_64 rng(5);
  boost::random::normal_distribution<double> normal;
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_problem(rng, 20, 5);
    Eigen::VectorXd beta(6);
    for (Index j = 0; j < 6; ++j) beta[j] = normal(rng);
    const double l2 = trial % 3 == 0 ? 0.0 : 1.0;
    const Eigen::VectorXd analytic = weighted_gradient(p.x, p.y, p.w, beta.head(5), beta[5], l2);
    const Eigen::VectorXd numeric = numeric_gradient(p, beta, l2);
    const double rel = (analytic - numeric).norm() / std::max(1e-12, numeric.norm());
    CHECK(rel < 1e-4);
  }
}

TEST_CASE("fit converges to a stationary point") {
  boost::random::mt19937_64 rng(9);
  const auto p = random_problem(rng, 300, 4);
  FitConfig config;
  SUBCASE("newton") {}
  SUBCASE("lbfgs") { config.solver = Solver::lbfgs; }
  const auto report = fit_report(p.x, p.y, p.w, config);
  CHECK(report.converged);
  CHECK(weighted_gradient(p.x, p.y, p.w, report.model.coefficients, report.model.intercept, 1.0).cwiseAbs().maxCoeff() < 1e-5);
  for (std::size_t i = 1; i < report.objective_trace.size(); ++i) {
    CHECK(report.objective_trace[i] <= report.objective_trace[i - 1] + 1e-12);
  }
}

TEST_CASE("Newton and L-BFGS reach the same minimizer") {
  boost::random::mt19937_64 rng(23);
  const auto p = random_problem(rng, 500, 6);
  FitConfig lbfgs;
  lbfgs.solver = Solver::lbfgs;
  const auto a = fit_report(p.x, p.y, p.w);
  const auto b = fit_report(p.x, p.y, p.w, lbfgs);
  CHECK(a.converged);
  CHECK(b.converged);
  CHECK(a.iterations < b.iterations);
  CHECK((a.model.coefficients - b.model.coefficients).cwiseAbs().maxCoeff() < 1e-5);
  CHECK(a.objective_trace.back() == doctest::Approx(b.objective_trace.back()).epsilon(1e-10));
}

TEST_CASE("fit is deterministic and float works too") {
  boost::random::mt19937_64 rng(13);
  const auto p = random_problem(rng, 100, 3);
  CHECK(fit(p.x, p.y, p.w) == fit(p.x, p.y, p.w));
  FitConfig lbfgs;
  lbfgs.solver = Solver::lbfgs;
  CHECK(fit(p.x, p.y, p.w, lbfgs) == fit(p.x, p.y, p.w, lbfgs));

  const Eigen::MatrixXf xf = p.x.cast<float>();
  const Eigen::VectorXf wf = p.w.cast<float>();
  FitConfig loose;
  loose.gradient_tolerance = 1e-3;
  const auto mf = fit(xf, p.y, wf, loose);
  const auto md = fit(p.x, p.y, p.w);
  CHECK((mf.coefficients.cast<double>() - md.coefficients).cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("rescaled weights give the same model") {
  boost::random::mt19937_64 rng(17);
  const auto p = random_problem(rng, 80, 3);
  const Eigen::VectorXd a = p.w / p.w.mean();
  const Eigen::VectorXd scaled = 7.5 * p.w;
  const Eigen::VectorXd b = scaled / scaled.mean();
  const auto ma = fit(p.x, p.y, a);
  const auto mb = fit(p.x, p.y, b);
  CHECK((ma.coefficients - mb.coefficients).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(ma.intercept == doctest::Approx(mb.intercept).epsilon(1e-9));
}

TEST_CASE("predictions") {
  LogisticModel<double> zero{Eigen::VectorXd::Zero(2), 0.0};
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 2);
  CHECK(predict_proba(zero, x).isConstant(0.5));

  Eigen::VectorXd probs(3);
  probs << 0.4, 0.5, 0.6;
  Eigen::VectorXi expected(3);
  expected << 0, 1, 1;
  CHECK(threshold_labels(probs, 0.5) == expected);
  CHECK(threshold_labels(probs, 0.0).isConstant(1));
  CHECK(threshold_labels(probs, std::nextafter(1.0, 0.0)).isConstant(0));

  const auto p = predict_proba(LogisticModel<double>{Eigen::VectorXd::Constant(2, 50.0), 0.0}, x);
  CHECK(((p.array() > 0.0) && (p.array() <= 1.0)).all());
}

TEST_CASE("invalid inputs") {
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  Eigen::VectorXi y(3);
  y << 1, 1, 1;
  const Eigen::VectorXd w = Eigen::VectorXd::Ones(3);
  CHECK_THROWS_AS((void)fit(x, y, w), DegenerateFitError);

  y << 0, 1, 1;
  Eigen::MatrixXd bad = x;
  bad(1, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS((void)fit(bad, y, w), ArgumentError);
  CHECK_THROWS_AS((void)fit(x, y, Eigen::VectorXd::Ones(2)), ArgumentError);
  CHECK_THROWS_AS((void)fit(x, y, Eigen::VectorXd::Zero(3)), ArgumentError);

  FitConfig config;
  config.threshold = 1.0;
  CHECK_THROWS_AS(config.validate(), ArgumentError);
}
