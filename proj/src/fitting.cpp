#include "mppc/fitting.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <tuple>

#include "mppc/error.hpp"

namespace mppc {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kInitialDamping = 1e-3;
constexpr double kRelativeChi2Tolerance = 1e-10;
constexpr double kStepTolerance = 1e-12;

struct Linearization {
  Eigen::VectorXd residual;  // (g - f) / sigma
  Eigen::MatrixXd jacobian;  // (df/dparams) / sigma
};

Linearization linearize(CurveModel model, const Eigen::VectorXd& params, const std::vector<CurvePoint>& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Linearization lin{Eigen::VectorXd(n), Eigen::MatrixXd(n, params.size())};
  for (Eigen::Index i = 0; i < n; ++i) {
    const CurvePoint& pt = points[static_cast<std::size_t>(i)];
    lin.residual(i) = (pt.g - evaluate_model<double>(model, params, pt.mu)) / pt.sigma;
    lin.jacobian.row(i) = model_gradient(model, params, pt.mu) / pt.sigma;
  }
  return lin;
}

double chi_square(CurveModel model, const Eigen::VectorXd& params, const std::vector<CurvePoint>& points) {
  double chi2 = 0.0;
  for (const CurvePoint& pt : points) {
    const double r = (pt.g - evaluate_model<double>(model, params, pt.mu)) / pt.sigma;
    chi2 += r * r;
  }
  return chi2;
}

double weighted_total_sum_of_squares(const std::vector<CurvePoint>& points) {
  double sw = 0.0;
  double swg = 0.0;
  for (const CurvePoint& pt : points) {
    const double w = 1.0 / (pt.sigma * pt.sigma);
    sw += w;
    swg += w * pt.g;
  }
  const double mean = swg / sw;
  double ss = 0.0;
  for (const CurvePoint& pt : points) ss += (pt.g - mean) * (pt.g - mean) / (pt.sigma * pt.sigma);
  return ss;
}

}  // namespace

std::string to_string(CurveModel model) { return model == CurveModel::hyperbola ? "hyperbola" : "crosstalk_ref"; }

CurveModel curve_model_from_string(const std::string& name) {
  if (name == "hyperbola") return CurveModel::hyperbola;
  if (name == "crosstalk_ref") return CurveModel::crosstalk_ref;
  throw ConfigError("unknown curve model '" + name + "'");
}

Eigen::Index parameter_count(CurveModel model) { return model == CurveModel::hyperbola ? 2 : 1; }

Eigen::RowVectorXd model_gradient(CurveModel model, const Eigen::VectorXd& params, double mu) {
  switch (model) {
    case CurveModel::hyperbola: {
      Eigen::RowVectorXd grad(2);
      grad << 1.0, 1.0 / mu;
      return grad;
    }
    case CurveModel::crosstalk_ref: {
      const double p = params(0);
      const double q = 1.0 + p;
      Eigen::RowVectorXd grad(1);
      grad << -2.0 * p / (q * q * q) + 2.0 / (q * q * mu);
      return grad;
    }
  }
  return {};
}

Eigen::VectorXd initial_guess(CurveModel model, std::span<const CurvePoint> points) {
  if (model == CurveModel::crosstalk_ref) return Eigen::VectorXd::Constant(1, 0.1);
  if (points.size() < 2) throw ConfigError("hyperbola needs at least two points");
  const auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                            [](const CurvePoint& a, const CurvePoint& b) { return a.mu < b.mu; });
  Eigen::VectorXd guess(2);
  if (lo->mu == hi->mu) {
    guess << lo->g, 0.0;
    return guess;
  }
  const double b = (lo->g - hi->g) / (1.0 / lo->mu - 1.0 / hi->mu);
  guess << hi->g - b / hi->mu, b;
  return guess;
}

FitResult lm_fit(CurveModel model, const Eigen::VectorXd& initial, std::span<const CurvePoint> input) {
  const Eigen::Index p = parameter_count(model);
  if (initial.size() != p) throw ConfigError("initial parameter vector has the wrong size");
  if (static_cast<Eigen::Index>(input.size()) < p + 1) throw ConfigError("fit needs at least p + 1 points");
  for (const CurvePoint& pt : input) {
    if (!(pt.sigma > 0.0)) throw ConfigError("curve point sigma must be positive");
    if (!(pt.mu > 0.0)) throw ConfigError("curve point mu must be positive");
    if (!std::isfinite(pt.g)) throw ConfigError("curve point g must be finite");
  }

  // Canonical order: the result does not depend on the caller's point order.
  std::vector<CurvePoint> points(input.begin(), input.end());
  std::sort(points.begin(), points.end(), [](const CurvePoint& a, const CurvePoint& b) {
    return std::tie(a.mu, a.g, a.sigma) < std::tie(b.mu, b.g, b.sigma);
  });

  FitResult fit;
  fit.model = model;
  Eigen::VectorXd params = initial;
  Linearization lin = linearize(model, params, points);
  double chi2 = lin.residual.squaredNorm();
  double damping = kInitialDamping;

  int iteration = 0;
  bool converged = chi2 == 0.0;
  while (!converged && iteration < kMaxIterations) {
    ++iteration;
    const Eigen::MatrixXd normal = lin.jacobian.transpose() * lin.jacobian;
    const Eigen::VectorXd gradient = lin.jacobian.transpose() * lin.residual;
    Eigen::MatrixXd damped = normal;
    damped.diagonal() += damping * normal.diagonal();
    const Eigen::VectorXd step = damped.ldlt().solve(gradient);
    if (!step.allFinite()) throw DegenerateFit("normal matrix is singular");
    if (step.norm() < kStepTolerance) {
      converged = true;
      break;
    }

    const Eigen::VectorXd trial = params + step;
    const double trial_chi2 = chi_square(model, trial, points);
    if (std::isfinite(trial_chi2) && trial_chi2 < chi2) {
      const double relative = (chi2 - trial_chi2) / chi2;
      params = trial;
      chi2 = trial_chi2;
      lin = linearize(model, params, points);
      damping /= 10.0;
      if (relative < kRelativeChi2Tolerance || chi2 == 0.0) converged = true;
    } else {
      damping *= 10.0;
    }
  }

  const Eigen::MatrixXd normal = lin.jacobian.transpose() * lin.jacobian;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal);
  const double largest = eig.eigenvalues().maxCoeff();
  if (!(largest > 0.0) || eig.eigenvalues().minCoeff() <= largest * 1e-14) {
    throw DegenerateFit("normal matrix is singular at the optimum");
  }

  fit.params = params;
  fit.covariance = normal.ldlt().solve(Eigen::MatrixXd::Identity(p, p));
  fit.covariance = 0.5 * (fit.covariance + fit.covariance.transpose()).eval();
  fit.std_errors = fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.chi2 = chi2;
  const double total = weighted_total_sum_of_squares(points);
  fit.cod_r2 = total > 0.0 ? 1.0 - chi2 / total : (chi2 == 0.0 ? 1.0 : 0.0);
  fit.iterations = iteration;
  fit.converged = converged;
  return fit;
}

}  // namespace mppc
