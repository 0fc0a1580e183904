#pragma once

#include <Eigen/Core>
#include <span>
#include <string>
#include <vector>

#include "mppc/estimator.hpp"

namespace mppc {

enum class CurveModel {
  hyperbola,      // g = A + B / mu
  crosstalk_ref,  // first-order crosstalk law with g0 = 1, single parameter P
};

std::string to_string(CurveModel model);
CurveModel curve_model_from_string(const std::string& name);
Eigen::Index parameter_count(CurveModel model);

struct CurvePoint {
  double mu = 0.0;  // mean photocounts per pulse
  double g = 0.0;
  double sigma = 0.0;
  bool corrected = false;

  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

using Curve = std::vector<CurvePoint>;

struct FitResult {
  CurveModel model = CurveModel::hyperbola;
  Eigen::VectorXd params;
  Eigen::VectorXd std_errors;
  Eigen::MatrixXd covariance;
  double chi2 = 0.0;
  double cod_r2 = 0.0;
  int iterations = 0;
  bool converged = false;
};

template <typename Scalar>
Scalar evaluate_model(CurveModel model, const Eigen::Ref<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>>& params,
                      Scalar mu) {
  switch (model) {
    case CurveModel::hyperbola:
      return params(0) + params(1) / mu;
    case CurveModel::crosstalk_ref:
      return predict_g2_crosstalk(Scalar(1), mu, params(0));
  }
  return Scalar(0);
}

/// d f / d params at mu, one row.
Eigen::RowVectorXd model_gradient(CurveModel model, const Eigen::VectorXd& params, double mu);

/// Hyperbola: exact two-point solve through the smallest- and largest-mu
/// points. Crosstalk law: P = 0.1.
Eigen::VectorXd initial_guess(CurveModel model, std::span<const CurvePoint> points);

/// Weighted Levenberg-Marquardt minimizing sum ((g_i - f(mu_i)) / sigma_i)^2.
///
/// Marquardt damping (lambda * diag of the normal matrix), lambda starting at
/// 1e-3, x10 on a rejected step and /10 on an accepted one. Stops when an
/// accepted step lowers chi^2 by less than 1e-10 relative, when the step norm
/// drops below 1e-12, or after 200 iterations (converged = false). The
/// covariance is the inverse normal matrix at the optimum, unscaled, because
/// the sigmas are taken as absolute errors.
///
/// Throws DegenerateFit for a singular normal matrix and ConfigError for too
/// few points or non-positive sigma / mu.
FitResult lm_fit(CurveModel model, const Eigen::VectorXd& initial, std::span<const CurvePoint> points);

inline FitResult lm_fit(CurveModel model, std::span<const CurvePoint> points) {
  return lm_fit(model, initial_guess(model, points), points);
}

}  // namespace mppc
