#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

#include "mppc/error.hpp"
#include "mppc/estimator.hpp"
#include "mppc/fitting.hpp"
#include "mppc/random.hpp"

using namespace mppc;

namespace {

Curve on_model(CurveModel model, const Eigen::VectorXd& params, const std::vector<double>& mus, double sigma) {
  Curve points;
  for (double mu : mus) points.push_back({mu, evaluate_model<double>(model, params, mu), sigma, false});
  return points;
}

Curve noisy(Curve points, std::uint64_t seed) {
  SplitMix64 rng(seed);
  std::normal_distribution<double> noise;
  for (auto& p : points) p.g += p.sigma * noise(rng);
  return points;
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(xs.size());
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

const std::vector<double> kGrid = {0.1, 0.2, 0.5, 1, 2, 5};

}  // namespace

TEST_CASE("model evaluation") {
  CHECK(evaluate_model<double>(CurveModel::hyperbola, vec({1, 0}), 0.37) == 1.0);
  CHECK(evaluate_model<double>(CurveModel::hyperbola, vec({0.977, 0.444}), 1.0) == doctest::Approx(1.421));
  CHECK(evaluate_model<double>(CurveModel::crosstalk_ref, vec({0.177}), 1.0) ==
        doctest::Approx(1.2781498113444532).epsilon(1e-14));
  for (double p : {0.0, 0.05, 0.177, 0.3, 0.49}) {
    for (double mu : {0.01, 0.1, 1.0, 7.5}) {
      const double a = evaluate_model<double>(CurveModel::crosstalk_ref, vec({p}), mu);
      CHECK(std::abs(a - predict_g2_crosstalk(1.0, mu, p)) <= 1e-12 * a);
    }
  }
  CHECK(parameter_count(CurveModel::hyperbola) == 2);
  CHECK(parameter_count(CurveModel::crosstalk_ref) == 1);
  CHECK(curve_model_from_string(to_string(CurveModel::crosstalk_ref)) == CurveModel::crosstalk_ref);
  CHECK_THROWS_AS(curve_model_from_string("parabola"), ConfigError);
}

TEST_CASE("analytic gradient matches finite differences") {
  for (auto [model, params] : {std::pair{CurveModel::hyperbola, vec({0.9, 0.3})},
                               std::pair{CurveModel::crosstalk_ref, vec({0.177})}}) {
    for (double mu : {0.05, 0.7, 3.0}) {
      const Eigen::RowVectorXd grad = model_gradient(model, params, mu);
      for (Eigen::Index j = 0; j < params.size(); ++j) {
        const double h = 1e-6;
        Eigen::VectorXd up = params;
        Eigen::VectorXd down = params;
        up(j) += h;
        down(j) -= h;
        const double fd = (evaluate_model<double>(model, up, mu) - evaluate_model<double>(model, down, mu)) / (2 * h);
        CHECK(grad(j) == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("noiseless recovery") {
  const auto points = on_model(CurveModel::hyperbola, vec({1.0, 0.2}), kGrid, 0.01);
  const auto fit = lm_fit(CurveModel::hyperbola, points);
  CHECK(fit.params(0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.params(1) == doctest::Approx(0.2).epsilon(1e-9));
  CHECK(fit.cod_r2 == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(fit.chi2 <= 1e-18);
  CHECK(fit.converged);

  // Far from the answer the damping has to do the work.
  const auto ct = on_model(CurveModel::crosstalk_ref, vec({0.177}), {0.05, 0.1, 0.2, 0.5, 1, 2}, 0.003);
  const auto from_far = lm_fit(CurveModel::crosstalk_ref, vec({0.45}), ct);
  CHECK(from_far.params(0) == doctest::Approx(0.177).epsilon(1e-9));
  CHECK(from_far.converged);
  CHECK(from_far.chi2 <= 1e-18);
}

TEST_CASE("covariance structure") {
  const auto points = noisy(on_model(CurveModel::hyperbola, vec({1.0, 0.4}), kGrid, 0.02), 3);
  const auto fit = lm_fit(CurveModel::hyperbola, points);
  CHECK((fit.covariance - fit.covariance.transpose()).norm() <= 1e-15 * fit.covariance.norm());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(fit.covariance);
  CHECK(eig.eigenvalues().minCoeff() >= 0.0);
  for (Eigen::Index i = 0; i < 2; ++i) CHECK(fit.std_errors(i) == doctest::Approx(std::sqrt(fit.covariance(i, i))));
  CHECK(fit.cod_r2 <= 1.0);

  // Unscaled covariance: for a model linear in its parameters it is (J^T W J)^-1.
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(2, 2);
  for (const auto& p : points) {
    Eigen::Vector2d row(1.0, 1.0 / p.mu);
    normal += row * row.transpose() / (p.sigma * p.sigma);
  }
  CHECK((fit.covariance - normal.inverse()).norm() <= 1e-9 * normal.inverse().norm());
}

TEST_CASE("weight scale and point order do not matter") {
  const auto points = noisy(on_model(CurveModel::hyperbola, vec({1.0, 0.4}), kGrid, 0.02), 9);
  const auto base = lm_fit(CurveModel::hyperbola, points);

  Curve scaled = points;
  for (auto& p : scaled) p.sigma *= 7.0;
  const auto s = lm_fit(CurveModel::hyperbola, scaled);
  CHECK((s.params - base.params).norm() <= 1e-9 * base.params.norm());
  CHECK((s.std_errors - 7.0 * base.std_errors).norm() <= 1e-9 * 7.0 * base.std_errors.norm());

  Curve shuffled = points;
  SplitMix64 rng(1);
  for (int rep = 0; rep < 5; ++rep) {
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto f = lm_fit(CurveModel::hyperbola, shuffled);
    CHECK((f.params - base.params).norm() <= 1e-12 * base.params.norm());
    CHECK(std::abs(f.chi2 - base.chi2) <= 1e-12 * std::max(1.0, base.chi2));
    CHECK(f.iterations == base.iterations);
  }
}

TEST_CASE("bad fit inputs") {
  const auto points = on_model(CurveModel::hyperbola, vec({1.0, 0.2}), {0.5, 1.0}, 0.01);
  CHECK_THROWS_AS(lm_fit(CurveModel::hyperbola, points), ConfigError);
  CHECK_THROWS_AS(lm_fit(CurveModel::hyperbola, Curve{}), ConfigError);

  auto bad_sigma = on_model(CurveModel::hyperbola, vec({1.0, 0.2}), kGrid, 0.01);
  bad_sigma[2].sigma = 0.0;
  CHECK_THROWS_AS(lm_fit(CurveModel::hyperbola, bad_sigma), ConfigError);
  auto bad_mu = on_model(CurveModel::hyperbola, vec({1.0, 0.2}), kGrid, 0.01);
  bad_mu[0].mu = -0.1;
  CHECK_THROWS_AS(lm_fit(CurveModel::hyperbola, bad_mu), ConfigError);

  // All points at one mu: A and B cannot be separated.
  const auto same_mu = on_model(CurveModel::hyperbola, vec({1.0, 0.2}), {0.5, 0.5, 0.5}, 0.01);
  CHECK_THROWS_AS(lm_fit(CurveModel::hyperbola, vec({1.0, 0.1}), same_mu), DegenerateFit);
}

TEST_CASE("coverage of the reported errors") {
  const std::vector<double> mus = {0.05, 0.1, 0.2, 0.3, 0.5, 0.75, 1.0, 1.5, 2.0, 3.0};
  const auto truth = vec({1.0, 0.4});
  int covered_a = 0;
  int covered_b = 0;
  const int reps = 500;
  for (int rep = 0; rep < reps; ++rep) {
    const auto fit = lm_fit(CurveModel::hyperbola, noisy(on_model(CurveModel::hyperbola, truth, mus, 0.02), 100 + rep));
    covered_a += std::abs(fit.params(0) - 1.0) <= 2 * fit.std_errors(0);
    covered_b += std::abs(fit.params(1) - 0.4) <= 2 * fit.std_errors(1);
  }
  CHECK(covered_a >= 0.9 * reps);
  CHECK(covered_b >= 0.9 * reps);
}

TEST_CASE("published curve shapes are recovered") {
  const std::vector<double> mus = {0.05, 0.08, 0.12, 0.2, 0.3, 0.45, 0.6, 0.8, 1.0};

  // Squeezed vacuum seen through HBT: A = 0.985 +- 0.05, B = 0.204 +- 0.002.
  const auto hbt = noisy(on_model(CurveModel::hyperbola, vec({0.985, 0.204}), mus, 0.01), 4);
  const auto f = lm_fit(CurveModel::hyperbola, hbt);
  CHECK(std::abs(f.params(0) - 0.985) < 0.05);
  CHECK(std::abs(f.params(1) - 0.204) < 3 * f.std_errors(1));
  CHECK(f.cod_r2 > 0.99);

  // Coherent reference: P = 0.177 +- 0.003.
  const auto ref = noisy(on_model(CurveModel::crosstalk_ref, vec({0.177}), mus, 0.01), 5);
  const auto c = lm_fit(CurveModel::crosstalk_ref, ref);
  CHECK(std::abs(c.params(0) - 0.177) < 0.003);
  CHECK(c.converged);
}
