#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "gmrgp/gmr.hpp"
#include "gmrgp/scenario.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace gmrgp;

TEST_CASE("component_conditional") {
  Eigen::Matrix3d independent = Eigen::Matrix3d::Zero();
  independent(0, 0) = 0.5;
  independent.bottomRightCorner<2, 2>() << 0.3, 0.1, 0.1, 0.2;
  const GmmModel m({{1.0, Eigen::Vector3d(1.0, 2.0, 3.0), independent}}, 1, 2);
  for (double x : {-5.0, 1.0, 7.0}) {
    const ConditionalMoments c = component_conditional(m, 0, vec({x}));
    CHECK(c.mean == Eigen::Vector2d(2.0, 3.0));
    CHECK((c.covariance - independent.bottomRightCorner<2, 2>()).cwiseAbs().maxCoeff() == 0.0);
  }

  std::mt19937_64 rng(1);
  const GmmModel r = oracle::random_gmm(2, 1, 2, rng);
  for (std::size_t l = 0; l < 2; ++l) {
    const ConditionalMoments at_mean = component_conditional(r, l, r.input_mean(l));
    CHECK((at_mean.mean - r.output_mean(l)).cwiseAbs().maxCoeff() <= 1e-15);
    const Eigen::MatrixXd direct = r.output_cov(l) - r.output_input_cov(l) * r.input_cov(l).inverse() *
                                                         r.output_input_cov(l).transpose();
    CHECK((conditional_covariance(r, l) - direct).cwiseAbs().maxCoeff() <= 1e-14);
  }
  CHECK_ERROR_CODE(component_conditional(r, 2, vec({0.0})), IndexOutOfRange);
  CHECK_ERROR_CODE(component_conditional(r, 0, vec({0.0, 1.0})), DimensionMismatch);
}

TEST_CASE("component conditional matches banded Monte-Carlo moments") {
  std::mt19937_64 rng(21);
  const GmmModel m({{1.0, Eigen::Vector3d(0.0, 1.0, -1.0), oracle::random_spd(3, 0.2, rng)}}, 1, 2);
  const Eigen::MatrixXd joint = sample_joint(m, 1000000, 3);
  for (double x : {-0.3, 0.0, 0.4}) {
    const ConditionalMoments c = component_conditional(m, 0, vec({x}));
    const oracle::BandedMoments mc = oracle::banded_moments(joint, x, 0.01);
    for (Eigen::Index a = 0; a < 2; ++a) {
      CHECK(std::abs(c.mean[a] - mc.mean[a]) <= 3.0 * mc.mean_se[a]);
      for (Eigen::Index b = 0; b < 2; ++b) {
        CHECK(std::abs(c.covariance(a, b) - mc.covariance(a, b)) <= 3.0 * mc.covariance_se(a, b));
      }
    }
  }
}

TEST_CASE("gmr_predict") {
  std::mt19937_64 rng(2);
  const GmmModel single = oracle::random_gmm(1, 1, 2, rng);
  const GmrPrediction p = gmr_predict(single, vec({0.7}));
  const ConditionalMoments c = component_conditional(single, 0, vec({0.7}));
  CHECK((p.mean - c.mean).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((p.covariance - c.covariance).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(p.responsibilities.size() == 1);

  // Equal conditional means: no between-component spread.
  Eigen::Matrix2d c1, c2;
  c1 << 1.0, 0.0, 0.0, 0.3;
  c2 << 2.0, 0.0, 0.0, 0.7;
  const GmmModel flat({{0.4, Eigen::Vector2d(0.0, 1.0), c1}, {0.6, Eigen::Vector2d(1.0, 1.0), c2}}, 1, 1);
  const GmrPrediction q = gmr_predict(flat, vec({0.3}));
  const double expected = q.responsibilities[0] * 0.3 + q.responsibilities[1] * 0.7;
  CHECK(std::abs(q.mean[0] - 1.0) <= 1e-14);
  CHECK(std::abs(q.covariance(0, 0) - expected) <= 1e-9);
}

TEST_CASE("gmr_predict matches Monte-Carlo moments midway between two components") {
  // Wide, overlapping components so the band around the midpoint is well populated.
  Eigen::Matrix2d ca, cb;
  ca << 0.25, 0.1, 0.1, 0.2;
  cb << 0.25, -0.15, -0.15, 0.3;
  const GmmModel wide({{0.5, Eigen::Vector2d(0.0, 0.5), ca}, {0.5, Eigen::Vector2d(2.0, -0.5), cb}}, 1, 1);
  const Eigen::MatrixXd joint = sample_joint(wide, 1000000, 9);
  const GmrPrediction p = gmr_predict(wide, vec({1.0}));
  const oracle::BandedMoments mc = oracle::banded_moments(joint, 1.0, 0.02);
  REQUIRE(mc.count > 1000);
  CHECK(std::abs(p.mean[0] - mc.mean[0]) <= 3.0 * mc.mean_se[0]);
  CHECK(std::abs(p.covariance(0, 0) - mc.covariance(0, 0)) <= 3.0 * mc.covariance_se(0, 0));
}

TEST_CASE("gmr covariance properties") {
  std::mt19937_64 rng(4);
  const GmmModel m = oracle::random_gmm(4, 1, 3, rng, 2.0, 0.1);
  std::uniform_real_distribution<double> u(-0.5, 2.5);
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXd x = vec({u(rng)});
    const GmrPrediction p = gmr_predict(m, x);
    CHECK((p.covariance - p.covariance.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(std::abs(p.responsibilities.sum() - 1.0) <= 1e-12);
    Eigen::MatrixXd within = Eigen::MatrixXd::Zero(3, 3);
    for (std::size_t l = 0; l < 4; ++l) within += p.responsibilities[static_cast<Eigen::Index>(l)] * conditional_covariance(m, l);
    const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(p.covariance - within).eigenvalues();
    CHECK(eig.minCoeff() >= -1e-8);
  }
}

TEST_CASE("gmr_predict converges to the dominant component") {
  const auto fig = two_component_model();
  std::size_t checked = 0;
  for (double x = -3.0; x <= 5.0; x += 0.05) {
    const GmrPrediction p = gmr_predict(*fig, vec({x}));
    for (std::size_t l = 0; l < 2; ++l) {
      if (p.responsibilities[static_cast<Eigen::Index>(l)] <= 1.0 - 1e-9) continue;
      const ConditionalMoments c = component_conditional(*fig, l, vec({x}));
      CHECK((p.mean - c.mean).cwiseAbs().maxCoeff() <= 1e-6);
      CHECK((p.covariance - c.covariance).cwiseAbs().maxCoeff() <= 1e-6);
      ++checked;
    }
  }
  CHECK(checked > 10);
}

TEST_CASE("gmr mean is continuous for a time-driven model") {
  const auto fig = two_component_model();
  for (double x = -0.5; x <= 3.0; x += 0.1) {
    const double step = 1e-6;
    const double jump = std::abs(gmr_predict(*fig, vec({x + step})).mean[0] - gmr_predict(*fig, vec({x})).mean[0]);
    const double lipschitz =
        std::abs(gmr_predict(*fig, vec({x + 1e-3})).mean[0] - gmr_predict(*fig, vec({x - 1e-3})).mean[0]) / 2e-3;
    CHECK(jump <= 1e-3 * std::max(lipschitz, 1.0));
  }
}

TEST_CASE("gmr_predict_batch") {
  std::mt19937_64 rng(6);
  const GmmModel m = oracle::random_gmm(3, 2, 2, rng);
  CHECK(gmr_predict_batch(m, {}).empty());
  const Eigen::Vector2d x0(0.3, 0.4);
  const auto one = gmr_predict_batch(m, {x0});
  REQUIRE(one.size() == 1);
  CHECK(one[0].mean == gmr_predict(m, x0).mean);

  Points xs;
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int i = 0; i < 100; ++i) xs.push_back(Eigen::Vector2d(u(rng), u(rng)));
  const auto batch = gmr_predict_batch(m, xs);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const GmrPrediction single = gmr_predict(m, xs[i]);
    CHECK(batch[i].mean == single.mean);
    CHECK(batch[i].covariance == single.covariance);
  }

  xs[5] = vec({1.0});
  try {
    (void)gmr_predict_batch(m, xs);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
    CHECK(context_value(e, "index") == "5");
  }
}

TEST_CASE("write_gmr_csv") {
  const auto fig = two_component_model();
  const Points xs{vec({0.0}), vec({0.5})};
  std::ostringstream out;
  write_gmr_csv(out, xs, gmr_predict_batch(*fig, xs));
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "x1,mean1,cov11");
  std::getline(in, line);
  CHECK(line.rfind("0,", 0) == 0);
}
