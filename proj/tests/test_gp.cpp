#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "gmrgp/gmr.hpp"
#include "gmrgp/gmr_gp.hpp"
#include "gmrgp/gp.hpp"
#include "gmrgp/kernels.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace gmrgp;

namespace {

GpModel gmr_prior(const std::shared_ptr<const GmmModel>& gmm, std::vector<double> ls, double noise) {
  return GmrGpModel::from_parameters(gmm, std::move(ls), NoiseSpec::shared(noise)).engine();
}

GpModel scalar_prior(double variance, double lengthscale, double noise, double mean = 0.0) {
  auto kernel = std::make_shared<const Matern52Kernel>(Matern52Params{variance, lengthscale}, 1);
  return GpModel([mean](const Eigen::VectorXd&) { return vec({mean}); }, kernel,
                 [noise](const Eigen::VectorXd&) { return Eigen::MatrixXd::Constant(1, 1, noise); });
}

ObservationSet random_observations(const GpModel& prior, std::size_t count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.5, 2.5);
  const auto din = static_cast<Eigen::Index>(prior.input_dim());
  const auto d = static_cast<Eigen::Index>(prior.output_dim());
  ObservationSet obs;
  for (std::size_t i = 0; i < count; ++i) {
    Eigen::VectorXd x(din);
    for (auto& v : x) v = u(rng);
    Eigen::VectorXd y = prior.prior_mean(x);
    for (Eigen::Index k = 0; k < d; ++k) y[k] += 0.2 * (u(rng) - 1.0);
    obs.inputs.push_back(x);
    obs.outputs.push_back(y);
    obs.noise.push_back(prior.noise_at(x));
  }
  return obs;
}

}  // namespace

TEST_CASE("ObservationSet validation") {
  ObservationSet obs = ObservationSet::with_shared_noise({vec({0.0})}, {vec({1.0, 2.0})}, 0.1);
  CHECK(obs.noise[0] == 0.1 * Eigen::Matrix2d::Identity());
  CHECK_NOTHROW(obs.validate(1, 2));
  CHECK_ERROR_CODE(obs.validate(2, 2), DimensionMismatch);
  CHECK_NOTHROW(ObservationSet::with_shared_noise({vec({0.0})}, {vec({1.0})}, 0.0).validate(1, 1));
  CHECK_ERROR_CODE(ObservationSet::with_shared_noise({vec({0.0})}, {vec({1.0})}, -1.0).validate(1, 1), NonPositiveParam);
  obs.noise[0](0, 1) = 0.05;
  CHECK_ERROR_CODE(obs.validate(1, 2), InvalidArgument);

  const GpModel prior = scalar_prior(1.0, 1.0, 0.1);
  CHECK_ERROR_CODE(condition(prior, ObservationSet::with_shared_noise({vec({0.0})}, {vec({1.0, 2.0})}, 0.1)),
                   DimensionMismatch);
}

TEST_CASE("conditioning on nothing keeps the prior") {
  std::mt19937_64 rng(1);
  auto gmm = std::make_shared<const GmmModel>(oracle::random_gmm(2, 1, 2, rng));
  const GpModel prior = gmr_prior(gmm, {0.5, 1.5}, 1e-3);
  const GpModel same = condition(prior, {});
  for (double x : {-1.0, 0.3, 2.0}) {
    const PosteriorPrediction p = predict(same, vec({x}));
    CHECK(p.mean == prior.prior_mean(vec({x})));
    CHECK((p.covariance - prior.kernel().evaluate(vec({x}), vec({x}))).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((p.predictive_covariance - p.covariance - prior.noise_at(vec({x}))).cwiseAbs().maxCoeff() <= 1e-15);
  }
}

TEST_CASE("observations on the prior mean leave the mean unchanged") {
  std::mt19937_64 rng(2);
  auto gmm = std::make_shared<const GmmModel>(oracle::random_gmm(3, 1, 2, rng));
  const GpModel prior = gmr_prior(gmm, {0.3, 0.6, 1.0}, 0.0);
  ObservationSet obs;
  for (double x : {0.1, 0.7, 1.9}) {
    obs.inputs.push_back(vec({x}));
    obs.outputs.push_back(prior.prior_mean(vec({x})));
    obs.noise.push_back(Eigen::Matrix2d::Zero());
  }
  const GpModel post = condition(prior, obs);
  for (double x = -0.5; x <= 2.5; x += 0.25) {
    CHECK((predict(post, vec({x})).mean - prior.prior_mean(vec({x}))).cwiseAbs().maxCoeff() <= 1e-8);
  }
}

TEST_CASE("near-interpolation and prior reversion") {
  const GpModel prior = scalar_prior(1.0, 0.5, 1e-8, 0.25);
  const ObservationSet obs = ObservationSet::with_shared_noise({vec({0.0}), vec({1.0})}, {vec({1.0}), vec({-1.0})}, 1e-8);
  const GpModel post = condition(prior, obs);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    const PosteriorPrediction p = predict(post, obs.inputs[i]);
    CHECK(std::abs(p.mean[0] - obs.outputs[i][0]) <= 1e-3);
    CHECK(p.covariance(0, 0) <= 2e-8);
  }
  const Eigen::VectorXd far = vec({40.0});
  REQUIRE(prior.kernel().gram({far}, obs.inputs).norm() < 1e-12);
  const PosteriorPrediction p = predict(post, far);
  CHECK(std::abs(p.mean[0] - 0.25) <= 1e-9);
  CHECK(std::abs(p.covariance(0, 0) - 1.0) <= 1e-9);
  // The input model is untouched.
  CHECK_FALSE(prior.conditioned());
  CHECK(post.observations().size() == 2);
}

TEST_CASE("posterior matches the dense oracle") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    auto gmm = std::make_shared<const GmmModel>(oracle::random_gmm(3, 1 + trial % 2, 1 + trial % 3, rng));
    const GpModel prior = gmr_prior(gmm, {0.2, 0.8, 2.0}, 1e-3);
    const ObservationSet obs = random_observations(prior, 3 + static_cast<std::size_t>(trial), rng);
    const GpModel post = condition(prior, obs);
    const oracle::DenseGp dense(prior, obs);
    for (int q = 0; q < 20; ++q) {
      const Eigen::VectorXd x = random_observations(prior, 1, rng).inputs[0];
      const PosteriorPrediction p = predict(post, x);
      CHECK((p.mean - dense.mean(x)).norm() <= 1e-8 * std::max(1.0, dense.mean(x).norm()));
      CHECK((p.covariance - dense.covariance(x)).norm() <= 1e-8 * std::max(1e-3, dense.covariance(x).norm()));
      // Conditioning never adds uncertainty.
      const Eigen::MatrixXd shrink = prior.kernel().evaluate(x, x) + 1e-8 * Eigen::MatrixXd::Identity(p.covariance.rows(), p.covariance.cols()) - p.covariance;
      CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(shrink).eigenvalues().minCoeff() >= 0.0);
    }
    const double lml = log_marginal_likelihood(prior, obs);
    CHECK(std::abs(lml - dense.log_marginal_likelihood()) <= 1e-8 * std::max(1.0, std::abs(lml)));

    // The cached factor reproduces the system matrix.
    const Eigen::MatrixXd& l = post.cholesky_factor();
    Eigen::MatrixXd k = prior.kernel().gram(obs.inputs);
    const auto d = static_cast<Eigen::Index>(prior.output_dim());
    for (std::size_t i = 0; i < obs.size(); ++i) k.block(static_cast<Eigen::Index>(i) * d, static_cast<Eigen::Index>(i) * d, d, d) += obs.noise[i];
    CHECK((l * l.transpose() - k).norm() <= 1e-8 * k.norm());

    const auto batch = predict(post, obs.inputs);
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const Eigen::VectorXd single = predict(post, obs.inputs[i]).mean;
      CHECK((batch[i].mean - single).norm() <= 1e-12 * std::max(1.0, single.norm()));
    }
  }
}

TEST_CASE("log marginal likelihood of a single observation") {
  const GpModel prior = scalar_prior(1.0, 1.0, 0.0);
  const double base = -0.5 * std::log(2.0 * std::numbers::pi);
  CHECK(std::abs(log_marginal_likelihood(prior, ObservationSet::with_shared_noise({vec({0.0})}, {vec({0.0})}, 0.0)) - base) <= 1e-14);
  CHECK(std::abs(base + 0.9189) < 1e-4);
  CHECK(std::abs(log_marginal_likelihood(prior, ObservationSet::with_shared_noise({vec({0.0})}, {vec({1.0})}, 0.0)) -
                 (base - 0.5)) <= 1e-14);
  CHECK_ERROR_CODE(log_marginal_likelihood(prior, {}), EmptyData);
}

TEST_CASE("factorize_spd escalates jitter and then fails") {
  const SpdFactor plain = factorize_spd([] { return Eigen::MatrixXd(Eigen::Matrix2d::Identity() * 2.0); });
  CHECK(plain.jitter == 0.0);
  const SpdFactor jittered = factorize_spd([] { return Eigen::MatrixXd(Eigen::MatrixXd::Ones(3, 3)); });
  CHECK(jittered.jitter > 0.0);
  CHECK(jittered.jitter <= 1e-6 * 3.0 / 3.0);
  Eigen::Matrix2d indefinite;
  indefinite << 1.0, 2.0, 2.0, 1.0;
  CHECK_ERROR_CODE(factorize_spd([&] { return Eigen::MatrixXd(indefinite); }), FactorizationFailure);
}

TEST_CASE("joint sampling") {
  std::mt19937_64 rng(4);
  auto gmm = std::make_shared<const GmmModel>(oracle::random_gmm(2, 1, 2, rng));
  const GpModel prior = gmr_prior(gmm, {0.5, 1.0}, 1e-4);
  const Points xs{vec({0.0}), vec({0.5}), vec({1.0}), vec({1.5}), vec({2.0})};
  const std::size_t n = 10000;
  const auto draws = sample(prior, xs, n, 7);
  REQUIRE(draws.size() == n);
  const JointDistribution joint = joint_distribution(prior, xs);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(joint.mean.size());
  for (const auto& draw : draws) {
    for (std::size_t i = 0; i < xs.size(); ++i) mean.segment(static_cast<Eigen::Index>(i) * 2, 2) += draw[i];
  }
  mean /= static_cast<double>(n);
  for (Eigen::Index i = 0; i < mean.size(); ++i) {
    CHECK(std::abs(mean[i] - joint.mean[i]) <= 4.0 * std::sqrt(joint.covariance(i, i) / static_cast<double>(n)));
  }
  const auto again = sample(prior, xs, 3, 7);
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t i = 0; i < xs.size(); ++i) CHECK(again[s][i] == draws[s][i]);
  }

  const Eigen::VectorXd target = prior.prior_mean(xs[2]) + vec({0.1, -0.1});
  const GpModel post = condition(prior, ObservationSet::with_shared_noise({xs[2]}, {target}, 1e-4));
  const auto post_draws = sample(post, {xs[2]}, 200, 9);
  Eigen::Vector2d sum = Eigen::Vector2d::Zero(), sq = Eigen::Vector2d::Zero();
  for (const auto& draw : post_draws) {
    sum += draw[0];
    sq += draw[0].cwiseProduct(draw[0]);
  }
  const Eigen::Vector2d m = sum / 200.0;
  const Eigen::Vector2d sd = (sq / 200.0 - m.cwiseProduct(m)).cwiseMax(0.0).cwiseSqrt();
  CHECK(sd.maxCoeff() <= 2e-2);
  CHECK_ERROR_CODE(sample(prior, xs, 0, 1), InvalidArgument);
}

TEST_CASE("stride helpers") {
  CHECK(stride_for(100, 500) == 1);
  CHECK(stride_for(1000, 500) == 2);
  CHECK(stride_for(1001, 500) == 3);
  OptConfig config;
  config.stride = 7;
  CHECK(likelihood_stride(config, 1000) == 7);
  const ObservationSet obs = ObservationSet::with_shared_noise({vec({0}), vec({1}), vec({2}), vec({3}), vec({4})},
                                                               {vec({0}), vec({1}), vec({2}), vec({3}), vec({4})}, 0.1);
  const ObservationSet sub = stride_subsample(obs, 2);
  REQUIRE(sub.size() == 3);
  CHECK(sub.inputs[2][0] == 4.0);
}

TEST_CASE("hyperparameter optimization recovers a known lengthscale") {
  // One component over [0, 10] with unit conditional variance.
  Eigen::Matrix2d cov;
  cov << 100.0 / 12.0, 0.0, 0.0, 1.0;
  auto gmm = std::make_shared<const GmmModel>(std::vector<GaussianComponent>{{1.0, Eigen::Vector2d(5.0, 0.0), cov}}, 1, 1);
  const GmrGpModel truth = GmrGpModel::from_parameters(gmm, {1.0}, NoiseSpec::shared(1e-4));
  Points xs;
  for (int i = 0; i < 200; ++i) xs.push_back(vec({10.0 * i / 199.0}));
  const Points ys = sample_trajectories(truth, xs, 1, 3).front();
  const DemonstrationSet demos(xs, ys);

  BuildReport report;
  BuildConfig config;
  config.optimizer.seed = 1;
  const GmrGpModel fitted = build(gmm, demos, config, &report);
  CHECK(fitted.lengthscales()[0] >= 0.5);
  CHECK(fitted.lengthscales()[0] <= 2.0);
  CHECK(fitted.via_points().empty());
  CHECK_FALSE(fitted.engine().conditioned());
  for (double start : report.fit.start_log_likelihoods) CHECK(report.fit.log_likelihood >= start);
  CHECK(report.fit.starts.size() == 8);
}

TEST_CASE("hyperparameter optimization reports total failure") {
  ModelTemplate broken;
  broken.bounds = {{0.1, 10.0}};
  broken.make_prior = [](const Eigen::VectorXd&) -> GpModel {
    throw Error(ErrorCode::FactorizationFailure, "always");
  };
  broken.make_noise = [](const Eigen::VectorXd&, const Points& inputs) {
    return std::vector<Eigen::MatrixXd>(inputs.size(), Eigen::MatrixXd::Identity(1, 1));
  };
  const ObservationSet obs = ObservationSet::with_shared_noise({vec({0.0})}, {vec({0.0})}, 0.1);
  OptConfig config;
  config.starts = 2;
  config.max_evaluations = 5;
  CHECK_ERROR_CODE(optimize_hyperparams(broken, obs, config), AllStartsFailed);
}

TEST_CASE("hyperparameter optimization is deterministic per seed") {
  std::mt19937_64 rng(5);
  auto gmm = std::make_shared<const GmmModel>(oracle::random_gmm(2, 1, 1, rng));
  const DemonstrationSet demos = [&] {
    Points xs, ys;
    const Eigen::MatrixXd z = sample_joint(*gmm, 120, 2);
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      xs.push_back(vec({z(i, 0)}));
      ys.push_back(vec({z(i, 1)}));
    }
    return DemonstrationSet(xs, ys);
  }();
  BuildConfig config;
  config.optimizer.starts = 3;
  config.optimizer.max_evaluations = 40;
  config.optimizer.seed = 4;
  const GmrGpModel a = build(gmm, demos, config);
  const GmrGpModel b = build(gmm, demos, config);
  CHECK(a.lengthscales() == b.lengthscales());
  CHECK(a.noise() == b.noise());
  for (double l : a.lengthscales()) CHECK(l > 0.0);
  CHECK(a.noise().values[0] > 0.0);
}
