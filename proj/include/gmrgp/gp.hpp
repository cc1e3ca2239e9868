#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "gmrgp/demonstrations.hpp"
#include "gmrgp/kernels.hpp"

namespace gmrgp {

using MeanFunction = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
/// Observation noise covariance (D x D) at an input.
using NoiseFunction = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

/// Noisy observations of a vector-valued process.
struct ObservationSet {
  Points inputs;
  Points outputs;
  std::vector<Eigen::MatrixXd> noise;  // one D x D covariance per observation

  static ObservationSet with_shared_noise(Points inputs, Points outputs, double sigma);

  std::size_t size() const { return inputs.size(); }
  bool empty() const { return inputs.empty(); }

  /// Throws DimensionMismatch / NonPositiveParam on inconsistent content.
  void validate(std::size_t input_dim, std::size_t output_dim) const;
};

/// Every `stride`-th observation (stride >= 1).
ObservationSet stride_subsample(const ObservationSet& data, std::size_t stride);
/// Smallest stride that keeps at most `max_points` observations.
std::size_t stride_for(std::size_t count, std::size_t max_points);

struct PosteriorPrediction {
  Eigen::VectorXd mean;
  /// Covariance of the latent process; symmetric, negative diagonal clipped to 0.
  Eigen::MatrixXd covariance;
  /// `covariance` plus the model's observation noise at the query input.
  Eigen::MatrixXd predictive_covariance;
};

/// Multi-output GP: prior mean function and matrix kernel, optionally
/// conditioned on an observation set. Conditioning returns a new model.
class GpModel {
 public:
  GpModel(MeanFunction mean, std::shared_ptr<const MatrixKernel> kernel, NoiseFunction noise = {});

  const MatrixKernel& kernel() const { return *kernel_; }
  const std::shared_ptr<const MatrixKernel>& kernel_ptr() const { return kernel_; }
  const MeanFunction& mean_function() const { return mean_; }
  std::size_t input_dim() const { return kernel_->input_dim(); }
  std::size_t output_dim() const { return kernel_->output_dim(); }

  Eigen::VectorXd prior_mean(const Eigen::VectorXd& x) const;
  /// Observation noise at x (zero when the model has no noise function).
  Eigen::MatrixXd noise_at(const Eigen::VectorXd& x) const;

  const ObservationSet& observations() const { return observations_; }
  bool conditioned() const { return !observations_.empty(); }

  /// Lower Cholesky factor L of K_obs + Sigma_eps (+ jitter).
  const Eigen::MatrixXd& cholesky_factor() const { return factor_; }
  /// (K_obs + Sigma_eps)^{-1} (y - mu).
  const Eigen::VectorXd& weights() const { return weights_; }
  /// Diagonal jitter added during factorization.
  double jitter() const { return jitter_; }

 private:
  friend GpModel condition(const GpModel& model, ObservationSet observations);

  MeanFunction mean_;
  std::shared_ptr<const MatrixKernel> kernel_;
  NoiseFunction noise_;
  ObservationSet observations_;
  Eigen::MatrixXd factor_;
  Eigen::VectorXd weights_;
  double jitter_ = 0.0;
};

/// Result of factorizing a symmetric positive-definite system in place.
struct SpdFactor {
  Eigen::MatrixXd lower;  // L with L L^T = A + jitter I
  double jitter = 0.0;
};

/// Cholesky factorization with bounded jitter escalation: plain first, then
/// jitter 1e-8, 1e-7, 1e-6 times trace/n. `build` produces a fresh copy of
/// the matrix for each attempt. Throws FactorizationFailure.
SpdFactor factorize_spd(const std::function<Eigen::MatrixXd()>& build);

/// Posterior model holding `observations` (replacing any previous ones) and
/// the factorization of K_obs + Sigma_eps. The input model is unchanged.
GpModel condition(const GpModel& model, ObservationSet observations);

PosteriorPrediction predict(const GpModel& model, const Eigen::VectorXd& x);
std::vector<PosteriorPrediction> predict(const GpModel& model, const Points& xs);

/// Stacked (M D) mean and joint covariance of the latent process at `xs`.
struct JointDistribution {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};
JointDistribution joint_distribution(const GpModel& model, const Points& xs);

/// Joint draws over all query inputs, via the symmetric square root of the
/// joint covariance (eigenvalues clipped at zero). Deterministic per seed.
std::vector<Points> sample(const GpModel& model, const Points& xs, std::size_t count, std::uint64_t seed);

/// log N(y - mu(x); 0, K + Sigma_eps) of the stacked observation residuals,
/// under the prior of `model`.
double log_marginal_likelihood(const GpModel& model, const ObservationSet& data);

struct ParameterBounds {
  double lower = 0.0;
  double upper = 0.0;
};

struct OptConfig {
  std::size_t starts = 8;
  std::size_t max_evaluations = 200;  // per start
  std::size_t max_points = 500;       // likelihood data is strided down to this
  std::size_t stride = 0;             // explicit stride; 0 derives it from max_points
  std::uint64_t seed = 0;
  double tolerance = 1e-4;            // simplex size in log-parameter space
  // Lengthscale bounds as multiples of the input range.
  double lengthscale_lower = 1e-2;
  double lengthscale_upper = 1e2;
  ParameterBounds noise_bounds{1e-8, 1.0};
};

/// A family of GP priors indexed by positive hyperparameters.
struct ModelTemplate {
  std::vector<ParameterBounds> bounds;
  std::function<GpModel(const Eigen::VectorXd& params)> make_prior;
  /// Observation noise for the likelihood data under `params`.
  std::function<std::vector<Eigen::MatrixXd>(const Eigen::VectorXd& params, const Points& inputs)> make_noise;
};

struct HyperparameterFit {
  Eigen::VectorXd parameters;
  double log_likelihood = 0.0;
  std::vector<Eigen::VectorXd> starts;
  std::vector<double> start_log_likelihoods;  // -inf where a start failed
  std::size_t best_start = 0;
  std::size_t evaluations = 0;
};

/// Stride applied to the likelihood data: `config.stride` when set, otherwise
/// the smallest stride keeping at most `config.max_points` observations.
std::size_t likelihood_stride(const OptConfig& config, std::size_t count);

/// Multi-start Nelder-Mead over log-parameters within bounds. Starts are drawn
/// log-uniformly; the best result wins, ties going to the lowest start index.
/// Throws AllStartsFailed when no parameter vector could be evaluated.
HyperparameterFit optimize_hyperparams(const ModelTemplate& model_template, const ObservationSet& data,
                                       const OptConfig& config);

}  // namespace gmrgp
