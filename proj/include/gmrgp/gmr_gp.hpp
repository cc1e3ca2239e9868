#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "gmrgp/demonstrations.hpp"
#include "gmrgp/gmm.hpp"
#include "gmrgp/gp.hpp"
#include "gmrgp/kernels.hpp"

namespace gmrgp {

/// A start-, via- or end-point the adapted trajectory should pass through.
struct ViaPoint {
  Eigen::VectorXd input;
  Eigen::VectorXd output;
  /// D x D noise covariance replacing the model-level noise for this point.
  std::optional<Eigen::MatrixXd> noise_override;
};

/// Observation noise of the process: one shared variance, or one variance per
/// GMM component mixed as sum_l h_l(x)^2 sigma_l I.
struct NoiseSpec {
  bool per_component = false;
  std::vector<double> values;

  static NoiseSpec shared(double sigma) { return {false, {sigma}}; }
  static NoiseSpec per_component_values(std::vector<double> sigmas) { return {true, std::move(sigmas)}; }

  friend bool operator==(const NoiseSpec&, const NoiseSpec&) = default;
};

/// GP whose prior mean is the GMR mean and whose kernel is the GMR kernel.
/// Conditioned only on via-points; demonstrations never enter the posterior.
class GmrGpModel {
 public:
  /// Prior model with the given hyperparameters and no via-points.
  static GmrGpModel from_parameters(std::shared_ptr<const GmmModel> gmm, std::vector<double> lengthscales,
                                    NoiseSpec noise);

  const GmmModel& gmm() const { return kernel_->model(); }
  const std::shared_ptr<const GmmModel>& gmm_ptr() const { return kernel_->model_ptr(); }
  const GmrKernel& kernel() const { return *kernel_; }
  const std::vector<double>& lengthscales() const { return kernel_->lengthscales(); }
  const NoiseSpec& noise() const { return noise_; }
  const std::vector<ViaPoint>& via_points() const { return via_points_; }
  const GpModel& engine() const { return engine_; }

  Eigen::VectorXd prior_mean(const Eigen::VectorXd& x) const { return engine_.prior_mean(x); }
  Eigen::MatrixXd noise_at(const Eigen::VectorXd& x) const { return engine_.noise_at(x); }

 private:
  GmrGpModel(std::shared_ptr<const GmrKernel> kernel, NoiseSpec noise, std::vector<ViaPoint> via_points);

  friend GmrGpModel adapt(const GmrGpModel& model, std::vector<ViaPoint> via_points);

  std::shared_ptr<const GmrKernel> kernel_;
  NoiseSpec noise_;
  std::vector<ViaPoint> via_points_;
  GpModel engine_;
};

/// Via-points as observations of `prior`, using override noise where given and
/// the prior's noise function elsewhere.
ObservationSet via_observation_set(const GpModel& prior, const std::vector<ViaPoint>& via_points);

/// Observation noise of a GMR-GP at x under `noise`.
Eigen::MatrixXd gmr_gp_noise(const GmmModel& gmm, const NoiseSpec& noise, const Eigen::VectorXd& x);

/// Optional output of build().
struct BuildReport {
  HyperparameterFit fit;
  std::size_t stride = 1;
  std::size_t likelihood_points = 0;
};

struct BuildConfig {
  OptConfig optimizer;
  bool per_component_noise = false;
};

/// Fits the component lengthscales and noise by maximum likelihood on the
/// demonstrations (GMR mean subtracted), then discards the demonstrations.
GmrGpModel build(std::shared_ptr<const GmmModel> gmm, const DemonstrationSet& demos, const BuildConfig& config = {},
                 BuildReport* report = nullptr);

/// Conditions the prior on exactly `via_points` (replacing earlier ones).
/// Coincident inputs with consistent outputs are merged; conflicting outputs
/// at the same input with zero noise throw DuplicateViaInput.
GmrGpModel adapt(const GmrGpModel& model, std::vector<ViaPoint> via_points);

std::vector<PosteriorPrediction> predict_trajectory(const GmrGpModel& model, const Points& xs);

std::vector<Points> sample_trajectories(const GmrGpModel& model, const Points& xs, std::size_t count,
                                        std::uint64_t seed);

/// Re-parameterized copies, re-conditioned on the same via-points.
GmrGpModel set_component_lengthscale(const GmrGpModel& model, std::size_t component, double lengthscale);
GmrGpModel set_noise(const GmrGpModel& model, NoiseSpec noise);

}  // namespace gmrgp
