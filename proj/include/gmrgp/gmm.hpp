#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "gmrgp/demonstrations.hpp"

namespace gmrgp {

/// One weighted Gaussian over the joint [input; output] space.
struct GaussianComponent {
  double weight = 1.0;
  Eigen::VectorXd mean;        // [mu_x; mu_y]
  Eigen::MatrixXd covariance;  // [[S_x, S_xy], [S_yx, S_y]]
};

/// Gaussian mixture over the joint input-output space with cached
/// factorizations. Immutable after construction, so all queries are safe to
/// call concurrently.
class GmmModel {
 public:
  /// Weights must sum to 1 within 1e-6 and are renormalized exactly.
  /// Throws SingularInputBlock or DegenerateComponent when a covariance (or its
  /// input block) is not positive definite.
  GmmModel(std::vector<GaussianComponent> components, std::size_t input_dim,
           std::size_t output_dim);

  std::size_t num_components() const { return components_.size(); }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }
  std::size_t joint_dim() const { return input_dim_ + output_dim_; }

  const std::vector<GaussianComponent>& components() const { return components_; }
  const GaussianComponent& component(std::size_t index) const;

  auto input_mean(std::size_t l) const { return components_[l].mean.head(input_dim_); }
  auto output_mean(std::size_t l) const { return components_[l].mean.tail(output_dim_); }
  auto input_cov(std::size_t l) const {
    return components_[l].covariance.topLeftCorner(input_dim_, input_dim_);
  }
  auto output_cov(std::size_t l) const {
    return components_[l].covariance.bottomRightCorner(output_dim_, output_dim_);
  }
  /// Sigma_yx block (output rows, input columns).
  auto output_input_cov(std::size_t l) const {
    return components_[l].covariance.bottomLeftCorner(output_dim_, input_dim_);
  }

  /// Cholesky factorization of the input block Sigma_x of component l.
  const Eigen::LLT<Eigen::MatrixXd>& input_factor(std::size_t l) const { return input_factor_[l]; }
  /// Cholesky factorization of the full joint covariance of component l.
  const Eigen::LLT<Eigen::MatrixXd>& joint_factor(std::size_t l) const { return joint_factor_[l]; }

  /// log N(x; mu_x, Sigma_x) for component l (no weight).
  double input_log_density(std::size_t l, const Eigen::VectorXd& x) const;
  /// Mahalanobis distance of x to the input marginal of component l,
  /// computed without overflow for very distant x.
  double input_mahalanobis(std::size_t l, const Eigen::VectorXd& x) const;
  /// log N(z; mu, Sigma) for component l (no weight).
  double joint_log_density(std::size_t l, const Eigen::VectorXd& z) const;

 private:
  std::vector<GaussianComponent> components_;
  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> input_factor_;
  std::vector<Eigen::LLT<Eigen::MatrixXd>> joint_factor_;
  std::vector<double> input_log_norm_;  // -0.5 (d log 2pi + log det)
  std::vector<double> joint_log_norm_;
};

enum class EmInit { Auto, TimeBins, KMeansPlusPlus };

struct EmConfig {
  double tolerance = 1e-6;          // relative log-likelihood change
  std::size_t max_iterations = 200;
  double regularization = 1e-6;     // jitter = regularization * trace(S) / dim
  std::uint64_t seed = 0;           // k-means++ seeding
  EmInit init = EmInit::Auto;
};

/// Per-iteration diagnostics of one EM run.
struct EmTrace {
  std::vector<double> log_likelihood;  // joint log-likelihood before each M-step and after the last
  std::size_t iterations = 0;          // completed M-steps
  bool converged = false;
};

/// Fits a C-component joint GMM by Expectation-Maximization.
///
/// Time-driven data is initialized from C equal-width input bins, anything else
/// from k-means++. Every M-step covariance gets a jitter of
/// `regularization * trace(S) / dim` on its diagonal.
GmmModel fit_gmm(const DemonstrationSet& data, std::size_t num_components,
                 const EmConfig& config = {}, EmTrace* trace = nullptr);

/// log p(z) of the mixture, via log-sum-exp over components.
double joint_log_pdf(const GmmModel& model, const Eigen::VectorXd& point);

/// Responsibilities h_l(x) of every component for an input x.
struct Responsibilities {
  Eigen::VectorXd values;
  /// Set when every marginal density underflowed even in log space; `values`
  /// is then the indicator of the component nearest by Mahalanobis distance.
  bool far_field = false;
};

Responsibilities responsibilities(const GmmModel& model, const Eigen::VectorXd& x);

/// i.i.d. joint samples, one per row. Deterministic for a fixed seed.
Eigen::MatrixXd sample_joint(const GmmModel& model, std::size_t count, std::uint64_t seed);

}  // namespace gmrgp
