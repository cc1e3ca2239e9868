#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <Eigen/Core>

#include "gmrgp/gmm.hpp"

namespace gmrgp {

/// Conditional moments of one component's output given an input.
struct ConditionalMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Output distribution moments of the mixture at one input.
struct GmrPrediction {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd responsibilities;
  bool far_field = false;
};

/// y_l(x) = mu_y + S_yx S_x^{-1} (x - mu_x),  S_l = S_y - S_yx S_x^{-1} S_xy.
/// The covariance does not depend on x.
ConditionalMoments component_conditional(const GmmModel& model, std::size_t component,
                                         const Eigen::VectorXd& x);

/// Conditional output covariance of component l (input independent).
Eigen::MatrixXd conditional_covariance(const GmmModel& model, std::size_t component);

/// Mixture conditional mean and covariance by the laws of total expectation and
/// covariance. The covariance is symmetrized, negative eigenvalues are clipped
/// to zero and 1e-10 is added to the diagonal.
GmrPrediction gmr_predict(const GmmModel& model, const Eigen::VectorXd& x);

/// Elementwise gmr_predict; errors are rethrown with an "index" context entry.
std::vector<GmrPrediction> gmr_predict_batch(const GmmModel& model, const Points& xs);

/// One row per query: x..., mean..., row-major covariance entries.
void write_gmr_csv(std::ostream& out, const Points& xs, const std::vector<GmrPrediction>& predictions);

}  // namespace gmrgp
