#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "gmrgp/demonstrations.hpp"
#include "gmrgp/gmr_gp.hpp"
#include "gmrgp/gp.hpp"

namespace gmrgp {

/// Hyperparameters of the stationary baseline: one lengthscale per LMC term
/// and a shared noise variance.
struct MogpParams {
  std::vector<double> lengthscales;
  double noise = 1e-4;
};

/// Q copies of (1/N sum_i y_i y_i^T) / Q, so the zero-mean prior variance
/// matches the second moment of the outputs.
std::vector<Eigen::MatrixXd> empirical_coregionalization(const Points& outputs, std::size_t num_terms);

/// Zero-mean LMC prior with Matern-5/2 terms (unit variance) and shared noise.
GpModel mogp_prior(const std::vector<Eigen::MatrixXd>& coregionalization, std::size_t input_dim,
                   const MogpParams& params);

/// Maximum-likelihood lengthscales and noise on the demonstrations.
MogpParams fit_mogp(const DemonstrationSet& demos, std::size_t num_terms, const OptConfig& config = {},
                    HyperparameterFit* fit = nullptr);

}  // namespace gmrgp
