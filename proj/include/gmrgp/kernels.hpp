#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "gmrgp/demonstrations.hpp"
#include "gmrgp/gmm.hpp"

namespace gmrgp {

struct Matern52Params {
  double variance = 1.0;
  double lengthscale = 1.0;

  /// Throws NonPositiveParam unless both values are finite and > 0.
  void validate() const;
};

/// sigma_f^2 (1 + sqrt5 r / l + 5 r^2 / (3 l^2)) exp(-sqrt5 r / l).
double matern52(const Matern52Params& params, const Eigen::VectorXd& x, const Eigen::VectorXd& x2);
/// Same kernel as a function of the distance r >= 0.
double matern52_distance(const Matern52Params& params, double r);

/// Matrix-valued covariance k(x, x') in R^{D x D}.
///
/// Gram matrices interleave outputs per input: row i*D + d holds output d of
/// input i.
class MatrixKernel {
 public:
  virtual ~MatrixKernel() = default;

  virtual std::size_t input_dim() const = 0;
  virtual std::size_t output_dim() const = 0;
  virtual Eigen::MatrixXd evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& x2) const = 0;

  /// (M D) x (M' D) block matrix of kernel values. The default evaluates block by block.
  virtual Eigen::MatrixXd gram(const Points& xs, const Points& xs2) const;
  /// Self-Gram matrix; exactly symmetric.
  virtual Eigen::MatrixXd gram(const Points& xs) const;

 protected:
  void check_input(const Eigen::VectorXd& x) const;
};

/// Scalar Matern-5/2 kernel seen as a 1x1 matrix kernel.
class Matern52Kernel final : public MatrixKernel {
 public:
  Matern52Kernel(Matern52Params params, std::size_t input_dim);

  const Matern52Params& params() const { return params_; }

  std::size_t input_dim() const override { return input_dim_; }
  std::size_t output_dim() const override { return 1; }
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& x2) const override;

 private:
  Matern52Params params_;
  std::size_t input_dim_;
};

/// Stationary sum of separable kernels  sum_q U_q k_q(x, x')  (linear model of
/// coregionalization) with Matern-5/2 scalar kernels.
class LmcKernel final : public MatrixKernel {
 public:
  /// Each U_q must be symmetric within 1e-12 with minimum eigenvalue >= -1e-10.
  LmcKernel(std::vector<Eigen::MatrixXd> coregionalization, std::vector<Matern52Params> scalar_kernels,
            std::size_t input_dim);

  const std::vector<Eigen::MatrixXd>& coregionalization() const { return coregionalization_; }
  const std::vector<Matern52Params>& scalar_kernels() const { return scalar_kernels_; }

  std::size_t input_dim() const override { return input_dim_; }
  std::size_t output_dim() const override { return output_dim_; }
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& x2) const override;
  Eigen::MatrixXd gram(const Points& xs, const Points& xs2) const override;
  Eigen::MatrixXd gram(const Points& xs) const override;

 private:
  std::vector<Eigen::MatrixXd> coregionalization_;
  std::vector<Matern52Params> scalar_kernels_;
  std::size_t input_dim_;
  std::size_t output_dim_;
};

/// Non-stationary kernel derived from a GMM:
///
///   k(x, x') = sum_l h_l(x) h_l(x') S_l k_l(x, x')
///
/// with h_l the GMR responsibilities, S_l the conditional output covariance of
/// component l and k_l a unit-variance Matern-5/2 kernel. Only the lengthscales
/// are free; the variance is pinned at 1.
class GmrKernel final : public MatrixKernel {
 public:
  GmrKernel(std::shared_ptr<const GmmModel> model, std::vector<double> lengthscales);

  const GmmModel& model() const { return *model_; }
  const std::shared_ptr<const GmmModel>& model_ptr() const { return model_; }
  const std::vector<double>& lengthscales() const { return lengthscales_; }
  const std::vector<Eigen::MatrixXd>& conditional_covs() const { return conditional_covs_; }
  std::size_t num_components() const { return lengthscales_.size(); }

  /// Component kernel parameters; variance is always 1.
  Matern52Params component_kernel(std::size_t l) const { return {1.0, lengthscales_.at(l)}; }

  std::size_t input_dim() const override { return model_->input_dim(); }
  std::size_t output_dim() const override { return model_->output_dim(); }
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& x2) const override;
  /// Responsibilities are computed once per input of each list.
  Eigen::MatrixXd gram(const Points& xs, const Points& xs2) const override;
  Eigen::MatrixXd gram(const Points& xs) const override;

 private:
  Eigen::MatrixXd responsibility_matrix(const Points& xs) const;  // C x M

  std::shared_ptr<const GmmModel> model_;
  std::vector<double> lengthscales_;
  std::vector<Eigen::MatrixXd> conditional_covs_;
};

}  // namespace gmrgp
