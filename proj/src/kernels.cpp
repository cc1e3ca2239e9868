#include "gmrgp/kernels.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "gmrgp/error.hpp"
#include "gmrgp/gmr.hpp"

namespace gmrgp {

namespace {

const double kSqrt5 = std::sqrt(5.0);

Eigen::Index to_index(std::size_t v) { return static_cast<Eigen::Index>(v); }

}  // namespace

void Matern52Params::validate() const {
  if (!(variance > 0.0) || !std::isfinite(variance) || !(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    throw Error(ErrorCode::NonPositiveParam, "Matern-5/2 variance and lengthscale must be positive and finite");
  }
}

double matern52_distance(const Matern52Params& params, double r) {
  const double s = kSqrt5 * r / params.lengthscale;
  return params.variance * (1.0 + s + s * s / 3.0) * std::exp(-s);
}

double matern52(const Matern52Params& params, const Eigen::VectorXd& x, const Eigen::VectorXd& x2) {
  if (x.size() != x2.size()) throw Error(ErrorCode::DimensionMismatch, "kernel inputs differ in dimension");
  return matern52_distance(params, (x - x2).norm());
}

// ---------------------------------------------------------------------------

void MatrixKernel::check_input(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != input_dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "kernel input has dimension " + std::to_string(x.size()) + ", expected " + std::to_string(input_dim()));
  }
}

Eigen::MatrixXd MatrixKernel::gram(const Points& xs, const Points& xs2) const {
  const auto d = to_index(output_dim());
  Eigen::MatrixXd out(to_index(xs.size()) * d, to_index(xs2.size()) * d);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < xs2.size(); ++j) {
      out.block(to_index(i) * d, to_index(j) * d, d, d) = evaluate(xs[i], xs2[j]);
    }
  }
  return out;
}

Eigen::MatrixXd MatrixKernel::gram(const Points& xs) const {
  const auto d = to_index(output_dim());
  const auto n = to_index(xs.size());
  Eigen::MatrixXd out(n * d, n * d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      const Eigen::MatrixXd block = evaluate(xs[static_cast<std::size_t>(i)], xs[static_cast<std::size_t>(j)]);
      out.block(i * d, j * d, d, d) = block;
      if (j != i) out.block(j * d, i * d, d, d) = block.transpose();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Matern52Kernel::Matern52Kernel(Matern52Params params, std::size_t input_dim) : params_(params), input_dim_(input_dim) {
  params_.validate();
  if (input_dim_ == 0) throw Error(ErrorCode::DimensionMismatch, "input dimension must be >= 1");
}

Eigen::MatrixXd Matern52Kernel::evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& x2) const {
  check_input(x);
  check_input(x2);
  return Eigen::MatrixXd::Constant(1, 1, matern52(params_, x, x2));
}

// ---------------------------------------------------------------------------

LmcKernel::LmcKernel(std::vector<Eigen::MatrixXd> coregionalization, std::vector<Matern52Params> scalar_kernels,
                     std::size_t input_dim)
    : coregionalization_(std::move(coregionalization)),
      scalar_kernels_(std::move(scalar_kernels)),
      input_dim_(input_dim),
      output_dim_(0) {
  if (coregionalization_.empty() || coregionalization_.size() != scalar_kernels_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "LMC kernel needs Q >= 1 coregionalization matrices and scalar kernels");
  }
  if (input_dim_ == 0) throw Error(ErrorCode::DimensionMismatch, "input dimension must be >= 1");
  output_dim_ = static_cast<std::size_t>(coregionalization_.front().rows());
  for (std::size_t q = 0; q < coregionalization_.size(); ++q) {
    auto& u = coregionalization_[q];
    if (static_cast<std::size_t>(u.rows()) != output_dim_ || u.cols() != u.rows()) {
      throw Error(ErrorCode::DimensionMismatch, "coregionalization matrices must be D x D");
    }
    const double scale = std::max(1.0, u.cwiseAbs().maxCoeff());
    if ((u - u.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw Error(ErrorCode::InvalidArgument, "coregionalization matrix " + std::to_string(q) + " is not symmetric");
    }
    u = (0.5 * (u + u.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(u, Eigen::EigenvaluesOnly);
    if (eig.eigenvalues().minCoeff() < -1e-10) {
      throw Error(ErrorCode::InvalidArgument, "coregionalization matrix " + std::to_string(q) + " is not PSD");
    }
    scalar_kernels_[q].validate();
  }
}

Eigen::MatrixXd LmcKernel::evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& x2) const {
  check_input(x);
  check_input(x2);
  const double r = (x - x2).norm();
  const auto d = to_index(output_dim_);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t q = 0; q < coregionalization_.size(); ++q) {
    out += matern52_distance(scalar_kernels_[q], r) * coregionalization_[q];
  }
  return out;
}

Eigen::MatrixXd LmcKernel::gram(const Points& xs, const Points& xs2) const {
  for (const auto& x : xs) check_input(x);
  for (const auto& x : xs2) check_input(x);
  const auto d = to_index(output_dim_);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(to_index(xs.size()) * d, to_index(xs2.size()) * d);
  for (std::size_t j = 0; j < xs2.size(); ++j) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = (xs[i] - xs2[j]).norm();
      auto block = out.block(to_index(i) * d, to_index(j) * d, d, d);
      for (std::size_t q = 0; q < coregionalization_.size(); ++q) {
        block += matern52_distance(scalar_kernels_[q], r) * coregionalization_[q];
      }
    }
  }
  return out;
}

Eigen::MatrixXd LmcKernel::gram(const Points& xs) const {
  for (const auto& x : xs) check_input(x);
  const auto d = to_index(output_dim_);
  const auto n = to_index(xs.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n * d, n * d);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double r = (xs[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(j)]).norm();
      auto block = out.block(i * d, j * d, d, d);
      for (std::size_t q = 0; q < coregionalization_.size(); ++q) {
        block += matern52_distance(scalar_kernels_[q], r) * coregionalization_[q];
      }
      if (i != j) out.block(j * d, i * d, d, d) = block.transpose();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

GmrKernel::GmrKernel(std::shared_ptr<const GmmModel> model, std::vector<double> lengthscales)
    : model_(std::move(model)), lengthscales_(std::move(lengthscales)) {
  if (!model_) throw Error(ErrorCode::InvalidArgument, "GMR kernel needs a model");
  if (lengthscales_.size() != model_->num_components()) {
    throw Error(ErrorCode::DimensionMismatch, "GMR kernel needs one lengthscale per component");
  }
  for (std::size_t l = 0; l < lengthscales_.size(); ++l) {
    component_kernel(l).validate();
    conditional_covs_.push_back(conditional_covariance(*model_, l));
  }
}

Eigen::MatrixXd GmrKernel::evaluate(const Eigen::VectorXd& x, const Eigen::VectorXd& x2) const {
  check_input(x);
  check_input(x2);
  const auto h = responsibilities(*model_, x).values;
  const auto h2 = responsibilities(*model_, x2).values;
  const double r = (x - x2).norm();
  const auto d = to_index(output_dim());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t l = 0; l < lengthscales_.size(); ++l) {
    const double hh = h[to_index(l)] * h2[to_index(l)];
    if (hh == 0.0) continue;
    out += (hh * matern52_distance(component_kernel(l), r)) * conditional_covs_[l];
  }
  return out;
}

Eigen::MatrixXd GmrKernel::responsibility_matrix(const Points& xs) const {
  Eigen::MatrixXd h(to_index(num_components()), to_index(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    check_input(xs[i]);
    h.col(to_index(i)) = responsibilities(*model_, xs[i]).values;
  }
  return h;
}

Eigen::MatrixXd GmrKernel::gram(const Points& xs, const Points& xs2) const {
  const Eigen::MatrixXd h = responsibility_matrix(xs);
  const Eigen::MatrixXd h2 = responsibility_matrix(xs2);
  const auto d = to_index(output_dim());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(to_index(xs.size()) * d, to_index(xs2.size()) * d);
  for (std::size_t j = 0; j < xs2.size(); ++j) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double r = (xs[i] - xs2[j]).norm();
      auto block = out.block(to_index(i) * d, to_index(j) * d, d, d);
      for (std::size_t l = 0; l < lengthscales_.size(); ++l) {
        const double hh = h(to_index(l), to_index(i)) * h2(to_index(l), to_index(j));
        if (hh == 0.0) continue;
        block += (hh * matern52_distance(component_kernel(l), r)) * conditional_covs_[l];
      }
    }
  }
  return out;
}

Eigen::MatrixXd GmrKernel::gram(const Points& xs) const {
  const Eigen::MatrixXd h = responsibility_matrix(xs);
  const auto d = to_index(output_dim());
  const auto n = to_index(xs.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n * d, n * d);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = j; i < n; ++i) {
      const double r = (xs[static_cast<std::size_t>(i)] - xs[static_cast<std::size_t>(j)]).norm();
      auto block = out.block(i * d, j * d, d, d);
      for (std::size_t l = 0; l < lengthscales_.size(); ++l) {
        const double hh = h(to_index(l), i) * h(to_index(l), j);
        if (hh == 0.0) continue;
        block += (hh * matern52_distance(component_kernel(l), r)) * conditional_covs_[l];
      }
      if (i != j) out.block(j * d, i * d, d, d) = block.transpose();
    }
  }
  return out;
}

}  // namespace gmrgp
