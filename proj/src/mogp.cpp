#include "gmrgp/mogp.hpp"

#include <algorithm>
#include <memory>

#include "gmrgp/error.hpp"
#include "gmrgp/kernels.hpp"

namespace gmrgp {

std::vector<Eigen::MatrixXd> empirical_coregionalization(const Points& outputs, std::size_t num_terms) {
  if (outputs.empty()) throw Error(ErrorCode::EmptyData, "coregionalization needs outputs");
  if (num_terms == 0) throw Error(ErrorCode::InvalidArgument, "at least one LMC term is required");
  const auto d = outputs.front().size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (const auto& y : outputs) {
    if (y.size() != d) throw Error(ErrorCode::DimensionMismatch, "outputs differ in dimension");
    m.noalias() += y * y.transpose();
  }
  m /= static_cast<double>(outputs.size()) * static_cast<double>(num_terms);
  m = (0.5 * (m + m.transpose())).eval();
  return std::vector<Eigen::MatrixXd>(num_terms, m);
}

GpModel mogp_prior(const std::vector<Eigen::MatrixXd>& coregionalization, std::size_t input_dim,
                   const MogpParams& params) {
  if (params.lengthscales.size() != coregionalization.size()) {
    throw Error(ErrorCode::DimensionMismatch, "MOGP needs one lengthscale per coregionalization matrix");
  }
  if (!(params.noise >= 0.0)) throw Error(ErrorCode::NonPositiveParam, "noise must be >= 0");
  std::vector<Matern52Params> scalar;
  for (double l : params.lengthscales) scalar.push_back({1.0, l});
  auto kernel = std::make_shared<const LmcKernel>(coregionalization, std::move(scalar), input_dim);
  const auto d = static_cast<Eigen::Index>(kernel->output_dim());
  const double noise = params.noise;
  return GpModel({}, kernel, [d, noise](const Eigen::VectorXd&) {
    return Eigen::MatrixXd(noise * Eigen::MatrixXd::Identity(d, d));
  });
}

MogpParams fit_mogp(const DemonstrationSet& demos, std::size_t num_terms, const OptConfig& config,
                    HyperparameterFit* fit) {
  const auto coreg = empirical_coregionalization(demos.outputs(), num_terms);
  double range = 0.0;
  for (std::size_t k = 0; k < demos.input_dim(); ++k) {
    double lo = demos.inputs().front()[static_cast<Eigen::Index>(k)];
    double hi = lo;
    for (const auto& x : demos.inputs()) {
      lo = std::min(lo, x[static_cast<Eigen::Index>(k)]);
      hi = std::max(hi, x[static_cast<Eigen::Index>(k)]);
    }
    range = std::max(range, hi - lo);
  }
  if (range <= 0.0) range = 1.0;

  ModelTemplate tmpl;
  tmpl.bounds.assign(num_terms, {config.lengthscale_lower * range, config.lengthscale_upper * range});
  tmpl.bounds.push_back(config.noise_bounds);
  auto unpack = [num_terms](const Eigen::VectorXd& p) {
    MogpParams params;
    params.lengthscales.assign(p.data(), p.data() + num_terms);
    params.noise = p[static_cast<Eigen::Index>(num_terms)];
    return params;
  };
  const std::size_t din = demos.input_dim();
  tmpl.make_prior = [coreg, din, unpack](const Eigen::VectorXd& p) { return mogp_prior(coreg, din, unpack(p)); };
  const auto d = static_cast<Eigen::Index>(demos.output_dim());
  tmpl.make_noise = [d, num_terms](const Eigen::VectorXd& p, const Points& inputs) {
    return std::vector<Eigen::MatrixXd>(inputs.size(),
                                        p[static_cast<Eigen::Index>(num_terms)] * Eigen::MatrixXd::Identity(d, d));
  };

  const ObservationSet data = ObservationSet::with_shared_noise(demos.inputs(), demos.outputs(), 0.0);
  HyperparameterFit result = optimize_hyperparams(tmpl, data, config);
  MogpParams params = unpack(result.parameters);
  if (fit) *fit = std::move(result);
  return params;
}

}  // namespace gmrgp
