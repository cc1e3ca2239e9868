#include "gmrgp/gmr.hpp"

#include <ostream>
#include <string>

#include <Eigen/Eigenvalues>

#include "gmrgp/error.hpp"
#include "gmrgp/format.hpp"

namespace gmrgp {

namespace {

void check_component(const GmmModel& model, std::size_t component) {
  if (component >= model.num_components()) {
    throw Error(ErrorCode::IndexOutOfRange, "component index " + std::to_string(component) + " out of range");
  }
}

void check_input(const GmmModel& model, const Eigen::VectorXd& x) {
  if (static_cast<std::size_t>(x.size()) != model.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "input has dimension " + std::to_string(x.size()) + ", expected " +
                                                  std::to_string(model.input_dim()));
  }
}

}  // namespace

Eigen::MatrixXd conditional_covariance(const GmmModel& model, std::size_t component) {
  check_component(model, component);
  const Eigen::MatrixXd cross = model.output_input_cov(component);  // S_yx
  const Eigen::MatrixXd gain_t = model.input_factor(component).solve(cross.transpose());  // S_x^{-1} S_xy
  Eigen::MatrixXd cov = model.output_cov(component) - cross * gain_t;
  return 0.5 * (cov + cov.transpose());
}

ConditionalMoments component_conditional(const GmmModel& model, std::size_t component, const Eigen::VectorXd& x) {
  check_component(model, component);
  check_input(model, x);
  const Eigen::MatrixXd cross = model.output_input_cov(component);
  const Eigen::VectorXd shift = model.input_factor(component).solve(x - model.input_mean(component));
  return {model.output_mean(component) + cross * shift, conditional_covariance(model, component)};
}

GmrPrediction gmr_predict(const GmmModel& model, const Eigen::VectorXd& x) {
  check_input(model, x);
  const auto h = responsibilities(model, x);
  const auto d = static_cast<Eigen::Index>(model.output_dim());
  const std::size_t count = model.num_components();

  std::vector<ConditionalMoments> parts;
  parts.reserve(count);
  GmrPrediction out;
  out.mean = Eigen::VectorXd::Zero(d);
  for (std::size_t l = 0; l < count; ++l) {
    parts.push_back(component_conditional(model, l, x));
    out.mean += h.values[static_cast<Eigen::Index>(l)] * parts.back().mean;
  }
  // sum_l h_l (S_l + y_l y_l^T) - y y^T, written as a sum of centered outer
  // products so the between-component spread is PSD term by term.
  out.covariance = Eigen::MatrixXd::Zero(d, d);
  for (std::size_t l = 0; l < count; ++l) {
    const double w = h.values[static_cast<Eigen::Index>(l)];
    if (w == 0.0) continue;
    const Eigen::VectorXd delta = parts[l].mean - out.mean;
    out.covariance += w * (parts[l].covariance + delta * delta.transpose());
  }
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(out.covariance);
  if (eig.eigenvalues().minCoeff() < 0.0) {
    out.covariance = eig.eigenvectors() * eig.eigenvalues().cwiseMax(0.0).asDiagonal() * eig.eigenvectors().transpose();
    out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  }
  out.covariance.diagonal().array() += 1e-10;
  out.responsibilities = h.values;
  out.far_field = h.far_field;
  return out;
}

std::vector<GmrPrediction> gmr_predict_batch(const GmmModel& model, const Points& xs) {
  std::vector<GmrPrediction> out;
  out.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    try {
      out.push_back(gmr_predict(model, xs[i]));
    } catch (const Error& e) {
      throw e.with_context("index", std::to_string(i));
    }
  }
  return out;
}

void write_gmr_csv(std::ostream& out, const Points& xs, const std::vector<GmrPrediction>& predictions) {
  if (xs.size() != predictions.size()) {
    throw Error(ErrorCode::DimensionMismatch, "query and prediction counts differ");
  }
  if (xs.empty()) return;
  const auto din = xs.front().size();
  const auto d = predictions.front().mean.size();
  std::vector<std::string> header;
  for (Eigen::Index i = 0; i < din; ++i) header.push_back("x" + std::to_string(i + 1));
  for (Eigen::Index i = 0; i < d; ++i) header.push_back("mean" + std::to_string(i + 1));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) header.push_back("cov" + std::to_string(i + 1) + std::to_string(j + 1));
  }
  write_csv_row(out, header);
  std::vector<double> row;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    row.clear();
    for (Eigen::Index i = 0; i < din; ++i) row.push_back(xs[k][i]);
    for (Eigen::Index i = 0; i < d; ++i) row.push_back(predictions[k].mean[i]);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) row.push_back(predictions[k].covariance(i, j));
    }
    write_csv_row(out, row);
  }
}

}  // namespace gmrgp
