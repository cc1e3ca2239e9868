#include "gmrgp/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include "gmrgp/error.hpp"

namespace gmrgp {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index to_index(std::size_t v) { return static_cast<Index>(v); }

// Stacked residuals y_i - mu(x_i), interleaved per observation.
VectorXd residuals(const GpModel& model, const ObservationSet& data) {
  const auto d = to_index(model.output_dim());
  VectorXd r(to_index(data.size()) * d);
  for (std::size_t i = 0; i < data.size(); ++i) {
    r.segment(to_index(i) * d, d) = data.outputs[i] - model.prior_mean(data.inputs[i]);
  }
  return r;
}

MatrixXd noisy_gram(const MatrixKernel& kernel, const ObservationSet& data) {
  MatrixXd k = kernel.gram(data.inputs);
  const auto d = to_index(kernel.output_dim());
  for (std::size_t i = 0; i < data.size(); ++i) {
    k.block(to_index(i) * d, to_index(i) * d, d, d) += data.noise[i];
  }
  return k;
}

void tidy_covariance(MatrixXd& cov) {
  cov = (0.5 * (cov + cov.transpose())).eval();
  for (Index i = 0; i < cov.rows(); ++i) cov(i, i) = std::max(cov(i, i), 0.0);
}

}  // namespace

// ---------------------------------------------------------------------------

ObservationSet ObservationSet::with_shared_noise(Points inputs, Points outputs, double sigma) {
  ObservationSet set;
  const Index d = outputs.empty() ? 0 : outputs.front().size();
  set.noise.assign(outputs.size(), sigma * MatrixXd::Identity(d, d));
  set.inputs = std::move(inputs);
  set.outputs = std::move(outputs);
  return set;
}

void ObservationSet::validate(std::size_t input_dim, std::size_t output_dim) const {
  if (inputs.size() != outputs.size() || inputs.size() != noise.size()) {
    throw Error(ErrorCode::DimensionMismatch, "observation inputs, outputs and noise differ in count");
  }
  const auto din = to_index(input_dim);
  const auto d = to_index(output_dim);
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const Error::Context ctx{{"index", std::to_string(i)}};
    if (inputs[i].size() != din || outputs[i].size() != d || noise[i].rows() != d || noise[i].cols() != d) {
      throw Error(ErrorCode::DimensionMismatch, "observation dimensions do not match the model", ctx);
    }
    if (!inputs[i].allFinite() || !outputs[i].allFinite() || !noise[i].allFinite()) {
      throw Error(ErrorCode::NonFiniteInput, "observation contains a non-finite value", ctx);
    }
    const double scale = std::max(1.0, noise[i].cwiseAbs().maxCoeff());
    if ((noise[i] - noise[i].transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw Error(ErrorCode::InvalidArgument, "observation noise is not symmetric", ctx);
    }
    if (d > 0) {
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(noise[i], Eigen::EigenvaluesOnly);
      if (eig.eigenvalues().minCoeff() < -1e-12 * scale) {
        throw Error(ErrorCode::NonPositiveParam, "observation noise is not positive semi-definite", ctx);
      }
    }
  }
}

ObservationSet stride_subsample(const ObservationSet& data, std::size_t stride) {
  if (stride == 0) throw Error(ErrorCode::InvalidArgument, "stride must be >= 1");
  ObservationSet out;
  for (std::size_t i = 0; i < data.size(); i += stride) {
    out.inputs.push_back(data.inputs[i]);
    out.outputs.push_back(data.outputs[i]);
    out.noise.push_back(data.noise[i]);
  }
  return out;
}

std::size_t stride_for(std::size_t count, std::size_t max_points) {
  if (max_points == 0 || count <= max_points) return 1;
  return (count + max_points - 1) / max_points;
}

// ---------------------------------------------------------------------------

GpModel::GpModel(MeanFunction mean, std::shared_ptr<const MatrixKernel> kernel, NoiseFunction noise)
    : mean_(std::move(mean)), kernel_(std::move(kernel)), noise_(std::move(noise)) {
  if (!kernel_) throw Error(ErrorCode::InvalidArgument, "GP model needs a kernel");
  if (!mean_) {
    const auto d = to_index(kernel_->output_dim());
    mean_ = [d](const VectorXd&) { return VectorXd::Zero(d).eval(); };
  }
}

VectorXd GpModel::prior_mean(const VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "query input has the wrong dimension");
  }
  VectorXd m = mean_(x);
  if (static_cast<std::size_t>(m.size()) != output_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "mean function returned the wrong dimension");
  }
  return m;
}

MatrixXd GpModel::noise_at(const VectorXd& x) const {
  const auto d = to_index(output_dim());
  if (!noise_) return MatrixXd::Zero(d, d);
  MatrixXd n = noise_(x);
  if (n.rows() != d || n.cols() != d) throw Error(ErrorCode::DimensionMismatch, "noise function returned the wrong shape");
  return n;
}

// ---------------------------------------------------------------------------

SpdFactor factorize_spd(const std::function<MatrixXd()>& build) {
  static constexpr double kJitterScales[] = {0.0, 1e-8, 1e-7, 1e-6};
  double mean_diag = 0.0;
  for (std::size_t attempt = 0; attempt < std::size(kJitterScales); ++attempt) {
    MatrixXd a = build();
    if (a.rows() != a.cols()) throw Error(ErrorCode::DimensionMismatch, "matrix to factorize is not square");
    if (a.size() == 0) return {std::move(a), 0.0};
    if (!a.allFinite()) throw Error(ErrorCode::FactorizationFailure, "matrix to factorize has non-finite entries");
    if (attempt == 0) mean_diag = a.trace() / static_cast<double>(a.rows());
    const double jitter = kJitterScales[attempt] * std::abs(mean_diag);
    if (attempt > 0 && jitter == 0.0) break;
    a.diagonal().array() += jitter;
    Eigen::LLT<Eigen::Ref<MatrixXd>> llt(a);  // factorizes in place
    if (llt.info() == Eigen::Success) {
      a.triangularView<Eigen::StrictlyUpper>().setZero();
      return {std::move(a), jitter};
    }
  }
  throw Error(ErrorCode::FactorizationFailure, "matrix is not positive definite even with jitter 1e-6 * trace / n");
}

GpModel condition(const GpModel& model, ObservationSet observations) {
  observations.validate(model.input_dim(), model.output_dim());
  GpModel out = model;
  out.observations_ = std::move(observations);
  out.factor_.resize(0, 0);
  out.weights_.resize(0);
  out.jitter_ = 0.0;
  if (out.observations_.empty()) return out;

  const auto& obs = out.observations_;
  SpdFactor factor = factorize_spd([&] { return noisy_gram(model.kernel(), obs); });
  VectorXd w = residuals(model, obs);
  factor.lower.triangularView<Eigen::Lower>().solveInPlace(w);
  factor.lower.triangularView<Eigen::Lower>().transpose().solveInPlace(w);
  out.factor_ = std::move(factor.lower);
  out.jitter_ = factor.jitter;
  out.weights_ = std::move(w);
  return out;
}

PosteriorPrediction predict(const GpModel& model, const VectorXd& x) {
  PosteriorPrediction p;
  p.mean = model.prior_mean(x);
  p.covariance = model.kernel().evaluate(x, x);
  if (model.conditioned()) {
    const MatrixXd cross = model.kernel().gram(Points{x}, model.observations().inputs);  // D x VD
    p.mean.noalias() += cross * model.weights();
    MatrixXd v = cross.transpose();
    model.cholesky_factor().triangularView<Eigen::Lower>().solveInPlace(v);
    p.covariance.noalias() -= v.transpose() * v;
  }
  tidy_covariance(p.covariance);
  p.predictive_covariance = p.covariance + model.noise_at(x);
  return p;
}

std::vector<PosteriorPrediction> predict(const GpModel& model, const Points& xs) {
  std::vector<PosteriorPrediction> out;
  out.reserve(xs.size());
  if (!model.conditioned() || xs.empty()) {
    for (const auto& x : xs) out.push_back(predict(model, x));
    return out;
  }
  const auto d = to_index(model.output_dim());
  const MatrixXd cross = model.kernel().gram(xs, model.observations().inputs);  // MD x VD
  const VectorXd shift = cross * model.weights();
  MatrixXd v = cross.transpose();
  model.cholesky_factor().triangularView<Eigen::Lower>().solveInPlace(v);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    PosteriorPrediction p;
    const auto vi = v.middleCols(to_index(i) * d, d);
    p.mean = model.prior_mean(xs[i]) + shift.segment(to_index(i) * d, d);
    p.covariance = model.kernel().evaluate(xs[i], xs[i]);
    p.covariance.noalias() -= vi.transpose() * vi;
    tidy_covariance(p.covariance);
    p.predictive_covariance = p.covariance + model.noise_at(xs[i]);
    out.push_back(std::move(p));
  }
  return out;
}

JointDistribution joint_distribution(const GpModel& model, const Points& xs) {
  const auto d = to_index(model.output_dim());
  JointDistribution j;
  j.mean.resize(to_index(xs.size()) * d);
  for (std::size_t i = 0; i < xs.size(); ++i) j.mean.segment(to_index(i) * d, d) = model.prior_mean(xs[i]);
  j.covariance = model.kernel().gram(xs);
  if (model.conditioned() && !xs.empty()) {
    const MatrixXd cross = model.kernel().gram(xs, model.observations().inputs);
    j.mean.noalias() += cross * model.weights();
    MatrixXd v = cross.transpose();
    model.cholesky_factor().triangularView<Eigen::Lower>().solveInPlace(v);
    j.covariance.noalias() -= v.transpose() * v;
  }
  j.covariance = (0.5 * (j.covariance + j.covariance.transpose())).eval();
  return j;
}

std::vector<Points> sample(const GpModel& model, const Points& xs, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
  const JointDistribution joint = joint_distribution(model, xs);
  const auto d = to_index(model.output_dim());
  MatrixXd root;
  if (joint.covariance.size() > 0) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(joint.covariance);
    const VectorXd s = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    root = eig.eigenvectors() * s.asDiagonal() * eig.eigenvectors().transpose();
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<Points> draws(count);
  VectorXd z(joint.mean.size());
  for (auto& draw : draws) {
    for (Index k = 0; k < z.size(); ++k) z[k] = normal(rng);
    const VectorXd y = joint.mean + (root.size() > 0 ? VectorXd(root * z) : VectorXd(z));
    draw.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) draw.push_back(y.segment(to_index(i) * d, d));
  }
  return draws;
}

double log_marginal_likelihood(const GpModel& model, const ObservationSet& data) {
  if (data.empty()) throw Error(ErrorCode::EmptyData, "log marginal likelihood needs observations");
  data.validate(model.input_dim(), model.output_dim());
  const SpdFactor factor = factorize_spd([&] { return noisy_gram(model.kernel(), data); });
  VectorXd a = residuals(model, data);
  factor.lower.triangularView<Eigen::Lower>().solveInPlace(a);
  const double n = static_cast<double>(a.size());
  const double log_det_half = factor.lower.diagonal().array().log().sum();
  return -0.5 * a.squaredNorm() - log_det_half - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

// ---------------------------------------------------------------------------

std::size_t likelihood_stride(const OptConfig& config, std::size_t count) {
  return config.stride > 0 ? config.stride : stride_for(count, config.max_points);
}

namespace {

// Unconstrained coordinates u map into [lower, upper] through a logistic
// function of the log-parameter, so the simplex never leaves the bounds.
struct BoundedLogMap {
  Eigen::ArrayXd log_lower;
  Eigen::ArrayXd log_range;

  VectorXd to_params(const VectorXd& u) const {
    const Eigen::ArrayXd s = 1.0 / (1.0 + (-u.array()).exp());
    return (log_lower + log_range * s).exp().matrix();
  }
  VectorXd from_unit(const Eigen::ArrayXd& unit) const {
    const Eigen::ArrayXd c = unit.cwiseMax(1e-6).cwiseMin(1.0 - 1e-6);
    return (c / (1.0 - c)).log().matrix();
  }
};

constexpr double kFailedValue = 1e100;

struct Objective {
  const ModelTemplate* model_template;
  const ObservationSet* data;
  const BoundedLogMap* map;
  std::size_t evaluations = 0;
  double best_value = std::numeric_limits<double>::infinity();
  VectorXd best_params;

  double operator()(const VectorXd& u) {
    ++evaluations;
    const VectorXd params = map->to_params(u);
    double value = kFailedValue;
    try {
      ObservationSet obs;
      obs.inputs = data->inputs;
      obs.outputs = data->outputs;
      obs.noise = model_template->make_noise(params, data->inputs);
      const double lml = log_marginal_likelihood(model_template->make_prior(params), obs);
      if (std::isfinite(lml)) value = -lml;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::FactorizationFailure && e.code() != ErrorCode::NonPositiveParam) throw;
    }
    if (value < best_value) {
      best_value = value;
      best_params = params;
    }
    return value;
  }
};

double gsl_objective(const gsl_vector* v, void* raw) {
  auto* objective = static_cast<Objective*>(raw);
  VectorXd u(static_cast<Index>(v->size));
  for (std::size_t i = 0; i < v->size; ++i) u[to_index(i)] = gsl_vector_get(v, i);
  return (*objective)(u);
}

}  // namespace

HyperparameterFit optimize_hyperparams(const ModelTemplate& model_template, const ObservationSet& data,
                                       const OptConfig& config) {
  if (data.empty()) throw Error(ErrorCode::EmptyData, "hyperparameter fitting needs observations");
  if (!model_template.make_prior || !model_template.make_noise) {
    throw Error(ErrorCode::InvalidArgument, "model template is incomplete");
  }
  if (config.starts == 0) throw Error(ErrorCode::InvalidArgument, "at least one start is required");
  const std::size_t p = model_template.bounds.size();
  BoundedLogMap map{Eigen::ArrayXd(to_index(p)), Eigen::ArrayXd(to_index(p))};
  for (std::size_t i = 0; i < p; ++i) {
    const auto& b = model_template.bounds[i];
    if (!(b.lower > 0.0) || !(b.upper >= b.lower) || !std::isfinite(b.upper)) {
      throw Error(ErrorCode::NonPositiveParam, "parameter bounds must satisfy 0 < lower <= upper",
                  {{"parameter", std::to_string(i)}});
    }
    map.log_lower[to_index(i)] = std::log(b.lower);
    map.log_range[to_index(i)] = std::log(b.upper) - std::log(b.lower);
  }

  const ObservationSet strided = stride_subsample(data, likelihood_stride(config, data.size()));
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  HyperparameterFit fit;
  double best_value = std::numeric_limits<double>::infinity();
  gsl_set_error_handler_off();

  for (std::size_t s = 0; s < config.starts; ++s) {
    Eigen::ArrayXd draw(to_index(p));
    for (Index i = 0; i < draw.size(); ++i) draw[i] = unit(rng);
    const VectorXd u0 = map.from_unit(draw);
    Objective objective{&model_template, &strided, &map, 0, std::numeric_limits<double>::infinity(), {}};
    const double start_value = objective(u0);
    fit.starts.push_back(map.to_params(u0));
    fit.start_log_likelihoods.push_back(start_value >= kFailedValue ? -std::numeric_limits<double>::infinity()
                                                                    : -start_value);

    if (p > 0 && config.max_evaluations > 1) {
      gsl_multimin_function fn{&gsl_objective, p, &objective};
      gsl_vector* x = gsl_vector_alloc(p);
      gsl_vector* step = gsl_vector_alloc(p);
      for (std::size_t i = 0; i < p; ++i) gsl_vector_set(x, i, u0[to_index(i)]);
      gsl_vector_set_all(step, 1.0);
      gsl_multimin_fminimizer* minimizer = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, p);
      try {
        if (gsl_multimin_fminimizer_set(minimizer, &fn, x, step) == GSL_SUCCESS) {
          while (objective.evaluations < config.max_evaluations) {
            if (gsl_multimin_fminimizer_iterate(minimizer) != GSL_SUCCESS) break;
            if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(minimizer), config.tolerance) == GSL_SUCCESS) {
              break;
            }
          }
        }
      } catch (...) {
        gsl_multimin_fminimizer_free(minimizer);
        gsl_vector_free(step);
        gsl_vector_free(x);
        throw;
      }
      gsl_multimin_fminimizer_free(minimizer);
      gsl_vector_free(step);
      gsl_vector_free(x);
    }

    fit.evaluations += objective.evaluations;
    if (objective.best_value < kFailedValue && objective.best_value < best_value) {
      best_value = objective.best_value;
      fit.parameters = objective.best_params;
      fit.best_start = s;
    }
  }
  if (!std::isfinite(best_value)) {
    throw Error(ErrorCode::AllStartsFailed, "every optimizer start failed to factorize the likelihood system");
  }
  fit.log_likelihood = -best_value;
  return fit;
}

}  // namespace gmrgp
