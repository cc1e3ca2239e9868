#include "gmrgp/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>

#include "gmrgp/error.hpp"

namespace gmrgp {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const double m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

double log_normalizer(const Eigen::LLT<Eigen::MatrixXd>& factor) {
  const auto n = static_cast<double>(factor.matrixLLT().rows());
  const double log_det = 2.0 * factor.matrixLLT().diagonal().array().log().sum();
  return -0.5 * (n * kLog2Pi + log_det);
}

void require_dim(const Eigen::VectorXd& v, std::size_t dim, const char* what) {
  if (static_cast<std::size_t>(v.size()) != dim) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has dimension " + std::to_string(v.size()) +
                                                  ", expected " + std::to_string(dim));
  }
}

}  // namespace

GmmModel::GmmModel(std::vector<GaussianComponent> components, std::size_t input_dim, std::size_t output_dim)
    : components_(std::move(components)), input_dim_(input_dim), output_dim_(output_dim) {
  if (components_.empty()) throw Error(ErrorCode::InvalidArgument, "a GMM needs at least one component");
  if (input_dim_ == 0 || output_dim_ == 0) {
    throw Error(ErrorCode::DimensionMismatch, "input and output dimensions must be >= 1");
  }
  const auto dim = static_cast<Eigen::Index>(joint_dim());
  const auto din = static_cast<Eigen::Index>(input_dim_);

  double weight_sum = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
      throw Error(ErrorCode::NonPositiveParam, "component weights must be positive and finite");
    }
    weight_sum += c.weight;
  }
  if (std::abs(weight_sum - 1.0) > 1e-6) {
    throw Error(ErrorCode::InvalidArgument, "component weights sum to " + std::to_string(weight_sum));
  }

  input_factor_.reserve(components_.size());
  joint_factor_.reserve(components_.size());
  for (std::size_t l = 0; l < components_.size(); ++l) {
    auto& c = components_[l];
    c.weight /= weight_sum;
    if (c.mean.size() != dim || c.covariance.rows() != dim || c.covariance.cols() != dim) {
      throw Error(ErrorCode::DimensionMismatch, "component " + std::to_string(l) + " has wrong dimensions");
    }
    if (!c.mean.allFinite() || !c.covariance.allFinite()) {
      throw Error(ErrorCode::NonFiniteInput, "component " + std::to_string(l) + " has non-finite parameters");
    }
    const double asym = (c.covariance - c.covariance.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-8 * std::max(1.0, c.covariance.cwiseAbs().maxCoeff())) {
      throw Error(ErrorCode::InvalidArgument, "component " + std::to_string(l) + " covariance is not symmetric");
    }
    c.covariance = (0.5 * (c.covariance + c.covariance.transpose())).eval();

    Eigen::LLT<Eigen::MatrixXd> input_llt(c.covariance.topLeftCorner(din, din));
    if (input_llt.info() != Eigen::Success) {
      throw Error(ErrorCode::SingularInputBlock,
                  "input covariance block of component " + std::to_string(l) + " is not positive definite");
    }
    Eigen::LLT<Eigen::MatrixXd> joint_llt(c.covariance);
    if (joint_llt.info() != Eigen::Success) {
      throw Error(ErrorCode::DegenerateComponent,
                  "covariance of component " + std::to_string(l) + " is not positive definite");
    }
    input_log_norm_.push_back(log_normalizer(input_llt));
    joint_log_norm_.push_back(log_normalizer(joint_llt));
    input_factor_.push_back(std::move(input_llt));
    joint_factor_.push_back(std::move(joint_llt));
  }
}

const GaussianComponent& GmmModel::component(std::size_t index) const {
  if (index >= components_.size()) {
    throw Error(ErrorCode::IndexOutOfRange, "component index " + std::to_string(index) + " out of range");
  }
  return components_[index];
}

double GmmModel::input_log_density(std::size_t l, const Eigen::VectorXd& x) const {
  const Eigen::VectorXd z = input_factor_[l].matrixL().solve(x - input_mean(l));
  return input_log_norm_[l] - 0.5 * z.squaredNorm();
}

double GmmModel::input_mahalanobis(std::size_t l, const Eigen::VectorXd& x) const {
  const Eigen::VectorXd z = input_factor_[l].matrixL().solve(x - input_mean(l));
  return z.stableNorm();
}

double GmmModel::joint_log_density(std::size_t l, const Eigen::VectorXd& z) const {
  const Eigen::VectorXd w = joint_factor_[l].matrixL().solve(z - components_[l].mean);
  return joint_log_norm_[l] - 0.5 * w.squaredNorm();
}

double joint_log_pdf(const GmmModel& model, const Eigen::VectorXd& point) {
  require_dim(point, model.joint_dim(), "joint point");
  Eigen::VectorXd terms(static_cast<Eigen::Index>(model.num_components()));
  for (std::size_t l = 0; l < model.num_components(); ++l) {
    terms[static_cast<Eigen::Index>(l)] = std::log(model.components()[l].weight) + model.joint_log_density(l, point);
  }
  return log_sum_exp(terms);
}

Responsibilities responsibilities(const GmmModel& model, const Eigen::VectorXd& x) {
  require_dim(x, model.input_dim(), "input");
  if (!x.allFinite()) throw Error(ErrorCode::NonFiniteInput, "input is not finite");

  const auto count = static_cast<Eigen::Index>(model.num_components());
  Eigen::VectorXd logs(count);
  for (Eigen::Index l = 0; l < count; ++l) {
    const auto idx = static_cast<std::size_t>(l);
    logs[l] = std::log(model.components()[idx].weight) + model.input_log_density(idx, x);
  }

  Responsibilities out;
  const double total = log_sum_exp(logs);
  if (!std::isfinite(total)) {
    // Astronomically far input: fall back to the nearest component.
    std::size_t nearest = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < model.num_components(); ++l) {
      const double d = model.input_mahalanobis(l, x);
      if (d < best) {
        best = d;
        nearest = l;
      }
    }
    out.values = Eigen::VectorXd::Zero(count);
    out.values[static_cast<Eigen::Index>(nearest)] = 1.0;
    out.far_field = true;
    return out;
  }
  out.values = (logs.array() - total).exp().min(1.0);
  out.values /= out.values.sum();
  return out;
}

Eigen::MatrixXd sample_joint(const GmmModel& model, std::size_t count, std::uint64_t seed) {
  if (count == 0) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<double> weights;
  for (const auto& c : model.components()) weights.push_back(c.weight);
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::normal_distribution<double> normal;

  const auto dim = static_cast<Eigen::Index>(model.joint_dim());
  std::vector<Eigen::MatrixXd> lowers;
  for (std::size_t l = 0; l < model.num_components(); ++l) lowers.push_back(model.joint_factor(l).matrixL());

  Eigen::MatrixXd out(static_cast<Eigen::Index>(count), dim);
  Eigen::VectorXd z(dim);
  for (std::size_t n = 0; n < count; ++n) {
    const std::size_t l = pick(rng);
    for (Eigen::Index i = 0; i < dim; ++i) z[i] = normal(rng);
    out.row(static_cast<Eigen::Index>(n)) =
        (model.components()[l].mean + lowers[l].triangularView<Eigen::Lower>() * z).transpose();
  }
  return out;
}

// ---------------------------------------------------------------------------
// EM

namespace {

Eigen::MatrixXd regularized(const Eigen::MatrixXd& scatter, double regularization) {
  Eigen::MatrixXd cov = 0.5 * (scatter + scatter.transpose());
  const double jitter = regularization * cov.trace() / static_cast<double>(cov.rows());
  cov.diagonal().array() += jitter;
  return cov;
}

bool positive_definite(const Eigen::MatrixXd& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

std::vector<GaussianComponent> moments_from_labels(const Eigen::MatrixXd& data, const std::vector<std::size_t>& labels,
                                                   std::size_t num_components, double regularization) {
  const auto n = data.rows();
  const auto dim = data.cols();
  const Eigen::RowVectorXd global_mean = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - global_mean;
  const Eigen::MatrixXd global_cov = regularized(centered.transpose() * centered / static_cast<double>(n), regularization);
  if (!positive_definite(global_cov)) {
    throw Error(ErrorCode::DegenerateComponent, "data covariance is singular; cannot initialize components");
  }

  std::vector<GaussianComponent> out(num_components);
  for (std::size_t k = 0; k < num_components; ++k) {
    std::vector<Eigen::Index> members;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (labels[static_cast<std::size_t>(i)] == k) members.push_back(i);
    }
    auto& c = out[k];
    c.weight = static_cast<double>(members.size()) / static_cast<double>(n);
    c.mean = Eigen::VectorXd::Zero(dim);
    for (auto i : members) c.mean += data.row(i).transpose();
    c.mean /= static_cast<double>(members.size());
    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(dim, dim);
    for (auto i : members) {
      const Eigen::VectorXd d = data.row(i).transpose() - c.mean;
      scatter += d * d.transpose();
    }
    scatter /= static_cast<double>(members.size());
    c.covariance = regularized(scatter, regularization);
    if (!positive_definite(c.covariance)) c.covariance = global_cov;
  }
  return out;
}

std::optional<std::vector<std::size_t>> time_bin_labels(const DemonstrationSet& data, std::size_t num_components) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& x : data.inputs()) {
    lo = std::min(lo, x[0]);
    hi = std::max(hi, x[0]);
  }
  if (!(hi > lo)) return std::nullopt;
  std::vector<std::size_t> labels(data.size());
  std::vector<std::size_t> counts(num_components, 0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double u = (data.inputs()[i][0] - lo) / (hi - lo);
    labels[i] = std::min(num_components - 1, static_cast<std::size_t>(u * static_cast<double>(num_components)));
    ++counts[labels[i]];
  }
  for (auto c : counts) {
    if (c < 2) return std::nullopt;
  }
  return labels;
}

std::vector<std::size_t> kmeans_labels(const Eigen::MatrixXd& data, std::size_t num_components, std::uint64_t seed) {
  const auto n = data.rows();
  const auto k = static_cast<Eigen::Index>(num_components);

  // Standardize so that inputs and outputs in different units weigh alike.
  const Eigen::RowVectorXd mean = data.colwise().mean();
  Eigen::RowVectorXd scale = ((data.rowwise() - mean).array().square().colwise().sum() / static_cast<double>(n)).sqrt();
  for (Eigen::Index j = 0; j < scale.size(); ++j) {
    if (!(scale[j] > 0.0)) scale[j] = 1.0;
  }
  const Eigen::MatrixXd z = (data.rowwise() - mean).array().rowwise() / scale.array();

  std::mt19937_64 rng(seed);
  Eigen::MatrixXd centers(k, data.cols());
  std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
  centers.row(0) = z.row(first(rng));
  Eigen::VectorXd nearest = (z.rowwise() - centers.row(0)).rowwise().squaredNorm();
  for (Eigen::Index c = 1; c < k; ++c) {
    Eigen::Index chosen = 0;
    if (nearest.sum() > 0.0) {
      std::discrete_distribution<Eigen::Index> pick(nearest.data(), nearest.data() + n);
      chosen = pick(rng);
    } else {
      chosen = first(rng);
    }
    centers.row(c) = z.row(chosen);
    nearest = nearest.cwiseMin((z.rowwise() - centers.row(c)).rowwise().squaredNorm());
  }

  std::vector<std::size_t> labels(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd dist(n);
  for (int iteration = 0; iteration < 50; ++iteration) {
    bool changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      dist[i] = (centers.rowwise() - z.row(i)).rowwise().squaredNorm().minCoeff(&best);
      if (labels[static_cast<std::size_t>(i)] != static_cast<std::size_t>(best)) changed = true;
      labels[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
    }
    std::vector<Eigen::Index> counts(num_components, 0);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, data.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      sums.row(static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)])) += z.row(i);
      ++counts[labels[static_cast<std::size_t>(i)]];
    }
    for (Eigen::Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] < 2) {
        // Re-seed an empty or singleton cluster at the worst-served point.
        Eigen::Index far = 0;
        dist.maxCoeff(&far);
        centers.row(c) = z.row(far);
        dist[far] = 0.0;
        changed = true;
      } else {
        centers.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      }
    }
    if (!changed) break;
  }
  // Final assignment against the last centers.
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = 0;
    (centers.rowwise() - z.row(i)).rowwise().squaredNorm().minCoeff(&best);
    labels[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
  }
  return labels;
}

}  // namespace

GmmModel fit_gmm(const DemonstrationSet& data, std::size_t num_components, const EmConfig& config, EmTrace* trace) {
  if (data.size() == 0) throw Error(ErrorCode::EmptyData, "no samples to fit");
  if (num_components == 0) throw Error(ErrorCode::InvalidArgument, "num_components must be >= 1");
  if (data.size() < num_components) {
    throw Error(ErrorCode::InvalidArgument, "fewer samples than components");
  }
  const Eigen::MatrixXd z = data.joint_matrix();
  if (!z.allFinite()) throw Error(ErrorCode::NonFiniteInput, "demonstrations contain non-finite values");

  const auto n = z.rows();
  const auto dim = z.cols();
  const auto k = static_cast<Eigen::Index>(num_components);

  std::vector<std::size_t> labels;
  const bool use_bins =
      config.init == EmInit::TimeBins || (config.init == EmInit::Auto && data.time_driven());
  if (use_bins) {
    if (auto bins = time_bin_labels(data, num_components)) labels = std::move(*bins);
  }
  if (labels.empty()) labels = kmeans_labels(z, num_components, config.seed);

  GmmModel model(moments_from_labels(z, labels, num_components, config.regularization), data.input_dim(),
                 data.output_dim());

  EmTrace local;
  EmTrace& out = trace ? *trace : local;
  out = EmTrace{};

  Eigen::MatrixXd log_resp(n, k);
  double previous = -std::numeric_limits<double>::infinity();
  for (std::size_t iteration = 0;; ++iteration) {
    // E-step
    for (Eigen::Index l = 0; l < k; ++l) {
      const auto idx = static_cast<std::size_t>(l);
      const auto& factor = model.joint_factor(idx);
      const Eigen::MatrixXd centered = (z.rowwise() - model.components()[idx].mean.transpose()).transpose();
      const Eigen::MatrixXd white = factor.matrixL().solve(centered);
      const double log_norm = std::log(model.components()[idx].weight) - 0.5 * static_cast<double>(dim) * kLog2Pi -
                              factor.matrixLLT().diagonal().array().log().sum();
      log_resp.col(l) = (log_norm - 0.5 * white.colwise().squaredNorm().array()).transpose();
    }
    double log_likelihood = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double total = log_sum_exp(log_resp.row(i).transpose());
      log_likelihood += total;
      log_resp.row(i).array() -= total;
    }
    out.log_likelihood.push_back(log_likelihood);
    out.iterations = iteration;

    if (iteration > 0 && std::abs(log_likelihood - previous) < config.tolerance * std::abs(previous)) {
      out.converged = true;
      break;
    }
    if (iteration >= config.max_iterations) break;
    previous = log_likelihood;

    // M-step
    const Eigen::MatrixXd resp = log_resp.array().exp();
    const Eigen::VectorXd counts = resp.colwise().sum().transpose();
    std::vector<GaussianComponent> next(num_components);
    for (Eigen::Index l = 0; l < k; ++l) {
      const double nk = counts[l];
      if (!(nk > 1e-10 * static_cast<double>(n))) {
        throw Error(ErrorCode::DegenerateComponent,
                    "component " + std::to_string(l) + " lost all responsibility at iteration " +
                        std::to_string(iteration));
      }
      auto& c = next[static_cast<std::size_t>(l)];
      c.weight = nk / static_cast<double>(n);
      c.mean = z.transpose() * resp.col(l) / nk;
      const Eigen::MatrixXd centered = z.rowwise() - c.mean.transpose();
      const Eigen::MatrixXd weighted = centered.array().colwise() * resp.col(l).array();
      c.covariance = regularized(weighted.transpose() * centered / nk, config.regularization);
      if (!positive_definite(c.covariance)) {
        throw Error(ErrorCode::DegenerateComponent,
                    "component " + std::to_string(l) + " collapsed below the regularization floor");
      }
    }
    model = GmmModel(std::move(next), data.input_dim(), data.output_dim());
  }
  return model;
}

}  // namespace gmrgp
