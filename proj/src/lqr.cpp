#include "gmrgp/lqr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "gmrgp/error.hpp"

namespace gmrgp {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index to_index(std::size_t v) { return static_cast<Index>(v); }

template <typename Prediction>
ReferenceTrajectory reference_from(const std::vector<double>& times, const std::vector<Prediction>& predictions) {
  if (times.size() != predictions.size()) {
    throw Error(ErrorCode::DimensionMismatch, "reference needs one prediction per time stamp");
  }
  ReferenceTrajectory ref;
  ref.times = times;
  for (const auto& p : predictions) {
    ref.means.push_back(p.mean);
    ref.covariances.push_back(p.covariance);
  }
  ref.validate();
  return ref;
}

std::vector<VectorXd> reference_states(const ReferenceTrajectory& ref) {
  const std::size_t t_count = ref.size();
  const auto d = to_index(ref.dim());
  std::vector<VectorXd> states(t_count, VectorXd(2 * d));
  for (std::size_t t = 0; t < t_count; ++t) {
    const std::size_t lo = t == 0 ? 0 : t - 1;
    const std::size_t hi = t + 1 == t_count ? t : t + 1;
    states[t].head(d) = ref.means[t];
    states[t].tail(d) = hi == lo ? VectorXd::Zero(d)
                                 : VectorXd((ref.means[hi] - ref.means[lo]) / (ref.times[hi] - ref.times[lo]));
  }
  return states;
}

MatrixXd embed_positions(const MatrixXd& q) {
  const Index d = q.rows();
  MatrixXd out = MatrixXd::Zero(2 * d, 2 * d);
  out.topLeftCorner(d, d) = q;
  return out;
}

}  // namespace

void ReferenceTrajectory::validate() const {
  if (times.size() < 2) throw Error(ErrorCode::InvalidArgument, "reference needs at least two steps");
  if (means.size() != times.size() || covariances.size() != times.size()) {
    throw Error(ErrorCode::DimensionMismatch, "reference times, means and covariances differ in count");
  }
  const auto d = to_index(dim());
  if (d == 0) throw Error(ErrorCode::DimensionMismatch, "reference has zero dimension");
  for (std::size_t t = 0; t < times.size(); ++t) {
    const Error::Context ctx{{"step", std::to_string(t)}};
    if (!std::isfinite(times[t]) || (t > 0 && !(times[t] > times[t - 1]))) {
      throw Error(ErrorCode::InvalidArgument, "reference times must increase strictly", ctx);
    }
    if (means[t].size() != d || covariances[t].rows() != d || covariances[t].cols() != d) {
      throw Error(ErrorCode::DimensionMismatch, "reference step has the wrong dimension", ctx);
    }
    if (!means[t].allFinite() || !covariances[t].allFinite()) {
      throw Error(ErrorCode::NonFiniteInput, "reference step is not finite", ctx);
    }
    const double scale = std::max(1.0, covariances[t].cwiseAbs().maxCoeff());
    if ((covariances[t] - covariances[t].transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
      throw Error(ErrorCode::InvalidArgument, "reference covariance is not symmetric", ctx);
    }
  }
}

ReferenceTrajectory make_reference(const std::vector<double>& times,
                                   const std::vector<PosteriorPrediction>& predictions) {
  return reference_from(times, predictions);
}

ReferenceTrajectory make_reference(const std::vector<double>& times, const std::vector<GmrPrediction>& predictions) {
  return reference_from(times, predictions);
}

void TrackerConfig::validate() const {
  const auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
  if (!positive(precision_scale) || !positive(control_cost) || !positive(covariance_floor) ||
      !positive(plant.mass) || !(plant.damping >= 0.0) || !std::isfinite(plant.damping)) {
    throw Error(ErrorCode::NonPositiveParam, "tracker parameters must be positive (damping >= 0)");
  }
}

std::vector<MatrixXd> gains_from_covariance(const ReferenceTrajectory& reference, const TrackerConfig& config) {
  reference.validate();
  if (!(config.precision_scale > 0.0) || !(config.covariance_floor >= 0.0)) {
    throw Error(ErrorCode::NonPositiveParam, "precision scale must be > 0 and covariance floor >= 0");
  }
  const auto d = to_index(reference.dim());
  std::vector<MatrixXd> q;
  q.reserve(reference.size());
  for (const auto& s : reference.covariances) {
    const MatrixXd floored = 0.5 * (s + s.transpose()) + config.covariance_floor * MatrixXd::Identity(d, d);
    Eigen::LDLT<MatrixXd> ldlt(floored);
    MatrixXd inv = ldlt.solve(MatrixXd::Identity(d, d));
    q.push_back(config.precision_scale * 0.5 * (inv + inv.transpose()));
  }
  return q;
}

DiscretePlant discretize(const PlantParams& plant, std::size_t dim, double dt) {
  const auto d = to_index(dim);
  const MatrixXd eye = MatrixXd::Identity(d, d);
  DiscretePlant p{MatrixXd::Zero(2 * d, 2 * d), MatrixXd::Zero(2 * d, d)};
  p.a.topLeftCorner(d, d) = eye;
  p.a.topRightCorner(d, d) = dt * eye;
  p.a.bottomRightCorner(d, d) = (1.0 - plant.damping * dt / plant.mass) * eye;
  p.b.topRows(d) = (0.5 * dt * dt / plant.mass) * eye;
  p.b.bottomRows(d) = (dt / plant.mass) * eye;
  return p;
}

GainSchedule solve_lqr(const ReferenceTrajectory& reference, const std::vector<MatrixXd>& position_weights,
                       const TrackerConfig& config) {
  reference.validate();
  config.validate();
  const std::size_t t_count = reference.size();
  if (position_weights.size() != t_count) {
    throw Error(ErrorCode::DimensionMismatch, "need one state cost per reference step");
  }
  const std::size_t dim = reference.dim();
  const auto d = to_index(dim);
  const MatrixXd r = config.control_cost * MatrixXd::Identity(d, d);

  GainSchedule g;
  g.reference_states = reference_states(reference);
  for (const auto& q : position_weights) {
    if (q.rows() != d || q.cols() != d || !q.allFinite()) {
      throw Error(ErrorCode::IllConditionedRiccati, "state cost is not a finite D x D matrix");
    }
    g.state_costs.push_back(embed_positions(q));
  }
  g.feedback.resize(t_count - 1);
  g.feedforward.resize(t_count - 1);

  // Value function of the tracking error e: e^T P e + 2 p^T e + c.
  MatrixXd p_mat = g.state_costs.back();
  VectorXd p_vec = VectorXd::Zero(2 * d);
  double c = 0.0;
  for (std::size_t t = t_count - 1; t-- > 0;) {
    const DiscretePlant plant = discretize(config.plant, dim, reference.times[t + 1] - reference.times[t]);
    const VectorXd offset = plant.a * g.reference_states[t] - g.reference_states[t + 1];
    const VectorXd p_tilde = p_mat * offset + p_vec;
    const double c_tilde = offset.dot(p_mat * offset) + 2.0 * p_vec.dot(offset) + c;

    const MatrixXd pb = p_mat * plant.b;
    MatrixXd gram = r + plant.b.transpose() * pb;
    gram = (0.5 * (gram + gram.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!std::isfinite(hi) || !(lo > 0.0) || hi / lo > 1e14) {
      throw Error(ErrorCode::IllConditionedRiccati, "R + B^T P B is ill-conditioned", {{"step", std::to_string(t)}});
    }
    Eigen::LLT<MatrixXd> llt(gram);
    const MatrixXd k_mat = llt.solve(pb.transpose() * plant.a);
    const VectorXd bp = plant.b.transpose() * p_tilde;
    const VectorXd k_vec = llt.solve(bp);

    p_mat = g.state_costs[t] + plant.a.transpose() * p_mat * plant.a - (plant.a.transpose() * pb) * k_mat;
    p_mat = (0.5 * (p_mat + p_mat.transpose())).eval();
    p_vec = (plant.a - plant.b * k_mat).transpose() * p_tilde;
    c = c_tilde - bp.dot(k_vec);

    if (!k_mat.allFinite() || !k_vec.allFinite() || !p_mat.allFinite()) {
      throw Error(ErrorCode::IllConditionedRiccati, "Riccati recursion produced non-finite values",
                  {{"step", std::to_string(t)}});
    }
    g.feedback[t] = k_mat;
    g.feedforward[t] = k_vec;
  }
  g.value_quadratic = p_mat;
  g.value_linear = p_vec;
  g.value_constant = c;
  return g;
}

SimulationReport simulate(const ReferenceTrajectory& reference, const GainSchedule& schedule,
                          const TrackerConfig& config, const Disturbance& disturbance,
                          const std::vector<TimedTarget>& targets, const std::vector<Obstacle>& obstacles) {
  reference.validate();
  const std::size_t t_count = reference.size();
  if (schedule.feedback.size() + 1 != t_count || schedule.reference_states.size() != t_count) {
    throw Error(ErrorCode::DimensionMismatch, "gain schedule does not match the reference");
  }
  const std::size_t dim = reference.dim();
  const auto d = to_index(dim);
  const double r = config.control_cost;

  std::mt19937_64 rng(disturbance.seed);
  std::normal_distribution<double> normal;
  SimulationReport report;
  VectorXd x = schedule.reference_states.front();
  const VectorXd e0 = x - schedule.reference_states.front();
  report.predicted_cost = e0.dot(schedule.value_quadratic * e0) + 2.0 * schedule.value_linear.dot(e0) +
                          schedule.value_constant;

  double scale = 1.0;
  for (const auto& m : reference.means) scale = std::max(scale, m.cwiseAbs().maxCoeff());

  for (std::size_t t = 0; t < t_count; ++t) {
    const VectorXd e = x - schedule.reference_states[t];
    report.positions.push_back(x.head(d));
    report.cost += e.dot(schedule.state_costs[t] * e);
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > 1e6 * scale) {
      report.diverged = true;
      break;
    }
    if (t + 1 == t_count) break;
    VectorXd u = -schedule.feedback[t] * e - schedule.feedforward[t];
    report.cost += r * u.squaredNorm();
    report.controls.push_back(u);
    if (disturbance.force_std > 0.0) {
      for (Index k = 0; k < d; ++k) u[k] += disturbance.force_std * normal(rng);
    }
    const DiscretePlant plant = discretize(config.plant, dim, reference.times[t + 1] - reference.times[t]);
    x = plant.a * x + plant.b * u;
  }

  double sum_sq = 0.0;
  for (std::size_t t = 0; t < report.positions.size(); ++t) {
    const double err = (report.positions[t] - reference.means[t]).norm();
    report.tracking_errors.push_back(err);
    sum_sq += err * err;
    report.max_error = std::max(report.max_error, err);
  }
  report.rms_error = report.positions.empty() ? 0.0 : std::sqrt(sum_sq / static_cast<double>(report.positions.size()));

  for (const auto& target : targets) {
    if (target.position.size() != d) throw Error(ErrorCode::DimensionMismatch, "target has the wrong dimension");
    const auto it = std::lower_bound(reference.times.begin(), reference.times.end(), target.time);
    std::size_t step = static_cast<std::size_t>(it - reference.times.begin());
    if (step == t_count || (step > 0 && target.time - reference.times[step - 1] < reference.times[step] - target.time)) {
      step = step == 0 ? 0 : step - 1;
    }
    report.target_misses.push_back(step < report.positions.size()
                                       ? (report.positions[step] - target.position).norm()
                                       : std::numeric_limits<double>::infinity());
  }

  report.min_clearance = std::numeric_limits<double>::infinity();
  for (const auto& obstacle : obstacles) {
    if (obstacle.center.size() != d) throw Error(ErrorCode::DimensionMismatch, "obstacle has the wrong dimension");
    for (const auto& pos : report.positions) {
      report.min_clearance = std::min(report.min_clearance, (pos - obstacle.center).norm() - obstacle.radius);
    }
  }
  return report;
}

}  // namespace gmrgp
