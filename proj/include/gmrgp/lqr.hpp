#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "gmrgp/demonstrations.hpp"
#include "gmrgp/gmr.hpp"
#include "gmrgp/gp.hpp"

namespace gmrgp {

/// Time-indexed position reference with a covariance per step.
struct ReferenceTrajectory {
  std::vector<double> times;
  Points means;
  std::vector<Eigen::MatrixXd> covariances;

  std::size_t size() const { return times.size(); }
  std::size_t dim() const { return means.empty() ? 0 : static_cast<std::size_t>(means.front().size()); }

  /// Throws InvalidArgument / DimensionMismatch unless times increase strictly
  /// and every covariance is a symmetric D x D matrix.
  void validate() const;
};

/// Reference from scalar-time posterior predictions (latent covariance).
ReferenceTrajectory make_reference(const std::vector<double>& times, const std::vector<PosteriorPrediction>& predictions);
ReferenceTrajectory make_reference(const std::vector<double>& times, const std::vector<GmrPrediction>& predictions);

/// Point mass per output dimension: m a = u - b v.
struct PlantParams {
  double mass = 1.0;
  double damping = 0.0;
};

struct TrackerConfig {
  double precision_scale = 1.0;     // alpha in Q = alpha (S + eps I)^-1
  double control_cost = 1e-6;       // R = r I
  double covariance_floor = 1e-6;   // eps
  PlantParams plant;

  void validate() const;
};

/// Position tracking weights Q_t = alpha (S_t + eps I)^-1, one D x D matrix per step.
std::vector<Eigen::MatrixXd> gains_from_covariance(const ReferenceTrajectory& reference, const TrackerConfig& config);

/// Discretized plant for one step of length dt; state [position; velocity].
struct DiscretePlant {
  Eigen::MatrixXd a;
  Eigen::MatrixXd b;
};
DiscretePlant discretize(const PlantParams& plant, std::size_t dim, double dt);

/// Feedback law u_t = -K_t (x_t - xref_t) - k_t for t = 0 .. T-2.
struct GainSchedule {
  std::vector<Eigen::MatrixXd> feedback;
  std::vector<Eigen::VectorXd> feedforward;
  /// State cost per step (position weights Q_t, zero on velocity).
  std::vector<Eigen::MatrixXd> state_costs;
  /// Reference states [mean; finite-difference velocity].
  std::vector<Eigen::VectorXd> reference_states;
  /// Optimal cost-to-go from the reference initial state:
  /// e^T P_0 e + 2 p_0^T e + c_0 with e the initial tracking error.
  Eigen::MatrixXd value_quadratic;
  Eigen::VectorXd value_linear;
  double value_constant = 0.0;
};

/// Finite-horizon Riccati recursion for the time-varying affine tracking
/// problem. Throws IllConditionedRiccati when R + B^T P B has condition
/// number above 1e14 (or is not finite).
GainSchedule solve_lqr(const ReferenceTrajectory& reference, const std::vector<Eigen::MatrixXd>& position_weights,
                       const TrackerConfig& config);

struct Obstacle {
  Eigen::VectorXd center;
  double radius = 0.0;
};

/// Random force added to the control at every step.
struct Disturbance {
  std::uint64_t seed = 0;
  double force_std = 0.0;
};

/// A position the executed path should pass at a given time.
struct TimedTarget {
  double time = 0.0;
  Eigen::VectorXd position;
};

struct SimulationReport {
  Points positions;
  Points controls;
  std::vector<double> tracking_errors;  // |position - reference mean| per step
  double rms_error = 0.0;
  double max_error = 0.0;
  std::vector<double> target_misses;  // distance to each target at its nearest step
  double min_clearance = 0.0;         // min over steps/obstacles of distance minus radius (inf if none)
  double cost = 0.0;                  // realized quadratic tracking cost
  double predicted_cost = 0.0;        // Riccati cost-to-go at the initial state
  bool diverged = false;
};

/// Closed-loop rollout starting at the reference initial state.
SimulationReport simulate(const ReferenceTrajectory& reference, const GainSchedule& schedule,
                          const TrackerConfig& config, const Disturbance& disturbance = {},
                          const std::vector<TimedTarget>& targets = {}, const std::vector<Obstacle>& obstacles = {});

}  // namespace gmrgp
