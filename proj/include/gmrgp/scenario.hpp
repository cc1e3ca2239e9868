#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Core>

#include "gmrgp/demonstrations.hpp"
#include "gmrgp/gmm.hpp"
#include "gmrgp/gmr_gp.hpp"
#include "gmrgp/lqr.hpp"

namespace gmrgp {

/// Two-component model with one input and one output, centered at inputs 0.4
/// and 2.0; used for the via-point illustrations.
std::shared_ptr<const GmmModel> two_component_model();
/// Input halfway between the two component centers.
inline constexpr double kTwoComponentMidpoint = 1.2;

/// Letter demonstrations with three via-points displaced from the stroke
/// early in the motion.
struct LetterScenario {
  DemonstrationSet demos;
  std::size_t components = 6;
  std::vector<double> times;  // dense query grid over the demonstration time span
  std::vector<ViaPoint> via_points;
};
LetterScenario letter_scenario(std::uint64_t seed = 0);

/// Planar pick-and-insert task: travel above a hole, then descend vertically.
/// The new environment adds an obstacle on the demonstrated path and moves the
/// hole down; via-points fix the start, clear the obstacle and reach the hole.
struct InsertionScenario {
  DemonstrationSet demos;
  std::size_t components = 4;
  std::vector<double> times;
  std::vector<ViaPoint> via_points;
  std::vector<Obstacle> obstacles;
  Eigen::VectorXd goal;
  double approach_start = 1.6;  // the final approach is [approach_start, end]
};
InsertionScenario insertion_scenario(std::uint64_t seed = 0);

/// Unit mean displacement of the demonstrations over [approach_start, end].
Eigen::VectorXd demonstrated_approach(const DemonstrationSet& demos, double approach_start);

/// Angle in degrees between the displacement of `path` over
/// [approach_start, end] and `direction`.
double approach_deviation_deg(const std::vector<double>& times, const Points& path, double approach_start,
                              const Eigen::VectorXd& direction);

/// Input grid start, start + step, ... up to stop (inclusive within step/2).
std::vector<double> time_grid(double start, double stop, double step);
Points as_inputs(const std::vector<double>& times);

}  // namespace gmrgp
