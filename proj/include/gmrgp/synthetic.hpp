#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string_view>

#include <Eigen/Core>

#include "gmrgp/demonstrations.hpp"
#include "gmrgp/gmm.hpp"

namespace gmrgp {

enum class SyntheticKind { Letter, MinJerk, GmmDraw };

/// Parses "letter", "minjerk" or "gmm-draw"; throws InvalidArgument otherwise.
SyntheticKind parse_synthetic_kind(std::string_view name);

struct SyntheticParams {
  std::size_t demos = 5;
  std::size_t samples = 100;   // per demonstration
  double duration = 1.0;       // time grid is [0, duration]
  double noise = 0.01;         // amplitude of smooth spatial perturbations
  double warp = 0.05;          // amplitude of the monotone time warp
  // minjerk only
  Eigen::VectorXd start;       // default: zeros(2)
  Eigen::VectorXd goal;        // default: ones(2)
  // gmm-draw only
  std::shared_ptr<const GmmModel> model;
};

/// Deterministic per seed.
///
/// letter:   noisy, time-warped traversals of a fixed 2D "B"-shaped spline on a
///           shared time grid.
/// minjerk:  minimum-jerk reaches from start to goal with smooth bumps.
/// gmm-draw: joint samples of `model`, split into demonstrations of `samples`
///           points each and sorted by input (Din = 1) within a demonstration.
DemonstrationSet generate_synthetic(SyntheticKind kind, const SyntheticParams& params, std::uint64_t seed);

/// Point of the noise-free letter stroke at path parameter s in [0, 1].
Eigen::VectorXd letter_path(double s);

/// 10 s^3 - 15 s^4 + 6 s^5 on [0, 1], clamped outside.
double min_jerk(double s);

}  // namespace gmrgp
