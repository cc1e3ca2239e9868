#include "gmrgp/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "gmrgp/error.hpp"
#include "gmrgp/synthetic.hpp"

namespace gmrgp {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd vec(std::initializer_list<double> values) {
  VectorXd v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

ViaPoint via(double t, VectorXd y, double noise) {
  const auto d = y.size();
  return {vec({t}), std::move(y), MatrixXd(noise * MatrixXd::Identity(d, d))};
}

std::size_t index_at(const std::vector<double>& times, double t) {
  const auto it = std::lower_bound(times.begin(), times.end(), t - 1e-12);
  return std::min(static_cast<std::size_t>(it - times.begin()), times.size() - 1);
}

}  // namespace

std::vector<double> time_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start)) throw Error(ErrorCode::InvalidArgument, "grid needs step > 0 and stop >= start");
  std::vector<double> out;
  const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 0.5));
  for (std::size_t i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
  return out;
}

Points as_inputs(const std::vector<double>& times) {
  Points out;
  out.reserve(times.size());
  for (double t : times) out.push_back(vec({t}));
  return out;
}

std::shared_ptr<const GmmModel> two_component_model() {
  GaussianComponent a{0.5, vec({0.4, 0.5}), MatrixXd(2, 2)};
  a.covariance << 0.04, 0.02, 0.02, 0.05;
  GaussianComponent b{0.5, vec({2.0, -0.5}), MatrixXd(2, 2)};
  b.covariance << 0.04, -0.03, -0.03, 0.06;
  return std::make_shared<const GmmModel>(std::vector<GaussianComponent>{a, b}, 1, 1);
}

LetterScenario letter_scenario(std::uint64_t seed) {
  SyntheticParams params;
  params.demos = 5;
  params.samples = 100;
  params.noise = 0.03;
  LetterScenario s{generate_synthetic(SyntheticKind::Letter, params, seed), 6, time_grid(0.0, 1.0, 0.005), {}};
  const VectorXd shift = vec({0.08, -0.06});
  for (double t : {0.0, 0.12, 0.25}) s.via_points.push_back(via(t, letter_path(t) + shift, 1e-6));
  return s;
}

InsertionScenario insertion_scenario(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const std::vector<double> times = time_grid(0.0, 2.0, 0.01);
  // Per-demonstration offsets: large while travelling, small during insertion.
  const double travel[3][2] = {{-0.06, 0.05}, {0.01, -0.06}, {0.05, 0.01}};
  const double depth[3] = {-0.015, 0.0, 0.015};

  Points inputs, outputs;
  std::vector<DemoRange> ranges;
  for (std::size_t k = 0; k < 3; ++k) {
    const double scale = 1.0 + 0.2 * normal(rng);
    ranges.push_back({inputs.size(), inputs.size() + times.size()});
    for (double t : times) {
      const double travel_bump = std::exp(-std::pow((t - 1.0) / 0.25, 2.0));
      const double x = min_jerk(t / 1.3) + scale * travel[k][0] * travel_bump;
      const double y = 0.5 + 0.4 * min_jerk(t / 1.3) - 0.3 * min_jerk((t - 1.3) / 0.7) +
                       scale * travel[k][1] * travel_bump + depth[k] * min_jerk((t - 1.1) / 0.4);
      inputs.push_back(vec({t}));
      outputs.push_back(vec({x + 1e-3 * normal(rng), y + 1e-3 * normal(rng)}));
    }
  }

  InsertionScenario s;
  s.demos = DemonstrationSet(std::move(inputs), std::move(outputs), std::move(ranges));
  s.times = times;
  s.goal = vec({1.0, 0.3});
  s.obstacles.push_back({vec({0.5, 0.75}), 0.1});
  s.via_points = {via(0.0, vec({0.0, 0.5}), 1e-5), via(0.65, vec({0.5, 0.5}), 1e-5), via(2.0, s.goal, 1e-5)};
  return s;
}

VectorXd demonstrated_approach(const DemonstrationSet& demos, double approach_start) {
  VectorXd sum = VectorXd::Zero(static_cast<Eigen::Index>(demos.output_dim()));
  for (const auto& r : demos.demos()) {
    std::vector<double> times;
    for (std::size_t i = r.begin; i < r.end; ++i) times.push_back(demos.inputs()[i][0]);
    const std::size_t a = r.begin + index_at(times, approach_start);
    sum += demos.outputs()[r.end - 1] - demos.outputs()[a];
  }
  if (sum.norm() == 0.0) throw Error(ErrorCode::InvalidArgument, "demonstrations do not move during the approach");
  return sum.normalized();
}

double approach_deviation_deg(const std::vector<double>& times, const Points& path, double approach_start,
                              const VectorXd& direction) {
  if (times.size() != path.size() || path.size() < 2) {
    throw Error(ErrorCode::DimensionMismatch, "path needs one point per time stamp");
  }
  const VectorXd delta = path.back() - path[index_at(times, approach_start)];
  const double denom = delta.norm() * direction.norm();
  if (denom == 0.0) return 180.0;
  const double c = std::clamp(delta.dot(direction) / denom, -1.0, 1.0);
  return std::acos(c) * 180.0 / std::numbers::pi;
}

}  // namespace gmrgp
