#include "gmrgp/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "gmrgp/error.hpp"

namespace gmrgp {

namespace {

using Eigen::VectorXd;

// Control points of the letter; the stroke goes up the stem, around the upper
// bowl, then the lower bowl, ending near the start.
constexpr std::array<std::array<double, 2>, 10> kLetter{{
    {0.50, 0.50},
    {0.52, 1.25},
    {0.55, 1.95},
    {1.05, 1.90},
    {1.15, 1.55},
    {0.70, 1.28},
    {1.25, 1.05},
    {1.20, 0.62},
    {0.85, 0.45},
    {0.58, 0.55},
}};

// Uniform Catmull-Rom spline through kLetter, s in [0, 1].
VectorXd letter_point(double s) {
  const int segments = static_cast<int>(kLetter.size()) - 1;
  const double u = std::clamp(s, 0.0, 1.0) * segments;
  const int i = std::min(static_cast<int>(u), segments - 1);
  const double f = u - i;
  auto at = [](int k) {
    k = std::clamp(k, 0, static_cast<int>(kLetter.size()) - 1);
    return Eigen::Vector2d(kLetter[static_cast<std::size_t>(k)][0], kLetter[static_cast<std::size_t>(k)][1]);
  };
  const Eigen::Vector2d p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
  const double f2 = f * f, f3 = f2 * f;
  return 0.5 * ((2.0 * p1) + (-p0 + p2) * f + (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3) * f2 +
                (-p0 + 3.0 * p1 - 3.0 * p2 + p3) * f3);
}

void check_params(const SyntheticParams& p) {
  if (p.demos == 0 || p.samples < 2) throw Error(ErrorCode::InvalidArgument, "need >= 1 demo and >= 2 samples");
  if (!(p.duration > 0.0) || !(p.noise >= 0.0) || !(p.warp >= 0.0) || p.warp >= 1.0 / std::numbers::pi) {
    throw Error(ErrorCode::InvalidArgument, "duration must be > 0, noise >= 0 and 0 <= warp < 1/pi");
  }
}

DemonstrationSet from_demos(std::vector<Points> xs, std::vector<Points> ys) {
  Points inputs, outputs;
  std::vector<DemoRange> ranges;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    ranges.push_back({inputs.size(), inputs.size() + xs[k].size()});
    inputs.insert(inputs.end(), xs[k].begin(), xs[k].end());
    outputs.insert(outputs.end(), ys[k].begin(), ys[k].end());
  }
  return DemonstrationSet(std::move(inputs), std::move(outputs), std::move(ranges));
}

}  // namespace

SyntheticKind parse_synthetic_kind(std::string_view name) {
  if (name == "letter") return SyntheticKind::Letter;
  if (name == "minjerk") return SyntheticKind::MinJerk;
  if (name == "gmm-draw") return SyntheticKind::GmmDraw;
  throw Error(ErrorCode::InvalidArgument, "unknown synthetic kind '" + std::string(name) + "'");
}

Eigen::VectorXd letter_path(double s) { return letter_point(s); }

double min_jerk(double s) {
  s = std::clamp(s, 0.0, 1.0);
  return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

DemonstrationSet generate_synthetic(SyntheticKind kind, const SyntheticParams& params, std::uint64_t seed) {
  check_params(params);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double pi = std::numbers::pi;

  if (kind == SyntheticKind::GmmDraw) {
    if (!params.model) throw Error(ErrorCode::InvalidArgument, "gmm-draw needs a model");
    const auto& model = *params.model;
    const Eigen::MatrixXd z = sample_joint(model, params.demos * params.samples, seed);
    const auto din = static_cast<Eigen::Index>(model.input_dim());
    const auto d = static_cast<Eigen::Index>(model.output_dim());
    std::vector<Points> xs(params.demos), ys(params.demos);
    for (std::size_t k = 0; k < params.demos; ++k) {
      std::vector<Eigen::Index> rows(params.samples);
      for (std::size_t i = 0; i < params.samples; ++i) rows[i] = static_cast<Eigen::Index>(k * params.samples + i);
      if (din == 1) {
        std::stable_sort(rows.begin(), rows.end(), [&](auto a, auto b) { return z(a, 0) < z(b, 0); });
      }
      for (auto r : rows) {
        xs[k].push_back(z.row(r).head(din).transpose());
        ys[k].push_back(z.row(r).tail(d).transpose());
      }
    }
    return from_demos(std::move(xs), std::move(ys));
  }

  VectorXd start = params.start, goal = params.goal;
  if (kind == SyntheticKind::MinJerk) {
    if (start.size() == 0) start = VectorXd::Zero(goal.size() > 0 ? goal.size() : 2);
    if (goal.size() == 0) goal = VectorXd::Ones(start.size());
    if (start.size() != goal.size()) throw Error(ErrorCode::DimensionMismatch, "start and goal differ in dimension");
  }
  const Eigen::Index d = kind == SyntheticKind::Letter ? 2 : start.size();

  std::vector<Points> xs(params.demos), ys(params.demos);
  for (std::size_t k = 0; k < params.demos; ++k) {
    const double w = params.warp * std::clamp(normal(rng), -2.5, 2.5) / 2.5;
    Eigen::MatrixXd amp(d, 2);
    for (Eigen::Index i = 0; i < amp.size(); ++i) amp.data()[i] = params.noise * normal(rng);
    for (std::size_t i = 0; i < params.samples; ++i) {
      const double s = static_cast<double>(i) / static_cast<double>(params.samples - 1);
      const double warped = s + w * std::sin(pi * s);  // monotone since |w| < 1/pi
      VectorXd y = kind == SyntheticKind::Letter ? letter_point(warped)
                                                 : VectorXd(start + (goal - start) * min_jerk(warped));
      // Smooth perturbation vanishing at both ends of the stroke.
      y += amp.col(0) * std::sin(pi * s) + amp.col(1) * std::sin(2.0 * pi * s);
      xs[k].push_back(VectorXd::Constant(1, s * params.duration));
      ys[k].push_back(std::move(y));
    }
  }
  return from_demos(std::move(xs), std::move(ys));
}

}  // namespace gmrgp
