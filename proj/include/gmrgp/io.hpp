#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmrgp/demonstrations.hpp"
#include "gmrgp/gmm.hpp"
#include "gmrgp/gmr_gp.hpp"
#include "gmrgp/gp.hpp"
#include "gmrgp/kernels.hpp"

namespace gmrgp {

using Json = nlohmann::json;

// Demonstration CSV:
//
//   # input_dim=1 output_dim=2
//   demo_id,t,y1,y2
//   0,0,0.1,0.2
//   ...
//
// The comment line is optional (defaults: one input, the rest outputs). Rows of
// one demonstration must be contiguous. Without resampling every demonstration
// must have the same length.

struct LoadOptions {
  std::size_t resample = 0;  // > 0: linearly resample every demonstration to this many samples
};

DemonstrationSet read_demonstrations(std::istream& in, const LoadOptions& options = {});
DemonstrationSet load_demonstrations(const std::string& path, const LoadOptions& options = {});
void write_demonstrations(std::ostream& out, const DemonstrationSet& demos);
void save_demonstrations(const std::string& path, const DemonstrationSet& demos);

/// Linear interpolation of each demonstration onto `samples` points, evenly
/// spaced in input (input_dim == 1) or in sample index otherwise.
DemonstrationSet resample_demonstrations(const DemonstrationSet& demos, std::size_t samples);

// JSON documents. Matrices are row-major nested arrays.

Json gmm_to_json(const GmmModel& model);
GmmModel gmm_from_json(const Json& doc);

/// {type: "gmr" | "lmc" | "matern52", lengthscales, variances[, coregionalization]}.
Json kernel_to_json(const MatrixKernel& kernel);

Json via_points_to_json(const std::vector<ViaPoint>& via_points);
/// Accepts an array or {"via_points": [...]}; each entry {input, output[, noise]}
/// where noise is a scalar (times I) or a D x D matrix.
std::vector<ViaPoint> via_points_from_json(const Json& doc);

/// {gmm, kernel, noise: {per_component, values}, via_points}.
Json gmr_gp_to_json(const GmrGpModel& model);
/// Rebuilds the prior and conditions it on the stored via-points.
GmrGpModel gmr_gp_from_json(const Json& doc);

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& doc);

/// One row per query: x..., mean..., covariance entries (row-major), then the
/// 2-sigma band lo_d, hi_d per output dimension.
void write_trajectory_csv(std::ostream& out, const Points& xs, const std::vector<PosteriorPrediction>& predictions);

/// Sampled trajectories in long format: sample, x..., y...
void write_samples_csv(std::ostream& out, const Points& xs, const std::vector<Points>& samples);

/// Parses "start:stop:step" into a scalar input grid.
std::vector<double> parse_grid(const std::string& spec);

}  // namespace gmrgp
