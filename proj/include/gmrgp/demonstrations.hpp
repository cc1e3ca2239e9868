#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace gmrgp {

/// A list of points (inputs or outputs), all of the same dimension.
using Points = std::vector<Eigen::VectorXd>;

/// Half-open index range [begin, end) of one demonstration inside a set.
struct DemoRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  friend bool operator==(const DemoRange&, const DemoRange&) = default;
};

/// Aligned (input, output) samples of one or more demonstrations.
///
/// Demonstrations are stored back to back; `demos()` partitions [0, size()).
/// Inputs are typically time stamps (input_dim == 1).
class DemonstrationSet {
 public:
  DemonstrationSet() = default;

  /// Validates the invariants and throws gmrgp::Error on violation.
  /// An empty `demos` means a single demonstration spanning all samples.
  DemonstrationSet(Points inputs, Points outputs, std::vector<DemoRange> demos = {});

  std::size_t size() const { return inputs_.size(); }
  std::size_t input_dim() const { return input_dim_; }
  std::size_t output_dim() const { return output_dim_; }
  std::size_t joint_dim() const { return input_dim_ + output_dim_; }

  const Points& inputs() const { return inputs_; }
  const Points& outputs() const { return outputs_; }
  const std::vector<DemoRange>& demos() const { return demos_; }

  /// N x (Din + D) matrix, one joint sample [x; y] per row.
  Eigen::MatrixXd joint_matrix() const;

  /// True when input_dim == 1 and every demonstration has non-decreasing input.
  bool time_driven() const;

 private:
  Points inputs_;
  Points outputs_;
  std::vector<DemoRange> demos_;
  std::size_t input_dim_ = 0;
  std::size_t output_dim_ = 0;
};

}  // namespace gmrgp
