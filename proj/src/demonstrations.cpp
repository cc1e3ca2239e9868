#include "gmrgp/demonstrations.hpp"

#include <string>

#include "gmrgp/error.hpp"

namespace gmrgp {

DemonstrationSet::DemonstrationSet(Points inputs, Points outputs, std::vector<DemoRange> demos)
    : inputs_(std::move(inputs)), outputs_(std::move(outputs)), demos_(std::move(demos)) {
  if (inputs_.empty()) throw Error(ErrorCode::EmptyData, "demonstration set has no samples");
  if (inputs_.size() != outputs_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "inputs and outputs differ in length");
  }
  input_dim_ = static_cast<std::size_t>(inputs_.front().size());
  output_dim_ = static_cast<std::size_t>(outputs_.front().size());
  if (input_dim_ == 0 || output_dim_ == 0) {
    throw Error(ErrorCode::DimensionMismatch, "input and output dimensions must be >= 1");
  }
  for (std::size_t i = 0; i < inputs_.size(); ++i) {
    if (static_cast<std::size_t>(inputs_[i].size()) != input_dim_ ||
        static_cast<std::size_t>(outputs_[i].size()) != output_dim_) {
      throw Error(ErrorCode::DimensionMismatch, "sample " + std::to_string(i) + " has inconsistent dimension");
    }
  }
  if (demos_.empty()) demos_.push_back({0, inputs_.size()});
  std::size_t expected = 0;
  for (const auto& demo : demos_) {
    if (demo.begin != expected || demo.end <= demo.begin) {
      throw Error(ErrorCode::InvalidArgument, "demonstration ranges must partition the samples");
    }
    expected = demo.end;
  }
  if (expected != inputs_.size()) {
    throw Error(ErrorCode::InvalidArgument, "demonstration ranges must cover every sample");
  }
}

Eigen::MatrixXd DemonstrationSet::joint_matrix() const {
  Eigen::MatrixXd joint(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(joint_dim()));
  for (std::size_t i = 0; i < size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    joint.row(row).head(static_cast<Eigen::Index>(input_dim_)) = inputs_[i].transpose();
    joint.row(row).tail(static_cast<Eigen::Index>(output_dim_)) = outputs_[i].transpose();
  }
  return joint;
}

bool DemonstrationSet::time_driven() const {
  if (input_dim_ != 1) return false;
  for (const auto& demo : demos_) {
    for (std::size_t i = demo.begin + 1; i < demo.end; ++i) {
      if (inputs_[i][0] < inputs_[i - 1][0]) return false;
    }
  }
  return true;
}

}  // namespace gmrgp
