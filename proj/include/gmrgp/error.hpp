#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gmrgp {

enum class ErrorCode {
  EmptyData,
  DegenerateComponent,
  NonFiniteInput,
  DimensionMismatch,
  SingularInputBlock,
  IndexOutOfRange,
  FactorizationFailure,
  AllStartsFailed,
  DuplicateViaInput,
  NonPositiveParam,
  IllConditionedRiccati,
  ParseError,
  RaggedDemo,
  NonFiniteValue,
  InvalidArgument,
  IoError,
};

std::string_view error_name(ErrorCode code) noexcept;

/// Exception carrying a machine-readable code and optional key/value context
/// (row, column, batch index, ...).
class Error : public std::runtime_error {
 public:
  using Context = std::vector<std::pair<std::string, std::string>>;

  Error(ErrorCode code, const std::string& message, Context context = {})
      : std::runtime_error(message), code_(code), context_(std::move(context)) {}

  ErrorCode code() const noexcept { return code_; }
  const Context& context() const noexcept { return context_; }

  /// Copy of this error with one more context entry prepended.
  Error with_context(std::string key, std::string value) const;

 private:
  ErrorCode code_;
  Context context_;
};

}  // namespace gmrgp
