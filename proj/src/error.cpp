#include "gmrgp/error.hpp"

namespace gmrgp {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::DegenerateComponent: return "DegenerateComponent";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularInputBlock: return "SingularInputBlock";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::FactorizationFailure: return "FactorizationFailure";
    case ErrorCode::AllStartsFailed: return "AllStartsFailed";
    case ErrorCode::DuplicateViaInput: return "DuplicateViaInput";
    case ErrorCode::NonPositiveParam: return "NonPositiveParam";
    case ErrorCode::IllConditionedRiccati: return "IllConditionedRiccati";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::RaggedDemo: return "RaggedDemo";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error Error::with_context(std::string key, std::string value) const {
  Context context = context_;
  context.insert(context.begin(), {std::move(key), std::move(value)});
  return Error(code_, what(), std::move(context));
}

}  // namespace gmrgp
