#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cardpsm {

enum class ErrorCode {
  malformed_pair,
  odd_length,
  out_of_range,
  not_one_hot,
  degree_mismatch,
  support_too_large,
  bad_weights,
  bad_pile_spec,
  not_prime,
  modulus_too_small,
  arity_mismatch,
  outcome_not_in_support,
  strategy_violation,
  output_undefined,
  pile_pattern_unsafe,
  bad_context,
  too_few_parties,
  too_few_samples,
  incompatible_route,
  parse_error,
  invalid_argument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::malformed_pair: return "MalformedPair";
    case ErrorCode::odd_length: return "OddLength";
    case ErrorCode::out_of_range: return "OutOfRange";
    case ErrorCode::not_one_hot: return "NotOneHot";
    case ErrorCode::degree_mismatch: return "DegreeMismatch";
    case ErrorCode::support_too_large: return "SupportTooLarge";
    case ErrorCode::bad_weights: return "BadWeights";
    case ErrorCode::bad_pile_spec: return "BadPileSpec";
    case ErrorCode::not_prime: return "NotPrime";
    case ErrorCode::modulus_too_small: return "ModulusTooSmall";
    case ErrorCode::arity_mismatch: return "ArityMismatch";
    case ErrorCode::outcome_not_in_support: return "OutcomeNotInSupport";
    case ErrorCode::strategy_violation: return "StrategyViolation";
    case ErrorCode::output_undefined: return "OutputUndefined";
    case ErrorCode::pile_pattern_unsafe: return "PilePatternUnsafe";
    case ErrorCode::bad_context: return "BadContext";
    case ErrorCode::too_few_parties: return "TooFewParties";
    case ErrorCode::too_few_samples: return "TooFewSamples";
    case ErrorCode::incompatible_route: return "IncompatibleRoute";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::invalid_argument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure in the library is reported as an Error carrying a stable code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cardpsm
