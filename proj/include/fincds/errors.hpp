#pragma once

#include <stdexcept>
#include <string>

namespace fincds {

// Error codes shared by the library, the CLI exit-code mapping and the
// python bindings.
enum class ErrorCode {
    MalformedContract,
    UnknownBank,
    ModeMismatch,
    NotAcyclic,
    NotDedicated,
    Degenerate,
    TooManyBranches,
    WeaklySwitchedPresent,
    NoExactReference,
    NegativeSqrtOperand,
    NotSelfMapping,
    NotNormalized,
    DegenerateOutput,
    InvalidParam,
    DegenerateKindRequiresFlag,
    SemanticsMismatch,
    NotACycle,
    NotStronglySwitched,
    AlreadyClosed,
    G3FollowedByG3OrD,
    RuleNotApplicable,
    ContextMismatch,
    NotRewritable,
    ParseError,
    Internal,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

  private:
    ErrorCode code_;
};

// Solver preconditions map to exit code 2 in the CLI.
inline bool is_precondition_failure(ErrorCode c) {
    switch (c) {
        case ErrorCode::NotAcyclic:
        case ErrorCode::NotDedicated:
        case ErrorCode::Degenerate:
        case ErrorCode::TooManyBranches:
        case ErrorCode::WeaklySwitchedPresent:
        case ErrorCode::NoExactReference:
            return true;
        default:
            return false;
    }
}

}  // namespace fincds
