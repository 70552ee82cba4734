#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ergoloop {

enum class ErrorCode {
    DuplicateNode,
    UnknownNode,
    DuplicateEdge,
    SelfLoop,
    InvalidGraph,
    IndexOutOfRange,
    DimensionMismatch,
    EmptyInput,
    ProbabilityNotNormalized,
    ZeroDivisor,
    NonpositiveWindow,
    ShapeMismatch,
    NonFiniteSignal,
    TooManyMaps,
    DegeneratePairs,
    InfiniteStateSpace,
    NonpositiveBandwidth,
    EmptySamples,
    InvalidArgument,
    ParseError,
    SemanticError,
    IoError,
};

std::string_view to_string(ErrorCode code);

/// Library-wide exception. The code is stable and meant to be matched on;
/// the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace ergoloop
