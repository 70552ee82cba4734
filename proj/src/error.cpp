#include "ergoloop/error.hpp"

namespace ergoloop {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::DuplicateNode: return "DuplicateNode";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ProbabilityNotNormalized: return "ProbabilityNotNormalized";
    case ErrorCode::ZeroDivisor: return "ZeroDivisor";
    case ErrorCode::NonpositiveWindow: return "NonpositiveWindow";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NonFiniteSignal: return "NonFiniteSignal";
    case ErrorCode::TooManyMaps: return "TooManyMaps";
    case ErrorCode::DegeneratePairs: return "DegeneratePairs";
    case ErrorCode::InfiniteStateSpace: return "InfiniteStateSpace";
    case ErrorCode::NonpositiveBandwidth: return "NonpositiveBandwidth";
    case ErrorCode::EmptySamples: return "EmptySamples";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SemanticError: return "SemanticError";
    case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

} // namespace ergoloop
