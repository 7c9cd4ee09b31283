#include "pamm/error.hpp"

namespace pamm {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DepthNonPositive: return "DepthNonPositive";
    case ErrorCode::RayParallelToGround: return "RayParallelToGround";
    case ErrorCode::TrackTooShort: return "TrackTooShort";
    case ErrorCode::ZeroVelocity: return "ZeroVelocity";
    case ErrorCode::ObjectAtCamera: return "ObjectAtCamera";
    case ErrorCode::AllSamplesRejected: return "AllSamplesRejected";
    case ErrorCode::EmptyPatch: return "EmptyPatch";
    case ErrorCode::EmptyTrack: return "EmptyTrack";
    case ErrorCode::MissingFeature: return "MissingFeature";
    case ErrorCode::InsufficientPairs: return "InsufficientPairs";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoExistingPairs: return "NoExistingPairs";
    case ErrorCode::ZeroWeightMass: return "ZeroWeightMass";
    case ErrorCode::MissingPosePair: return "MissingPosePair";
    case ErrorCode::EmptyDistribution: return "EmptyDistribution";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::TooFewIdentities: return "TooFewIdentities";
    case ErrorCode::TruthMissing: return "TruthMissing";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

}  // namespace pamm
