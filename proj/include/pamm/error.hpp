#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pamm {

enum class ErrorCode {
  InvalidArgument,
  ParseError,
  DepthNonPositive,
  RayParallelToGround,
  TrackTooShort,
  ZeroVelocity,
  ObjectAtCamera,
  AllSamplesRejected,
  EmptyPatch,
  EmptyTrack,
  MissingFeature,
  InsufficientPairs,
  SingularCovariance,
  DimensionMismatch,
  NoExistingPairs,
  ZeroWeightMass,
  MissingPosePair,
  EmptyDistribution,
  Degenerate,
  TooFewIdentities,
  TruthMissing,
  ConfigInvalid,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// callers (the CLI in particular) can map it to a stable, machine-readable form.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pamm
