#pragma once

#include <stdexcept>
#include <string>

namespace pushkit {

enum class ErrorCode {
  Unknown = 1,
  TooFewPoints,
  DegenerateNeighborhood,
  DegenerateCloud,
  NonPositiveBandwidth,
  NonUnitQuaternion,
  KindMismatch,
  NonFiniteScore,
  NoContact,
  EmptyModel,
  EmptyFeatures,
  LostContact,
  UnsupportedCondition,
  AllVetoed,
  UnknownShape,
  NoContactDuringPush,
  Io,
  Config,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

const char* error_code_name(ErrorCode code);

}  // namespace pushkit
