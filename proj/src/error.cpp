#include "pushkit/error.hpp"

namespace pushkit {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Unknown: return "unknown";
    case ErrorCode::TooFewPoints: return "too-few-points";
    case ErrorCode::DegenerateNeighborhood: return "degenerate-neighborhood";
    case ErrorCode::DegenerateCloud: return "degenerate-cloud";
    case ErrorCode::NonPositiveBandwidth: return "non-positive-bandwidth";
    case ErrorCode::NonUnitQuaternion: return "non-unit-quaternion";
    case ErrorCode::KindMismatch: return "kind-mismatch";
    case ErrorCode::NonFiniteScore: return "non-finite-score";
    case ErrorCode::NoContact: return "no-contact";
    case ErrorCode::EmptyModel: return "empty-model";
    case ErrorCode::EmptyFeatures: return "empty-features";
    case ErrorCode::LostContact: return "lost-contact";
    case ErrorCode::UnsupportedCondition: return "unsupported-condition";
    case ErrorCode::AllVetoed: return "all-vetoed";
    case ErrorCode::UnknownShape: return "unknown-shape";
    case ErrorCode::NoContactDuringPush: return "no-contact-during-push";
    case ErrorCode::Io: return "io";
    case ErrorCode::Config: return "config";
  }
  return "unknown";
}

}  // namespace pushkit
