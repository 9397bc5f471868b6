#include "manibo/error.hpp"

namespace manibo {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid-input";
    case ErrorCode::Domain: return "domain";
    case ErrorCode::DegenerateProjection: return "degenerate-projection";
    case ErrorCode::AmbiguousSubspace: return "ambiguous-subspace";
    case ErrorCode::IllConditioned: return "ill-conditioned-model";
    case ErrorCode::FittingFailed: return "fitting-failed";
    case ErrorCode::EmptyNeighborhood: return "empty-neighborhood";
    case ErrorCode::Config: return "config";
  }
  return "unknown";
}

}  // namespace manibo
