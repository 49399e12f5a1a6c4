#include "tailbound/error.hpp"

namespace tailbound {

std::string_view code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::config: return "CONFIG";
    case ErrorCode::invalid_domain: return "INVALID_DOMAIN";
    case ErrorCode::contract: return "CONTRACT";
    case ErrorCode::domain: return "DOMAIN";
    case ErrorCode::unbounded_conjugate: return "UNBOUNDED_CONJUGATE";
    case ErrorCode::extrapolation: return "EXTRAPOLATION";
    case ErrorCode::resource: return "RESOURCE";
    case ErrorCode::divergence: return "DIVERGENCE";
    case ErrorCode::summability: return "SUMMABILITY";
    case ErrorCode::centering: return "CENTERING";
    case ErrorCode::degenerate: return "DEGENERATE";
    case ErrorCode::unresolved_sup: return "UNRESOLVED_SUP";
    case ErrorCode::io: return "IO";
  }
  return "UNKNOWN";
}

int exit_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::config: return 2;
    case ErrorCode::io: return 3;
    case ErrorCode::resource: return 5;
    case ErrorCode::invalid_domain:
    case ErrorCode::contract:
    case ErrorCode::domain:
    case ErrorCode::centering:
    case ErrorCode::degenerate: return 4;
    case ErrorCode::unbounded_conjugate:
    case ErrorCode::extrapolation:
    case ErrorCode::divergence:
    case ErrorCode::summability:
    case ErrorCode::unresolved_sup: return 6;
  }
  return 70;
}

}  // namespace tailbound
