#include "calderon/error.hpp"

namespace calderon {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::size_limit: return "size-limit";
    case ErrorKind::geometry: return "geometry";
    case ErrorKind::corkscrew: return "corkscrew";
    case ErrorKind::meshing: return "meshing";
    case ErrorKind::ellipticity: return "ellipticity";
    case ErrorKind::coercivity: return "coercivity";
    case ErrorKind::solver: return "solver";
    case ErrorKind::iteration: return "iteration";
    case ErrorKind::capability: return "capability";
    case ErrorKind::parse: return "parse";
    case ErrorKind::config: return "configuration";
    case ErrorKind::invariant: return "invariant";
  }
  return "unknown";
}

}  // namespace calderon
