#include "brainergm/errors.hpp"

namespace brainergm {

std::string_view to_string(ErrorClass c) noexcept {
  switch (c) {
    case ErrorClass::usage: return "usage";
    case ErrorClass::data: return "data";
    case ErrorClass::model: return "model";
    case ErrorClass::convergence: return "convergence";
    case ErrorClass::degeneracy: return "degeneracy";
    case ErrorClass::cancelled: return "cancelled";
    case ErrorClass::internal: return "internal";
  }
  return "internal";
}

}  // namespace brainergm
