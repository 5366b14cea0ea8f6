#include "spdc/error.hpp"

namespace spdc {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Config: return "config";
    case ErrorKind::Format: return "format";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Contract: return "contract";
  }
  return "unknown";
}

}  // namespace spdc
