#include "thermalnet/error.hpp"

namespace thermalnet {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::dimension: return "dimension error";
    case ErrorKind::index: return "index error";
    case ErrorKind::degenerate_model: return "degenerate model";
    case ErrorKind::capacity: return "capacity error";
    case ErrorKind::query: return "query error";
    case ErrorKind::conditioning: return "conditioning error";
    case ErrorKind::estimation: return "estimation error";
    case ErrorKind::config: return "config error";
    case ErrorKind::parse: return "parse error";
    case ErrorKind::model: return "model error";
  }
  return "error";
}

}  // namespace thermalnet
