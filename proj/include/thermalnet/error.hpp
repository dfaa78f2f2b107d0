#pragma once

#include <stdexcept>
#include <string>

namespace thermalnet {

enum class ErrorKind {
  dimension,
  index,
  degenerate_model,
  capacity,
  query,
  conditioning,
  estimation,
  config,
  parse,
  model,
};

const char* to_string(ErrorKind kind);

/// Single exception type for the library; `kind()` distinguishes the failure
/// class so callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace thermalnet
