#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ltime {

enum class Errc {
  InvalidArgument,
  NonFiniteSupport,
  MeanMismatch,
  NonZeroMean,
  InfeasibleY,
  OutOfRegime,
  OutOfInterval,
  NegativeX,
  AllPathsCapped,
  ParseError,
  ValidationError,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the Errc codes so
/// callers (the CLI in particular) can map it to an exit status.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ltime
