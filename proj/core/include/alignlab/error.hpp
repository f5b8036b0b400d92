#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace alignlab {

enum class ErrorKind {
  invalid_input,
  shape,
  domain,
  too_few_points,
  degenerate_input,
  divergent,          // closed form diverges (e.g. asymptotic error at alpha = 1)
  infinite_snr,
  training_diverged,
  format,
  io,
  config,
  sweep_failed,
};

std::string_view to_string(ErrorKind kind);

/// Single exception type for the library; callers dispatch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

}  // namespace alignlab
