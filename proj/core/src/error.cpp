#include "alignlab/error.hpp"

namespace alignlab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid input";
    case ErrorKind::shape: return "shape mismatch";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::too_few_points: return "too few points";
    case ErrorKind::degenerate_input: return "degenerate input";
    case ErrorKind::divergent: return "divergent";
    case ErrorKind::infinite_snr: return "infinite SNR";
    case ErrorKind::training_diverged: return "training diverged";
    case ErrorKind::format: return "format error";
    case ErrorKind::io: return "I/O error";
    case ErrorKind::config: return "configuration error";
    case ErrorKind::sweep_failed: return "sweep failed";
  }
  return "unknown error";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace alignlab
