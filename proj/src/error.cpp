#include "wdrc/error.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace wdrc {

namespace {
std::atomic<bool> g_warnings{true};
std::mutex g_log_mutex;
}  // namespace

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid_input";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::OutOfDomain: return "out_of_domain";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::NotConverged: return "not_converged";
    case ErrorKind::Unsupported: return "unsupported";
  }
  return "unknown";
}

int Error::exit_code() const noexcept {
  switch (kind_) {
    case ErrorKind::InvalidInput:
    case ErrorKind::Configuration:
    case ErrorKind::Unsupported:
      return 2;
    default:
      return 3;
  }
}

void log_warning(const std::string& message) {
  if (!g_warnings.load()) return;
  std::lock_guard<std::mutex> lock(g_log_mutex);
  std::cerr << "warning: " << message << '\n';
}

void set_warnings_enabled(bool enabled) { g_warnings.store(enabled); }

bool warnings_enabled() { return g_warnings.load(); }

}  // namespace wdrc
