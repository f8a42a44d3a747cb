#pragma once

#include <stdexcept>
#include <string>

namespace smoothfit {

/// Failure categories shared by every module. The C API maps these one to one
/// onto sf_status values.
enum class ErrorCode {
  invalid_input,
  invalid_bandwidth,
  domain,
  empty_neighborhood,
  singular_moment,
  non_convergence,
  selector_failure,
  sampler_degenerate,
  numeric,
  io,
};

const char* to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Thrown by the backfitting solvers when the sweep budget runs out.
class NonConvergence : public Error {
 public:
  NonConvergence(const std::string& what, double last_change, int sweeps)
      : Error(ErrorCode::non_convergence, what),
        last_change_(last_change),
        sweeps_(sweeps) {}

  double last_change() const noexcept { return last_change_; }
  int sweeps() const noexcept { return sweeps_; }

 private:
  double last_change_;
  int sweeps_;
};

}  // namespace smoothfit
