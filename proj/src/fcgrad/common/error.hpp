#pragma once

#include <stdexcept>
#include <string>

namespace fcg {

enum class ErrorCode {
  ContractViolation,
  DegenerateVector,
  Config,
  Io,
  Domain,
  CheckFailed,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool ok, const std::string& what,
                    ErrorCode code = ErrorCode::ContractViolation) {
  if (!ok) throw Error(code, what);
}

}  // namespace fcg
