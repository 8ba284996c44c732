#pragma once

#include <stdexcept>
#include <string>

namespace adam {

/// Library exception. code is a stable machine-readable tag, e.g.
/// "dimension_mismatch" or "checksum_mismatch".
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what) : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace adam
