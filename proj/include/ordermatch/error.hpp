#pragma once

#include <stdexcept>
#include <string>

namespace om {

// Error categories line up with the C API status codes in ordermatch.h.
enum class ErrorCode {
  kInvalidArgument = 1,
  kConfig = 2,
  kIo = 3,
  kParse = 4,
  kFingerprint = 5,
  kRuntime = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

struct InvalidArgument : Error {
  explicit InvalidArgument(const std::string& what) : Error(ErrorCode::kInvalidArgument, what) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorCode::kConfig, what) {}
};
struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(ErrorCode::kParse, what) {}
};
struct FingerprintMismatch : Error {
  explicit FingerprintMismatch(const std::string& what) : Error(ErrorCode::kFingerprint, what) {}
};
struct RuntimeFailure : Error {
  explicit RuntimeFailure(const std::string& what) : Error(ErrorCode::kRuntime, what) {}
};

}  // namespace om
