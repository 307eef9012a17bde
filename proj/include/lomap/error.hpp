#pragma once

#include <stdexcept>
#include <string>

namespace lomap {

// Error categories mirror the process exit codes used by the CLI:
// 2 = bad parameters, 3 = data/format problems, 4 = numerical failure.
enum class ErrorKind : int {
  param = 2,
  data = 3,
  numeric = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail_param(const std::string& msg) {
  throw Error(ErrorKind::param, msg);
}
[[noreturn]] inline void fail_data(const std::string& msg) {
  throw Error(ErrorKind::data, msg);
}
[[noreturn]] inline void fail_numeric(const std::string& msg) {
  throw Error(ErrorKind::numeric, msg);
}

inline void require_param(bool ok, const std::string& msg) {
  if (!ok) fail_param(msg);
}
inline void require_data(bool ok, const std::string& msg) {
  if (!ok) fail_data(msg);
}
inline void require_numeric(bool ok, const std::string& msg) {
  if (!ok) fail_numeric(msg);
}

}  // namespace lomap
