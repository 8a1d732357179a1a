// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace nnfs {

/// Coarse failure category. The CLI maps each kind onto a process exit code.
enum class ErrorKind {
  kUsage,         ///< bad configuration or arguments (exit 2)
  kInsufficient,  ///< not enough samples to build an episode (exit 3)
  kNumeric,       ///< degenerate or non-finite arithmetic (exit 4)
  kFormat,        ///< malformed or invalid data file (exit 2)
  kIo,            ///< open/read/write failure (exit 2)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace nnfs
