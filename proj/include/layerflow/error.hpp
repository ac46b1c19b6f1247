// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace layerflow {

enum class ErrorCode {
  InvalidArgument = 1,
  GridMismatch,
  Singular,
  Degenerate,
  Diverged,
  Config,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace layerflow
