/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace diffuse {

enum class ErrorCode {
  MalformedPartition,
  MalformedTask,
  OracleTooLarge,
  NoGenerator,
  GeneratorMismatch,
  MalformedKernel,
  RefUnderflow,
  UnknownId,
  OutOfBounds,
  PrivilegeViolation,
  CommunicationRequired,
  Interference,
  UnknownTask,
  SoundnessViolation,
  Trace,
  Internal,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code lets callers
/// (the CLI, the acceptance harness) classify failures without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace diffuse
