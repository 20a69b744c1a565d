/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <diffuse/error.hpp>

#include <fmt/format.h>

namespace diffuse {

std::string_view to_string(ErrorCode code) noexcept
{
  switch (code) {
    case ErrorCode::MalformedPartition: return "malformed-partition";
    case ErrorCode::MalformedTask: return "malformed-task";
    case ErrorCode::OracleTooLarge: return "oracle-too-large";
    case ErrorCode::NoGenerator: return "no-generator";
    case ErrorCode::GeneratorMismatch: return "generator-mismatch";
    case ErrorCode::MalformedKernel: return "malformed-kernel";
    case ErrorCode::RefUnderflow: return "ref-underflow";
    case ErrorCode::UnknownId: return "unknown-id";
    case ErrorCode::OutOfBounds: return "out-of-bounds";
    case ErrorCode::PrivilegeViolation: return "privilege-violation";
    case ErrorCode::CommunicationRequired: return "communication-required";
    case ErrorCode::Interference: return "interference";
    case ErrorCode::UnknownTask: return "unknown-task";
    case ErrorCode::SoundnessViolation: return "soundness-violation";
    case ErrorCode::Trace: return "trace";
    case ErrorCode::Internal: return "internal";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& message)
  : std::runtime_error{fmt::format("{}: {}", to_string(code), message)}, code_{code}
{
}

}  // namespace diffuse
