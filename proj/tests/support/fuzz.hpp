/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <diffuse/executor.hpp>
#include <diffuse/session.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace diffuse::testing {

struct FuzzOptions {
  std::size_t min_tasks{2};
  std::size_t max_tasks{10};
  double flush_probability{0.1};
  double drop_probability{0.6};
  bool opaque_tasks{true};
};

/// Random legal stream over stores of at most 16 elements per dimension and launch domains of
/// at most 4 points per dimension. Every elementwise argument has the same sub-store extents at
/// every point, written partitions are injective tilings, and values stay small integers.
[[nodiscard]] Program random_program(std::uint64_t seed, const FuzzOptions& options = {});

/// Built-in opaque tasks plus BARRIER(in: R, out: W), out = in + 1, which has no generator.
[[nodiscard]] OpaqueRegistry fuzz_opaque();

struct FuzzSummary {
  std::size_t streams{};
  std::size_t tasks{};
  std::size_t fused_prefixes{};
  std::size_t oracle_checks{};
  std::size_t oracle_incomplete{};
  std::size_t temporaries{};
  std::size_t memo_hits{};
  std::size_t failures{};
  std::vector<std::string> messages{};

  void fail(std::string message);
};

/// Runs the analysis of every stream with the brute-force oracle checking each fused prefix.
[[nodiscard]] FuzzSummary fuzz_soundness(std::uint64_t first_seed, std::size_t count);

/// Compares fused execution against unfused execution for windows {2, 5, 10, 30}, with
/// temporaries and memoization on or off, and in isolated mode.
[[nodiscard]] FuzzSummary fuzz_differential(std::uint64_t first_seed, std::size_t count);

}  // namespace diffuse::testing
