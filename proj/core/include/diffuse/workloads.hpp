/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <diffuse/session.hpp>

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace diffuse {

struct WorkloadParams {
  /// Elements per dimension (interior size for the stencil).
  std::size_t size{32};
  /// Launch points per dimension; must divide `size`.
  std::size_t nodes{2};
  std::size_t iters{1};
};

/// 5-point stencil over five aliased views of one grid: 4 ADD, MULT, COPY per iteration.
[[nodiscard]] Program make_stencil(const WorkloadParams& params);
/// Opaque MATVEC followed by two elementwise updates of the iterate.
[[nodiscard]] Program make_jacobi(const WorkloadParams& params);
/// 67 elementwise operations from five inputs to two outputs.
[[nodiscard]] Program make_blackscholes_chain(const WorkloadParams& params);
/// Conjugate-gradient shaped loop: an opaque SPMV barrier, two reductions and their consumers.
[[nodiscard]] Program make_cg_like(const WorkloadParams& params);

[[nodiscard]] const std::vector<std::string>& workload_names();
/// Throws Error{UnknownTask} for names outside workload_names().
[[nodiscard]] Program make_workload(std::string_view name, const WorkloadParams& params);
[[nodiscard]] std::size_t tasks_per_iteration(std::string_view name);

}  // namespace diffuse
