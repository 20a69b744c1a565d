/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <iosfwd>

namespace diffuse::cli {

/// Entry point of the `diffusekit` tool, callable in-process by tests.
/// Returns 0 on success, 1 on errors, 2 when `run --diff` finds differing heaps.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace diffuse::cli
