/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <benchmark/benchmark.h>

// The packaged benchmark_main archive is LTO bytecode tied to one compiler build.
BENCHMARK_MAIN();
