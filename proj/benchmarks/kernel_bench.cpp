/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "common.hpp"

#include <diffuse/fusion.hpp>
#include <diffuse/workloads.hpp>

#include <benchmark/benchmark.h>

namespace diffuse::bench {
namespace {

// Compose, loop fusion and scalarization of a chain of `n` blackscholes tasks.
void BM_CompileChain(benchmark::State& state)
{
  const auto prog = make_blackscholes_chain(WorkloadParams{64, 2, 1});
  const auto tasks = tasks_of(prog);
  const auto catalog = catalog_of(prog);
  const auto registry = GeneratorRegistry::builtin();
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::span<const IndexTask> prefix{tasks.data(), n};
  const auto plan = build_fused_task(prefix, n, registry);
  const bool optimize = state.range(1) != 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(compile_fused(plan, prefix, catalog, registry, optimize));
  }
  state.SetLabel(optimize ? "optimized" : "composed");
}
BENCHMARK(BM_CompileChain)->ArgsProduct({{2, 16, 67}, {0, 1}});

}  // namespace
}  // namespace diffuse::bench
