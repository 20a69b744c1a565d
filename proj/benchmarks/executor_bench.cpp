/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <diffuse/session.hpp>
#include <diffuse/workloads.hpp>

#include <benchmark/benchmark.h>

namespace diffuse::bench {
namespace {

// End-to-end stencil iterations through the interpreter, fused against unfused.
void BM_StencilRun(benchmark::State& state)
{
  const bool fusion = state.range(0) != 0;
  const auto prog = make_stencil(WorkloadParams{128, 4, 4});
  for (auto _ : state) {
    SessionOptions o;
    o.engine.fusion    = fusion;
    o.engine.temp_elim = fusion;
    const auto out = execute_with_fusion(prog, o);
    benchmark::DoNotOptimize(out.report.loads);
  }
  state.SetLabel(fusion ? "fused" : "unfused");
}
BENCHMARK(BM_StencilRun)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BlackscholesRun(benchmark::State& state)
{
  const bool fusion = state.range(0) != 0;
  const auto prog = make_blackscholes_chain(WorkloadParams{1 << 14, 4, 1});
  for (auto _ : state) {
    SessionOptions o;
    o.engine.fusion    = fusion;
    o.engine.temp_elim = fusion;
    const auto out = execute_with_fusion(prog, o);
    benchmark::DoNotOptimize(out.report.stores);
  }
  state.SetLabel(fusion ? "fused" : "unfused");
}
BENCHMARK(BM_BlackscholesRun)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace diffuse::bench
