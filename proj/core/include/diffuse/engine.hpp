/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <diffuse/fusion.hpp>
#include <diffuse/generators.hpp>
#include <diffuse/memo.hpp>
#include <diffuse/oracle.hpp>
#include <diffuse/temporaries.hpp>

#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace diffuse {

struct EngineOptions {
  std::size_t initial_window{10};
  std::size_t max_window{256};
  /// Double the window (up to max_window) whenever a full window fuses entirely.
  bool adaptive_window{true};
  bool fusion{true};
  bool memo{true};
  bool temp_elim{true};
  bool optimize_kernels{true};
  /// Cross-check every fused prefix with the brute-force oracle; throws SoundnessViolation.
  bool oracle_check{false};
  std::size_t oracle_cap{kDefaultOracleCap};
  /// Off only in negative-control tests: fuse any run of generator-backed tasks that share a
  /// launch domain, ignoring the dependence constraints.
  bool enforce_constraints{true};

  /// The options that change analysis results, packed for memo keys.
  [[nodiscard]] std::uint64_t analysis_word() const noexcept;
};

/// One task leaving the engine: either a fused prefix or a single task passed through.
struct EmittedTask {
  FusedTaskPlan plan{};
  std::vector<IndexTask> originals{};
  /// Kernel to run; null for tasks without a generator (opaque built-ins).
  std::shared_ptr<const CompiledFusion> compiled{};

  [[nodiscard]] bool fused() const noexcept { return plan.prefix_len > 1; }
};

/// One analysis of the buffered window.
struct WindowRecord {
  std::size_t buffered{};
  std::size_t prefix_len{};
  /// Kind of the emitted task and of the task that stopped the prefix, if any.
  std::string kind{};
  std::string blocking_kind{};
  bool memo_hit{};
  bool emitted{};
  std::uint64_t constraint_evaluations{};
  std::optional<ConstraintVerdict> verdict{};
  std::string verdict_text{};
  std::vector<StoreId> temporaries{};
};

struct EngineStats {
  std::uint64_t tasks_in{};
  std::uint64_t tasks_out{};
  std::uint64_t fused_prefixes{};
  std::vector<std::size_t> fused_prefix_sizes{};
  std::uint64_t temporaries_eliminated{};
  std::uint64_t memo_hits{};
  std::uint64_t memo_misses{};
  std::uint64_t analyses{};
  std::uint64_t oracle_checks{};
  /// Prefixes the oracle would have let grow by one more task.
  std::uint64_t oracle_incomplete{};
  AnalysisCounters counters{};
  std::vector<WindowRecord> windows{};
};

/// Buffers submitted tasks and emits fused prefixes in program order.
class FusionEngine {
 public:
  using Sink = std::function<void(EmittedTask)>;

  FusionEngine(const StoreCatalog& catalog,
               const RefState& refs,
               const GeneratorRegistry& registry,
               EngineOptions options,
               std::shared_ptr<MemoCache> cache = nullptr);

  void submit(IndexTask task, const Sink& sink);
  /// Emits everything buffered.
  void flush(const Sink& sink);

  [[nodiscard]] std::size_t buffered() const noexcept { return buffer_.size(); }
  [[nodiscard]] std::size_t window_size() const noexcept { return window_; }
  [[nodiscard]] const EngineStats& stats() const noexcept { return stats_; }
  [[nodiscard]] const EngineOptions& options() const noexcept { return options_; }
  [[nodiscard]] const std::shared_ptr<MemoCache>& cache() const noexcept { return cache_; }

 private:
  struct Analysis;

  void process(bool flushing, const Sink& sink);
  Analysis analyze();
  void emit(Analysis& analysis, const Sink& sink);
  std::shared_ptr<const CompiledFusion> compile(const FusedTaskPlan& plan, std::span<const IndexTask> prefix) const;

  const StoreCatalog& catalog_;
  const RefState& refs_;
  const GeneratorRegistry& registry_;
  EngineOptions options_;
  std::shared_ptr<MemoCache> cache_;
  std::vector<IndexTask> buffer_{};
  std::size_t window_;
  EngineStats stats_{};
};

}  // namespace diffuse
