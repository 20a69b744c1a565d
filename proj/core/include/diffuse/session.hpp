/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <diffuse/engine.hpp>
#include <diffuse/executor.hpp>
#include <diffuse/generators.hpp>
#include <diffuse/ir.hpp>
#include <diffuse/temporaries.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace diffuse {

////////////////////////////////////////////////////
// Programs
////////////////////////////////////////////////////

/// Creates a store holding one application reference.
struct CreateStore {
  StoreId id{};
  Domain shape{};

  friend bool operator==(const CreateStore&, const CreateStore&) = default;
};

struct Launch {
  IndexTask task{};

  friend bool operator==(const Launch&, const Launch&) = default;
};

/// Drops one application reference.
struct DropRef {
  StoreId id{};

  friend bool operator==(const DropRef&, const DropRef&) = default;
};

struct Flush {
  friend bool operator==(const Flush&, const Flush&) = default;
};

using Command = std::variant<CreateStore, Launch, DropRef, Flush>;

/// A partition bound to a store under a user-visible name.
struct PartitionDecl {
  std::string name{};
  StoreId store{};
  Partition partition{};

  friend bool operator==(const PartitionDecl&, const PartitionDecl&) = default;
};

/// A replayable application: commands plus the names used to print them.
struct Program {
  std::vector<Command> commands{};
  std::map<StoreId, std::string> store_names{};
  std::vector<PartitionDecl> partitions{};

  /// Helpers used by generators and tests. `create` returns a fresh id.
  StoreId create(Domain shape, std::string name = {});
  const Partition& declare(StoreId store, std::string name, Partition partition);
  void launch(IndexTask task);
  void drop(StoreId id);
  void flush();

  [[nodiscard]] std::string store_name(StoreId id) const;
  /// Name of a declared partition of `store`, or a structural description.
  [[nodiscard]] std::string partition_name(StoreId store, const Partition& partition) const;
  [[nodiscard]] std::size_t task_count() const;
  /// Stores that still hold an application reference after the last command.
  [[nodiscard]] std::set<StoreId> live_at_end() const;

 private:
  std::uint32_t next_id_{};
};

////////////////////////////////////////////////////
// Sessions
////////////////////////////////////////////////////

struct SessionOptions {
  EngineOptions engine{};
  std::uint64_t seed{};
  /// Run every emitted task through per-point private arenas instead of the shared heap.
  bool isolated{false};
  /// Analyse and account traffic without running kernels.
  bool execute{true};
  /// Abort when two points of one task write overlapping data.
  bool check_interference{false};
  /// Keep payloads of collectable stores, for inspection in tests.
  bool keep_dropped_stores{false};
  std::shared_ptr<MemoCache> cache{};
};

struct Report {
  std::uint64_t tasks_in{};
  std::uint64_t tasks_out{};
  std::uint64_t fused_prefixes{};
  std::uint64_t temporaries_eliminated{};
  std::uint64_t memo_hits{};
  std::uint64_t memo_misses{};
  std::uint64_t loads{};
  std::uint64_t stores{};
  std::vector<std::size_t> fused_prefix_sizes{};
  AnalysisCounters counters{};
};

/// Emitted task as seen after execution, for reports and tests.
struct EmittedSummary {
  std::string kind{};
  std::size_t prefix_len{};
  std::vector<StoreId> temporaries{};
  MemoryTraffic traffic{};
};

/// Owns the store catalog, reference counts, heap, fusion engine and executor of one
/// application run. Not copyable or movable: the engine and executor hold references.
class Session {
 public:
  explicit Session(SessionOptions options = {},
                   GeneratorRegistry generators = GeneratorRegistry::builtin(),
                   OpaqueRegistry opaque = OpaqueRegistry::builtin());
  Session(const Session&)            = delete;
  Session& operator=(const Session&) = delete;

  void create_store(StoreId id, Domain shape);
  void launch(IndexTask task);
  void drop_ref(StoreId id);
  void flush();
  void apply(const Command& command);
  /// Applies every command, then flushes.
  void run(const Program& program);

  [[nodiscard]] Report report() const;
  [[nodiscard]] const StoreHeap& heap() const noexcept { return heap_; }
  [[nodiscard]] StoreHeap& heap() noexcept { return heap_; }
  [[nodiscard]] const RefState& refs() const noexcept { return refs_; }
  [[nodiscard]] const FusionEngine& engine() const noexcept { return engine_; }
  [[nodiscard]] const std::vector<EmittedSummary>& emitted() const noexcept { return emitted_; }
  [[nodiscard]] const StoreCatalog& catalog() const noexcept { return heap_.catalog(); }

  /// Called after each emitted task executes.
  void on_emit(std::function<void(const EmittedTask&)> fn) { observer_ = std::move(fn); }

 private:
  void execute(EmittedTask task);
  void collect(StoreId id);

  SessionOptions options_;
  GeneratorRegistry generators_;
  OpaqueRegistry opaque_;
  StoreHeap heap_;
  RefState refs_{};
  Executor executor_;
  FusionEngine engine_;
  MemoryTraffic traffic_{};
  std::vector<EmittedSummary> emitted_{};
  std::function<void(const EmittedTask&)> observer_{};
};

struct RunResult {
  StoreHeap heap{};
  Report report{};
  std::set<StoreId> live{};
  std::vector<EmittedSummary> emitted{};
};

/// Reference semantics: every task runs alone, in program order, with no analysis.
[[nodiscard]] RunResult execute_sequential(const Program& program,
                                           std::uint64_t seed,
                                           const GeneratorRegistry& generators = GeneratorRegistry::builtin(),
                                           const OpaqueRegistry& opaque = OpaqueRegistry::builtin());

[[nodiscard]] RunResult execute_with_fusion(const Program& program,
                                            const SessionOptions& options,
                                            const GeneratorRegistry& generators = GeneratorRegistry::builtin(),
                                            const OpaqueRegistry& opaque = OpaqueRegistry::builtin());

}  // namespace diffuse
