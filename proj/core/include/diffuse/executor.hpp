/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <diffuse/fusion.hpp>
#include <diffuse/generators.hpp>
#include <diffuse/ir.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace diffuse {

/// Deterministic small integer in [1, 8] used to initialise element `index` of a store.
[[nodiscard]] double initial_value(std::uint64_t seed, StoreId store, std::size_t index) noexcept;

/// Dense float64 payloads keyed by store id. A store is materialised on first touch, filled
/// with initial_value, so stores that are only ever demoted to locals never take memory.
class StoreHeap {
 public:
  explicit StoreHeap(std::uint64_t seed = 0) : seed_{seed} {}

  void define(const Store& store);
  [[nodiscard]] const StoreCatalog& catalog() const noexcept { return catalog_; }
  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }

  [[nodiscard]] bool allocated(StoreId id) const noexcept { return data_.contains(id); }
  [[nodiscard]] std::vector<double>& data(StoreId id);
  [[nodiscard]] const std::vector<double>* find(StoreId id) const;
  void release(StoreId id);
  [[nodiscard]] std::set<StoreId> allocated_ids() const;

 private:
  std::uint64_t seed_;
  StoreCatalog catalog_{};
  std::unordered_map<StoreId, std::vector<double>> data_{};
};

/// Bitwise comparison of the listed stores; unmaterialised stores compare by their initial
/// contents. Writes a short description of the first difference to `diff` if given.
[[nodiscard]] bool heaps_equal(const StoreHeap& lhs,
                               const StoreHeap& rhs,
                               const std::set<StoreId>& stores,
                               std::string* diff = nullptr);

[[nodiscard]] std::string dump_text(const StoreHeap& heap, const std::set<StoreId>& stores);
[[nodiscard]] std::vector<std::byte> dump_binary(const StoreHeap& heap, const std::set<StoreId>& stores);

/// Task kinds with built-in semantics but no kernel generator. They execute, but never fuse.
using OpaqueImpl = std::function<void(const IndexTask&, StoreHeap&)>;

class OpaqueRegistry {
 public:
  /// MATVEC and SPMV: y = A x with A row-tiled, x replicated and y tiled like A's rows.
  [[nodiscard]] static OpaqueRegistry builtin();

  void add(std::string kind, OpaqueImpl impl);
  [[nodiscard]] bool contains(std::string_view kind) const;
  [[nodiscard]] const OpaqueImpl& at(std::string_view kind) const;

 private:
  std::map<std::string, OpaqueImpl, std::less<>> impls_{};
};

/// Views of every non-demoted fused argument at `point`, plus per-class extents.
[[nodiscard]] KernelBindings bind_point(const FusedTaskPlan& plan,
                                        const CompiledFusion& compiled,
                                        StoreHeap& heap,
                                        const Point& point);

/// Element accesses of one execution summed over every launch point.
[[nodiscard]] MemoryTraffic task_traffic(const FusedTaskPlan& plan,
                                         const CompiledFusion& compiled,
                                         const StoreCatalog& catalog);

/// Runs tasks directly on the heap. Points execute in lexicographic order.
class Executor {
 public:
  Executor(StoreHeap& heap, const GeneratorRegistry& generators, const OpaqueRegistry& opaque)
    : heap_{heap}, generators_{generators}, opaque_{opaque}
  {
  }

  /// Diagnoses overlapping writes between points of one task and aborts with Interference.
  void set_check_interference(bool on) noexcept { check_interference_ = on; }

  void run(const IndexTask& task);
  void run(const FusedTaskPlan& plan, const CompiledFusion& compiled);

 private:
  std::shared_ptr<const CompiledFusion> kernel_for(const IndexTask& task);
  void run_interference_check(const IndexTask& task) const;

  StoreHeap& heap_;
  const GeneratorRegistry& generators_;
  const OpaqueRegistry& opaque_;
  bool check_interference_{};
  std::unordered_map<std::string, std::shared_ptr<const CompiledFusion>> kernels_{};
};

/// A point task that would need data from another point, or that keeps two private copies of
/// overlapping data one of which it writes.
struct ArenaViolation {
  StoreId store{};
  Point first{};
  Point second{};
  std::size_t first_arg{};
  std::size_t second_arg{};
};

[[nodiscard]] std::vector<ArenaViolation> check_isolation(const FusedTaskPlan& plan, const StoreCatalog& catalog);

/// Executes every point against private copies of exactly its own sub-stores, then writes back
/// written sub-stores and sums reduction contributions in point order. Throws
/// CommunicationRequired if the plan has arena violations.
void execute_isolated(const FusedTaskPlan& plan, const CompiledFusion& compiled, StoreHeap& heap);

}  // namespace diffuse
