/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <diffuse/generators.hpp>
#include <diffuse/ir.hpp>
#include <diffuse/kernel.hpp>

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace diffuse {

enum class Constraint : std::uint8_t {
  LaunchDomain,
  TrueDep,
  AntiDep,
  Reduction,
  NoGenerator,  // the task kind has no kernel generator, so it cannot join a fused task
};

[[nodiscard]] std::string_view to_string(Constraint c) noexcept;

/// Why a prefix stopped growing.
struct ConstraintVerdict {
  Constraint constraint{Constraint::LaunchDomain};
  std::size_t blocking_task_index{};
  StoreId store{};
  std::optional<std::pair<Partition, Partition>> partitions{};  // earlier use, blocking use

  friend bool operator==(const ConstraintVerdict&, const ConstraintVerdict&) = default;
};

[[nodiscard]] std::string describe(const ConstraintVerdict& verdict, std::span<const IndexTask> window);
[[nodiscard]] std::string describe_partition(const Partition& partition);

/// Work done by the scale-free analysis. None of these depend on launch-domain volumes.
struct AnalysisCounters {
  std::uint64_t tasks_examined{};
  std::uint64_t constraint_evaluations{};
  std::uint64_t partition_comparisons{};
  std::uint64_t argument_visits{};

  [[nodiscard]] std::uint64_t total() const noexcept
  {
    return tasks_examined + constraint_evaluations + partition_comparisons + argument_visits;
  }
  AnalysisCounters& operator+=(const AnalysisCounters& other) noexcept;
  friend bool operator==(const AnalysisCounters&, const AnalysisCounters&) = default;
};

/// Forward dataflow state over a growing prefix: for each store, the partitions it was written
/// and read through, and whether it was reduced or read/written at all.
class ConstraintTracker {
 public:
  explicit ConstraintTracker(AnalysisCounters* counters = nullptr) : counters_{counters} {}

  /// Checks `task` (at window position `index`) against everything recorded so far, one
  /// constraint at a time in the order LaunchDomain, TrueDep, AntiDep, Reduction.
  [[nodiscard]] std::optional<ConstraintVerdict> check(const IndexTask& task, std::size_t index) const;
  [[nodiscard]] std::optional<ConstraintVerdict> check_one(Constraint which,
                                                           const IndexTask& task,
                                                           std::size_t index) const;
  void record(const IndexTask& task);

 private:
  struct StoreFacts {
    std::vector<Partition> written{};
    std::vector<Partition> read{};
    bool reduced{};
    bool read_or_written{};
  };

  bool same(const Partition& a, const Partition& b) const;

  std::optional<Domain> launch_{};
  std::unordered_map<StoreId, StoreFacts> facts_{};
  AnalysisCounters* counters_;
};

[[nodiscard]] bool check_launch_domain(std::span<const IndexTask> tasks);
[[nodiscard]] bool check_true_dependence(std::span<const IndexTask> tasks);
[[nodiscard]] bool check_anti_dependence(std::span<const IndexTask> tasks);
[[nodiscard]] bool check_reduction(std::span<const IndexTask> tasks);

struct PrefixResult {
  std::size_t length{};
  std::optional<ConstraintVerdict> verdict{};
};

/// Greedy longest fusible prefix. With a registry, tasks without a generator cap the prefix.
[[nodiscard]] PrefixResult longest_fusible_prefix(std::span<const IndexTask> window,
                                                  const GeneratorRegistry* registry = nullptr,
                                                  AnalysisCounters* counters = nullptr);

struct FusedTaskPlan {
  std::size_t prefix_len{};
  /// Task that replaces the prefix. Demoted temporaries are not among its arguments.
  IndexTask fused_task{};
  /// Every distinct (store, partition) of the prefix with its joined privilege, demoted or not.
  std::vector<StoreArg> all_args{};
  /// arg_map[k][p] indexes all_args for argument p of prefix task k.
  std::vector<std::vector<std::size_t>> arg_map{};
  std::set<StoreId> temporaries{};

  [[nodiscard]] bool is_demoted(std::size_t arg) const { return temporaries.contains(all_args[arg].store); }
};

/// Throws NoGenerator when f > 1 and some prefix task has no generator.
[[nodiscard]] FusedTaskPlan build_fused_task(std::span<const IndexTask> window,
                                             std::size_t f,
                                             const GeneratorRegistry& registry);

/// Drops the temporaries from the fused task's external arguments.
void apply_temporaries(FusedTaskPlan& plan, std::set<StoreId> temporaries);

[[nodiscard]] std::string fused_kind(std::span<const IndexTask> prefix);

/// Shape class of a (store, partition) under a launch: equal classes have equal sub-store
/// extents at every launch point.
struct ShapeClassKey {
  std::optional<std::vector<Coord>> uniform{};
  Domain store_shape{};
  Partition partition{};
  Domain launch{};

  friend bool operator==(const ShapeClassKey&, const ShapeClassKey&) = default;
};

[[nodiscard]] ShapeClassKey shape_class_key(const Store& store, const Partition& partition, const Domain& launch);

/// Executable form of a fused plan.
struct CompiledFusion {
  Kernel kernel{};
  /// For every shape class, the all_args entry whose sub-store extents define it.
  std::vector<std::size_t> class_sources{};
};

[[nodiscard]] std::shared_ptr<const CompiledFusion> compile_fused(const FusedTaskPlan& plan,
                                                                  std::span<const IndexTask> prefix,
                                                                  const StoreCatalog& catalog,
                                                                  const GeneratorRegistry& registry,
                                                                  bool run_optimizations = true);

/// Kernel for a single task run on its own. Parameter i is argument i.
[[nodiscard]] std::shared_ptr<const CompiledFusion> compile_single(const IndexTask& task,
                                                                   const StoreCatalog& catalog,
                                                                   const GeneratorRegistry& registry);

}  // namespace diffuse
