/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <diffuse/fusion.hpp>
#include <diffuse/ir.hpp>

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace diffuse {

struct CanonicalArg {
  std::uint32_t store{};
  std::uint32_t partition{};
  Privilege privilege{Privilege::Read};

  friend bool operator==(const CanonicalArg&, const CanonicalArg&) = default;
};

struct CanonicalTask {
  std::string kind{};
  std::uint32_t launch{};  // index into the window's distinct launch domains
  std::size_t launch_rank{};
  std::vector<CanonicalArg> args{};
  std::vector<ScalarParam> scalars{};

  friend bool operator==(const CanonicalTask&, const CanonicalTask&) = default;
};

/// A window with stores, partitions and launch domains replaced by their first-use positions.
/// Two windows have equal canonical tasks exactly when one is a renaming of the other.
struct CanonicalStream {
  std::vector<CanonicalTask> tasks{};
  // Binding tables: canonical index -> concrete object in this window.
  std::vector<StoreId> stores{};
  std::vector<Partition> partitions{};
  std::vector<Domain> launches{};

  [[nodiscard]] bool same_form(const CanonicalStream& other) const { return tasks == other.tasks; }
  /// One line per task, e.g. "T1([(0,R), (1,W)])".
  [[nodiscard]] std::string to_string() const;
};

[[nodiscard]] CanonicalStream canonicalize(std::span<const IndexTask> window);

/// Everything the analysis result depends on, flattened into bytes: the canonical form without
/// scalar values, the application liveness of every canonical store, per-argument coverage and
/// shape-class patterns, store ranks and an options word.
struct MemoKey {
  std::string bytes{};
  std::size_t hash{};

  friend bool operator==(const MemoKey& a, const MemoKey& b) { return a.hash == b.hash && a.bytes == b.bytes; }
};

[[nodiscard]] MemoKey make_memo_key(const CanonicalStream& canon,
                                    std::span<const IndexTask> window,
                                    const std::set<StoreId>& live_app_refs,
                                    const StoreCatalog& catalog,
                                    std::uint64_t options_word);

/// Analysis and compiled kernel for one window, expressed over canonical indices.
struct MemoEntry {
  std::size_t prefix_len{};
  struct Verdict {
    Constraint constraint{};
    std::size_t blocking_task_index{};
    std::optional<std::uint32_t> store{};
    std::optional<std::pair<std::uint32_t, std::uint32_t>> partitions{};
  };
  std::optional<Verdict> verdict{};
  std::vector<CanonicalArg> all_args{};
  std::vector<std::vector<std::size_t>> arg_map{};
  std::vector<std::uint32_t> temporaries{};
  std::string fused_kind{};
  std::shared_ptr<const CompiledFusion> compiled{};  // null for single-task prefixes
};

[[nodiscard]] MemoEntry make_memo_entry(const CanonicalStream& canon,
                                        const PrefixResult& prefix,
                                        const FusedTaskPlan& plan,
                                        std::shared_ptr<const CompiledFusion> compiled);

/// Rebinds a memoized plan onto the concrete window `canon` was computed from.
[[nodiscard]] FusedTaskPlan replay_plan(const MemoEntry& entry,
                                        const CanonicalStream& canon,
                                        std::span<const IndexTask> window);
[[nodiscard]] std::optional<ConstraintVerdict> replay_verdict(const MemoEntry& entry, const CanonicalStream& canon);

/// Concurrent readers, serialized writers; entries never change after insertion.
class MemoCache {
 public:
  [[nodiscard]] std::shared_ptr<const MemoEntry> lookup(const MemoKey& key) const;
  /// Keeps the existing entry if the key is already present.
  void insert(const MemoKey& key, std::shared_ptr<const MemoEntry> entry);

  [[nodiscard]] std::size_t size() const;
  [[nodiscard]] std::uint64_t hits() const noexcept { return hits_.load(); }
  [[nodiscard]] std::uint64_t misses() const noexcept { return misses_.load(); }

 private:
  struct KeyHash {
    std::size_t operator()(const MemoKey& k) const noexcept { return k.hash; }
  };

  mutable std::shared_mutex mutex_{};
  std::unordered_map<MemoKey, std::shared_ptr<const MemoEntry>, KeyHash> entries_{};
  mutable std::atomic<std::uint64_t> hits_{0};
  mutable std::atomic<std::uint64_t> misses_{0};
};

}  // namespace diffuse
