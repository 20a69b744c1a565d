/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <diffuse/ir.hpp>

#include <cstddef>
#include <set>
#include <span>
#include <unordered_map>

namespace diffuse {

/// Split reference counts: references held by the application and references held by tasks
/// the runtime has buffered but not yet executed.
class RefState {
 public:
  /// A newly created store hands the application one reference.
  void create(StoreId id);
  void add_app_ref(StoreId id);
  /// Throws RefUnderflow when the application holds no reference.
  void drop_app_ref(StoreId id);
  void add_runtime_ref(StoreId id);
  void drop_runtime_ref(StoreId id);

  [[nodiscard]] bool known(StoreId id) const noexcept { return counts_.contains(id); }
  [[nodiscard]] std::size_t app_refs(StoreId id) const;
  [[nodiscard]] std::size_t runtime_refs(StoreId id) const;
  /// No references of either kind remain.
  [[nodiscard]] bool collectable(StoreId id) const;
  [[nodiscard]] std::set<StoreId> live_app_refs() const;

 private:
  struct Counts {
    std::size_t app{};
    std::size_t runtime{};
  };
  const Counts& at(StoreId id) const;

  std::unordered_map<StoreId, Counts> counts_{};
};

/// Stores of prefix [0, f) that are produced and consumed inside the prefix:
///   1. every read of S through P in the prefix follows a covering write of S through P,
///   2. no task in window[f..] or `pending_after` reads or reduces S,
///   3. the application holds no reference to S.
[[nodiscard]] std::set<StoreId> find_temporaries(std::span<const IndexTask> window,
                                                 std::size_t f,
                                                 std::span<const IndexTask> pending_after,
                                                 const std::set<StoreId>& live_app_refs,
                                                 const StoreCatalog& catalog);

[[nodiscard]] std::set<StoreId> find_temporaries(const TaskWindow& window, std::size_t f, const StoreCatalog& catalog);

}  // namespace diffuse
