/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <diffuse/error.hpp>
#include <diffuse/temporaries.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <vector>

namespace diffuse {

void RefState::create(StoreId id)
{
  if (counts_.contains(id)) {
    throw Error{ErrorCode::MalformedTask, fmt::format("store {} created twice", id.value)};
  }
  counts_[id] = Counts{1, 0};
}

const RefState::Counts& RefState::at(StoreId id) const
{
  auto it = counts_.find(id);
  if (it == counts_.end()) {
    throw Error{ErrorCode::UnknownId, fmt::format("unknown store {}", id.value)};
  }
  return it->second;
}

void RefState::add_app_ref(StoreId id)
{
  at(id);
  ++counts_[id].app;
}

void RefState::drop_app_ref(StoreId id)
{
  if (at(id).app == 0) {
    throw Error{ErrorCode::RefUnderflow,
                fmt::format("application reference to store {} dropped more often than taken", id.value)};
  }
  --counts_[id].app;
}

void RefState::add_runtime_ref(StoreId id)
{
  at(id);
  ++counts_[id].runtime;
}

void RefState::drop_runtime_ref(StoreId id)
{
  if (at(id).runtime == 0) {
    throw Error{ErrorCode::RefUnderflow, fmt::format("runtime reference count of store {} underflows", id.value)};
  }
  --counts_[id].runtime;
}

std::size_t RefState::app_refs(StoreId id) const { return at(id).app; }
std::size_t RefState::runtime_refs(StoreId id) const { return at(id).runtime; }

bool RefState::collectable(StoreId id) const
{
  const auto& c = at(id);
  return c.app == 0 && c.runtime == 0;
}

std::set<StoreId> RefState::live_app_refs() const
{
  std::set<StoreId> out;
  for (const auto& [id, c] : counts_) {
    if (c.app > 0) {
      out.insert(id);
    }
  }
  return out;
}

std::set<StoreId> find_temporaries(std::span<const IndexTask> window,
                                   std::size_t f,
                                   std::span<const IndexTask> pending_after,
                                   const std::set<StoreId>& live_app_refs,
                                   const StoreCatalog& catalog)
{
  if (f == 0 || f > window.size()) {
    throw Error{ErrorCode::Internal, fmt::format("prefix length {} outside a window of {}", f, window.size())};
  }
  const auto prefix = window.first(f);
  std::set<StoreId> candidates;
  for (const auto& t : prefix) {
    for (const auto& arg : t.args) {
      candidates.insert(arg.store);
    }
  }

  // Condition 1, as a forward pass: a read must find a covering write through the same
  // partition in an earlier task.
  std::set<StoreId> disqualified;
  std::vector<std::pair<StoreId, Partition>> covering_writes;
  for (const auto& t : prefix) {
    for (const auto& arg : t.args) {
      if (!reads(arg.privilege)) {
        continue;
      }
      const bool preceded =
        std::any_of(covering_writes.begin(), covering_writes.end(),
                    [&](const auto& w) { return w.first == arg.store && w.second == arg.partition; });
      if (!preceded) {
        disqualified.insert(arg.store);
      }
    }
    for (const auto& arg : t.args) {
      if (writes(arg.privilege) && covers(catalog.at(arg.store), arg.partition, t.launch)) {
        covering_writes.emplace_back(arg.store, arg.partition);
      }
    }
  }

  // Condition 2: nothing after the prefix observes the store.
  auto observe_later = [&](const IndexTask& t) {
    for (const auto& arg : t.args) {
      if (reads(arg.privilege) || reduces(arg.privilege)) {
        disqualified.insert(arg.store);
      }
    }
  };
  for (const auto& t : window.subspan(f)) {
    observe_later(t);
  }
  for (const auto& t : pending_after) {
    observe_later(t);
  }

  std::set<StoreId> out;
  for (auto id : candidates) {
    if (!disqualified.contains(id) && !live_app_refs.contains(id)) {
      out.insert(id);
    }
  }
  return out;
}

std::set<StoreId> find_temporaries(const TaskWindow& window, std::size_t f, const StoreCatalog& catalog)
{
  return find_temporaries(window.tasks, f, window.pending_after, window.live_app_refs, catalog);
}

}  // namespace diffuse
