/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <diffuse/error.hpp>
#include <diffuse/memo.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <mutex>

namespace diffuse {

namespace {

template <typename T, typename Eq = std::equal_to<T>>
std::uint32_t intern(std::vector<T>& table, const T& value, Eq eq = {})
{
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (eq(table[i], value)) {
      return static_cast<std::uint32_t>(i);
    }
  }
  table.push_back(value);
  return static_cast<std::uint32_t>(table.size() - 1);
}

std::uint32_t find_index(const std::vector<StoreId>& table, StoreId id)
{
  auto it = std::find(table.begin(), table.end(), id);
  if (it == table.end()) {
    throw Error{ErrorCode::Internal, fmt::format("store {} missing from canonical table", id.value)};
  }
  return static_cast<std::uint32_t>(it - table.begin());
}

std::uint32_t find_index(const std::vector<Partition>& table, const Partition& p)
{
  auto it = std::find(table.begin(), table.end(), p);
  if (it == table.end()) {
    throw Error{ErrorCode::Internal, "partition missing from canonical table"};
  }
  return static_cast<std::uint32_t>(it - table.begin());
}

class KeyWriter {
 public:
  void u64(std::uint64_t v) { bytes_.append(reinterpret_cast<const char*>(&v), sizeof v); }
  void str(const std::string& s)
  {
    u64(s.size());
    bytes_ += s;
  }
  std::string take() { return std::move(bytes_); }

 private:
  std::string bytes_{};
};

}  // namespace

CanonicalStream canonicalize(std::span<const IndexTask> window)
{
  CanonicalStream canon;
  canon.tasks.reserve(window.size());
  for (const auto& t : window) {
    CanonicalTask ct;
    ct.kind = t.kind;
    ct.launch = intern(canon.launches, t.launch);
    ct.launch_rank = t.launch.rank();
    ct.scalars = t.scalars;
    for (const auto& arg : t.args) {
      ct.args.push_back(CanonicalArg{intern(canon.stores, arg.store), intern(canon.partitions, arg.partition),
                                     arg.privilege});
    }
    canon.tasks.push_back(std::move(ct));
  }
  return canon;
}

std::string CanonicalStream::to_string() const
{
  std::string out;
  for (const auto& t : tasks) {
    out += t.kind + "([";
    for (std::size_t i = 0; i < t.args.size(); ++i) {
      out += fmt::format("{}({},{})", i ? ", " : "", t.args[i].store, diffuse::to_string(t.args[i].privilege));
    }
    out += "])";
    if (partitions.size() > 1 || launches.size() > 1) {
      out += " parts=[";
      for (std::size_t i = 0; i < t.args.size(); ++i) {
        out += fmt::format("{}{}", i ? "," : "", t.args[i].partition);
      }
      out += fmt::format("] launch={}", t.launch);
    }
    out += "\n";
  }
  return out;
}

MemoKey make_memo_key(const CanonicalStream& canon,
                      std::span<const IndexTask> window,
                      const std::set<StoreId>& live_app_refs,
                      const StoreCatalog& catalog,
                      std::uint64_t options_word)
{
  if (canon.tasks.size() != window.size()) {
    throw Error{ErrorCode::Internal, "canonical stream does not match its window"};
  }
  KeyWriter w;
  std::vector<ShapeClassKey> classes;
  w.u64(options_word);
  w.u64(canon.tasks.size());
  for (std::size_t i = 0; i < window.size(); ++i) {
    const auto& ct = canon.tasks[i];
    const auto& t = window[i];
    w.str(ct.kind);
    w.u64(ct.launch);
    w.u64(ct.launch_rank);
    w.u64(ct.scalars.size());
    w.u64(ct.args.size());
    for (std::size_t a = 0; a < ct.args.size(); ++a) {
      const auto& store = catalog.at(t.args[a].store);
      w.u64(ct.args[a].store);
      w.u64(ct.args[a].partition);
      w.u64(static_cast<std::uint64_t>(ct.args[a].privilege));
      w.u64(covers(store, t.args[a].partition, t.launch) ? 1 : 0);
      w.u64(intern(classes, shape_class_key(store, t.args[a].partition, t.launch)));
    }
  }
  w.u64(canon.stores.size());
  for (auto id : canon.stores) {
    w.u64(live_app_refs.contains(id) ? 1 : 0);
    w.u64(catalog.at(id).shape.rank());
  }
  MemoKey key{w.take(), 0};
  key.hash = std::hash<std::string>{}(key.bytes);
  return key;
}

MemoEntry make_memo_entry(const CanonicalStream& canon,
                          const PrefixResult& prefix,
                          const FusedTaskPlan& plan,
                          std::shared_ptr<const CompiledFusion> compiled)
{
  MemoEntry e;
  e.prefix_len = prefix.length;
  if (prefix.verdict) {
    const auto& v = *prefix.verdict;
    MemoEntry::Verdict cv{v.constraint, v.blocking_task_index, std::nullopt, std::nullopt};
    if (v.constraint != Constraint::LaunchDomain && v.constraint != Constraint::NoGenerator) {
      cv.store = find_index(canon.stores, v.store);
    }
    if (v.partitions) {
      cv.partitions = std::pair{find_index(canon.partitions, v.partitions->first),
                                find_index(canon.partitions, v.partitions->second)};
    }
    e.verdict = cv;
  }
  for (const auto& a : plan.all_args) {
    e.all_args.push_back(CanonicalArg{find_index(canon.stores, a.store), find_index(canon.partitions, a.partition),
                                      a.privilege});
  }
  e.arg_map = plan.arg_map;
  for (auto id : plan.temporaries) {
    e.temporaries.push_back(find_index(canon.stores, id));
  }
  e.fused_kind = plan.fused_task.kind;
  e.compiled = std::move(compiled);
  return e;
}

FusedTaskPlan replay_plan(const MemoEntry& entry, const CanonicalStream& canon, std::span<const IndexTask> window)
{
  if (entry.prefix_len == 0 || entry.prefix_len > window.size()) {
    throw Error{ErrorCode::Internal, "memoized prefix does not fit the window"};
  }
  FusedTaskPlan plan;
  plan.prefix_len = entry.prefix_len;
  plan.arg_map = entry.arg_map;
  if (entry.prefix_len == 1) {
    plan.fused_task = window.front();
    plan.all_args = window.front().args;
  } else {
    plan.fused_task.kind = entry.fused_kind;
    plan.fused_task.launch = window.front().launch;
    for (const auto& a : entry.all_args) {
      plan.all_args.push_back(StoreArg{canon.stores.at(a.store), canon.partitions.at(a.partition), a.privilege});
    }
    for (std::size_t k = 0; k < entry.prefix_len; ++k) {
      const auto& s = window[k].scalars;
      plan.fused_task.scalars.insert(plan.fused_task.scalars.end(), s.begin(), s.end());
    }
    plan.fused_task.args = plan.all_args;
  }
  std::set<StoreId> temporaries;
  for (auto idx : entry.temporaries) {
    temporaries.insert(canon.stores.at(idx));
  }
  apply_temporaries(plan, std::move(temporaries));
  return plan;
}

std::optional<ConstraintVerdict> replay_verdict(const MemoEntry& entry, const CanonicalStream& canon)
{
  if (!entry.verdict) {
    return std::nullopt;
  }
  const auto& cv = *entry.verdict;
  ConstraintVerdict v{cv.constraint, cv.blocking_task_index, {}, std::nullopt};
  if (cv.store) {
    v.store = canon.stores.at(*cv.store);
  }
  if (cv.partitions) {
    v.partitions = std::pair{canon.partitions.at(cv.partitions->first), canon.partitions.at(cv.partitions->second)};
  }
  return v;
}

std::shared_ptr<const MemoEntry> MemoCache::lookup(const MemoKey& key) const
{
  std::shared_lock lock{mutex_};
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    ++misses_;
    return nullptr;
  }
  ++hits_;
  return it->second;
}

void MemoCache::insert(const MemoKey& key, std::shared_ptr<const MemoEntry> entry)
{
  std::unique_lock lock{mutex_};
  entries_.try_emplace(key, std::move(entry));
}

std::size_t MemoCache::size() const
{
  std::shared_lock lock{mutex_};
  return entries_.size();
}

}  // namespace diffuse
