/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <diffuse/error.hpp>
#include <diffuse/fusion.hpp>

#include <fmt/format.h>

#include <algorithm>

namespace diffuse {

std::string_view to_string(Constraint c) noexcept
{
  switch (c) {
    case Constraint::LaunchDomain: return "LaunchDomain";
    case Constraint::TrueDep: return "TrueDep";
    case Constraint::AntiDep: return "AntiDep";
    case Constraint::Reduction: return "Reduction";
    case Constraint::NoGenerator: return "NoGenerator";
  }
  return "?";
}

std::string describe_partition(const Partition& p)
{
  if (p.is_none()) {
    return "none";
  }
  const auto& t = p.as_tiling();
  std::string out = "tiling(tile=(";
  for (std::size_t d = 0; d < t.tile.rank(); ++d) {
    out += fmt::format("{}{}", d ? "," : "", t.tile[d]);
  }
  out += "), offset=(";
  for (std::size_t d = 0; d < t.offset.rank(); ++d) {
    out += fmt::format("{}{}", d ? "," : "", t.offset[d]);
  }
  out += ")";
  if (!t.projection.is_identity()) {
    out += ", proj=[";
    for (std::size_t r = 0; r < t.projection.out_rank(); ++r) {
      out += r ? "; " : "";
      for (std::size_t c = 0; c < t.projection.in_rank(); ++c) {
        out += fmt::format("{}{}", c ? " " : "", t.projection.matrix()[r][c]);
      }
      out += fmt::format(" | {}", t.projection.offset()[r]);
    }
    out += "]";
  }
  return out + ")";
}

std::string describe(const ConstraintVerdict& v, std::span<const IndexTask> window)
{
  const auto kind =
    v.blocking_task_index < window.size() ? window[v.blocking_task_index].kind : std::string{"?"};
  std::string out = fmt::format("{} blocks task {} ({})", to_string(v.constraint), v.blocking_task_index, kind);
  if (v.constraint != Constraint::LaunchDomain && v.constraint != Constraint::NoGenerator) {
    out += fmt::format(" on store {}", v.store.value);
  }
  if (v.partitions) {
    out += fmt::format(": {} vs {}", describe_partition(v.partitions->first), describe_partition(v.partitions->second));
  }
  return out;
}

AnalysisCounters& AnalysisCounters::operator+=(const AnalysisCounters& o) noexcept
{
  tasks_examined += o.tasks_examined;
  constraint_evaluations += o.constraint_evaluations;
  partition_comparisons += o.partition_comparisons;
  argument_visits += o.argument_visits;
  return *this;
}

////////////////////////////////////////////////////
// Constraint tracking
////////////////////////////////////////////////////

bool ConstraintTracker::same(const Partition& a, const Partition& b) const
{
  if (counters_) {
    ++counters_->partition_comparisons;
  }
  return a == b;
}

std::optional<ConstraintVerdict> ConstraintTracker::check_one(Constraint which,
                                                              const IndexTask& task,
                                                              std::size_t index) const
{
  if (counters_) {
    ++counters_->constraint_evaluations;
  }
  auto visit = [&] {
    if (counters_) {
      ++counters_->argument_visits;
    }
  };
  switch (which) {
    case Constraint::LaunchDomain:
      if (launch_ && *launch_ != task.launch) {
        return ConstraintVerdict{Constraint::LaunchDomain, index, {}, std::nullopt};
      }
      return std::nullopt;
    case Constraint::TrueDep:
      for (const auto& arg : task.args) {
        visit();
        if (!reads(arg.privilege) && !writes(arg.privilege)) {
          continue;
        }
        auto it = facts_.find(arg.store);
        if (it == facts_.end()) {
          continue;
        }
        for (const auto& p : it->second.written) {
          if (!same(p, arg.partition)) {
            return ConstraintVerdict{Constraint::TrueDep, index, arg.store, std::pair{p, arg.partition}};
          }
        }
      }
      return std::nullopt;
    case Constraint::AntiDep:
      for (const auto& arg : task.args) {
        visit();
        if (!writes(arg.privilege)) {
          continue;
        }
        auto it = facts_.find(arg.store);
        if (it == facts_.end()) {
          continue;
        }
        for (const auto& p : it->second.read) {
          if (!same(p, arg.partition)) {
            return ConstraintVerdict{Constraint::AntiDep, index, arg.store, std::pair{p, arg.partition}};
          }
        }
      }
      return std::nullopt;
    case Constraint::Reduction:
      for (const auto& arg : task.args) {
        visit();
        auto it = facts_.find(arg.store);
        if (it == facts_.end()) {
          continue;
        }
        const bool conflict = reduces(arg.privilege) ? it->second.read_or_written : it->second.reduced;
        if (conflict) {
          return ConstraintVerdict{Constraint::Reduction, index, arg.store, std::nullopt};
        }
      }
      return std::nullopt;
    case Constraint::NoGenerator: return std::nullopt;
  }
  return std::nullopt;
}

std::optional<ConstraintVerdict> ConstraintTracker::check(const IndexTask& task, std::size_t index) const
{
  for (auto c : {Constraint::LaunchDomain, Constraint::TrueDep, Constraint::AntiDep, Constraint::Reduction}) {
    if (auto v = check_one(c, task, index)) {
      return v;
    }
  }
  return std::nullopt;
}

void ConstraintTracker::record(const IndexTask& task)
{
  if (counters_) {
    ++counters_->tasks_examined;
  }
  if (!launch_) {
    launch_ = task.launch;
  }
  auto add_unique = [&](std::vector<Partition>& list, const Partition& p) {
    for (const auto& q : list) {
      if (same(q, p)) {
        return;
      }
    }
    list.push_back(p);
  };
  for (const auto& arg : task.args) {
    if (counters_) {
      ++counters_->argument_visits;
    }
    auto& f = facts_[arg.store];
    if (writes(arg.privilege)) {
      add_unique(f.written, arg.partition);
    }
    if (reads(arg.privilege)) {
      add_unique(f.read, arg.partition);
    }
    if (reduces(arg.privilege)) {
      f.reduced = true;
    } else {
      f.read_or_written = true;
    }
  }
}

namespace {

bool run_single(Constraint which, std::span<const IndexTask> tasks)
{
  ConstraintTracker tracker;
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tracker.check_one(which, tasks[i], i)) {
      return false;
    }
    tracker.record(tasks[i]);
  }
  return true;
}

}  // namespace

bool check_launch_domain(std::span<const IndexTask> tasks) { return run_single(Constraint::LaunchDomain, tasks); }
bool check_true_dependence(std::span<const IndexTask> tasks) { return run_single(Constraint::TrueDep, tasks); }
bool check_anti_dependence(std::span<const IndexTask> tasks) { return run_single(Constraint::AntiDep, tasks); }
bool check_reduction(std::span<const IndexTask> tasks) { return run_single(Constraint::Reduction, tasks); }

PrefixResult longest_fusible_prefix(std::span<const IndexTask> window,
                                    const GeneratorRegistry* registry,
                                    AnalysisCounters* counters)
{
  if (window.empty()) {
    throw Error{ErrorCode::Internal, "longest_fusible_prefix needs a nonempty window"};
  }
  ConstraintTracker tracker{counters};
  tracker.record(window[0]);
  for (std::size_t j = 1; j < window.size(); ++j) {
    if (auto v = tracker.check(window[j], j)) {
      return PrefixResult{j, std::move(v)};
    }
    if (registry) {
      if (j == 1 && !registry->contains(window[0].kind)) {
        return PrefixResult{1, ConstraintVerdict{Constraint::NoGenerator, 0, {}, std::nullopt}};
      }
      if (!registry->contains(window[j].kind)) {
        return PrefixResult{j, ConstraintVerdict{Constraint::NoGenerator, j, {}, std::nullopt}};
      }
    }
    tracker.record(window[j]);
  }
  return PrefixResult{window.size(), std::nullopt};
}

////////////////////////////////////////////////////
// Fused task construction
////////////////////////////////////////////////////

std::string fused_kind(std::span<const IndexTask> prefix)
{
  if (prefix.size() == 1) {
    return prefix.front().kind;
  }
  std::vector<std::string> kinds;
  for (const auto& t : prefix) {
    if (std::find(kinds.begin(), kinds.end(), t.kind) == kinds.end()) {
      kinds.push_back(t.kind);
    }
  }
  std::string out = "FUSED";
  for (const auto& k : kinds) {
    out += "_" + k;
  }
  return out;
}

FusedTaskPlan build_fused_task(std::span<const IndexTask> window, std::size_t f, const GeneratorRegistry& registry)
{
  if (f == 0 || f > window.size()) {
    throw Error{ErrorCode::Internal, fmt::format("prefix length {} outside a window of {}", f, window.size())};
  }
  const auto prefix = window.first(f);
  FusedTaskPlan plan;
  plan.prefix_len = f;
  if (f == 1) {
    plan.fused_task = prefix.front();
    plan.all_args = prefix.front().args;
    plan.arg_map.emplace_back();
    for (std::size_t p = 0; p < plan.all_args.size(); ++p) {
      plan.arg_map.back().push_back(p);
    }
    return plan;
  }
  for (const auto& t : prefix) {
    if (!registry.contains(t.kind)) {
      throw Error{ErrorCode::NoGenerator,
                  fmt::format("cannot fuse task kind {} without a kernel generator", t.kind)};
    }
  }
  plan.fused_task.kind = fused_kind(prefix);
  plan.fused_task.launch = prefix.front().launch;
  for (const auto& t : prefix) {
    auto& map = plan.arg_map.emplace_back();
    for (const auto& arg : t.args) {
      auto it = std::find_if(plan.all_args.begin(), plan.all_args.end(), [&](const StoreArg& a) {
        return a.store == arg.store && a.partition == arg.partition;
      });
      if (it == plan.all_args.end()) {
        map.push_back(plan.all_args.size());
        plan.all_args.push_back(arg);
      } else {
        map.push_back(static_cast<std::size_t>(it - plan.all_args.begin()));
        it->privilege = join(it->privilege, arg.privilege);
      }
    }
    plan.fused_task.scalars.insert(plan.fused_task.scalars.end(), t.scalars.begin(), t.scalars.end());
  }
  plan.fused_task.args = plan.all_args;
  return plan;
}

void apply_temporaries(FusedTaskPlan& plan, std::set<StoreId> temporaries)
{
  plan.temporaries = std::move(temporaries);
  plan.fused_task.args.clear();
  for (std::size_t a = 0; a < plan.all_args.size(); ++a) {
    if (!plan.is_demoted(a)) {
      plan.fused_task.args.push_back(plan.all_args[a]);
    }
  }
}

ShapeClassKey shape_class_key(const Store& store, const Partition& partition, const Domain& launch)
{
  ShapeClassKey key;
  key.uniform = uniform_extents(store, partition, launch);
  if (!key.uniform) {
    key.store_shape = store.shape;
    key.partition = partition;
    key.launch = launch;
  }
  return key;
}

std::shared_ptr<const CompiledFusion> compile_single(const IndexTask& task,
                                                     const StoreCatalog& catalog,
                                                     const GeneratorRegistry& registry)
{
  auto compiled = std::make_shared<CompiledFusion>();
  compiled->kernel = registry.generate(task, catalog);
  for (std::size_t p = 0; p < task.args.size(); ++p) {
    compiled->class_sources.push_back(p);
  }
  return compiled;
}

std::shared_ptr<const CompiledFusion> compile_fused(const FusedTaskPlan& plan,
                                                    std::span<const IndexTask> prefix,
                                                    const StoreCatalog& catalog,
                                                    const GeneratorRegistry& registry,
                                                    bool run_optimizations)
{
  if (prefix.size() != plan.prefix_len || plan.arg_map.size() != plan.prefix_len) {
    throw Error{ErrorCode::Internal, "fused plan does not match its prefix"};
  }
  if (plan.prefix_len == 1) {
    return compile_single(prefix.front(), catalog, registry);
  }
  auto compiled = std::make_shared<CompiledFusion>();
  ComposeLayout layout;
  std::vector<ShapeClassKey> keys;
  for (std::size_t a = 0; a < plan.all_args.size(); ++a) {
    const auto& arg = plan.all_args[a];
    const auto& store = catalog.at(arg.store);
    auto key = shape_class_key(store, arg.partition, plan.fused_task.launch);
    auto it = std::find(keys.begin(), keys.end(), key);
    int cls = static_cast<int>(it - keys.begin());
    if (it == keys.end()) {
      keys.push_back(std::move(key));
      layout.class_ranks.push_back(store.shape.rank());
      compiled->class_sources.push_back(a);
    }
    layout.args.push_back(ComposedArg{fmt::format("s{}", arg.store.value), store.shape.rank(), arg.privilege, cls,
                                      plan.is_demoted(a)});
  }
  std::vector<Kernel> kernels;
  kernels.reserve(prefix.size());
  for (const auto& t : prefix) {
    kernels.push_back(registry.generate(t, catalog));
  }
  auto kernel = compose(kernels, plan.arg_map, layout, plan.fused_task.kind);
  compiled->kernel = run_optimizations ? optimize(kernel) : std::move(kernel);
  return compiled;
}

}  // namespace diffuse
