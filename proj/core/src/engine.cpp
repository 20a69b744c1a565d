/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <diffuse/engine.hpp>
#include <diffuse/error.hpp>

#include <fmt/format.h>

#include <algorithm>

namespace diffuse {

std::uint64_t EngineOptions::analysis_word() const noexcept
{
  return (temp_elim ? 1U : 0U) | (optimize_kernels ? 2U : 0U) | (enforce_constraints ? 4U : 0U);
}

struct FusionEngine::Analysis {
  PrefixResult prefix{};
  FusedTaskPlan plan{};
  std::shared_ptr<const CompiledFusion> compiled{};
  bool memo_hit{};
  std::optional<CanonicalStream> canon{};
  std::optional<MemoKey> key{};
  std::uint64_t constraint_evaluations{};
};

FusionEngine::FusionEngine(const StoreCatalog& catalog,
                           const RefState& refs,
                           const GeneratorRegistry& registry,
                           EngineOptions options,
                           std::shared_ptr<MemoCache> cache)
  : catalog_{catalog},
    refs_{refs},
    registry_{registry},
    options_{options},
    cache_{cache ? std::move(cache) : std::make_shared<MemoCache>()},
    window_{std::max<std::size_t>(1, options.initial_window)}
{
  options_.max_window = std::max(options_.max_window, window_);
}

void FusionEngine::submit(IndexTask task, const Sink& sink)
{
  ++stats_.tasks_in;
  buffer_.push_back(std::move(task));
  process(false, sink);
}

void FusionEngine::flush(const Sink& sink) { process(true, sink); }

void FusionEngine::process(bool flushing, const Sink& sink)
{
  while (!buffer_.empty()) {
    if (!flushing && buffer_.size() < window_) {
      return;
    }
    auto analysis = analyze();
    const bool whole = analysis.prefix.length == buffer_.size();
    if (!flushing && whole && options_.adaptive_window && window_ < options_.max_window) {
      window_ = std::min(window_ * 2, options_.max_window);
      return;
    }
    emit(analysis, sink);
  }
}

std::shared_ptr<const CompiledFusion> FusionEngine::compile(const FusedTaskPlan& plan,
                                                            std::span<const IndexTask> prefix) const
{
  if (plan.prefix_len > 1) {
    return compile_fused(plan, prefix, catalog_, registry_, options_.optimize_kernels);
  }
  if (!registry_.contains(prefix.front().kind)) {
    return nullptr;
  }
  return compile_single(prefix.front(), catalog_, registry_);
}

FusionEngine::Analysis FusionEngine::analyze()
{
  ++stats_.analyses;
  Analysis a;
  const std::span<const IndexTask> window{buffer_};

  if (!options_.fusion) {
    a.prefix = PrefixResult{1, std::nullopt};
    a.plan = build_fused_task(window, 1, registry_);
    return a;
  }

  if (!options_.enforce_constraints) {
    std::size_t f = 1;
    while (f < window.size() && window[f].launch == window[0].launch && registry_.contains(window[f].kind) &&
           registry_.contains(window[0].kind)) {
      ++f;
    }
    a.prefix = PrefixResult{f, std::nullopt};
    a.plan = build_fused_task(window, f, registry_);
    return a;
  }

  a.canon = canonicalize(window);
  std::set<StoreId> live;
  for (auto id : a.canon->stores) {
    if (refs_.app_refs(id) > 0) {
      live.insert(id);
    }
  }
  if (options_.memo) {
    a.key = make_memo_key(*a.canon, window, live, catalog_, options_.analysis_word());
    if (auto entry = cache_->lookup(*a.key)) {
      ++stats_.memo_hits;
      a.memo_hit = true;
      a.prefix = PrefixResult{entry->prefix_len, replay_verdict(*entry, *a.canon)};
      a.plan = replay_plan(*entry, *a.canon, window);
      a.compiled = entry->compiled;
      return a;
    }
    ++stats_.memo_misses;
  }

  const auto before = stats_.counters.constraint_evaluations;
  a.prefix = longest_fusible_prefix(window, &registry_, &stats_.counters);
  a.constraint_evaluations = stats_.counters.constraint_evaluations - before;
  a.plan = build_fused_task(window, a.prefix.length, registry_);
  if (options_.temp_elim && a.prefix.length > 1) {
    apply_temporaries(a.plan, find_temporaries(window, a.prefix.length, {}, live, catalog_));
  }
  return a;
}

void FusionEngine::emit(Analysis& a, const Sink& sink)
{
  const auto f = a.prefix.length;
  const std::span<const IndexTask> prefix{buffer_.data(), f};

  if (!a.memo_hit) {
    a.compiled = compile(a.plan, prefix);
    if (a.key) {
      cache_->insert(*a.key, std::make_shared<const MemoEntry>(make_memo_entry(*a.canon, a.prefix, a.plan, a.compiled)));
    }
  }

  if (options_.oracle_check && f > 1) {
    const bool small = std::all_of(prefix.begin(), prefix.end(),
                                   [&](const IndexTask& t) { return t.launch.volume() <= options_.oracle_cap; });
    if (small) {
      ++stats_.oracle_checks;
      if (!oracle_fusible(prefix, catalog_, options_.oracle_cap)) {
        throw Error{ErrorCode::SoundnessViolation,
                    fmt::format("fused prefix {} of {} tasks has a non point-wise dependence", a.plan.fused_task.kind,
                                f)};
      }
      if (f < buffer_.size() && buffer_[f].launch.volume() <= options_.oracle_cap &&
          oracle_fusible(std::span<const IndexTask>{buffer_.data(), f + 1}, catalog_, options_.oracle_cap)) {
        ++stats_.oracle_incomplete;
      }
    }
  }

  WindowRecord record;
  record.buffered = buffer_.size();
  record.prefix_len = f;
  record.kind       = a.plan.fused_task.kind;
  record.memo_hit = a.memo_hit;
  record.emitted = true;
  record.constraint_evaluations = a.constraint_evaluations;
  record.verdict = a.prefix.verdict;
  if (a.prefix.verdict) {
    record.verdict_text = describe(*a.prefix.verdict, buffer_);
    if (a.prefix.verdict->blocking_task_index < buffer_.size()) {
      record.blocking_kind = buffer_[a.prefix.verdict->blocking_task_index].kind;
    }
  }
  record.temporaries.assign(a.plan.temporaries.begin(), a.plan.temporaries.end());
  stats_.windows.push_back(std::move(record));

  ++stats_.tasks_out;
  if (f > 1) {
    ++stats_.fused_prefixes;
    stats_.fused_prefix_sizes.push_back(f);
  }
  stats_.temporaries_eliminated += a.plan.temporaries.size();

  EmittedTask out;
  out.plan = std::move(a.plan);
  out.originals.assign(std::make_move_iterator(buffer_.begin()),
                       std::make_move_iterator(buffer_.begin() + static_cast<std::ptrdiff_t>(f)));
  out.compiled = std::move(a.compiled);
  buffer_.erase(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(f));
  sink(std::move(out));
}

}  // namespace diffuse
