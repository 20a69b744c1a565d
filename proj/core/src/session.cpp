/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <diffuse/error.hpp>
#include <diffuse/session.hpp>

#include <fmt/format.h>

#include <algorithm>

namespace diffuse {

////////////////////////////////////////////////////
// Program
////////////////////////////////////////////////////

StoreId Program::create(Domain shape, std::string name)
{
  for (const auto& c : commands) {
    if (const auto* cs = std::get_if<CreateStore>(&c)) {
      next_id_ = std::max(next_id_, cs->id.value + 1);
    }
  }
  const StoreId id{next_id_++};
  commands.emplace_back(CreateStore{id, std::move(shape)});
  if (!name.empty()) {
    store_names[id] = std::move(name);
  }
  return id;
}

const Partition& Program::declare(StoreId store, std::string name, Partition partition)
{
  partitions.push_back(PartitionDecl{std::move(name), store, std::move(partition)});
  return partitions.back().partition;
}

void Program::launch(IndexTask task) { commands.emplace_back(Launch{std::move(task)}); }
void Program::drop(StoreId id) { commands.emplace_back(DropRef{id}); }
void Program::flush() { commands.emplace_back(Flush{}); }

std::string Program::store_name(StoreId id) const
{
  auto it = store_names.find(id);
  return it == store_names.end() ? fmt::format("{}", id.value) : it->second;
}

std::string Program::partition_name(StoreId store, const Partition& partition) const
{
  for (const auto& d : partitions) {
    if (d.store == store && d.partition == partition) {
      return d.name;
    }
  }
  return describe_partition(partition);
}

std::size_t Program::task_count() const
{
  return static_cast<std::size_t>(
    std::count_if(commands.begin(), commands.end(), [](const Command& c) { return std::holds_alternative<Launch>(c); }));
}

std::set<StoreId> Program::live_at_end() const
{
  std::map<StoreId, std::size_t> refs;
  for (const auto& c : commands) {
    if (const auto* cs = std::get_if<CreateStore>(&c)) {
      refs[cs->id] = 1;
    } else if (const auto* d = std::get_if<DropRef>(&c)) {
      auto& n = refs[d->id];
      n = n > 0 ? n - 1 : 0;
    }
  }
  std::set<StoreId> out;
  for (const auto& [id, n] : refs) {
    if (n > 0) {
      out.insert(id);
    }
  }
  return out;
}

////////////////////////////////////////////////////
// Session
////////////////////////////////////////////////////

Session::Session(SessionOptions options, GeneratorRegistry generators, OpaqueRegistry opaque)
  : options_{std::move(options)},
    generators_{std::move(generators)},
    opaque_{std::move(opaque)},
    heap_{options_.seed},
    executor_{heap_, generators_, opaque_},
    engine_{heap_.catalog(), refs_, generators_, options_.engine, options_.cache}
{
  executor_.set_check_interference(options_.check_interference);
}

void Session::create_store(StoreId id, Domain shape)
{
  if (heap_.catalog().contains(id)) {
    throw Error{ErrorCode::MalformedTask, fmt::format("store {} created twice", id.value)};
  }
  heap_.define(Store{id, std::move(shape)});
  refs_.create(id);
}

void Session::launch(IndexTask task)
{
  validate(task, heap_.catalog());
  for (const auto& arg : task.args) {
    if (refs_.app_refs(arg.store) == 0) {
      throw Error{ErrorCode::UnknownId,
                  fmt::format("task {} uses store {} after its last reference was dropped", task.kind, arg.store.value)};
    }
  }
  for (const auto& arg : task.args) {
    refs_.add_runtime_ref(arg.store);
  }
  engine_.submit(std::move(task), [this](EmittedTask t) { execute(std::move(t)); });
}

void Session::drop_ref(StoreId id)
{
  refs_.drop_app_ref(id);
  collect(id);
}

void Session::flush()
{
  engine_.flush([this](EmittedTask t) { execute(std::move(t)); });
}

void Session::apply(const Command& command)
{
  std::visit(
    [this](const auto& c) {
      using T = std::decay_t<decltype(c)>;
      if constexpr (std::is_same_v<T, CreateStore>) {
        create_store(c.id, c.shape);
      } else if constexpr (std::is_same_v<T, Launch>) {
        launch(c.task);
      } else if constexpr (std::is_same_v<T, DropRef>) {
        drop_ref(c.id);
      } else {
        flush();
      }
    },
    command);
}

void Session::run(const Program& program)
{
  for (const auto& c : program.commands) {
    apply(c);
  }
  flush();
}

void Session::collect(StoreId id)
{
  if (!options_.keep_dropped_stores && refs_.collectable(id)) {
    heap_.release(id);
  }
}

void Session::execute(EmittedTask task)
{
  MemoryTraffic traffic;
  if (!task.compiled) {
    if (options_.execute) {
      executor_.run(task.originals.front());
    }
  } else {
    if (options_.execute && options_.isolated) {
      execute_isolated(task.plan, *task.compiled, heap_);
    } else if (options_.execute) {
      executor_.run(task.plan, *task.compiled);
    }
    traffic = task_traffic(task.plan, *task.compiled, heap_.catalog());
  }
  traffic_.loads += traffic.loads;
  traffic_.stores += traffic.stores;

  std::set<StoreId> touched;
  for (const auto& t : task.originals) {
    for (const auto& arg : t.args) {
      refs_.drop_runtime_ref(arg.store);
      touched.insert(arg.store);
    }
  }
  for (auto id : touched) {
    collect(id);
  }

  emitted_.push_back(EmittedSummary{task.plan.fused_task.kind, task.plan.prefix_len,
                                    {task.plan.temporaries.begin(), task.plan.temporaries.end()}, traffic});
  if (observer_) {
    observer_(task);
  }
}

Report Session::report() const
{
  const auto& s = engine_.stats();
  Report r;
  r.tasks_in               = s.tasks_in;
  r.tasks_out              = s.tasks_out;
  r.fused_prefixes         = s.fused_prefixes;
  r.temporaries_eliminated = s.temporaries_eliminated;
  r.memo_hits              = s.memo_hits;
  r.memo_misses            = s.memo_misses;
  r.loads                  = traffic_.loads;
  r.stores                 = traffic_.stores;
  r.fused_prefix_sizes     = s.fused_prefix_sizes;
  r.counters               = s.counters;
  return r;
}

namespace {

RunResult finish(Session& session, const Program& program)
{
  session.run(program);
  RunResult out;
  out.report  = session.report();
  out.live    = program.live_at_end();
  out.emitted = session.emitted();
  out.heap    = std::move(session.heap());
  return out;
}

}  // namespace

RunResult execute_sequential(const Program& program,
                             std::uint64_t seed,
                             const GeneratorRegistry& generators,
                             const OpaqueRegistry& opaque)
{
  SessionOptions options;
  options.seed                   = seed;
  options.engine.fusion          = false;
  options.engine.memo            = false;
  options.engine.temp_elim       = false;
  options.engine.initial_window  = 1;
  options.engine.adaptive_window = false;
  Session session{options, generators, opaque};
  return finish(session, program);
}

RunResult execute_with_fusion(const Program& program,
                              const SessionOptions& options,
                              const GeneratorRegistry& generators,
                              const OpaqueRegistry& opaque)
{
  Session session{options, generators, opaque};
  return finish(session, program);
}

}  // namespace diffuse
