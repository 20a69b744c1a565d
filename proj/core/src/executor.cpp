/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <diffuse/error.hpp>
#include <diffuse/executor.hpp>
#include <diffuse/oracle.hpp>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <cstring>
#include <map>

namespace diffuse {

namespace {

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31U);
}

std::vector<Coord> row_major_strides(const Domain& shape)
{
  std::vector<Coord> strides(shape.rank(), 1);
  for (std::size_t d = shape.rank(); d-- > 1;) {
    strides[d - 1] = strides[d] * shape[d];
  }
  return strides;
}

/// Calls fn(store_offset, rect_offset) for every element of `rect`, row-major.
template <typename Fn>
void for_each_element(const Rect& rect, const std::vector<Coord>& strides, Fn&& fn)
{
  if (rect.empty()) {
    return;
  }
  const auto rank = rect.rank();
  std::vector<Coord> c = rect.lo;
  std::size_t k = 0;
  while (true) {
    std::size_t offset = 0;
    for (std::size_t d = 0; d < rank; ++d) {
      offset += static_cast<std::size_t>(c[d] * strides[d]);
    }
    fn(offset, k++);
    std::size_t d = rank;
    while (d-- > 0) {
      if (++c[d] < rect.hi[d]) {
        break;
      }
      c[d] = rect.lo[d];
    }
    if (d == static_cast<std::size_t>(-1)) {
      return;
    }
  }
}

std::vector<double> initial_contents(std::uint64_t seed, const Store& store)
{
  std::vector<double> v(store.shape.volume());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = initial_value(seed, store.id, i);
  }
  return v;
}

}  // namespace

double initial_value(std::uint64_t seed, StoreId store, std::size_t index) noexcept
{
  const auto h = splitmix64(seed ^ splitmix64((static_cast<std::uint64_t>(store.value) << 32U) ^ index));
  return static_cast<double>(1 + h % 8);
}

////////////////////////////////////////////////////
// StoreHeap
////////////////////////////////////////////////////

void StoreHeap::define(const Store& store) { catalog_.add(store); }

std::vector<double>& StoreHeap::data(StoreId id)
{
  auto it = data_.find(id);
  if (it != data_.end()) {
    return it->second;
  }
  return data_.emplace(id, initial_contents(seed_, catalog_.at(id))).first->second;
}

const std::vector<double>* StoreHeap::find(StoreId id) const
{
  auto it = data_.find(id);
  return it == data_.end() ? nullptr : &it->second;
}

void StoreHeap::release(StoreId id) { data_.erase(id); }

std::set<StoreId> StoreHeap::allocated_ids() const
{
  std::set<StoreId> out;
  for (const auto& [id, _] : data_) {
    out.insert(id);
  }
  return out;
}

namespace {

std::vector<double> contents(const StoreHeap& heap, StoreId id)
{
  if (const auto* d = heap.find(id)) {
    return *d;
  }
  return initial_contents(heap.seed(), heap.catalog().at(id));
}

}  // namespace

bool heaps_equal(const StoreHeap& lhs, const StoreHeap& rhs, const std::set<StoreId>& stores, std::string* diff)
{
  for (auto id : stores) {
    const auto a = contents(lhs, id);
    const auto b = contents(rhs, id);
    if (a.size() != b.size()) {
      if (diff) {
        *diff = fmt::format("store {} has {} elements on one side and {} on the other", id.value, a.size(), b.size());
      }
      return false;
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (std::memcmp(&a[i], &b[i], sizeof(double)) != 0) {
        if (diff) {
          *diff = fmt::format("store {} differs at element {}: {} vs {}", id.value, i, a[i], b[i]);
        }
        return false;
      }
    }
  }
  return true;
}

std::string dump_text(const StoreHeap& heap, const std::set<StoreId>& stores)
{
  std::string out;
  for (auto id : stores) {
    const auto& store = heap.catalog().at(id);
    out += fmt::format("store {} shape {}\n", id.value, store.shape.extents());
    const auto values = contents(heap, id);
    const auto row = static_cast<std::size_t>(store.shape[store.shape.rank() - 1]);
    for (std::size_t i = 0; i < values.size(); ++i) {
      out += fmt::format("{}{}", i % row == 0 ? "  " : " ", values[i]);
      if ((i + 1) % row == 0) {
        out += "\n";
      }
    }
  }
  return out;
}

std::vector<std::byte> dump_binary(const StoreHeap& heap, const std::set<StoreId>& stores)
{
  std::vector<std::byte> out;
  auto put = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const std::byte*>(p);
    out.insert(out.end(), b, b + n);
  };
  for (auto id : stores) {
    const auto& store = heap.catalog().at(id);
    const std::uint64_t header[2] = {id.value, store.shape.rank()};
    put(header, sizeof header);
    for (auto e : store.shape.extents()) {
      put(&e, sizeof e);
    }
    const auto values = contents(heap, id);
    put(values.data(), values.size() * sizeof(double));
  }
  return out;
}

////////////////////////////////////////////////////
// Opaque built-ins
////////////////////////////////////////////////////

namespace {

void matvec(const IndexTask& task, StoreHeap& heap)
{
  if (task.args.size() != 3 || !reads(task.args[0].privilege) || !reads(task.args[1].privilege) ||
      !writes(task.args[2].privilege)) {
    throw Error{ErrorCode::MalformedTask, fmt::format("{} expects (A: R, x: R, y: W)", task.kind)};
  }
  const auto& catalog = heap.catalog();
  const auto& a = catalog.at(task.args[0].store);
  const auto& x = catalog.at(task.args[1].store);
  const auto& y = catalog.at(task.args[2].store);
  if (a.shape.rank() != 2 || x.shape.rank() != 1 || y.shape.rank() != 1) {
    throw Error{ErrorCode::MalformedTask, fmt::format("{} expects a matrix and two vectors", task.kind)};
  }
  task.launch.for_each_point([&](const Point& p) {
    const auto sa = sub_store_bounds(a, task.args[0].partition, p).bounds;
    const auto sx = sub_store_bounds(x, task.args[1].partition, p).bounds;
    const auto sy = sub_store_bounds(y, task.args[2].partition, p).bounds;
    // y[i] = sum_j A[i][j] x[j] over the global rows of y's block and columns of x's block.
    if (sa.lo[0] > sy.lo[0] || sa.hi[0] < sy.hi[0] || sa.lo[1] > sx.lo[0] || sa.hi[1] < sx.hi[0]) {
      throw Error{ErrorCode::OutOfBounds,
                  fmt::format("{} at point {}: matrix block {}..{} does not cover rows {}..{} and columns {}..{}",
                              task.kind, p.coords(), sa.lo, sa.hi, sy.lo, sy.hi, sx.lo, sx.hi)};
    }
    const auto& av = heap.data(a.id);
    const auto& xv = heap.data(x.id);
    auto& yv = heap.data(y.id);
    const auto ld = a.shape[1];
    for (Coord i = sy.lo[0]; i < sy.hi[0]; ++i) {
      double acc = 0.0;
      for (Coord j = sx.lo[0]; j < sx.hi[0]; ++j) {
        acc += av[static_cast<std::size_t>(i * ld + j)] * xv[static_cast<std::size_t>(j)];
      }
      yv[static_cast<std::size_t>(i)] = acc;
    }
  });
}

}  // namespace

OpaqueRegistry OpaqueRegistry::builtin()
{
  OpaqueRegistry r;
  r.add("MATVEC", matvec);
  r.add("SPMV", matvec);
  return r;
}

void OpaqueRegistry::add(std::string kind, OpaqueImpl impl) { impls_.insert_or_assign(std::move(kind), std::move(impl)); }

bool OpaqueRegistry::contains(std::string_view kind) const { return impls_.find(kind) != impls_.end(); }

const OpaqueImpl& OpaqueRegistry::at(std::string_view kind) const
{
  auto it = impls_.find(kind);
  if (it == impls_.end()) {
    throw Error{ErrorCode::UnknownTask, fmt::format("no built-in semantics for task kind {}", kind)};
  }
  return it->second;
}

////////////////////////////////////////////////////
// Binding and sequential execution
////////////////////////////////////////////////////

namespace {

std::vector<std::vector<Coord>> class_extents_at(const FusedTaskPlan& plan,
                                                 const CompiledFusion& compiled,
                                                 const StoreCatalog& catalog,
                                                 const Point& point)
{
  std::vector<std::vector<Coord>> out;
  out.reserve(compiled.class_sources.size());
  for (auto src : compiled.class_sources) {
    const auto& arg = plan.all_args.at(src);
    out.push_back(sub_store_bounds(catalog.at(arg.store), arg.partition, point).bounds.extents());
  }
  return out;
}

std::vector<double> scalar_values(const FusedTaskPlan& plan)
{
  std::vector<double> out;
  for (const auto& s : plan.fused_task.scalars) {
    out.push_back(s.value);
  }
  return out;
}

}  // namespace

KernelBindings bind_point(const FusedTaskPlan& plan, const CompiledFusion& compiled, StoreHeap& heap, const Point& point)
{
  KernelBindings b;
  const auto& catalog = heap.catalog();
  for (std::size_t a = 0; a < plan.all_args.size(); ++a) {
    if (plan.is_demoted(a)) {
      continue;
    }
    const auto& arg = plan.all_args[a];
    const auto& store = catalog.at(arg.store);
    const auto sub = sub_store_bounds(store, arg.partition, point).bounds;
    const auto strides = row_major_strides(store.shape);
    auto& data = heap.data(arg.store);
    std::ptrdiff_t offset = 0;
    if (!sub.empty()) {
      for (std::size_t d = 0; d < sub.rank(); ++d) {
        offset += static_cast<std::ptrdiff_t>(sub.lo[d] * strides[d]);
      }
    }
    b.params.push_back(BufferView{data.data() + offset, sub.extents(), strides, arg.privilege});
  }
  b.scalars = scalar_values(plan);
  b.class_extents = class_extents_at(plan, compiled, catalog, point);
  return b;
}

MemoryTraffic task_traffic(const FusedTaskPlan& plan, const CompiledFusion& compiled, const StoreCatalog& catalog)
{
  MemoryTraffic total;
  plan.fused_task.launch.for_each_point([&](const Point& p) {
    const auto t = count_memory_traffic(compiled.kernel, class_extents_at(plan, compiled, catalog, p));
    total.loads += t.loads;
    total.stores += t.stores;
  });
  return total;
}

std::shared_ptr<const CompiledFusion> Executor::kernel_for(const IndexTask& task)
{
  const auto in = generator_input(task, heap_.catalog());
  std::string key = in.kind;
  for (std::size_t i = 0; i < in.ranks.size(); ++i) {
    key += fmt::format("|{}{}", in.ranks[i], to_string(in.privileges[i]));
  }
  key += fmt::format("|s{}", in.scalar_count);
  auto it = kernels_.find(key);
  if (it != kernels_.end()) {
    return it->second;
  }
  auto compiled = compile_single(task, heap_.catalog(), generators_);
  kernels_.emplace(std::move(key), compiled);
  return compiled;
}

void Executor::run(const IndexTask& task)
{
  validate(task, heap_.catalog());
  if (opaque_.contains(task.kind)) {
    if (check_interference_) {
      run_interference_check(task);
    }
    opaque_.at(task.kind)(task, heap_);
    return;
  }
  if (!generators_.contains(task.kind)) {
    throw Error{ErrorCode::UnknownTask, fmt::format("task kind {} has neither a generator nor built-in semantics",
                                                    task.kind)};
  }
  const auto compiled = kernel_for(task);
  run(build_fused_task(std::span<const IndexTask>{&task, 1}, 1, generators_), *compiled);
}

void Executor::run_interference_check(const IndexTask& task) const
{
  if (task.launch.volume() > kDefaultOracleCap) {
    return;
  }
  for (const auto& i : find_interference(task, heap_.catalog())) {
    if (i.write_write) {
      throw Error{ErrorCode::Interference,
                  fmt::format("task {}: points {} and {} write overlapping parts of store {}", task.kind,
                              i.first.coords(), i.second.coords(), i.store.value)};
    }
  }
}

void Executor::run(const FusedTaskPlan& plan, const CompiledFusion& compiled)
{
  if (check_interference_) {
    run_interference_check(plan.fused_task);
  }
  plan.fused_task.launch.for_each_point([&](const Point& p) {
    auto bindings = bind_point(plan, compiled, heap_, p);
    interpret(compiled.kernel, bindings);
  });
}

////////////////////////////////////////////////////
// Isolated execution
////////////////////////////////////////////////////

std::vector<ArenaViolation> check_isolation(const FusedTaskPlan& plan, const StoreCatalog& catalog)
{
  struct Use {
    std::size_t arg;
    StoreId store;
    Privilege privilege;
    Rect rect;
  };
  std::vector<Point> points;
  plan.fused_task.launch.for_each_point([&](const Point& p) { points.push_back(p); });
  std::vector<std::vector<Use>> uses(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t a = 0; a < plan.all_args.size(); ++a) {
      if (plan.is_demoted(a)) {
        continue;
      }
      const auto& arg = plan.all_args[a];
      uses[i].push_back(Use{a, arg.store, arg.privilege,
                            sub_store_bounds(catalog.at(arg.store), arg.partition, points[i]).bounds});
    }
  }
  std::vector<ArenaViolation> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i; j < points.size(); ++j) {
      for (const auto& u : uses[i]) {
        for (const auto& v : uses[j]) {
          // One point shares a single arena copy between arguments naming the same view.
          if (u.store != v.store ||
              (i == j && plan.all_args[u.arg].partition == plan.all_args[v.arg].partition)) {
            continue;
          }
          const bool both_read = !writes(u.privilege) && !writes(v.privilege) && !reduces(u.privilege) &&
                                 !reduces(v.privilege);
          const bool both_reduce = reduces(u.privilege) && reduces(v.privilege);
          if (both_read || (both_reduce && i != j) || !u.rect.intersects(v.rect)) {
            continue;
          }
          out.push_back(ArenaViolation{u.store, points[i], points[j], u.arg, v.arg});
        }
      }
    }
  }
  return out;
}

void execute_isolated(const FusedTaskPlan& plan, const CompiledFusion& compiled, StoreHeap& heap)
{
  const auto violations = check_isolation(plan, heap.catalog());
  if (!violations.empty()) {
    const auto& v = violations.front();
    throw Error{ErrorCode::CommunicationRequired,
                fmt::format("{}: points {} and {} share data of store {} ({} violations)", plan.fused_task.kind,
                            v.first.coords(), v.second.coords(), v.store.value, violations.size())};
  }
  const auto& catalog = heap.catalog();
  struct Arena {
    std::vector<std::vector<double>> buffers;
    std::vector<Rect> rects;
  };
  std::vector<Arena> arenas;
  std::vector<std::size_t> external;
  // slot[i] is the arena buffer of external argument i; arguments naming the same view share one.
  std::vector<std::size_t> slot;
  std::vector<std::size_t> slot_arg;
  std::vector<bool> slot_written;
  for (std::size_t a = 0; a < plan.all_args.size(); ++a) {
    if (plan.is_demoted(a)) {
      continue;
    }
    const auto& arg = plan.all_args[a];
    std::size_t s = 0;
    while (s < slot_arg.size() && !(plan.all_args[slot_arg[s]].store == arg.store &&
                                    plan.all_args[slot_arg[s]].partition == arg.partition)) {
      ++s;
    }
    if (s == slot_arg.size()) {
      slot_arg.push_back(a);
      slot_written.push_back(false);
    }
    slot_written[s] = slot_written[s] || writes(arg.privilege) || reduces(arg.privilege);
    external.push_back(a);
    slot.push_back(s);
  }
  // Reduction buffers are write-only to kernels, so seeding each point with the running
  // total leaks nothing and keeps the fold order of sequential execution.
  std::map<StoreId, std::vector<double>> totals;
  for (auto a : slot_arg) {
    const auto& arg = plan.all_args[a];
    if (reduces(arg.privilege) && !totals.contains(arg.store)) {
      totals.emplace(arg.store, heap.data(arg.store));
    }
  }
  const auto scalars = scalar_values(plan);
  plan.fused_task.launch.for_each_point([&](const Point& p) {
    Arena arena;
    KernelBindings b;
    for (auto a : slot_arg) {
      const auto& arg = plan.all_args[a];
      const auto& store = catalog.at(arg.store);
      const auto rect = sub_store_bounds(store, arg.partition, p).bounds;
      std::vector<double> buf(rect.volume(), 0.0);
      const auto& src = reduces(arg.privilege) ? totals.at(arg.store) : heap.data(arg.store);
      for_each_element(rect, row_major_strides(store.shape), [&](std::size_t off, std::size_t k) { buf[k] = src[off]; });
      arena.buffers.push_back(std::move(buf));
      arena.rects.push_back(rect);
    }
    for (std::size_t i = 0; i < external.size(); ++i) {
      const auto s = slot[i];
      b.params.push_back(
        BufferView::dense(arena.buffers[s].data(), arena.rects[s].extents(), plan.all_args[external[i]].privilege));
    }
    b.scalars = scalars;
    b.class_extents = class_extents_at(plan, compiled, catalog, p);
    interpret(compiled.kernel, b);
    for (std::size_t s = 0; s < slot_arg.size(); ++s) {
      const auto& arg = plan.all_args[slot_arg[s]];
      if (!reduces(arg.privilege)) {
        continue;
      }
      auto& total = totals.at(arg.store);
      const auto& buf = arena.buffers[s];
      for_each_element(arena.rects[s], row_major_strides(catalog.at(arg.store).shape),
                       [&](std::size_t off, std::size_t k) { total[off] = buf[k]; });
    }
    arenas.push_back(std::move(arena));
  });
  for (const auto& arena : arenas) {
    for (std::size_t s = 0; s < slot_arg.size(); ++s) {
      const auto& arg = plan.all_args[slot_arg[s]];
      if (!slot_written[s] || reduces(arg.privilege)) {
        continue;
      }
      auto& dst = heap.data(arg.store);
      const auto& buf = arena.buffers[s];
      for_each_element(arena.rects[s], row_major_strides(catalog.at(arg.store).shape),
                       [&](std::size_t off, std::size_t k) { dst[off] = buf[k]; });
    }
  }
  for (auto& [id, total] : totals) {
    heap.data(id) = std::move(total);
  }
}

}  // namespace diffuse
