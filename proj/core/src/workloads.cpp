/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <diffuse/error.hpp>
#include <diffuse/workloads.hpp>

#include <fmt/format.h>

#include <array>

namespace diffuse {

namespace {

StoreArg R(StoreId s, const Partition& p) { return StoreArg{s, p, Privilege::Read}; }
StoreArg W(StoreId s, const Partition& p) { return StoreArg{s, p, Privilege::Write}; }
StoreArg Rd(StoreId s, const Partition& p) { return StoreArg{s, p, Privilege::Reduce}; }

IndexTask task(std::string kind, const Domain& launch, std::vector<StoreArg> args, std::vector<ScalarParam> scalars = {})
{
  return IndexTask{std::move(kind), launch, std::move(args), std::move(scalars)};
}

Coord tile_size(const WorkloadParams& p)
{
  if (p.size == 0 || p.nodes == 0 || p.size % p.nodes != 0) {
    throw Error{ErrorCode::MalformedPartition,
                fmt::format("size {} is not a positive multiple of nodes {}", p.size, p.nodes)};
  }
  return static_cast<Coord>(p.size / p.nodes);
}

/// A vector store with its tiled partition, created and declared in one step.
struct Vec {
  StoreId id;
  Partition tile;
};

Vec vec(Program& prog, std::string name, Coord n, Coord t)
{
  const auto id = prog.create(Domain{n}, name);
  return Vec{id, prog.declare(id, name + ".tile", Partition::tiling(Point{t}))};
}

}  // namespace

Program make_stencil(const WorkloadParams& params)
{
  const auto t = tile_size(params);
  const auto n = static_cast<Coord>(params.size);
  const auto k = static_cast<Coord>(params.nodes);
  const Domain launch{k, k};
  Program prog;

  const auto grid   = prog.create(Domain{n + 2, n + 2}, "grid");
  const auto center = prog.declare(grid, "center", Partition::tiling(Point{t, t}, Point{1, 1}));
  const auto north  = prog.declare(grid, "north", Partition::tiling(Point{t, t}, Point{0, 1}));
  const auto east   = prog.declare(grid, "east", Partition::tiling(Point{t, t}, Point{1, 2}));
  const auto west   = prog.declare(grid, "west", Partition::tiling(Point{t, t}, Point{1, 0}));
  const auto south  = prog.declare(grid, "south", Partition::tiling(Point{t, t}, Point{2, 1}));

  for (std::size_t it = 0; it < params.iters; ++it) {
    auto make = [&](const char* base) {
      const auto name = fmt::format("{}.{}", base, it);
      const auto id   = prog.create(Domain{n, n}, name);
      return Vec{id, prog.declare(id, name + ".tile", Partition::tiling(Point{t, t}))};
    };
    const auto t1   = make("t1");
    const auto t2   = make("t2");
    const auto t3   = make("t3");
    const auto avg  = make("avg");
    const auto work = make("work");
    prog.launch(task("ADD", launch, {R(grid, center), R(grid, north), W(t1.id, t1.tile)}));
    prog.launch(task("ADD", launch, {R(t1.id, t1.tile), R(grid, east), W(t2.id, t2.tile)}));
    prog.launch(task("ADD", launch, {R(t2.id, t2.tile), R(grid, west), W(t3.id, t3.tile)}));
    prog.launch(task("ADD", launch, {R(t3.id, t3.tile), R(grid, south), W(avg.id, avg.tile)}));
    prog.launch(task("MULT", launch, {R(avg.id, avg.tile), W(work.id, work.tile)}, {ScalarParam{"s", 0.2}}));
    prog.launch(task("COPY", launch, {R(work.id, work.tile), W(grid, center)}));
    for (const auto& v : {t1, t2, t3, avg, work}) {
      prog.drop(v.id);
    }
    prog.flush();
  }
  return prog;
}

Program make_jacobi(const WorkloadParams& params)
{
  const auto t = tile_size(params);
  const auto n = static_cast<Coord>(params.size);
  const Domain launch{static_cast<Coord>(params.nodes)};
  Program prog;

  const auto a    = prog.create(Domain{n, n}, "A");
  const auto aall = prog.declare(a, "A.all", Partition::none());
  const auto b    = vec(prog, "b", n, t);
  const auto d    = vec(prog, "d", n, t);
  const auto x    = vec(prog, "x", n, t);
  const auto xall = prog.declare(x.id, "x.all", Partition::none());

  for (std::size_t it = 0; it < params.iters; ++it) {
    const auto y = vec(prog, fmt::format("y.{}", it), n, t);
    const auto r = vec(prog, fmt::format("t.{}", it), n, t);
    prog.launch(task("MATVEC", launch, {R(a, aall), R(x.id, xall), W(y.id, y.tile)}));
    prog.launch(task("SUB", launch, {R(b.id, b.tile), R(y.id, y.tile), W(r.id, r.tile)}));
    prog.launch(task("DIV", launch, {R(r.id, r.tile), R(d.id, d.tile), W(x.id, x.tile)}));
    prog.drop(y.id);
    prog.drop(r.id);
    prog.flush();
  }
  return prog;
}

Program make_blackscholes_chain(const WorkloadParams& params)
{
  constexpr std::size_t kTemps = 65;
  const auto t                 = tile_size(params);
  const auto n                 = static_cast<Coord>(params.size);
  const Domain launch{static_cast<Coord>(params.nodes)};
  Program prog;

  const std::array<Vec, 5> in{vec(prog, "S", n, t), vec(prog, "K", n, t), vec(prog, "T", n, t),
                              vec(prog, "r", n, t), vec(prog, "v", n, t)};
  const auto call = vec(prog, "call", n, t);
  const auto put  = vec(prog, "put", n, t);

  for (std::size_t it = 0; it < params.iters; ++it) {
    std::vector<Vec> tmp;
    for (std::size_t i = 0; i < kTemps; ++i) {
      tmp.push_back(vec(prog, fmt::format("bs{}.{}", i, it), n, t));
      const auto& a   = i == 0 ? in[0] : tmp[i - 1];
      const auto& b   = (i % 3 == 2 && i >= 2) ? tmp[i - 2] : in[i % in.size()];
      const auto& out = tmp.back();
      switch (i % 6) {
        case 0: prog.launch(task("ADD", launch, {R(a.id, a.tile), R(b.id, b.tile), W(out.id, out.tile)})); break;
        case 1:
          prog.launch(task("MULT", launch, {R(a.id, a.tile), W(out.id, out.tile)}, {ScalarParam{"half", 0.5}}));
          break;
        case 2: prog.launch(task("SUB", launch, {R(a.id, a.tile), R(b.id, b.tile), W(out.id, out.tile)})); break;
        case 3: prog.launch(task("MAXIMUM", launch, {R(a.id, a.tile), R(b.id, b.tile), W(out.id, out.tile)})); break;
        case 4: prog.launch(task("MULT", launch, {R(a.id, a.tile), R(b.id, b.tile), W(out.id, out.tile)})); break;
        default:
          prog.launch(task("MINIMUM", launch, {R(a.id, a.tile), R(b.id, b.tile), W(out.id, out.tile)}));
          break;
      }
    }
    const auto& last = tmp.back();
    const auto& prev = tmp[kTemps - 2];
    prog.launch(task("MAXIMUM", launch, {R(last.id, last.tile), R(in[1].id, in[1].tile), W(call.id, call.tile)}));
    prog.launch(task("MINIMUM", launch, {R(prev.id, prev.tile), R(in[0].id, in[0].tile), W(put.id, put.tile)}));
    for (const auto& v : tmp) {
      prog.drop(v.id);
    }
    prog.flush();
  }
  return prog;
}

Program make_cg_like(const WorkloadParams& params)
{
  const auto t = tile_size(params);
  const auto n = static_cast<Coord>(params.size);
  const Domain launch{static_cast<Coord>(params.nodes)};
  Program prog;

  auto scalar = [&](std::string name) {
    const auto id = prog.create(Domain{1}, name);
    return Vec{id, prog.declare(id, name + ".all", Partition::none())};
  };

  const auto a     = prog.create(Domain{n, n}, "A");
  const auto aall  = prog.declare(a, "A.all", Partition::none());
  const auto x     = vec(prog, "x", n, t);
  const auto r     = vec(prog, "r", n, t);
  const auto r_old = vec(prog, "r_old", n, t);
  const auto p     = vec(prog, "p", n, t);
  const auto pall  = prog.declare(p.id, "p.all", Partition::none());
  const auto q     = vec(prog, "q", n, t);
  auto rr          = scalar("rr.init");

  for (std::size_t it = 0; it < params.iters; ++it) {
    const auto pq     = scalar(fmt::format("pq.{}", it));
    const auto rr_new = scalar(fmt::format("rr.{}", it));
    const auto pq_t   = vec(prog, fmt::format("pq_t.{}", it), n, t);
    const auto ap     = vec(prog, fmt::format("ap.{}", it), n, t);
    const auto aq     = vec(prog, fmt::format("aq.{}", it), n, t);
    const auto rr_t   = vec(prog, fmt::format("rr_t.{}", it), n, t);
    const auto bp     = vec(prog, fmt::format("bp.{}", it), n, t);

    prog.launch(task("SPMV", launch, {R(a, aall), R(p.id, pall), W(q.id, q.tile)}));
    prog.launch(task("COPY", launch, {R(r.id, r.tile), W(r_old.id, r_old.tile)}));
    prog.launch(task("MULT", launch, {R(p.id, p.tile), R(q.id, q.tile), W(pq_t.id, pq_t.tile)}));
    prog.launch(task("SUM", launch, {R(pq_t.id, pq_t.tile), Rd(pq.id, pq.tile)}));
    prog.launch(task("SCALE_DIV", launch, {R(rr.id, rr.tile), R(pq.id, pq.tile), R(p.id, p.tile), W(ap.id, ap.tile)}));
    prog.launch(task("ADD", launch, {R(x.id, x.tile), R(ap.id, ap.tile), W(x.id, x.tile)}));
    prog.launch(task("SCALE_DIV", launch, {R(rr.id, rr.tile), R(pq.id, pq.tile), R(q.id, q.tile), W(aq.id, aq.tile)}));
    prog.launch(task("SUB", launch, {R(r.id, r.tile), R(aq.id, aq.tile), W(r.id, r.tile)}));
    prog.launch(task("MULT", launch, {R(r.id, r.tile), R(r.id, r.tile), W(rr_t.id, rr_t.tile)}));
    prog.launch(task("SUM", launch, {R(rr_t.id, rr_t.tile), Rd(rr_new.id, rr_new.tile)}));
    prog.launch(task("SCALE_DIV", launch, {R(rr_new.id, rr_new.tile), R(rr.id, rr.tile), R(p.id, p.tile), W(bp.id, bp.tile)}));
    prog.launch(task("ADD", launch, {R(r.id, r.tile), R(bp.id, bp.tile), W(p.id, p.tile)}));
    for (const auto& v : {pq, pq_t, ap, aq, rr_t, bp, rr}) {
      prog.drop(v.id);
    }
    rr = rr_new;
    prog.flush();
  }
  return prog;
}

const std::vector<std::string>& workload_names()
{
  static const std::vector<std::string> names{"stencil", "blackscholes_chain", "jacobi", "cg_like"};
  return names;
}

Program make_workload(std::string_view name, const WorkloadParams& params)
{
  if (name == "stencil") {
    return make_stencil(params);
  }
  if (name == "blackscholes_chain") {
    return make_blackscholes_chain(params);
  }
  if (name == "jacobi") {
    return make_jacobi(params);
  }
  if (name == "cg_like") {
    return make_cg_like(params);
  }
  throw Error{ErrorCode::UnknownTask, fmt::format("unknown workload \"{}\"", name)};
}

std::size_t tasks_per_iteration(std::string_view name)
{
  if (name == "stencil") {
    return 6;
  }
  if (name == "blackscholes_chain") {
    return 67;
  }
  if (name == "jacobi") {
    return 3;
  }
  if (name == "cg_like") {
    return 12;
  }
  throw Error{ErrorCode::UnknownTask, fmt::format("unknown workload \"{}\"", name)};
}

}  // namespace diffuse
