/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "fuzz.hpp"

#include <diffuse/error.hpp>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <map>
#include <memory>
#include <random>

namespace diffuse::testing {

namespace {

struct View {
  StoreId store;
  Partition partition;
};

/// Everything one launch domain can use.
struct DomainPools {
  Domain launch;
  std::vector<View> readable;   // same extents as the tile at every point
  std::vector<View> writable;   // injective identity tilings
  std::vector<View> dropped;    // rank-1 views through a dimension-dropping projection
  std::vector<View> accumulate; // reduction targets matching the tile (ACCUM)
  View scalar_acc;              // (1,) store under replication (SUM)
};

class Generator {
 public:
  Generator(std::uint64_t seed, const FuzzOptions& options) : rng_{seed}, options_{options} {}

  Program run()
  {
    rank_ = pick(1, 2);
    // Per-dimension store size S with up to two factorizations S = tile * extent.
    std::vector<std::vector<std::pair<Coord, Coord>>> factors(rank_);
    std::vector<Coord> size(rank_);
    for (std::size_t d = 0; d < rank_; ++d) {
      std::vector<std::pair<Coord, Coord>> f;
      while (f.empty()) {
        size[d] = pick(1, 12);
        for (Coord t = 1; t <= 4; ++t) {
          if (size[d] % t == 0 && size[d] / t <= 4) {
            f.emplace_back(t, size[d] / t);
          }
        }
      }
      std::shuffle(f.begin(), f.end(), rng_);
      factors[d] = std::move(f);
    }
    const std::size_t domains = chance(0.35) ? 2 : 1;

    auto plus = [&](Coord k) {
      auto s = size;
      for (auto& e : s) {
        e += k;
      }
      return Domain{s};
    };
    std::vector<StoreId> plain;
    for (int i = 0; i < 3; ++i) {
      plain.push_back(prog_.create(Domain{size}, fmt::format("a{}", i)));
    }
    const auto padded = prog_.create(plus(1), "pad");
    const auto grid   = prog_.create(plus(2), "grid");
    const auto acc    = prog_.create(Domain{1}, "acc");
    const auto row    = rank_ == 2 ? prog_.create(Domain{size[0]}, "row") : StoreId{};

    for (std::size_t k = 0; k < domains; ++k) {
      std::vector<Coord> tile(rank_);
      std::vector<Coord> ext(rank_);
      for (std::size_t d = 0; d < rank_; ++d) {
        const auto& f = factors[d][k % factors[d].size()];
        tile[d]       = f.first;
        ext[d]        = f.second;
      }
      DomainPools pools{Domain{ext}, {}, {}, {}, {}, {acc, Partition::none()}};
      const Point t{tile};
      auto offset = [&](Coord o) { return Point{std::vector<Coord>(rank_, o)}; };

      for (auto s : plain) {
        const auto p = Partition::tiling(t);
        pools.readable.push_back({s, p});
        pools.writable.push_back({s, p});
      }
      if (rank_ == 2 && ext[0] == ext[1] && tile[0] == tile[1]) {
        pools.readable.push_back({plain[0], Partition::tiling(t, offset(0), Projection{{{0, 1}, {1, 0}}, {0, 0}})});
      }
      pools.readable.push_back({padded, Partition::tiling(t)});
      pools.writable.push_back({padded, Partition::tiling(t)});
      pools.readable.push_back({padded, Partition::tiling(t, offset(1))});
      for (int v = 0; v < (rank_ == 2 ? 9 : 3); ++v) {
        std::vector<Coord> o(rank_);
        o[0] = v % 3;
        if (rank_ == 2) {
          o[1] = v / 3;
        }
        const auto p = Partition::tiling(t, Point{o});
        pools.readable.push_back({grid, p});
        if (chance(0.4)) {
          pools.writable.push_back({grid, p});
        }
      }
      const auto small = prog_.create(Domain{tile}, fmt::format("small{}", k));
      pools.readable.push_back({small, Partition::none()});
      pools.accumulate.push_back({small, Partition::none()});
      if (rank_ == 2) {
        pools.dropped.push_back({row, Partition::tiling(Point{tile[0]}, Point{0}, Projection{{{1, 0}}, {0}})});
      }
      pools_.push_back(std::move(pools));
    }

    const auto ntasks = static_cast<std::size_t>(
      pick(static_cast<Coord>(options_.min_tasks), static_cast<Coord>(options_.max_tasks)));
    std::vector<IndexTask> tasks;
    std::vector<bool> flush_after;
    while (tasks.size() < ntasks) {
      auto& pools = pools_[chance(0.7) ? 0 : static_cast<std::size_t>(pick(0, static_cast<Coord>(pools_.size()) - 1))];
      if (auto t = make_task(pools)) {
        tasks.push_back(std::move(*t));
        flush_after.push_back(chance(options_.flush_probability));
      }
    }
    emit(tasks, flush_after);
    return std::move(prog_);
  }

 private:
  Coord pick(Coord lo, Coord hi) { return std::uniform_int_distribution<Coord>{lo, hi}(rng_); }
  bool chance(double p) { return std::bernoulli_distribution{p}(rng_); }
  template <typename T>
  const T& any(const std::vector<T>& v)
  {
    return v[static_cast<std::size_t>(pick(0, static_cast<Coord>(v.size()) - 1))];
  }

  static StoreArg arg(const View& v, Privilege p) { return StoreArg{v.store, v.partition, p}; }

  /// Writers share their store with no other partition; reduction targets are used once.
  static bool legal(const IndexTask& t)
  {
    for (const auto& a : t.args) {
      if (!writes(a.privilege) && !reduces(a.privilege)) {
        continue;
      }
      for (const auto& b : t.args) {
        if (&a == &b || a.store != b.store) {
          continue;
        }
        if (reduces(a.privilege) || b.partition != a.partition) {
          return false;
        }
      }
    }
    return true;
  }

  std::optional<IndexTask> make_task(const DomainPools& pools)
  {
    static const std::vector<std::string> binary{"ADD", "SUB", "MAXIMUM", "MINIMUM"};
    IndexTask t;
    t.launch = pools.launch;
    const auto r = pick(0, 99);
    if (r < 30) {
      t.kind = any(binary);
      t.args = {arg(any(pools.readable), Privilege::Read), arg(any(pools.readable), Privilege::Read),
                arg(any(pools.writable), Privilege::Write)};
    } else if (r < 42) {
      t.kind    = chance(0.5) ? "ADD" : "MULT";
      t.args    = {arg(any(pools.readable), Privilege::Read), arg(any(pools.writable), Privilege::Write)};
      t.scalars = {ScalarParam{"s", static_cast<double>(t.kind == "ADD" ? pick(-2, 3) : pick(2, 3))}};
    } else if (r < 54) {
      t.kind = chance(0.6) ? "COPY" : "NEG";
      t.args = {arg(any(pools.readable), Privilege::Read), arg(any(pools.writable), Privilege::Write)};
    } else if (r < 58) {
      t.kind    = "FILL";
      t.args    = {arg(any(pools.writable), Privilege::Write)};
      t.scalars = {ScalarParam{"value", static_cast<double>(pick(0, 5))}};
    } else if (r < 66) {
      t.kind    = "AXPY";
      t.args    = {arg(any(pools.readable), Privilege::Read), arg(any(pools.writable), Privilege::ReadWrite)};
      t.scalars = {ScalarParam{"alpha", 2.0}};
    } else if (r < 74) {
      t.kind = "SUM";
      const auto& src = !pools.dropped.empty() && chance(0.3) ? any(pools.dropped) : any(pools.readable);
      t.args = {arg(src, Privilege::Read), arg(pools.scalar_acc, Privilege::Reduce)};
    } else if (r < 82) {
      t.kind = "ACCUM";
      t.args = {arg(any(pools.readable), Privilege::Read), arg(any(pools.accumulate), Privilege::Reduce)};
    } else if (r < 88) {
      t.kind = "WHERE";
      t.args = {arg(any(pools.readable), Privilege::Read), arg(any(pools.readable), Privilege::Read),
                arg(any(pools.readable), Privilege::Read), arg(any(pools.writable), Privilege::Write)};
    } else if (options_.opaque_tasks && r < 94) {
      t.kind = "BARRIER";
      t.args = {arg(any(pools.readable), Privilege::Read), arg(any(pools.writable), Privilege::Write)};
    } else {
      t.kind = "ADD";
      const auto& w = any(pools.writable);
      t.args = {arg(w, Privilege::Read), arg(any(pools.readable), Privilege::Read), arg(w, Privilege::Write)};
    }
    if (!legal(t)) {
      return std::nullopt;
    }
    return t;
  }

  void emit(const std::vector<IndexTask>& tasks, const std::vector<bool>& flush_after)
  {
    std::map<StoreId, std::size_t> last_use;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      for (const auto& a : tasks[i].args) {
        last_use[a.store] = i;
      }
    }
    std::vector<StoreId> all;
    for (const auto& c : prog_.commands) {
      all.push_back(std::get<CreateStore>(c).id);
    }
    std::map<std::size_t, std::vector<StoreId>> drop_at;
    std::vector<StoreId> drop_late;
    for (auto id : all) {
      if (!chance(options_.drop_probability)) {
        continue;
      }
      auto it = last_use.find(id);
      if (it != last_use.end() && chance(0.7)) {
        drop_at[it->second].push_back(id);
      } else {
        drop_late.push_back(id);
      }
    }
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      prog_.launch(tasks[i]);
      for (auto id : drop_at[i]) {
        prog_.drop(id);
      }
      if (flush_after[i]) {
        prog_.flush();
      }
    }
    for (auto id : drop_late) {
      prog_.drop(id);
    }
    prog_.flush();
  }

  std::mt19937_64 rng_;
  FuzzOptions options_;
  Program prog_{};
  std::size_t rank_{};
  std::vector<DomainPools> pools_{};
};

void barrier(const IndexTask& task, StoreHeap& heap)
{
  if (task.args.size() != 2) {
    throw Error{ErrorCode::MalformedTask, "BARRIER expects (in: R, out: W)"};
  }
  const auto& in  = heap.catalog().at(task.args[0].store);
  const auto& out = heap.catalog().at(task.args[1].store);
  task.launch.for_each_point([&](const Point& p) {
    const auto a = sub_store_bounds(in, task.args[0].partition, p).bounds;
    const auto b = sub_store_bounds(out, task.args[1].partition, p).bounds;
    if (a.extents() != b.extents()) {
      throw Error{ErrorCode::OutOfBounds, "BARRIER arguments differ in extents"};
    }
    const auto& src = heap.data(in.id);
    auto& dst       = heap.data(out.id);
    Domain local{a.extents()};
    local.for_each_point([&](const Point& e) {
      std::vector<Coord> ca(e.rank());
      std::vector<Coord> cb(e.rank());
      for (std::size_t d = 0; d < e.rank(); ++d) {
        ca[d] = a.lo[d] + e[d];
        cb[d] = b.lo[d] + e[d];
      }
      dst[out.shape.linearize(Point{cb})] = src[in.shape.linearize(Point{ca})] + 1.0;
    });
  });
}

}  // namespace

Program random_program(std::uint64_t seed, const FuzzOptions& options) { return Generator{seed, options}.run(); }

OpaqueRegistry fuzz_opaque()
{
  auto r = OpaqueRegistry::builtin();
  r.add("BARRIER", barrier);
  return r;
}

void FuzzSummary::fail(std::string message)
{
  ++failures;
  if (messages.size() < 20) {
    messages.push_back(std::move(message));
  }
}

FuzzSummary fuzz_soundness(std::uint64_t first_seed, std::size_t count)
{
  FuzzSummary s;
  const auto opaque = fuzz_opaque();
  auto cache        = std::make_shared<MemoCache>();
  for (std::size_t i = 0; i < count; ++i) {
    const auto seed = first_seed + i;
    const auto prog = random_program(seed);
    for (std::size_t window : {3, 10}) {
      SessionOptions o;
      o.execute               = false;
      o.engine.initial_window = window;
      o.engine.oracle_check   = true;
      o.cache                 = cache;
      try {
        Session session{o, GeneratorRegistry::builtin(), opaque};
        session.run(prog);
        const auto& st = session.engine().stats();
        s.tasks += st.tasks_in;
        s.fused_prefixes += st.fused_prefixes;
        s.oracle_checks += st.oracle_checks;
        s.oracle_incomplete += st.oracle_incomplete;
        s.temporaries += st.temporaries_eliminated;
        s.memo_hits += st.memo_hits;
      } catch (const Error& e) {
        s.fail(fmt::format("seed {} window {}: {}", seed, window, e.what()));
      }
    }
    ++s.streams;
  }
  return s;
}

FuzzSummary fuzz_differential(std::uint64_t first_seed, std::size_t count)
{
  FuzzSummary s;
  const auto opaque     = fuzz_opaque();
  const auto generators = GeneratorRegistry::builtin();
  struct Variant {
    const char* name;
    bool temp_elim;
    bool memo;
    bool isolated;
    std::shared_ptr<MemoCache> cache;
  };
  std::vector<Variant> variants{{"default", true, true, false, std::make_shared<MemoCache>()},
                                {"no-temp-elim", false, true, false, std::make_shared<MemoCache>()},
                                {"no-memo", true, false, false, nullptr},
                                {"isolated", true, true, true, std::make_shared<MemoCache>()}};
  for (std::size_t i = 0; i < count; ++i) {
    const auto seed = first_seed + i;
    const auto prog = random_program(seed);
    RunResult reference;
    try {
      reference = execute_sequential(prog, seed, generators, opaque);
    } catch (const Error& e) {
      s.fail(fmt::format("seed {} reference: {}", seed, e.what()));
      continue;
    }
    s.tasks += reference.report.tasks_in;
    for (std::size_t window : {2, 5, 10, 30}) {
      for (const auto& v : variants) {
        SessionOptions o;
        o.seed                  = seed;
        o.engine.initial_window = window;
        o.engine.temp_elim      = v.temp_elim;
        o.engine.memo           = v.memo;
        o.isolated              = v.isolated;
        o.cache                 = v.cache;
        try {
          const auto fused = execute_with_fusion(prog, o, generators, opaque);
          s.fused_prefixes += fused.report.fused_prefixes;
          s.temporaries += fused.report.temporaries_eliminated;
          s.memo_hits += fused.report.memo_hits;
          std::string why;
          if (!heaps_equal(fused.heap, reference.heap, reference.live, &why)) {
            s.fail(fmt::format("seed {} window {} {}: {}", seed, window, v.name, why));
          }
        } catch (const Error& e) {
          s.fail(fmt::format("seed {} window {} {}: {}", seed, window, v.name, e.what()));
        }
      }
    }
    ++s.streams;
  }
  return s;
}

}  // namespace diffuse::testing
