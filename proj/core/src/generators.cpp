/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <diffuse/error.hpp>
#include <diffuse/generators.hpp>

#include <fmt/format.h>

namespace diffuse {

namespace {

enum class Need { Readable, Writable, ReadWrite, Reduce };

bool satisfies(Privilege p, Need need)
{
  switch (need) {
    case Need::Readable: return reads(p);
    case Need::Writable: return writes(p);
    case Need::ReadWrite: return p == Privilege::ReadWrite;
    case Need::Reduce: return reduces(p);
  }
  return false;
}

[[noreturn]] void mismatch(const GeneratorInput& in, std::string_view what)
{
  throw Error{ErrorCode::GeneratorMismatch, fmt::format("{}: {}", in.kind, what)};
}

void expect(const GeneratorInput& in, std::initializer_list<Need> needs, std::size_t scalars)
{
  if (in.ranks.size() != needs.size()) {
    mismatch(in, fmt::format("expected {} arguments, got {}", needs.size(), in.ranks.size()));
  }
  if (in.scalar_count != scalars) {
    mismatch(in, fmt::format("expected {} scalars, got {}", scalars, in.scalar_count));
  }
  std::size_t i = 0;
  for (auto need : needs) {
    if (!satisfies(in.privileges[i], need)) {
      mismatch(in, fmt::format("argument {} has privilege {}", i, to_string(in.privileges[i])));
    }
    ++i;
  }
}

void same_rank(const GeneratorInput& in, std::initializer_list<std::size_t> args)
{
  const auto r = in.ranks[*args.begin()];
  for (auto a : args) {
    if (in.ranks[a] != r) {
      mismatch(in, fmt::format("argument {} has rank {}, expected {}", a, in.ranks[a], r));
    }
  }
}

/// Kernel skeleton with one parameter (and one shape class) per argument.
Kernel skeleton(const GeneratorInput& in, std::initializer_list<const char*> names)
{
  Kernel k;
  k.name = in.kind;
  k.scalar_count = in.scalar_count;
  std::size_t i = 0;
  for (const auto* name : names) {
    k.params.push_back(BufferParam{name, in.ranks[i], in.privileges[i], static_cast<int>(i)});
    k.class_ranks.push_back(in.ranks[i]);
    ++i;
  }
  return k;
}

LoopNest& nest_over(Kernel& k, std::size_t param)
{
  const auto rank = k.params[param].rank;
  k.nests.push_back(LoopNest{static_cast<int>(param), std::vector<Coord>(rank, 0), std::vector<Coord>(rank, 0), {}});
  return k.nests.back();
}

AccessIndex first_element(std::size_t rank) { return AccessIndex::constant(std::vector<Coord>(rank, 0)); }

KernelGenerator binary_generator(Opcode op)
{
  return [op](const GeneratorInput& in) {
    if (in.ranks.size() == 3) {
      expect(in, {Need::Readable, Need::Readable, Need::Writable}, 0);
      same_rank(in, {0, 1, 2});
      auto k = skeleton(in, {"a", "b", "out"});
      NestBuilder b{nest_over(k, 2)};
      const auto id = AccessIndex::identity(in.ranks[2]);
      b.store(2, id, b.binary(op, b.load(0, id), b.load(1, id)));
      return k;
    }
    expect(in, {Need::Readable, Need::Writable}, 1);
    same_rank(in, {0, 1});
    auto k = skeleton(in, {"a", "out"});
    NestBuilder b{nest_over(k, 1)};
    const auto id = AccessIndex::identity(in.ranks[1]);
    const auto a = b.load(0, id);
    const auto s = b.scalar(0);
    b.store(1, id, op == Opcode::Mul ? b.binary(op, s, a) : b.binary(op, a, s));
    return k;
  };
}

Kernel copy_like(const GeneratorInput& in, bool negate)
{
  expect(in, {Need::Readable, Need::Writable}, 0);
  same_rank(in, {0, 1});
  auto k = skeleton(in, {"in", "out"});
  NestBuilder b{nest_over(k, 1)};
  const auto id = AccessIndex::identity(in.ranks[1]);
  auto v = b.load(0, id);
  if (negate) {
    v = b.unary(Opcode::Neg, v);
  }
  b.store(1, id, v);
  return k;
}

Kernel fill(const GeneratorInput& in)
{
  expect(in, {Need::Writable}, 1);
  auto k = skeleton(in, {"out"});
  NestBuilder b{nest_over(k, 0)};
  b.store(0, AccessIndex::identity(in.ranks[0]), b.scalar(0));
  return k;
}

Kernel axpy(const GeneratorInput& in)
{
  expect(in, {Need::Readable, Need::ReadWrite}, 1);
  same_rank(in, {0, 1});
  auto k = skeleton(in, {"x", "y"});
  NestBuilder b{nest_over(k, 1)};
  const auto id = AccessIndex::identity(in.ranks[1]);
  const auto ax = b.binary(Opcode::Mul, b.scalar(0), b.load(0, id));
  b.store(1, id, b.binary(Opcode::Add, ax, b.load(1, id)));
  return k;
}

Kernel scale_div(const GeneratorInput& in)
{
  expect(in, {Need::Readable, Need::Readable, Need::Readable, Need::Writable}, 0);
  same_rank(in, {2, 3});
  auto k = skeleton(in, {"num", "den", "a", "out"});
  NestBuilder b{nest_over(k, 3)};
  const auto id = AccessIndex::identity(in.ranks[3]);
  const auto ratio = b.binary(Opcode::Div, b.load(0, first_element(in.ranks[0])), b.load(1, first_element(in.ranks[1])));
  b.store(3, id, b.binary(Opcode::Mul, ratio, b.load(2, id)));
  return k;
}

Kernel where(const GeneratorInput& in)
{
  expect(in, {Need::Readable, Need::Readable, Need::Readable, Need::Writable}, 0);
  same_rank(in, {0, 1, 2, 3});
  auto k = skeleton(in, {"cond", "a", "b", "out"});
  NestBuilder b{nest_over(k, 3)};
  const auto id = AccessIndex::identity(in.ranks[3]);
  const auto c = b.binary(Opcode::Lt, b.constant(0.0), b.load(0, id));
  b.store(3, id, b.select(c, b.load(1, id), b.load(2, id)));
  return k;
}

Kernel dot(const GeneratorInput& in)
{
  expect(in, {Need::Readable, Need::Readable, Need::Reduce}, 0);
  same_rank(in, {0, 1});
  auto k = skeleton(in, {"a", "b", "acc"});
  NestBuilder b{nest_over(k, 0)};
  const auto id = AccessIndex::identity(in.ranks[0]);
  b.reduce_add(2, first_element(in.ranks[2]), b.binary(Opcode::Mul, b.load(0, id), b.load(1, id)));
  return k;
}

Kernel sum_like(const GeneratorInput& in, bool square)
{
  expect(in, {Need::Readable, Need::Reduce}, 0);
  auto k = skeleton(in, {"a", "acc"});
  NestBuilder b{nest_over(k, 0)};
  const auto id = AccessIndex::identity(in.ranks[0]);
  auto v = b.load(0, id);
  if (square) {
    v = b.binary(Opcode::Mul, v, v);
  }
  b.reduce_add(1, first_element(in.ranks[1]), v);
  return k;
}

Kernel accum(const GeneratorInput& in)
{
  expect(in, {Need::Readable, Need::Reduce}, 0);
  same_rank(in, {0, 1});
  auto k = skeleton(in, {"a", "out"});
  NestBuilder b{nest_over(k, 0)};
  const auto id = AccessIndex::identity(in.ranks[0]);
  b.reduce_add(1, id, b.load(0, id));
  return k;
}

}  // namespace

GeneratorInput generator_input(const IndexTask& task, const StoreCatalog& catalog)
{
  GeneratorInput in{task.kind, {}, {}, task.scalars.size()};
  for (const auto& arg : task.args) {
    in.ranks.push_back(catalog.at(arg.store).shape.rank());
    in.privileges.push_back(arg.privilege);
  }
  return in;
}

GeneratorRegistry GeneratorRegistry::builtin()
{
  GeneratorRegistry r;
  r.add("ADD", binary_generator(Opcode::Add));
  r.add("SUB", binary_generator(Opcode::Sub));
  r.add("MULT", binary_generator(Opcode::Mul));
  r.add("DIV", binary_generator(Opcode::Div));
  r.add("POW", binary_generator(Opcode::Pow));
  r.add("MAXIMUM", binary_generator(Opcode::Max));
  r.add("MINIMUM", binary_generator(Opcode::Min));
  r.add("COPY", [](const GeneratorInput& in) { return copy_like(in, false); });
  r.add("NEG", [](const GeneratorInput& in) { return copy_like(in, true); });
  r.add("FILL", fill);
  r.add("AXPY", axpy);
  r.add("SCALE_DIV", scale_div);
  r.add("WHERE", where);
  r.add("DOT", dot);
  r.add("SUM", [](const GeneratorInput& in) { return sum_like(in, false); });
  r.add("NORM", [](const GeneratorInput& in) { return sum_like(in, true); });
  r.add("ACCUM", accum);
  return r;
}

void GeneratorRegistry::add(std::string kind, KernelGenerator generator)
{
  generators_.insert_or_assign(std::move(kind), std::move(generator));
}

bool GeneratorRegistry::contains(std::string_view kind) const { return generators_.find(kind) != generators_.end(); }

std::vector<std::string> GeneratorRegistry::kinds() const
{
  std::vector<std::string> out;
  for (const auto& [k, _] : generators_) {
    out.push_back(k);
  }
  return out;
}

Kernel GeneratorRegistry::generate(const GeneratorInput& input) const
{
  auto it = generators_.find(input.kind);
  if (it == generators_.end()) {
    throw Error{ErrorCode::NoGenerator, fmt::format("no kernel generator for task kind {}", input.kind)};
  }
  auto kernel = it->second(input);
  if (kernel.params.size() != input.ranks.size()) {
    throw Error{ErrorCode::GeneratorMismatch, fmt::format("generator for {} produced {} params for {} arguments",
                                                          input.kind, kernel.params.size(), input.ranks.size())};
  }
  verify(kernel);
  return kernel;
}

Kernel GeneratorRegistry::generate(const IndexTask& task, const StoreCatalog& catalog) const
{
  return generate(generator_input(task, catalog));
}

}  // namespace diffuse
