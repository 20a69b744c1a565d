/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <diffuse/error.hpp>
#include <diffuse/kernel.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <optional>

namespace diffuse {

////////////////////////////////////////////////////
// Composition
////////////////////////////////////////////////////

Kernel compose(std::span<const Kernel> kernels,
               const std::vector<std::vector<std::size_t>>& arg_map,
               const ComposeLayout& layout,
               std::string name)
{
  if (arg_map.size() != kernels.size()) {
    throw Error{ErrorCode::MalformedKernel,
                fmt::format("compose got {} kernels but {} argument maps", kernels.size(), arg_map.size())};
  }
  Kernel out;
  out.name = std::move(name);
  out.class_ranks = layout.class_ranks;

  std::vector<std::int32_t> arg_buffer(layout.args.size(), -1);
  for (std::size_t a = 0; a < layout.args.size(); ++a) {
    const auto& arg = layout.args[a];
    if (!arg.demoted) {
      arg_buffer[a] = static_cast<std::int32_t>(out.params.size());
      out.params.push_back(BufferParam{arg.name, arg.rank, arg.privilege, arg.shape_class});
    }
  }
  const auto param_count = static_cast<std::int32_t>(out.params.size());
  for (std::size_t a = 0; a < layout.args.size(); ++a) {
    const auto& arg = layout.args[a];
    if (arg.demoted) {
      arg_buffer[a] = param_count + static_cast<std::int32_t>(out.locals.size());
      out.locals.push_back(LocalBuffer{arg.name, arg.rank, arg.shape_class});
    }
  }

  std::int32_t scalar_offset = 0;
  for (std::size_t k = 0; k < kernels.size(); ++k) {
    const auto& kernel = kernels[k];
    const auto& map = arg_map[k];
    if (map.size() != kernel.params.size()) {
      throw Error{ErrorCode::MalformedKernel, fmt::format("argument map for kernel {} has {} entries, expected {}",
                                                          kernel.name, map.size(), kernel.params.size())};
    }
    std::vector<int> class_map(kernel.class_ranks.size(), -1);
    std::vector<std::int32_t> buffer_map(kernel.buffer_count(), -1);
    for (std::size_t p = 0; p < kernel.params.size(); ++p) {
      if (map[p] >= layout.args.size()) {
        throw Error{ErrorCode::MalformedKernel, fmt::format("kernel {} param {} maps past the argument list",
                                                            kernel.name, p)};
      }
      const auto& arg = layout.args[map[p]];
      if (arg.rank != kernel.params[p].rank) {
        throw Error{ErrorCode::MalformedKernel, fmt::format("kernel {} param {} has rank {}, composed arg {} has {}",
                                                            kernel.name, p, kernel.params[p].rank, arg.name, arg.rank)};
      }
      auto& slot = class_map[static_cast<std::size_t>(kernel.params[p].shape_class)];
      if (slot != -1 && slot != arg.shape_class) {
        throw Error{ErrorCode::MalformedKernel,
                    fmt::format("kernel {} shares a shape class between arguments of different shapes", kernel.name)};
      }
      slot = arg.shape_class;
      buffer_map[p] = arg_buffer[map[p]];
    }
    auto mapped_class = [&](int c) {
      const auto m = class_map.at(static_cast<std::size_t>(c));
      if (m < 0) {
        throw Error{ErrorCode::MalformedKernel,
                    fmt::format("kernel {} uses shape class {} that no parameter determines", kernel.name, c)};
      }
      return m;
    };
    for (std::size_t l = 0; l < kernel.locals.size(); ++l) {
      const auto& local = kernel.locals[l];
      buffer_map[kernel.params.size() + l] = param_count + static_cast<std::int32_t>(out.locals.size());
      out.locals.push_back(
        LocalBuffer{fmt::format("{}.{}", kernel.name, local.name), local.rank, mapped_class(local.shape_class)});
    }
    for (const auto& nest : kernel.nests) {
      LoopNest copy = nest;
      copy.shape_class = mapped_class(nest.shape_class);
      for (auto& ins : copy.body) {
        if (accesses_buffer(ins.op)) {
          ins.buffer = buffer_map.at(static_cast<std::size_t>(ins.buffer));
        }
        if (ins.op == Opcode::Scalar) {
          ins.scalar += scalar_offset;
        }
      }
      out.nests.push_back(std::move(copy));
    }
    scalar_offset += static_cast<std::int32_t>(kernel.scalar_count);
  }
  out.scalar_count = static_cast<std::size_t>(scalar_offset);
  verify(out);
  return out;
}

////////////////////////////////////////////////////
// Loop fusion
////////////////////////////////////////////////////

namespace {

struct BufferUse {
  bool written{};
  bool only_reduce_add{true};
  bool any_reduce_add{};
  std::optional<AccessIndex> common_index{};
  bool indices_agree{true};

  void record(const Instr& ins)
  {
    if (ins.op != Opcode::Load) {
      written = true;
    }
    if (ins.op == Opcode::ReduceAdd) {
      any_reduce_add = true;
    } else {
      only_reduce_add = false;
    }
    if (!common_index) {
      common_index = ins.index;
    } else if (*common_index != ins.index) {
      indices_agree = false;
    }
  }
};

std::map<std::int32_t, BufferUse> buffer_uses(const LoopNest& nest)
{
  std::map<std::int32_t, BufferUse> uses;
  for (const auto& ins : nest.body) {
    if (accesses_buffer(ins.op)) {
      uses[ins.buffer].record(ins);
    }
  }
  return uses;
}

bool can_merge(const LoopNest& first, const LoopNest& second)
{
  if (first.shape_class != second.shape_class || first.trim_lo != second.trim_lo || first.trim_hi != second.trim_hi) {
    return false;
  }
  const auto lhs = buffer_uses(first);
  const auto rhs = buffer_uses(second);
  for (const auto& [buffer, a] : lhs) {
    auto it = rhs.find(buffer);
    if (it == rhs.end()) {
      continue;
    }
    const auto& b = it->second;
    if (!a.written && !b.written) {
      continue;
    }
    if (a.only_reduce_add && b.only_reduce_add) {
      continue;
    }
    const bool same_index = a.indices_agree && b.indices_agree && *a.common_index == *b.common_index &&
                            a.common_index->is_injective(first.rank());
    if (!same_index || a.any_reduce_add || b.any_reduce_add) {
      return false;
    }
  }
  return true;
}

}  // namespace

Kernel fuse_loops(const Kernel& kernel)
{
  Kernel out = kernel;
  out.nests.clear();
  for (const auto& nest : kernel.nests) {
    if (!out.nests.empty() && can_merge(out.nests.back(), nest)) {
      auto& target = out.nests.back();
      const auto offset = static_cast<std::int32_t>(target.body.size());
      for (auto ins : nest.body) {
        for (std::size_t k = 0; k < operand_count(ins.op); ++k) {
          ins.operands[k] += offset;
        }
        target.body.push_back(std::move(ins));
      }
    } else {
      out.nests.push_back(nest);
    }
  }
  return out;
}

////////////////////////////////////////////////////
// Scalarization
////////////////////////////////////////////////////

namespace {

struct KnownValue {
  std::int32_t buffer;
  AccessIndex index;
  std::int32_t value;
};

/// Forwards stored values to later loads and reuses loads of the same element.
LoopNest forward_values(const LoopNest& nest)
{
  LoopNest out = nest;
  out.body.clear();
  std::vector<std::int32_t> remap(nest.body.size(), -1);
  std::vector<KnownValue> known;
  auto forget = [&](std::int32_t buffer) {
    std::erase_if(known, [&](const KnownValue& k) { return k.buffer == buffer; });
  };
  for (std::size_t i = 0; i < nest.body.size(); ++i) {
    Instr ins = nest.body[i];
    for (std::size_t k = 0; k < operand_count(ins.op); ++k) {
      ins.operands[k] = remap[static_cast<std::size_t>(ins.operands[k])];
    }
    if (ins.op == Opcode::Load) {
      auto it = std::find_if(known.begin(), known.end(),
                             [&](const KnownValue& k) { return k.buffer == ins.buffer && k.index == ins.index; });
      if (it != known.end()) {
        remap[i] = it->value;
        continue;
      }
    }
    const auto position = static_cast<std::int32_t>(out.body.size());
    out.body.push_back(ins);
    remap[i] = position;
    if (ins.op == Opcode::Load) {
      known.push_back(KnownValue{ins.buffer, ins.index, position});
    } else if (ins.op == Opcode::Store) {
      forget(ins.buffer);
      known.push_back(KnownValue{ins.buffer, ins.index, ins.operands[0]});
    } else if (ins.op == Opcode::ReduceAdd) {
      forget(ins.buffer);
    }
  }
  return out;
}

/// Drops instructions whose values never reach a store or reduce-add.
LoopNest eliminate_dead(const LoopNest& nest, const std::vector<bool>& dead_buffer)
{
  std::vector<bool> live(nest.body.size(), false);
  for (std::size_t i = nest.body.size(); i-- > 0;) {
    const auto& ins = nest.body[i];
    if (!produces_value(ins.op)) {
      live[i] = !dead_buffer[static_cast<std::size_t>(ins.buffer)];
    }
    if (live[i]) {
      for (std::size_t k = 0; k < operand_count(ins.op); ++k) {
        live[static_cast<std::size_t>(ins.operands[k])] = true;
      }
    }
  }
  LoopNest out = nest;
  out.body.clear();
  std::vector<std::int32_t> remap(nest.body.size(), -1);
  for (std::size_t i = 0; i < nest.body.size(); ++i) {
    if (!live[i]) {
      continue;
    }
    Instr ins = nest.body[i];
    for (std::size_t k = 0; k < operand_count(ins.op); ++k) {
      ins.operands[k] = remap[static_cast<std::size_t>(ins.operands[k])];
    }
    remap[i] = static_cast<std::int32_t>(out.body.size());
    out.body.push_back(std::move(ins));
  }
  return out;
}

}  // namespace

Kernel scalarize_locals(const Kernel& kernel)
{
  Kernel out = kernel;
  for (auto& nest : out.nests) {
    nest = forward_values(nest);
  }

  // A local that is never loaded is dead along with everything written to it.
  std::vector<bool> dead(out.buffer_count(), false);
  std::vector<bool> loaded(out.buffer_count(), false);
  for (const auto& nest : out.nests) {
    for (const auto& ins : nest.body) {
      if (ins.op == Opcode::Load) {
        loaded[static_cast<std::size_t>(ins.buffer)] = true;
      }
    }
  }
  for (std::size_t b = out.params.size(); b < out.buffer_count(); ++b) {
    dead[b] = !loaded[b];
  }
  for (auto& nest : out.nests) {
    nest = eliminate_dead(nest, dead);
  }
  std::erase_if(out.nests, [](const LoopNest& n) { return n.body.empty(); });

  std::vector<std::int32_t> renumber(out.buffer_count(), -1);
  std::vector<LocalBuffer> locals;
  for (std::size_t b = 0; b < out.buffer_count(); ++b) {
    if (b < out.params.size()) {
      renumber[b] = static_cast<std::int32_t>(b);
    } else if (!dead[b]) {
      renumber[b] = static_cast<std::int32_t>(out.params.size() + locals.size());
      locals.push_back(out.locals[b - out.params.size()]);
    }
  }
  out.locals = std::move(locals);
  for (auto& nest : out.nests) {
    for (auto& ins : nest.body) {
      if (accesses_buffer(ins.op)) {
        ins.buffer = renumber[static_cast<std::size_t>(ins.buffer)];
      }
    }
  }
  verify(out);
  return out;
}

Kernel optimize(const Kernel& kernel) { return scalarize_locals(fuse_loops(kernel)); }

MemoryTraffic count_memory_traffic(const Kernel& kernel, const std::vector<std::vector<Coord>>& class_extents)
{
  MemoryTraffic traffic;
  for (const auto& nest : kernel.nests) {
    const auto& extents = class_extents.at(static_cast<std::size_t>(nest.shape_class));
    std::uint64_t volume = 1;
    for (std::size_t d = 0; d < nest.rank(); ++d) {
      const auto n = extents.at(d) - nest.trim_lo[d] - nest.trim_hi[d];
      volume *= static_cast<std::uint64_t>(std::max<Coord>(0, n));
    }
    for (const auto& ins : nest.body) {
      if (ins.op == Opcode::Load) {
        traffic.loads += volume;
      } else if (!produces_value(ins.op)) {
        traffic.stores += volume;
      }
    }
  }
  return traffic;
}

}  // namespace diffuse
