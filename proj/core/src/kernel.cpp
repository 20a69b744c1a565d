/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <diffuse/error.hpp>
#include <diffuse/kernel.hpp>

#include <fmt/format.h>

#include <algorithm>

namespace diffuse {

std::string_view to_string(Opcode op) noexcept
{
  switch (op) {
    case Opcode::Constant: return "const";
    case Opcode::Scalar: return "scalar";
    case Opcode::Load: return "load";
    case Opcode::Neg: return "neg";
    case Opcode::Add: return "add";
    case Opcode::Sub: return "sub";
    case Opcode::Mul: return "mul";
    case Opcode::Div: return "div";
    case Opcode::Pow: return "pow";
    case Opcode::Min: return "min";
    case Opcode::Max: return "max";
    case Opcode::Lt: return "lt";
    case Opcode::Le: return "le";
    case Opcode::Eq: return "eq";
    case Opcode::Select: return "select";
    case Opcode::Store: return "store";
    case Opcode::ReduceAdd: return "reduce_add";
  }
  return "?";
}

std::size_t operand_count(Opcode op) noexcept
{
  switch (op) {
    case Opcode::Constant:
    case Opcode::Scalar:
    case Opcode::Load: return 0;
    case Opcode::Neg:
    case Opcode::Store:
    case Opcode::ReduceAdd: return 1;
    case Opcode::Select: return 3;
    default: return 2;
  }
}

AccessIndex AccessIndex::identity(std::size_t rank)
{
  AccessIndex index;
  index.loop_dims.resize(rank);
  index.shifts.assign(rank, 0);
  for (std::size_t d = 0; d < rank; ++d) {
    index.loop_dims[d] = static_cast<int>(d);
  }
  return index;
}

AccessIndex AccessIndex::constant(std::vector<Coord> coords)
{
  AccessIndex index;
  index.loop_dims.assign(coords.size(), -1);
  index.shifts = std::move(coords);
  return index;
}

bool AccessIndex::is_injective(std::size_t nest_rank) const
{
  std::vector<int> seen(nest_rank, 0);
  for (auto d : loop_dims) {
    if (d < 0) {
      continue;
    }
    if (static_cast<std::size_t>(d) >= nest_rank || seen[static_cast<std::size_t>(d)]++ > 0) {
      return false;
    }
  }
  return std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; });
}

std::size_t Kernel::buffer_rank(std::int32_t buffer) const
{
  if (buffer < 0 || static_cast<std::size_t>(buffer) >= buffer_count()) {
    throw Error{ErrorCode::MalformedKernel, fmt::format("buffer id {} out of range in kernel {}", buffer, name)};
  }
  return is_local(buffer) ? locals[static_cast<std::size_t>(buffer) - params.size()].rank
                          : params[static_cast<std::size_t>(buffer)].rank;
}

int Kernel::buffer_class(std::int32_t buffer) const
{
  if (buffer < 0 || static_cast<std::size_t>(buffer) >= buffer_count()) {
    throw Error{ErrorCode::MalformedKernel, fmt::format("buffer id {} out of range in kernel {}", buffer, name)};
  }
  return is_local(buffer) ? locals[static_cast<std::size_t>(buffer) - params.size()].shape_class
                          : params[static_cast<std::size_t>(buffer)].shape_class;
}

namespace {

[[noreturn]] void malformed(const Kernel& kernel, std::size_t nest, std::size_t instr, const std::string& what)
{
  throw Error{ErrorCode::MalformedKernel, fmt::format("kernel {} nest {} instr {}: {}", kernel.name, nest, instr, what)};
}

void check_class(const Kernel& kernel, int shape_class, std::size_t rank, const std::string& owner)
{
  if (shape_class < 0 || static_cast<std::size_t>(shape_class) >= kernel.class_ranks.size()) {
    throw Error{ErrorCode::MalformedKernel, fmt::format("kernel {}: {} has unknown shape class {}", kernel.name, owner,
                                                        shape_class)};
  }
  if (kernel.class_ranks[static_cast<std::size_t>(shape_class)] != rank) {
    throw Error{ErrorCode::MalformedKernel,
                fmt::format("kernel {}: {} has rank {} but shape class {} has rank {}", kernel.name, owner, rank,
                            shape_class, kernel.class_ranks[static_cast<std::size_t>(shape_class)])};
  }
}

}  // namespace

void verify(const Kernel& kernel)
{
  for (const auto& p : kernel.params) {
    check_class(kernel, p.shape_class, p.rank, fmt::format("param {}", p.name));
  }
  for (const auto& l : kernel.locals) {
    check_class(kernel, l.shape_class, l.rank, fmt::format("local {}", l.name));
  }
  for (std::size_t n = 0; n < kernel.nests.size(); ++n) {
    const auto& nest = kernel.nests[n];
    if (nest.trim_hi.size() != nest.rank()) {
      malformed(kernel, n, 0, "trim ranks differ");
    }
    check_class(kernel, nest.shape_class, nest.rank(), fmt::format("nest {}", n));
    for (std::size_t i = 0; i < nest.body.size(); ++i) {
      const auto& ins = nest.body[i];
      const auto arity = operand_count(ins.op);
      for (std::size_t k = 0; k < ins.operands.size(); ++k) {
        const auto o = ins.operands[k];
        if (k >= arity) {
          if (o != -1) {
            malformed(kernel, n, i, "unused operand slot is set");
          }
          continue;
        }
        if (o < 0 || static_cast<std::size_t>(o) >= i || !produces_value(nest.body[static_cast<std::size_t>(o)].op)) {
          malformed(kernel, n, i, fmt::format("operand {} does not name an earlier value", o));
        }
      }
      if (ins.op == Opcode::Scalar &&
          (ins.scalar < 0 || static_cast<std::size_t>(ins.scalar) >= kernel.scalar_count)) {
        malformed(kernel, n, i, fmt::format("scalar {} out of range", ins.scalar));
      }
      if (!accesses_buffer(ins.op)) {
        continue;
      }
      const auto rank = kernel.buffer_rank(ins.buffer);
      if (ins.index.rank() != rank || ins.index.shifts.size() != rank) {
        malformed(kernel, n, i, fmt::format("index of rank {} on buffer of rank {}", ins.index.rank(), rank));
      }
      for (auto d : ins.index.loop_dims) {
        if (d >= static_cast<int>(nest.rank())) {
          malformed(kernel, n, i, fmt::format("loop dimension {} outside a rank {} nest", d, nest.rank()));
        }
      }
      if (kernel.is_local(ins.buffer)) {
        continue;
      }
      const auto& param = kernel.params[static_cast<std::size_t>(ins.buffer)];
      const bool ok = (ins.op == Opcode::Load && reads(param.privilege)) ||
                      (ins.op == Opcode::Store && writes(param.privilege)) ||
                      (ins.op == Opcode::ReduceAdd && reduces(param.privilege));
      if (!ok) {
        throw Error{ErrorCode::PrivilegeViolation,
                    fmt::format("kernel {} nest {} instr {}: {} on param {} with privilege {}", kernel.name, n, i,
                                to_string(ins.op), param.name, to_string(param.privilege))};
      }
    }
  }
}

namespace {

std::string format_index(const AccessIndex& index)
{
  std::string out = "[";
  for (std::size_t d = 0; d < index.rank(); ++d) {
    if (d > 0) {
      out += ", ";
    }
    const auto ld = index.loop_dims[d];
    const auto sh = index.shifts[d];
    if (ld < 0) {
      out += fmt::format("{}", sh);
    } else if (sh == 0) {
      out += fmt::format("i{}", ld);
    } else {
      out += fmt::format("i{}{:+}", ld, sh);
    }
  }
  return out + "]";
}

std::string buffer_name(const Kernel& kernel, std::int32_t buffer)
{
  if (kernel.is_local(buffer)) {
    return fmt::format("%{}", kernel.locals[static_cast<std::size_t>(buffer) - kernel.params.size()].name);
  }
  return fmt::format("%{}", kernel.params[static_cast<std::size_t>(buffer)].name);
}

}  // namespace

std::string to_string(const Kernel& kernel)
{
  std::string out = fmt::format("kernel {}(", kernel.name);
  for (std::size_t i = 0; i < kernel.params.size(); ++i) {
    const auto& p = kernel.params[i];
    out += fmt::format("{}%{}: {} rank{} c{}", i > 0 ? ", " : "", p.name, to_string(p.privilege), p.rank,
                       p.shape_class);
  }
  out += fmt::format(") scalars={}\n", kernel.scalar_count);
  for (const auto& l : kernel.locals) {
    out += fmt::format("  local %{}: rank{} c{}\n", l.name, l.rank, l.shape_class);
  }
  for (const auto& nest : kernel.nests) {
    out += fmt::format("  for c{} rank{}", nest.shape_class, nest.rank());
    const bool trimmed = std::any_of(nest.trim_lo.begin(), nest.trim_lo.end(), [](Coord c) { return c != 0; }) ||
                         std::any_of(nest.trim_hi.begin(), nest.trim_hi.end(), [](Coord c) { return c != 0; });
    if (trimmed) {
      out += " trim";
      for (std::size_t d = 0; d < nest.rank(); ++d) {
        out += fmt::format(" {}:{}", nest.trim_lo[d], nest.trim_hi[d]);
      }
    }
    out += " {\n";
    for (std::size_t i = 0; i < nest.body.size(); ++i) {
      const auto& ins = nest.body[i];
      switch (ins.op) {
        case Opcode::Constant: out += fmt::format("    v{} = const {}\n", i, ins.constant); break;
        case Opcode::Scalar: out += fmt::format("    v{} = scalar {}\n", i, ins.scalar); break;
        case Opcode::Load:
          out += fmt::format("    v{} = load {}{}\n", i, buffer_name(kernel, ins.buffer), format_index(ins.index));
          break;
        case Opcode::Store:
        case Opcode::ReduceAdd:
          out += fmt::format("    {} {}{} <- v{}\n", to_string(ins.op), buffer_name(kernel, ins.buffer),
                             format_index(ins.index), ins.operands[0]);
          break;
        default: {
          out += fmt::format("    v{} = {}", i, to_string(ins.op));
          for (std::size_t k = 0; k < operand_count(ins.op); ++k) {
            out += fmt::format(" v{}", ins.operands[k]);
          }
          out += "\n";
        }
      }
    }
    out += "  }\n";
  }
  return out;
}

std::int32_t NestBuilder::push(Instr instr)
{
  nest_->body.push_back(std::move(instr));
  return static_cast<std::int32_t>(nest_->body.size() - 1);
}

std::int32_t NestBuilder::constant(double value)
{
  Instr i;
  i.op = Opcode::Constant;
  i.constant = value;
  return push(std::move(i));
}

std::int32_t NestBuilder::scalar(std::int32_t index)
{
  Instr i;
  i.op = Opcode::Scalar;
  i.scalar = index;
  return push(std::move(i));
}

std::int32_t NestBuilder::load(std::int32_t buffer, AccessIndex index)
{
  Instr i;
  i.op = Opcode::Load;
  i.buffer = buffer;
  i.index = std::move(index);
  return push(std::move(i));
}

std::int32_t NestBuilder::unary(Opcode op, std::int32_t a)
{
  Instr i;
  i.op = op;
  i.operands = {a, -1, -1};
  return push(std::move(i));
}

std::int32_t NestBuilder::binary(Opcode op, std::int32_t a, std::int32_t b)
{
  Instr i;
  i.op = op;
  i.operands = {a, b, -1};
  return push(std::move(i));
}

std::int32_t NestBuilder::select(std::int32_t cond, std::int32_t if_true, std::int32_t if_false)
{
  Instr i;
  i.op = Opcode::Select;
  i.operands = {cond, if_true, if_false};
  return push(std::move(i));
}

void NestBuilder::store(std::int32_t buffer, AccessIndex index, std::int32_t value)
{
  Instr i;
  i.op = Opcode::Store;
  i.buffer = buffer;
  i.index = std::move(index);
  i.operands = {value, -1, -1};
  push(std::move(i));
}

void NestBuilder::reduce_add(std::int32_t buffer, AccessIndex index, std::int32_t value)
{
  Instr i;
  i.op = Opcode::ReduceAdd;
  i.buffer = buffer;
  i.index = std::move(index);
  i.operands = {value, -1, -1};
  push(std::move(i));
}

}  // namespace diffuse
