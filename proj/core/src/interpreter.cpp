/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <diffuse/error.hpp>
#include <diffuse/kernel.hpp>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <cmath>

namespace diffuse {

BufferView BufferView::dense(double* data, std::vector<Coord> extents, Privilege privilege)
{
  std::vector<Coord> strides(extents.size(), 1);
  for (std::size_t d = extents.size(); d-- > 1;) {
    strides[d - 1] = strides[d] * extents[d];
  }
  return BufferView{data, std::move(extents), std::move(strides), privilege};
}

namespace {

bool grants(Privilege binding, Privilege needed)
{
  return (!reads(needed) || reads(binding)) && (!writes(needed) || writes(binding)) &&
         (!reduces(needed) || reduces(binding));
}

std::size_t volume_of(const std::vector<Coord>& extents)
{
  std::size_t v = 1;
  for (auto e : extents) {
    v *= static_cast<std::size_t>(std::max<Coord>(0, e));
  }
  return v;
}

double* element(const Kernel& kernel, const BufferView& view, std::int32_t buffer, const AccessIndex& index,
                const std::vector<Coord>& iv)
{
  std::ptrdiff_t offset = 0;
  for (std::size_t d = 0; d < index.rank(); ++d) {
    const auto ld = index.loop_dims[d];
    const Coord c = (ld >= 0 ? iv[static_cast<std::size_t>(ld)] : 0) + index.shifts[d];
    if (c < 0 || c >= view.extents[d]) {
      const auto& name = kernel.is_local(buffer)
                           ? kernel.locals[static_cast<std::size_t>(buffer) - kernel.params.size()].name
                           : kernel.params[static_cast<std::size_t>(buffer)].name;
      throw Error{ErrorCode::OutOfBounds, fmt::format("kernel {}: access to {} at coordinate {} in dimension {} "
                                                      "outside extents {}",
                                                      kernel.name, name, c, d, view.extents)};
    }
    offset += static_cast<std::ptrdiff_t>(c * view.strides[d]);
  }
  return view.data + offset;
}

}  // namespace

void interpret(const Kernel& kernel, KernelBindings& bindings)
{
  if (bindings.params.size() != kernel.params.size()) {
    throw Error{ErrorCode::MalformedKernel, fmt::format("kernel {} expects {} buffers, got {}", kernel.name,
                                                        kernel.params.size(), bindings.params.size())};
  }
  if (bindings.scalars.size() < kernel.scalar_count) {
    throw Error{ErrorCode::MalformedKernel, fmt::format("kernel {} expects {} scalars, got {}", kernel.name,
                                                        kernel.scalar_count, bindings.scalars.size())};
  }
  if (bindings.class_extents.size() < kernel.class_ranks.size()) {
    throw Error{ErrorCode::MalformedKernel, fmt::format("kernel {} has {} shape classes, {} bound", kernel.name,
                                                        kernel.class_ranks.size(), bindings.class_extents.size())};
  }
  for (std::size_t c = 0; c < kernel.class_ranks.size(); ++c) {
    if (bindings.class_extents[c].size() != kernel.class_ranks[c]) {
      throw Error{ErrorCode::MalformedKernel, fmt::format("kernel {}: shape class {} bound with rank {}, expected {}",
                                                          kernel.name, c, bindings.class_extents[c].size(),
                                                          kernel.class_ranks[c])};
    }
  }
  for (std::size_t p = 0; p < kernel.params.size(); ++p) {
    const auto& param = kernel.params[p];
    const auto& view = bindings.params[p];
    if (view.extents.size() != param.rank || view.strides.size() != param.rank) {
      throw Error{ErrorCode::MalformedKernel, fmt::format("kernel {}: param {} has rank {}, bound with rank {}",
                                                          kernel.name, param.name, param.rank, view.extents.size())};
    }
    if (!grants(view.privilege, param.privilege)) {
      throw Error{ErrorCode::PrivilegeViolation,
                  fmt::format("kernel {}: param {} needs {} but is bound with {}", kernel.name, param.name,
                              to_string(param.privilege), to_string(view.privilege))};
    }
  }

  std::vector<std::vector<double>> local_storage;
  std::vector<BufferView> views = bindings.params;
  local_storage.reserve(kernel.locals.size());
  for (const auto& local : kernel.locals) {
    const auto& extents = bindings.class_extents[static_cast<std::size_t>(local.shape_class)];
    local_storage.emplace_back(volume_of(extents), 0.0);
    views.push_back(BufferView::dense(local_storage.back().data(), extents, Privilege::ReadWrite));
  }

  std::vector<double> values;
  std::vector<Coord> iv;
  std::vector<Coord> lo;
  std::vector<Coord> hi;
  for (const auto& nest : kernel.nests) {
    const auto& extents = bindings.class_extents[static_cast<std::size_t>(nest.shape_class)];
    const auto rank = nest.rank();
    lo = nest.trim_lo;
    hi.resize(rank);
    bool empty = false;
    for (std::size_t d = 0; d < rank; ++d) {
      hi[d] = extents[d] - nest.trim_hi[d];
      empty = empty || lo[d] >= hi[d];
    }
    if (empty) {
      continue;
    }
    values.assign(nest.body.size(), 0.0);
    iv = lo;
    while (true) {
      for (std::size_t i = 0; i < nest.body.size(); ++i) {
        const auto& ins = nest.body[i];
        auto v = [&](std::size_t k) { return values[static_cast<std::size_t>(ins.operands[k])]; };
        switch (ins.op) {
          case Opcode::Constant: values[i] = ins.constant; break;
          case Opcode::Scalar: values[i] = bindings.scalars[static_cast<std::size_t>(ins.scalar)]; break;
          case Opcode::Load:
            values[i] = *element(kernel, views[static_cast<std::size_t>(ins.buffer)], ins.buffer, ins.index, iv);
            break;
          case Opcode::Neg: values[i] = -v(0); break;
          case Opcode::Add: values[i] = v(0) + v(1); break;
          case Opcode::Sub: values[i] = v(0) - v(1); break;
          case Opcode::Mul: values[i] = v(0) * v(1); break;
          case Opcode::Div: values[i] = v(0) / v(1); break;
          case Opcode::Pow: values[i] = std::pow(v(0), v(1)); break;
          case Opcode::Min: values[i] = v(1) < v(0) ? v(1) : v(0); break;
          case Opcode::Max: values[i] = v(0) < v(1) ? v(1) : v(0); break;
          case Opcode::Lt: values[i] = v(0) < v(1) ? 1.0 : 0.0; break;
          case Opcode::Le: values[i] = v(0) <= v(1) ? 1.0 : 0.0; break;
          case Opcode::Eq: values[i] = v(0) == v(1) ? 1.0 : 0.0; break;
          case Opcode::Select: values[i] = v(0) != 0.0 ? v(1) : v(2); break;
          case Opcode::Store:
            *element(kernel, views[static_cast<std::size_t>(ins.buffer)], ins.buffer, ins.index, iv) = v(0);
            break;
          case Opcode::ReduceAdd:
            *element(kernel, views[static_cast<std::size_t>(ins.buffer)], ins.buffer, ins.index, iv) += v(0);
            break;
        }
      }
      // Row-major increment.
      std::size_t d = rank;
      while (d-- > 0) {
        if (++iv[d] < hi[d]) {
          break;
        }
        iv[d] = lo[d];
      }
      if (d == static_cast<std::size_t>(-1)) {
        break;
      }
    }
  }
}

}  // namespace diffuse
