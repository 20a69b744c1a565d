/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <diffuse/ir.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace diffuse {

////////////////////////////////////////////////////
// Kernel IR
////////////////////////////////////////////////////
//
// A kernel is the body of one point task. It owns a list of buffer parameters (bound to
// sub-stores at run time), local buffers, scalar parameters and a sequence of loop nests.
//
// Every buffer and every loop nest carries a shape class. Two objects with the same shape class
// are guaranteed to have the same extents at every launch point, which is what loop fusion
// needs to know. Concrete extents are supplied per class when the kernel is interpreted.
//
// Buffer ids: [0, params.size()) name parameters, [params.size(), params.size() + locals.size())
// name local buffers.

enum class Opcode : std::uint8_t {
  Constant,  // value = constant
  Scalar,    // value = scalars[scalar]
  Load,      // value = buffer[index]
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
  Min,
  Max,
  Lt,      // 1.0 if a < b else 0.0
  Le,
  Eq,
  Select,  // a != 0 ? b : c
  Store,   // buffer[index] = a
  ReduceAdd,  // buffer[index] += a
};

[[nodiscard]] std::string_view to_string(Opcode op) noexcept;
[[nodiscard]] std::size_t operand_count(Opcode op) noexcept;
[[nodiscard]] constexpr bool produces_value(Opcode op) noexcept
{
  return op != Opcode::Store && op != Opcode::ReduceAdd;
}
[[nodiscard]] constexpr bool accesses_buffer(Opcode op) noexcept
{
  return op == Opcode::Load || op == Opcode::Store || op == Opcode::ReduceAdd;
}

/// Element index of a buffer access. For buffer dimension d the element coordinate is
/// iv[loop_dims[d]] + shifts[d], or just shifts[d] when loop_dims[d] is negative.
struct AccessIndex {
  std::vector<int> loop_dims{};
  std::vector<Coord> shifts{};

  [[nodiscard]] static AccessIndex identity(std::size_t rank);
  [[nodiscard]] static AccessIndex constant(std::vector<Coord> coords);

  [[nodiscard]] std::size_t rank() const noexcept { return loop_dims.size(); }
  /// Distinct iterations of a `nest_rank` nest touch distinct elements.
  [[nodiscard]] bool is_injective(std::size_t nest_rank) const;

  friend bool operator==(const AccessIndex&, const AccessIndex&) = default;
};

struct Instr {
  Opcode op{Opcode::Constant};
  std::array<std::int32_t, 3> operands{-1, -1, -1};  // positions of earlier instructions in the nest
  std::int32_t buffer{-1};
  AccessIndex index{};
  double constant{};
  std::int32_t scalar{-1};

  friend bool operator==(const Instr&, const Instr&) = default;
};

struct BufferParam {
  std::string name{};
  std::size_t rank{};
  Privilege privilege{Privilege::Read};
  int shape_class{};

  friend bool operator==(const BufferParam&, const BufferParam&) = default;
};

/// Zero-initialised per point, extents given by its shape class.
struct LocalBuffer {
  std::string name{};
  std::size_t rank{};
  int shape_class{};

  friend bool operator==(const LocalBuffer&, const LocalBuffer&) = default;
};

/// Iterates over [trim_lo, extents - trim_hi) of its shape class in row-major order and runs
/// `body` once per iteration. Values are single-assignment and live for one iteration.
struct LoopNest {
  int shape_class{};
  std::vector<Coord> trim_lo{};
  std::vector<Coord> trim_hi{};
  std::vector<Instr> body{};

  [[nodiscard]] std::size_t rank() const noexcept { return trim_lo.size(); }

  friend bool operator==(const LoopNest&, const LoopNest&) = default;
};

struct Kernel {
  std::string name{};
  std::vector<BufferParam> params{};
  std::vector<LocalBuffer> locals{};
  std::size_t scalar_count{};
  std::vector<std::size_t> class_ranks{};  // rank of every shape class
  std::vector<LoopNest> nests{};

  [[nodiscard]] std::size_t buffer_count() const noexcept { return params.size() + locals.size(); }
  [[nodiscard]] bool is_local(std::int32_t buffer) const noexcept
  {
    return buffer >= static_cast<std::int32_t>(params.size());
  }
  [[nodiscard]] std::size_t buffer_rank(std::int32_t buffer) const;
  [[nodiscard]] int buffer_class(std::int32_t buffer) const;

  friend bool operator==(const Kernel&, const Kernel&) = default;
};

/// Structural and privilege checks: operands refer to earlier value-producing instructions,
/// index ranks match buffers, loads only from readable params, stores only to writable params,
/// reduce-adds only to reduction params. Throws MalformedKernel or PrivilegeViolation.
void verify(const Kernel& kernel);

[[nodiscard]] std::string to_string(const Kernel& kernel);

/// Appends instructions to one nest and hands back their positions.
class NestBuilder {
 public:
  explicit NestBuilder(LoopNest& nest) : nest_{&nest} {}

  std::int32_t constant(double value);
  std::int32_t scalar(std::int32_t index);
  std::int32_t load(std::int32_t buffer, AccessIndex index);
  std::int32_t unary(Opcode op, std::int32_t a);
  std::int32_t binary(Opcode op, std::int32_t a, std::int32_t b);
  std::int32_t select(std::int32_t cond, std::int32_t if_true, std::int32_t if_false);
  void store(std::int32_t buffer, AccessIndex index, std::int32_t value);
  void reduce_add(std::int32_t buffer, AccessIndex index, std::int32_t value);

 private:
  std::int32_t push(Instr instr);

  LoopNest* nest_;
};

////////////////////////////////////////////////////
// Transformations
////////////////////////////////////////////////////

/// One argument of a composed kernel. Demoted arguments become local buffers.
struct ComposedArg {
  std::string name{};
  std::size_t rank{};
  Privilege privilege{Privilege::Read};
  int shape_class{};
  bool demoted{};
};

struct ComposeLayout {
  std::vector<ComposedArg> args{};
  std::vector<std::size_t> class_ranks{};
};

/// Concatenates the kernels' nests in order. arg_map[k][p] is the composed argument bound to
/// parameter p of kernel k; scalars of kernel k follow those of kernels 0..k-1.
[[nodiscard]] Kernel compose(std::span<const Kernel> kernels,
                             const std::vector<std::vector<std::size_t>>& arg_map,
                             const ComposeLayout& layout,
                             std::string name = "fused");

/// Merges adjacent nests over the same shape class and trims whenever every buffer written by
/// either nest is accessed only by reduce-adds, or only at one identical injective index.
[[nodiscard]] Kernel fuse_loops(const Kernel& kernel);

/// Per-iteration store-to-load forwarding and load reuse, followed by removal of dead
/// instructions, never-read local buffers and empty nests.
[[nodiscard]] Kernel scalarize_locals(const Kernel& kernel);

/// fuse_loops followed by scalarize_locals.
[[nodiscard]] Kernel optimize(const Kernel& kernel);

struct MemoryTraffic {
  std::uint64_t loads{};
  std::uint64_t stores{};  // includes reduce-adds

  friend bool operator==(const MemoryTraffic&, const MemoryTraffic&) = default;
};

/// Element accesses performed by one execution given concrete extents per shape class.
[[nodiscard]] MemoryTraffic count_memory_traffic(const Kernel& kernel,
                                                 const std::vector<std::vector<Coord>>& class_extents);

////////////////////////////////////////////////////
// Interpretation
////////////////////////////////////////////////////

/// Strided window onto dense float64 storage.
struct BufferView {
  double* data{};
  std::vector<Coord> extents{};
  std::vector<Coord> strides{};
  Privilege privilege{Privilege::Read};

  [[nodiscard]] static BufferView dense(double* data, std::vector<Coord> extents, Privilege privilege);
};

struct KernelBindings {
  std::vector<BufferView> params{};
  std::vector<double> scalars{};
  std::vector<std::vector<Coord>> class_extents{};
};

/// Runs the kernel once. Throws OutOfBounds on an access outside a buffer and
/// PrivilegeViolation when a binding does not grant what a parameter needs.
void interpret(const Kernel& kernel, KernelBindings& bindings);

}  // namespace diffuse
