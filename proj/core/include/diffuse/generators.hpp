/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <diffuse/ir.hpp>
#include <diffuse/kernel.hpp>

#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace diffuse {

/// What a generator may depend on: ranks and privileges of the arguments and the number of
/// scalars. Scalar values are bound at run time, so one kernel serves every constant.
struct GeneratorInput {
  std::string kind{};
  std::vector<std::size_t> ranks{};
  std::vector<Privilege> privileges{};
  std::size_t scalar_count{};
};

using KernelGenerator = std::function<Kernel(const GeneratorInput&)>;

/// Maps task kinds to kernel generators. Generated kernels have one parameter per task argument,
/// in order, and parameter i is the only member of shape class i.
class GeneratorRegistry {
 public:
  /// ADD SUB MULT DIV POW MAXIMUM MINIMUM (three arrays, or two arrays and a scalar), COPY, NEG,
  /// FILL, AXPY, SCALE_DIV, WHERE, ACCUM, and the reductions DOT, SUM, NORM.
  [[nodiscard]] static GeneratorRegistry builtin();

  void add(std::string kind, KernelGenerator generator);
  [[nodiscard]] bool contains(std::string_view kind) const;
  [[nodiscard]] std::vector<std::string> kinds() const;

  /// Throws NoGenerator for unknown kinds and GeneratorMismatch when the arguments do not fit.
  [[nodiscard]] Kernel generate(const IndexTask& task, const StoreCatalog& catalog) const;
  [[nodiscard]] Kernel generate(const GeneratorInput& input) const;

 private:
  std::map<std::string, KernelGenerator, std::less<>> generators_{};
};

[[nodiscard]] GeneratorInput generator_input(const IndexTask& task, const StoreCatalog& catalog);

}  // namespace diffuse
