/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <diffuse/session.hpp>

#include <vector>

namespace diffuse::bench {

inline std::vector<IndexTask> tasks_of(const Program& program)
{
  std::vector<IndexTask> out;
  for (const auto& c : program.commands) {
    if (const auto* l = std::get_if<Launch>(&c)) {
      out.push_back(l->task);
    }
  }
  return out;
}

inline StoreCatalog catalog_of(const Program& program)
{
  StoreCatalog c;
  for (const auto& cmd : program.commands) {
    if (const auto* cs = std::get_if<CreateStore>(&cmd)) {
      c.add(Store{cs->id, cs->shape});
    }
  }
  return c;
}

}  // namespace diffuse::bench
