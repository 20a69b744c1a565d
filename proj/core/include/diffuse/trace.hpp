/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <diffuse/session.hpp>

#include <iosfwd>
#include <string>
#include <string_view>

namespace diffuse {

// JSON-lines traces. One object per line, selected by its "event" field:
//
//   {"event":"create_store","id":"grid","shape":[34,34]}
//   {"event":"create_partition","id":"north","store":"grid","kind":"tiling",
//    "tile":[16,16],"offset":[0,1],"proj":{"A":[[1,0],[0,1]],"b":[0,0]}}
//   {"event":"index_task","kind":"ADD","domain":[2,2],
//    "args":[{"store":"grid","part":"north","priv":"R"}, ...],
//    "scalars":[{"name":"s","value":0.2}]}
//   {"event":"drop_ref","store":"t1"}
//   {"event":"flush"}
//
// Ids are strings or non-negative integers. Integer store ids are used verbatim; string ids
// take the next free id. "offset" and "proj" are optional. Blank lines and lines starting
// with '#' are skipped.

/// Throws Error{Trace} with a "line N:" prefix on malformed JSON, unknown or duplicate ids,
/// rank mismatches, use after the last reference is dropped, and reference underflow.
[[nodiscard]] Program parse_trace(std::istream& in);
[[nodiscard]] Program parse_trace(std::string_view text);
[[nodiscard]] Program load_trace(const std::string& path);

/// Inverse of parse_trace: parse_trace(print_trace(p)) has the same commands as p.
[[nodiscard]] std::string print_trace(const Program& program);
void save_trace(const std::string& path, const Program& program);

}  // namespace diffuse
