/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <diffuse/error.hpp>
#include <diffuse/trace.hpp>

#include <fmt/format.h>
#include <json.hpp>

#include <fstream>
#include <istream>
#include <map>
#include <sstream>

namespace diffuse {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& what) { throw Error{ErrorCode::Trace, what}; }

std::string id_text(const json& v, const char* field)
{
  if (v.is_string()) {
    return v.get<std::string>();
  }
  if (v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    return std::to_string(v.get<std::uint64_t>());
  }
  fail(fmt::format("field \"{}\" must be a string or a non-negative integer", field));
}

const json& field(const json& obj, const char* name)
{
  auto it = obj.find(name);
  if (it == obj.end()) {
    fail(fmt::format("missing field \"{}\"", name));
  }
  return *it;
}

std::vector<Coord> coords(const json& v, const char* name)
{
  if (!v.is_array()) {
    fail(fmt::format("field \"{}\" must be an array of integers", name));
  }
  std::vector<Coord> out;
  for (const auto& e : v) {
    if (!e.is_number_integer()) {
      fail(fmt::format("field \"{}\" must be an array of integers", name));
    }
    out.push_back(e.get<Coord>());
  }
  return out;
}

class Parser {
 public:
  void line(const json& ev)
  {
    if (!ev.is_object()) {
      fail("event must be a JSON object");
    }
    const auto event = field(ev, "event").get<std::string>();
    if (event == "create_store") {
      create_store(ev);
    } else if (event == "create_partition") {
      create_partition(ev);
    } else if (event == "index_task") {
      index_task(ev);
    } else if (event == "drop_ref") {
      drop_ref(ev);
    } else if (event == "flush") {
      program_.flush();
    } else {
      fail(fmt::format("unknown event \"{}\"", event));
    }
  }

  Program take() { return std::move(program_); }

 private:
  StoreId store(const json& v, const char* name) const
  {
    const auto text = id_text(v, name);
    auto it = stores_.find(text);
    if (it == stores_.end()) {
      fail(fmt::format("unknown store \"{}\"", text));
    }
    return it->second;
  }

  void create_store(const json& ev)
  {
    const auto& idv = field(ev, "id");
    const auto text = id_text(idv, "id");
    if (stores_.contains(text)) {
      fail(fmt::format("store \"{}\" created twice", text));
    }
    StoreId id{};
    if (idv.is_string()) {
      id = StoreId{next_id_};
      program_.store_names[id] = text;
    } else {
      id = StoreId{static_cast<std::uint32_t>(idv.get<std::uint64_t>())};
    }
    if (catalog_.contains(id)) {
      fail(fmt::format("store id {} already in use", id.value));
    }
    next_id_ = std::max(next_id_, id.value + 1);
    Domain shape{coords(field(ev, "shape"), "shape")};
    catalog_.add(Store{id, shape});
    stores_[text] = id;
    refs_[id]     = 1;
    program_.commands.emplace_back(CreateStore{id, std::move(shape)});
  }

  void create_partition(const json& ev)
  {
    const auto name = id_text(field(ev, "id"), "id");
    if (parts_.contains(name)) {
      fail(fmt::format("partition \"{}\" created twice", name));
    }
    const auto sid   = store(field(ev, "store"), "store");
    const auto rank  = catalog_.at(sid).shape.rank();
    const auto kind  = field(ev, "kind").get<std::string>();
    Partition partition;
    if (kind == "tiling") {
      const auto tile = coords(field(ev, "tile"), "tile");
      if (tile.size() != rank) {
        fail(fmt::format("rank mismatch: tile of partition \"{}\" has rank {}, store has rank {}", name, tile.size(),
                         rank));
      }
      auto offset = ev.contains("offset") ? coords(ev["offset"], "offset") : std::vector<Coord>(rank, 0);
      if (offset.size() != rank) {
        fail(fmt::format("rank mismatch: offset of partition \"{}\" has rank {}", name, offset.size()));
      }
      Projection proj = Projection::identity(rank);
      if (ev.contains("proj")) {
        const auto& pj = ev["proj"];
        std::vector<std::vector<Coord>> a;
        for (const auto& row : field(pj, "A")) {
          a.push_back(coords(row, "A"));
        }
        auto b = coords(field(pj, "b"), "b");
        if (a.size() != rank || b.size() != rank) {
          fail(fmt::format("rank mismatch: projection of partition \"{}\" must produce rank {}", name, rank));
        }
        proj = Projection{std::move(a), std::move(b)};
      }
      partition = Partition::tiling(Point{tile}, Point{std::move(offset)}, std::move(proj));
    } else if (kind != "none") {
      fail(fmt::format("unknown partition kind \"{}\"", kind));
    }
    parts_[name] = program_.partitions.size();
    program_.partitions.push_back(PartitionDecl{name, sid, std::move(partition)});
  }

  void index_task(const json& ev)
  {
    IndexTask task;
    task.kind   = field(ev, "kind").get<std::string>();
    task.launch = Domain{coords(field(ev, "domain"), "domain")};
    for (const auto& a : field(ev, "args")) {
      const auto sid  = store(field(a, "store"), "store");
      const auto part = id_text(field(a, "part"), "part");
      auto it         = parts_.find(part);
      if (it == parts_.end()) {
        fail(fmt::format("unknown partition \"{}\"", part));
      }
      const auto& decl = program_.partitions[it->second];
      if (decl.store != sid) {
        fail(fmt::format("partition \"{}\" belongs to store \"{}\"", part, program_.store_name(decl.store)));
      }
      const auto text = field(a, "priv").get<std::string>();
      const auto priv = parse_privilege(text);
      if (!priv) {
        fail(fmt::format("malformed privilege \"{}\"", text));
      }
      if (refs_[sid] == 0) {
        fail(fmt::format("store \"{}\" used after its last reference was dropped", program_.store_name(sid)));
      }
      task.args.push_back(StoreArg{sid, decl.partition, *priv});
    }
    if (ev.contains("scalars")) {
      for (const auto& s : ev["scalars"]) {
        if (s.is_number()) {
          task.scalars.push_back(ScalarParam{"", s.get<double>()});
        } else {
          task.scalars.push_back(
            ScalarParam{s.value("name", std::string{}), field(s, "value").get<double>()});
        }
      }
    }
    validate(task, catalog_);
    program_.launch(std::move(task));
  }

  void drop_ref(const json& ev)
  {
    const auto sid = store(field(ev, "store"), "store");
    if (refs_[sid] == 0) {
      fail(fmt::format("reference underflow on store \"{}\"", program_.store_name(sid)));
    }
    --refs_[sid];
    program_.drop(sid);
  }

  Program program_{};
  StoreCatalog catalog_{};
  std::map<std::string, StoreId> stores_{};
  std::map<std::string, std::size_t> parts_{};
  std::map<StoreId, std::size_t> refs_{};
  std::uint32_t next_id_{};
};

json store_ref(const Program& program, StoreId id)
{
  auto it = program.store_names.find(id);
  return it == program.store_names.end() ? json(id.value) : json(it->second);
}

json partition_json(const Program& program, const PartitionDecl& decl)
{
  json ev{{"event", "create_partition"}, {"id", decl.name}, {"store", store_ref(program, decl.store)}};
  if (decl.partition.is_none()) {
    ev["kind"] = "none";
    return ev;
  }
  const auto& t = decl.partition.as_tiling();
  ev["kind"]    = "tiling";
  ev["tile"]    = t.tile.coords();
  ev["offset"]  = t.offset.coords();
  if (!t.projection.is_identity()) {
    ev["proj"] = json{{"A", t.projection.matrix()}, {"b", t.projection.offset()}};
  }
  return ev;
}

}  // namespace

Program parse_trace(std::istream& in)
{
  Parser parser;
  std::string text;
  std::size_t lineno = 0;
  while (std::getline(in, text)) {
    ++lineno;
    const auto first = text.find_first_not_of(" \t\r");
    if (first == std::string::npos || text[first] == '#') {
      continue;
    }
    try {
      parser.line(json::parse(text));
    } catch (const json::exception& e) {
      throw Error{ErrorCode::Trace, fmt::format("line {}: {}", lineno, e.what())};
    } catch (const Error& e) {
      throw Error{ErrorCode::Trace, fmt::format("line {}: {}", lineno, e.what())};
    }
  }
  return parser.take();
}

Program parse_trace(std::string_view text)
{
  std::istringstream in{std::string{text}};
  return parse_trace(in);
}

Program load_trace(const std::string& path)
{
  std::ifstream in{path};
  if (!in) {
    throw Error{ErrorCode::Trace, fmt::format("cannot open trace {}", path)};
  }
  return parse_trace(in);
}

std::string print_trace(const Program& program)
{
  std::string out;
  auto emit = [&](const json& ev) {
    out += ev.dump();
    out += '\n';
  };
  std::vector<PartitionDecl> printed;
  std::set<std::string> names;
  for (const auto& d : program.partitions) {
    names.insert(d.name);
  }
  auto declare = [&](const PartitionDecl& d) {
    printed.push_back(d);
    emit(partition_json(program, d));
  };
  auto lookup = [&](StoreId store, const Partition& p) -> const PartitionDecl* {
    for (const auto& d : printed) {
      if (d.store == store && d.partition == p) {
        return &d;
      }
    }
    return nullptr;
  };

  for (const auto& c : program.commands) {
    if (const auto* cs = std::get_if<CreateStore>(&c)) {
      emit(json{{"event", "create_store"}, {"id", store_ref(program, cs->id)}, {"shape", cs->shape.extents()}});
      for (const auto& d : program.partitions) {
        if (d.store == cs->id) {
          declare(d);
        }
      }
    } else if (const auto* l = std::get_if<Launch>(&c)) {
      json args = json::array();
      for (const auto& a : l->task.args) {
        const auto* decl = lookup(a.store, a.partition);
        if (decl == nullptr) {
          std::string name;
          for (std::size_t k = 0;; ++k) {
            name = fmt::format("{}.p{}", program.store_name(a.store), k);
            if (!names.contains(name)) {
              break;
            }
          }
          names.insert(name);
          declare(PartitionDecl{name, a.store, a.partition});
          decl = &printed.back();
        }
        args.push_back(json{{"store", store_ref(program, a.store)},
                            {"part", decl->name},
                            {"priv", std::string{to_string(a.privilege)}}});
      }
      json ev{{"event", "index_task"}, {"kind", l->task.kind}, {"domain", l->task.launch.extents()}, {"args", args}};
      if (!l->task.scalars.empty()) {
        json scalars = json::array();
        for (const auto& s : l->task.scalars) {
          scalars.push_back(json{{"name", s.name}, {"value", s.value}});
        }
        ev["scalars"] = std::move(scalars);
      }
      emit(ev);
    } else if (const auto* d = std::get_if<DropRef>(&c)) {
      emit(json{{"event", "drop_ref"}, {"store", store_ref(program, d->id)}});
    } else {
      emit(json{{"event", "flush"}});
    }
  }
  return out;
}

void save_trace(const std::string& path, const Program& program)
{
  std::ofstream out{path};
  if (!out) {
    throw Error{ErrorCode::Trace, fmt::format("cannot write trace {}", path)};
  }
  out << print_trace(program);
}

}  // namespace diffuse
