/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include "cli.hpp"

#include <diffuse/error.hpp>
#include <diffuse/memo.hpp>
#include <diffuse/session.hpp>
#include <diffuse/trace.hpp>
#include <diffuse/workloads.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

namespace diffuse::cli {

namespace {

using nlohmann::json;

struct InputOptions {
  std::string trace{};
  std::string gen{};
  WorkloadParams params{32, 2, 10};
};

struct EngineFlags {
  std::size_t window{10};
  bool no_fusion{false};
  bool no_memo{false};
  bool no_temp_elim{false};
  bool oracle{false};
  std::uint64_t seed{0};
  std::string json_report{};

  [[nodiscard]] SessionOptions session() const
  {
    SessionOptions o;
    o.seed                  = seed;
    o.engine.initial_window = window;
    o.engine.fusion         = !no_fusion;
    o.engine.memo           = !no_memo;
    o.engine.temp_elim      = !no_temp_elim;
    o.engine.oracle_check   = oracle;
    return o;
  }
};

std::shared_ptr<spdlog::logger> make_logger(std::ostream& err)
{
  auto sink   = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("diffusekit", std::move(sink));
  logger->set_pattern("[%l] %v");
  auto level = spdlog::level::warn;
  if (const char* env = std::getenv("DIFFUSEKIT_LOG")) {
    level = spdlog::level::from_str(env);
  }
  logger->set_level(level);
  return logger;
}

void add_input(CLI::App* sub, InputOptions& in)
{
  sub->add_option("trace", in.trace, "JSON-lines trace file");
  sub->add_option("--gen", in.gen, "Generate the input instead: stencil, blackscholes_chain, jacobi, cg_like");
  sub->add_option("--size", in.params.size, "Generator size")->capture_default_str();
  sub->add_option("--nodes", in.params.nodes, "Generator launch points per dimension")->capture_default_str();
  sub->add_option("--iters", in.params.iters, "Generator iterations")->capture_default_str();
}

void add_engine(CLI::App* sub, EngineFlags& f)
{
  sub->add_option("--window", f.window, "Initial window size")->capture_default_str();
  sub->add_flag("--no-fusion", f.no_fusion, "Emit every task on its own");
  sub->add_flag("--no-memo", f.no_memo, "Disable the analysis cache");
  sub->add_flag("--no-temp-elim", f.no_temp_elim, "Keep temporaries as kernel arguments");
  sub->add_flag("--oracle", f.oracle, "Cross-check every fusion decision with the brute-force oracle");
  sub->add_option("--seed", f.seed, "Seed of initial store contents")->capture_default_str();
  sub->add_option("--json-report", f.json_report, "Write a machine-readable report to this path");
}

Program load(const InputOptions& in)
{
  if (!in.gen.empty()) {
    return make_workload(in.gen, in.params);
  }
  if (in.trace.empty()) {
    throw Error{ErrorCode::Trace, "no input: give a trace file or --gen NAME"};
  }
  return load_trace(in.trace);
}

json report_json(const Report& r)
{
  return json{{"tasks_in", r.tasks_in},
              {"tasks_out", r.tasks_out},
              {"fused_prefixes", r.fused_prefixes},
              {"temporaries_eliminated", r.temporaries_eliminated},
              {"memo_hits", r.memo_hits},
              {"memo_misses", r.memo_misses},
              {"loads", r.loads},
              {"stores", r.stores},
              {"fused_prefix_sizes", r.fused_prefix_sizes}};
}

void write_json(const std::string& path, const json& j)
{
  if (path.empty()) {
    return;
  }
  std::ofstream f{path};
  if (!f) {
    throw Error{ErrorCode::Trace, fmt::format("cannot write report {}", path)};
  }
  f << j.dump(2) << '\n';
}

std::string verdict_text(const Program& prog, const WindowRecord& w)
{
  const auto& v = *w.verdict;
  std::string out =
    fmt::format("{} blocks task {} ({})", to_string(v.constraint), v.blocking_task_index, w.blocking_kind);
  if (v.constraint != Constraint::LaunchDomain && v.constraint != Constraint::NoGenerator) {
    out += fmt::format(" on store {}", prog.store_name(v.store));
    if (v.partitions) {
      out += fmt::format(": {} vs {}", prog.partition_name(v.store, v.partitions->first),
                         prog.partition_name(v.store, v.partitions->second));
    }
  }
  return out;
}

void print_summary(std::ostream& out, const Report& r)
{
  fmt::print(out, "tasks {} -> {}, fused prefixes {}, temporaries eliminated {}, memo hits {}, loads {}, stores {}\n",
             r.tasks_in, r.tasks_out, r.fused_prefixes, r.temporaries_eliminated, r.memo_hits, r.loads, r.stores);
}

int cmd_analyze(const InputOptions& in, const EngineFlags& flags, std::ostream& out, spdlog::logger& log)
{
  const auto prog = load(in);
  auto options    = flags.session();
  options.execute = false;
  Session session{options};
  session.run(prog);
  std::size_t i = 0;
  for (const auto& w : session.engine().stats().windows) {
    fmt::print(out, "window {}: {} buffered, {} {} -> {}{}\n", i++, w.buffered, w.prefix_len,
               w.prefix_len == 1 ? "task" : "tasks", w.kind, w.memo_hit ? " [memo hit]" : "");
    if (w.verdict) {
      fmt::print(out, "  stopped: {}\n", verdict_text(prog, w));
    }
    if (!w.temporaries.empty()) {
      std::vector<std::string> names;
      for (auto id : w.temporaries) {
        names.push_back(prog.store_name(id));
      }
      fmt::print(out, "  temporaries: {}\n", fmt::join(names, " "));
    }
    log.debug("window {} evaluated {} constraints", i - 1, w.constraint_evaluations);
  }
  const auto report = session.report();
  print_summary(out, report);
  write_json(flags.json_report, report_json(report));
  return 0;
}

int cmd_run(const InputOptions& in,
            const EngineFlags& flags,
            bool diff,
            bool isolated,
            const std::string& dump,
            std::ostream& out,
            spdlog::logger& log)
{
  const auto prog = load(in);
  auto options    = flags.session();
  options.isolated = isolated;
  options.check_interference = true;
  auto fused = execute_with_fusion(prog, options);
  for (const auto& e : fused.emitted) {
    log.info("executed {} ({} tasks)", e.kind, e.prefix_len);
  }
  print_summary(out, fused.report);
  auto report = report_json(fused.report);
  int status  = 0;
  if (diff) {
    const auto reference = execute_sequential(prog, flags.seed);
    std::string why;
    if (heaps_equal(fused.heap, reference.heap, fused.live, &why)) {
      fmt::print(out, "heaps identical ({} live stores)\n", fused.live.size());
      report["heaps_identical"] = true;
    } else {
      fmt::print(out, "heaps differ: {}\n", why);
      report["heaps_identical"] = false;
      status = 2;
    }
  }
  if (!dump.empty()) {
    std::ofstream f{dump};
    f << dump_text(fused.heap, fused.live);
  }
  write_json(flags.json_report, report);
  return status;
}

int cmd_canon(const InputOptions& in, std::ostream& out)
{
  const auto prog = load(in);
  std::vector<IndexTask> segment;
  std::size_t k = 0;
  auto emit = [&] {
    if (segment.empty()) {
      return;
    }
    fmt::print(out, "segment {}\n{}", k++, canonicalize(segment).to_string());
    segment.clear();
  };
  for (const auto& c : prog.commands) {
    if (const auto* l = std::get_if<Launch>(&c)) {
      segment.push_back(l->task);
    } else if (std::holds_alternative<Flush>(c)) {
      emit();
    }
  }
  emit();
  return 0;
}

int cmd_bench(std::vector<std::string> names, const InputOptions& in, const EngineFlags& flags, std::ostream& out)
{
  if (names.empty()) {
    names = workload_names();
  }
  json rows = json::array();
  fmt::print(out, "{:<20} {:>10} {:>10} {:>14} {:>14} {:>8}\n", "workload", "tasks/iter", "fused/iter",
             "traffic", "fused traffic", "ratio");
  for (const auto& name : names) {
    const auto prog = make_workload(name, in.params);
    auto options    = flags.session();
    options.execute = false;

    auto unfused_options               = options;
    unfused_options.engine.fusion      = false;
    unfused_options.engine.temp_elim   = false;
    Session unfused{unfused_options};
    unfused.run(prog);
    Session fused{options};
    fused.run(prog);

    const auto u     = unfused.report();
    const auto f     = fused.report();
    const auto iters = std::max<std::size_t>(1, in.params.iters);
    const double per_in  = static_cast<double>(u.tasks_out) / static_cast<double>(iters);
    const double per_out = static_cast<double>(f.tasks_out) / static_cast<double>(iters);
    const auto ut        = u.loads + u.stores;
    const auto ft        = f.loads + f.stores;
    const double ratio   = ft == 0 ? 0.0 : static_cast<double>(ut) / static_cast<double>(ft);
    fmt::print(out, "{:<20} {:>10g} {:>10g} {:>14} {:>14} {:>7.1f}x\n", name, per_in, per_out, ut, ft, ratio);
    auto row                    = report_json(f);
    row["name"]                 = name;
    row["iters"]                = iters;
    row["tasks_per_iter"]       = per_in;
    row["fused_tasks_per_iter"] = per_out;
    row["unfused_loads"]        = u.loads;
    row["unfused_stores"]       = u.stores;
    row["traffic_ratio"]        = ratio;
    rows.push_back(std::move(row));
  }
  write_json(flags.json_report, json{{"workloads", rows}});
  return 0;
}

int cmd_gen(const std::string& name, const WorkloadParams& params, const std::string& output, std::ostream& out)
{
  const auto prog = make_workload(name, params);
  if (output.empty()) {
    out << print_trace(prog);
  } else {
    save_trace(output, prog);
  }
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{"diffusekit: fuse streams of distributed index tasks and check the result"};
  app.require_subcommand(1);

  InputOptions in;
  EngineFlags flags;
  bool diff     = false;
  bool isolated = false;
  std::string dump;
  std::vector<std::string> bench_names;
  std::string gen_name;
  std::string gen_output;

  auto* analyze = app.add_subcommand("analyze", "Print the fusion report of a trace without executing it");
  add_input(analyze, in);
  add_engine(analyze, flags);

  auto* run = app.add_subcommand("run", "Execute a trace with fusion, optionally diffing against unfused execution");
  add_input(run, in);
  add_engine(run, flags);
  run->add_flag("--diff", diff, "Also execute without fusion and compare surviving stores");
  run->add_flag("--isolated", isolated, "Execute every point against private copies of its sub-stores");
  run->add_option("--dump", dump, "Write surviving store contents as text to this path");

  auto* canon = app.add_subcommand("canon", "Print the canonical form of each flushed segment");
  add_input(canon, in);

  auto* bench = app.add_subcommand("bench", "Task counts and memory traffic of the built-in workloads");
  bench->add_option("names", bench_names, "Workloads (default: all)");
  bench->add_option("--size", in.params.size, "Elements per dimension")->capture_default_str();
  bench->add_option("--nodes", in.params.nodes, "Launch points per dimension")->capture_default_str();
  bench->add_option("--iters", in.params.iters, "Iterations")->capture_default_str();
  add_engine(bench, flags);

  auto* gen = app.add_subcommand("gen", "Write a built-in workload as a trace");
  gen->add_option("name", gen_name, "Workload name")->required();
  gen->add_option("--size", in.params.size, "Elements per dimension")->capture_default_str();
  gen->add_option("--nodes", in.params.nodes, "Launch points per dimension")->capture_default_str();
  gen->add_option("--iters", in.params.iters, "Iterations")->capture_default_str();
  gen->add_option("-o,--output", gen_output, "Output path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  auto log = make_logger(err);
  try {
    if (analyze->parsed()) {
      return cmd_analyze(in, flags, out, *log);
    }
    if (run->parsed()) {
      return cmd_run(in, flags, diff, isolated, dump, out, *log);
    }
    if (canon->parsed()) {
      return cmd_canon(in, out);
    }
    if (bench->parsed()) {
      return cmd_bench(bench_names, in, flags, out);
    }
    return cmd_gen(gen_name, in.params, gen_output, out);
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 1;
  }
}

}  // namespace diffuse::cli
