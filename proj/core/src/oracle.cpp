/*
 * SPDX-FileCopyrightText: Copyright (c) 2026 The diffusekit authors
 * SPDX-License-Identifier: Apache-2.0
 */

#include <diffuse/error.hpp>
#include <diffuse/oracle.hpp>

#include <fmt/format.h>

#include <algorithm>

namespace diffuse {

namespace {

bool conflicts(Privilege first, Privilege second)
{
  if (writes(first)) {
    return true;
  }
  if (reads(first)) {
    return writes(second) || reduces(second);
  }
  // first reduces
  return reads(second) || writes(second);
}

void check_cap(const IndexTask& task, std::size_t cap)
{
  if (task.launch.volume() > cap) {
    throw Error{ErrorCode::OracleTooLarge,
                fmt::format("task {} launches {} points, the oracle handles at most {}", task.kind,
                            task.launch.volume(), cap)};
  }
}

std::vector<PointTaskView> expand(const IndexTask& task, std::size_t parent, const StoreCatalog& catalog)
{
  std::vector<PointTaskView> views;
  views.reserve(task.launch.volume());
  task.launch.for_each_point([&](const Point& p) { views.push_back(point_task(task, parent, p, catalog)); });
  return views;
}

}  // namespace

PointTaskView point_task(const IndexTask& task, std::size_t parent_task, const Point& point, const StoreCatalog& catalog)
{
  PointTaskView view{parent_task, point, {}};
  view.accesses.reserve(task.args.size());
  for (const auto& arg : task.args) {
    view.accesses.push_back(Access{sub_store_bounds(catalog.at(arg.store), arg.partition, point), arg.privilege});
  }
  return view;
}

bool dep(const PointTaskView& first, const PointTaskView& second)
{
  for (const auto& a : first.accesses) {
    for (const auto& b : second.accesses) {
      if (a.sub_store.parent == b.sub_store.parent && conflicts(a.privilege, b.privilege) &&
          a.sub_store.bounds.intersects(b.sub_store.bounds)) {
        return true;
      }
    }
  }
  return false;
}

std::vector<Point> DependenceMap::at(const Point& p) const
{
  std::vector<Point> out;
  for (auto index : targets_.at(from_.linearize(p))) {
    out.push_back(to_.delinearize(index));
  }
  return out;
}

bool DependenceMap::is_pointwise() const
{
  if (from_ != to_) {
    return empty();
  }
  for (std::size_t i = 0; i < targets_.size(); ++i) {
    for (auto j : targets_[i]) {
      if (j != i) {
        return false;
      }
    }
  }
  return true;
}

bool DependenceMap::empty() const
{
  return std::all_of(targets_.begin(), targets_.end(), [](const auto& t) { return t.empty(); });
}

DependenceMap dependence_map(const IndexTask& first, const IndexTask& second, const StoreCatalog& catalog, std::size_t cap)
{
  check_cap(first, cap);
  check_cap(second, cap);
  const auto lhs = expand(first, 0, catalog);
  const auto rhs = expand(second, 1, catalog);
  DependenceMap map{first.launch, second.launch};
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    for (std::size_t j = 0; j < rhs.size(); ++j) {
      if (dep(lhs[i], rhs[j])) {
        map.add(i, j);
      }
    }
  }
  return map;
}

bool oracle_fusible(std::span<const IndexTask> tasks, const StoreCatalog& catalog, std::size_t cap)
{
  for (const auto& t : tasks) {
    check_cap(t, cap);
  }
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    if (tasks[i].launch != tasks.front().launch) {
      return false;
    }
  }
  std::vector<std::vector<PointTaskView>> views;
  views.reserve(tasks.size());
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    views.push_back(expand(tasks[i], i, catalog));
  }
  for (std::size_t i = 0; i < tasks.size(); ++i) {
    for (std::size_t j = i + 1; j < tasks.size(); ++j) {
      for (std::size_t p = 0; p < views[i].size(); ++p) {
        for (std::size_t q = 0; q < views[j].size(); ++q) {
          if (p != q && dep(views[i][p], views[j][q])) {
            return false;
          }
        }
      }
    }
  }
  return true;
}

std::vector<Interference> find_interference(const IndexTask& task, const StoreCatalog& catalog, std::size_t cap)
{
  check_cap(task, cap);
  const auto views = expand(task, 0, catalog);
  std::vector<Interference> found;
  for (std::size_t p = 0; p < views.size(); ++p) {
    for (std::size_t q = p + 1; q < views.size(); ++q) {
      for (const auto& a : views[p].accesses) {
        for (const auto& b : views[q].accesses) {
          const bool wa = writes(a.privilege);
          const bool wb = writes(b.privilege);
          if (a.sub_store.parent != b.sub_store.parent || !(wa || wb)) {
            continue;
          }
          if (reduces(a.privilege) || reduces(b.privilege)) {
            continue;
          }
          if (a.sub_store.bounds.intersects(b.sub_store.bounds)) {
            found.push_back(Interference{a.sub_store.parent, views[p].point, views[q].point, wa && wb});
          }
        }
      }
    }
  }
  return found;
}

}  // namespace diffuse
