#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "scenemerge/diff.hpp"
#include "scenemerge/format.hpp"
#include "scenemerge/merge.hpp"
#include "scenemerge/sim.hpp"

namespace py = pybind11;
using namespace scenemerge;

namespace {

py::list entries(const std::vector<std::map<std::string, std::string>>& list) {
  py::list out;
  for (const auto& fields : list) out.append(py::cast(fields));
  return out;
}

py::dict merge_texts(const std::string& ancestor, const std::string& mine, const std::string& theirs,
                     const std::string& policy, bool averaging, const std::set<std::string>& averageable) {
  MergePolicy p;
  auto parsed = parse_policy(policy);
  if (!parsed) throw py::value_error("unknown policy '" + policy + "'");
  p.resolution = *parsed;
  p.numeric_averaging = averaging;
  p.averageable_kinds = averageable;

  MergeOutcome outcome;
  {
    LevelGraph o = parse_level(ancestor).graph;
    LevelGraph a = parse_level(mine).graph;
    LevelGraph b = parse_level(theirs).graph;
    py::gil_scoped_release release;
    outcome = merge3(o, a, b, p);
  }
  const std::string report_text = serialize_report(outcome, {p.resolution, {}, {}});
  const MergeReport report = parse_report(report_text);

  py::list removed;
  for (const auto& e : outcome.removed_cycle_edges) {
    removed.append(py::make_tuple(e.parent.str(), e.child.str(), std::string(to_string(e.dependency))));
  }
  py::dict stats;
  stats["ancestor_nodes"] = outcome.stats.ancestor_nodes;
  stats["ancestor_edges"] = outcome.stats.ancestor_edges;
  stats["diff_a_nodes"] = outcome.stats.diff_a_nodes;
  stats["diff_b_nodes"] = outcome.stats.diff_b_nodes;
  stats["merged_nodes"] = outcome.stats.merged_nodes;
  stats["merged_edges"] = outcome.stats.merged_edges;
  stats["wall_time_seconds"] = outcome.stats.wall_time_seconds;

  py::dict out;
  out["level"] = serialize_level(outcome.merged);
  out["report"] = report_text;
  out["conflicts"] = entries(report.conflicts);
  out["dropped"] = entries(report.dropped);
  out["removed_edges"] = removed;
  out["stats"] = stats;
  out["unresolved"] = outcome.has_unresolved();
  return out;
}

py::dict diff_texts(const std::string& ancestor, const std::string& version) {
  auto d = classify(parse_level(ancestor).graph, parse_level(version).graph);
  auto s = diff_stats(d);
  py::dict out;
  out["added"] = s.added;
  out["deleted"] = s.deleted;
  out["modified"] = s.modified_intrinsic + s.modified_propagated;
  out["total_edited"] = s.total_edited;
  py::dict classes;
  for (const auto& [id, cls] : d.classes) classes[py::str(id.str())] = std::string(to_string(cls));
  out["classes"] = classes;
  return out;
}

py::list validate_text(const std::string& text) {
  py::list out;
  for (const auto& v : validate(parse_level(text).graph).violations) {
    out.append(py::make_tuple(std::string(to_string(v.kind)), v.message));
  }
  return out;
}

py::dict simulate(std::uint64_t seed, std::size_t count, std::size_t nodes, std::size_t edges, std::size_t ops) {
  sim::SizeParams params;
  params.nodes = nodes;
  params.edges = edges;
  params.ops_a = params.ops_b = ops;
  std::size_t passed = 0;
  py::list failures;
  for (std::uint64_t s = seed; s < seed + count; ++s) {
    sim::Verdict v;
    {
      py::gil_scoped_release release;
      v = sim::check_scenario(sim::generate(s, params));
    }
    if (v.pass()) {
      ++passed;
    } else {
      failures.append(py::make_tuple(s, v.violations));
    }
  }
  py::dict out;
  out["passed"] = passed;
  out["failed"] = count - passed;
  out["failures"] = failures;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Three-way diff and merge of level graphs.";

  py::exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      py::object type = py::module_::import("scenemerge._core").attr("ParseError");
      py::object err = type(e.what());
      err.attr("line") = e.line();
      err.attr("column") = e.column();
      PyErr_SetObject(type.ptr(), err.ptr());
    }
  });
  py::register_exception<IncompatibleInputError>(m, "IncompatibleInputError", PyExc_ValueError);
  py::register_exception<InvalidGraphError>(m, "InvalidGraphError", PyExc_ValueError);

  m.def("canonicalize", [](const std::string& text) { return serialize_level(parse_level(text)); },
        py::arg("text"), "Parse a level document and return its canonical text.");
  m.def("validate", &validate_text, py::arg("text"),
        "List of (kind, message) invariant violations; empty when the level is valid.");
  m.def("diff", &diff_texts, py::arg("ancestor"), py::arg("version"));
  m.def("merge", &merge_texts, py::arg("ancestor"), py::arg("mine"), py::arg("theirs"),
        py::arg("policy") = "manual", py::arg("averaging") = false,
        py::arg("averageable") = std::set<std::string>{});
  m.def("simulate", &simulate, py::arg("seed") = 0, py::arg("count") = 100, py::arg("nodes") = 10,
        py::arg("edges") = 12, py::arg("ops") = 2);
}
