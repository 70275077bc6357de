#include "scenemerge/graph.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <limits>

namespace scenemerge {

std::string_view PropertyValue::type_name() const {
  switch (value_.index()) {
    case 0:
      return "bool";
    case 1:
      return "int";
    case 2:
      return "real";
    case 3:
      return "text";
    case 4:
      return "ref";
    default:
      return "asset";
  }
}

bool operator==(const PropertyValue& a, const PropertyValue& b) {
  if (a.value_.index() != b.value_.index()) return false;
  if (a.is_real()) {
    return std::bit_cast<std::uint64_t>(a.as_real()) == std::bit_cast<std::uint64_t>(b.as_real());
  }
  return a.value_ == b.value_;
}

std::string_view to_string(Dependency dep) {
  return dep == Dependency::Direct ? "direct" : "indirect";
}

UnknownNodeError::UnknownNodeError(const NodeId& id)
    : std::out_of_range("unknown node id '" + id.str() + "'"), id_(id) {}

LevelGraph::LevelGraph(NodeId root, std::string root_kind) : root_(root) {
  nodes_.emplace(root, Node{root, std::move(root_kind), {}});
}

const Node& LevelGraph::node(const NodeId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw UnknownNodeError(id);
  return it->second;
}

Node& LevelGraph::node(const NodeId& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw UnknownNodeError(id);
  return it->second;
}

const Node* LevelGraph::find_node(const NodeId& id) const {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : &it->second;
}

void LevelGraph::put_node(Node node) {
  NodeId id = node.id;
  nodes_.insert_or_assign(std::move(id), std::move(node));
}

void LevelGraph::remove_node(const NodeId& id) {
  nodes_.erase(id);
  for (auto it = edges_.begin(); it != edges_.end();) {
    if (it->first.first == id || it->first.second == id) {
      it = edges_.erase(it);
    } else {
      ++it;
    }
  }
}

std::optional<Dependency> LevelGraph::edge(const NodeId& parent, const NodeId& child) const {
  auto it = edges_.find({parent, child});
  if (it == edges_.end()) return std::nullopt;
  return it->second;
}

void LevelGraph::put_edge(const NodeId& parent, const NodeId& child, Dependency dep) {
  edges_.insert_or_assign(EdgeKey{parent, child}, dep);
}

void LevelGraph::remove_edge(const NodeId& parent, const NodeId& child) {
  edges_.erase({parent, child});
}

std::vector<Edge> LevelGraph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(edges_.size());
  for (const auto& [key, dep] : edges_) out.push_back({key.first, key.second, dep});
  return out;
}

std::vector<Edge> LevelGraph::out_edges(const NodeId& parent) const {
  std::vector<Edge> out;
  for (auto it = edges_.lower_bound({parent, NodeId{}});
       it != edges_.end() && it->first.first == parent; ++it) {
    out.push_back({it->first.first, it->first.second, it->second});
  }
  return out;
}

ParentIndex::ParentIndex(const LevelGraph& graph) {
  for (const auto& [key, dep] : graph.edges()) parents_[key.second].emplace(key.first, dep);
}

const std::map<NodeId, Dependency>& ParentIndex::parents(const NodeId& child) const {
  auto it = parents_.find(child);
  return it == parents_.end() ? empty_ : it->second;
}

std::optional<NodeId> ParentIndex::direct_parent(const NodeId& child) const {
  for (const auto& [parent, dep] : parents(child)) {
    if (dep == Dependency::Direct) return parent;
  }
  return std::nullopt;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::MissingRoot:
      return "missing-root";
    case ViolationKind::RootHasParent:
      return "root-has-parent";
    case ViolationKind::DanglingEdge:
      return "dangling-edge";
    case ViolationKind::SelfLoop:
      return "self-loop";
    case ViolationKind::DanglingNodeRef:
      return "dangling-node-ref";
    case ViolationKind::DanglingAssetRef:
      return "dangling-asset-ref";
    case ViolationKind::MultipleDirectParents:
      return "multiple-direct-parents";
    case ViolationKind::Cycle:
      return "cycle";
    case ViolationKind::Unreachable:
      return "unreachable";
  }
  return "unknown";
}

std::size_t ValidationReport::count(ViolationKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      violations.begin(), violations.end(), [kind](const Violation& v) { return v.kind == kind; }));
}

namespace {

// Dense index over the nodes of a graph; edges whose endpoints are missing
// are ignored.
struct DenseGraph {
  std::vector<NodeId> ids;
  std::map<NodeId, std::size_t> index;
  std::vector<std::vector<std::size_t>> out;

  explicit DenseGraph(const LevelGraph& graph) {
    ids.reserve(graph.node_count());
    for (const auto& [id, node] : graph.nodes()) {
      index.emplace(id, ids.size());
      ids.push_back(id);
    }
    out.resize(ids.size());
    for (const auto& [key, dep] : graph.edges()) {
      auto p = index.find(key.first);
      auto c = index.find(key.second);
      if (p == index.end() || c == index.end()) continue;
      out[p->second].push_back(c->second);
    }
  }
};

// Iterative Tarjan. Components come out in reverse topological order.
std::vector<std::vector<std::size_t>> tarjan(const DenseGraph& g) {
  const std::size_t n = g.ids.size();
  constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> order(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> comps;
  std::size_t counter = 0;

  struct Frame {
    std::size_t v;
    std::size_t next;
  };
  std::vector<Frame> call;

  for (std::size_t start = 0; start < n; ++start) {
    if (order[start] != kUnvisited) continue;
    call.push_back({start, 0});
    order[start] = low[start] = counter++;
    stack.push_back(start);
    on_stack[start] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.next < g.out[f.v].size()) {
        std::size_t w = g.out[f.v][f.next++];
        if (order[w] == kUnvisited) {
          order[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], order[w]);
        }
        continue;
      }
      std::size_t v = f.v;
      call.pop_back();
      if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      if (low[v] == order[v]) {
        std::vector<std::size_t> comp;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
      }
    }
  }
  return comps;
}

std::vector<bool> reachable_dense(const DenseGraph& g, std::size_t from) {
  std::vector<bool> seen(g.ids.size(), false);
  std::vector<std::size_t> todo{from};
  seen[from] = true;
  while (!todo.empty()) {
    std::size_t v = todo.back();
    todo.pop_back();
    for (std::size_t w : g.out[v]) {
      if (!seen[w]) {
        seen[w] = true;
        todo.push_back(w);
      }
    }
  }
  return seen;
}

std::string edge_label(const NodeId& parent, const NodeId& child) {
  return parent.str() + "->" + child.str();
}

}  // namespace

ValidationReport validate(const LevelGraph& graph) {
  ValidationReport report;
  auto add = [&](ViolationKind kind, std::vector<std::string> subjects, std::string message) {
    report.violations.push_back({kind, std::move(subjects), std::move(message)});
  };

  const bool has_root = graph.has_node(graph.root());
  if (!has_root) {
    add(ViolationKind::MissingRoot, {graph.root().str()},
        "root '" + graph.root().str() + "' is not a node of the graph");
  }

  std::map<NodeId, std::vector<NodeId>> direct_parents;
  for (const auto& [key, dep] : graph.edges()) {
    const auto& [parent, child] = key;
    if (!graph.has_node(parent) || !graph.has_node(child)) {
      add(ViolationKind::DanglingEdge, {edge_label(parent, child)},
          "edge " + edge_label(parent, child) + " references a missing node");
      continue;
    }
    if (parent == child) {
      add(ViolationKind::SelfLoop, {parent.str()}, "self-loop on '" + parent.str() + "'");
    }
    if (child == graph.root()) {
      add(ViolationKind::RootHasParent, {edge_label(parent, child)},
          "root has incoming edge from '" + parent.str() + "'");
    }
    if (dep == Dependency::Direct) direct_parents[child].push_back(parent);
  }
  for (const auto& [child, parents] : direct_parents) {
    if (parents.size() < 2) continue;
    std::vector<std::string> subjects{child.str()};
    std::string msg = "'" + child.str() + "' has " + std::to_string(parents.size()) +
                      " direct parents:";
    for (const auto& p : parents) {
      subjects.push_back(p.str());
      msg += " " + p.str();
    }
    add(ViolationKind::MultipleDirectParents, std::move(subjects), std::move(msg));
  }

  for (const auto& [id, node] : graph.nodes()) {
    for (const auto& [key, value] : node.properties) {
      if (value.is_node_ref() && !graph.has_node(value.as_node_ref())) {
        add(ViolationKind::DanglingNodeRef, {id.str(), value.as_node_ref().str()},
            "property '" + key + "' of '" + id.str() + "' references missing node '" +
                value.as_node_ref().str() + "'");
      }
      if (value.is_asset_ref() && !graph.assets().contains(value.as_asset_ref())) {
        add(ViolationKind::DanglingAssetRef, {id.str(), value.as_asset_ref().str()},
            "property '" + key + "' of '" + id.str() + "' references asset '" +
                value.as_asset_ref().str() + "' missing from the manifest");
      }
    }
  }

  DenseGraph dense(graph);
  for (auto& comp : tarjan(dense)) {
    if (comp.size() < 2) continue;
    std::vector<std::string> subjects;
    std::string msg = "cycle through";
    for (std::size_t v : comp) {
      subjects.push_back(dense.ids[v].str());
      msg += " " + dense.ids[v].str();
    }
    add(ViolationKind::Cycle, std::move(subjects), std::move(msg));
  }

  if (has_root) {
    auto seen = reachable_dense(dense, dense.index.at(graph.root()));
    for (std::size_t v = 0; v < seen.size(); ++v) {
      if (!seen[v]) {
        add(ViolationKind::Unreachable, {dense.ids[v].str()},
            "'" + dense.ids[v].str() + "' is not reachable from the root");
      }
    }
  }
  return report;
}

std::vector<std::vector<NodeId>> strongly_connected_components(const LevelGraph& graph) {
  DenseGraph dense(graph);
  std::vector<std::vector<NodeId>> out;
  for (const auto& comp : tarjan(dense)) {
    std::vector<NodeId> ids;
    ids.reserve(comp.size());
    for (std::size_t v : comp) ids.push_back(dense.ids[v]);
    out.push_back(std::move(ids));
  }
  return out;
}

std::map<NodeId, std::size_t> heights(const LevelGraph& graph) {
  DenseGraph dense(graph);
  auto comps = tarjan(dense);
  const std::size_t n = dense.ids.size();
  std::vector<std::size_t> comp_of(n);
  for (std::size_t c = 0; c < comps.size(); ++c) {
    for (std::size_t v : comps[c]) comp_of[v] = c;
  }

  std::vector<bool> from_root(comps.size(), false);
  auto root_it = dense.index.find(graph.root());
  if (root_it != dense.index.end()) {
    auto seen = reachable_dense(dense, root_it->second);
    for (std::size_t v = 0; v < n; ++v) {
      if (seen[v]) from_root[comp_of[v]] = true;
    }
  }

  // Predecessor components, then relax in topological order (tarjan emits
  // reverse topological order). A root-reachable component only counts
  // root-reachable predecessors so its height is the longest path from root.
  std::vector<std::vector<std::size_t>> preds(comps.size());
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t w : dense.out[v]) {
      if (comp_of[v] != comp_of[w]) preds[comp_of[w]].push_back(comp_of[v]);
    }
  }
  std::vector<std::size_t> comp_height(comps.size(), 0);
  for (std::size_t i = comps.size(); i-- > 0;) {
    std::size_t best = 0;
    for (std::size_t p : preds[i]) {
      if (from_root[i] && !from_root[p]) continue;
      best = std::max(best, comp_height[p] + 1);
    }
    comp_height[i] = best;
  }

  std::map<NodeId, std::size_t> out;
  for (std::size_t v = 0; v < n; ++v) out.emplace_hint(out.end(), dense.ids[v], comp_height[comp_of[v]]);
  return out;
}

std::size_t height(const LevelGraph& graph, const NodeId& id) {
  if (!graph.has_node(id)) throw UnknownNodeError(id);
  return heights(graph).at(id);
}

std::set<NodeId> direct_subtree(const LevelGraph& graph, const NodeId& id) {
  if (!graph.has_node(id)) throw UnknownNodeError(id);
  std::set<NodeId> out{id};
  std::vector<NodeId> todo{id};
  while (!todo.empty()) {
    NodeId v = std::move(todo.back());
    todo.pop_back();
    for (const auto& e : graph.out_edges(v)) {
      if (e.dependency == Dependency::Direct && graph.has_node(e.child) &&
          out.insert(e.child).second) {
        todo.push_back(e.child);
      }
    }
  }
  return out;
}

std::set<NodeId> reachable_from_root(const LevelGraph& graph) {
  std::set<NodeId> out;
  if (!graph.has_node(graph.root())) return out;
  out.insert(graph.root());
  std::deque<NodeId> todo{graph.root()};
  while (!todo.empty()) {
    NodeId v = std::move(todo.front());
    todo.pop_front();
    for (const auto& e : graph.out_edges(v)) {
      if (graph.has_node(e.child) && out.insert(e.child).second) todo.push_back(e.child);
    }
  }
  return out;
}

bool reaches(const LevelGraph& graph, const NodeId& from, const NodeId& to) {
  std::set<NodeId> seen;
  std::vector<NodeId> todo{from};
  while (!todo.empty()) {
    NodeId v = std::move(todo.back());
    todo.pop_back();
    for (const auto& e : graph.out_edges(v)) {
      if (e.child == to) return true;
      if (seen.insert(e.child).second) todo.push_back(e.child);
    }
  }
  return false;
}

}  // namespace scenemerge
