#include "scenemerge/sim.hpp"

#include <algorithm>
#include <numeric>

#include "scenemerge/assets.hpp"
#include "scenemerge/diff.hpp"
#include "scenemerge/format.hpp"

namespace scenemerge::sim {

ScriptError::ScriptError(std::size_t index, const std::string& message)
    : std::runtime_error("op " + std::to_string(index) + ": " + message), index_(index) {}

std::string describe(const EditOp& op) {
  return std::visit(
      [](const auto& o) -> std::string {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, AddNode>) {
          return "add " + o.id.str() + " " + o.kind + " under " + o.parent.str();
        } else if constexpr (std::is_same_v<T, DeleteNode>) {
          return "delete " + o.id.str();
        } else if constexpr (std::is_same_v<T, SetProperty>) {
          return "set " + o.id.str() + "." + o.key + " = " + format_value(o.value);
        } else if constexpr (std::is_same_v<T, RemoveProperty>) {
          return "unset " + o.id.str() + "." + o.key;
        } else if constexpr (std::is_same_v<T, Reparent>) {
          return "reparent " + o.id.str() + " " + (o.new_parent ? o.new_parent->str() : "-");
        } else if constexpr (std::is_same_v<T, ChangeDepKind>) {
          return "kind " + o.parent.str() + "->" + o.child.str() + " " + std::string(to_string(o.kind));
        } else if constexpr (std::is_same_v<T, AddIndirectEdge>) {
          return "link " + o.parent.str() + "->" + o.child.str();
        } else {
          return "unlink " + o.parent.str() + "->" + o.child.str();
        }
      },
      op);
}

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw std::invalid_argument(message);
}

void require_node(const LevelGraph& g, const NodeId& id) {
  require(g.has_node(id), "no node '" + id.str() + "'");
}

void note_refs(const PropertyValue& v, std::set<NodeId>& touched) {
  if (v.is_node_ref()) touched.insert(v.as_node_ref());
}

std::set<NodeId> delete_node(LevelGraph& g, const NodeId& id) {
  require_node(g, id);
  require(id != g.root(), "cannot delete the root");
  std::set<NodeId> touched = direct_subtree(g, id);
  const std::set<NodeId>& doomed = touched;
  const NodeId relink_to = ParentIndex(g).direct_parent(id).value_or(g.root());

  struct Severed {
    NodeId child;
    Dependency kind;
  };
  std::vector<Severed> severed;
  for (const auto& v : doomed) {
    for (const auto& e : g.out_edges(v)) {
      if (!doomed.contains(e.child)) severed.push_back({e.child, e.dependency});
    }
  }
  std::vector<std::pair<NodeId, std::string>> stale;
  for (const auto& [nid, node] : g.nodes()) {
    if (doomed.contains(nid)) continue;
    for (const auto& [key, value] : node.properties) {
      if (value.is_node_ref() && doomed.contains(value.as_node_ref())) stale.emplace_back(nid, key);
    }
  }
  std::vector<NodeId> gone(doomed.begin(), doomed.end());
  for (const auto& v : gone) g.remove_node(v);
  for (const auto& [nid, key] : stale) {
    g.node(nid).properties.erase(key);
    touched.insert(nid);
  }

  std::set<NodeId> reach = reachable_from_root(g);
  const auto h = heights(g);
  std::sort(severed.begin(), severed.end(), [&](const Severed& x, const Severed& y) {
    return std::tuple(h.at(x.child), x.child, x.kind) < std::tuple(h.at(y.child), y.child, y.kind);
  });
  for (const auto& s : severed) {
    touched.insert(s.child);
    if (reach.contains(s.child)) continue;
    g.put_edge(relink_to, s.child, s.kind);
    std::vector<NodeId> todo{s.child};
    reach.insert(s.child);
    while (!todo.empty()) {
      NodeId v = std::move(todo.back());
      todo.pop_back();
      for (const auto& e : g.out_edges(v)) {
        if (reach.insert(e.child).second) todo.push_back(e.child);
      }
    }
  }
  return touched;
}

}  // namespace

std::set<NodeId> apply_op(LevelGraph& g, const EditOp& op) {
  std::set<NodeId> touched;
  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, AddNode>) {
          require(!g.has_node(o.id), "node '" + o.id.str() + "' already exists");
          require_node(g, o.parent);
          g.put_node(Node{o.id, o.kind, o.properties});
          g.put_edge(o.parent, o.id, Dependency::Direct);
          touched = {o.id, o.parent};
          for (const auto& [k, v] : o.properties) note_refs(v, touched);
        } else if constexpr (std::is_same_v<T, DeleteNode>) {
          touched = delete_node(g, o.id);
        } else if constexpr (std::is_same_v<T, SetProperty>) {
          require_node(g, o.id);
          g.node(o.id).properties.insert_or_assign(o.key, o.value);
          touched = {o.id};
          note_refs(o.value, touched);
        } else if constexpr (std::is_same_v<T, RemoveProperty>) {
          require_node(g, o.id);
          require(g.node(o.id).properties.erase(o.key) == 1, "no property '" + o.key + "'");
          touched = {o.id};
        } else if constexpr (std::is_same_v<T, Reparent>) {
          require_node(g, o.id);
          require(o.id != g.root(), "cannot reparent the root");
          auto current = ParentIndex(g).direct_parent(o.id);
          require(current != o.new_parent, "reparent to the current parent");
          if (o.new_parent) {
            require_node(g, *o.new_parent);
            require(*o.new_parent != o.id, "self-loop");
          }
          if (current) g.remove_edge(*current, o.id);
          if (o.new_parent) g.put_edge(*o.new_parent, o.id, Dependency::Direct);
          touched = {o.id};
          if (o.new_parent) touched.insert(*o.new_parent);
        } else if constexpr (std::is_same_v<T, ChangeDepKind>) {
          auto dep = g.edge(o.parent, o.child);
          require(dep && *dep != o.kind, "no edge to flip");
          g.put_edge(o.parent, o.child, o.kind);
          touched = {o.parent, o.child};
        } else if constexpr (std::is_same_v<T, AddIndirectEdge>) {
          require_node(g, o.parent);
          require_node(g, o.child);
          require(o.parent != o.child && !g.has_edge(o.parent, o.child), "edge exists");
          g.put_edge(o.parent, o.child, Dependency::Indirect);
          touched = {o.parent, o.child};
        } else {
          require(g.edge(o.parent, o.child) == Dependency::Indirect, "no indirect edge");
          g.remove_edge(o.parent, o.child);
          touched = {o.parent, o.child};
        }
      },
      op);
  return touched;
}

TracedResult apply_script_traced(const LevelGraph& graph, const std::vector<EditOp>& script) {
  TracedResult out{graph, {}};
  for (std::size_t i = 0; i < script.size(); ++i) {
    try {
      auto t = apply_op(out.graph, script[i]);
      out.touched.insert(t.begin(), t.end());
    } catch (const std::invalid_argument& e) {
      throw ScriptError(i, describe(script[i]) + ": " + e.what());
    }
    auto report = validate(out.graph);
    if (!report.ok()) {
      throw ScriptError(i, describe(script[i]) + ": " + report.violations.front().message);
    }
  }
  return out;
}

LevelGraph apply_script(const LevelGraph& graph, const std::vector<EditOp>& script) {
  return apply_script_traced(graph, script).graph;
}

// ---------------------------------------------------------------------------
// Generation

namespace {

const std::vector<std::string> kKinds = {"Group", "Mesh", "Light", "Material", "Script"};
const std::vector<std::string> kColors = {"red", "green", "blue"};
const std::vector<double> kIntensities = {0.5, 1.0, 2.0, 4.0};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Small portable generator so that scenarios do not depend on the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix(seed)) {}
  std::uint64_t next() { return state_ = splitmix(state_); }
  std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(next() % n); }
  bool chance(double p) { return static_cast<double>(next() >> 11) * 0x1.0p-53 < p; }
  template <class C>
  const auto& pick(const C& c) {
    return *std::next(c.begin(), static_cast<std::ptrdiff_t>(below(c.size())));
  }
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::uint64_t state_;
};

std::string padded(const char* prefix, std::size_t i) {
  std::string digits = std::to_string(i);
  if (digits.size() < 5) digits.insert(0, 5 - digits.size(), '0');
  return prefix + digits;
}

std::vector<NodeId> node_ids(const LevelGraph& g) {
  std::vector<NodeId> out;
  out.reserve(g.node_count());
  for (const auto& [id, n] : g.nodes()) out.push_back(id);
  return out;
}

PropertyValue random_value(Rng& rng, const std::string& key, const LevelGraph& g) {
  if (key == "color") return rng.pick(kColors);
  if (key == "intensity") return rng.pick(kIntensities);
  if (key == "count") return static_cast<std::int64_t>(rng.below(3) + 1);
  if (key == "visible") return rng.chance(0.5);
  if (key == "target") return NodeRef{rng.pick(g.nodes()).first};
  return AssetRef{rng.pick(g.assets()).first};
}

std::vector<std::string> property_keys(const LevelGraph& g) {
  std::vector<std::string> keys = {"color", "intensity", "count", "visible", "target"};
  if (!g.assets().empty()) keys.push_back("texture");
  return keys;
}

PropertyMap random_properties(Rng& rng, const LevelGraph& g, std::size_t max_count) {
  PropertyMap props;
  auto keys = property_keys(g);
  std::size_t n = rng.below(max_count + 1);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& key = rng.pick(keys);
    props.insert_or_assign(key, random_value(rng, key, g));
  }
  return props;
}

void check_dimensions(std::size_t nodes, std::size_t edges) {
  if (nodes == 0) throw std::invalid_argument("a level needs at least the root node");
  if (edges < nodes - 1) {
    throw std::invalid_argument("too few edges: every non-root node needs an in-edge");
  }
  if (edges > nodes * (nodes - 1) / 2) throw std::invalid_argument("too many edges for an acyclic level");
}

/// Random level with exactly `nodes` nodes and `edges` edges. Nodes are
/// created in index order and edges always run from lower to higher index,
/// which keeps the graph acyclic. The first `internal` nodes form the
/// Direct tree's interior; the rest hang below them as leaves.
LevelGraph random_level(Rng& rng, std::size_t nodes, std::size_t edges, std::size_t internal,
                        std::size_t assets, bool leaf_targets) {
  check_dimensions(nodes, edges);
  std::vector<NodeId> ids;
  ids.reserve(nodes);
  ids.emplace_back("root");
  for (std::size_t i = 1; i < nodes; ++i) ids.emplace_back(padded("n", i));

  LevelGraph g(ids[0], "Scene");
  for (std::size_t i = 0; i < assets; ++i) {
    std::string name = "tex/t" + std::to_string(i) + ".png";
    g.assets().emplace(AssetId(name), AssetEntry{"texture", content_digest(name)});
  }
  internal = std::clamp<std::size_t>(internal, 1, nodes);
  for (std::size_t i = 1; i < nodes; ++i) {
    g.put_node(Node{ids[i], rng.pick(kKinds), {}});
    std::size_t parent = rng.below(std::min(i, internal));
    g.put_edge(ids[parent], ids[i], Dependency::Direct);
  }

  std::size_t extra = edges - (nodes - 1);
  // Indirect parents come from the interior so that leaves stay sinks.
  auto admissible = [&](std::size_t p, std::size_t c) {
    return p < c && p < internal && !g.has_edge(ids[p], ids[c]);
  };
  std::size_t capacity = 0;
  for (std::size_t c = 1; c < nodes; ++c) capacity += std::min(c, internal);
  if (capacity - (nodes - 1) < extra) internal = nodes;  // interior too small: allow any parent
  if (nodes <= 200) {
    std::vector<std::pair<std::size_t, std::size_t>> pool;
    for (std::size_t c = 1; c < nodes; ++c) {
      for (std::size_t p = 0; p < c; ++p) {
        if (admissible(p, c)) pool.emplace_back(p, c);
      }
    }
    rng.shuffle(pool);
    if (pool.size() < extra) throw std::invalid_argument("cannot place the requested edges");
    for (std::size_t i = 0; i < extra; ++i) g.put_edge(ids[pool[i].first], ids[pool[i].second], Dependency::Indirect);
  } else {
    while (extra > 0) {
      std::size_t c = 1 + rng.below(nodes - 1);
      std::size_t p = rng.below(std::min(c, internal));
      if (!admissible(p, c)) continue;
      g.put_edge(ids[p], ids[c], Dependency::Indirect);
      --extra;
    }
  }

  for (std::size_t i = 0; i < nodes; ++i) {
    auto& node = g.node(ids[i]);
    node.properties = random_properties(rng, g, 3);
    if (leaf_targets) {
      // Large scenarios delete leaves; keep references on interior nodes
      // so that deletions never cascade into reference removal.
      auto it = node.properties.find("target");
      if (it != node.properties.end()) it->second = NodeRef{ids[rng.below(std::min(internal, nodes))]};
    }
  }
  return g;
}

std::size_t pick_weighted(Rng& rng, const std::vector<double>& w) {
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (total <= 0) return 0;
  double x = static_cast<double>(rng.next() >> 11) * 0x1.0p-53 * total;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (x < w[i]) return i;
    x -= w[i];
  }
  return w.size() - 1;
}

std::optional<EditOp> propose(Rng& rng, const LevelGraph& g, std::size_t type, char branch,
                              std::size_t& fresh, double shared_ratio) {
  auto ids = node_ids(g);
  const NodeId& any = rng.pick(ids);
  switch (type) {
    case 0: {
      NodeId id;
      std::string kind;
      if (rng.chance(shared_ratio)) {
        std::size_t k = rng.below(4);
        id = NodeId("s" + std::to_string(k));
        kind = kKinds[k % kKinds.size()];
      } else {
        id = NodeId(std::string(1, branch) + std::to_string(fresh++));
        kind = rng.pick(kKinds);
      }
      return AddNode{id, kind, any, random_properties(rng, g, 2)};
    }
    case 1:
      return DeleteNode{any};
    case 2: {
      auto keys = property_keys(g);
      const std::string& key = rng.pick(keys);
      return SetProperty{any, key, random_value(rng, key, g)};
    }
    case 3: {
      const auto& props = g.node(any).properties;
      if (props.empty()) return std::nullopt;
      return RemoveProperty{any, rng.pick(props).first};
    }
    case 4: {
      if (rng.chance(0.15)) return Reparent{any, std::nullopt};
      return Reparent{any, rng.pick(ids)};
    }
    case 5: {
      if (g.edge_count() == 0) return std::nullopt;
      const auto& [key, dep] = rng.pick(g.edges());
      return ChangeDepKind{key.first, key.second,
                           dep == Dependency::Direct ? Dependency::Indirect : Dependency::Direct};
    }
    case 6:
      return AddIndirectEdge{rng.pick(ids), any};
    default: {
      std::vector<Edge> indirect;
      for (const auto& [key, dep] : g.edges()) {
        if (dep == Dependency::Indirect) indirect.push_back({key.first, key.second, dep});
      }
      if (indirect.empty()) return std::nullopt;
      const Edge& e = rng.pick(indirect);
      return RemoveIndirectEdge{e.parent, e.child};
    }
  }
}

std::vector<EditOp> random_script(Rng& rng, const LevelGraph& base, std::size_t count, char branch,
                                  const SizeParams& params) {
  const auto& m = params.mix;
  const std::vector<double> weights = {m.add,     m.remove_node, m.set,          m.remove_property,
                                       m.reparent, m.change_kind, m.add_indirect, m.remove_indirect};
  std::vector<EditOp> script;
  LevelGraph g = base;
  std::size_t fresh = 0;
  for (std::size_t slot = 0; slot < count; ++slot) {
    for (int attempt = 0; attempt < 64; ++attempt) {
      auto op = propose(rng, g, pick_weighted(rng, weights), branch, fresh, params.shared_add_ratio);
      if (!op) continue;
      LevelGraph trial = g;
      try {
        apply_op(trial, *op);
      } catch (const std::invalid_argument&) {
        continue;
      }
      if (!validate(trial).ok()) continue;
      g = std::move(trial);
      script.push_back(std::move(*op));
      break;
    }
  }
  return script;
}

}  // namespace

Scenario generate(std::uint64_t seed, const SizeParams& params) {
  check_dimensions(params.nodes, params.edges);
  Rng rng(seed);
  Scenario s;
  s.seed = seed;
  s.base = random_level(rng, params.nodes, params.edges, params.nodes, params.assets, false);
  Rng rng_a(rng.next());
  Rng rng_b(rng.next());
  s.script_a = random_script(rng_a, s.base, params.ops_a, 'a', params);
  s.script_b = random_script(rng_b, s.base, params.ops_b, 'b', params);
  s.policy.resolution = static_cast<ResolutionPolicy>(rng.below(3));
  s.policy.numeric_averaging = rng.chance(0.25);
  if (s.policy.numeric_averaging) s.policy.averageable_kinds = {"Light", "Material"};
  return s;
}

const std::vector<ScaleTarget>& scale_presets() {
  static const std::vector<ScaleTarget> presets = {
      {"room", 79, 84, 120, 0, 48, 45, 0, 40, 244, 248},
      {"planets", 2702, 3352, 0, 518, 27, 0, 0, 31, 2184, 2710},
      {"lab", 2800, 3156, 100, 0, 31, 250, 8, 45, 3142, 3498},
      {"vikings", 2249, 2318, 80, 0, 281, 55, 0, 412, 2384, 2452},
  };
  return presets;
}

const ScaleTarget& scale_preset(const std::string& name) {
  for (const auto& p : scale_presets()) {
    if (p.name == name) return p;
  }
  throw std::invalid_argument("unknown size preset '" + name + "'");
}

Scenario generate_scale(std::uint64_t seed, const ScaleTarget& t) {
  Rng rng(seed);
  Scenario s;
  s.seed = seed;
  s.policy.resolution = ResolutionPolicy::PreferA;
  s.base = random_level(rng, t.nodes, t.edges, std::max<std::size_t>(1, t.nodes / 5), 4, true);

  const LevelGraph& g = s.base;
  std::set<NodeId> referenced;
  for (const auto& [id, node] : g.nodes()) {
    for (const auto& [k, v] : node.properties) {
      if (v.is_node_ref()) referenced.insert(v.as_node_ref());
    }
  }
  std::vector<NodeId> sinks;
  std::vector<NodeId> leaves;  // no Direct children
  for (const auto& [id, node] : g.nodes()) {
    if (id == g.root()) continue;
    auto out = g.out_edges(id);
    if (out.empty() && !referenced.contains(id)) sinks.push_back(id);
    if (std::none_of(out.begin(), out.end(), [](const Edge& e) { return e.dependency == Dependency::Direct; })) {
      leaves.push_back(id);
    }
  }
  if (sinks.size() < t.deletes_a + t.deletes_b) throw std::invalid_argument("not enough leaves to delete");
  rng.shuffle(sinks);
  std::set<NodeId> deleted(sinks.begin(), sinks.begin() + static_cast<std::ptrdiff_t>(t.deletes_a + t.deletes_b));

  std::vector<NodeId> settable;
  for (const auto& id : leaves) {
    if (!deleted.contains(id)) settable.push_back(id);
  }
  std::vector<NodeId> parents;
  for (const auto& [id, node] : g.nodes()) {
    if (!deleted.contains(id)) parents.push_back(id);
  }
  if (settable.size() < std::max(t.sets_a, t.sets_b)) throw std::invalid_argument("not enough leaves to edit");

  auto build = [&](char branch, std::size_t adds, std::size_t del_from, std::size_t dels, std::size_t sets) {
    std::vector<EditOp> script;
    for (std::size_t i = 0; i < dels; ++i) script.push_back(DeleteNode{sinks[del_from + i]});
    std::vector<NodeId> targets = settable;
    rng.shuffle(targets);
    const std::string key = std::string("edit_") + branch;
    for (std::size_t i = 0; i < sets; ++i) {
      script.push_back(SetProperty{targets[i], key, static_cast<double>(rng.below(1000)) / 8.0});
    }
    for (std::size_t i = 0; i < adds; ++i) {
      PropertyMap props;
      props.emplace("color", rng.pick(kColors));
      props.emplace("intensity", rng.pick(kIntensities));
      script.push_back(AddNode{NodeId(padded(branch == 'a' ? "a_new" : "b_new", i)), rng.pick(kKinds),
                               rng.pick(parents), std::move(props)});
    }
    return script;
  };
  s.script_a = build('a', t.adds_a, 0, t.deletes_a, t.sets_a);
  s.script_b = build('b', t.adds_b, t.deletes_a, t.deletes_b, t.sets_b);
  return s;
}

// ---------------------------------------------------------------------------
// Checking

namespace {

std::string fingerprint(const MergeOutcome& o) {
  std::string out = serialize_level(o.merged);
  out += serialize_report([&] {
    MergeOutcome copy = o;
    copy.stats.wall_time_seconds = 0;
    return copy;
  }());
  return out;
}

MergePolicy with_resolution(MergePolicy p, ResolutionPolicy r) {
  p.resolution = r;
  return p;
}

ResolutionPolicy mirrored(ResolutionPolicy r) {
  switch (r) {
    case ResolutionPolicy::PreferA:
      return ResolutionPolicy::PreferB;
    case ResolutionPolicy::PreferB:
      return ResolutionPolicy::PreferA;
    default:
      return r;
  }
}

// Every edit a branch made is visible in the merged graph.
void check_observable(const LevelGraph& anc, const LevelGraph& merged, const DiffResult& d, char branch,
                      std::vector<std::string>& out) {
  ParentIndex mp(merged);
  auto bad = [&](const NodeId& id, const std::string& what) {
    out.push_back(std::string("disjoint edits: branch ") + branch + " " + what + " of '" + id.str() +
                  "' missing from merge");
  };
  for (const auto& [id, cls] : d.classes) {
    if (cls == ChangeClass::Deleted) {
      if (merged.has_node(id)) bad(id, "deletion");
      continue;
    }
    if (cls != ChangeClass::Added && !d.is_intrinsic(id)) continue;
    const NodeDelta& delta = *d.delta(id);
    const Node* n = merged.find_node(id);
    if (n == nullptr) {
      bad(id, "node");
      continue;
    }
    for (const auto& [k, v] : delta.property_sets) {
      auto it = n->properties.find(k);
      if (it == n->properties.end() || !(it->second == v)) bad(id, "property '" + k + "'");
    }
    for (const auto& k : delta.property_removals) {
      if (n->properties.contains(k)) bad(id, "removal of '" + k + "'");
    }
    if (delta.reparent && mp.direct_parent(id) != delta.reparent->new_parent) bad(id, "direct parent");
    for (const auto& p : delta.indirect_added) {
      if (merged.edge(p, id) != Dependency::Indirect) bad(id, "indirect edge from '" + p.str() + "'");
    }
    for (const auto& p : delta.indirect_removed) {
      if (merged.edge(p, id) == Dependency::Indirect) bad(id, "removal of edge from '" + p.str() + "'");
    }
  }
  (void)anc;
}

}  // namespace

Verdict check_scenario(const Scenario& sc, const ConflictOracle& oracle) {
  Verdict v;
  auto& out = v.violations;
  TracedResult a, b;
  try {
    a = apply_script_traced(sc.base, sc.script_a);
    b = apply_script_traced(sc.base, sc.script_b);
  } catch (const std::exception& e) {
    out.push_back(std::string("script not applicable: ") + e.what());
    return v;
  }

  auto run = [&](const LevelGraph& x, const LevelGraph& y, const MergePolicy& p,
                 const char* label) -> std::optional<MergeOutcome> {
    try {
      return merge3(sc.base, x, y, p);
    } catch (const std::exception& e) {
      out.push_back(std::string(label) + ": merge failed: " + e.what());
      return std::nullopt;
    }
  };

  auto main = run(a.graph, b.graph, sc.policy, "merge");
  if (!main) return v;
  v.conflicts = main->conflicts.size();
  if (auto report = validate(main->merged); !report.ok()) {
    out.push_back("merged level invalid: " + report.violations.front().message);
  }
  if (sc.policy.resolution != ResolutionPolicy::Manual && main->has_unresolved()) {
    out.push_back("unresolved conflict under a preference policy");
  }

  if (auto again = run(a.graph, b.graph, sc.policy, "rerun"); again && fingerprint(*again) != fingerprint(*main)) {
    out.push_back("determinism: repeated merge differs");
  }

  MergePolicy swapped_policy = with_resolution(sc.policy, mirrored(sc.policy.resolution));
  if (auto swapped = run(b.graph, a.graph, swapped_policy, "swapped");
      swapped && !(swapped->merged == main->merged)) {
    out.push_back("branch symmetry: swapping branches and preference changes the merge");
  }

  if (auto same = run(a.graph, a.graph, sc.policy, "agreement")) {
    if (!(same->merged == a.graph)) out.push_back("agreement absorption: merge(A, A) != A");
    if (!same->conflicts.empty()) out.push_back("agreement absorption: merge(A, A) has conflicts");
  }
  if (auto one = run(a.graph, sc.base, sc.policy, "one-sided A"); one && !(one->merged == a.graph)) {
    out.push_back("one-sided merge: merge(A, base) != A");
  }
  if (auto one = run(sc.base, b.graph, sc.policy, "one-sided B"); one && !(one->merged == b.graph)) {
    out.push_back("one-sided merge: merge(base, B) != B");
  }

  std::vector<NodeId> shared;
  std::set_intersection(a.touched.begin(), a.touched.end(), b.touched.begin(), b.touched.end(),
                        std::back_inserter(shared));
  if (shared.empty() && main->removed_cycle_edges.empty()) {
    v.disjoint = true;
    if (!main->conflicts.empty()) out.push_back("disjoint edits: unexpected conflict");
    check_observable(sc.base, main->merged, classify(sc.base, a.graph), 'a', out);
    check_observable(sc.base, main->merged, classify(sc.base, b.graph), 'b', out);
  }

  if (oracle) {
    std::optional<MergeOutcome> manual;
    if (sc.policy.resolution == ResolutionPolicy::Manual && !sc.policy.numeric_averaging) {
      manual = main;
    } else {
      manual = run(a.graph, b.graph, MergePolicy{}, "manual");
    }
    if (manual) {
      v.oracle_checked = true;
      if (auto mismatch = oracle(sc, *manual)) out.push_back("oracle: " + *mismatch);
    }
  }
  return v;
}

}  // namespace scenemerge::sim
