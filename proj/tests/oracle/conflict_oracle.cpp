// Deliberately naive: plain string ids, fixed-point loops over the edge list,
// and no use of the diff or merge modules.
#include "conflict_oracle.hpp"

#include <map>
#include <tuple>

namespace oracle {

using scenemerge::Dependency;
using scenemerge::LevelGraph;
using scenemerge::PropertyValue;
namespace sim = scenemerge::sim;

namespace {

struct RawEdge {
  std::string parent;
  std::string child;
  bool direct;
};

std::vector<RawEdge> edges_of(const LevelGraph& g) {
  std::vector<RawEdge> out;
  for (const auto& [key, dep] : g.edges()) {
    out.push_back({key.first.str(), key.second.str(), dep == Dependency::Direct});
  }
  return out;
}

std::optional<std::string> direct_parent(const std::vector<RawEdge>& edges, const std::string& n) {
  for (const auto& e : edges) {
    if (e.child == n && e.direct) return e.parent;
  }
  return std::nullopt;
}

// Everything reachable from `from` (inclusive) using the given edges.
std::set<std::string> closure(const std::vector<RawEdge>& edges, std::set<std::string> from, bool direct_only) {
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& e : edges) {
      if (direct_only && !e.direct) continue;
      if (from.count(e.parent) && !from.count(e.child)) {
        from.insert(e.child);
        grew = true;
      }
    }
  }
  return from;
}

struct Effects {
  std::map<std::pair<std::string, std::string>, std::optional<PropertyValue>> props;
  std::map<std::string, std::optional<std::string>> direct;
  std::set<std::string> inedge_changed;
  std::set<std::pair<std::string, std::string>> new_edges;
  std::set<std::string> refs;
  std::set<std::string> deleted;
  std::optional<std::string> deleted_root;
  std::optional<sim::AddNode> added;
};

Effects effects_of(const LevelGraph& base, const sim::EditOp& op) {
  Effects fx;
  const auto edges = edges_of(base);
  const std::string root = base.root().str();

  if (auto* o = std::get_if<sim::AddNode>(&op)) {
    fx.added = *o;
    fx.new_edges.insert({o->parent.str(), o->id.str()});
    for (const auto& [k, v] : o->properties) {
      if (v.is_node_ref()) fx.refs.insert(v.as_node_ref().str());
    }
  } else if (auto* o = std::get_if<sim::DeleteNode>(&op)) {
    const std::string x = o->id.str();
    fx.deleted_root = x;
    fx.deleted = closure(edges, {x}, true);
    const std::string relink_parent = direct_parent(edges, x).value_or(root);

    for (const auto& [id, node] : base.nodes()) {
      if (fx.deleted.count(id.str())) continue;
      for (const auto& [k, v] : node.properties) {
        if (v.is_node_ref() && fx.deleted.count(v.as_node_ref().str())) fx.props[{id.str(), k}] = std::nullopt;
      }
    }
    std::vector<RawEdge> remaining;
    std::set<std::string> severed;
    for (const auto& e : edges) {
      const bool p_gone = fx.deleted.count(e.parent) > 0;
      const bool c_gone = fx.deleted.count(e.child) > 0;
      if (!p_gone && !c_gone) remaining.push_back(e);
      if (p_gone && !c_gone) severed.insert(e.child);
    }
    const auto reachable = closure(remaining, {root}, false);
    std::set<std::string> orphaned;
    for (const auto& c : severed) {
      if (!reachable.count(c)) orphaned.insert(c);
    }
    // An orphan reachable from another orphan is reconnected through it.
    for (const auto& c : orphaned) {
      bool covered = false;
      for (const auto& other : orphaned) {
        if (other != c && closure(remaining, {other}, false).count(c)) covered = true;
      }
      if (!covered) {
        fx.inedge_changed.insert(c);
        fx.new_edges.insert({relink_parent, c});
      }
    }
  } else if (auto* o = std::get_if<sim::SetProperty>(&op)) {
    const auto& props = base.node(o->id).properties;
    auto it = props.find(o->key);
    if (it == props.end() || !(it->second == o->value)) {
      fx.props[{o->id.str(), o->key}] = o->value;
      if (o->value.is_node_ref()) fx.refs.insert(o->value.as_node_ref().str());
    }
  } else if (auto* o = std::get_if<sim::RemoveProperty>(&op)) {
    fx.props[{o->id.str(), o->key}] = std::nullopt;
  } else if (auto* o = std::get_if<sim::Reparent>(&op)) {
    const std::string n = o->id.str();
    fx.direct[n] = o->new_parent ? std::optional<std::string>(o->new_parent->str()) : std::nullopt;
    fx.inedge_changed.insert(n);
    if (o->new_parent) fx.new_edges.insert({o->new_parent->str(), n});
  } else if (auto* o = std::get_if<sim::ChangeDepKind>(&op)) {
    const std::string c = o->child.str();
    if (o->kind == Dependency::Direct) {
      fx.direct[c] = o->parent.str();
    } else {
      fx.direct[c] = std::nullopt;
    }
    fx.inedge_changed.insert(c);
    fx.new_edges.insert({o->parent.str(), c});
  } else if (auto* o = std::get_if<sim::AddIndirectEdge>(&op)) {
    fx.inedge_changed.insert(o->child.str());
    fx.new_edges.insert({o->parent.str(), o->child.str()});
  } else if (auto* o = std::get_if<sim::RemoveIndirectEdge>(&op)) {
    fx.inedge_changed.insert(o->child.str());
  }
  return fx;
}

bool hits(const Effects& editor, const std::set<std::string>& doomed) {
  for (const auto& [slot, value] : editor.props) {
    if (doomed.count(slot.first)) return true;
  }
  for (const auto& [n, p] : editor.direct) {
    if (doomed.count(n)) return true;
  }
  for (const auto& n : editor.inedge_changed) {
    if (doomed.count(n)) return true;
  }
  for (const auto& [p, c] : editor.new_edges) {
    if (doomed.count(p)) return true;
  }
  for (const auto& r : editor.refs) {
    if (doomed.count(r)) return true;
  }
  return false;
}

}  // namespace

std::set<std::string> expected_conflicts(const LevelGraph& base, const std::optional<sim::EditOp>& a,
                                         const std::optional<sim::EditOp>& b) {
  std::set<std::string> out;
  if (!a || !b) return out;
  const Effects fa = effects_of(base, *a);
  const Effects fb = effects_of(base, *b);

  // Rule: the same property modified in both branches to different results.
  for (const auto& [slot, va] : fa.props) {
    auto it = fb.props.find(slot);
    if (it != fb.props.end() && !(it->second == va)) out.insert("property " + slot.first + " " + slot.second);
  }
  // Rule: a node may have one Direct parent; concurrent moves must agree.
  for (const auto& [n, pa] : fa.direct) {
    auto it = fb.direct.find(n);
    if (it != fb.direct.end() && it->second != pa) out.insert("reparent " + n);
  }
  // Rule: same-id additions merge key by key.
  if (fa.added && fb.added && fa.added->id == fb.added->id) {
    const std::string n = fa.added->id.str();
    if (fa.added->parent != fb.added->parent) out.insert("reparent " + n);
    for (const auto& [k, v] : fa.added->properties) {
      auto it = fb.added->properties.find(k);
      if (it != fb.added->properties.end() && !(it->second == v)) out.insert("add-add " + n + " " + k);
    }
  }
  // Rule: deleting a subtree the other branch edited, extended or referenced.
  if (fa.deleted_root && hits(fb, fa.deleted)) out.insert("delete-modify a " + *fa.deleted_root);
  if (fb.deleted_root && hits(fa, fb.deleted)) out.insert("delete-modify b " + *fb.deleted_root);
  return out;
}

std::set<std::string> signatures(const std::vector<scenemerge::Conflict>& conflicts) {
  std::set<std::string> out;
  for (const auto& c : conflicts) {
    if (auto* p = std::get_if<scenemerge::PropertyConflict>(&c.detail)) {
      out.insert("property " + p->node.str() + " " + p->key);
    } else if (auto* r = std::get_if<scenemerge::ReparentConflict>(&c.detail)) {
      out.insert("reparent " + r->node.str());
    } else if (auto* aa = std::get_if<scenemerge::AddAddConflict>(&c.detail)) {
      out.insert("add-add " + aa->node.str() + " " + aa->key);
    } else if (auto* dm = std::get_if<scenemerge::DeleteModifyConflict>(&c.detail)) {
      out.insert(std::string("delete-modify ") + (dm->deleting_branch == scenemerge::Branch::A ? "a" : "b") +
                 " " + dm->deleted_node.str());
    }
  }
  return out;
}

}  // namespace oracle
