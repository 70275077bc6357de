#include "scenemerge/format.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace scenemerge {

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : std::runtime_error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column),
      detail_(message) {}

namespace {

bool is_bare_char(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' ||
         c == '.' || c == ':' || c == '/' || c == '@' || c == '+' || c == '-';
}

struct Token {
  std::string text;
  std::size_t column = 0;
  bool quoted = false;
};

struct Line {
  std::size_t number = 0;
  bool indented = false;
  std::vector<Token> tokens;
};

Line tokenize(std::string_view raw, std::size_t number) {
  Line line;
  line.number = number;
  line.indented = !raw.empty() && (raw.front() == ' ' || raw.front() == '\t');
  std::size_t i = 0;
  while (i < raw.size()) {
    const char c = raw[i];
    if (c == ' ' || c == '\t') {
      ++i;
      continue;
    }
    if (c == '#') break;
    Token tok;
    tok.column = i + 1;
    if (c == '"') {
      tok.quoted = true;
      ++i;
      bool closed = false;
      while (i < raw.size()) {
        char d = raw[i++];
        if (d == '"') {
          closed = true;
          break;
        }
        if (d != '\\') {
          tok.text += d;
          continue;
        }
        if (i >= raw.size()) break;
        switch (raw[i++]) {
          case '"':
            tok.text += '"';
            break;
          case '\\':
            tok.text += '\\';
            break;
          case 'n':
            tok.text += '\n';
            break;
          case 't':
            tok.text += '\t';
            break;
          default:
            throw ParseError(number, i - 1, "unknown escape sequence");
        }
      }
      if (!closed) throw ParseError(number, tok.column, "unterminated quoted string");
      if (i < raw.size() && raw[i] != ' ' && raw[i] != '\t') {
        throw ParseError(number, i + 1, "expected whitespace after quoted string");
      }
    } else {
      while (i < raw.size() && raw[i] != ' ' && raw[i] != '\t') {
        if (!is_bare_char(raw[i])) {
          throw ParseError(number, i + 1, std::string("unexpected character '") + raw[i] + "'");
        }
        tok.text += raw[i++];
      }
    }
    line.tokens.push_back(std::move(tok));
  }
  return line;
}

[[noreturn]] void fail(const Line& line, std::size_t token, const std::string& message) {
  std::size_t col = token < line.tokens.size() ? line.tokens[token].column
                                               : (line.tokens.empty() ? 1 : line.tokens.back().column);
  throw ParseError(line.number, col, message);
}

void expect_arity(const Line& line, std::size_t n, const char* what) {
  if (line.tokens.size() < n) fail(line, line.tokens.size(), std::string("missing fields in ") + what);
  if (line.tokens.size() > n) fail(line, n, std::string("unexpected trailing field in ") + what);
}

const std::string& nonempty(const Line& line, std::size_t i, const char* what) {
  if (line.tokens[i].text.empty()) fail(line, i, std::string(what) + " must not be empty");
  return line.tokens[i].text;
}

template <class T>
T parse_number(const Line& line, std::size_t i) {
  const std::string& s = line.tokens[i].text;
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || line.tokens[i].quoted) {
    fail(line, i, "malformed number '" + s + "'");
  }
  return value;
}

PropertyValue parse_value(const Line& line, std::size_t type_at) {
  const std::string& type = line.tokens[type_at].text;
  const std::size_t at = type_at + 1;
  if (type == "bool") {
    const std::string& v = line.tokens[at].text;
    if (v == "true") return true;
    if (v == "false") return false;
    fail(line, at, "bool value must be true or false");
  }
  if (type == "int") return parse_number<std::int64_t>(line, at);
  if (type == "real") {
    double d = parse_number<double>(line, at);
    if (std::isnan(d)) fail(line, at, "real value must not be NaN");
    return d;
  }
  if (type == "text") {
    if (!line.tokens[at].quoted) fail(line, at, "text value must be quoted");
    return line.tokens[at].text;
  }
  if (type == "ref") return NodeRef{NodeId(nonempty(line, at, "node reference"))};
  if (type == "asset") return AssetRef{AssetId(nonempty(line, at, "asset reference"))};
  fail(line, type_at, "unknown property type '" + type + "'");
}

struct PendingRef {
  std::size_t line;
  std::size_t column;
  NodeId owner;
  std::string key;
};

class LevelParser {
 public:
  LevelDocument run(std::string_view text) {
    std::size_t number = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      std::string_view raw = text.substr(start, end - start);
      if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
      ++number;
      Line line = tokenize(raw, number);
      if (!line.tokens.empty()) handle(line);
      if (end == text.size()) break;
      start = end + 1;
    }
    return finish(number);
  }

 private:
  void handle(const Line& line) {
    const std::string& head = line.tokens[0].text;
    if (!have_header_) {
      if (head != "lvl" || line.indented) fail(line, 0, "expected header 'lvl <version>'");
      expect_arity(line, 2, "header");
      doc_.format_version = parse_number<int>(line, 1);
      if (doc_.format_version != kLevelFormatVersion) {
        fail(line, 1, "unsupported format version " + std::to_string(doc_.format_version));
      }
      have_header_ = true;
      return;
    }
    if (line.indented) {
      property(line);
      return;
    }
    current_.reset();
    if (head == "root") {
      expect_arity(line, 2, "root line");
      if (root_line_ != 0) {
        fail(line, 0, "root declared twice (first on line " + std::to_string(root_line_) + ")");
      }
      doc_.graph.set_root(NodeId(nonempty(line, 1, "root id")));
      root_line_ = line.number;
    } else if (head == "node") {
      expect_arity(line, 3, "node line");
      NodeId id(nonempty(line, 1, "node id"));
      auto [it, fresh] = node_lines_.emplace(id, line.number);
      if (!fresh) {
        fail(line, 1, "duplicate node id '" + id.str() + "' (lines " + std::to_string(it->second) +
                          " and " + std::to_string(line.number) + ")");
      }
      doc_.graph.put_node(Node{id, nonempty(line, 2, "node kind"), {}});
      current_ = id;
    } else if (head == "edge") {
      expect_arity(line, 4, "edge line");
      NodeId parent(nonempty(line, 1, "edge parent"));
      NodeId child(nonempty(line, 2, "edge child"));
      Dependency dep;
      if (line.tokens[3].text == "direct") {
        dep = Dependency::Direct;
      } else if (line.tokens[3].text == "indirect") {
        dep = Dependency::Indirect;
      } else {
        fail(line, 3, "edge dependency must be direct or indirect");
      }
      if (parent == child) fail(line, 1, "self-loop on '" + parent.str() + "'");
      if (doc_.graph.has_edge(parent, child)) {
        fail(line, 1, "duplicate edge " + parent.str() + " -> " + child.str());
      }
      doc_.graph.put_edge(parent, child, dep);
      edge_lines_.emplace(std::pair(parent, child), std::pair(line.number, line.tokens[1].column));
    } else if (head == "asset") {
      expect_arity(line, 4, "asset line");
      AssetId id(nonempty(line, 1, "asset id"));
      if (doc_.graph.assets().contains(id)) fail(line, 1, "duplicate asset id '" + id.str() + "'");
      doc_.graph.assets().emplace(id, AssetEntry{nonempty(line, 2, "asset type"), nonempty(line, 3, "digest")});
    } else {
      fail(line, 0, "unknown directive '" + head + "'");
    }
  }

  void property(const Line& line) {
    if (!current_) fail(line, 0, "property line outside a node");
    expect_arity(line, 3, "property line");
    const std::string& key = nonempty(line, 0, "property key");
    auto& props = doc_.graph.node(*current_).properties;
    if (props.contains(key)) fail(line, 0, "duplicate property '" + key + "'");
    PropertyValue value = parse_value(line, 1);
    if (value.is_node_ref() || value.is_asset_ref()) {
      refs_.push_back({line.number, line.tokens[2].column, *current_, key});
    }
    props.emplace(key, std::move(value));
  }

  LevelDocument finish(std::size_t last_line) {
    if (!have_header_) throw ParseError(1, 1, "empty document: expected header 'lvl <version>'");
    if (root_line_ == 0) throw ParseError(last_line, 1, "missing root declaration");
    if (!doc_.graph.has_node(doc_.graph.root())) {
      throw ParseError(root_line_, 6, "root '" + doc_.graph.root().str() + "' is not declared as a node");
    }
    ParentIndex parents(doc_.graph);
    for (const auto& [key, at] : edge_lines_) {
      for (const NodeId* end : {&key.first, &key.second}) {
        if (!doc_.graph.has_node(*end)) {
          throw ParseError(at.first, at.second, "edge endpoint '" + end->str() + "' is not a node");
        }
      }
      if (key.second == doc_.graph.root()) {
        throw ParseError(at.first, at.second, "root '" + key.second.str() + "' cannot have a parent");
      }
      if (doc_.graph.edge(key.first, key.second) == Dependency::Direct &&
          parents.direct_parent(key.second) != key.first) {
        throw ParseError(at.first, at.second, "node '" + key.second.str() + "' has more than one direct parent");
      }
    }
    for (const auto& r : refs_) {
      const PropertyValue& v = doc_.graph.node(r.owner).properties.at(r.key);
      if (v.is_node_ref() && !doc_.graph.has_node(v.as_node_ref())) {
        throw ParseError(r.line, r.column, "reference to unknown node '" + v.as_node_ref().str() + "'");
      }
      if (v.is_asset_ref() && !doc_.graph.assets().contains(v.as_asset_ref())) {
        throw ParseError(r.line, r.column, "reference to unknown asset '" + v.as_asset_ref().str() + "'");
      }
    }
    return std::move(doc_);
  }

  LevelDocument doc_;
  bool have_header_ = false;
  std::size_t root_line_ = 0;
  std::optional<NodeId> current_;
  std::map<NodeId, std::size_t> node_lines_;
  std::map<std::pair<NodeId, NodeId>, std::pair<std::size_t, std::size_t>> edge_lines_;
  std::vector<PendingRef> refs_;
};

}  // namespace

LevelDocument parse_level(std::string_view text) { return LevelParser().run(text); }

std::string format_real(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::string quote_token(std::string_view token) {
  bool bare = !token.empty();
  for (char c : token) bare = bare && is_bare_char(c);
  if (bare) return std::string(token);
  std::string out = "\"";
  for (char c : token) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        out += c;
    }
  }
  out += '"';
  return out;
}

std::string format_value(const PropertyValue& value) {
  std::string out(value.type_name());
  out += ' ';
  if (value.is_bool()) {
    out += value.as_bool() ? "true" : "false";
  } else if (value.is_int()) {
    out += std::to_string(value.as_int());
  } else if (value.is_real()) {
    out += format_real(value.as_real());
  } else if (value.is_text()) {
    std::string q = quote_token(value.as_text());
    // Text is always quoted so that it is never mistaken for a number.
    out += q.front() == '"' ? q : "\"" + q + "\"";
  } else if (value.is_node_ref()) {
    out += quote_token(value.as_node_ref().str());
  } else {
    out += quote_token(value.as_asset_ref().str());
  }
  return out;
}

std::string serialize_level(const LevelGraph& graph) {
  std::string out = "lvl " + std::to_string(kLevelFormatVersion) + "\n";
  out += "root " + quote_token(graph.root().str()) + "\n";
  for (const auto& [id, node] : graph.nodes()) {
    out += "node " + quote_token(id.str()) + " " + quote_token(node.kind) + "\n";
    for (const auto& [key, value] : node.properties) {
      out += "  " + quote_token(key) + " " + format_value(value) + "\n";
    }
  }
  for (const auto& [key, dep] : graph.edges()) {
    out += "edge " + quote_token(key.first.str()) + " " + quote_token(key.second.str()) + " " +
           std::string(to_string(dep)) + "\n";
  }
  for (const auto& [id, entry] : graph.assets()) {
    out += "asset " + quote_token(id.str()) + " " + quote_token(entry.type_tag) + " " +
           quote_token(entry.digest) + "\n";
  }
  return out;
}

namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

LevelGraph load_level(const std::filesystem::path& path) {
  std::string text = slurp(path);
  try {
    return parse_level(text).graph;
  } catch (const ParseError& e) {
    throw ParseError(e.line(), e.column(), path.string() + ": " + e.detail());
  }
}

void save_level(const std::filesystem::path& path, const LevelGraph& graph) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  const std::string text = serialize_level(graph);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

// ---------------------------------------------------------------------------
// Report

namespace {

class ReportWriter {
 public:
  void field(const std::string& key, const std::string& value) { out_ += key + " " + value + "\n"; }
  void field(const std::string& key, std::size_t value) { field(key, std::to_string(value)); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

std::string optional_value(const std::optional<PropertyValue>& v) {
  return v ? format_value(*v) : "absent";
}

std::string optional_node(const std::optional<NodeId>& n) { return n ? quote_token(n->str()) : "-"; }

std::string optional_entry(const std::optional<AssetEntry>& e) {
  return e ? quote_token(e->type_tag) + " " + quote_token(e->digest) : "absent";
}

void write_conflict(ReportWriter& w, const std::string& p, const Conflict& c) {
  w.field(p + "kind", std::string(c.kind_name()));
  w.field(p + "resolution", std::string(to_string(c.resolution)));
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, PropertyConflict>) {
          w.field(p + "node", quote_token(d.node.str()));
          w.field(p + "key", quote_token(d.key));
          w.field(p + "value_a", optional_value(d.value_a));
          w.field(p + "value_b", optional_value(d.value_b));
          w.field(p + "ancestor", optional_value(d.ancestor));
        } else if constexpr (std::is_same_v<T, DeleteModifyConflict>) {
          w.field(p + "deleting_branch", std::string(to_string(d.deleting_branch)));
          w.field(p + "node", quote_token(d.deleted_node.str()));
          std::string mods;
          for (const auto& m : d.modified_nodes) mods += (mods.empty() ? "" : " ") + quote_token(m.str());
          w.field(p + "modified", mods);
        } else if constexpr (std::is_same_v<T, ReparentConflict>) {
          w.field(p + "node", quote_token(d.node.str()));
          w.field(p + "parent_a", optional_node(d.parent_a));
          w.field(p + "parent_b", optional_node(d.parent_b));
        } else if constexpr (std::is_same_v<T, AddAddConflict>) {
          w.field(p + "node", quote_token(d.node.str()));
          w.field(p + "key", quote_token(d.key));
          w.field(p + "value_a", format_value(d.value_a));
          w.field(p + "value_b", format_value(d.value_b));
        } else {
          w.field(p + "asset", quote_token(d.asset.str()));
          w.field(p + "entry_a", optional_entry(d.entry_a));
          w.field(p + "entry_b", optional_entry(d.entry_b));
          w.field(p + "ancestor", optional_entry(d.ancestor));
        }
      },
      c.detail);
}

void write_dropped(ReportWriter& w, const std::string& p, const DroppedEdit& d) {
  w.field(p + "branch", std::string(to_string(d.branch)));
  w.field(p + "edit", std::string(to_string(d.edit)));
  w.field(p + "subject", quote_token(d.subject));
  if (d.key) w.field(p + "key", quote_token(*d.key));
  if (d.value) w.field(p + "value", format_value(*d.value));
  if (d.parent) w.field(p + "parent", quote_token(d.parent->str()));
  if (d.dependency) w.field(p + "dependency", std::string(to_string(*d.dependency)));
  if (d.edit == EditKind::AssetChange) w.field(p + "asset", optional_entry(d.asset));
  w.field(p + "reason", quote_token(d.reason));
}

}  // namespace

std::string serialize_report(const MergeOutcome& outcome, const ReportContext& context) {
  ReportWriter w;
  w.field("lvlreport", std::to_string(kReportFormatVersion));
  w.field("summary.policy", std::string(to_string(context.policy)));
  if (!context.user_name.empty()) w.field("summary.user.name", quote_token(context.user_name));
  if (!context.user_color.empty()) w.field("summary.user.color", quote_token(context.user_color));
  const auto& s = outcome.stats;
  w.field("summary.ancestor_nodes", s.ancestor_nodes);
  w.field("summary.ancestor_edges", s.ancestor_edges);
  w.field("summary.diff_a_nodes", s.diff_a_nodes);
  w.field("summary.diff_b_nodes", s.diff_b_nodes);
  w.field("summary.merged_nodes", s.merged_nodes);
  w.field("summary.merged_edges", s.merged_edges);
  w.field("summary.wall_time_seconds", format_real(s.wall_time_seconds));
  std::size_t unresolved = 0;
  for (const auto& c : outcome.conflicts) unresolved += c.resolution == Resolution::Unresolved;
  w.field("summary.conflicts", outcome.conflicts.size());
  w.field("summary.unresolved", unresolved);
  w.field("summary.dropped", outcome.dropped.size());
  w.field("summary.removed_edges", outcome.removed_cycle_edges.size());
  for (std::size_t i = 0; i < outcome.conflicts.size(); ++i) {
    write_conflict(w, "conflict." + std::to_string(i) + ".", outcome.conflicts[i]);
  }
  for (std::size_t i = 0; i < outcome.dropped.size(); ++i) {
    write_dropped(w, "dropped." + std::to_string(i) + ".", outcome.dropped[i]);
  }
  for (std::size_t i = 0; i < outcome.removed_cycle_edges.size(); ++i) {
    const Edge& e = outcome.removed_cycle_edges[i];
    w.field("removed_edge." + std::to_string(i),
            quote_token(e.parent.str()) + " " + quote_token(e.child.str()) + " " +
                std::string(to_string(e.dependency)));
  }
  return w.take();
}

MergeReport parse_report(std::string_view text) {
  MergeReport report;
  std::size_t number = 0;
  bool header = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  auto entry = [](std::vector<std::map<std::string, std::string>>& list, std::size_t index) -> auto& {
    if (list.size() <= index) list.resize(index + 1);
    return list[index];
  };
  while (std::getline(in, raw)) {
    ++number;
    Line line = tokenize(raw, number);
    if (line.tokens.empty()) continue;
    const std::string& key = line.tokens[0].text;
    const std::size_t cut = line.tokens.size() > 1 ? line.tokens[1].column - 1 : raw.size();
    std::string value = raw.substr(cut);
    if (!header) {
      if (key != "lvlreport" || value != std::to_string(kReportFormatVersion)) {
        fail(line, 0, "expected header 'lvlreport 1'");
      }
      header = true;
      continue;
    }
    auto parts_of = [&](std::string_view prefix) -> std::optional<std::pair<std::size_t, std::string>> {
      if (key.rfind(prefix, 0) != 0) return std::nullopt;
      std::string rest = key.substr(prefix.size());
      auto dot = rest.find('.');
      std::size_t index = 0;
      auto digits = rest.substr(0, dot);
      auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
      if (ec != std::errc() || ptr != digits.data() + digits.size()) fail(line, 0, "bad entry index");
      return std::pair(index, dot == std::string::npos ? std::string() : rest.substr(dot + 1));
    };
    if (key.rfind("summary.", 0) == 0) {
      report.summary[key.substr(8)] = value;
    } else if (auto c = parts_of("conflict.")) {
      entry(report.conflicts, c->first)[c->second] = value;
    } else if (auto d = parts_of("dropped.")) {
      entry(report.dropped, d->first)[d->second] = value;
    } else if (auto r = parts_of("removed_edge.")) {
      if (line.tokens.size() != 4) fail(line, 1, "removed edge needs parent, child and kind");
      Edge e{NodeId(line.tokens[1].text), NodeId(line.tokens[2].text),
             line.tokens[3].text == "direct" ? Dependency::Direct : Dependency::Indirect};
      if (report.removed_edges.size() <= r->first) report.removed_edges.resize(r->first + 1);
      report.removed_edges[r->first] = e;
    } else {
      fail(line, 0, "unknown report key '" + key + "'");
    }
  }
  if (!header) throw ParseError(1, 1, "empty report");
  return report;
}

}  // namespace scenemerge
