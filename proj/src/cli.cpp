#include "scenemerge/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "scenemerge/assets.hpp"
#include "scenemerge/diff.hpp"
#include "scenemerge/format.hpp"
#include "scenemerge/merge.hpp"
#include "scenemerge/sim.hpp"

namespace scenemerge {

namespace fs = std::filesystem;

namespace {

std::string trim(std::string s) {
  auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && issp(static_cast<unsigned char>(s.back()))) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && issp(static_cast<unsigned char>(s[i]))) ++i;
  return s.substr(i);
}

bool parse_switch(const std::string& v, const std::string& where) {
  if (v == "on" || v == "true" || v == "yes") return true;
  if (v == "off" || v == "false" || v == "no") return false;
  throw ConfigError(where + "expected on or off, got '" + v + "'");
}

}  // namespace

CliConfig parse_config(const std::string& text, const fs::path& origin) {
  CliConfig cfg;
  if (!origin.empty()) cfg.source = origin;
  std::istringstream in(text);
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const std::string where = (origin.empty() ? std::string("config") : origin.string()) + ":" +
                              std::to_string(number) + ": ";
    std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key == "policy") {
      auto p = parse_policy(value);
      if (!p) throw ConfigError(where + "unknown policy '" + value + "'");
      cfg.policy.resolution = *p;
    } else if (key == "averaging") {
      cfg.policy.numeric_averaging = parse_switch(value, where);
    } else if (key == "averageable") {
      std::istringstream kinds(value);
      std::string kind;
      while (std::getline(kinds, kind, ',')) {
        kind = trim(kind);
        if (!kind.empty()) cfg.policy.averageable_kinds.insert(kind);
      }
    } else if (key.rfind("strategy.", 0) == 0 && key.size() > 9) {
      cfg.strategies[key.substr(9)] = value;
    } else if (key.rfind("validator.", 0) == 0 && key.size() > 10) {
      cfg.validators[key.substr(10)] = value;
    } else if (key == "asset_store") {
      fs::path p(value);
      cfg.asset_store = p.is_absolute() || origin.empty() ? p : origin.parent_path() / p;
    } else if (key == "user.name") {
      cfg.user_name = value;
    } else if (key == "user.color") {
      cfg.user_color = value;
    } else {
      throw ConfigError(where + "unknown key '" + key + "'");
    }
  }
  return cfg;
}

CliConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), fs::absolute(path));
}

std::optional<fs::path> locate_config(const std::optional<fs::path>& explicit_path, const fs::path& start) {
  if (explicit_path) return explicit_path;
  if (const char* env = std::getenv(kConfigEnvVar); env != nullptr && *env != '\0') return fs::path(env);
  std::error_code ec;
  for (fs::path dir = fs::absolute(start, ec); !dir.empty(); dir = dir.parent_path()) {
    fs::path candidate = dir / kConfigFileName;
    if (fs::is_regular_file(candidate, ec)) return candidate;
    if (dir == dir.parent_path()) break;
  }
  return std::nullopt;
}

namespace {

struct CommonOptions {
  std::optional<std::string> config_path;
  std::optional<std::string> policy;
  bool averaging = false;
};

CliConfig resolve_config(const CommonOptions& opts) {
  std::optional<fs::path> explicit_path;
  if (opts.config_path) explicit_path = fs::path(*opts.config_path);
  CliConfig cfg;
  if (auto path = locate_config(explicit_path, fs::current_path())) cfg = load_config(*path);
  if (opts.policy) {
    auto p = parse_policy(*opts.policy);
    if (!p) throw ConfigError("unknown policy '" + *opts.policy + "'");
    cfg.policy.resolution = *p;
  }
  if (opts.averaging) cfg.policy.numeric_averaging = true;
  return cfg;
}

/// Asset handling (store plus per-tag commands) built from config.
class AssetSetup {
 public:
  explicit AssetSetup(const CliConfig& cfg) {
    if (!cfg.asset_store) {
      if (!cfg.strategies.empty() || !cfg.validators.empty()) {
        throw ConfigError("strategy and validator settings need an asset_store");
      }
      return;
    }
    store_ = std::make_unique<DirectoryBlobStore>(*cfg.asset_store);
    for (const auto& [tag, cmd] : cfg.strategies) {
      registry_.add(tag, std::make_shared<ExternalCommandStrategy>(cmd));
    }
    context_.store = store_.get();
    context_.registry = &registry_;
    context_.validators = cfg.validators;
  }
  const AssetContext* context() const { return store_ ? &context_ : nullptr; }

 private:
  std::unique_ptr<DirectoryBlobStore> store_;
  StrategyRegistry registry_;
  AssetContext context_;
};

struct Inputs {
  LevelGraph ancestor, mine, theirs;
};

Inputs load_three(const std::string& o, const std::string& a, const std::string& b) {
  return {load_level(o), load_level(a), load_level(b)};
}

std::string node_list(const std::vector<NodeId>& ids) {
  std::string out;
  for (const auto& id : ids) out += (out.empty() ? "" : " ") + id.str();
  return out;
}

void print_conflicts(std::ostream& os, const MergeOutcome& outcome) {
  for (const auto& c : outcome.conflicts) {
    os << "conflict " << c.kind_name() << " ";
    std::visit(
        [&](const auto& d) {
          using T = std::decay_t<decltype(d)>;
          if constexpr (std::is_same_v<T, DeleteModifyConflict>) {
            os << d.deleted_node.str() << " deleted by " << to_string(d.deleting_branch) << ", edited: "
               << node_list(d.modified_nodes);
          } else if constexpr (std::is_same_v<T, AssetConflict>) {
            os << d.asset.str();
          } else if constexpr (std::is_same_v<T, ReparentConflict>) {
            os << d.node.str();
          } else {
            os << d.node.str() << " " << d.key;
          }
        },
        c.detail);
    os << " (" << to_string(c.resolution) << ")\n";
  }
  for (const auto& d : outcome.dropped) {
    os << "dropped " << to_string(d.branch) << " " << to_string(d.edit) << " " << d.subject;
    if (d.key) os << " " << *d.key;
    os << ": " << d.reason << "\n";
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

ReportContext report_context(const CliConfig& cfg) {
  return {cfg.policy.resolution, cfg.user_name, cfg.user_color};
}

int cmd_validate(const std::string& path, std::ostream& out) {
  auto report = validate(load_level(path));
  if (report.ok()) {
    out << "ok\n";
    return 0;
  }
  for (const auto& v : report.violations) out << to_string(v.kind) << ": " << v.message << "\n";
  return 1;
}

int cmd_diff(const std::string& anc_path, const std::string& ver_path, std::ostream& out) {
  LevelGraph anc = load_level(anc_path);
  LevelGraph ver = load_level(ver_path);
  DiffResult d = classify(anc, ver);
  DiffStats s = diff_stats(d);
  out << s.added << " added, " << s.deleted << " deleted, "
      << s.modified_intrinsic + s.modified_propagated << " modified\n";
  out << "total edited nodes: " << s.total_edited << "\n";
  for (const auto& [id, cls] : d.classes) {
    const NodeDelta* delta = d.delta(id);
    switch (cls) {
      case ChangeClass::Unchanged:
        break;
      case ChangeClass::Deleted:
        out << "delete " << id.str() << "\n";
        break;
      case ChangeClass::Added:
        out << "add " << id.str() << " " << delta->kind;
        if (delta->reparent && delta->reparent->new_parent) out << " under " << delta->reparent->new_parent->str();
        out << "\n";
        break;
      case ChangeClass::Modified:
        if (!delta->intrinsic) {
          out << "propagate " << id.str() << "\n";
          break;
        }
        for (const auto& [k, v] : delta->property_sets) out << "set " << id.str() << " " << k << " " << format_value(v) << "\n";
        for (const auto& k : delta->property_removals) out << "unset " << id.str() << " " << k << "\n";
        if (delta->reparent) {
          out << "reparent " << id.str() << " "
              << (delta->reparent->new_parent ? delta->reparent->new_parent->str() : "-") << "\n";
        }
        for (const auto& p : delta->indirect_added) out << "link " << p.str() << " " << id.str() << "\n";
        for (const auto& p : delta->indirect_removed) out << "unlink " << p.str() << " " << id.str() << "\n";
        break;
    }
  }
  return s.total_edited == 0 ? 0 : 1;
}

struct MergeArgs {
  std::string ancestor, mine, theirs;
  std::optional<std::string> output, report;
};

int cmd_merge(const MergeArgs& args, const CommonOptions& common, std::ostream& out, std::ostream& err) {
  CliConfig cfg = resolve_config(common);
  AssetSetup assets(cfg);
  Inputs in = load_three(args.ancestor, args.mine, args.theirs);
  MergeOutcome outcome = merge3(in.ancestor, in.mine, in.theirs, cfg.policy, assets.context());
  const std::string doc = serialize_level(outcome.merged);
  if (args.output) {
    write_text(*args.output, doc);
  } else {
    out << doc;
  }
  if (args.report) write_text(*args.report, serialize_report(outcome, report_context(cfg)));
  print_conflicts(err, outcome);
  return outcome.has_unresolved() ? 1 : 0;
}

int cmd_merge_driver(const std::string& o, const std::string& a, const std::string& b,
                     const std::optional<std::string>& pathname, const CommonOptions& common,
                     std::ostream& err) {
  CliConfig cfg = resolve_config(common);
  AssetSetup assets(cfg);
  Inputs in = load_three(o, a, b);
  MergeOutcome outcome = merge3(in.ancestor, in.mine, in.theirs, cfg.policy, assets.context());
  // Write to a sibling first so that the current file is never half-written.
  fs::path target(a);
  fs::path staging = target;
  staging += ".scenemerge-tmp";
  write_text(staging, serialize_level(outcome.merged));
  fs::rename(staging, target);
  fs::path report_path = pathname ? fs::path(*pathname) : target;
  report_path += ".lvlreport";
  if (!outcome.conflicts.empty() || !outcome.dropped.empty()) {
    write_text(report_path, serialize_report(outcome, report_context(cfg)));
    err << "scenemerge: report written to " << report_path.string() << "\n";
  }
  print_conflicts(err, outcome);
  return outcome.has_unresolved() ? 1 : 0;
}

int cmd_stats(const std::string& o, const std::string& a, const std::string& b, const CommonOptions& common,
              std::ostream& out) {
  CliConfig cfg = resolve_config(common);
  AssetSetup assets(cfg);
  Inputs in = load_three(o, a, b);
  MergeOutcome outcome = merge3(in.ancestor, in.mine, in.theirs, cfg.policy, assets.context());
  const auto& s = outcome.stats;
  char time[32];
  std::snprintf(time, sizeof time, "%.3f", s.wall_time_seconds);
  out << s.ancestor_nodes << " " << s.ancestor_edges << " " << s.diff_a_nodes << " " << s.diff_b_nodes << " "
      << s.merged_nodes << " " << s.merged_edges << " " << time << "\n";
  return 0;
}

struct SimulateArgs {
  std::uint64_t seed = 1;
  std::size_t count = 100;
  std::string size = "custom";
  std::size_t nodes = 20;
  std::size_t edges = 24;
  std::size_t ops = 4;
  std::optional<std::string> results;
};

int cmd_simulate(const SimulateArgs& args, const CommonOptions& common, std::ostream& out) {
  std::optional<ResolutionPolicy> policy;
  if (common.policy) {
    policy = parse_policy(*common.policy);
    if (!policy) throw ConfigError("unknown policy '" + *common.policy + "'");
  }
  const sim::ScaleTarget* target = nullptr;
  if (args.size != "custom") target = &sim::scale_preset(args.size);

  nlohmann::json rows = nlohmann::json::array();
  std::size_t passed = 0;
  for (std::size_t i = 0; i < args.count; ++i) {
    const std::uint64_t seed = args.seed + i;
    sim::Scenario sc;
    if (target != nullptr) {
      sc = sim::generate_scale(seed, *target);
    } else {
      sim::SizeParams params;
      params.nodes = args.nodes;
      params.edges = args.edges;
      params.ops_a = params.ops_b = args.ops;
      sc = sim::generate(seed, params);
    }
    if (policy) sc.policy.resolution = *policy;
    if (common.averaging) sc.policy.numeric_averaging = true;
    sim::Verdict verdict = sim::check_scenario(sc);

    nlohmann::json row = {{"seed", seed},
                          {"policy", std::string(to_string(sc.policy.resolution))},
                          {"conflicts", verdict.conflicts}};
    if (verdict.pass()) {
      LevelGraph a = sim::apply_script(sc.base, sc.script_a);
      LevelGraph b = sim::apply_script(sc.base, sc.script_b);
      MergeOutcome o = merge3(sc.base, a, b, sc.policy);
      const auto& s = o.stats;
      row["stats"] = {{"ancestor_nodes", s.ancestor_nodes}, {"ancestor_edges", s.ancestor_edges},
                      {"diff_a_nodes", s.diff_a_nodes},     {"diff_b_nodes", s.diff_b_nodes},
                      {"merged_nodes", s.merged_nodes},     {"merged_edges", s.merged_edges},
                      {"wall_time_seconds", s.wall_time_seconds}};
      if (target != nullptr) {
        auto within = [](std::size_t got, std::size_t want) {
          return std::abs(static_cast<double>(got) - static_cast<double>(want)) <= 0.1 * static_cast<double>(want);
        };
        if (!within(s.merged_nodes, target->merged_nodes) || !within(s.merged_edges, target->merged_edges)) {
          verdict.violations.push_back("merged size outside 10% of the preset target");
        }
      }
    }
    row["pass"] = verdict.pass();
    row["violations"] = verdict.violations;
    if (verdict.pass()) {
      ++passed;
    } else {
      out << "seed " << seed << " FAILED\n";
      for (const auto& v : verdict.violations) out << "  " << v << "\n";
    }
    rows.push_back(std::move(row));
  }
  out << passed << " passed, " << args.count - passed << " failed\n";
  if (args.results) {
    nlohmann::json doc = {{"size", args.size},   {"seed", args.seed},
                          {"count", args.count}, {"passed", passed},
                          {"failed", args.count - passed}, {"scenarios", rows}};
    write_text(*args.results, doc.dump(2) + "\n");
  }
  return passed == args.count ? 0 : 1;
}

void add_common(CLI::App* cmd, CommonOptions& common, bool with_config = true) {
  if (with_config) cmd->add_option("--config", common.config_path, "Config file (overrides lookup)");
  cmd->add_option("--policy", common.policy, "manual, prefer-a or prefer-b");
  cmd->add_flag("--averaging", common.averaging, "Average concurrent edits of averageable kinds");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"3-way diff and merge for level documents", "scenemerge"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "scenemerge 1.0");

  CommonOptions common;
  std::string path1, path2, path3;
  std::optional<std::string> path4;
  MergeArgs margs;
  SimulateArgs sargs;
  std::function<int()> action;

  auto* validate_cmd = app.add_subcommand("validate", "Check a level against the graph invariants");
  validate_cmd->add_option("level", path1)->required();
  validate_cmd->callback([&] { action = [&] { return cmd_validate(path1, out); }; });

  auto* diff_cmd = app.add_subcommand("diff", "Classify the changes of a version against its ancestor");
  diff_cmd->add_option("ancestor", path1)->required();
  diff_cmd->add_option("version", path2)->required();
  diff_cmd->callback([&] { action = [&] { return cmd_diff(path1, path2, out); }; });

  auto* merge_cmd = app.add_subcommand("merge", "3-way merge of two versions");
  merge_cmd->add_option("ancestor", margs.ancestor)->required();
  merge_cmd->add_option("mine", margs.mine)->required();
  merge_cmd->add_option("theirs", margs.theirs)->required();
  merge_cmd->add_option("-o,--output", margs.output, "Merged document (default: stdout)");
  merge_cmd->add_option("-r,--report", margs.report, "Where to write the .lvlreport");
  add_common(merge_cmd, common);
  merge_cmd->callback([&] { action = [&] { return cmd_merge(margs, common, out, err); }; });

  auto* driver_cmd = app.add_subcommand("merge-driver", "Merge driver entry point: %O %A %B [%P]");
  driver_cmd->add_option("ancestor", path1)->required();
  driver_cmd->add_option("current", path2)->required();
  driver_cmd->add_option("other", path3)->required();
  driver_cmd->add_option("pathname", path4);
  add_common(driver_cmd, common);
  driver_cmd->callback([&] {
    action = [&] { return cmd_merge_driver(path1, path2, path3, path4, common, err); };
  });

  auto* stats_cmd = app.add_subcommand("stats", "Print merge statistics as one row");
  stats_cmd->add_option("ancestor", path1)->required();
  stats_cmd->add_option("mine", path2)->required();
  stats_cmd->add_option("theirs", path3)->required();
  add_common(stats_cmd, common);
  stats_cmd->callback([&] { action = [&] { return cmd_stats(path1, path2, path3, common, out); }; });

  auto* sim_cmd = app.add_subcommand("simulate", "Run seeded random merge scenarios and check invariants");
  sim_cmd->add_option("--seed", sargs.seed, "First seed");
  sim_cmd->add_option("--count", sargs.count, "Number of scenarios");
  sim_cmd->add_option("--size", sargs.size, "room, planets, lab, vikings or custom")
      ->check(CLI::IsMember({"room", "planets", "lab", "vikings", "custom"}));
  sim_cmd->add_option("--nodes", sargs.nodes, "custom size: nodes");
  sim_cmd->add_option("--edges", sargs.edges, "custom size: edges");
  sim_cmd->add_option("--ops", sargs.ops, "custom size: ops per branch");
  sim_cmd->add_option("--results", sargs.results, "JSON results file");
  add_common(sim_cmd, common, false);
  sim_cmd->callback([&] { action = [&] { return cmd_simulate(sargs, common, out); }; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  try {
    return action();
  } catch (const std::exception& e) {
    err << "scenemerge: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace scenemerge
