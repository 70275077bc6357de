#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "scenemerge/cli.hpp"
#include "scenemerge/format.hpp"
#include "scenemerge/sim.hpp"
#include "test_util.hpp"

using namespace scenemerge;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fx(const char* name) { return testutil::fixture(name).string(); }

class CliTest : public ::testing::Test {
 protected:
  fs::path dir;

  void SetUp() override {
    ::unsetenv(kConfigEnvVar);
    dir = fs::temp_directory_path() /
          (std::string("sm_cli_") + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override {
    ::unsetenv(kConfigEnvVar);
    fs::remove_all(dir);
  }

  std::string write(const std::string& name, const std::string& text) {
    auto p = dir / name;
    std::ofstream(p) << text;
    return p.string();
  }
  std::string copy(const char* fixture, const std::string& name) {
    auto p = dir / name;
    fs::copy_file(testutil::fixture(fixture), p);
    return p.string();
  }
};

}  // namespace

TEST_F(CliTest, Validate) {
  EXPECT_EQ(cli({"validate", fx("crates.lvl")}).out, "ok\n");
  auto bad = cli({"validate", fx("cyclic.lvl")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.out.find("cycle: cycle through a b"), std::string::npos);
  EXPECT_EQ(cli({"validate", write("broken.lvl", "lvl 1\nroot\n")}).code, 2);
  EXPECT_EQ(cli({"validate"}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
}

TEST_F(CliTest, DiffIdentityAndChanges) {
  auto same = cli({"diff", fx("bedroom_ancestor.lvl"), fx("bedroom_ancestor.lvl")});
  EXPECT_EQ(same.code, 0);
  EXPECT_EQ(same.out, "0 added, 0 deleted, 0 modified\ntotal edited nodes: 0\n");

  auto d = cli({"diff", fx("bedroom_ancestor.lvl"), fx("bedroom_b.lvl")});
  EXPECT_EQ(d.code, 1);
  EXPECT_NE(d.out.find("reparent bunny dollhouse"), std::string::npos) << d.out;
  EXPECT_NE(d.out.find("delete drawers\n"), std::string::npos) << d.out;
  EXPECT_NE(d.out.find("add dollhouse"), std::string::npos) << d.out;
}

TEST_F(CliTest, MergeWritesOutputAndReport) {
  auto outp = (dir / "merged.lvl").string();
  auto r = cli({"merge", fx("bedroom_ancestor.lvl"), fx("bedroom_a.lvl"), fx("bedroom_b.lvl"), "-o", outp});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(load_level(outp), testutil::load_fixture("bedroom_expected.lvl"));

  auto rep = (dir / "m.lvlreport").string();
  auto c = cli({"merge", fx("space_ancestor.lvl"), fx("space_a.lvl"), fx("space_b.lvl"), "-r", rep});
  EXPECT_EQ(c.code, 1);
  EXPECT_EQ(parse_report(std::ifstream(rep) ? [&] {
              std::stringstream ss;
              ss << std::ifstream(rep).rdbuf();
              return ss.str();
            }()
                                            : std::string())
                .summary.at("unresolved"),
            "1");

  auto p = cli({"merge", fx("space_ancestor.lvl"), fx("space_a.lvl"), fx("space_b.lvl"), "--policy", "prefer-b"});
  EXPECT_EQ(p.code, 0);
  EXPECT_EQ(parse_level(p.out).graph, testutil::load_fixture("space_expected_prefer_b.lvl"));

  EXPECT_EQ(cli({"merge", fx("space_ancestor.lvl"), fx("space_a.lvl"), fx("space_b.lvl"), "--policy", "maybe"}).code,
            2);
}

TEST_F(CliTest, StatsIdentityRow) {
  auto sc = sim::generate_scale(1, sim::scale_preset("room"));
  auto base = write("base.lvl", serialize_level(sc.base));
  auto r = cli({"stats", base, base, base});
  EXPECT_EQ(r.code, 0);
  std::istringstream row(r.out);
  std::size_t an, ae, da, db, mn, me;
  double t;
  row >> an >> ae >> da >> db >> mn >> me >> t;
  EXPECT_EQ(an, sc.base.node_count());
  EXPECT_EQ(ae, sc.base.edge_count());
  EXPECT_EQ(da, 0u);
  EXPECT_EQ(db, 0u);
  EXPECT_EQ(mn, an);
  EXPECT_EQ(me, ae);
}

TEST_F(CliTest, MergeDriverOverwritesCurrent) {
  auto o = copy("bedroom_ancestor.lvl", "o.lvl");
  auto a = copy("bedroom_a.lvl", "a.lvl");
  auto b = copy("bedroom_b.lvl", "b.lvl");
  EXPECT_EQ(cli({"merge-driver", o, a, b, "room.lvl"}).code, 0);
  EXPECT_EQ(load_level(a), testutil::load_fixture("bedroom_expected.lvl"));
  EXPECT_FALSE(fs::exists("room.lvl.lvlreport"));

  auto o4 = copy("space_ancestor.lvl", "o4.lvl");
  auto a4 = copy("space_a.lvl", "a4.lvl");
  auto b4 = copy("space_b.lvl", "b4.lvl");
  auto r = cli({"merge-driver", o4, a4, b4});
  EXPECT_EQ(r.code, 1);
  EXPECT_TRUE(validate(load_level(a4)).ok());
  EXPECT_TRUE(fs::exists(a4 + ".lvlreport"));
}

TEST_F(CliTest, MergeDriverUnreadableInputLeavesCurrentAlone) {
  auto a = copy("bedroom_a.lvl", "a.lvl");
  auto r = cli({"merge-driver", (dir / "missing.lvl").string(), a, fx("bedroom_b.lvl")});
  EXPECT_EQ(r.code, 2);
  EXPECT_EQ(load_level(a), testutil::load_fixture("bedroom_a.lvl"));
}

TEST_F(CliTest, ConfigParsing) {
  auto cfg = parse_config("# comment\npolicy = prefer-a\naveraging = on\naverageable = Light, Mesh\n"
                          "user.name = Grace\nasset_store = blobs\n",
                          dir / ".scenemerge.conf");
  EXPECT_EQ(cfg.policy.resolution, ResolutionPolicy::PreferA);
  EXPECT_TRUE(cfg.policy.numeric_averaging);
  EXPECT_EQ(cfg.policy.averageable_kinds, (std::set<std::string>{"Light", "Mesh"}));
  EXPECT_EQ(cfg.user_name, "Grace");
  EXPECT_EQ(*cfg.asset_store, dir / "blobs");
  EXPECT_THROW(parse_config("colour = red\n"), ConfigError);
  EXPECT_THROW(parse_config("policy = sometimes\n"), ConfigError);
}

TEST_F(CliTest, ConfigLookupOrder) {
  fs::create_directories(dir / "sub" / "deeper");
  write(".scenemerge.conf", "policy = prefer-a\n");
  EXPECT_EQ(locate_config(std::nullopt, dir / "sub" / "deeper"), dir / ".scenemerge.conf");
  auto env = write("env.conf", "policy = prefer-b\n");
  ::setenv(kConfigEnvVar, env.c_str(), 1);
  EXPECT_EQ(locate_config(std::nullopt, dir / "sub"), fs::path(env));
  EXPECT_EQ(locate_config(fs::path("/x.conf"), dir), fs::path("/x.conf"));

  auto r = cli({"merge", fx("space_ancestor.lvl"), fx("space_a.lvl"), fx("space_b.lvl")});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(parse_level(r.out).graph, testutil::load_fixture("space_expected_prefer_b.lvl"));

  auto bad = write("bad.conf", "nonsense = 1\n");
  EXPECT_EQ(cli({"merge", "--config", bad, fx("space_ancestor.lvl"), fx("space_a.lvl"), fx("space_b.lvl")}).code, 2);
}

TEST_F(CliTest, SimulateSmallRun) {
  auto json = (dir / "r.json").string();
  auto r = cli({"simulate", "--seed", "7", "--count", "20", "--size", "custom", "--nodes", "8", "--edges", "10",
                "--ops", "2", "--results", json});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("20 passed, 0 failed"), std::string::npos);
  EXPECT_TRUE(fs::exists(json));
}
