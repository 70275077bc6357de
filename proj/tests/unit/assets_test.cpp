#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "scenemerge/assets.hpp"

using namespace scenemerge;

namespace {

struct ScratchDir {
  std::filesystem::path path;
  ScratchDir() {
    path = std::filesystem::temp_directory_path() /
           ("sm_assets_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~ScratchDir() { std::filesystem::remove_all(path); }

  std::string script(const std::string& name, const std::string& body) const {
    auto p = path / name;
    std::ofstream(p) << "#!/bin/sh\n" << body << "\n";
    std::filesystem::permissions(p, std::filesystem::perms::owner_all);
    return p.string();
  }
};

AssetEntry put(BlobStore& store, const std::string& tag, const std::string& content) {
  return {tag, store.put(content)};
}

}  // namespace

TEST(Digest, IsSha256Hex) {
  EXPECT_EQ(content_digest(""), "sha256:e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(content_digest("abc"), "sha256:ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(BlobStores, RoundTrip) {
  MemoryBlobStore mem;
  auto d = mem.put("hello");
  EXPECT_EQ(d, content_digest("hello"));
  EXPECT_EQ(mem.get(d), "hello");
  EXPECT_FALSE(mem.get(content_digest("nope")));

  ScratchDir dir;
  DirectoryBlobStore disk(dir.path / "blobs");
  auto d2 = disk.put(std::string("bin\0ary", 7));
  EXPECT_EQ(disk.get(d2)->size(), 7u);
  EXPECT_EQ(disk.put(std::string("bin\0ary", 7)), d2);
  EXPECT_FALSE(disk.get(content_digest("nope")));
}

TEST(Manifests, OneSidedChangesApply) {
  AssetManifest anc{{AssetId("t"), {"texture", "sha256:1"}}};
  AssetManifest a{{AssetId("t"), {"texture", "sha256:2"}}};
  AssetManifest b = anc;
  b.emplace(AssetId("m"), AssetEntry{"mesh", "sha256:3"});
  auto r = merge_manifests(anc, a, b, nullptr, {});
  EXPECT_TRUE(r.conflicts.empty());
  EXPECT_EQ(r.merged.at(AssetId("t")).digest, "sha256:2");
  EXPECT_EQ(r.merged.at(AssetId("m")).digest, "sha256:3");
}

TEST(Manifests, DivergentAtomicChangeConflicts) {
  AssetManifest anc{{AssetId("t"), {"texture", "sha256:1"}}};
  AssetManifest a{{AssetId("t"), {"texture", "sha256:2"}}};
  AssetManifest b{{AssetId("t"), {"texture", "sha256:3"}}};
  auto r = merge_manifests(anc, a, b, nullptr, {});
  ASSERT_EQ(r.conflicts.size(), 1u);
  EXPECT_EQ(r.merged.at(AssetId("t")).digest, "sha256:1");

  MergePolicy pb;
  pb.resolution = ResolutionPolicy::PreferB;
  auto rb = merge_manifests(anc, a, b, nullptr, pb);
  EXPECT_EQ(rb.merged.at(AssetId("t")).digest, "sha256:3");
  ASSERT_EQ(rb.dropped.size(), 1u);
  EXPECT_EQ(rb.dropped[0].branch, Branch::A);
  EXPECT_EQ(rb.dropped[0].edit, EditKind::AssetChange);
}

TEST(Manifests, MissingBlobIsReported) {
  MemoryBlobStore store;
  AssetContext ctx{&store, nullptr, {}};
  AssetManifest anc{{AssetId("t"), {"texture", "sha256:00"}}};
  EXPECT_THROW(merge_manifests(anc, anc, anc, &ctx, {}), MissingBlobError);
}

class ExternalStrategyTest : public ::testing::Test {
 protected:
  ScratchDir dir;
  MemoryBlobStore store;
  StrategyRegistry registry;
  AssetManifest anc, a, b;

  void SetUp() override {
    anc = {{AssetId("s.txt"), put(store, "text", "one\n")}};
    a = {{AssetId("s.txt"), put(store, "text", "one\ntwo\n")}};
    b = {{AssetId("s.txt"), put(store, "text", "zero\none\n")}};
  }

  ManifestMergeResult run(const std::string& body, MergePolicy policy = {}) {
    registry.add("text", std::make_shared<ExternalCommandStrategy>(dir.script("strategy.sh", body)));
    AssetContext ctx{&store, &registry, {}};
    return merge_manifests(anc, a, b, &ctx, policy);
  }
};

TEST_F(ExternalStrategyTest, ExitZeroStoresMergedOutput) {
  auto r = run("cat \"$3\" > \"$4\"; tail -n 1 \"$2\" >> \"$4\"");
  EXPECT_TRUE(r.conflicts.empty());
  const auto& e = r.merged.at(AssetId("s.txt"));
  EXPECT_EQ(store.get(e.digest), "zero\none\ntwo\n");
}

TEST_F(ExternalStrategyTest, ExitZeroWithoutOutputDeletes) {
  auto r = run("exit 0");
  EXPECT_TRUE(r.conflicts.empty());
  EXPECT_FALSE(r.merged.contains(AssetId("s.txt")));
}

TEST_F(ExternalStrategyTest, ExitOneConflicts) {
  auto r = run("exit 1");
  ASSERT_EQ(r.conflicts.size(), 1u);
  EXPECT_TRUE(std::holds_alternative<AssetConflict>(r.conflicts[0].detail));
}

TEST_F(ExternalStrategyTest, OtherExitCodesAreErrors) {
  EXPECT_THROW(run("exit 3"), StrategyFailure);
  registry.add("text", std::make_shared<ExternalCommandStrategy>((dir.path / "missing.sh").string()));
  AssetContext ctx{&store, &registry, {}};
  EXPECT_THROW(merge_manifests(anc, a, b, &ctx, {}), AssetConfigError);
}

TEST(Validators, GateOneSidedCodeChanges) {
  ScratchDir dir;
  MemoryBlobStore store;
  StrategyRegistry registry;
  std::string checker = dir.script("check.sh", "grep -q BROKEN \"$1\" && { echo syntax error; exit 1; }; exit 0");
  AssetContext ctx{&store, &registry, {{"lua", checker}}};

  AssetManifest anc{{AssetId("ai.lua"), put(store, "lua", "return 1\n")}};
  AssetManifest good{{AssetId("ai.lua"), put(store, "lua", "return 2\n")}};
  AssetManifest bad{{AssetId("ai.lua"), put(store, "lua", "BROKEN\n")}};

  auto ok = merge_manifests(anc, good, anc, &ctx, {});
  EXPECT_EQ(ok.merged, good);
  EXPECT_TRUE(ok.dropped.empty());

  auto rejected = merge_manifests(anc, bad, anc, &ctx, {});
  EXPECT_EQ(rejected.merged, anc);
  ASSERT_EQ(rejected.dropped.size(), 1u);
  EXPECT_EQ(rejected.dropped[0].branch, Branch::A);
  EXPECT_NE(rejected.dropped[0].reason.find("syntax error"), std::string::npos);
}

TEST(Validators, PreferredFallbackWhenMergedBlobFails) {
  ScratchDir dir;
  MemoryBlobStore store;
  StrategyRegistry registry;
  registry.add("lua", std::make_shared<ExternalCommandStrategy>(dir.script("m.sh", "echo BROKEN > \"$4\"")));
  std::string checker = dir.script("check.sh", "! grep -q BROKEN \"$1\"");
  AssetContext ctx{&store, &registry, {{"lua", checker}}};
  AssetManifest anc{{AssetId("ai.lua"), put(store, "lua", "return 1\n")}};
  AssetManifest a{{AssetId("ai.lua"), put(store, "lua", "return 2\n")}};
  AssetManifest b{{AssetId("ai.lua"), put(store, "lua", "return 3\n")}};
  MergePolicy pa;
  pa.resolution = ResolutionPolicy::PreferA;
  auto r = merge_manifests(anc, a, b, &ctx, pa);
  EXPECT_EQ(r.merged, a);
  ASSERT_EQ(r.dropped.size(), 1u);
  EXPECT_EQ(r.dropped[0].branch, Branch::B);

  auto manual = merge_manifests(anc, a, b, &ctx, {});
  EXPECT_EQ(manual.merged, anc);
  EXPECT_EQ(manual.dropped.size(), 2u);
}

TEST(Validators, UnrunnableValidatorIsAConfigError) {
  auto blob = AssetBlob::make(AssetId("x.lua"), "lua", "return 1");
  EXPECT_THROW(validate_code_asset(blob, "/nonexistent/validator"), AssetConfigError);
  EXPECT_THROW(validate_code_asset(blob, ""), AssetConfigError);
}
