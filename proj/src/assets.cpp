#include "scenemerge/assets.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <set>

#include "process.hpp"

namespace scenemerge {

std::string content_digest(std::string_view content) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(content.data(), content.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out = "sha256:";
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[md[i] >> 4];
    out += kHex[md[i] & 0xf];
  }
  return out;
}

AssetBlob AssetBlob::make(AssetId id, std::string type_tag, std::string content) {
  std::string digest = content_digest(content);
  return {std::move(id), std::move(type_tag), std::move(content), std::move(digest)};
}

std::optional<std::string> MemoryBlobStore::get(const std::string& digest) const {
  auto it = blobs_.find(digest);
  if (it == blobs_.end()) return std::nullopt;
  return it->second;
}

std::string MemoryBlobStore::put(std::string_view content) {
  std::string digest = content_digest(content);
  blobs_.emplace(digest, std::string(content));
  return digest;
}

DirectoryBlobStore::DirectoryBlobStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path DirectoryBlobStore::path_for(const std::string& digest) const {
  auto colon = digest.find(':');
  return dir_ / (colon == std::string::npos ? digest : digest.substr(colon + 1));
}

std::optional<std::string> DirectoryBlobStore::get(const std::string& digest) const {
  auto p = path_for(digest);
  if (!std::filesystem::exists(p)) return std::nullopt;
  return detail::read_file(p);
}

std::string DirectoryBlobStore::put(std::string_view content) {
  std::string digest = content_digest(content);
  auto p = path_for(digest);
  if (!std::filesystem::exists(p)) {
    std::filesystem::create_directories(dir_);
    std::ofstream out(p, std::ios::binary);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("cannot write blob " + p.string());
  }
  return digest;
}

StrategyResult ExternalCommandStrategy::merge3(const AssetBlob* ancestor, const AssetBlob* mine,
                                               const AssetBlob* theirs) const {
  detail::TempDir tmp;
  auto path_or_dash = [&](const AssetBlob* blob, const char* name) {
    return blob == nullptr ? std::string("-") : tmp.write(name, blob->content).string();
  };
  std::string anc = path_or_dash(ancestor, "ancestor");
  std::string a = path_or_dash(mine, "mine");
  std::string b = path_or_dash(theirs, "theirs");
  auto out = tmp.path() / "merged";
  auto result = detail::run_shell(command_, {anc, a, b, out.string()});
  switch (result.exit_code) {
    case 0:
      if (!std::filesystem::exists(out)) return {StrategyResult::Kind::Deleted, {}};
      return {StrategyResult::Kind::Merged, detail::read_file(out)};
    case 1:
      return {StrategyResult::Kind::Conflict, {}};
    case 126:
    case 127:
      throw AssetConfigError("merge strategy '" + command_ + "' cannot be executed: " + result.output);
    default:
      throw StrategyFailure("merge strategy '" + command_ + "' failed with exit code " +
                            std::to_string(result.exit_code) + ": " + result.output);
  }
}

void StrategyRegistry::add(std::string type_tag, std::shared_ptr<const AssetMergeStrategy> strategy) {
  strategies_.insert_or_assign(std::move(type_tag), std::move(strategy));
}

const AssetMergeStrategy& StrategyRegistry::find(const std::string& type_tag) const {
  auto it = strategies_.find(type_tag);
  return it == strategies_.end() ? static_cast<const AssetMergeStrategy&>(atomic_) : *it->second;
}

ValidationOutcome validate_code_asset(const AssetBlob& blob, const std::string& validator) {
  if (validator.empty()) throw AssetConfigError("no validator configured for '" + blob.type_tag + "'");
  detail::TempDir tmp;
  // Keep the file name recognizable to tools that dispatch on extension.
  std::string name = std::filesystem::path(blob.id.str()).filename().string();
  if (name.empty()) name = "blob";
  auto path = tmp.write(name, blob.content);
  auto result = detail::run_shell(validator, {path.string()});
  if (result.exit_code == 126 || result.exit_code == 127) {
    throw AssetConfigError("validator '" + validator + "' cannot be executed: " + result.output);
  }
  return {result.exit_code == 0, result.output};
}

namespace {

using Entry = std::optional<AssetEntry>;

Entry lookup(const AssetManifest& m, const AssetId& id) {
  auto it = m.find(id);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

class ManifestMerger {
 public:
  ManifestMerger(const AssetContext* ctx, const MergePolicy& policy) : ctx_(ctx), policy_(policy) {}

  void check_store(const AssetManifest& m) const {
    if (store() == nullptr) return;
    for (const auto& [id, entry] : m) {
      if (!store()->get(entry.digest)) {
        throw MissingBlobError("asset '" + id.str() + "' digest " + entry.digest +
                               " is missing from the blob store");
      }
    }
  }

  void merge_one(const AssetId& id, const Entry& anc, const Entry& a, const Entry& b,
                 ManifestMergeResult& out) {
    Entry result;
    std::set<Branch> already_dropped;
    if (a == b) {
      result = a;
    } else if (a == anc) {
      result = b;
    } else if (b == anc) {
      result = a;
    } else {
      std::optional<StrategyResult> merged;
      if (a && b && a->type_tag == b->type_tag && store() != nullptr && ctx_->registry != nullptr) {
        auto ba = load(id, *a);
        auto bb = load(id, *b);
        std::optional<AssetBlob> bo;
        if (anc) bo = load(id, *anc);
        merged = ctx_->registry->find(a->type_tag).merge3(bo ? &*bo : nullptr, &ba, &bb);
      }
      if (merged && merged->kind == StrategyResult::Kind::Merged) {
        result = AssetEntry{a->type_tag, store()->put(merged->content)};
      } else if (merged && merged->kind == StrategyResult::Kind::Deleted) {
        result = std::nullopt;
      } else {
        Conflict c{AssetConflict{id, a, b, anc}, Resolution::Unresolved};
        if (auto winner = policy_.preferred()) {
          c.resolution = took(*winner);
          result = *winner == Branch::A ? a : b;
          Branch loser = other(*winner);
          drop(out, loser, id, loser == Branch::A ? a : b, "conflict resolved in favor of branch " +
                                                               std::string(to_string(*winner)));
          already_dropped.insert(loser);
        } else {
          result = anc;
        }
        out.conflicts.push_back(std::move(c));
      }
    }

    if (result && result != anc && rejected(id, *result)) {
      Entry fallback = anc;
      if (auto winner = policy_.preferred()) {
        Entry pref = *winner == Branch::A ? a : b;
        if (pref && pref != result && pref != anc && !rejected(id, *pref)) fallback = pref;
      }
      result = fallback;
      for (Branch br : {Branch::A, Branch::B}) {
        const Entry& mine = br == Branch::A ? a : b;
        if (mine != anc && mine != result && !already_dropped.contains(br)) {
          drop(out, br, id, mine, "rejected by validator: " + last_message_);
        }
      }
    }
    if (result) out.merged.emplace(id, *result);
  }

 private:
  BlobStore* store() const { return ctx_ == nullptr ? nullptr : ctx_->store; }

  AssetBlob load(const AssetId& id, const AssetEntry& e) const {
    auto content = store()->get(e.digest);
    if (!content) {
      throw MissingBlobError("asset '" + id.str() + "' digest " + e.digest +
                             " is missing from the blob store");
    }
    return AssetBlob{id, e.type_tag, std::move(*content), e.digest};
  }

  bool rejected(const AssetId& id, const AssetEntry& e) {
    if (store() == nullptr) return false;
    auto it = ctx_->validators.find(e.type_tag);
    if (it == ctx_->validators.end()) return false;
    auto outcome = validate_code_asset(load(id, e), it->second);
    if (!outcome.pass) last_message_ = outcome.message;
    return !outcome.pass;
  }

  static void drop(ManifestMergeResult& out, Branch br, const AssetId& id, const Entry& entry,
                   std::string reason) {
    DroppedEdit d;
    d.branch = br;
    d.edit = EditKind::AssetChange;
    d.subject = id.str();
    d.asset = entry;
    d.reason = std::move(reason);
    out.dropped.push_back(std::move(d));
  }

  const AssetContext* ctx_;
  const MergePolicy& policy_;
  std::string last_message_;
};

}  // namespace

ManifestMergeResult merge_manifests(const AssetManifest& ancestor, const AssetManifest& mine,
                                    const AssetManifest& theirs, const AssetContext* context,
                                    const MergePolicy& policy) {
  ManifestMerger merger(context, policy);
  merger.check_store(ancestor);
  merger.check_store(mine);
  merger.check_store(theirs);

  std::set<AssetId> ids;
  for (const auto* m : {&ancestor, &mine, &theirs}) {
    for (const auto& [id, e] : *m) ids.insert(id);
  }
  ManifestMergeResult out;
  for (const auto& id : ids) {
    merger.merge_one(id, lookup(ancestor, id), lookup(mine, id), lookup(theirs, id), out);
  }
  return out;
}

}  // namespace scenemerge
