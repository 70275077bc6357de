#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scenemerge/conflict.hpp"
#include "scenemerge/graph.hpp"

namespace scenemerge {

/// "sha256:<hex>" of the given bytes.
std::string content_digest(std::string_view content);

struct AssetBlob {
  AssetId id;
  std::string type_tag;
  std::string content;
  std::string digest;

  static AssetBlob make(AssetId id, std::string type_tag, std::string content);
  AssetEntry entry() const { return {type_tag, digest}; }
};

/// Raised when a manifest digest has no blob in the store.
class MissingBlobError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for unusable strategy/validator configuration, as opposed to a
/// validator that ran and rejected a blob.
class AssetConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an external strategy exits with neither 0 nor 1.
class StrategyFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Content-addressed blob storage shared by all versions of a level.
class BlobStore {
 public:
  virtual ~BlobStore() = default;
  virtual std::optional<std::string> get(const std::string& digest) const = 0;
  /// Stores `content` and returns its digest.
  virtual std::string put(std::string_view content) = 0;
};

class MemoryBlobStore final : public BlobStore {
 public:
  std::optional<std::string> get(const std::string& digest) const override;
  std::string put(std::string_view content) override;

 private:
  std::map<std::string, std::string> blobs_;
};

/// One file per blob, named by the hex part of the digest.
class DirectoryBlobStore final : public BlobStore {
 public:
  explicit DirectoryBlobStore(std::filesystem::path dir);
  std::optional<std::string> get(const std::string& digest) const override;
  std::string put(std::string_view content) override;
  const std::filesystem::path& directory() const { return dir_; }

 private:
  std::filesystem::path path_for(const std::string& digest) const;
  std::filesystem::path dir_;
};

struct StrategyResult {
  enum class Kind { Merged, Conflict, Deleted };
  Kind kind = Kind::Conflict;
  std::string content;  // Merged only
};

class AssetMergeStrategy {
 public:
  virtual ~AssetMergeStrategy() = default;
  /// Called only when both branches changed the blob differently. Absent
  /// pointers mean the blob does not exist in that version.
  virtual StrategyResult merge3(const AssetBlob* ancestor, const AssetBlob* mine,
                                const AssetBlob* theirs) const = 0;
};

/// Default for unregistered type tags: any divergent change conflicts.
class AtomicStrategy final : public AssetMergeStrategy {
 public:
  StrategyResult merge3(const AssetBlob*, const AssetBlob*, const AssetBlob*) const override {
    return {};
  }
};

/// Runs `<cmd> <ancestor|-> <mine> <theirs> <out>`; exit 0 merged, 1 conflict.
class ExternalCommandStrategy final : public AssetMergeStrategy {
 public:
  explicit ExternalCommandStrategy(std::string command) : command_(std::move(command)) {}
  StrategyResult merge3(const AssetBlob* ancestor, const AssetBlob* mine,
                        const AssetBlob* theirs) const override;

 private:
  std::string command_;
};

class StrategyRegistry {
 public:
  void add(std::string type_tag, std::shared_ptr<const AssetMergeStrategy> strategy);
  /// Registered strategy for the tag, or the atomic default.
  const AssetMergeStrategy& find(const std::string& type_tag) const;
  bool has(const std::string& type_tag) const { return strategies_.contains(type_tag); }

 private:
  std::map<std::string, std::shared_ptr<const AssetMergeStrategy>> strategies_;
  AtomicStrategy atomic_;
};

struct ValidationOutcome {
  bool pass = false;
  std::string message;
};

/// Runs `<validator> <blob-path>` on a temporary copy of the blob content.
/// Throws AssetConfigError when the validator cannot be executed.
ValidationOutcome validate_code_asset(const AssetBlob& blob, const std::string& validator);

/// Everything the manifest merge needs beyond the manifests themselves.
struct AssetContext {
  BlobStore* store = nullptr;
  const StrategyRegistry* registry = nullptr;
  std::map<std::string, std::string> validators;  // type tag -> command
};

struct ManifestMergeResult {
  AssetManifest merged;
  std::vector<Conflict> conflicts;  // resolved per policy already
  std::vector<DroppedEdit> dropped;
};

/// Per-asset 3-way merge. Without a context (or store) the merge works on
/// digests alone: divergent edits conflict and no validator runs.
ManifestMergeResult merge_manifests(const AssetManifest& ancestor, const AssetManifest& mine,
                                    const AssetManifest& theirs, const AssetContext* context,
                                    const MergePolicy& policy);

}  // namespace scenemerge
