#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace cropsight::icons {

// locale code -> text
using LocalizedText = std::map<std::string, std::string>;

struct IconNode {
  std::string id;
  std::string icon_asset;  // relative path, e.g. "icons/rice.svg"
  LocalizedText labels;
  std::vector<std::string> children;
  std::optional<std::string> entry_id;  // present exactly on leaves
};

struct QueryPath {
  std::vector<std::string> node_ids;
};

struct Query {
  std::vector<std::string> topic_keys;
  friend bool operator==(const Query&, const Query&) = default;
};

struct KnowledgeEntry {
  std::string id;
  std::vector<std::string> topic_keys;
  LocalizedText content;
  std::string updated_at;  // ISO-8601
};

struct FaqItem {
  std::string id;
  LocalizedText question;
  LocalizedText answer;
};

struct Localized {
  std::string text;
  std::string locale;  // locale actually used
  bool fallback = false;
};

// Picks `locale`, else `default_locale`. Returns nullopt if neither exists.
std::optional<Localized> localize(const LocalizedText& text, const std::string& locale,
                                  const std::string& default_locale);

// The virtual id whose children are the top-level nodes.
inline constexpr const char* kRootId = "root";

class Taxonomy {
 public:
  // Validates structure: ids unique, every child resolves (DanglingChild),
  // no cycles (CycleDetected), leaf <=> entry (LeafWithoutEntry), each node
  // has at most one parent and is reachable from the roots (InvalidTaxonomy).
  static Taxonomy from_json(const std::string& json_text);
  static Taxonomy load(const std::string& path);

  const std::vector<std::string>& roots() const noexcept { return roots_; }
  const IconNode& node(const std::string& id) const;  // UnknownNode
  bool contains(const std::string& id) const noexcept { return index_.count(id) != 0; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  const std::vector<IconNode>& nodes() const noexcept { return nodes_; }

  // Ordered children; kRootId lists the top-level nodes. UnknownNode.
  std::vector<IconNode> children(const std::string& id) const;

  // Path from a top-level node down to `id` (inclusive). UnknownNode.
  QueryPath path_to(const std::string& id) const;

 private:
  std::vector<IconNode> nodes_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, std::string> parent_;
  std::vector<std::string> roots_;
};

// Topic keys are the path's node ids. InvalidPath if the path is empty,
// does not start at a top-level node or skips a level.
Query build_query(const Taxonomy& taxonomy, const QueryPath& path);

struct Retrieved {
  std::string entry_id;
  std::string content;
  std::string locale;
  bool fallback = false;
  std::string updated_at;
};

class KnowledgeBase {
 public:
  // JSON array of {id, topic_keys, content: {locale: text}, updated_at}.
  // Each entry must carry `default_locale`.
  static KnowledgeBase from_json(const std::string& json_text, const std::string& default_locale);
  static KnowledgeBase load(const std::string& path, const std::string& default_locale);

  const std::string& default_locale() const noexcept { return default_locale_; }
  const std::vector<KnowledgeEntry>& entries() const noexcept { return entries_; }
  const KnowledgeEntry* find_by_id(const std::string& id) const noexcept;
  const KnowledgeEntry* find_by_keys(const std::vector<std::string>& keys) const noexcept;

  // Exact match on topic keys. NotFound if nothing matches.
  Retrieved retrieve(const Query& query, const std::string& locale) const;

 private:
  std::string default_locale_;
  std::vector<KnowledgeEntry> entries_;
  std::map<std::vector<std::string>, std::size_t> by_keys_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

struct LocalizedFaq {
  std::string id;
  std::string question;
  std::string answer;
  std::string locale;
  bool fallback = false;
};

class FaqStore {
 public:
  static FaqStore from_json(const std::string& json_text, const std::string& default_locale);
  static FaqStore load(const std::string& path, const std::string& default_locale);

  std::vector<LocalizedFaq> list(const std::string& locale) const;
  std::size_t size() const noexcept { return items_.size(); }

 private:
  std::string default_locale_;
  std::vector<FaqItem> items_;
};

struct IntegrityIssue {
  std::string node_id;
  std::string problem;
};

// Referential integrity between taxonomy leaves and the knowledge base:
// every leaf's entry exists and is addressed by the leaf's path keys.
std::vector<IntegrityIssue> check_integrity(const Taxonomy& taxonomy, const KnowledgeBase& kb);

// Immutable taxonomy + KB + FAQ bundle; readers take a shared snapshot,
// reload swaps the whole thing.
struct CatalogSnapshot {
  Taxonomy taxonomy;
  KnowledgeBase knowledge;
  FaqStore faq;
};

class Catalog {
 public:
  explicit Catalog(std::shared_ptr<const CatalogSnapshot> snapshot) : snapshot_(std::move(snapshot)) {}

  std::shared_ptr<const CatalogSnapshot> snapshot() const {
    std::lock_guard lock(mu_);
    return snapshot_;
  }
  void replace(std::shared_ptr<const CatalogSnapshot> next) {
    std::lock_guard lock(mu_);
    snapshot_ = std::move(next);
  }

 private:
  mutable std::mutex mu_;
  std::shared_ptr<const CatalogSnapshot> snapshot_;
};

std::string read_text_file(const std::string& path);

}  // namespace cropsight::icons
