#include "cropsight/icon_query.hpp"

#include <fstream>
#include <algorithm>
#include <functional>
#include <json.hpp>
#include <set>
#include <sstream>

#include "cropsight/error.hpp"

namespace cropsight::icons {

namespace {

using nlohmann::json;

LocalizedText parse_localized(const json& j, const std::string& what) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidTaxonomy, what + " must be an object of locale -> text");
  LocalizedText out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_string()) throw Error(ErrorCode::InvalidTaxonomy, what + "." + it.key() + " must be a string");
    out[it.key()] = it.value().get<std::string>();
  }
  return out;
}

std::string require_string(const json& j, const char* key, const std::string& ctx) {
  if (!j.contains(key) || !j[key].is_string()) {
    throw Error(ErrorCode::InvalidTaxonomy, ctx + ": missing string field '" + key + "'");
  }
  return j[key].get<std::string>();
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::InvalidTaxonomy, what + " is not valid JSON: " + e.what());
  }
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::optional<Localized> localize(const LocalizedText& text, const std::string& locale,
                                  const std::string& default_locale) {
  if (auto it = text.find(locale); it != text.end()) return Localized{it->second, locale, false};
  if (auto it = text.find(default_locale); it != text.end()) return Localized{it->second, default_locale, true};
  return std::nullopt;
}

Taxonomy Taxonomy::from_json(const std::string& json_text) {
  const json doc = parse_json(json_text, "taxonomy");
  if (!doc.is_object() || !doc.contains("nodes") || !doc["nodes"].is_array() || !doc.contains("roots") ||
      !doc["roots"].is_array()) {
    throw Error(ErrorCode::InvalidTaxonomy, "taxonomy must be an object with 'roots' and 'nodes' arrays");
  }

  Taxonomy t;
  for (const auto& jn : doc["nodes"]) {
    if (!jn.is_object()) throw Error(ErrorCode::InvalidTaxonomy, "taxonomy node must be an object");
    IconNode n;
    n.id = require_string(jn, "id", "taxonomy node");
    if (n.id.empty() || n.id == kRootId) throw Error(ErrorCode::InvalidTaxonomy, "reserved or empty node id '" + n.id + "'");
    n.icon_asset = require_string(jn, "icon", "node " + n.id);
    n.labels = parse_localized(jn.value("labels", json::object()), "node " + n.id + " labels");
    if (jn.contains("children")) {
      if (!jn["children"].is_array()) throw Error(ErrorCode::InvalidTaxonomy, "node " + n.id + ": children must be an array");
      for (const auto& c : jn["children"]) {
        if (!c.is_string()) throw Error(ErrorCode::InvalidTaxonomy, "node " + n.id + ": child ids must be strings");
        n.children.push_back(c.get<std::string>());
      }
    }
    if (jn.contains("entry") && !jn["entry"].is_null()) {
      if (!jn["entry"].is_string()) throw Error(ErrorCode::InvalidTaxonomy, "node " + n.id + ": entry must be a string");
      n.entry_id = jn["entry"].get<std::string>();
    }
    if (!t.index_.emplace(n.id, t.nodes_.size()).second) {
      throw Error(ErrorCode::InvalidTaxonomy, "duplicate node id '" + n.id + "'");
    }
    t.nodes_.push_back(std::move(n));
  }
  for (const auto& r : doc["roots"]) {
    if (!r.is_string()) throw Error(ErrorCode::InvalidTaxonomy, "root ids must be strings");
    t.roots_.push_back(r.get<std::string>());
  }

  for (const auto& r : t.roots_) {
    if (!t.contains(r)) throw Error(ErrorCode::DanglingChild, "root '" + r + "' does not resolve to a node");
  }
  for (const auto& n : t.nodes_) {
    for (const auto& c : n.children) {
      if (!t.contains(c)) throw Error(ErrorCode::DanglingChild, "node '" + n.id + "' lists unknown child '" + c + "'");
    }
  }

  // Depth-first colouring over every node catches cycles even in parts of
  // the graph unreachable from the roots.
  std::vector<int> colour(t.nodes_.size(), 0);
  std::function<void(std::size_t)> visit = [&](std::size_t i) {
    colour[i] = 1;
    for (const auto& c : t.nodes_[i].children) {
      const std::size_t j = t.index_.at(c);
      if (colour[j] == 1) throw Error(ErrorCode::CycleDetected, "cycle through node '" + c + "'");
      if (colour[j] == 0) visit(j);
    }
    colour[i] = 2;
  };
  for (std::size_t i = 0; i < t.nodes_.size(); ++i) {
    if (colour[i] == 0) visit(i);
  }

  std::set<std::string> root_set(t.roots_.begin(), t.roots_.end());
  if (root_set.size() != t.roots_.size()) throw Error(ErrorCode::InvalidTaxonomy, "duplicate root id");
  for (const auto& n : t.nodes_) {
    for (const auto& c : n.children) {
      if (root_set.count(c)) throw Error(ErrorCode::InvalidTaxonomy, "root '" + c + "' also listed as a child of '" + n.id + "'");
      if (!t.parent_.emplace(c, n.id).second) {
        throw Error(ErrorCode::InvalidTaxonomy, "node '" + c + "' has more than one parent");
      }
    }
  }
  for (const auto& n : t.nodes_) {
    if (!root_set.count(n.id) && !t.parent_.count(n.id)) {
      throw Error(ErrorCode::InvalidTaxonomy, "node '" + n.id + "' is unreachable from the roots");
    }
    if (n.children.empty() && !n.entry_id) {
      throw Error(ErrorCode::LeafWithoutEntry, "leaf node '" + n.id + "' has no entry");
    }
    if (!n.children.empty() && n.entry_id) {
      throw Error(ErrorCode::InvalidTaxonomy, "inner node '" + n.id + "' must not carry an entry");
    }
  }
  return t;
}

Taxonomy Taxonomy::load(const std::string& path) { return from_json(read_text_file(path)); }

const IconNode& Taxonomy::node(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(ErrorCode::UnknownNode, "unknown icon node '" + id + "'");
  return nodes_[it->second];
}

std::vector<IconNode> Taxonomy::children(const std::string& id) const {
  const auto& ids = id == kRootId ? roots_ : node(id).children;
  std::vector<IconNode> out;
  out.reserve(ids.size());
  for (const auto& c : ids) out.push_back(node(c));
  return out;
}

QueryPath Taxonomy::path_to(const std::string& id) const {
  node(id);
  QueryPath path;
  std::string cur = id;
  while (true) {
    path.node_ids.insert(path.node_ids.begin(), cur);
    auto it = parent_.find(cur);
    if (it == parent_.end()) break;
    cur = it->second;
  }
  return path;
}

Query build_query(const Taxonomy& taxonomy, const QueryPath& path) {
  if (path.node_ids.empty()) throw Error(ErrorCode::InvalidPath, "query path is empty");
  const auto& first = path.node_ids.front();
  const auto& roots = taxonomy.roots();
  if (std::find(roots.begin(), roots.end(), first) == roots.end()) {
    throw Error(ErrorCode::InvalidPath, "query path must start at a top-level icon, got '" + first + "'");
  }
  for (std::size_t i = 1; i < path.node_ids.size(); ++i) {
    const auto& parent = path.node_ids[i - 1];
    const auto& child = path.node_ids[i];
    if (!taxonomy.contains(child)) throw Error(ErrorCode::InvalidPath, "unknown icon '" + child + "' in query path");
    const auto& kids = taxonomy.node(parent).children;
    if (std::find(kids.begin(), kids.end(), child) == kids.end()) {
      throw Error(ErrorCode::InvalidPath, "'" + child + "' is not a child of '" + parent + "'");
    }
  }
  return Query{path.node_ids};
}

KnowledgeBase KnowledgeBase::from_json(const std::string& json_text, const std::string& default_locale) {
  const json doc = parse_json(json_text, "knowledge base");
  if (!doc.is_array()) throw Error(ErrorCode::InvalidTaxonomy, "knowledge base must be a JSON array");
  KnowledgeBase kb;
  kb.default_locale_ = default_locale;
  for (const auto& je : doc) {
    if (!je.is_object()) throw Error(ErrorCode::InvalidTaxonomy, "knowledge entry must be an object");
    KnowledgeEntry e;
    e.id = require_string(je, "id", "knowledge entry");
    if (!je.contains("topic_keys") || !je["topic_keys"].is_array() || je["topic_keys"].empty()) {
      throw Error(ErrorCode::InvalidTaxonomy, "entry " + e.id + ": topic_keys must be a non-empty array");
    }
    for (const auto& k : je["topic_keys"]) {
      if (!k.is_string()) throw Error(ErrorCode::InvalidTaxonomy, "entry " + e.id + ": topic keys must be strings");
      e.topic_keys.push_back(k.get<std::string>());
    }
    if (!je.contains("content")) throw Error(ErrorCode::InvalidTaxonomy, "entry " + e.id + ": missing content");
    e.content = parse_localized(je["content"], "entry " + e.id + " content");
    if (!e.content.count(default_locale)) {
      throw Error(ErrorCode::InvalidTaxonomy, "entry " + e.id + " lacks default locale '" + default_locale + "'");
    }
    e.updated_at = je.value("updated_at", std::string{});
    if (!kb.by_id_.emplace(e.id, kb.entries_.size()).second) {
      throw Error(ErrorCode::InvalidTaxonomy, "duplicate entry id '" + e.id + "'");
    }
    if (!kb.by_keys_.emplace(e.topic_keys, kb.entries_.size()).second) {
      throw Error(ErrorCode::InvalidTaxonomy, "entry " + e.id + " duplicates the topic keys of another entry");
    }
    kb.entries_.push_back(std::move(e));
  }
  return kb;
}

KnowledgeBase KnowledgeBase::load(const std::string& path, const std::string& default_locale) {
  return from_json(read_text_file(path), default_locale);
}

const KnowledgeEntry* KnowledgeBase::find_by_id(const std::string& id) const noexcept {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &entries_[it->second];
}

const KnowledgeEntry* KnowledgeBase::find_by_keys(const std::vector<std::string>& keys) const noexcept {
  auto it = by_keys_.find(keys);
  return it == by_keys_.end() ? nullptr : &entries_[it->second];
}

Retrieved KnowledgeBase::retrieve(const Query& query, const std::string& locale) const {
  const KnowledgeEntry* e = find_by_keys(query.topic_keys);
  if (!e) throw Error(ErrorCode::NotFound, "no knowledge entry for the selected icons");
  auto text = localize(e->content, locale, default_locale_);
  if (!text) throw Error(ErrorCode::NotFound, "entry " + e->id + " has no content in a usable locale");
  return {e->id, text->text, text->locale, text->fallback, e->updated_at};
}

FaqStore FaqStore::from_json(const std::string& json_text, const std::string& default_locale) {
  const json doc = parse_json(json_text, "FAQ");
  if (!doc.is_array()) throw Error(ErrorCode::InvalidTaxonomy, "FAQ must be a JSON array");
  FaqStore store;
  store.default_locale_ = default_locale;
  for (const auto& jf : doc) {
    if (!jf.is_object()) throw Error(ErrorCode::InvalidTaxonomy, "FAQ item must be an object");
    FaqItem item;
    item.id = require_string(jf, "id", "FAQ item");
    item.question = parse_localized(jf.value("question", json::object()), "faq " + item.id + " question");
    item.answer = parse_localized(jf.value("answer", json::object()), "faq " + item.id + " answer");
    if (!item.question.count(default_locale) || !item.answer.count(default_locale)) {
      throw Error(ErrorCode::InvalidTaxonomy, "faq " + item.id + " lacks default locale '" + default_locale + "'");
    }
    store.items_.push_back(std::move(item));
  }
  return store;
}

FaqStore FaqStore::load(const std::string& path, const std::string& default_locale) {
  return from_json(read_text_file(path), default_locale);
}

std::vector<LocalizedFaq> FaqStore::list(const std::string& locale) const {
  std::vector<LocalizedFaq> out;
  out.reserve(items_.size());
  for (const auto& item : items_) {
    // Question and answer fall back together so a question never pairs with
    // an answer in another language.
    if (item.question.count(locale) && item.answer.count(locale)) {
      out.push_back({item.id, item.question.at(locale), item.answer.at(locale), locale, false});
    } else {
      out.push_back({item.id, item.question.at(default_locale_), item.answer.at(default_locale_), default_locale_,
                     true});
    }
  }
  return out;
}

std::vector<IntegrityIssue> check_integrity(const Taxonomy& taxonomy, const KnowledgeBase& kb) {
  std::vector<IntegrityIssue> issues;
  for (const auto& n : taxonomy.nodes()) {
    if (!n.entry_id) continue;
    const KnowledgeEntry* e = kb.find_by_id(*n.entry_id);
    if (!e) {
      issues.push_back({n.id, "entry '" + *n.entry_id + "' is missing from the knowledge base"});
      continue;
    }
    const auto keys = taxonomy.path_to(n.id).node_ids;
    if (e->topic_keys != keys) {
      issues.push_back({n.id, "entry '" + e->id + "' topic keys do not match the icon path"});
    }
  }
  return issues;
}

}  // namespace cropsight::icons
