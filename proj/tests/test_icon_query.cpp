#include <doctest.h>

#include <filesystem>
#include <set>

#include "cropsight/error.hpp"
#include "cropsight/icon_query.hpp"

using namespace cropsight;
using namespace cropsight::icons;

namespace {

std::string data_file(const std::string& name) { return std::string(CS_SOURCE_DIR) + "/data/" + name; }

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Ok;
}

struct Fixture {
  Taxonomy tax = Taxonomy::load(data_file("taxonomy.json"));
  KnowledgeBase kb = KnowledgeBase::load(data_file("kb.json"), "en");
  FaqStore faq = FaqStore::load(data_file("faq.json"), "en");
};

// Depth of every node by walking down from the roots, independent of path_to.
std::map<std::string, int> depths(const Taxonomy& t) {
  std::map<std::string, int> d;
  std::vector<std::pair<std::string, int>> stack;
  for (const auto& r : t.roots()) stack.push_back({r, 1});
  while (!stack.empty()) {
    auto [id, k] = stack.back();
    stack.pop_back();
    d[id] = k;
    for (const auto& c : t.node(id).children) stack.push_back({c, k + 1});
  }
  return d;
}

const char* kTiny = R"({"roots":["a"],"nodes":[
  {"id":"a","icon":"a.svg","labels":{"en":"A"},"children":["b"]},
  {"id":"b","icon":"b.svg","labels":{"en":"B"},"entry":"kb-b"}]})";

}  // namespace

TEST_CASE("shipped taxonomy shape") {
  Fixture f;
  CHECK(f.tax.node_count() == 20);
  CHECK(f.tax.roots() == std::vector<std::string>{"rice", "wheat"});
  auto d = depths(f.tax);
  CHECK(d.size() == 20);
  int leaves = 0;
  for (const auto& n : f.tax.nodes()) {
    const bool leaf = n.children.empty();
    CHECK(leaf == n.entry_id.has_value());
    CHECK(n.labels.count("en") == 1);
    CHECK(std::filesystem::exists(data_file(n.icon_asset)));
    if (!leaf) continue;
    ++leaves;
    // One tap per level reaches the leaf.
    CHECK(d[n.id] == 3);
    CHECK(f.tax.path_to(n.id).node_ids.size() == 3);
  }
  CHECK(leaves == 12);
  CHECK(check_integrity(f.tax, f.kb).empty());
}

TEST_CASE("children are ordered and root is virtual") {
  Fixture f;
  auto top = f.tax.children(kRootId);
  REQUIRE(top.size() == 2);
  CHECK(top[0].id == "rice");
  auto kids = f.tax.children("rice-disease");
  REQUIRE(kids.size() == 2);
  CHECK(kids[0].id == "leaf-blast");
  CHECK(kids[1].id == "brown-spot");
  CHECK(f.tax.children("leaf-blast").empty());
  CHECK(code_of([&] { f.tax.children("maize"); }) == ErrorCode::UnknownNode);
  CHECK(f.tax.path_to("brown-spot").node_ids == std::vector<std::string>{"rice", "rice-disease", "brown-spot"});
}

TEST_CASE("structural taxonomy errors") {
  CHECK_NOTHROW(Taxonomy::from_json(kTiny));
  CHECK(code_of([] {
          Taxonomy::from_json(R"({"roots":["a"],"nodes":[{"id":"a","icon":"a.svg","children":["zz"]}]})");
        }) == ErrorCode::DanglingChild);
  CHECK(code_of([] {
          Taxonomy::from_json(R"({"roots":["a"],"nodes":[
            {"id":"a","icon":"a","children":["b"]},
            {"id":"b","icon":"b","children":["c"]},
            {"id":"c","icon":"c","children":["b"]}]})");
        }) == ErrorCode::CycleDetected);
  CHECK(code_of([] {
          Taxonomy::from_json(R"({"roots":["a"],"nodes":[{"id":"a","icon":"a","children":["b"]},{"id":"b","icon":"b"}]})");
        }) == ErrorCode::LeafWithoutEntry);
  CHECK(code_of([] {
          Taxonomy::from_json(R"({"roots":["a"],"nodes":[{"id":"a","icon":"a","entry":"x"},{"id":"a","icon":"a","entry":"y"}]})");
        }) == ErrorCode::InvalidTaxonomy);
  CHECK(code_of([] {
          Taxonomy::from_json(R"({"roots":["a"],"nodes":[{"id":"a","icon":"a","entry":"x"},{"id":"b","icon":"b","entry":"y"}]})");
        }) == ErrorCode::InvalidTaxonomy);
  CHECK(code_of([] {
          Taxonomy::from_json(R"({"roots":["a","b"],"nodes":[
            {"id":"a","icon":"a","children":["c"]},{"id":"b","icon":"b","children":["c"]},
            {"id":"c","icon":"c","entry":"x"}]})");
        }) == ErrorCode::InvalidTaxonomy);
  CHECK(code_of([] { Taxonomy::from_json("{not json"); }) == ErrorCode::InvalidTaxonomy);
  CHECK(code_of([] { Taxonomy::load("/no/such/taxonomy.json"); }) == ErrorCode::IoError);
}

TEST_CASE("query paths") {
  Fixture f;
  auto q = build_query(f.tax, {{"rice", "rice-disease", "leaf-blast"}});
  CHECK(q.topic_keys == std::vector<std::string>{"rice", "rice-disease", "leaf-blast"});
  CHECK(code_of([&] { build_query(f.tax, {}); }) == ErrorCode::InvalidPath);
  CHECK(code_of([&] { build_query(f.tax, {{"rice-disease", "leaf-blast"}}); }) == ErrorCode::InvalidPath);
  CHECK(code_of([&] { build_query(f.tax, {{"rice", "leaf-blast"}}); }) == ErrorCode::InvalidPath);
  CHECK(code_of([&] { build_query(f.tax, {{"wheat", "rice-disease"}}); }) == ErrorCode::InvalidPath);
  CHECK(code_of([&] { build_query(f.tax, {{"rice", "nope"}}); }) == ErrorCode::InvalidPath);
}

TEST_CASE("retrieval picks the locale or falls back") {
  Fixture f;
  auto q = build_query(f.tax, f.tax.path_to("leaf-blast"));
  auto hi = f.kb.retrieve(q, "hi");
  CHECK(hi.entry_id == "kb-leaf-blast");
  CHECK(hi.locale == "hi");
  CHECK_FALSE(hi.fallback);
  CHECK(hi.updated_at.size() >= 10);

  auto potash = f.kb.retrieve(build_query(f.tax, f.tax.path_to("rice-potash")), "hi");
  CHECK(potash.locale == "en");
  CHECK(potash.fallback);
  CHECK(potash.content == f.kb.find_by_id("kb-rice-potash")->content.at("en"));

  auto fr = f.kb.retrieve(q, "fr");
  CHECK(fr.locale == "en");
  CHECK(fr.fallback);

  // A valid inner path has no entry of its own.
  auto inner = build_query(f.tax, {{"rice", "rice-disease"}});
  CHECK(code_of([&] { f.kb.retrieve(inner, "en"); }) == ErrorCode::NotFound);
}

TEST_CASE("every leaf resolves to its own entry") {
  Fixture f;
  for (const auto& n : f.tax.nodes()) {
    if (!n.entry_id) continue;
    auto r = f.kb.retrieve(build_query(f.tax, f.tax.path_to(n.id)), "en");
    CHECK(r.entry_id == *n.entry_id);
  }
}

TEST_CASE("integrity problems are reported") {
  auto tax = Taxonomy::from_json(kTiny);
  auto missing = KnowledgeBase::from_json("[]", "en");
  auto issues = check_integrity(tax, missing);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].node_id == "b");
  auto wrong_keys = KnowledgeBase::from_json(R"([{"id":"kb-b","topic_keys":["a"],"content":{"en":"x"}}])", "en");
  CHECK(check_integrity(tax, wrong_keys).size() == 1);
  auto good = KnowledgeBase::from_json(R"([{"id":"kb-b","topic_keys":["a","b"],"content":{"en":"x"}}])", "en");
  CHECK(check_integrity(tax, good).empty());
  CHECK(code_of([] { KnowledgeBase::from_json(R"([{"id":"k","topic_keys":["a"],"content":{"hi":"x"}}])", "en"); }) ==
        ErrorCode::InvalidTaxonomy);
}

TEST_CASE("faq localization") {
  Fixture f;
  CHECK(f.faq.size() == 3);
  auto hi = f.faq.list("hi");
  REQUIRE(hi.size() == 3);
  CHECK(hi[0].locale == "hi");
  CHECK_FALSE(hi[0].fallback);
  CHECK(hi[2].id == "faq-help");
  CHECK(hi[2].locale == "en");
  CHECK(hi[2].fallback);
  for (const auto& item : f.faq.list("en")) CHECK_FALSE(item.fallback);
}

TEST_CASE("localize") {
  LocalizedText t{{"en", "hello"}, {"hi", "namaste"}};
  CHECK(localize(t, "hi", "en")->text == "namaste");
  auto fb = localize(t, "fr", "en");
  CHECK(fb->locale == "en");
  CHECK(fb->fallback);
  CHECK_FALSE(localize(LocalizedText{{"hi", "x"}}, "fr", "en").has_value());
}

TEST_CASE("catalog swaps snapshots without disturbing readers") {
  Fixture f;
  auto first = std::make_shared<const CatalogSnapshot>(CatalogSnapshot{f.tax, f.kb, f.faq});
  Catalog cat(first);
  auto held = cat.snapshot();
  auto tiny = std::make_shared<const CatalogSnapshot>(
      CatalogSnapshot{Taxonomy::from_json(kTiny), KnowledgeBase::from_json("[]", "en"), FaqStore::from_json("[]", "en")});
  cat.replace(tiny);
  CHECK(held->taxonomy.node_count() == 20);
  CHECK(cat.snapshot()->taxonomy.node_count() == 2);
}

TEST_CASE("small worked cases") {
  Fixture f;
  CHECK(build_query(f.tax, {{"rice"}}).topic_keys == std::vector<std::string>{"rice"});
  CHECK(code_of([] {
          Taxonomy::from_json(R"({"roots":["a"],"nodes":[{"id":"a","icon":"a","children":["a"]}]})");
        }) == ErrorCode::CycleDetected);
  CHECK(FaqStore::from_json("[]", "en").list("hi").empty());
  auto en = f.faq.list("en");
  CHECK(en.size() == 3);
}
