#include <gtest/gtest.h>

#include "dshelf/corpus.hpp"
#include "dshelf/error.hpp"
#include "dshelf/text.hpp"
#include "json.hpp"
#include "test_support.hpp"

using namespace dshelf;

TEST(Corpus, DeterministicPerSeed) {
  CorpusSpec spec;
  spec.item_count = 200;
  spec.user_count = 30;
  dshelf::testing::TempDir a, b;
  write_corpus(generate_corpus(spec), a.path());
  write_corpus(generate_corpus(spec), b.path());
  for (const char* f : {"items.jsonl", "descriptors.jsonl", "interactions.jsonl", "lexicon.jsonl", "genre_map.json"})
    EXPECT_EQ(read_file(a / f), read_file(b / f)) << f;
  spec.seed = 7;
  dshelf::testing::TempDir c;
  write_corpus(generate_corpus(spec), c.path());
  EXPECT_NE(read_file(a / "descriptors.jsonl"), read_file(c / "descriptors.jsonl"));
}

TEST(Corpus, EmptyCatalog) {
  CorpusSpec spec;
  spec.item_count = 0;
  const auto c = generate_corpus(spec);
  EXPECT_TRUE(c.items.empty());
  EXPECT_TRUE(c.descriptors.empty());
  EXPECT_TRUE(c.interactions.empty());
}

// Counts the written files with plain JSON parsing, independent of the
// generator's in-memory structures.
TEST(Corpus, DefaultSeedMatchesContract) {
  const CorpusSpec spec;
  dshelf::testing::TempDir dir;
  write_corpus(generate_corpus(spec), dir.path());

  std::map<std::string, std::map<std::string, std::set<std::string>>> per_item;  // item -> type -> canon
  std::map<std::string, std::map<std::string, std::size_t>> df;                  // type -> canon -> items
  std::size_t items = 0;
  for_each_line(dir / "items.jsonl", [&](std::size_t, const std::string&) { ++items; });
  for_each_line(dir / "descriptors.jsonl", [&](std::size_t, const std::string& line) {
    const auto j = nlohmann::json::parse(line);
    const std::string type = j["type"], canon = canonicalize(j["text"].get<std::string>());
    if (per_item[j["item_id"]][type].insert(canon).second) ++df[type][canon];
  });
  EXPECT_EQ(items, spec.item_count);

  for (auto t : kAllDescriptorTypes) {
    const auto i = static_cast<std::size_t>(t);
    const std::string name(to_string(t));
    EXPECT_LE(df[name].size(), spec.vocabulary[i]) << name;
    for (const auto& [item, types] : per_item) {
      auto it = types.find(name);
      const std::size_t n = it == types.end() ? 0 : it->second.size();
      EXPECT_LE(n, spec.per_item[i].max) << item << " " << name;
    }
    if (spec.per_item[i].min > 0) {
      // every item carries at least min of this type
      std::size_t carrying = 0;
      for (const auto& [item, types] : per_item) carrying += types.count(name) ? types.at(name).size() >= spec.per_item[i].min : 0;
      EXPECT_EQ(carrying, spec.item_count) << name;
    }
  }
  // Zipf-like popularity: the most common Theme covers far more items than the median one
  std::vector<std::size_t> theme_df;
  for (const auto& [canon, n] : df["Theme"]) theme_df.push_back(n);
  std::sort(theme_df.rbegin(), theme_df.rend());
  ASSERT_GT(theme_df.size(), 10u);
  EXPECT_GT(theme_df.front(), 5 * theme_df[theme_df.size() / 2]);

  std::set<std::string> users;
  for_each_line(dir / "interactions.jsonl", [&](std::size_t, const std::string& line) {
    const auto j = nlohmann::json::parse(line);
    users.insert(j["user_id"].get<std::string>());
    EXPECT_GE(j["weight"].get<double>(), 1.0);
    EXPECT_LE(j["weight"].get<double>(), 5.0);
  });
  EXPECT_EQ(users.size(), spec.user_count);
}

TEST(Corpus, SpecValidation) {
  CorpusSpec spec;
  spec.interests_per_user = {3, 1};
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = CorpusSpec{};
  spec.zipf_exponent = -1;
  EXPECT_THROW(spec.validate(), ConfigError);
}
