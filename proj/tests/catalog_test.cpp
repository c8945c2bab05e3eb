#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "dshelf/catalog.hpp"
#include "dshelf/embedding.hpp"
#include "dshelf/error.hpp"
#include "dshelf/text.hpp"
#include "test_support.hpp"

using namespace dshelf;
using dshelf::testing::TempDir;

TEST(Canonicalize, Examples) {
  EXPECT_EQ(canonicalize("  Enemies  to Lovers "), "enemies to lovers");
  EXPECT_EQ(canonicalize("china's cultural revolution"), "china's cultural revolution");
  EXPECT_EQ(canonicalize(""), "");
  EXPECT_EQ(canonicalize(" \t\n "), "");
  // diacritics are left alone
  EXPECT_EQ(canonicalize("Caf\xc3\xa9  Noir"), "caf\xc3\xa9 noir");
}

TEST(Canonicalize, IdempotentAndTidy) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const std::string raw = dshelf::testing::random_messy_text(rng);
    const std::string once = canonicalize(raw);
    EXPECT_EQ(canonicalize(once), once) << "input: [" << raw << "]";
    if (!once.empty()) {
      EXPECT_NE(once.front(), ' ');
      EXPECT_NE(once.back(), ' ');
    }
    EXPECT_EQ(once.find("  "), std::string::npos);
    EXPECT_EQ(once.find_first_of("\t\n\r"), std::string::npos);
  }
}

TEST(Descriptor, EqualityFollowsCanonicalForm) {
  const Descriptor a(DescriptorType::StoryTrope, "Enemies to Lovers");
  const Descriptor b(DescriptorType::StoryTrope, "  enemies  TO lovers");
  const Descriptor c(DescriptorType::Theme, "Enemies to Lovers");
  EXPECT_EQ(a, b);
  EXPECT_EQ(DescriptorHash{}(a), DescriptorHash{}(b));
  EXPECT_FALSE(a == c);
  EXPECT_EQ(b.display(), "enemies TO lovers");
  EXPECT_THROW(Descriptor(DescriptorType::Mood, "   "), std::invalid_argument);
}

TEST(Descriptor, TypeNamesRoundTrip) {
  std::set<std::string> names;
  for (auto t : kAllDescriptorTypes) {
    const std::string name(to_string(t));
    names.insert(name);
    ASSERT_EQ(parse_descriptor_type(name), t);
  }
  EXPECT_EQ(names.size(), 10u);
  EXPECT_FALSE(parse_descriptor_type("genre").has_value());
}

TEST(DescriptorSet, KeepsFirstOccurrence) {
  DescriptorSet s;
  EXPECT_TRUE(s.add({DescriptorType::Mood, "Uplifting"}));
  EXPECT_FALSE(s.add({DescriptorType::Mood, "UPLIFTING"}));
  EXPECT_TRUE(s.add({DescriptorType::Genre, "Uplifting"}));
  ASSERT_EQ(s.of(DescriptorType::Mood).size(), 1u);
  EXPECT_EQ(s.of(DescriptorType::Mood)[0].display(), "Uplifting");
  EXPECT_EQ(s.size(), 2u);
  EXPECT_TRUE(s.remove({DescriptorType::Mood, "uplifting"}));
  EXPECT_EQ(s.size(), 1u);
}

// Frozen from an independent FNV-1a / trigram script.
TEST(Embedding, HashOracle) {
  EXPECT_EQ(fnv1a64("emo"), 0xc2ec1a18f04f8e48ULL);
  EXPECT_EQ(fnv1a64("mot"), 0x080849191766f3b3ULL);
  EXPECT_EQ(fnv1a64("oti"), 0x19f4ba1921b9ced5ULL);
  auto f = hash_feature("emo", 64);
  EXPECT_EQ(f.bucket, 8);
  EXPECT_EQ(f.sign, -1);
  f = hash_feature("mot", 64);
  EXPECT_EQ(f.bucket, 51);
  EXPECT_EQ(f.sign, 1);
  f = hash_feature("oti", 64);
  EXPECT_EQ(f.bucket, 21);
  EXPECT_EQ(f.sign, 1);
}

TEST(Embedding, EmotionalRomanceComponents) {
  const auto v = embed_text("emotional romance", 64);
  ASSERT_EQ(v.size(), 64);
  const std::map<int, int> raw = {{0, -1}, {8, -1}, {15, 1}, {20, 1}, {21, 1}, {31, -1},
                                  {35, 2}, {40, -1}, {41, 1}, {45, 1}, {51, 1}, {56, 1}};
  const double norm = std::sqrt(15.0);
  for (int i = 0; i < 64; ++i) {
    const auto it = raw.find(i);
    const double expected = it == raw.end() ? 0.0 : it->second / norm;
    EXPECT_NEAR(v[i], expected, 1e-12) << "bucket " << i;
  }
}

TEST(Embedding, SimilarTitlesAreClose) {
  const auto a = embed_text("emotional romance");
  const auto b = embed_text("emotional romances");
  const auto c = embed_text("global politics");
  EXPECT_NEAR(cosine_similarity(a, b), 0.9682458365518539, 1e-12);
  EXPECT_NEAR(cosine_similarity(a, c), 0.0, 1e-12);
}

TEST(Embedding, DegenerateInputs) {
  EXPECT_TRUE(embed_text("", 64).isZero(0));
  EXPECT_TRUE(embed_text("ab", 64).isZero(0));
  EXPECT_TRUE(embed_text("  a  ", 64).isZero(0));
  EXPECT_THROW(embed_text("abc", 1), std::invalid_argument);
  EXPECT_EQ(embed_text("Same Text", 32), embed_text("same   text", 32));
}

TEST(Embedding, FloatScalar) {
  const Embedding<float> f = embed_text<float>("emotional romance", 64);
  const EmbeddingVector d = embed_text("emotional romance", 64);
  EXPECT_TRUE(f.cast<double>().isApprox(d, 1e-6));
}

TEST(Embedding, UnitOrZeroProperty) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 3000; ++i) {
    const auto text = dshelf::testing::random_messy_text(rng, 40);
    const Eigen::Index dim = 2 + static_cast<Eigen::Index>(rng() % 200);
    const auto v = embed_text(text, dim);
    ASSERT_TRUE(is_unit_or_zero(v, 1e-6)) << "[" << text << "] dim " << dim;
  }
}

TEST(Cosine, IdentityOrthogonalityAndZero) {
  const auto v = embed_text("overcoming obstacles");
  EXPECT_NEAR(cosine_similarity(v, v), 1.0, 1e-9);
  Eigen::VectorXd e1 = Eigen::VectorXd::Unit(5, 0), e2 = Eigen::VectorXd::Unit(5, 1);
  EXPECT_DOUBLE_EQ(cosine_similarity(e1, e2), 0.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(e1, Eigen::VectorXd::Zero(5)), 0.0);
  EXPECT_THROW(cosine_similarity(e1, Eigen::VectorXd::Zero(4)), std::invalid_argument);
}

TEST(Cosine, FixedPairOracle) {
  // a = (1,2,3,4)/sqrt(30), b = (2,0,1,5)/sqrt(30): dot = 25/30
  Eigen::Vector4d a(1, 2, 3, 4), b(2, 0, 1, 5);
  a /= std::sqrt(30.0);
  b /= std::sqrt(30.0);
  EXPECT_NEAR(cosine_similarity(a, b), 25.0 / 30.0, 1e-15);
}

TEST(Cosine, MatchesDirectSummation) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 100);
    std::vector<double> a(n), b(n);
    double na = 0, nb = 0;
    for (int i = 0; i < n; ++i) {
      a[i] = g(rng);
      b[i] = g(rng);
      na += a[i] * a[i];
      nb += b[i] * b[i];
    }
    double dot = 0;
    for (int i = 0; i < n; ++i) dot += (a[i] / std::sqrt(na)) * (b[i] / std::sqrt(nb));
    const Eigen::Map<Eigen::VectorXd> ea(a.data(), n), eb(b.data(), n);
    EXPECT_NEAR(cosine_similarity(ea, eb), dot, 1e-12);
  }
}

namespace {

void write(const std::filesystem::path& p, const std::string& s) { write_file(p, s); }

}  // namespace

TEST(LoadCatalog, TwoItemsOneTagged) {
  TempDir dir;
  write(dir / "items.jsonl",
        R"({"id":"a1","title":"Wonder","authors":["R. J. Palacio"],"description":"A boy.","genre_codes":["JUV000000"]})"
        "\n"
        R"({"id":"a2","title":"Other","authors":[],"description":"","genre_codes":[]})"
        "\n");
  write(dir / "descriptors.jsonl",
        R"({"item_id":"a1","type":"Genre","text":"Juvenile Fiction"})"
        "\n");
  const Catalog c = load_catalog(dir / "items.jsonl", dir / "descriptors.jsonl");
  EXPECT_EQ(c.size(), 2u);
  EXPECT_EQ(c.document_frequency(DescriptorType::Genre, "juvenile fiction"), 1u);
  EXPECT_EQ(c.document_frequency(DescriptorType::Genre, "Juvenile  Fiction"), 1u);
  EXPECT_EQ(c.item("a1").authors, std::vector<std::string>{"R. J. Palacio"});
  EXPECT_TRUE(c.descriptors("a2").empty());
}

TEST(LoadCatalog, EmptyDescriptorsFile) {
  TempDir dir;
  write(dir / "items.jsonl", R"({"id":"a1","title":"T","authors":[],"description":"","genre_codes":[]})"
                             "\n");
  write(dir / "descriptors.jsonl", "");
  const Catalog c = load_catalog(dir / "items.jsonl", dir / "descriptors.jsonl");
  for (auto t : kAllDescriptorTypes) EXPECT_TRUE(c.descriptors("a1").of(t).empty());
  EXPECT_TRUE(c.document_frequencies().empty());
}

TEST(LoadCatalog, DuplicateIdIsNamed) {
  TempDir dir;
  write(dir / "items.jsonl",
        R"({"id":"dup-7","title":"T","authors":[],"description":"","genre_codes":[]})"
        "\n"
        R"({"id":"dup-7","title":"U","authors":[],"description":"","genre_codes":[]})"
        "\n");
  write(dir / "descriptors.jsonl", "");
  try {
    load_catalog(dir / "items.jsonl", dir / "descriptors.jsonl");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("dup-7"), std::string::npos) << e.what();
  }
}

TEST(LoadCatalog, UnknownItemAndMalformedLines) {
  TempDir dir;
  write(dir / "items.jsonl", R"({"id":"a1","title":"T","authors":[],"description":"","genre_codes":[]})"
                             "\n");
  write(dir / "d1.jsonl", R"({"item_id":"a1","type":"Mood","text":"Calm"})"
                          "\n"
                          R"({"item_id":"ghost","type":"Mood","text":"Calm"})"
                          "\n");
  try {
    load_catalog(dir / "items.jsonl", dir / "d1.jsonl");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
    EXPECT_EQ(e.line(), 2u);
  }

  write(dir / "d2.jsonl", R"({"item_id":"a1","type":"Mood","text":"Calm"})"
                          "\n\n{not json\n");
  try {
    load_catalog(dir / "items.jsonl", dir / "d2.jsonl");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 3u);
  }

  write(dir / "d3.jsonl", R"({"item_id":"a1","type":"Vibe","text":"Calm"})"
                          "\n");
  EXPECT_THROW(load_catalog(dir / "items.jsonl", dir / "d3.jsonl"), DataError);

  write(dir / "bad_items.jsonl", R"({"id":"a1","title":"","authors":[],"description":"","genre_codes":[]})"
                                 "\n");
  EXPECT_THROW(read_items(dir / "bad_items.jsonl"), DataError);
  EXPECT_THROW(load_catalog(dir / "missing.jsonl", dir / "d1.jsonl"), DataError);
}

TEST(Catalog, DocumentFrequenciesMatchRecount) {
  std::mt19937_64 rng(5);
  const std::vector<std::string> words = {"Calm", "calm ", "Dark", "Hopeful", "Grief", "Found Family"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Item> items;
    std::vector<DescriptorRecord> records;
    const int n = 1 + static_cast<int>(rng() % 30);
    for (int i = 0; i < n; ++i) {
      items.push_back({"i" + std::to_string(i), "Title", {}, "", {}});
      const int k = static_cast<int>(rng() % 6);
      for (int j = 0; j < k; ++j) {
        const auto t = kAllDescriptorTypes[rng() % 3];
        records.push_back({items.back().id, t, words[rng() % words.size()]});
      }
    }
    const Catalog c = Catalog::build(items, records);
    EXPECT_EQ(c.document_frequencies(), count_document_frequencies(c.all_descriptors()));
    // hand count: items, not occurrences
    for (const auto& [key, df] : c.document_frequencies()) {
      std::size_t expect = 0;
      for (const auto& [id, set] : c.all_descriptors())
        if (set.contains(Descriptor(key.first, key.second))) ++expect;
      EXPECT_EQ(df, expect);
    }
  }
}

TEST(Catalog, JsonLinesRoundTrip) {
  TempDir dir;
  const Item item{"x", "Té \"q\"", {"A", "B"}, "desc", {"FIC000000"}};
  write(dir / "items.jsonl", item_to_json_line(item) + "\n");
  const auto back = read_items(dir / "items.jsonl");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], item);
}
