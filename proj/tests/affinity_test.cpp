#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "dshelf/affinity.hpp"
#include "dshelf/error.hpp"
#include "test_support.hpp"

using namespace dshelf;

namespace {

// Independent scorer: plain loops, full sort.
std::vector<ScoredItem> brute_force(const std::vector<ItemId>& ids, const std::vector<std::vector<double>>& rows,
                                    const std::vector<double>& profile, std::size_t k) {
  std::vector<ScoredItem> all;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    double s = 0;
    for (std::size_t j = 0; j < profile.size(); ++j) s += rows[i][j] * profile[j];
    all.push_back({ids[i], s});
  }
  std::sort(all.begin(), all.end(), [](const ScoredItem& a, const ScoredItem& b) {
    return a.score != b.score ? a.score > b.score : a.item < b.item;
  });
  all.resize(std::min(k, all.size()));
  return all;
}

ContentIndex index_from(const std::vector<ItemId>& ids, const std::vector<std::vector<double>>& rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.at(0).size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return ContentIndex(ids, m);
}

Catalog small_catalog() {
  std::vector<Item> items = {
      {"a", "Sea Stories", {}, "Sailors lost at sea in a storm off the coast of Maine.", {"FIC000000"}},
      {"b", "More Sea Stories", {}, "Sailors lost at sea in a storm off the coast of Maine, again.", {"FIC000000"}},
      {"c", "Tax Basics", {}, "Quarterly filings for small business owners.", {"BUS000000"}},
  };
  return Catalog::build(items, std::map<ItemId, DescriptorSet>{});
}

}  // namespace

TEST(ContentEmbedding, EmptyAndDeterministic) {
  const Item empty{"e", "", {}, "", {}};
  EXPECT_TRUE(item_content_embedding(empty).isZero(0));
  const Item a{"a", "Wonder", {"R. J. Palacio"}, "A boy starts school.", {"JUV000000"}};
  Item b = a;
  b.id = "b";
  EXPECT_EQ(item_content_embedding(a), item_content_embedding(b));
  EXPECT_TRUE(is_unit_or_zero(item_content_embedding(a)));
}

TEST(ContentEmbedding, SharedPrefixIsCloser) {
  const Catalog c = small_catalog();
  const auto ea = item_content_embedding(c.item("a"));
  const auto eb = item_content_embedding(c.item("b"));
  const auto ec = item_content_embedding(c.item("c"));
  const double near_ab = cosine_similarity(ea, eb);
  const double far_ac = cosine_similarity(ea, ec);
  EXPECT_GT(near_ab, far_ac);
  EXPECT_GT(near_ab, 0.8);
}

TEST(Profile, WeightedMeanHandComputed) {
  // e1 = (0.6, 0.8, 0, 0), e2 = (0, 0, 0.6, 0.8); 1*e1 + 3*e2 = (0.6, 0.8, 1.8, 2.4), norm sqrt(10)
  const auto idx = index_from({"i1", "i2"}, {{0.6, 0.8, 0, 0}, {0, 0, 0.6, 0.8}});
  const auto p = build_profile("u", {{"u", "i1", 1.0}, {"u", "i2", 3.0}}, idx);
  const double n = std::sqrt(10.0);
  EXPECT_NEAR(p.embedding[0], 0.6 / n, 1e-15);
  EXPECT_NEAR(p.embedding[1], 0.8 / n, 1e-15);
  EXPECT_NEAR(p.embedding[2], 1.8 / n, 1e-15);
  EXPECT_NEAR(p.embedding[3], 2.4 / n, 1e-15);
}

TEST(Profile, SingleEmptyAndErrors) {
  const auto idx = index_from({"i1", "i2"}, {{0.6, 0.8, 0, 0}, {0, 0, 0.6, 0.8}});
  EXPECT_TRUE(build_profile("u", {{"u", "i1", 1.0}}, idx).embedding.isApprox(idx.embeddings().row(0).transpose()));
  EXPECT_TRUE(build_profile("u", {}, idx).embedding.isZero(0));
  EXPECT_TRUE(build_profile("u", {{"u", "i1", 0.0}}, idx).embedding.isZero(0));
  try {
    build_profile("u", {{"u", "nope", 1.0}}, idx);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("nope"), std::string::npos);
  }
  EXPECT_THROW(build_profile("u", {{"u", "i1", -1.0}}, idx), DataError);
}

TEST(Profile, ScaleInvariance) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> w(0.0, 5.0), c(0.01, 1000.0);
  const Catalog cat = small_catalog();
  const auto idx = ContentIndex::build(cat);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Interaction> h;
    for (const auto& id : {"a", "b", "c"}) h.push_back({"u", id, w(rng)});
    const double scale = c(rng);
    auto scaled = h;
    for (auto& in : scaled) in.weight *= scale;
    EXPECT_TRUE(build_profile("u", h, idx).embedding.isApprox(build_profile("u", scaled, idx).embedding, 1e-12));
  }
}

TEST(TopK, ClampSelfAndColdStart) {
  const Catalog cat = small_catalog();
  const auto idx = ContentIndex::build(cat);
  const UserProfile self{"u", idx.embeddings().row(idx.row("c")).transpose()};
  const auto cl = top_k(self, idx, 5);
  ASSERT_EQ(cl.entries.size(), 3u);
  EXPECT_EQ(cl.entries[0].item, "c");
  EXPECT_NEAR(cl.entries[0].score, 1.0, 1e-12);

  const UserProfile cold{"u", EmbeddingVector::Zero(idx.dim())};
  const auto cc = top_k(cold, idx, 2);
  ASSERT_EQ(cc.entries.size(), 2u);
  EXPECT_EQ(cc.entries[0], (ScoredItem{"a", 0.0}));
  EXPECT_EQ(cc.entries[1], (ScoredItem{"b", 0.0}));
  EXPECT_THROW(top_k(cold, idx, 0), std::invalid_argument);
}

TEST(TopK, TenItemToyOracle) {
  // hand-built 3-d embeddings, includes an exact tie (i03 and i07)
  const std::vector<ItemId> ids = {"i00", "i01", "i02", "i03", "i04", "i05", "i06", "i07", "i08", "i09"};
  const std::vector<std::vector<double>> rows = {
      {1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0.6, 0.8, 0}, {0.8, 0.6, 0},
      {0, 0.6, 0.8}, {-1, 0, 0}, {0.6, 0.8, 0}, {0.28, 0.96, 0}, {0, -0.6, 0.8}};
  const auto idx = index_from(ids, rows);
  const UserProfile p{"u", Eigen::Vector3d(0.48, 0.6, 0.64)};
  const auto cl = top_k(p, idx, 10);
  const auto oracle = brute_force(ids, rows, {0.48, 0.6, 0.64}, 10);
  ASSERT_EQ(cl.entries.size(), oracle.size());
  for (std::size_t i = 0; i < oracle.size(); ++i) {
    EXPECT_EQ(cl.entries[i].item, oracle[i].item) << "rank " << i;
    EXPECT_NEAR(cl.entries[i].score, oracle[i].score, 1e-12);
  }
  // frozen expectation from the hand computation: i05 (0.872), then i03/i07 tie (0.768) by id
  EXPECT_EQ(cl.entries[0].item, "i05");
  EXPECT_EQ(cl.entries[1].item, "i03");
  EXPECT_EQ(cl.entries[2].item, "i07");
}

TEST(TopK, MatchesExhaustiveOracleProperty) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    const std::size_t n = 1 + rng() % 50;
    const std::size_t d = 2 + rng() % 16;
    std::vector<ItemId> ids;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < n; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof buf, "it%03zu", (i * 37) % 1000);
      ids.push_back(buf);
      if (i > 0 && rng() % 5 == 0) {
        rows.push_back(rows[rng() % i]);  // duplicate row forces a score tie
      } else {
        std::vector<double> r(d);
        for (auto& x : r) x = g(rng);
        rows.push_back(r);
      }
    }
    // ContentIndex wants ids ascending
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ids[a] < ids[b]; });
    std::vector<ItemId> sids;
    std::vector<std::vector<double>> srows;
    for (auto i : order) {
      if (!sids.empty() && sids.back() == ids[i]) continue;
      sids.push_back(ids[i]);
      srows.push_back(rows[i]);
    }
    std::vector<double> prof(d);
    for (auto& x : prof) x = g(rng);
    Eigen::VectorXd pe(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) pe[j] = prof[j];
    const std::size_t k = 1 + rng() % 60;

    const auto cl = top_k(UserProfile{"u", pe}, index_from(sids, srows), k);
    const auto oracle = brute_force(sids, srows, prof, k);
    ASSERT_EQ(cl.entries.size(), oracle.size()) << "seed " << seed;
    for (std::size_t i = 0; i < oracle.size(); ++i) {
      ASSERT_EQ(cl.entries[i].item, oracle[i].item) << "seed " << seed << " rank " << i;
      ASSERT_NEAR(cl.entries[i].score, oracle[i].score, 1e-12);
    }
    for (std::size_t i = 1; i < cl.entries.size(); ++i)
      EXPECT_TRUE(ranks_before(cl.entries[i - 1], cl.entries[i]));
    EXPECT_EQ(cl.entries, top_k(UserProfile{"u", pe}, index_from(sids, srows), k).entries);
  }
}

TEST(Interactions, ReadGroupsByUser) {
  dshelf::testing::TempDir dir;
  write_file(dir / "in.jsonl", interaction_to_json_line({"u2", "a", 2.0}) + "\n" +
                                   interaction_to_json_line({"u1", "b", 1.5}) + "\n" +
                                   interaction_to_json_line({"u2", "c", 0.0}) + "\n");
  const auto m = read_interactions(dir / "in.jsonl");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m.begin()->first, "u1");
  EXPECT_EQ(m.at("u2").size(), 2u);
  write_file(dir / "bad.jsonl", R"({"user_id":"u","item_id":"a","weight":-1})"
                                "\n");
  EXPECT_THROW(read_interactions(dir / "bad.jsonl"), DataError);
}
