#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "dshelf/affinity.hpp"
#include "dshelf/catalog.hpp"
#include "dshelf/extraction.hpp"

namespace dshelf {

struct CountRange {
  std::size_t min = 0;
  std::size_t max = 0;
};

/// Parameters of the seeded synthetic corpus.
struct CorpusSpec {
  std::uint64_t seed = 42;
  std::size_t item_count = 1000;
  std::size_t user_count = 200;
  /// Distinct descriptors available per type (clamped to the word bank).
  std::array<std::size_t, kDescriptorTypeCount> vocabulary = {20, 120, 40, 25, 60, 40, 50, 8, 30, 80};
  /// Descriptors drawn per item per type.
  std::array<CountRange, kDescriptorTypeCount> per_item = {{
      {1, 2}, {1, 3}, {0, 2}, {1, 2}, {0, 1}, {0, 1}, {0, 2}, {0, 1}, {0, 1}, {0, 1},
  }};
  /// Exponent s of the Zipf-like popularity weights 1 / (rank + 1)^s.
  double zipf_exponent = 1.0;
  CountRange interests_per_user = {1, 3};
  CountRange interactions_per_user = {3, 12};
  /// Extra interactions per user drawn from overall item popularity (same exponent).
  CountRange mainstream_per_user = {1, 3};

  void validate() const;
};

struct Corpus {
  std::vector<Item> items;
  std::map<ItemId, DescriptorSet> descriptors;
  std::vector<Interaction> interactions;  // ascending (user, item)
  /// Vocabulary in popularity order (rank 0 first), per type.
  std::array<std::vector<std::string>, kDescriptorTypeCount> vocabulary;
  std::map<std::string, std::string> genre_code_map;
  std::vector<LexiconEntry> lexicon;
};

/// Deterministic for a given spec: same seed, same bytes.
Corpus generate_corpus(const CorpusSpec& spec);

/// Names of the files write_corpus produces inside a directory.
struct CorpusFiles {
  static constexpr const char* kItems = "items.jsonl";
  static constexpr const char* kDescriptors = "descriptors.jsonl";
  static constexpr const char* kInteractions = "interactions.jsonl";
  static constexpr const char* kLexicon = "lexicon.jsonl";
  static constexpr const char* kGenreMap = "genre_map.json";
};

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

}  // namespace dshelf
