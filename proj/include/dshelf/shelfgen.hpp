#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dshelf/affinity.hpp"
#include "dshelf/catalog.hpp"
#include "dshelf/embedding.hpp"
#include "dshelf/templates.hpp"

namespace dshelf {

struct ShelfConfig {
  std::vector<TemplateSpec> enabled_templates = default_templates();
  std::size_t N = 5;             // shelves per page
  double tau = 0.8;              // diversification threshold on title cosine
  std::size_t min_items = 3;
  std::size_t max_items = 20;
  double idf_smoothing = 1.0;
  DecorationConfig decoration;
  Eigen::Index embedding_dim = kDefaultEmbeddingDim;
  bool dedup_items_across_shelves = false;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

struct TitleScored {
  TitleCandidate title;
  std::string key;                // canonical display
  std::set<ItemId> support;       // candidate items carrying every source descriptor
  double relevance = 0.0;
  EmbeddingVector title_embedding;
};

struct Shelf {
  DecoratedTitle title;
  std::vector<ScoredItem> items;
  std::optional<TitleCandidate> source;  // empty for the generic baseline shelf
};

struct ShelfPage {
  UserId user;
  std::vector<Shelf> shelves;
};

/// True when the item's descriptors include every source descriptor.
bool carries_all(const DescriptorSet& set, const std::vector<Descriptor>& source);

/// Distinct title candidates over the candidate items, merged by canonical
/// display. Drops titles failing decoration or with support < min_items.
/// Order is first appearance along the candidate list.
std::vector<TitleScored> collect_title_candidates(const CandidateList& cl, const Catalog& catalog,
                                                  const ShelfConfig& cfg);

/// idf = ln(|catalog| / (smoothing + max document frequency of the sources)).
double title_idf(const TitleCandidate& title, const Catalog& catalog, double smoothing);

/// relevance = (sum of candidate scores over support) * idf. Sorted by
/// relevance descending, ties by canonical display ascending.
std::vector<TitleScored> rank_titles(std::vector<TitleScored> candidates, const CandidateList& cl,
                                     const Catalog& catalog, const ShelfConfig& cfg);

/// Greedy threshold scan in rank order: keep a title iff its cosine similarity
/// to every kept title is < tau. Stops after N kept.
std::vector<TitleScored> diversify_titles(const std::vector<TitleScored>& ranked, double tau,
                                          std::size_t N);

/// Candidate items carrying all source descriptors, in candidate order,
/// truncated to max_items. nullopt below min_items or if decoration fails.
/// Items in `exclude` are skipped.
std::optional<Shelf> populate_shelf(const TitleScored& title, const CandidateList& cl,
                                    const Catalog& catalog, const ShelfConfig& cfg,
                                    const std::set<ItemId>& exclude = {});

/// collect -> rank -> diversify -> populate -> decorate, first N accepted
/// shelves. Titles whose shelf is rejected do not block later titles.
ShelfPage generate_page(const UserId& user, const CandidateList& cl, const Catalog& catalog,
                        const ShelfConfig& cfg);

/// One NDJSON line: {"user_id", "shelves": [{"header","title","items":[{"item_id","score"}]}]}
std::string page_to_json_line(const ShelfPage& page);

}  // namespace dshelf
