#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dshelf/affinity.hpp"
#include "dshelf/catalog.hpp"
#include "dshelf/shelfgen.hpp"

namespace dshelf {

inline constexpr const char* kGenericShelfTitle = "Audiobooks for you";

struct SlotBudget {
  std::size_t shelves_visible = 5;
  std::size_t slots_per_shelf = 10;

  std::size_t total() const noexcept { return shelves_visible * slots_per_shelf; }
  void validate() const;
};

/// A single generic shelf holding the top shelves_visible * slots_per_shelf
/// candidates, so it spends exactly the treatment's slot budget.
ShelfPage baseline_page(const CandidateList& cl, const SlotBudget& budget);

struct ExposedShelf {
  std::string title;                // displayed title
  std::string embedding_text;       // text the title embedding is computed from
  std::vector<Descriptor> source;   // empty for the generic shelf
  std::vector<ItemId> items;
};

struct ExposureLog {
  std::map<UserId, std::vector<ExposedShelf>> users;
};

/// Deterministic impression model: the first shelves_visible shelves, the
/// first slots_per_shelf items of each.
ExposureLog simulate_exposure(const std::vector<ShelfPage>& pages, const SlotBudget& budget);

struct EvalReport {
  std::string variant;
  std::size_t users = 0;
  std::size_t distinct_items_impressed = 0;
  std::size_t distinct_titles_global = 0;
  double mean_distinct_titles_per_user = 0.0;
  double catalog_coverage = 0.0;
  /// 1 - mean pairwise title cosine, pooled over all within-page pairs; 0 when
  /// no page shows two shelves.
  double mean_inter_shelf_title_distance = 0.0;
  std::size_t title_pairs = 0;
  double coherence = 1.0;
};

struct ComparisonReport {
  EvalReport treatment;
  EvalReport baseline;
  /// treatment / baseline per metric; nullopt where the baseline is zero.
  std::map<std::string, std::optional<double>> deltas;
};

EvalReport summarize_exposure(const std::string& variant, const ExposureLog& log, const Catalog& catalog,
                              Eigen::Index embedding_dim = kDefaultEmbeddingDim);

/// Throws DataError when the logs cover different user sets.
ComparisonReport compute_report(const ExposureLog& treatment, const ExposureLog& baseline,
                                const Catalog& catalog, Eigen::Index embedding_dim = kDefaultEmbeddingDim);

std::string report_to_json(const ComparisonReport& report);

/// Plain-text table using the live A/B row labels; engagement rows read
/// "n/a offline".
std::string report_to_table(const ComparisonReport& report);

}  // namespace dshelf
