#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dshelf/catalog.hpp"
#include "dshelf/embedding.hpp"

namespace dshelf {

struct Interaction {
  UserId user;
  ItemId item;
  double weight = 1.0;  // >= 0
};

struct UserProfile {
  UserId user;
  EmbeddingVector embedding;  // unit norm, or zero for cold start
};

struct ScoredItem {
  ItemId item;
  double score = 0.0;

  bool operator==(const ScoredItem&) const = default;
};

/// Per-user top-K recommendations: score non-increasing, ties by ascending id.
struct CandidateList {
  UserId user;
  std::vector<ScoredItem> entries;

  bool empty() const noexcept { return entries.empty(); }
};

/// True when `a` ranks before `b`: higher score first, then smaller id.
inline bool ranks_before(const ScoredItem& a, const ScoredItem& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  return a.item < b.item;
}

/// embed_text over title, description and genre codes.
EmbeddingVector item_content_embedding(const Item& item, Eigen::Index dim = kDefaultEmbeddingDim);

/// Row-per-item embedding matrix in ascending item id order.
class ContentIndex {
 public:
  ContentIndex() = default;
  ContentIndex(std::vector<ItemId> ids, Eigen::MatrixXd embeddings);

  static ContentIndex build(const Catalog& catalog, Eigen::Index dim = kDefaultEmbeddingDim);

  const std::vector<ItemId>& ids() const noexcept { return ids_; }
  const Eigen::MatrixXd& embeddings() const noexcept { return embeddings_; }
  Eigen::Index dim() const noexcept { return embeddings_.cols(); }
  std::size_t size() const noexcept { return ids_.size(); }

  /// Throws DataError for unknown ids.
  Eigen::Index row(const ItemId& id) const;

 private:
  std::vector<ItemId> ids_;
  std::map<ItemId, Eigen::Index> rows_;
  Eigen::MatrixXd embeddings_;
};

/// Weighted mean of interacted items' embeddings, renormalized. Zero vector for
/// an empty or all-zero-weight history. Throws DataError for unknown items or
/// negative weights.
UserProfile build_profile(const UserId& user, const std::vector<Interaction>& history,
                          const ContentIndex& index);
UserProfile build_profile(const UserId& user, const std::vector<Interaction>& history,
                          const Catalog& catalog, Eigen::Index dim = kDefaultEmbeddingDim);

/// Scores every indexed item by inner product with the profile and keeps the
/// best K. A zero profile yields the first K ids ascending with score 0.
CandidateList top_k(const UserProfile& profile, const ContentIndex& index, std::size_t k);
CandidateList top_k(const UserProfile& profile, const Catalog& catalog, std::size_t k);

/// Seam for swapping the candidate generator.
class Recommender {
 public:
  virtual ~Recommender() = default;
  virtual CandidateList recommend(const UserId& user, const std::vector<Interaction>& history,
                                  std::size_t k) const = 0;
};

/// Content-embedding dot-product recommender.
class ContentRecommender final : public Recommender {
 public:
  explicit ContentRecommender(ContentIndex index) : index_(std::move(index)) {}
  CandidateList recommend(const UserId& user, const std::vector<Interaction>& history,
                          std::size_t k) const override;
  const ContentIndex& index() const noexcept { return index_; }

 private:
  ContentIndex index_;
};

/// Interactions grouped by user (ascending user id). Throws DataError on
/// malformed records.
std::map<UserId, std::vector<Interaction>> read_interactions(const std::filesystem::path& path);

std::string interaction_to_json_line(const Interaction& in);

}  // namespace dshelf
