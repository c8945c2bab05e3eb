#include "dshelf/affinity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"

namespace dshelf {

using nlohmann::json;

EmbeddingVector item_content_embedding(const Item& item, Eigen::Index dim) {
  std::string text = item.title + " " + item.description;
  for (const auto& code : item.genre_codes) text += " " + code;
  return embed_text(text, dim);
}

ContentIndex::ContentIndex(std::vector<ItemId> ids, Eigen::MatrixXd embeddings)
    : ids_(std::move(ids)), embeddings_(std::move(embeddings)) {
  if (static_cast<Eigen::Index>(ids_.size()) != embeddings_.rows())
    throw std::invalid_argument("ContentIndex: id count does not match embedding rows");
  for (std::size_t i = 0; i < ids_.size(); ++i)
    if (!rows_.emplace(ids_[i], static_cast<Eigen::Index>(i)).second)
      throw DataError("ContentIndex: duplicate item id '" + ids_[i] + "'");
}

ContentIndex ContentIndex::build(const Catalog& catalog, Eigen::Index dim) {
  std::vector<ItemId> ids;
  Eigen::MatrixXd m(static_cast<Eigen::Index>(catalog.size()), dim);
  Eigen::Index r = 0;
  for (const auto& [id, item] : catalog.items()) {
    ids.push_back(id);
    m.row(r++) = item_content_embedding(item, dim).transpose();
  }
  return ContentIndex(std::move(ids), std::move(m));
}

Eigen::Index ContentIndex::row(const ItemId& id) const {
  auto it = rows_.find(id);
  if (it == rows_.end()) throw DataError("interaction references unknown item '" + id + "'");
  return it->second;
}

UserProfile build_profile(const UserId& user, const std::vector<Interaction>& history,
                          const ContentIndex& index) {
  EmbeddingVector acc = EmbeddingVector::Zero(index.dim());
  for (const auto& in : history) {
    if (!(in.weight >= 0.0) || !std::isfinite(in.weight))
      throw DataError("interaction of user '" + user + "' with '" + in.item + "' has a negative weight");
    acc.noalias() += in.weight * index.embeddings().row(index.row(in.item)).transpose();
  }
  const double norm = acc.norm();
  if (norm > 0.0) acc /= norm;
  else acc.setZero();
  return {user, std::move(acc)};
}

UserProfile build_profile(const UserId& user, const std::vector<Interaction>& history,
                          const Catalog& catalog, Eigen::Index dim) {
  for (const auto& in : history)
    if (!catalog.contains(in.item))
      throw DataError("interaction references unknown item '" + in.item + "'");
  return build_profile(user, history, ContentIndex::build(catalog, dim));
}

CandidateList top_k(const UserProfile& profile, const ContentIndex& index, std::size_t k) {
  CandidateList out{profile.user, {}};
  if (k == 0) throw std::invalid_argument("top_k: K must be >= 1");
  const std::size_t n = index.size();
  const std::size_t keep = std::min(k, n);
  if (keep == 0) return out;
  if (profile.embedding.size() != index.dim())
    throw std::invalid_argument("top_k: profile dimension does not match index");

  std::vector<ScoredItem> scored(n);
  if (profile.embedding.isZero(0.0)) {
    for (std::size_t i = 0; i < n; ++i) scored[i] = {index.ids()[i], 0.0};
  } else {
    const Eigen::VectorXd scores = index.embeddings() * profile.embedding;
    for (std::size_t i = 0; i < n; ++i) scored[i] = {index.ids()[i], scores[static_cast<Eigen::Index>(i)]};
  }
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end(),
                    ranks_before);
  scored.resize(keep);
  out.entries = std::move(scored);
  return out;
}

CandidateList top_k(const UserProfile& profile, const Catalog& catalog, std::size_t k) {
  return top_k(profile, ContentIndex::build(catalog, profile.embedding.size()), k);
}

CandidateList ContentRecommender::recommend(const UserId& user, const std::vector<Interaction>& history,
                                            std::size_t k) const {
  return top_k(build_profile(user, history, index_), index_, k);
}

std::map<UserId, std::vector<Interaction>> read_interactions(const std::filesystem::path& path) {
  std::map<UserId, std::vector<Interaction>> out;
  for_each_line(path, [&](std::size_t n, const std::string& line) {
    try {
      const json obj = json::parse(line);
      Interaction in;
      in.user = obj.at("user_id").get<std::string>();
      in.item = obj.at("item_id").get<std::string>();
      in.weight = obj.contains("weight") ? obj.at("weight").get<double>() : 1.0;
      if (in.user.empty()) throw DataError(path.string(), n, "empty user_id");
      if (in.item.empty()) throw DataError(path.string(), n, "empty item_id");
      if (!(in.weight >= 0.0) || !std::isfinite(in.weight))
        throw DataError(path.string(), n, "weight must be a finite non-negative number");
      out[in.user].push_back(std::move(in));
    } catch (const json::exception& e) {
      throw DataError(path.string(), n, std::string("malformed interaction: ") + e.what());
    }
  });
  return out;
}

std::string interaction_to_json_line(const Interaction& in) {
  return nlohmann::ordered_json{{"user_id", in.user}, {"item_id", in.item}, {"weight", in.weight}}.dump();
}

}  // namespace dshelf
