#include "dshelf/shelfgen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "json.hpp"

namespace dshelf {

using nlohmann::json;

void ShelfConfig::validate() const {
  if (N < 1) throw ConfigError("N must be >= 1");
  if (!(tau >= 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in [0, 1]");
  if (min_items < 1) throw ConfigError("min_items must be >= 1");
  if (min_items > max_items) throw ConfigError("min_items must not exceed max_items");
  if (!std::isfinite(idf_smoothing)) throw ConfigError("idf_smoothing must be finite");
  if (embedding_dim < 2) throw ConfigError("embedding_dim must be >= 2");
  decoration.validate();
  for (const auto& t : enabled_templates) t.validate();
}

bool carries_all(const DescriptorSet& set, const std::vector<Descriptor>& source) {
  return std::all_of(source.begin(), source.end(), [&](const Descriptor& d) { return set.contains(d); });
}

std::vector<TitleScored> collect_title_candidates(const CandidateList& cl, const Catalog& catalog,
                                                  const ShelfConfig& cfg) {
  std::vector<TitleScored> out;
  std::map<std::string, std::size_t> by_key;
  for (const auto& entry : cl.entries) {
    for (auto& title : expand_titles(catalog.descriptors(entry.item), cfg.enabled_templates)) {
      std::string key = canonicalize(title.display);
      if (by_key.count(key)) continue;
      by_key.emplace(key, out.size());
      TitleScored ts;
      ts.key = std::move(key);
      ts.title = std::move(title);
      out.push_back(std::move(ts));
    }
  }
  // Titles that merge on display keep the first instantiation's sources, so
  // support is recomputed against those sources rather than unioned blindly.
  std::vector<TitleScored> kept;
  for (auto& ts : out) {
    if (!decorate(ts.title, cfg.decoration)) continue;
    for (const auto& entry : cl.entries)
      if (carries_all(catalog.descriptors(entry.item), ts.title.source)) ts.support.insert(entry.item);
    if (ts.support.size() < cfg.min_items) continue;
    ts.title_embedding = embed_text(ts.title.display, cfg.embedding_dim);
    kept.push_back(std::move(ts));
  }
  return kept;
}

double title_idf(const TitleCandidate& title, const Catalog& catalog, double smoothing) {
  std::size_t df = 0;
  for (const auto& d : title.source) df = std::max(df, catalog.document_frequency(d));
  return std::log(static_cast<double>(catalog.size()) / (smoothing + static_cast<double>(df)));
}

std::vector<TitleScored> rank_titles(std::vector<TitleScored> candidates, const CandidateList& cl,
                                     const Catalog& catalog, const ShelfConfig& cfg) {
  std::unordered_map<ItemId, double> score;
  for (const auto& e : cl.entries) score.emplace(e.item, e.score);
  for (auto& ts : candidates) {
    double mass = 0.0;
    for (const auto& id : ts.support) {
      auto it = score.find(id);
      if (it != score.end()) mass += it->second;
    }
    ts.relevance = mass * title_idf(ts.title, catalog, cfg.idf_smoothing);
  }
  std::sort(candidates.begin(), candidates.end(), [](const TitleScored& a, const TitleScored& b) {
    if (a.relevance != b.relevance) return a.relevance > b.relevance;
    return a.key < b.key;
  });
  return candidates;
}

namespace {

bool diverse_from(const TitleScored& t, const std::vector<const TitleScored*>& kept, double tau) {
  return std::all_of(kept.begin(), kept.end(), [&](const TitleScored* k) {
    return cosine_similarity(t.title_embedding, k->title_embedding) < tau;
  });
}

}  // namespace

std::vector<TitleScored> diversify_titles(const std::vector<TitleScored>& ranked, double tau,
                                          std::size_t N) {
  std::vector<const TitleScored*> kept;
  for (const auto& t : ranked) {
    if (kept.size() >= N) break;
    if (diverse_from(t, kept, tau)) kept.push_back(&t);
  }
  std::vector<TitleScored> out;
  out.reserve(kept.size());
  for (const auto* t : kept) out.push_back(*t);
  return out;
}

std::optional<Shelf> populate_shelf(const TitleScored& title, const CandidateList& cl,
                                    const Catalog& catalog, const ShelfConfig& cfg,
                                    const std::set<ItemId>& exclude) {
  Shelf shelf;
  for (const auto& e : cl.entries) {
    if (shelf.items.size() >= cfg.max_items) break;
    if (exclude.count(e.item)) continue;
    if (carries_all(catalog.descriptors(e.item), title.title.source)) shelf.items.push_back(e);
  }
  if (shelf.items.size() < cfg.min_items) return std::nullopt;
  // Candidate lists are already in score order; re-sort in case a custom
  // recommender hands over an unsorted one.
  std::stable_sort(shelf.items.begin(), shelf.items.end(), ranks_before);
  auto decorated = decorate(title.title, cfg.decoration);
  if (!decorated) return std::nullopt;
  shelf.title = std::move(*decorated);
  shelf.source = title.title;
  return shelf;
}

ShelfPage generate_page(const UserId& user, const CandidateList& cl, const Catalog& catalog,
                        const ShelfConfig& cfg) {
  ShelfPage page{user, {}};
  if (cl.empty()) return page;
  const auto ranked = rank_titles(collect_title_candidates(cl, catalog, cfg), cl, catalog, cfg);
  std::vector<const TitleScored*> kept;
  std::set<ItemId> used;
  static const std::set<ItemId> kNone;
  for (const auto& t : ranked) {
    if (page.shelves.size() >= cfg.N) break;
    if (!diverse_from(t, kept, cfg.tau)) continue;
    auto shelf = populate_shelf(t, cl, catalog, cfg, cfg.dedup_items_across_shelves ? used : kNone);
    if (!shelf) continue;
    kept.push_back(&t);
    if (cfg.dedup_items_across_shelves)
      for (const auto& e : shelf->items) used.insert(e.item);
    page.shelves.push_back(std::move(*shelf));
  }
  return page;
}

std::string page_to_json_line(const ShelfPage& page) {
  using ojson = nlohmann::ordered_json;
  ojson shelves = ojson::array();
  for (const auto& s : page.shelves) {
    ojson items = ojson::array();
    for (const auto& e : s.items) items.push_back({{"item_id", e.item}, {"score", e.score}});
    shelves.push_back({{"header", s.title.header}, {"title", s.title.display}, {"items", std::move(items)}});
  }
  return ojson{{"user_id", page.user}, {"shelves", std::move(shelves)}}.dump();
}

}  // namespace dshelf
