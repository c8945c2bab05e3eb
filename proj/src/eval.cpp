#include "dshelf/eval.hpp"

#include <cstdio>
#include <set>
#include <sstream>

#include "json.hpp"

namespace dshelf {

void SlotBudget::validate() const {
  if (shelves_visible < 1 || slots_per_shelf < 1) throw ConfigError("slot budget entries must be >= 1");
}

ShelfPage baseline_page(const CandidateList& cl, const SlotBudget& budget) {
  ShelfPage page{cl.user, {}};
  if (cl.empty()) return page;
  Shelf shelf;
  shelf.title = {"", kGenericShelfTitle};
  const std::size_t n = std::min(cl.entries.size(), budget.total());
  shelf.items.assign(cl.entries.begin(), cl.entries.begin() + static_cast<std::ptrdiff_t>(n));
  page.shelves.push_back(std::move(shelf));
  return page;
}

ExposureLog simulate_exposure(const std::vector<ShelfPage>& pages, const SlotBudget& budget) {
  ExposureLog log;
  for (const auto& page : pages) {
    auto& shelves = log.users[page.user];
    for (const auto& s : page.shelves) {
      if (shelves.size() >= budget.shelves_visible) break;
      ExposedShelf e;
      e.title = s.title.display;
      e.embedding_text = s.source ? s.source->display : s.title.display;
      if (s.source) e.source = s.source->source;
      for (const auto& it : s.items) {
        if (e.items.size() >= budget.slots_per_shelf) break;
        e.items.push_back(it.item);
      }
      shelves.push_back(std::move(e));
    }
  }
  return log;
}

EvalReport summarize_exposure(const std::string& variant, const ExposureLog& log, const Catalog& catalog,
                              Eigen::Index embedding_dim) {
  EvalReport r;
  r.variant = variant;
  r.users = log.users.size();
  std::set<ItemId> items;
  std::set<std::string> titles;
  double per_user_titles = 0.0;
  double similarity_sum = 0.0;
  std::size_t impressed = 0;
  std::size_t coherent = 0;
  for (const auto& [user, shelves] : log.users) {
    std::set<std::string> user_titles;
    std::vector<EmbeddingVector> embeddings;
    for (const auto& s : shelves) {
      const std::string key = canonicalize(s.title);
      titles.insert(key);
      user_titles.insert(key);
      embeddings.push_back(embed_text(s.embedding_text, embedding_dim));
      for (const auto& id : s.items) {
        items.insert(id);
        ++impressed;
        if (carries_all(catalog.descriptors(id), s.source)) ++coherent;
      }
    }
    per_user_titles += static_cast<double>(user_titles.size());
    for (std::size_t i = 0; i < embeddings.size(); ++i)
      for (std::size_t j = i + 1; j < embeddings.size(); ++j) {
        similarity_sum += cosine_similarity(embeddings[i], embeddings[j]);
        ++r.title_pairs;
      }
  }
  r.distinct_items_impressed = items.size();
  r.distinct_titles_global = titles.size();
  r.mean_distinct_titles_per_user = r.users ? per_user_titles / static_cast<double>(r.users) : 0.0;
  r.catalog_coverage =
      catalog.size() ? static_cast<double>(items.size()) / static_cast<double>(catalog.size()) : 0.0;
  r.mean_inter_shelf_title_distance =
      r.title_pairs ? 1.0 - similarity_sum / static_cast<double>(r.title_pairs) : 0.0;
  r.coherence = impressed ? static_cast<double>(coherent) / static_cast<double>(impressed) : 1.0;
  return r;
}

ComparisonReport compute_report(const ExposureLog& treatment, const ExposureLog& baseline,
                                const Catalog& catalog, Eigen::Index embedding_dim) {
  std::set<UserId> a, b;
  for (const auto& [u, _] : treatment.users) a.insert(u);
  for (const auto& [u, _] : baseline.users) b.insert(u);
  if (a != b) throw DataError("treatment and baseline exposure logs cover different users");

  ComparisonReport out;
  out.treatment = summarize_exposure("descriptive_shelves", treatment, catalog, embedding_dim);
  out.baseline = summarize_exposure("baseline", baseline, catalog, embedding_dim);
  auto ratio = [](double t, double base) -> std::optional<double> {
    if (base == 0.0) return std::nullopt;
    return t / base;
  };
  const auto& t = out.treatment;
  const auto& s = out.baseline;
  auto d = [](std::size_t v) { return static_cast<double>(v); };
  out.deltas["distinct_items_impressed"] = ratio(d(t.distinct_items_impressed), d(s.distinct_items_impressed));
  out.deltas["distinct_titles_global"] = ratio(d(t.distinct_titles_global), d(s.distinct_titles_global));
  out.deltas["mean_distinct_titles_per_user"] =
      ratio(t.mean_distinct_titles_per_user, s.mean_distinct_titles_per_user);
  out.deltas["catalog_coverage"] = ratio(t.catalog_coverage, s.catalog_coverage);
  out.deltas["mean_inter_shelf_title_distance"] =
      ratio(t.mean_inter_shelf_title_distance, s.mean_inter_shelf_title_distance);
  out.deltas["coherence"] = ratio(t.coherence, s.coherence);
  return out;
}

namespace {

nlohmann::ordered_json to_json(const EvalReport& r) {
  return {{"variant", r.variant},
          {"users", r.users},
          {"distinct_items_impressed", r.distinct_items_impressed},
          {"distinct_titles_global", r.distinct_titles_global},
          {"mean_distinct_titles_per_user", r.mean_distinct_titles_per_user},
          {"catalog_coverage", r.catalog_coverage},
          {"mean_inter_shelf_title_distance", r.mean_inter_shelf_title_distance},
          {"title_pairs", r.title_pairs},
          {"coherence", r.coherence}};
}

std::string fmt_delta(const std::optional<double>& v) {
  if (!v) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%+.2f%%", (*v - 1.0) * 100.0);
  return buf;
}

}  // namespace

std::string report_to_json(const ComparisonReport& report) {
  nlohmann::ordered_json deltas = nlohmann::ordered_json::object();
  for (const auto& [k, v] : report.deltas) deltas[k] = v ? nlohmann::ordered_json(*v) : nullptr;
  nlohmann::ordered_json doc = {
      {"treatment", to_json(report.treatment)},
      {"baseline", to_json(report.baseline)},
      {"deltas", std::move(deltas)},
      {"engagement", {{"i2c", nullptr}, {"i2s", nullptr}, {"interacted", nullptr}}},
      {"notes", "exposure-side metrics only; no click or stream model is simulated"},
  };
  return doc.dump(2) + "\n";
}

std::string report_to_table(const ComparisonReport& report) {
  std::ostringstream os;
  char line[160];
  auto row = [&](const char* label, const std::string& t, const std::string& b, const std::string& delta) {
    std::snprintf(line, sizeof line, "%-18s %14s %14s %12s\n", label, t.c_str(), b.c_str(), delta.c_str());
    os << line;
  };
  const auto& t = report.treatment;
  const auto& b = report.baseline;
  row("", "descriptive", "baseline", "delta");
  row("i2c", "n/a offline", "n/a offline", "n/a offline");
  row("i2s", "n/a offline", "n/a offline", "n/a offline");
  row("# impressed", std::to_string(t.distinct_items_impressed), std::to_string(b.distinct_items_impressed),
      fmt_delta(report.deltas.at("distinct_items_impressed")));
  row("# interacted", "n/a offline", "n/a offline", "n/a offline");
  row("# shelf titles", std::to_string(t.distinct_titles_global), std::to_string(b.distinct_titles_global),
      fmt_delta(report.deltas.at("distinct_titles_global")));
  char buf[32];
  auto f = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return std::string(buf);
  };
  row("coverage", f(t.catalog_coverage), f(b.catalog_coverage), fmt_delta(report.deltas.at("catalog_coverage")));
  row("coherence", f(t.coherence), f(b.coherence), fmt_delta(report.deltas.at("coherence")));
  return os.str();
}

}  // namespace dshelf
