#include "dshelf/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <set>
#include <type_traits>

#include "CLI11.hpp"
#include "dshelf/parallel.hpp"
#include "json.hpp"

namespace dshelf::cli {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& section) {
  if (!obj.is_object()) throw ConfigError("config section '" + section + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, _] : obj.items())
    if (!ok.count(k)) throw ConfigError("unknown config key '" + section + "." + k + "'");
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& section) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
    if (!it->is_number_unsigned())
      throw ConfigError("config key '" + section + "." + key + "' must be a non-negative integer");
  }
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + section + "." + key + "' has the wrong type");
  }
}

void read_path(const json& obj, const char* key, std::filesystem::path& out, const std::filesystem::path& base) {
  std::string s;
  read(obj, key, s, "paths");
  if (s.empty()) return;
  std::filesystem::path p(s);
  out = p.is_absolute() ? p : base / p;
}

CountRange read_range(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_unsigned() || !v[1].is_number_unsigned())
    throw ConfigError("config key '" + where + "' must be [min, max]");
  return {v[0].get<std::size_t>(), v[1].get<std::size_t>()};
}

void parse_corpus(const json& obj, CorpusSpec& spec) {
  check_keys(obj, {"item_count", "user_count", "zipf_exponent", "vocabulary", "per_item", "interests_per_user",
                   "interactions_per_user", "mainstream_per_user"},
             "corpus");
  read(obj, "item_count", spec.item_count, "corpus");
  read(obj, "user_count", spec.user_count, "corpus");
  read(obj, "zipf_exponent", spec.zipf_exponent, "corpus");
  if (auto it = obj.find("vocabulary"); it != obj.end()) {
    for (const auto& [k, v] : it->items()) {
      const auto t = parse_descriptor_type(k);
      if (!t || !v.is_number_unsigned()) throw ConfigError("bad corpus.vocabulary entry '" + k + "'");
      spec.vocabulary[static_cast<std::size_t>(*t)] = v.get<std::size_t>();
    }
  }
  if (auto it = obj.find("per_item"); it != obj.end()) {
    for (const auto& [k, v] : it->items()) {
      const auto t = parse_descriptor_type(k);
      if (!t) throw ConfigError("bad corpus.per_item entry '" + k + "'");
      spec.per_item[static_cast<std::size_t>(*t)] = read_range(v, "corpus.per_item." + k);
    }
  }
  if (auto it = obj.find("interests_per_user"); it != obj.end())
    spec.interests_per_user = read_range(*it, "corpus.interests_per_user");
  if (auto it = obj.find("interactions_per_user"); it != obj.end())
    spec.interactions_per_user = read_range(*it, "corpus.interactions_per_user");
  if (auto it = obj.find("mainstream_per_user"); it != obj.end())
    spec.mainstream_per_user = read_range(*it, "corpus.mainstream_per_user");
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(doc, {"paths", "shelf", "decoration", "K", "budget", "extraction", "corpus", "eval", "seed", "jobs"},
             "");
  RunConfig cfg;

  if (auto it = doc.find("paths"); it != doc.end()) {
    check_keys(*it, {"items", "descriptors", "interactions", "templates", "lexicon", "genre_map", "prompt",
                     "output_dir"},
               "paths");
    read_path(*it, "items", cfg.paths.items, base_dir);
    read_path(*it, "descriptors", cfg.paths.descriptors, base_dir);
    read_path(*it, "interactions", cfg.paths.interactions, base_dir);
    read_path(*it, "templates", cfg.paths.templates, base_dir);
    read_path(*it, "lexicon", cfg.paths.lexicon, base_dir);
    read_path(*it, "genre_map", cfg.paths.genre_map, base_dir);
    read_path(*it, "prompt", cfg.paths.prompt, base_dir);
    cfg.paths.output_dir = base_dir;
    read_path(*it, "output_dir", cfg.paths.output_dir, base_dir);
  }

  if (auto it = doc.find("shelf"); it != doc.end()) {
    check_keys(*it, {"N", "tau", "min_items", "max_items", "idf_smoothing", "embedding_dim",
                     "dedup_items_across_shelves", "templates"},
               "shelf");
    read(*it, "N", cfg.shelf.N, "shelf");
    read(*it, "tau", cfg.shelf.tau, "shelf");
    read(*it, "min_items", cfg.shelf.min_items, "shelf");
    read(*it, "max_items", cfg.shelf.max_items, "shelf");
    read(*it, "idf_smoothing", cfg.shelf.idf_smoothing, "shelf");
    read(*it, "embedding_dim", cfg.shelf.embedding_dim, "shelf");
    read(*it, "dedup_items_across_shelves", cfg.shelf.dedup_items_across_shelves, "shelf");
    if (auto t = it->find("templates"); t != it->end()) cfg.shelf.enabled_templates = parse_templates(t->dump());
  }
  if (!cfg.paths.templates.empty()) cfg.shelf.enabled_templates = load_templates(cfg.paths.templates);

  if (auto it = doc.find("decoration"); it != doc.end()) {
    check_keys(*it, {"header", "max_title_chars"}, "decoration");
    read(*it, "header", cfg.shelf.decoration.header, "decoration");
    read(*it, "max_title_chars", cfg.shelf.decoration.max_title_chars, "decoration");
  }
  read(doc, "K", cfg.K, "");
  if (cfg.K < 1) throw ConfigError("K must be >= 1");

  if (auto it = doc.find("budget"); it != doc.end()) {
    check_keys(*it, {"shelves_visible", "slots_per_shelf"}, "budget");
    read(*it, "shelves_visible", cfg.budget.shelves_visible, "budget");
    read(*it, "slots_per_shelf", cfg.budget.slots_per_shelf, "budget");
  }

  if (auto it = doc.find("extraction"); it != doc.end()) {
    check_keys(*it, {"backend", "endpoint", "token_env", "timeout_ms", "retries", "retry_backoff_ms",
                     "max_in_flight", "genre_map", "allowed_genres"},
               "extraction");
    std::string backend = "rule_based";
    read(*it, "backend", backend, "extraction");
    const auto kind = parse_backend_kind(backend);
    if (!kind) throw ConfigError("unknown extraction backend '" + backend + "'");
    cfg.extraction.backend = *kind;
    read(*it, "endpoint", cfg.extraction.remote.endpoint, "extraction");
    read(*it, "token_env", cfg.extraction.token_env, "extraction");
    read(*it, "timeout_ms", cfg.extraction.remote.timeout_ms, "extraction");
    read(*it, "retries", cfg.extraction.remote.retries, "extraction");
    read(*it, "retry_backoff_ms", cfg.extraction.remote.retry_backoff_ms, "extraction");
    const auto& r = cfg.extraction.remote;
    if (r.retries < 0 || r.timeout_ms <= 0 || r.retry_backoff_ms < 0)
      throw ConfigError("extraction retries/backoff must be >= 0 and timeout_ms > 0");
    read(*it, "max_in_flight", cfg.extraction.max_in_flight, "extraction");
    read(*it, "genre_map", cfg.extraction.genre_map, "extraction");
    if (it->contains("allowed_genres")) {
      std::vector<std::string> g;
      read(*it, "allowed_genres", g, "extraction");
      cfg.extraction.allowed_genres = std::move(g);
    }
  }
  if (!cfg.paths.genre_map.empty()) {
    try {
      const json gm = json::parse(read_file(cfg.paths.genre_map));
      for (const auto& [code, genre] : gm.items()) cfg.extraction.genre_map[code] = genre.get<std::string>();
    } catch (const json::exception& e) {
      throw ConfigError(std::string("malformed genre map: ") + e.what());
    } catch (const DataError& e) {
      throw ConfigError(e.what());
    }
  }

  if (auto it = doc.find("corpus"); it != doc.end()) parse_corpus(*it, cfg.corpus);
  read(doc, "seed", cfg.corpus.seed, "");

  if (auto it = doc.find("eval"); it != doc.end()) {
    check_keys(*it, {"treatment"}, "eval");
    read(*it, "treatment", cfg.eval_treatment, "eval");
    if (cfg.eval_treatment != "descriptive" && cfg.eval_treatment != "generic")
      throw ConfigError("eval.treatment must be 'descriptive' or 'generic'");
  }
  read(doc, "jobs", cfg.jobs, "");

  cfg.shelf.validate();
  cfg.budget.validate();
  cfg.corpus.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const DataError&) {
    throw ConfigError("cannot read config " + path.string());
  }
  return parse_run_config(text, path.has_parent_path() ? path.parent_path() : std::filesystem::path("."));
}

// ---------------------------------------------------------------------------

namespace {

void require_path(const std::filesystem::path& p, const char* what) {
  if (p.empty()) throw ConfigError(std::string("config is missing paths.") + what);
}

std::unique_ptr<ExtractionBackend> make_backend(const RunConfig& cfg) {
  const auto& ex = cfg.extraction;
  if (ex.backend == ExtractionBackendKind::RuleBased) {
    std::vector<LexiconEntry> entries;
    if (!cfg.paths.lexicon.empty()) entries = read_lexicon_entries(cfg.paths.lexicon);
    return std::make_unique<RuleBasedBackend>(Lexicon(std::move(entries), ex.genre_map));
  }
  require_path(cfg.paths.prompt, "prompt");
  if (ex.remote.endpoint.empty()) throw ConfigError("remote backend needs extraction.endpoint");
  RemoteSettings remote = ex.remote;
  if (const char* token = std::getenv(ex.token_env.c_str())) remote.auth_token = token;
  GroundingConfig grounding;
  if (ex.allowed_genres) {
    grounding = GroundingConfig::from_genres(*ex.allowed_genres);
  } else if (!ex.genre_map.empty()) {
    std::vector<std::string> genres;
    for (const auto& [_, g] : ex.genre_map) genres.push_back(g);
    grounding = GroundingConfig::from_genres(genres);
  }
  return std::make_unique<RemoteLlmBackend>(load_prompt_spec(cfg.paths.prompt), std::move(remote),
                                            std::move(grounding));
}

std::map<UserId, std::vector<Interaction>> load_interactions(const RunConfig& cfg) {
  require_path(cfg.paths.interactions, "interactions");
  return read_interactions(cfg.paths.interactions);
}

Catalog load_configured_catalog(const RunConfig& cfg) {
  require_path(cfg.paths.items, "items");
  require_path(cfg.paths.descriptors, "descriptors");
  return load_catalog(cfg.paths.items, cfg.paths.descriptors);
}

}  // namespace

PipelineRun run_pipeline(const Catalog& catalog, const std::map<UserId, std::vector<Interaction>>& interactions,
                         const RunConfig& cfg) {
  for (const auto& [user, history] : interactions)
    for (const auto& in : history)
      if (!catalog.contains(in.item))
        throw DataError("interaction of user '" + user + "' references unknown item '" + in.item + "'");

  const ContentRecommender recommender(ContentIndex::build(catalog, cfg.shelf.embedding_dim));
  std::vector<const std::pair<const UserId, std::vector<Interaction>>*> users;
  for (const auto& entry : interactions) users.push_back(&entry);

  PipelineRun run;
  run.candidates.resize(users.size());
  run.pages.resize(users.size());
  parallel_for(users.size(), cfg.jobs, [&](std::size_t i) {
    const auto& [user, history] = *users[i];
    run.candidates[i] = recommender.recommend(user, history, cfg.K);
    run.pages[i] = generate_page(user, run.candidates[i], catalog, cfg.shelf);
  });
  return run;
}

int cmd_gen_corpus(const RunConfig& cfg, std::ostream& log) {
  const Corpus corpus = generate_corpus(cfg.corpus);
  write_corpus(corpus, cfg.paths.output_dir);
  log << "wrote " << corpus.items.size() << " items, " << corpus.interactions.size() << " interactions to "
      << cfg.paths.output_dir.string() << "\n";
  return kOk;
}

int cmd_extract(const RunConfig& cfg, std::ostream& log) {
  require_path(cfg.paths.items, "items");
  const auto items = read_items(cfg.paths.items);
  const auto backend = make_backend(cfg);
  const std::size_t in_flight = cfg.extraction.backend == ExtractionBackendKind::RemoteLlm
                                    ? std::max<std::size_t>(1, cfg.extraction.max_in_flight)
                                    : cfg.jobs;
  const auto batch = extract_batch(items, *backend, in_flight);

  write_file(cfg.paths.output_dir / OutputFiles::kDescriptors, serialize_descriptor_records(batch.descriptors));
  write_file(cfg.paths.output_dir / OutputFiles::kFailures, serialize_failures(batch.failures));
  std::string drops;
  for (const auto& report : batch.dropped)
    for (const auto& v : report.violations)
      drops += nlohmann::ordered_json{{"item_id", report.item_id},
                                      {"type", std::string(to_string(v.descriptor.type()))},
                                      {"text", v.descriptor.display()},
                                      {"reason", v.reason}}.dump() + "\n";
  write_file(cfg.paths.output_dir / OutputFiles::kGroundingDrops, drops);

  log << "extracted " << batch.descriptors.size() << " of " << items.size() << " items";
  if (!batch.failures.empty()) log << ", " << batch.failures.size() << " failed";
  log << "\n";
  for (const auto& f : batch.failures) log << "  failed " << f.item_id << ": " << f.reason << "\n";
  return batch.failures.empty() ? kOk : kPartialFailure;
}

int cmd_shelves(const RunConfig& cfg, std::ostream& log) {
  const Catalog catalog = load_configured_catalog(cfg);
  const auto interactions = load_interactions(cfg);
  const auto run = run_pipeline(catalog, interactions, cfg);
  std::string out;
  for (const auto& page : run.pages) out += page_to_json_line(page) + "\n";
  write_file(cfg.paths.output_dir / OutputFiles::kPages, out);
  log << "wrote " << run.pages.size() << " pages\n";
  return kOk;
}

int cmd_eval(const RunConfig& cfg, std::ostream& log) {
  const Catalog catalog = load_configured_catalog(cfg);
  const auto interactions = load_interactions(cfg);
  const auto run = run_pipeline(catalog, interactions, cfg);
  std::vector<ShelfPage> baseline;
  for (const auto& cl : run.candidates) baseline.push_back(baseline_page(cl, cfg.budget));
  const SlotBudget baseline_budget{1, cfg.budget.total()};
  const ExposureLog baseline_log = simulate_exposure(baseline, baseline_budget);
  const ExposureLog treatment_log = cfg.eval_treatment == "generic"
                                        ? baseline_log
                                        : simulate_exposure(run.pages, cfg.budget);
  const auto report = compute_report(treatment_log, baseline_log, catalog, cfg.shelf.embedding_dim);
  write_file(cfg.paths.output_dir / OutputFiles::kReportJson, report_to_json(report));
  const std::string table = report_to_table(report);
  write_file(cfg.paths.output_dir / OutputFiles::kReportText, table);
  log << table;
  return kOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Descriptive shelf generation and offline evaluation"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::string output_dir;
  app.add_option("--config", config_path, "Run configuration (JSON)")->required();
  app.add_option("--seed", seed, "Override the corpus seed");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--output-dir", output_dir, "Override paths.output_dir");

  auto* gen = app.add_subcommand("gen-corpus", "Write a seeded synthetic corpus");
  auto* extract = app.add_subcommand("extract", "Extract descriptors for every catalog item");
  auto* shelves = app.add_subcommand("shelves", "Generate one shelf page per user");
  auto* eval = app.add_subcommand("eval", "Compare descriptive shelves against the generic shelf");

  std::vector<std::string> argv_store(args.begin(), args.end());
  if (argv_store.empty()) argv_store.push_back("dshelf");
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsageError;
  }

  try {
    RunConfig cfg = load_run_config(config_path);
    if (seed) cfg.corpus.seed = *seed;
    if (jobs) cfg.jobs = *jobs;
    if (!output_dir.empty()) cfg.paths.output_dir = output_dir;
    if (gen->parsed()) return cmd_gen_corpus(cfg, out);
    if (extract->parsed()) return cmd_extract(cfg, out);
    if (shelves->parsed()) return cmd_shelves(cfg, out);
    if (eval->parsed()) return cmd_eval(cfg, out);
    return kUsageError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace dshelf::cli
