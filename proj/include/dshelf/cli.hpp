#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dshelf/affinity.hpp"
#include "dshelf/corpus.hpp"
#include "dshelf/eval.hpp"
#include "dshelf/extraction.hpp"
#include "dshelf/shelfgen.hpp"

namespace dshelf::cli {

enum ExitCode : int { kOk = 0, kUsageError = 1, kDataError = 2, kPartialFailure = 3 };

struct RunPaths {
  std::filesystem::path items;
  std::filesystem::path descriptors;
  std::filesystem::path interactions;
  std::filesystem::path templates;
  std::filesystem::path lexicon;
  std::filesystem::path genre_map;
  std::filesystem::path prompt;
  std::filesystem::path output_dir = ".";
};

struct ExtractionSettings {
  ExtractionBackendKind backend = ExtractionBackendKind::RuleBased;
  RemoteSettings remote;
  std::string token_env = "DSHELF_LLM_TOKEN";
  std::size_t max_in_flight = 4;
  std::map<std::string, std::string> genre_map;
  std::optional<std::vector<std::string>> allowed_genres;
};

/// Everything a run needs, read from one JSON document. Relative paths are
/// resolved against the config file's directory.
struct RunConfig {
  RunPaths paths;
  ShelfConfig shelf;
  std::size_t K = 100;
  SlotBudget budget;
  ExtractionSettings extraction;
  CorpusSpec corpus;
  std::string eval_treatment = "descriptive";  // or "generic" for self-comparison
  std::size_t jobs = 1;
};

/// Throws ConfigError on unknown keys, wrong types or violated invariants.
RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Output file names inside paths.output_dir.
struct OutputFiles {
  static constexpr const char* kDescriptors = "descriptors.jsonl";
  static constexpr const char* kFailures = "failures.jsonl";
  static constexpr const char* kGroundingDrops = "grounding_drops.jsonl";
  static constexpr const char* kPages = "pages.jsonl";
  static constexpr const char* kReportJson = "report.json";
  static constexpr const char* kReportText = "report.txt";
};

struct PipelineRun {
  std::vector<CandidateList> candidates;  // ascending user id
  std::vector<ShelfPage> pages;           // same order
};

/// Candidate lists and descriptive pages for every user, computed on
/// cfg.jobs threads. Throws DataError for interactions naming unknown items.
PipelineRun run_pipeline(const Catalog& catalog, const std::map<UserId, std::vector<Interaction>>& interactions,
                         const RunConfig& cfg);

int cmd_gen_corpus(const RunConfig& cfg, std::ostream& log);
int cmd_extract(const RunConfig& cfg, std::ostream& log);
int cmd_shelves(const RunConfig& cfg, std::ostream& log);
int cmd_eval(const RunConfig& cfg, std::ostream& log);

/// Entry point shared by the binary and the tests. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dshelf::cli
