#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dshelf/catalog.hpp"

namespace dshelf {

enum class ExtractionBackendKind { RuleBased, RemoteLlm };

std::optional<ExtractionBackendKind> parse_backend_kind(std::string_view name) noexcept;

struct LexiconEntry {
  std::string pattern;  // canonical
  DescriptorType type;
  std::string display;
};

/// Pattern lexicon plus BISAC-code-to-genre mapping for the offline backend.
class Lexicon {
 public:
  Lexicon() = default;

  /// Canonicalizes patterns. Throws ConfigError on blank patterns or
  /// duplicate (pattern, type) pairs.
  Lexicon(std::vector<LexiconEntry> entries, std::map<std::string, std::string> genre_code_map);

  const std::vector<LexiconEntry>& entries() const noexcept { return entries_; }
  const std::map<std::string, std::string>& genre_code_map() const noexcept { return genre_map_; }

 private:
  std::vector<LexiconEntry> entries_;
  std::map<std::string, std::string> genre_map_;
};

/// Reads the NDJSON lexicon file (`pattern`, `type`, `display`).
std::vector<LexiconEntry> read_lexicon_entries(const std::filesystem::path& path);

/// Canonicalized title + " " + description, the haystack for lexicon hits.
std::string rule_haystack(const Item& item);

DescriptorSet extract_rule_based(const Item& item, const Lexicon& lexicon);

// ---------------------------------------------------------------------------
// Prompting

struct PromptExample {
  Item item;
  std::string expected_json;
};

struct PromptSpec {
  std::array<std::string, kDescriptorTypeCount> taxonomy_instructions;
  std::vector<PromptExample> incontext_examples;
  std::string response_schema_hint;

  /// Throws ConfigError unless every instruction is non-blank and there is at
  /// least one example.
  void validate() const;
};

/// Loads a prompt spec document:
/// {"instructions": {"Genre": "...", ...}, "examples": [{"item": {...},
///  "descriptors": {...}}], "response_schema_hint": "..."}
PromptSpec load_prompt_spec(const std::filesystem::path& path);
PromptSpec parse_prompt_spec(const std::string& json_text);

std::string build_prompt(const Item& item, const PromptSpec& spec);

/// Parses a JSON object with one string array per type name. Unknown keys are
/// ignored and missing ones are empty. Throws ParseError.
DescriptorSet parse_llm_response(const std::string& text);

/// Inverse of parse_llm_response: every type present, in canonical order.
std::string serialize_descriptor_set(const DescriptorSet& set);

// ---------------------------------------------------------------------------
// Grounding

struct GroundingViolation {
  Descriptor descriptor;
  std::string reason;
};

struct GroundingReport {
  ItemId item_id;
  std::vector<GroundingViolation> violations;

  bool grounded() const noexcept { return violations.empty(); }
};

struct GroundingConfig {
  /// Canonical genre vocabulary. When unset, Genre descriptors are not checked.
  std::optional<std::set<std::string>> allowed_genres;

  static GroundingConfig from_genres(const std::vector<std::string>& genres);
};

/// NamedEntity descriptors must appear in title + authors + description;
/// Genre descriptors must belong to the allowed vocabulary. Other types are
/// abstractive and always accepted.
GroundingReport validate_grounding(const DescriptorSet& result, const Item& item,
                                   const GroundingConfig& cfg = {});

/// Removes every descriptor listed in the report.
DescriptorSet drop_violations(DescriptorSet set, const GroundingReport& report);

// ---------------------------------------------------------------------------
// Backends

struct ExtractionOutcome {
  DescriptorSet descriptors;
  GroundingReport dropped;  // descriptors removed for failing grounding
};

struct RemoteSettings {
  std::string endpoint;      // e.g. http://127.0.0.1:8080/v1/extract
  std::string auth_token;    // sent as a Bearer token when non-empty
  int timeout_ms = 30000;
  int retries = 2;           // additional attempts after the first
  int retry_backoff_ms = 0;
};

/// build_prompt -> POST {"prompt": ...} -> {"text": ...} -> parse -> grounding.
/// Transport failures and non-2xx replies are retried; so are unparseable
/// replies. Throws TransportError or ParseError once attempts run out.
ExtractionOutcome extract_remote(const Item& item, const PromptSpec& spec,
                                 const RemoteSettings& remote,
                                 const GroundingConfig& grounding = {});

class ExtractionBackend {
 public:
  virtual ~ExtractionBackend() = default;
  virtual ExtractionOutcome extract(const Item& item) const = 0;
};

class RuleBasedBackend final : public ExtractionBackend {
 public:
  explicit RuleBasedBackend(Lexicon lexicon) : lexicon_(std::move(lexicon)) {}
  ExtractionOutcome extract(const Item& item) const override;

 private:
  Lexicon lexicon_;
};

class RemoteLlmBackend final : public ExtractionBackend {
 public:
  RemoteLlmBackend(PromptSpec spec, RemoteSettings remote, GroundingConfig grounding);
  ExtractionOutcome extract(const Item& item) const override;

 private:
  PromptSpec spec_;
  RemoteSettings remote_;
  GroundingConfig grounding_;
};

struct ExtractionFailure {
  ItemId item_id;
  std::string reason;
};

struct BatchExtraction {
  std::map<ItemId, DescriptorSet> descriptors;  // successful items only
  std::vector<ExtractionFailure> failures;      // ascending item id
  std::vector<GroundingReport> dropped;         // non-empty reports, ascending item id
};

/// Runs the backend over every item with at most `max_in_flight` concurrent
/// calls. Per-item failures are collected, never thrown. Output does not
/// depend on scheduling.
BatchExtraction extract_batch(const std::vector<Item>& items, const ExtractionBackend& backend,
                              std::size_t max_in_flight = 1);

std::string serialize_failures(const std::vector<ExtractionFailure>& failures);

}  // namespace dshelf
