#include "dshelf/extraction.hpp"

#include <chrono>
#include <sstream>
#include <thread>

#include "dshelf/parallel.hpp"
#include "httplib.h"
#include "json.hpp"

namespace dshelf {

using nlohmann::json;

std::optional<ExtractionBackendKind> parse_backend_kind(std::string_view name) noexcept {
  if (name == "rule_based" || name == "RuleBased") return ExtractionBackendKind::RuleBased;
  if (name == "remote_llm" || name == "RemoteLlm") return ExtractionBackendKind::RemoteLlm;
  return std::nullopt;
}

Lexicon::Lexicon(std::vector<LexiconEntry> entries, std::map<std::string, std::string> genre_code_map)
    : genre_map_(std::move(genre_code_map)) {
  std::set<std::pair<std::string, DescriptorType>> seen;
  for (auto& e : entries) {
    e.pattern = canonicalize(e.pattern);
    if (e.pattern.empty()) throw ConfigError("lexicon pattern must not be blank");
    if (canonicalize(e.display).empty())
      throw ConfigError("lexicon entry '" + e.pattern + "' has a blank display");
    if (!seen.insert({e.pattern, e.type}).second)
      throw ConfigError("duplicate lexicon entry ('" + e.pattern + "', " +
                        std::string(to_string(e.type)) + ")");
    entries_.push_back(std::move(e));
  }
  for (const auto& [code, display] : genre_map_)
    if (canonicalize(display).empty()) throw ConfigError("genre code '" + code + "' maps to a blank genre");
}

std::vector<LexiconEntry> read_lexicon_entries(const std::filesystem::path& path) {
  std::vector<LexiconEntry> out;
  for_each_line(path, [&](std::size_t n, const std::string& line) {
    try {
      const json obj = json::parse(line);
      const auto type = parse_descriptor_type(obj.at("type").get<std::string>());
      if (!type) throw DataError(path.string(), n, "unknown descriptor type");
      out.push_back({obj.at("pattern").get<std::string>(), *type, obj.at("display").get<std::string>()});
    } catch (const json::exception& e) {
      throw DataError(path.string(), n, std::string("malformed lexicon record: ") + e.what());
    }
  });
  return out;
}

std::string rule_haystack(const Item& item) {
  return canonicalize(item.title + " " + item.description);
}

DescriptorSet extract_rule_based(const Item& item, const Lexicon& lexicon) {
  DescriptorSet out;
  for (const auto& code : item.genre_codes) {
    auto it = lexicon.genre_code_map().find(code);
    if (it != lexicon.genre_code_map().end()) out.add(Descriptor(DescriptorType::Genre, it->second));
  }
  const std::string haystack = rule_haystack(item);
  for (const auto& e : lexicon.entries())
    if (haystack.find(e.pattern) != std::string::npos) out.add(Descriptor(e.type, e.display));
  return out;
}

// ---------------------------------------------------------------------------

void PromptSpec::validate() const {
  for (auto t : kAllDescriptorTypes)
    if (canonicalize(taxonomy_instructions[static_cast<std::size_t>(t)]).empty())
      throw ConfigError("prompt spec is missing the instruction for " + std::string(to_string(t)));
  if (incontext_examples.empty()) throw ConfigError("prompt spec needs at least one in-context example");
}

PromptSpec parse_prompt_spec(const std::string& json_text) {
  PromptSpec spec;
  try {
    const json doc = json::parse(json_text);
    const json& instr = doc.at("instructions");
    for (auto t : kAllDescriptorTypes) {
      auto it = instr.find(std::string(to_string(t)));
      if (it != instr.end()) spec.taxonomy_instructions[static_cast<std::size_t>(t)] = it->get<std::string>();
    }
    for (const auto& ex : doc.at("examples")) {
      const json& it = ex.at("item");
      Item item;
      item.id = it.value("id", "");
      item.title = it.at("title").get<std::string>();
      item.authors = it.value("authors", std::vector<std::string>{});
      item.description = it.value("description", "");
      item.genre_codes = it.value("genre_codes", std::vector<std::string>{});
      // Normalize through the parser so the example JSON always has the
      // exact shape the model is asked to return.
      const std::string expected =
          serialize_descriptor_set(parse_llm_response(ex.at("descriptors").dump()));
      spec.incontext_examples.push_back({std::move(item), expected});
    }
    spec.response_schema_hint = doc.value("response_schema_hint", "");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed prompt spec: ") + e.what());
  } catch (const ParseError& e) {
    throw ConfigError(std::string("malformed prompt example: ") + e.what());
  }
  spec.validate();
  return spec;
}

PromptSpec load_prompt_spec(const std::filesystem::path& path) {
  return parse_prompt_spec(read_file(path));
}

namespace {

void append_metadata(std::ostringstream& os, const Item& item) {
  os << "Title: " << item.title << '\n';
  os << "Authors: " << join(item.authors, "; ") << '\n';
  os << "Description: " << item.description << '\n';
  os << "BISAC genres: " << join(item.genre_codes, ", ") << '\n';
}

}  // namespace

std::string build_prompt(const Item& item, const PromptSpec& spec) {
  std::ostringstream os;
  os << "Extract descriptors for an audiobook from its metadata. Use only what the "
        "metadata supports.\n\nDescriptor types:\n";
  for (auto t : kAllDescriptorTypes)
    os << "- " << to_string(t) << ": " << spec.taxonomy_instructions[static_cast<std::size_t>(t)] << '\n';
  os << "\nRespond with a JSON object holding one array of strings per descriptor type, keyed "
        "by the type names above. Return an empty list for any type that is unavailable.\n";
  if (!spec.response_schema_hint.empty()) os << spec.response_schema_hint << '\n';
  for (std::size_t i = 0; i < spec.incontext_examples.size(); ++i) {
    const auto& ex = spec.incontext_examples[i];
    os << "\n### Example " << (i + 1) << '\n';
    append_metadata(os, ex.item);
    os << "Descriptors: " << ex.expected_json << '\n';
  }
  os << "\n### Audiobook\n";
  append_metadata(os, item);
  os << "Descriptors:";
  return os.str();
}

DescriptorSet parse_llm_response(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("response is not JSON: ") + e.what(), text);
  }
  if (!doc.is_object()) throw ParseError("response is not a JSON object", text);
  DescriptorSet out;
  for (auto t : kAllDescriptorTypes) {
    auto it = doc.find(std::string(to_string(t)));
    if (it == doc.end() || it->is_null()) continue;
    if (!it->is_array()) throw ParseError("field '" + std::string(to_string(t)) + "' is not an array", text);
    for (const auto& v : *it) {
      if (!v.is_string())
        throw ParseError("field '" + std::string(to_string(t)) + "' holds a non-string", text);
      const auto s = v.get<std::string>();
      if (!canonicalize(s).empty()) out.add(Descriptor(t, s));
    }
  }
  return out;
}

std::string serialize_descriptor_set(const DescriptorSet& set) {
  // Hand-assembled so keys come out in taxonomy order; json objects sort them.
  std::string out = "{";
  for (auto t : kAllDescriptorTypes) {
    if (out.size() > 1) out += ',';
    json arr = json::array();
    for (const auto& d : set.of(t)) arr.push_back(d.display());
    out += json(std::string(to_string(t))).dump() + ":" + arr.dump();
  }
  return out + "}";
}

// ---------------------------------------------------------------------------

GroundingConfig GroundingConfig::from_genres(const std::vector<std::string>& genres) {
  GroundingConfig cfg;
  cfg.allowed_genres.emplace();
  for (const auto& g : genres) cfg.allowed_genres->insert(canonicalize(g));
  return cfg;
}

GroundingReport validate_grounding(const DescriptorSet& result, const Item& item,
                                   const GroundingConfig& cfg) {
  GroundingReport report{item.id, {}};
  const std::string context =
      canonicalize(item.title + " " + join(item.authors, " ") + " " + item.description);
  for (const auto& d : result.of(DescriptorType::NamedEntity))
    if (context.find(d.canonical()) == std::string::npos)
      report.violations.push_back({d, "named entity not found in item metadata"});
  if (cfg.allowed_genres)
    for (const auto& d : result.of(DescriptorType::Genre))
      if (!cfg.allowed_genres->count(d.canonical()))
        report.violations.push_back({d, "genre outside the allowed vocabulary"});
  return report;
}

DescriptorSet drop_violations(DescriptorSet set, const GroundingReport& report) {
  for (const auto& v : report.violations) set.remove(v.descriptor);
  return set;
}

namespace {

struct Endpoint {
  std::string base;  // scheme://host[:port]
  std::string path;
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("endpoint must be an http:// URL: '" + url + "'");
  if (url.compare(0, scheme, "http") != 0)
    throw ConfigError("only plain http endpoints are supported: '" + url + "'");
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

std::string request_once(const Endpoint& ep, const std::string& body, const RemoteSettings& remote) {
  httplib::Client client(ep.base);
  const auto sec = remote.timeout_ms / 1000;
  const auto usec = (remote.timeout_ms % 1000) * 1000;
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);
  httplib::Headers headers;
  if (!remote.auth_token.empty()) headers.emplace("Authorization", "Bearer " + remote.auth_token);
  auto res = client.Post(ep.path, headers, body, "application/json");
  if (!res) throw TransportError("request to " + ep.base + ep.path + " failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300)
    throw TransportError("request to " + ep.base + ep.path + " returned HTTP " + std::to_string(res->status));
  return res->body;
}

}  // namespace

ExtractionOutcome extract_remote(const Item& item, const PromptSpec& spec, const RemoteSettings& remote,
                                 const GroundingConfig& grounding) {
  const Endpoint ep = split_endpoint(remote.endpoint);
  const std::string body = json{{"prompt", build_prompt(item, spec)}}.dump();
  const int attempts = 1 + std::max(0, remote.retries);
  for (int attempt = 1;; ++attempt) {
    try {
      const std::string reply = request_once(ep, body, remote);
      json envelope;
      try {
        envelope = json::parse(reply);
      } catch (const json::exception&) {
        throw ParseError("reply envelope is not JSON", reply);
      }
      if (!envelope.is_object() || !envelope.contains("text") || !envelope["text"].is_string())
        throw ParseError("reply envelope lacks a string 'text' field", reply);
      DescriptorSet parsed = parse_llm_response(envelope["text"].get<std::string>());
      GroundingReport report = validate_grounding(parsed, item, grounding);
      return {drop_violations(std::move(parsed), report), std::move(report)};
    } catch (const TransportError&) {
      if (attempt >= attempts) throw;
    } catch (const ParseError&) {
      if (attempt >= attempts) throw;
    }
    if (remote.retry_backoff_ms > 0)
      std::this_thread::sleep_for(std::chrono::milliseconds(remote.retry_backoff_ms * attempt));
  }
}

ExtractionOutcome RuleBasedBackend::extract(const Item& item) const {
  return {extract_rule_based(item, lexicon_), GroundingReport{item.id, {}}};
}

RemoteLlmBackend::RemoteLlmBackend(PromptSpec spec, RemoteSettings remote, GroundingConfig grounding)
    : spec_(std::move(spec)), remote_(std::move(remote)), grounding_(std::move(grounding)) {
  spec_.validate();
  split_endpoint(remote_.endpoint);
}

ExtractionOutcome RemoteLlmBackend::extract(const Item& item) const {
  return extract_remote(item, spec_, remote_, grounding_);
}

BatchExtraction extract_batch(const std::vector<Item>& items, const ExtractionBackend& backend,
                              std::size_t max_in_flight) {
  std::vector<Item> sorted = items;
  std::sort(sorted.begin(), sorted.end(), [](const Item& a, const Item& b) { return a.id < b.id; });
  std::vector<std::optional<ExtractionOutcome>> outcomes(sorted.size());
  std::vector<std::string> errors(sorted.size());
  parallel_for(sorted.size(), max_in_flight, [&](std::size_t i) {
    try {
      outcomes[i] = backend.extract(sorted[i]);
    } catch (const std::exception& e) {
      errors[i] = e.what();
      if (errors[i].empty()) errors[i] = "extraction failed";
    }
  });
  BatchExtraction out;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (!outcomes[i]) {
      out.failures.push_back({sorted[i].id, errors[i]});
      continue;
    }
    if (!outcomes[i]->dropped.grounded()) out.dropped.push_back(outcomes[i]->dropped);
    if (!outcomes[i]->descriptors.empty()) out.descriptors.emplace(sorted[i].id, std::move(outcomes[i]->descriptors));
  }
  return out;
}

std::string serialize_failures(const std::vector<ExtractionFailure>& failures) {
  std::string out;
  for (const auto& f : failures) out += json{{"item_id", f.item_id}, {"reason", f.reason}}.dump() + "\n";
  return out;
}

}  // namespace dshelf
