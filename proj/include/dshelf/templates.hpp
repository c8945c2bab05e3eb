#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dshelf/catalog.hpp"

namespace dshelf {

/// Slot pattern for a shelf title, e.g. <Mood>+<Genre>. At most two slots.
struct TemplateSpec {
  std::vector<DescriptorType> slots;
  std::string joiner = " ";
  std::string suffix;

  /// Throws ConfigError on 0 or more than 2 slots.
  void validate() const;

  bool operator==(const TemplateSpec&) const = default;
};

struct TitleCandidate {
  std::string display;
  std::vector<Descriptor> source;  // one per slot, slot order
  TemplateSpec templ;
};

struct DecorationConfig {
  std::string header = "Audiobooks for you";
  std::size_t max_title_chars = 40;

  /// Throws ConfigError when max_title_chars < 8.
  void validate() const;
};

struct DecoratedTitle {
  std::string header;
  std::string display;

  bool operator==(const DecoratedTitle&) const = default;
};

/// Joins source displays with the template joiner, whitespace-collapsed.
std::string assemble_title(const std::vector<Descriptor>& source, const TemplateSpec& templ);

/// Cartesian product over the slot types for every template, deduplicated on
/// the canonical display. Order: template order, then descriptor list order
/// (first slot varies slowest).
std::vector<TitleCandidate> expand_titles(const DescriptorSet& set,
                                          const std::vector<TemplateSpec>& templates);

/// Appends the template suffix and attaches the header. nullopt when the
/// final display exceeds max_title_chars code points.
std::optional<DecoratedTitle> decorate(const TitleCandidate& candidate, const DecorationConfig& cfg);

/// Shipped default templates: single-descriptor titles for the specific types
/// plus <Mood>+<Genre>.
std::vector<TemplateSpec> default_templates();

std::vector<TemplateSpec> parse_templates(const std::string& json_text);
std::vector<TemplateSpec> load_templates(const std::filesystem::path& path);

}  // namespace dshelf
