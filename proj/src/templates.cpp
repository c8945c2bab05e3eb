#include "dshelf/templates.hpp"

#include <set>

#include "json.hpp"

namespace dshelf {

using nlohmann::json;

void TemplateSpec::validate() const {
  if (slots.empty() || slots.size() > 2)
    throw ConfigError("template must have 1 or 2 slots, got " + std::to_string(slots.size()));
}

void DecorationConfig::validate() const {
  if (max_title_chars < 8) throw ConfigError("max_title_chars must be >= 8");
}

std::string assemble_title(const std::vector<Descriptor>& source, const TemplateSpec& templ) {
  std::string out;
  for (std::size_t i = 0; i < source.size(); ++i) {
    if (i) out += templ.joiner;
    out += source[i].display();
  }
  return collapse_whitespace(out);
}

std::vector<TitleCandidate> expand_titles(const DescriptorSet& set,
                                          const std::vector<TemplateSpec>& templates) {
  std::vector<TitleCandidate> out;
  std::set<std::string> seen;
  auto emit = [&](std::vector<Descriptor> source, const TemplateSpec& templ) {
    std::string display = assemble_title(source, templ);
    if (!seen.insert(canonicalize(display)).second) return;
    out.push_back({std::move(display), std::move(source), templ});
  };
  for (const auto& templ : templates) {
    templ.validate();
    const auto& first = set.of(templ.slots[0]);
    if (templ.slots.size() == 1) {
      for (const auto& d : first) emit({d}, templ);
      continue;
    }
    const auto& second = set.of(templ.slots[1]);
    for (const auto& a : first)
      for (const auto& b : second) emit({a, b}, templ);
  }
  return out;
}

std::optional<DecoratedTitle> decorate(const TitleCandidate& candidate, const DecorationConfig& cfg) {
  std::string display = collapse_whitespace(candidate.display + candidate.templ.suffix);
  if (display.empty() || utf8_length(display) > cfg.max_title_chars) return std::nullopt;
  return DecoratedTitle{cfg.header, std::move(display)};
}

std::vector<TemplateSpec> default_templates() {
  using T = DescriptorType;
  return {
      {{T::Theme}, " ", " Audiobooks"},
      {{T::StoryTrope}, " ", " Audiobooks"},
      {{T::PersonalSituation}, " ", " Audiobooks"},
      {{T::Setting}, " ", " Audiobooks"},
      {{T::Mood, T::Genre}, " ", ""},
      {{T::Genre}, " ", ""},
  };
}

std::vector<TemplateSpec> parse_templates(const std::string& json_text) {
  std::vector<TemplateSpec> out;
  try {
    const json doc = json::parse(json_text);
    if (!doc.is_array()) throw ConfigError("templates document must be a JSON array");
    for (const auto& obj : doc) {
      TemplateSpec t;
      for (const auto& s : obj.at("slots")) {
        const auto type = parse_descriptor_type(s.get<std::string>());
        if (!type) throw ConfigError("unknown template slot type '" + s.get<std::string>() + "'");
        t.slots.push_back(*type);
      }
      t.joiner = obj.value("joiner", " ");
      t.suffix = obj.value("suffix", "");
      t.validate();
      out.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed templates document: ") + e.what());
  }
  return out;
}

std::vector<TemplateSpec> load_templates(const std::filesystem::path& path) {
  return parse_templates(read_file(path));
}

}  // namespace dshelf
