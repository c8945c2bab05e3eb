#include "dshelf/catalog.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace dshelf {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, kDescriptorTypeCount> kTypeNames = {
    "Genre",   "Theme",      "Character",      "Mood",      "Setting",
    "PersonalSituation", "StoryTrope", "TargetAudience", "Objective", "NamedEntity",
};

const DescriptorSet& empty_set() {
  static const DescriptorSet kEmpty;
  return kEmpty;
}

std::string required_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
  if (!it->is_string()) throw std::invalid_argument(std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::vector<std::string> string_array(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_array()) throw std::invalid_argument(std::string("field '") + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) throw std::invalid_argument(std::string("field '") + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

std::string_view to_string(DescriptorType t) noexcept {
  return kTypeNames[static_cast<std::size_t>(t)];
}

std::optional<DescriptorType> parse_descriptor_type(std::string_view name) noexcept {
  for (std::size_t i = 0; i < kTypeNames.size(); ++i)
    if (kTypeNames[i] == name) return static_cast<DescriptorType>(i);
  return std::nullopt;
}

Descriptor::Descriptor(DescriptorType type, std::string_view display)
    : type_(type), display_(collapse_whitespace(display)), canonical_(canonicalize(display)) {
  if (canonical_.empty()) throw std::invalid_argument("descriptor display must not be blank");
}

std::size_t DescriptorHash::operator()(const Descriptor& d) const noexcept {
  return std::hash<std::string>{}(d.canonical()) * 31 + static_cast<std::size_t>(d.type());
}

bool DescriptorSet::add(const Descriptor& d) {
  if (contains(d)) return false;
  lists_[static_cast<std::size_t>(d.type())].push_back(d);
  return true;
}

bool DescriptorSet::contains(const Descriptor& d) const noexcept {
  const auto& list = of(d.type());
  return std::find(list.begin(), list.end(), d) != list.end();
}

bool DescriptorSet::remove(const Descriptor& d) {
  auto& list = lists_[static_cast<std::size_t>(d.type())];
  auto it = std::find(list.begin(), list.end(), d);
  if (it == list.end()) return false;
  list.erase(it);
  return true;
}

bool DescriptorSet::empty() const noexcept {
  return std::all_of(lists_.begin(), lists_.end(), [](const auto& l) { return l.empty(); });
}

std::size_t DescriptorSet::size() const noexcept {
  std::size_t n = 0;
  for (const auto& l : lists_) n += l.size();
  return n;
}

std::map<std::pair<DescriptorType, std::string>, std::size_t> count_document_frequencies(
    const std::map<ItemId, DescriptorSet>& descriptors) {
  std::map<std::pair<DescriptorType, std::string>, std::size_t> df;
  for (const auto& [id, set] : descriptors)
    for (auto t : kAllDescriptorTypes)
      for (const auto& d : set.of(t)) ++df[{t, d.canonical()}];
  return df;
}

Catalog Catalog::build(std::vector<Item> items, std::map<ItemId, DescriptorSet> descriptors) {
  Catalog c;
  for (auto& item : items) {
    if (item.id.empty()) throw DataError("item with empty id");
    if (canonicalize(item.title).empty()) throw DataError("item '" + item.id + "' has an empty title");
    const ItemId id = item.id;
    if (!c.items_.emplace(id, std::move(item)).second) throw DataError("duplicate item id '" + id + "'");
  }
  for (auto& [id, set] : descriptors) {
    if (!c.items_.count(id)) throw DataError("descriptors reference unknown item '" + id + "'");
    if (!set.empty()) c.descriptors_.emplace(id, std::move(set));
  }
  c.df_ = count_document_frequencies(c.descriptors_);
  return c;
}

Catalog Catalog::build(std::vector<Item> items, const std::vector<DescriptorRecord>& records) {
  std::map<ItemId, DescriptorSet> sets;
  for (const auto& r : records) sets[r.item_id].add(Descriptor(r.type, r.text));
  return build(std::move(items), std::move(sets));
}

const Item& Catalog::item(const ItemId& id) const {
  auto it = items_.find(id);
  if (it == items_.end()) throw std::out_of_range("unknown item '" + id + "'");
  return it->second;
}

const DescriptorSet& Catalog::descriptors(const ItemId& id) const noexcept {
  auto it = descriptors_.find(id);
  return it == descriptors_.end() ? empty_set() : it->second;
}

std::size_t Catalog::document_frequency(const Descriptor& d) const noexcept {
  auto it = df_.find({d.type(), d.canonical()});
  return it == df_.end() ? 0 : it->second;
}

std::size_t Catalog::document_frequency(DescriptorType t, std::string_view text) const {
  auto it = df_.find({t, canonicalize(text)});
  return it == df_.end() ? 0 : it->second;
}

std::vector<Item> read_items(const std::filesystem::path& path) {
  std::vector<Item> items;
  std::set<ItemId> seen;
  for_each_line(path, [&](std::size_t n, const std::string& line) {
    try {
      const json obj = json::parse(line);
      if (!obj.is_object()) throw std::invalid_argument("record is not a JSON object");
      Item item;
      item.id = required_string(obj, "id");
      if (item.id.empty()) throw std::invalid_argument("empty id");
      item.title = required_string(obj, "title");
      if (canonicalize(item.title).empty()) throw std::invalid_argument("empty title");
      item.authors = string_array(obj, "authors");
      item.description = obj.contains("description") ? required_string(obj, "description") : "";
      item.genre_codes = string_array(obj, "genre_codes");
      if (!seen.insert(item.id).second) throw std::invalid_argument("duplicate item id '" + item.id + "'");
      items.push_back(std::move(item));
    } catch (const json::exception& e) {
      throw DataError(path.string(), n, std::string("malformed JSON: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw DataError(path.string(), n, e.what());
    }
  });
  return items;
}

std::vector<DescriptorRecord> read_descriptor_records(const std::filesystem::path& path) {
  std::vector<DescriptorRecord> records;
  for_each_line(path, [&](std::size_t n, const std::string& line) {
    try {
      const json obj = json::parse(line);
      if (!obj.is_object()) throw std::invalid_argument("record is not a JSON object");
      DescriptorRecord r;
      r.item_id = required_string(obj, "item_id");
      const std::string type = required_string(obj, "type");
      const auto t = parse_descriptor_type(type);
      if (!t) throw std::invalid_argument("unknown descriptor type '" + type + "'");
      r.type = *t;
      r.text = required_string(obj, "text");
      r.line = n;
      if (canonicalize(r.text).empty()) throw std::invalid_argument("blank descriptor text");
      records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw DataError(path.string(), n, std::string("malformed JSON: ") + e.what());
    } catch (const std::invalid_argument& e) {
      throw DataError(path.string(), n, e.what());
    }
  });
  return records;
}

Catalog load_catalog(const std::filesystem::path& items_path,
                     const std::filesystem::path& descriptors_path) {
  auto items = read_items(items_path);
  const auto records = read_descriptor_records(descriptors_path);
  std::set<ItemId> ids;
  for (const auto& i : items) ids.insert(i.id);
  for (const auto& r : records) {
    if (!ids.count(r.item_id))
      throw DataError(descriptors_path.string(), r.line,
                      "descriptor references unknown item '" + r.item_id + "'");
  }
  return Catalog::build(std::move(items), records);
}

std::string item_to_json_line(const Item& item) {
  nlohmann::ordered_json obj = {{"id", item.id},
              {"title", item.title},
              {"authors", item.authors},
              {"description", item.description},
              {"genre_codes", item.genre_codes}};
  return obj.dump();
}

std::string descriptor_record_to_json_line(const ItemId& id, const Descriptor& d) {
  nlohmann::ordered_json obj = {{"item_id", id}, {"type", std::string(to_string(d.type()))}, {"text", d.display()}};
  return obj.dump();
}

std::string serialize_descriptor_records(const std::map<ItemId, DescriptorSet>& descriptors) {
  std::string out;
  for (const auto& [id, set] : descriptors)
    for (auto t : kAllDescriptorTypes)
      for (const auto& d : set.of(t)) {
        out += descriptor_record_to_json_line(id, d);
        out += '\n';
      }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
}

}  // namespace dshelf
