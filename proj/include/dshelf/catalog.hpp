#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "dshelf/error.hpp"
#include "dshelf/text.hpp"

namespace dshelf {

using ItemId = std::string;
using UserId = std::string;

/// One catalog entry: the metadata descriptors are extracted from.
struct Item {
  ItemId id;
  std::string title;
  std::vector<std::string> authors;
  std::string description;
  std::vector<std::string> genre_codes;  // BISAC-style subject codes

  bool operator==(const Item&) const = default;
};

// The ten descriptor types. Order is the canonical serialization order.
enum class DescriptorType : std::size_t {
  Genre,
  Theme,
  Character,
  Mood,
  Setting,
  PersonalSituation,
  StoryTrope,
  TargetAudience,
  Objective,
  NamedEntity,
};

inline constexpr std::size_t kDescriptorTypeCount = 10;

inline constexpr std::array<DescriptorType, kDescriptorTypeCount> kAllDescriptorTypes = {
    DescriptorType::Genre,          DescriptorType::Theme,       DescriptorType::Character,
    DescriptorType::Mood,           DescriptorType::Setting,     DescriptorType::PersonalSituation,
    DescriptorType::StoryTrope,     DescriptorType::TargetAudience, DescriptorType::Objective,
    DescriptorType::NamedEntity,
};

std::string_view to_string(DescriptorType t) noexcept;
std::optional<DescriptorType> parse_descriptor_type(std::string_view name) noexcept;

/// A typed tag. Identity is (type, canonical); display keeps the
/// human-facing spelling with whitespace normalized.
class Descriptor {
 public:
  /// Throws std::invalid_argument if display is blank.
  Descriptor(DescriptorType type, std::string_view display);

  DescriptorType type() const noexcept { return type_; }
  const std::string& display() const noexcept { return display_; }
  const std::string& canonical() const noexcept { return canonical_; }

  friend bool operator==(const Descriptor& a, const Descriptor& b) noexcept {
    return a.type_ == b.type_ && a.canonical_ == b.canonical_;
  }
  friend bool operator<(const Descriptor& a, const Descriptor& b) noexcept {
    return std::tie(a.type_, a.canonical_) < std::tie(b.type_, b.canonical_);
  }

 private:
  DescriptorType type_;
  std::string display_;
  std::string canonical_;
};

struct DescriptorHash {
  std::size_t operator()(const Descriptor& d) const noexcept;
};

/// Per-item descriptors, one ordered list per type. Insertion keeps first
/// occurrence and ignores later duplicates of the same canonical key.
class DescriptorSet {
 public:
  /// Returns false if an equal descriptor was already present.
  bool add(const Descriptor& d);

  const std::vector<Descriptor>& of(DescriptorType t) const noexcept {
    return lists_[static_cast<std::size_t>(t)];
  }
  bool contains(const Descriptor& d) const noexcept;
  bool empty() const noexcept;
  std::size_t size() const noexcept;

  /// Removes d if present; returns whether it was.
  bool remove(const Descriptor& d);

  bool operator==(const DescriptorSet&) const = default;

 private:
  std::array<std::vector<Descriptor>, kDescriptorTypeCount> lists_;
};

/// One line of the descriptors file.
struct DescriptorRecord {
  ItemId item_id;
  DescriptorType type;
  std::string text;
  std::size_t line = 0;  // source line, 0 when not read from a file
};

/// Immutable item store with per-item descriptors and descriptor document
/// frequencies (number of items carrying each descriptor).
class Catalog {
 public:
  Catalog() = default;

  /// Validates uniqueness and referential integrity; throws DataError.
  static Catalog build(std::vector<Item> items, const std::vector<DescriptorRecord>& records);
  static Catalog build(std::vector<Item> items, std::map<ItemId, DescriptorSet> descriptors);

  std::size_t size() const noexcept { return items_.size(); }
  bool contains(const ItemId& id) const noexcept { return items_.count(id) != 0; }

  /// Throws std::out_of_range for unknown ids.
  const Item& item(const ItemId& id) const;

  /// Items in ascending id order.
  const std::map<ItemId, Item>& items() const noexcept { return items_; }

  /// Empty set for items without descriptors.
  const DescriptorSet& descriptors(const ItemId& id) const noexcept;

  const std::map<ItemId, DescriptorSet>& all_descriptors() const noexcept { return descriptors_; }

  std::size_t document_frequency(const Descriptor& d) const noexcept;
  std::size_t document_frequency(DescriptorType t, std::string_view text) const;

  const std::map<std::pair<DescriptorType, std::string>, std::size_t>& document_frequencies()
      const noexcept {
    return df_;
  }

 private:
  std::map<ItemId, Item> items_;
  std::map<ItemId, DescriptorSet> descriptors_;
  std::map<std::pair<DescriptorType, std::string>, std::size_t> df_;
};

/// Recounts document frequencies from scratch.
std::map<std::pair<DescriptorType, std::string>, std::size_t> count_document_frequencies(
    const std::map<ItemId, DescriptorSet>& descriptors);

// NDJSON readers/writers for the item and descriptor files.
std::vector<Item> read_items(const std::filesystem::path& path);
std::vector<DescriptorRecord> read_descriptor_records(const std::filesystem::path& path);
Catalog load_catalog(const std::filesystem::path& items_path,
                     const std::filesystem::path& descriptors_path);

std::string item_to_json_line(const Item& item);
std::string descriptor_record_to_json_line(const ItemId& id, const Descriptor& d);

/// Records in (item id, type order, list order) order, one line each.
std::string serialize_descriptor_records(const std::map<ItemId, DescriptorSet>& descriptors);

/// Calls fn(line_number, line) for every non-blank line. Throws DataError
/// when the file cannot be opened.
template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace dshelf

#include <fstream>

namespace dshelf {

template <typename Fn>
void for_each_line(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    fn(n, line);
  }
}

}  // namespace dshelf
