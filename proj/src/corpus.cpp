#include "dshelf/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>

#include "json.hpp"

namespace dshelf {

namespace {

// Draws straight from the engine so output does not depend on the standard
// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::size_t below(std::size_t n) { return n ? static_cast<std::size_t>(engine_() % n) : 0; }
  std::size_t between(std::size_t lo, std::size_t hi) { return lo + below(hi - lo + 1); }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

class ZipfSampler {
 public:
  ZipfSampler() = default;
  ZipfSampler(std::size_t n, double s) : cumulative_(n) {
    double acc = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
      acc += 1.0 / std::pow(static_cast<double>(r + 1), s);
      cumulative_[r] = acc;
    }
  }

  std::size_t operator()(Rng& rng) const {
    const double u = rng.unit() * cumulative_.back();
    auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), cumulative_.size() - 1);
  }

 private:
  std::vector<double> cumulative_;
};

struct WordBank {
  std::vector<std::string> standalone;
  std::vector<std::string> qualifiers;
  std::vector<std::string> bases;

  std::vector<std::string> expand() const {
    std::vector<std::string> out = standalone;
    for (const auto& q : qualifiers)
      for (const auto& b : bases) out.push_back(q + " " + b);
    return out;
  }
};

const std::array<WordBank, kDescriptorTypeCount>& word_banks() {
  static const std::array<WordBank, kDescriptorTypeCount> kBanks = {{
      // Genre
      {{"Romance", "Fantasy", "Mystery", "Thriller", "Science Fiction", "Historical Fiction", "Horror",
        "Biography", "Memoir", "Self-Help", "Poetry", "Humor", "True Crime", "Business", "Philosophy",
        "Travel", "Cooking", "Juvenile Fiction", "Literary Fiction", "Women's Fiction", "Young Adult",
        "Psychology", "History", "Health", "Religion", "Sports", "Drama", "Adventure"},
       {},
       {}},
      // Theme
      {{"Overcoming Obstacles", "Global Politics"},
       {"Global", "Family", "Hidden", "Modern", "Ancient", "Personal", "Social", "Rural", "Urban", "Digital"},
       {"Friendship", "Identity", "Power", "Memory", "Faith", "Justice", "Ambition", "Betrayal", "Survival",
        "Innovation", "Grief", "Loyalty", "Freedom", "Secrets", "War"}},
      // Character
      {{"Female Protagonist"},
       {"Strong", "Reluctant", "Flawed", "Unlikely", "Young", "Elderly", "Brilliant", "Lonely"},
       {"Heroine", "Hero", "Detective", "Villain", "Mentor", "Narrator"}},
      // Mood
      {{"Emotional", "Uplifting", "Dark", "Adventurous", "Brilliant", "Powerful", "Cozy", "Tense", "Whimsical",
        "Haunting", "Hopeful", "Romantic", "Suspenseful", "Thought-Provoking", "Heartwarming", "Bittersweet",
        "Funny", "Melancholy", "Inspiring", "Gritty", "Lighthearted", "Eerie", "Epic", "Quiet", "Playful"},
       {},
       {}},
      // Setting
      {{"China's Cultural Revolution", "Victorian London"},
       {"Small-Town", "Coastal", "Wartime", "Medieval", "Futuristic", "Rural", "Island", "Desert"},
       {"England", "Japan", "America", "France", "India", "Space Station", "Village", "Kingdom"}},
      // PersonalSituation
      {{},
       {"Dealing with", "Recovering from", "Navigating", "Facing"},
       {"Loss", "Anxiety", "Divorce", "Burnout", "Illness", "Addiction", "Rejection", "Loneliness", "Failure",
        "Debt"}},
      // StoryTrope
      {{"Enemies to Lovers", "Found Family", "Chosen One", "Fish out of Water", "Second Chance Romance",
        "Locked Room Mystery", "Time Loop", "Fake Dating", "Unreliable Narrator", "Redemption Arc",
        "Coming of Age", "Rags to Riches", "Forbidden Love", "Love Triangle", "Road Trip", "Hidden Identity",
        "Heist Gone Wrong", "Secret Society", "Small-Town Romance", "Revenge Quest"},
       {"Slow-Burn", "Reverse", "Royal", "Cozy", "Dark"},
       {"Rivalry", "Quest", "Heist", "Betrayal", "Courtship", "Mystery"}},
      // TargetAudience
      {{"Children's Literature", "Young Adults", "Teens", "New Adults", "Parents", "Educators",
        "Professionals", "Seniors", "Students", "Book Clubs"},
       {},
       {}},
      // Objective
      {{},
       {"Learn", "Master", "Understand", "Improve"},
       {"Japanese", "Spanish", "Investing", "Public Speaking", "Meditation", "Leadership", "Cooking",
        "Negotiation", "Productivity", "Sleep"}},
      // NamedEntity
      {{"Britney Spears"},
       {"Napoleon", "Ada", "Marie", "Winston", "Frida", "Nikola", "Amelia", "Cleopatra", "Leonardo"},
       {"Bonaparte", "Lovelace", "Curie", "Churchill", "Kahlo", "Tesla", "Earhart", "Vinci", "Okafor"}},
  }};
  return kBanks;
}

const std::vector<std::string>& title_words() {
  static const std::vector<std::string> kWords = {
      "Silent", "River", "Glass", "Crown", "Winter", "Garden", "Shadow", "Letters", "Harbor", "Echo",
      "Orchard", "Lantern", "Paper", "Storm", "Compass", "Ember", "Meadow", "Signal", "Tide", "Atlas"};
  return kWords;
}

std::string pad(const char* prefix, std::size_t n) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s-%04zu", prefix, n);
  return buf;
}

std::string lower(std::string s) { return canonicalize(s); }

std::string describe(const DescriptorSet& set, Rng& rng) {
  using T = DescriptorType;
  auto names = [&](T t) {
    std::vector<std::string> out;
    for (const auto& d : set.of(t)) out.push_back(d.display());
    return out;
  };
  std::string text;
  const auto moods = names(T::Mood);
  const auto genres = names(T::Genre);
  text += "A " + (moods.empty() ? std::string("compelling") : lower(join(moods, " and "))) + " " +
          (genres.empty() ? std::string("story") : join(genres, " and ")) + " audiobook";
  if (auto v = names(T::Theme); !v.empty()) text += " exploring " + join(v, ", ");
  if (auto v = names(T::Setting); !v.empty()) text += ", set in " + join(v, " and ");
  text += ".";
  if (auto v = names(T::Character); !v.empty()) text += " It follows a " + lower(join(v, " and a ")) + ".";
  if (auto v = names(T::StoryTrope); !v.empty()) text += " Expect " + join(v, " and ") + ".";
  if (auto v = names(T::PersonalSituation); !v.empty()) text += " For anyone " + join(v, " or ") + ".";
  if (auto v = names(T::NamedEntity); !v.empty()) text += " Featuring " + join(v, " and ") + ".";
  if (auto v = names(T::Objective); !v.empty()) text += " Helps you " + join(v, " and ") + ".";
  if (auto v = names(T::TargetAudience); !v.empty()) text += " Written for " + join(v, " and ") + ".";
  static const char* kClosers[] = {" A listener favorite.", " Narrated with care.", "", " Unabridged."};
  text += kClosers[rng.below(4)];
  return text;
}

}  // namespace

void CorpusSpec::validate() const {
  for (const auto& r : per_item)
    if (r.min > r.max) throw ConfigError("corpus per-item count range has min > max");
  if (interests_per_user.min > interests_per_user.max || interactions_per_user.min > interactions_per_user.max ||
      mainstream_per_user.min > mainstream_per_user.max)
    throw ConfigError("corpus user ranges have min > max");
  if (!(zipf_exponent >= 0.0)) throw ConfigError("zipf_exponent must be >= 0");
}

Corpus generate_corpus(const CorpusSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  Corpus c;

  std::array<ZipfSampler, kDescriptorTypeCount> samplers;
  for (auto t : kAllDescriptorTypes) {
    const auto i = static_cast<std::size_t>(t);
    auto words = word_banks()[i].expand();
    rng.shuffle(words);
    words.resize(std::min(words.size(), spec.vocabulary[i]));
    samplers[i] = ZipfSampler(words.size(), spec.zipf_exponent);
    c.vocabulary[i] = std::move(words);
  }

  const auto& genres = c.vocabulary[static_cast<std::size_t>(DescriptorType::Genre)];
  std::map<std::string, std::string> genre_code;
  for (std::size_t g = 0; g < genres.size(); ++g) {
    char code[16];
    std::snprintf(code, sizeof code, "SYN%03zu000", g + 1);
    c.genre_code_map[code] = genres[g];
    genre_code[genres[g]] = code;
  }
  for (auto t : kAllDescriptorTypes) {
    if (t == DescriptorType::Genre) continue;
    for (const auto& w : c.vocabulary[static_cast<std::size_t>(t)]) c.lexicon.push_back({canonicalize(w), t, w});
  }

  std::map<std::pair<DescriptorType, std::string>, std::vector<ItemId>> carriers;
  for (std::size_t n = 1; n <= spec.item_count; ++n) {
    Item item;
    item.id = pad("item", n);
    DescriptorSet set;
    for (auto t : kAllDescriptorTypes) {
      const auto i = static_cast<std::size_t>(t);
      const auto& vocab = c.vocabulary[i];
      if (vocab.empty()) continue;
      const std::size_t want = std::min(rng.between(spec.per_item[i].min, spec.per_item[i].max), vocab.size());
      std::size_t got = 0;
      for (std::size_t attempt = 0; got < want && attempt < 16 * (want + 1); ++attempt)
        if (set.add(Descriptor(t, vocab[samplers[i](rng)]))) ++got;
    }
    const auto& words = title_words();
    item.title = "The " + words[rng.below(words.size())] + " " + words[rng.below(words.size())];
    item.authors = {pad("Author", rng.below(300) + 1)};
    item.description = describe(set, rng);
    for (const auto& g : set.of(DescriptorType::Genre)) item.genre_codes.push_back(genre_code.at(g.display()));
    for (auto t : kAllDescriptorTypes)
      for (const auto& d : set.of(t)) carriers[{t, d.canonical()}].push_back(item.id);
    if (!set.empty()) c.descriptors.emplace(item.id, std::move(set));
    c.items.push_back(std::move(item));
  }

  // Users are mixtures of a few interests drawn from the browsable types.
  static constexpr DescriptorType kInterestTypes[] = {DescriptorType::Theme, DescriptorType::Genre,
                                                      DescriptorType::StoryTrope, DescriptorType::Mood,
                                                      DescriptorType::Setting};
  std::vector<std::size_t> popularity(c.items.size());
  for (std::size_t i = 0; i < popularity.size(); ++i) popularity[i] = i;
  rng.shuffle(popularity);
  const ZipfSampler item_sampler(c.items.size(), spec.zipf_exponent);
  for (std::size_t n = 1; n <= spec.user_count && !c.items.empty(); ++n) {
    const UserId user = pad("user", n);
    std::vector<ItemId> pool;
    const std::size_t interests = rng.between(spec.interests_per_user.min, spec.interests_per_user.max);
    for (std::size_t k = 0; k < interests; ++k) {
      const auto t = kInterestTypes[rng.below(std::size(kInterestTypes))];
      const auto& vocab = c.vocabulary[static_cast<std::size_t>(t)];
      if (vocab.empty()) continue;
      auto it = carriers.find({t, canonicalize(vocab[samplers[static_cast<std::size_t>(t)](rng)])});
      if (it != carriers.end()) pool.insert(pool.end(), it->second.begin(), it->second.end());
    }
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    if (pool.empty()) pool.push_back(c.items[rng.below(c.items.size())].id);
    const std::size_t want =
        std::min(rng.between(spec.interactions_per_user.min, spec.interactions_per_user.max), pool.size());
    rng.shuffle(pool);
    pool.resize(want);
    const std::size_t mainstream = rng.between(spec.mainstream_per_user.min, spec.mainstream_per_user.max);
    for (std::size_t k = 0; k < mainstream; ++k) pool.push_back(c.items[popularity[item_sampler(rng)]].id);
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
    for (const auto& id : pool) c.interactions.push_back({user, id, static_cast<double>(rng.between(1, 5))});
  }
  return c;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string items;
  for (const auto& i : corpus.items) items += item_to_json_line(i) + "\n";
  write_file(dir / CorpusFiles::kItems, items);
  write_file(dir / CorpusFiles::kDescriptors, serialize_descriptor_records(corpus.descriptors));
  std::string interactions;
  for (const auto& in : corpus.interactions) interactions += interaction_to_json_line(in) + "\n";
  write_file(dir / CorpusFiles::kInteractions, interactions);
  std::string lexicon;
  for (const auto& e : corpus.lexicon)
    lexicon += nlohmann::ordered_json{{"pattern", e.pattern}, {"type", std::string(to_string(e.type))},
                                      {"display", e.display}}.dump() + "\n";
  write_file(dir / CorpusFiles::kLexicon, lexicon);
  write_file(dir / CorpusFiles::kGenreMap, nlohmann::json(corpus.genre_code_map).dump(2) + "\n");
}

}  // namespace dshelf
