#pragma once

// Sense-annotated usage corpora and the vocabulary filter that selects
// polysemous word types.

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace wse {

// Opaque sense label, e.g. a synset key.
struct SenseId {
  std::string value;

  friend auto operator<=>(const SenseId&, const SenseId&) = default;
};

// Part-of-speech tags accepted by the vocabulary filter.
bool is_content_pos(const std::string& pos);

struct UsageInstance {
  std::string id;
  std::vector<std::string> tokens;
  std::size_t target_index = 0;
  std::string lemma;
  SenseId sense;
  std::string pos;

  bool operator==(const UsageInstance&) const = default;
};

struct WordType {
  std::string lemma;
  std::vector<SenseId> senses;    // ascending, no duplicates
  std::vector<std::string> usages;  // usage ids in corpus order

  bool operator==(const WordType&) const = default;
};

// Immutable collection of word types and their usages. Construction
// validates every invariant and throws on the first violation.
class SenseInventory {
 public:
  using FirstSenseRank = std::map<std::string, std::vector<SenseId>>;

  SenseInventory() = default;
  explicit SenseInventory(std::vector<UsageInstance> usages,
                          std::optional<FirstSenseRank> first_sense_rank = std::nullopt);

  const std::map<std::string, WordType>& word_types() const { return words_; }
  const std::vector<UsageInstance>& usages() const { return usages_; }

  const WordType* find_word(const std::string& lemma) const;
  const UsageInstance* find_usage(const std::string& id) const;
  const UsageInstance& usage(const std::string& id) const;

  // Number of usages of `lemma` labelled `sense`.
  std::size_t sense_count(const std::string& lemma, const SenseId& sense) const;

  const std::optional<FirstSenseRank>& first_sense_rank() const { return first_sense_rank_; }

  bool operator==(const SenseInventory& other) const {
    return usages_ == other.usages_ && first_sense_rank_ == other.first_sense_rank_;
  }

 private:
  std::vector<UsageInstance> usages_;
  std::unordered_map<std::string, std::size_t> index_;
  std::map<std::string, WordType> words_;
  std::optional<FirstSenseRank> first_sense_rank_;
};

// One usage per line as a JSON object
// {"id","tokens","target_index","lemma","sense_id","pos"}.
SenseInventory load_corpus(const std::filesystem::path& path,
                           const std::optional<std::filesystem::path>& first_sense_path = std::nullopt);
std::vector<UsageInstance> read_usages(const std::filesystem::path& path);
void save_corpus(const std::vector<UsageInstance>& usages, const std::filesystem::path& path);
void save_corpus(const SenseInventory& inv, const std::filesystem::path& path);

// Sidecar: one line per lemma, {"lemma": ..., "senses": [...]}.
SenseInventory::FirstSenseRank load_first_sense_rank(const std::filesystem::path& path);
void save_first_sense_rank(const SenseInventory::FirstSenseRank& rank,
                           const std::filesystem::path& path);

std::string usage_to_json_line(const UsageInstance& u);

// Keeps word types that have at least `min_senses` senses with at least
// `min_mentions` usages each and whose usages all carry a content POS.
// Under-supported senses are removed first, then the word is re-checked.
SenseInventory filter_vocabulary(const SenseInventory& inv, std::size_t min_senses = 2,
                                 std::size_t min_mentions = 10);

struct CorpusStats {
  std::size_t word_types = 0;
  std::size_t usages = 0;
  double mean_senses = 0.0;
  bool empty = true;
};

CorpusStats corpus_stats(const SenseInventory& inv);

}  // namespace wse
