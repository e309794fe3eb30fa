#pragma once

// Splitting polysemous word types into source/target pseudo-tokens, the
// repeated partition sampling, and the word-level train/test split.

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "wse/corpus.hpp"
#include "wse/rng.hpp"

namespace wse {

enum class TokenRole { kSource, kTarget };

// "<lemma>#<set-index>#<src|tgt>#<target-sense>"
std::string pseudo_token_id(const std::string& lemma, int set_index, TokenRole role,
                            const SenseId& target_sense);

// A word split into a source token (all senses but one) and a target token
// (the held-out sense).
struct Partition {
  std::string word;
  SenseId target_sense;
  std::string source_token;
  std::string target_token;
  std::vector<std::string> source_usages;
  std::vector<std::string> target_usages;

  // Senses carried by the source token, ascending.
  std::vector<SenseId> source_senses;
};

Partition make_partition(const SenseInventory& inv, const WordType& word,
                         const SenseId& target_sense, int set_index = 0);

// Copy of `usage` with the lemma at target_index swapped for `token`.
UsageInstance replace_target(const UsageInstance& usage, const std::string& token);

// k target senses: distinct when the word has at least k senses, otherwise
// drawn with replacement.
std::vector<SenseId> sample_partition_targets(const WordType& word, std::size_t k, Rng& rng);

struct TokenRef {
  std::string word;
  TokenRole role;
};

class PartitionSet {
 public:
  PartitionSet() = default;
  PartitionSet(int index, std::uint64_t rng_seed, std::map<std::string, Partition> partitions);

  int index() const { return index_; }
  std::uint64_t rng_seed() const { return rng_seed_; }
  const std::map<std::string, Partition>& partitions() const { return partitions_; }

  const Partition& at(const std::string& word) const;
  const TokenRef* find_token(const std::string& token) const;

  // Every usage of the inventory with partitioned words replaced by their
  // pseudo-tokens. Usages of unpartitioned words are left as-is.
  std::vector<UsageInstance> replaced_usages(const SenseInventory& inv) const;

 private:
  int index_ = 0;
  std::uint64_t rng_seed_ = 0;
  std::map<std::string, Partition> partitions_;
  std::map<std::string, TokenRef> tokens_;
};

std::vector<PartitionSet> build_partition_sets(const SenseInventory& inv, std::size_t k,
                                               std::uint64_t seed);

struct Split {
  std::set<std::string> train_words;
  std::set<std::string> test_words;
};

Split split_words(const SenseInventory& inv, double train_fraction, std::uint64_t seed);

// Manifest: {"set","word","target_sense","source_token","target_token"} per line.
void save_manifest(const PartitionSet& set, const std::filesystem::path& path);
// Rebuilds a set from its manifest and the (filtered) inventory it was made from.
PartitionSet load_manifest(const SenseInventory& inv, const std::filesystem::path& path);

// Split file: {"word": ..., "side": "train" | "test"} per line.
void save_split(const Split& split, const std::filesystem::path& path);
Split load_split(const std::filesystem::path& path);

}  // namespace wse
