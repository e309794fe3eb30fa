#include "wse/partition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "wse/error.hpp"

namespace wse {

using nlohmann::json;

std::string pseudo_token_id(const std::string& lemma, int set_index, TokenRole role,
                            const SenseId& target_sense) {
  return lemma + "#" + std::to_string(set_index) + "#" +
         (role == TokenRole::kSource ? "src" : "tgt") + "#" + target_sense.value;
}

Partition make_partition(const SenseInventory& inv, const WordType& word,
                         const SenseId& target_sense, int set_index) {
  if (word.senses.size() < 2) {
    throw InvariantError("cannot partition monosemous word '" + word.lemma + "'");
  }
  if (!std::binary_search(word.senses.begin(), word.senses.end(), target_sense)) {
    throw InvariantError("word '" + word.lemma + "' has no sense '" + target_sense.value + "'");
  }
  Partition p;
  p.word = word.lemma;
  p.target_sense = target_sense;
  p.source_token = pseudo_token_id(word.lemma, set_index, TokenRole::kSource, target_sense);
  p.target_token = pseudo_token_id(word.lemma, set_index, TokenRole::kTarget, target_sense);
  for (const auto& id : word.usages) {
    if (inv.usage(id).sense == target_sense) {
      p.target_usages.push_back(id);
    } else {
      p.source_usages.push_back(id);
    }
  }
  for (const auto& s : word.senses) {
    if (s != target_sense) p.source_senses.push_back(s);
  }
  return p;
}

UsageInstance replace_target(const UsageInstance& usage, const std::string& token) {
  UsageInstance out = usage;
  out.tokens[out.target_index] = token;
  out.lemma = token;
  return out;
}

std::vector<SenseId> sample_partition_targets(const WordType& word, std::size_t k, Rng& rng) {
  std::vector<SenseId> targets;
  targets.reserve(k);
  const std::size_t n = word.senses.size();
  if (n >= k) {
    for (std::size_t i : rng.sample_without_replacement(n, k)) targets.push_back(word.senses[i]);
  } else {
    for (std::size_t i = 0; i < k; ++i) targets.push_back(word.senses[rng.index(n)]);
  }
  return targets;
}

PartitionSet::PartitionSet(int index, std::uint64_t rng_seed,
                           std::map<std::string, Partition> partitions)
    : index_(index), rng_seed_(rng_seed), partitions_(std::move(partitions)) {
  for (const auto& [word, p] : partitions_) {
    tokens_.emplace(p.source_token, TokenRef{word, TokenRole::kSource});
    tokens_.emplace(p.target_token, TokenRef{word, TokenRole::kTarget});
  }
}

const Partition& PartitionSet::at(const std::string& word) const {
  auto it = partitions_.find(word);
  if (it == partitions_.end()) {
    throw DataError("word '" + word + "' is not partitioned in set " + std::to_string(index_));
  }
  return it->second;
}

const TokenRef* PartitionSet::find_token(const std::string& token) const {
  auto it = tokens_.find(token);
  return it == tokens_.end() ? nullptr : &it->second;
}

std::vector<UsageInstance> PartitionSet::replaced_usages(const SenseInventory& inv) const {
  std::vector<UsageInstance> out;
  out.reserve(inv.usages().size());
  for (const auto& u : inv.usages()) {
    auto it = partitions_.find(u.lemma);
    if (it == partitions_.end()) {
      out.push_back(u);
      continue;
    }
    const Partition& p = it->second;
    out.push_back(replace_target(u, u.sense == p.target_sense ? p.target_token : p.source_token));
  }
  return out;
}

std::vector<PartitionSet> build_partition_sets(const SenseInventory& inv, std::size_t k,
                                               std::uint64_t seed) {
  std::vector<std::map<std::string, Partition>> per_set(k);
  Rng rng(seed);
  for (const auto& [lemma, word] : inv.word_types()) {
    if (word.senses.size() < 2) continue;
    auto targets = sample_partition_targets(word, k, rng);
    for (std::size_t i = 0; i < k; ++i) {
      per_set[i].emplace(lemma, make_partition(inv, word, targets[i], static_cast<int>(i)));
    }
  }
  std::vector<PartitionSet> sets;
  sets.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    sets.emplace_back(static_cast<int>(i), seed, std::move(per_set[i]));
  }
  return sets;
}

Split split_words(const SenseInventory& inv, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("train_fraction must lie in (0, 1)");
  }
  std::vector<std::string> words;
  for (const auto& [lemma, _] : inv.word_types()) words.push_back(lemma);
  Rng rng(seed);
  rng.shuffle(words);
  const auto n_train =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(words.size())));
  Split split;
  for (std::size_t i = 0; i < words.size(); ++i) {
    (i < n_train ? split.train_words : split.test_words).insert(words[i]);
  }
  return split;
}

void save_manifest(const PartitionSet& set, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& [word, p] : set.partitions()) {
    json j;
    j["set"] = set.index();
    j["word"] = word;
    j["target_sense"] = p.target_sense.value;
    j["source_token"] = p.source_token;
    j["target_token"] = p.target_token;
    out << j.dump() << '\n';
  }
}

PartitionSet load_manifest(const SenseInventory& inv, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::map<std::string, Partition> partitions;
  int index = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
      const int set = j.at("set").get<int>();
      if (index < 0) index = set;
      if (set != index) throw DataError("mixed set indices");
      const auto word = j.at("word").get<std::string>();
      const WordType* w = inv.find_word(word);
      if (w == nullptr) throw DataError("word '" + word + "' not in corpus");
      Partition p = make_partition(inv, *w, SenseId{j.at("target_sense").get<std::string>()}, set);
      if (p.source_token != j.at("source_token").get<std::string>() ||
          p.target_token != j.at("target_token").get<std::string>()) {
        throw DataError("token ids do not match the naming scheme");
      }
      partitions.emplace(word, std::move(p));
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return PartitionSet(std::max(index, 0), 0, std::move(partitions));
}

void save_split(const Split& split, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& w : split.train_words) out << json{{"word", w}, {"side", "train"}}.dump() << '\n';
  for (const auto& w : split.test_words) out << json{{"word", w}, {"side", "test"}}.dump() << '\n';
}

Split load_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  Split split;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      auto j = json::parse(line);
      const auto side = j.at("side").get<std::string>();
      const auto word = j.at("word").get<std::string>();
      if (side == "train") {
        split.train_words.insert(word);
      } else if (side == "test") {
        split.test_words.insert(word);
      } else {
        throw DataError("unknown side '" + side + "'");
      }
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return split;
}

}  // namespace wse
