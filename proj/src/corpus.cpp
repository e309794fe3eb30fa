#include "wse/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

#include "wse/error.hpp"

namespace wse {

using nlohmann::json;

bool is_content_pos(const std::string& pos) {
  return pos == "noun" || pos == "verb" || pos == "adjective" || pos == "adverb";
}

SenseInventory::SenseInventory(std::vector<UsageInstance> usages,
                               std::optional<FirstSenseRank> first_sense_rank)
    : usages_(std::move(usages)) {
  std::map<std::string, std::set<SenseId>> senses;
  for (std::size_t i = 0; i < usages_.size(); ++i) {
    const UsageInstance& u = usages_[i];
    if (u.id.empty()) {
      throw InvariantError("usage #" + std::to_string(i) + " has an empty id");
    }
    if (!index_.emplace(u.id, i).second) {
      throw InvariantError("usage " + u.id + ": duplicate id");
    }
    if (u.target_index >= u.tokens.size()) {
      throw InvariantError("usage " + u.id + ": target_index " + std::to_string(u.target_index) +
                           " out of bounds for " + std::to_string(u.tokens.size()) + " tokens");
    }
    if (u.tokens[u.target_index] != u.lemma) {
      throw InvariantError("usage " + u.id + ": token at target_index is '" +
                           u.tokens[u.target_index] + "', expected lemma '" + u.lemma + "'");
    }
    if (u.sense.value.empty()) {
      throw InvariantError("usage " + u.id + ": empty sense id");
    }
    WordType& w = words_[u.lemma];
    w.lemma = u.lemma;
    w.usages.push_back(u.id);
    senses[u.lemma].insert(u.sense);
  }
  for (auto& [lemma, w] : words_) {
    const auto& s = senses[lemma];
    w.senses.assign(s.begin(), s.end());
  }

  if (first_sense_rank) {
    FirstSenseRank kept;
    for (auto& [lemma, ranked] : *first_sense_rank) {
      const WordType* w = find_word(lemma);
      if (w == nullptr) continue;
      std::vector<SenseId> sorted = ranked;
      std::sort(sorted.begin(), sorted.end());
      if (sorted != w->senses) {
        throw InvariantError("first-sense rank for '" + lemma +
                             "' is not a permutation of its senses");
      }
      kept.emplace(lemma, ranked);
    }
    first_sense_rank_ = std::move(kept);
  }
}

const WordType* SenseInventory::find_word(const std::string& lemma) const {
  auto it = words_.find(lemma);
  return it == words_.end() ? nullptr : &it->second;
}

const UsageInstance* SenseInventory::find_usage(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &usages_[it->second];
}

const UsageInstance& SenseInventory::usage(const std::string& id) const {
  const UsageInstance* u = find_usage(id);
  if (u == nullptr) throw DataError("unknown usage id '" + id + "'");
  return *u;
}

std::size_t SenseInventory::sense_count(const std::string& lemma, const SenseId& sense) const {
  const WordType* w = find_word(lemma);
  if (w == nullptr) return 0;
  return static_cast<std::size_t>(std::count_if(w->usages.begin(), w->usages.end(),
                                                [&](const std::string& id) {
                                                  return usage(id).sense == sense;
                                                }));
}

namespace {

UsageInstance usage_from_json(const json& j) {
  UsageInstance u;
  u.id = j.at("id").get<std::string>();
  u.tokens = j.at("tokens").get<std::vector<std::string>>();
  auto idx = j.at("target_index").get<long long>();
  // Negative indices are an invariant violation, not a parse failure.
  u.target_index = idx < 0 ? u.tokens.size() : static_cast<std::size_t>(idx);
  u.lemma = j.at("lemma").get<std::string>();
  u.sense.value = j.at("sense_id").get<std::string>();
  u.pos = j.at("pos").get<std::string>();
  return u;
}

template <typename Fn>
void for_each_record(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

}  // namespace

std::vector<UsageInstance> read_usages(const std::filesystem::path& path) {
  std::vector<UsageInstance> usages;
  for_each_record(path, [&](const json& j) { usages.push_back(usage_from_json(j)); });
  return usages;
}

SenseInventory load_corpus(const std::filesystem::path& path,
                           const std::optional<std::filesystem::path>& first_sense_path) {
  std::optional<SenseInventory::FirstSenseRank> rank;
  if (first_sense_path) rank = load_first_sense_rank(*first_sense_path);
  return SenseInventory(read_usages(path), std::move(rank));
}

std::string usage_to_json_line(const UsageInstance& u) {
  json j;
  j["id"] = u.id;
  j["tokens"] = u.tokens;
  j["target_index"] = u.target_index;
  j["lemma"] = u.lemma;
  j["sense_id"] = u.sense.value;
  j["pos"] = u.pos;
  return j.dump();
}

void save_corpus(const std::vector<UsageInstance>& usages, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& u : usages) out << usage_to_json_line(u) << '\n';
}

void save_corpus(const SenseInventory& inv, const std::filesystem::path& path) {
  save_corpus(inv.usages(), path);
}

SenseInventory::FirstSenseRank load_first_sense_rank(const std::filesystem::path& path) {
  SenseInventory::FirstSenseRank rank;
  for_each_record(path, [&](const json& j) {
    std::vector<SenseId> senses;
    for (const auto& s : j.at("senses")) senses.push_back(SenseId{s.get<std::string>()});
    rank[j.at("lemma").get<std::string>()] = std::move(senses);
  });
  return rank;
}

void save_first_sense_rank(const SenseInventory::FirstSenseRank& rank,
                           const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& [lemma, senses] : rank) {
    json j;
    j["lemma"] = lemma;
    j["senses"] = json::array();
    for (const auto& s : senses) j["senses"].push_back(s.value);
    out << j.dump() << '\n';
  }
}

SenseInventory filter_vocabulary(const SenseInventory& inv, std::size_t min_senses,
                                 std::size_t min_mentions) {
  // Per retained word, the set of senses that survive.
  std::map<std::string, std::set<SenseId>> keep;
  for (const auto& [lemma, w] : inv.word_types()) {
    std::map<SenseId, std::size_t> counts;
    bool all_content = true;
    for (const auto& id : w.usages) {
      const UsageInstance& u = inv.usage(id);
      all_content = all_content && is_content_pos(u.pos);
      ++counts[u.sense];
    }
    if (!all_content) continue;
    std::set<SenseId> supported;
    for (const auto& [sense, n] : counts) {
      if (n >= min_mentions) supported.insert(sense);
    }
    if (supported.size() >= min_senses) keep.emplace(lemma, std::move(supported));
  }

  std::vector<UsageInstance> usages;
  for (const auto& u : inv.usages()) {
    auto it = keep.find(u.lemma);
    if (it != keep.end() && it->second.count(u.sense)) usages.push_back(u);
  }

  std::optional<SenseInventory::FirstSenseRank> rank;
  if (inv.first_sense_rank()) {
    rank.emplace();
    for (const auto& [lemma, ranked] : *inv.first_sense_rank()) {
      auto it = keep.find(lemma);
      if (it == keep.end()) continue;
      auto& out = (*rank)[lemma];
      for (const auto& s : ranked) {
        if (it->second.count(s)) out.push_back(s);
      }
    }
  }
  return SenseInventory(std::move(usages), std::move(rank));
}

CorpusStats corpus_stats(const SenseInventory& inv) {
  CorpusStats stats;
  stats.word_types = inv.word_types().size();
  stats.usages = inv.usages().size();
  stats.empty = stats.word_types == 0;
  if (!stats.empty) {
    std::size_t total = 0;
    for (const auto& [_, w] : inv.word_types()) total += w.senses.size();
    stats.mean_senses = static_cast<double>(total) / static_cast<double>(stats.word_types);
  }
  return stats;
}

}  // namespace wse
