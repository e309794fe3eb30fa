#include "wse/wsd.hpp"

#include <limits>

#include "wse/error.hpp"

namespace wse {

SenseCounts count_senses(const std::vector<UsageInstance>& usages) {
  SenseCounts counts;
  for (const auto& u : usages) ++counts[{u.lemma, u.sense}];
  return counts;
}

std::map<std::string, SenseId> most_frequent_senses(const SenseCounts& counts) {
  std::map<std::string, SenseId> mfs;
  std::map<std::string, std::size_t> best;
  // Keys are visited in (lemma, sense) order, so a strict comparison keeps
  // the smallest sense id among ties.
  for (const auto& [key, n] : counts) {
    auto it = best.find(key.first);
    if (it == best.end() || n > it->second) {
      best[key.first] = n;
      mfs[key.first] = key.second;
    }
  }
  return mfs;
}

SenseClassifier fit_classifier(const std::vector<UsageInstance>& train_usages,
                               const EmbeddingStore& store,
                               const std::optional<TransformModel>& transform,
                               std::optional<SenseInventory::FirstSenseRank> first_sense_rank) {
  if (train_usages.empty()) throw InvariantError("cannot fit a sense classifier on no usages");
  SenseClassifier clf;
  clf.transform = transform;
  clf.first_sense_rank = std::move(first_sense_rank);
  clf.train_counts = count_senses(train_usages);
  clf.mfs = most_frequent_senses(clf.train_counts);
  for (const auto& u : train_usages) {
    if (store.find(u.id) == nullptr) throw DataError("no embedding for usage '" + u.id + "'");
    Eigen::VectorXd h = store.vector(u.id);
    if (transform) h = wse::transform(*transform, h);
    auto [it, inserted] = clf.prototypes.try_emplace({u.lemma, u.sense}, h);
    if (!inserted) it->second += h;
  }
  for (auto& [key, sum] : clf.prototypes) sum /= static_cast<double>(clf.train_counts.at(key));
  return clf;
}

std::optional<SenseId> predict(const SenseClassifier& clf, const SenseInventory& inv,
                               const UsageInstance& usage, const EmbeddingStore& store) {
  const auto mfs = clf.mfs.find(usage.lemma);
  if (mfs == clf.mfs.end()) {
    if (clf.first_sense_rank) {
      auto it = clf.first_sense_rank->find(usage.lemma);
      if (it != clf.first_sense_rank->end() && !it->second.empty()) return it->second.front();
    }
    return std::nullopt;
  }

  std::vector<SenseId> candidates;
  if (const WordType* w = inv.find_word(usage.lemma)) {
    candidates = w->senses;
  } else {
    for (auto it = clf.train_counts.lower_bound({usage.lemma, SenseId{}});
         it != clf.train_counts.end() && it->first.first == usage.lemma; ++it) {
      candidates.push_back(it->first.second);
    }
  }

  if (store.find(usage.id) == nullptr) throw DataError("no embedding for usage '" + usage.id + "'");
  Eigen::VectorXd h = store.vector(usage.id);
  if (clf.transform) h = transform(*clf.transform, h);

  const SenseId* best = nullptr;
  double best_score = -std::numeric_limits<double>::infinity();
  for (const auto& s : candidates) {
    auto it = clf.prototypes.find({usage.lemma, s});
    if (it == clf.prototypes.end()) continue;
    const double score = h.dot(it->second);
    if (best == nullptr || score > best_score) {
      best = &s;
      best_score = score;
    }
  }
  if (best == nullptr) return mfs->second;
  return *best;
}

std::string frequency_bin(std::size_t train_count, std::size_t few_max) {
  if (train_count == 0) return "zero_shot";
  if (train_count <= few_max) return "few_shot";
  return "high";
}

WsdReport score_predictions(const std::vector<UsageInstance>& test_usages,
                            const std::vector<std::optional<SenseId>>& predictions,
                            const SenseCounts& train_counts, std::size_t few_max) {
  if (predictions.size() != test_usages.size()) {
    throw InvariantError("prediction count does not match test usages");
  }
  WsdReport r;
  for (const char* bin : {"high", "few_shot", "zero_shot"}) {
    r.f1_by_bin[bin] = 0.0;
    r.bin_counts[bin] = 0;
  }
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test_usages.size(); ++i) {
    const auto& u = test_usages[i];
    const bool hit = predictions[i] && *predictions[i] == u.sense;
    if (!predictions[i]) ++r.abstained;
    auto it = train_counts.find({u.lemma, u.sense});
    const std::string bin = frequency_bin(it == train_counts.end() ? 0 : it->second, few_max);
    ++r.bin_counts[bin];
    ++r.pos_counts[u.pos];
    if (hit) {
      ++correct;
      r.f1_by_bin[bin] += 1.0;
      r.per_pos[u.pos] += 1.0;
    } else {
      r.per_pos.try_emplace(u.pos, 0.0);
    }
  }
  r.total = test_usages.size();
  if (r.total > 0) r.f1_overall = static_cast<double>(correct) / static_cast<double>(r.total);
  for (auto& [bin, v] : r.f1_by_bin) {
    if (r.bin_counts[bin] > 0) v /= static_cast<double>(r.bin_counts[bin]);
  }
  for (auto& [pos, v] : r.per_pos) v /= static_cast<double>(r.pos_counts[pos]);
  return r;
}

WsdReport evaluate_wsd(const SenseClassifier& clf, const SenseInventory& inv,
                       const std::vector<UsageInstance>& test_usages, const EmbeddingStore& store,
                       std::size_t few_max) {
  std::vector<std::optional<SenseId>> predictions;
  predictions.reserve(test_usages.size());
  for (const auto& u : test_usages) predictions.push_back(predict(clf, inv, u, store));
  return score_predictions(test_usages, predictions, clf.train_counts, few_max);
}

WsdReport baseline_mfs(const SenseInventory& train, const std::vector<UsageInstance>& test_usages,
                       std::size_t few_max) {
  const SenseCounts counts = count_senses(train.usages());
  const auto mfs = most_frequent_senses(counts);
  std::vector<std::optional<SenseId>> predictions;
  for (const auto& u : test_usages) {
    auto it = mfs.find(u.lemma);
    predictions.push_back(it == mfs.end() ? std::nullopt : std::optional<SenseId>(it->second));
  }
  return score_predictions(test_usages, predictions, counts, few_max);
}

WsdReport baseline_s1(const SenseInventory& train, const std::vector<UsageInstance>& test_usages,
                      bool* degraded, std::size_t few_max) {
  if (degraded != nullptr) *degraded = !train.first_sense_rank().has_value();
  if (!train.first_sense_rank()) return baseline_mfs(train, test_usages, few_max);
  const auto& rank = *train.first_sense_rank();
  const SenseCounts counts = count_senses(train.usages());
  const auto mfs = most_frequent_senses(counts);
  std::vector<std::optional<SenseId>> predictions;
  for (const auto& u : test_usages) {
    auto r = rank.find(u.lemma);
    if (r != rank.end() && !r->second.empty()) {
      predictions.push_back(r->second.front());
    } else if (auto m = mfs.find(u.lemma); m != mfs.end()) {
      predictions.push_back(m->second);
    } else {
      predictions.push_back(std::nullopt);
    }
  }
  return score_predictions(test_usages, predictions, counts, few_max);
}

}  // namespace wse
