#pragma once

// Nearest-prototype sense classification over (optionally transformed)
// embeddings, MFS / first-sense baselines, and frequency-binned F1.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wse/corpus.hpp"
#include "wse/embed.hpp"
#include "wse/learn.hpp"

namespace wse {

using SenseKey = std::pair<std::string, SenseId>;  // (lemma, sense)
using SenseCounts = std::map<SenseKey, std::size_t>;

struct SenseClassifier {
  std::map<SenseKey, Eigen::VectorXd> prototypes;
  SenseCounts train_counts;
  std::map<std::string, SenseId> mfs;
  std::optional<TransformModel> transform;  // none means identity
  std::optional<SenseInventory::FirstSenseRank> first_sense_rank;
};

SenseCounts count_senses(const std::vector<UsageInstance>& usages);

// Most frequent sense per lemma; ties go to the smallest sense id.
std::map<std::string, SenseId> most_frequent_senses(const SenseCounts& counts);

SenseClassifier fit_classifier(const std::vector<UsageInstance>& train_usages,
                               const EmbeddingStore& store,
                               const std::optional<TransformModel>& transform = std::nullopt,
                               std::optional<SenseInventory::FirstSenseRank> first_sense_rank =
                                   std::nullopt);

// Candidates are the lemma's senses in `inv`. Returns nullopt (abstain) for a
// lemma never seen in training when no first-sense rank covers it.
std::optional<SenseId> predict(const SenseClassifier& clf, const SenseInventory& inv,
                               const UsageInstance& usage, const EmbeddingStore& store);

struct WsdReport {
  double f1_overall = 0.0;
  std::map<std::string, double> f1_by_bin;  // high, few_shot, zero_shot
  std::map<std::string, std::size_t> bin_counts;
  std::map<std::string, double> per_pos;
  std::map<std::string, std::size_t> pos_counts;
  std::size_t total = 0;
  std::size_t abstained = 0;
};

// Gold-sense training count 0 -> zero_shot, 1..few_max -> few_shot, else high.
std::string frequency_bin(std::size_t train_count, std::size_t few_max = 10);

WsdReport score_predictions(const std::vector<UsageInstance>& test_usages,
                            const std::vector<std::optional<SenseId>>& predictions,
                            const SenseCounts& train_counts, std::size_t few_max = 10);

WsdReport evaluate_wsd(const SenseClassifier& clf, const SenseInventory& inv,
                       const std::vector<UsageInstance>& test_usages, const EmbeddingStore& store,
                       std::size_t few_max = 10);

// `train` is the training inventory; predictions are constant per lemma.
WsdReport baseline_mfs(const SenseInventory& train, const std::vector<UsageInstance>& test_usages,
                       std::size_t few_max = 10);
// Falls back to MFS when `train` has no first-sense rank and sets *degraded.
WsdReport baseline_s1(const SenseInventory& train, const std::vector<UsageInstance>& test_usages,
                      bool* degraded = nullptr, std::size_t few_max = 10);

}  // namespace wse
