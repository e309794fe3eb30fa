#pragma once

// Ranking evaluation of sense extension: trials with sampled negatives,
// precision@1 / MRR, aggregation across partition sets, and the taxonomy
// relatedness analysis.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "wse/chaining.hpp"
#include "wse/corpus.hpp"
#include "wse/embed.hpp"
#include "wse/learn.hpp"
#include "wse/partition.hpp"

namespace wse {

struct Trial {
  std::string word;
  std::string target_usage;
  std::string target_token;
  std::string ground_truth;            // source token of the same word
  std::vector<std::string> negatives;  // source tokens of other test words

  std::vector<std::string> candidates() const;
};

// One trial per sampled target usage of every test-side word. At most
// `usages_per_token` usages are drawn per target token (0 takes all).
// Negatives come uniformly without replacement from the other test words,
// with a generator derived from (seed, trial index).
std::vector<Trial> build_trials(const PartitionSet& set, const Split& split,
                                std::size_t n_negatives, std::uint64_t seed,
                                std::size_t usages_per_token = 0);

enum class Scorer { kPrototype, kExemplar, kSts, kRandom };

std::string scorer_name(Scorer s);
Scorer parse_scorer(const std::string& name);

// Everything a scorer may need besides the trials.
struct ScoringContext {
  const EmbeddingStore* store = nullptr;   // prototype / exemplar
  const SenseInventory* replaced = nullptr;  // sts: usages with pseudo-tokens in place
  ToyEncoderConfig encoder;                // sts
  std::optional<TransformModel> model;     // none means identity
  SimilarityKernel kernel;                 // used when no model is set
  std::uint64_t seed = 0;                  // random
};

struct SetResult {
  double precision = 0.0;
  double mrr = 0.0;
  std::vector<std::size_t> ranks;  // 1-based rank of the ground truth per trial
};

SetResult evaluate(const std::vector<Trial>& trials, Scorer scorer, const ScoringContext& ctx);

struct WseReport {
  double mean_precision = 0.0;
  double mrr = 0.0;
  std::vector<std::pair<double, double>> per_set;  // (precision, mrr)
  double std_precision = 0.0;                      // sample standard deviation
  double std_mrr = 0.0;
};

WseReport aggregate(const std::vector<SetResult>& sets);

// Tree over sense ids. Loaded from "child<TAB>parent" lines; the root is the
// only id that never appears as a child.
class Taxonomy {
 public:
  Taxonomy() = default;
  explicit Taxonomy(std::map<SenseId, SenseId> parent);

  const SenseId& root() const { return root_; }
  bool contains(const SenseId& s) const;
  // depth(root) == 1
  std::size_t depth(const SenseId& s) const;
  // Ancestors from s up to the root, inclusive.
  std::vector<SenseId> path_to_root(const SenseId& s) const;
  const std::map<SenseId, SenseId>& parent() const { return parent_; }

 private:
  std::map<SenseId, SenseId> parent_;
  std::map<SenseId, std::size_t> depth_;
  SenseId root_;
};

Taxonomy load_taxonomy(const std::filesystem::path& path);

// 2 * depth(lcs) / (depth(a) + depth(b)), lcs the deepest common ancestor.
double wu_palmer(const SenseId& a, const SenseId& b, const Taxonomy& tax);

// Mean Wu-Palmer similarity between the held-out sense and each source sense.
double partition_relatedness(const Partition& p, const Taxonomy& tax);

struct RelatednessBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  std::map<std::string, double> precision;  // per scorer; 0 when count == 0
};

// Buckets trials into `n_bins` equal-width bins over the observed range of
// relatedness, and reports the per-bin top-1 rate of each scorer.
std::vector<RelatednessBin> relatedness_bins(
    const PartitionSet& set, const Taxonomy& tax, const std::vector<Trial>& trials,
    const std::map<std::string, std::vector<std::size_t>>& ranks_by_scorer, std::size_t n_bins);

}  // namespace wse
