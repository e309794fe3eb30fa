#pragma once

// Synthetic corpora with a planted sense-extension regularity: every word's
// senses are successive images of a random generator vector under one
// hidden linear map, so a learned transform can recover the relation.

#include <cstddef>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wse/corpus.hpp"
#include "wse/embed.hpp"

namespace wse {

struct SynthConfig {
  std::size_t words = 400;
  std::size_t senses = 3;
  std::size_t usages_per_sense = 20;
  std::uint32_t dimension = 32;
  std::uint32_t shared_dims = 22;   // rotated by acos(rho) between senses
  std::uint32_t context_dims = 8;   // carries usage-level context noise only
  double rho = 0.9;                 // cosine between consecutive senses on the shared part
  double noise = 0.05;              // isotropic per-usage noise
  double context_scale = 0.0;       // norm scale of the context component
  std::size_t context_tokens = 4;   // filler tokens around the target
  std::uint64_t seed = 0;
};

struct SynthCorpus {
  std::vector<UsageInstance> usages;
  EmbeddingStore store;       // keyed by usage id, token = lemma
  Eigen::MatrixXd hidden_map; // sense k+1 = hidden_map * sense k (noise-free)
};

SynthCorpus make_synth_corpus(const SynthConfig& cfg);

struct SkewConfig {
  std::size_t high_count = 15;
  std::size_t few_min = 1;
  std::size_t few_max = 10;
};

struct WsdSplit {
  std::vector<UsageInstance> train;
  std::vector<UsageInstance> test;
};

// Per word, senses are shuffled and assigned roles: the first gets
// `high_count` training usages, the second between few_min and few_max,
// the rest none. Remaining usages go to the test side.
WsdSplit skewed_wsd_split(const SenseInventory& inv, const std::set<std::string>& words,
                          const SkewConfig& skew, std::uint64_t seed);

}  // namespace wse
