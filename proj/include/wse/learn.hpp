#pragma once

// Learning a linear transform of the embedding space from episodes of
// source/target token pairs with in-batch negatives.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wse/chaining.hpp"
#include "wse/embed.hpp"
#include "wse/partition.hpp"

namespace wse {

struct TransformModel {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;  // always sized D; ignored unless use_bias
  bool use_bias = false;
  SimilarityKernel kernel;

  static TransformModel identity(Eigen::Index dimension, SimilarityKernel kernel = {},
                                 bool use_bias = false);
  // Identity plus N(0, sigma^2) noise on every weight entry.
  static TransformModel initialize(Eigen::Index dimension, std::uint64_t seed, double sigma = 1e-3,
                                   SimilarityKernel kernel = {}, bool use_bias = false);

  Eigen::Index dimension() const { return weight.rows(); }

  // Applies the map to every row of `rows`.
  Eigen::MatrixXd apply_rows(const Eigen::Ref<const Eigen::MatrixXd>& rows) const;

  bool operator==(const TransformModel& other) const;
};

Eigen::VectorXd transform(const TransformModel& model, const Eigen::Ref<const Eigen::VectorXd>& h);

struct Episode {
  std::vector<std::pair<std::string, std::string>> pairs;  // (source token, target token)
  std::vector<std::string> contexts;                       // one target usage per pair
};

enum class OptimizerKind { kSgd, kAdam };

struct TrainConfig {
  std::size_t batch_size = 16;
  double learning_rate = 2e-5;
  std::size_t epochs = 8;
  ChainingModel model_kind = ChainingModel::kExemplar;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Sum over pairs of the negative log-softmax of the true source's score,
// with the other sources in the episode as negatives. All embeddings pass
// through `model` first.
double episode_loss(const TransformModel& model, const Episode& episode,
                    const EmbeddingStore& store, ChainingModel kind);

struct EpisodeGradient {
  double loss = 0.0;
  Eigen::MatrixXd d_weight;
  Eigen::VectorXd d_bias;  // zero when the model has no bias
};

EpisodeGradient episode_grad(const TransformModel& model, const Episode& episode,
                             const EmbeddingStore& store, ChainingModel kind);

// Draws one target usage per pair of `words` from `set`.
Episode sample_episode(const std::vector<std::string>& words, const PartitionSet& set,
                       const EmbeddingStore& store, Rng& rng);

struct TrainResult {
  TransformModel model;
  std::vector<double> losses;  // one per episode, in training order
};

TrainResult train(const TransformModel& init, const PartitionSet& set, const Split& split,
                  const EmbeddingStore& store, const TrainConfig& cfg);

// "WSET", u32 D, flags byte, D*D f64 weights row-major, then D f64 bias
// when flag bit 0 is set. Bit 1 marks the negative squared Euclidean kernel.
// Bit 2 marks a non-unit temperature, stored as a trailing f64.
void save_checkpoint(const TransformModel& model, const std::filesystem::path& path);
TransformModel load_checkpoint(const std::filesystem::path& path);

}  // namespace wse
