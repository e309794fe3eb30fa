#pragma once

// Contextual embedding storage, the binary embedding file, and a
// deterministic toy encoder used when no external encoder is available.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "wse/corpus.hpp"

namespace wse {

class PartitionSet;

struct ContextualEmbedding {
  std::string usage_id;
  std::string token;
  std::vector<float> vector;

  bool operator==(const ContextualEmbedding&) const = default;
};

// Usage-keyed embedding records with an inverse token index. Prototypes and
// exemplar matrices are computed lazily; the cache is safe under concurrent
// first access and is dropped whenever a record is added.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::uint32_t dimension = 0);
  EmbeddingStore(const EmbeddingStore& other);
  EmbeddingStore& operator=(const EmbeddingStore& other);
  EmbeddingStore(EmbeddingStore&&) noexcept;
  EmbeddingStore& operator=(EmbeddingStore&&) noexcept;
  ~EmbeddingStore();

  std::uint32_t dimension() const { return dimension_; }
  std::size_t size() const { return records_.size(); }

  // Records in insertion order.
  const std::vector<ContextualEmbedding>& records() const { return records_; }

  void add(ContextualEmbedding record);

  const ContextualEmbedding* find(const std::string& usage_id) const;
  bool has_token(const std::string& token) const;
  std::span<const std::string> token_usages(const std::string& token) const;
  std::vector<std::string> tokens() const;

  // Vector of `usage_id` in double precision.
  Eigen::VectorXd vector(const std::string& usage_id) const;

  // Exemplar embeddings of `token`, one row per usage.
  std::shared_ptr<const Eigen::MatrixXd> exemplars(const std::string& token) const;

  // Arithmetic mean of the exemplars of `token`.
  std::shared_ptr<const Eigen::VectorXd> prototype(const std::string& token) const;

  bool operator==(const EmbeddingStore& other) const {
    return dimension_ == other.dimension_ && records_ == other.records_;
  }

 private:
  struct Cache;

  std::uint32_t dimension_;
  std::vector<ContextualEmbedding> records_;
  std::unordered_map<std::string, std::size_t> index_;
  std::unordered_map<std::string, std::vector<std::string>> by_token_;
  std::unique_ptr<Cache> cache_;
};

// Binary layout, all little-endian: "WSE1", u32 dimension, u64 count, then
// per record u16 id length, id bytes, u16 token length, token bytes, D f32.
void save_embeddings(const EmbeddingStore& store, const std::filesystem::path& path);
EmbeddingStore load_embeddings(const std::filesystem::path& path);

struct ToyEncoderConfig {
  std::uint32_t dimension = 64;
  double alpha = 0.5;
  std::uint64_t seed = 0;
};

// Unit-norm vector drawn deterministically from a hash of (s, seed), entries
// symmetric around zero before normalization.
Eigen::VectorXd typevec(const std::string& s, std::uint32_t dimension, std::uint64_t seed);

// alpha * typevec(token) + (1 - alpha) * mean typevec of the other tokens.
ContextualEmbedding toy_encode(const UsageInstance& usage, const std::string& token_at_target,
                               const ToyEncoderConfig& cfg);

// Encodes `usage` as if `candidate_token` stood at its target position.
ContextualEmbedding encode_substituted(const UsageInstance& usage,
                                       const std::string& candidate_token,
                                       const ToyEncoderConfig& cfg);

// Encodes each usage with the token found at its target position.
EmbeddingStore encode_usages(const std::vector<UsageInstance>& usages, const ToyEncoderConfig& cfg);

// Copy of a usage-keyed store whose records are relabelled with the
// pseudo-tokens of `set`. Records of unpartitioned words keep their token.
EmbeddingStore relabel_for_partitions(const EmbeddingStore& base, const SenseInventory& inv,
                                      const PartitionSet& set);

}  // namespace wse
