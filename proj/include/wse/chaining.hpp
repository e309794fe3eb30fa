#pragma once

// Chaining scorers: how well a query embedding fits the existing usages of
// a candidate source token, under a prototype (mean) or exemplar
// (mean-of-kernels) model.

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "wse/corpus.hpp"
#include "wse/embed.hpp"
#include "wse/rng.hpp"

namespace wse {

enum class KernelKind { kDot, kNegSquaredEuclidean };
enum class ChainingModel { kPrototype, kExemplar };

// Affinity between two embeddings is exp(kernel(u, v)); the kernel is a
// similarity, so larger means closer.
struct SimilarityKernel {
  KernelKind kind = KernelKind::kDot;
  double temperature = 1.0;
};

double kernel(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v,
              const SimilarityKernel& k);

// kernel(h_star, row) for every row of `exemplars`.
Eigen::VectorXd kernel_rows(const Eigen::Ref<const Eigen::MatrixXd>& exemplars,
                            const Eigen::Ref<const Eigen::VectorXd>& h_star,
                            const SimilarityKernel& k);

// log((1/n) * sum_i exp(x_i)), shifted by the max for stability.
double log_mean_exp(const Eigen::Ref<const Eigen::VectorXd>& x);

// Scores against an explicit exemplar matrix (one row per usage).
double prototype_score(const Eigen::Ref<const Eigen::MatrixXd>& exemplars,
                       const Eigen::Ref<const Eigen::VectorXd>& h_star, const SimilarityKernel& k);
double exemplar_score(const Eigen::Ref<const Eigen::MatrixXd>& exemplars,
                      const Eigen::Ref<const Eigen::VectorXd>& h_star, const SimilarityKernel& k);

double score_prototype(const EmbeddingStore& store, const std::string& source_token,
                       const Eigen::Ref<const Eigen::VectorXd>& h_star, const SimilarityKernel& k);
double score_exemplar(const EmbeddingStore& store, const std::string& source_token,
                      const Eigen::Ref<const Eigen::VectorXd>& h_star, const SimilarityKernel& k);

using EmbeddingMap = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct CandidateScore {
  std::string token;
  double score = 0.0;        // unnormalized log-affinity
  double probability = 0.0;  // softmax over the candidate set
  bool degenerate = false;   // set when a zero-norm vector forced the score to 0
};

// Sorts by descending score, ties by ascending token id, and fills in the
// softmax probabilities.
void order_and_normalize(std::vector<CandidateScore>& scores);

std::vector<CandidateScore> rank_candidates(const Eigen::Ref<const Eigen::VectorXd>& h_star,
                                            const std::vector<std::string>& candidates,
                                            const EmbeddingStore& store, ChainingModel model,
                                            const SimilarityKernel& k);

double cosine(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v,
              bool* degenerate = nullptr);

// Contextual-similarity baseline: each candidate is scored by the cosine
// between the usage re-encoded with that candidate at the target position
// and the usage encoded with its own target token. `project`, when given,
// maps both encodings before the cosine.
std::vector<CandidateScore> baseline_sts(const UsageInstance& usage,
                                         const std::vector<std::string>& candidates,
                                         const ToyEncoderConfig& cfg,
                                         const EmbeddingMap& project = {});

// Uniformly random order; every candidate gets probability 1/n.
std::vector<CandidateScore> baseline_random(const std::vector<std::string>& candidates, Rng& rng);

}  // namespace wse
