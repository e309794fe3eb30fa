#include "wse/chaining.hpp"

#include <algorithm>
#include <cmath>

#include "wse/error.hpp"

namespace wse {

namespace {

void check_dims(Eigen::Index a, Eigen::Index b) {
  if (a != b) {
    throw InvariantError("dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

double kernel(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v,
              const SimilarityKernel& k) {
  check_dims(u.size(), v.size());
  switch (k.kind) {
    case KernelKind::kDot:
      return u.dot(v) / k.temperature;
    case KernelKind::kNegSquaredEuclidean:
      return -(u - v).squaredNorm() / k.temperature;
  }
  return 0.0;
}

Eigen::VectorXd kernel_rows(const Eigen::Ref<const Eigen::MatrixXd>& exemplars,
                            const Eigen::Ref<const Eigen::VectorXd>& h_star,
                            const SimilarityKernel& k) {
  check_dims(exemplars.cols(), h_star.size());
  switch (k.kind) {
    case KernelKind::kDot:
      return exemplars * h_star / k.temperature;
    case KernelKind::kNegSquaredEuclidean:
      return -(exemplars.rowwise() - h_star.transpose()).rowwise().squaredNorm() / k.temperature;
  }
  return {};
}

double log_mean_exp(const Eigen::Ref<const Eigen::VectorXd>& x) {
  const double m = x.maxCoeff();
  return m + std::log((x.array() - m).exp().sum() / static_cast<double>(x.size()));
}

double prototype_score(const Eigen::Ref<const Eigen::MatrixXd>& exemplars,
                       const Eigen::Ref<const Eigen::VectorXd>& h_star, const SimilarityKernel& k) {
  if (exemplars.rows() == 0) throw InvariantError("prototype of an empty exemplar set");
  const Eigen::VectorXd z = exemplars.colwise().mean().transpose();
  return kernel(h_star, z, k);
}

double exemplar_score(const Eigen::Ref<const Eigen::MatrixXd>& exemplars,
                      const Eigen::Ref<const Eigen::VectorXd>& h_star, const SimilarityKernel& k) {
  if (exemplars.rows() == 0) throw InvariantError("exemplar score over an empty exemplar set");
  // One exemplar: log(exp(x)) is returned as x exactly, so both models agree.
  if (exemplars.rows() == 1) return kernel(h_star, exemplars.row(0).transpose(), k);
  return log_mean_exp(kernel_rows(exemplars, h_star, k));
}

double score_prototype(const EmbeddingStore& store, const std::string& source_token,
                       const Eigen::Ref<const Eigen::VectorXd>& h_star, const SimilarityKernel& k) {
  return kernel(h_star, *store.prototype(source_token), k);
}

double score_exemplar(const EmbeddingStore& store, const std::string& source_token,
                      const Eigen::Ref<const Eigen::VectorXd>& h_star, const SimilarityKernel& k) {
  const auto ex = store.exemplars(source_token);
  if (ex->rows() == 1) return score_prototype(store, source_token, h_star, k);
  return exemplar_score(*ex, h_star, k);
}

void order_and_normalize(std::vector<CandidateScore>& scores) {
  std::sort(scores.begin(), scores.end(), [](const CandidateScore& a, const CandidateScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.token < b.token;
  });
  if (scores.empty()) return;
  const double m = scores.front().score;
  double total = 0.0;
  for (auto& s : scores) {
    s.probability = std::exp(s.score - m);
    total += s.probability;
  }
  for (auto& s : scores) s.probability /= total;
}

std::vector<CandidateScore> rank_candidates(const Eigen::Ref<const Eigen::VectorXd>& h_star,
                                            const std::vector<std::string>& candidates,
                                            const EmbeddingStore& store, ChainingModel model,
                                            const SimilarityKernel& k) {
  if (candidates.empty()) throw InvariantError("rank_candidates needs at least one candidate");
  std::vector<CandidateScore> out;
  out.reserve(candidates.size());
  for (const auto& token : candidates) {
    if (!store.has_token(token)) throw DataError("unknown candidate token '" + token + "'");
    const double s = model == ChainingModel::kPrototype ? score_prototype(store, token, h_star, k)
                                                        : score_exemplar(store, token, h_star, k);
    out.push_back({token, s, 0.0, false});
  }
  order_and_normalize(out);
  return out;
}

double cosine(const Eigen::Ref<const Eigen::VectorXd>& u, const Eigen::Ref<const Eigen::VectorXd>& v,
              bool* degenerate) {
  check_dims(u.size(), v.size());
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) {
    if (degenerate != nullptr) *degenerate = true;
    return 0.0;
  }
  if (degenerate != nullptr) *degenerate = false;
  return u.dot(v) / (nu * nv);
}

std::vector<CandidateScore> baseline_sts(const UsageInstance& usage,
                                         const std::vector<std::string>& candidates,
                                         const ToyEncoderConfig& cfg, const EmbeddingMap& project) {
  if (candidates.empty()) throw InvariantError("baseline_sts needs at least one candidate");
  auto encode = [&](const std::string& token) {
    const auto rec = encode_substituted(usage, token, cfg);
    Eigen::VectorXd v =
        Eigen::Map<const Eigen::VectorXf>(rec.vector.data(), cfg.dimension).cast<double>();
    return project ? project(v) : v;
  };
  const Eigen::VectorXd target = encode(usage.tokens.at(usage.target_index));
  std::vector<CandidateScore> out;
  out.reserve(candidates.size());
  for (const auto& token : candidates) {
    CandidateScore s{token, 0.0, 0.0, false};
    s.score = cosine(encode(token), target, &s.degenerate);
    out.push_back(std::move(s));
  }
  order_and_normalize(out);
  return out;
}

std::vector<CandidateScore> baseline_random(const std::vector<std::string>& candidates, Rng& rng) {
  std::vector<CandidateScore> out;
  out.reserve(candidates.size());
  for (const auto& token : candidates) {
    out.push_back({token, 0.0, 1.0 / static_cast<double>(candidates.size()), false});
  }
  rng.shuffle(out);
  return out;
}

}  // namespace wse
