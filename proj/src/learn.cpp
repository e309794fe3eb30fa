#include "wse/learn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "wse/binary_io.hpp"
#include "wse/error.hpp"

namespace wse {

TransformModel TransformModel::identity(Eigen::Index dimension, SimilarityKernel kernel,
                                        bool use_bias) {
  TransformModel m;
  m.weight = Eigen::MatrixXd::Identity(dimension, dimension);
  m.bias = Eigen::VectorXd::Zero(dimension);
  m.use_bias = use_bias;
  m.kernel = kernel;
  return m;
}

TransformModel TransformModel::initialize(Eigen::Index dimension, std::uint64_t seed, double sigma,
                                          SimilarityKernel kernel, bool use_bias) {
  TransformModel m = identity(dimension, kernel, use_bias);
  Rng rng(seed);
  for (Eigen::Index r = 0; r < dimension; ++r) {
    for (Eigen::Index c = 0; c < dimension; ++c) m.weight(r, c) += rng.normal(0.0, sigma);
  }
  return m;
}

Eigen::MatrixXd TransformModel::apply_rows(const Eigen::Ref<const Eigen::MatrixXd>& rows) const {
  if (rows.cols() != dimension()) {
    throw InvariantError("transform expects dimension " + std::to_string(dimension()) + ", got " +
                         std::to_string(rows.cols()));
  }
  Eigen::MatrixXd out = rows * weight.transpose();
  if (use_bias) out.rowwise() += bias.transpose();
  return out;
}

bool TransformModel::operator==(const TransformModel& other) const {
  return weight == other.weight && use_bias == other.use_bias &&
         (!use_bias || bias == other.bias) && kernel.kind == other.kernel.kind &&
         kernel.temperature == other.kernel.temperature;
}

Eigen::VectorXd transform(const TransformModel& model, const Eigen::Ref<const Eigen::VectorXd>& h) {
  if (h.size() != model.dimension()) {
    throw InvariantError("transform expects dimension " + std::to_string(model.dimension()) +
                         ", got " + std::to_string(h.size()));
  }
  Eigen::VectorXd out = model.weight * h;
  if (model.use_bias) out += model.bias;
  return out;
}

namespace {

// Kernel matrix between query rows and key rows.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& queries, const Eigen::MatrixXd& keys,
                              const SimilarityKernel& k) {
  Eigen::MatrixXd s = queries * keys.transpose();
  if (k.kind == KernelKind::kNegSquaredEuclidean) {
    const Eigen::VectorXd qn = queries.rowwise().squaredNorm();
    const Eigen::VectorXd kn = keys.rowwise().squaredNorm();
    s = 2.0 * s;
    s.colwise() -= qn;
    s.rowwise() -= kn.transpose();
  }
  return s / k.temperature;
}

// Gradients of sum_ij A_ij * kernel(q_i, k_j) with respect to the queries
// and keys.
void kernel_backward(const Eigen::MatrixXd& a, const Eigen::MatrixXd& queries,
                     const Eigen::MatrixXd& keys, const SimilarityKernel& k,
                     Eigen::MatrixXd& grad_queries, Eigen::MatrixXd& grad_keys) {
  const double t = k.temperature;
  if (k.kind == KernelKind::kDot) {
    grad_queries.noalias() += a * keys / t;
    grad_keys.noalias() += a.transpose() * queries / t;
    return;
  }
  // d/dq -|q-k|^2 = -2(q-k), d/dk = 2(q-k)
  const Eigen::VectorXd row_sum = a.rowwise().sum();
  const Eigen::VectorXd col_sum = a.colwise().sum().transpose();
  grad_queries.noalias() += (-2.0 / t) * (row_sum.asDiagonal() * queries - a * keys);
  grad_keys.noalias() += (2.0 / t) * (a.transpose() * queries - col_sum.asDiagonal() * keys);
}

Eigen::VectorXd row_log_sum_exp(const Eigen::MatrixXd& s) {
  Eigen::VectorXd out(s.rows());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double m = s.row(i).maxCoeff();
    out[i] = m + std::log((s.row(i).array() - m).exp().sum());
  }
  return out;
}

Eigen::MatrixXd row_softmax(const Eigen::MatrixXd& s) {
  Eigen::MatrixXd p(s.rows(), s.cols());
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    const double m = s.row(i).maxCoeff();
    p.row(i) = (s.row(i).array() - m).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

EpisodeGradient run_episode(const TransformModel& model, const Episode& episode,
                            const EmbeddingStore& store, ChainingModel kind, bool want_grad) {
  const auto n = static_cast<Eigen::Index>(episode.pairs.size());
  const Eigen::Index d = model.dimension();
  if (n == 0) throw InvariantError("empty episode");
  if (episode.contexts.size() != episode.pairs.size()) {
    throw InvariantError("episode needs exactly one context per pair");
  }
  if (store.dimension() != d) {
    throw InvariantError("store dimension " + std::to_string(store.dimension()) +
                         " does not match transform dimension " + std::to_string(d));
  }

  Eigen::MatrixXd raw_queries(n, d);
  std::vector<std::shared_ptr<const Eigen::MatrixXd>> raw_exemplars;
  raw_exemplars.reserve(episode.pairs.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& [source, target] = episode.pairs[i];
    const ContextualEmbedding* rec = store.find(episode.contexts[i]);
    if (rec == nullptr) throw DataError("no embedding for usage '" + episode.contexts[i] + "'");
    if (rec->token != target) {
      throw InvariantError("context " + episode.contexts[i] + " does not belong to " + target);
    }
    raw_queries.row(i) = store.vector(episode.contexts[i]).transpose();
    auto ex = store.exemplars(source);
    if (ex->rows() == 0) throw InvariantError("source token " + source + " has no exemplars");
    raw_exemplars.push_back(std::move(ex));
  }
  const Eigen::MatrixXd queries = model.apply_rows(raw_queries);

  EpisodeGradient out;
  Eigen::MatrixXd scores(n, n);
  Eigen::MatrixXd grad_queries;
  if (want_grad) {
    out.d_weight = Eigen::MatrixXd::Zero(d, d);
    out.d_bias = Eigen::VectorXd::Zero(d);
    grad_queries = Eigen::MatrixXd::Zero(n, d);
  }

  if (kind == ChainingModel::kPrototype) {
    // The prototype of transformed exemplars is the transformed raw mean.
    Eigen::MatrixXd raw_means(n, d);
    for (Eigen::Index j = 0; j < n; ++j) {
      raw_means.row(j) = raw_exemplars[j]->colwise().mean();
    }
    const Eigen::MatrixXd protos = model.apply_rows(raw_means);
    scores = kernel_matrix(queries, protos, model.kernel);
    const Eigen::VectorXd lse = row_log_sum_exp(scores);
    out.loss = (lse - scores.diagonal()).sum();
    if (want_grad) {
      Eigen::MatrixXd coeff = row_softmax(scores);
      coeff.diagonal().array() -= 1.0;
      Eigen::MatrixXd grad_protos = Eigen::MatrixXd::Zero(n, d);
      kernel_backward(coeff, queries, protos, model.kernel, grad_queries, grad_protos);
      out.d_weight.noalias() += grad_protos.transpose() * raw_means;
      out.d_bias += grad_protos.colwise().sum().transpose();
    }
  } else {
    std::vector<Eigen::MatrixXd> keys(n);
    std::vector<Eigen::MatrixXd> within(n);  // per-source kernel matrices (n x |exemplars|)
    for (Eigen::Index j = 0; j < n; ++j) {
      keys[j] = model.apply_rows(*raw_exemplars[j]);
      within[j] = kernel_matrix(queries, keys[j], model.kernel);
      const Eigen::VectorXd lse = row_log_sum_exp(within[j]);
      scores.col(j) = (lse.array() - std::log(static_cast<double>(keys[j].rows()))).matrix();
    }
    const Eigen::VectorXd lse = row_log_sum_exp(scores);
    out.loss = (lse - scores.diagonal()).sum();
    if (want_grad) {
      Eigen::MatrixXd coeff = row_softmax(scores);
      coeff.diagonal().array() -= 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        // d score_ij / d kernel_ijc is the within-token softmax weight.
        const Eigen::MatrixXd a = coeff.col(j).asDiagonal() * row_softmax(within[j]);
        Eigen::MatrixXd grad_keys = Eigen::MatrixXd::Zero(keys[j].rows(), d);
        kernel_backward(a, queries, keys[j], model.kernel, grad_queries, grad_keys);
        out.d_weight.noalias() += grad_keys.transpose() * (*raw_exemplars[j]);
        out.d_bias += grad_keys.colwise().sum().transpose();
      }
    }
  }

  if (want_grad) {
    out.d_weight.noalias() += grad_queries.transpose() * raw_queries;
    out.d_bias += grad_queries.colwise().sum().transpose();
    if (!model.use_bias) out.d_bias.setZero();
  }
  return out;
}

}  // namespace

double episode_loss(const TransformModel& model, const Episode& episode,
                    const EmbeddingStore& store, ChainingModel kind) {
  return run_episode(model, episode, store, kind, false).loss;
}

EpisodeGradient episode_grad(const TransformModel& model, const Episode& episode,
                             const EmbeddingStore& store, ChainingModel kind) {
  return run_episode(model, episode, store, kind, true);
}

Episode sample_episode(const std::vector<std::string>& words, const PartitionSet& set,
                       const EmbeddingStore& store, Rng& rng) {
  Episode ep;
  for (const auto& w : words) {
    const Partition& p = set.at(w);
    auto usages = store.token_usages(p.target_token);
    if (usages.empty()) throw DataError("no embeddings for target token '" + p.target_token + "'");
    ep.pairs.emplace_back(p.source_token, p.target_token);
    ep.contexts.push_back(usages[rng.index(usages.size())]);
  }
  return ep;
}

namespace {

struct AdamState {
  Eigen::MatrixXd m_w, v_w;
  Eigen::VectorXd m_b, v_b;
  std::size_t step = 0;
};

}  // namespace

TrainResult train(const TransformModel& init, const PartitionSet& set, const Split& split,
                  const EmbeddingStore& store, const TrainConfig& cfg) {
  if (cfg.batch_size < 1) throw UsageError("batch size must be at least 1");
  if (!(cfg.learning_rate >= 0.0)) throw UsageError("learning rate must be non-negative");

  std::vector<std::string> words;
  for (const auto& [word, p] : set.partitions()) {
    if (!split.train_words.count(word)) continue;
    if (!store.has_token(p.source_token)) {
      throw DataError("no embeddings for source token '" + p.source_token + "'");
    }
    if (!store.has_token(p.target_token)) {
      throw DataError("no embeddings for target token '" + p.target_token + "'");
    }
    words.push_back(word);
  }
  if (words.empty()) throw InvariantError("no partitioned words on the train side");

  TrainResult result{init, {}};
  TransformModel& model = result.model;
  const Eigen::Index d = model.dimension();
  AdamState adam{Eigen::MatrixXd::Zero(d, d), Eigen::MatrixXd::Zero(d, d),
                 Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d), 0};
  const std::size_t min_batch = std::min<std::size_t>(2, cfg.batch_size);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    Rng rng(derive_seed(cfg.seed, epoch));
    std::vector<std::string> order = words;
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      if (end - start < min_batch) break;
      const std::vector<std::string> batch(order.begin() + start, order.begin() + end);
      const Episode ep = sample_episode(batch, set, store, rng);
      const EpisodeGradient g = episode_grad(model, ep, store, cfg.model_kind);
      result.losses.push_back(g.loss);

      if (cfg.optimizer == OptimizerKind::kSgd) {
        model.weight -= cfg.learning_rate * g.d_weight;
        if (model.use_bias) model.bias -= cfg.learning_rate * g.d_bias;
        continue;
      }
      ++adam.step;
      const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam.step));
      const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam.step));
      auto adam_update = [&](auto& param, auto& m, auto& v, const auto& grad) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
        param.array() -=
            cfg.learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
      };
      adam_update(model.weight, adam.m_w, adam.v_w, g.d_weight);
      if (model.use_bias) adam_update(model.bias, adam.m_b, adam.v_b, g.d_bias);
    }
  }
  return result;
}

namespace {
constexpr char kCheckpointMagic[4] = {'W', 'S', 'E', 'T'};
constexpr std::uint8_t kFlagBias = 1u << 0;
constexpr std::uint8_t kFlagNegSqEuclid = 1u << 1;
constexpr std::uint8_t kFlagTemperature = 1u << 2;
}  // namespace

void save_checkpoint(const TransformModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  const auto d = static_cast<std::uint32_t>(model.dimension());
  std::uint8_t flags = 0;
  if (model.use_bias) flags |= kFlagBias;
  if (model.kernel.kind == KernelKind::kNegSquaredEuclidean) flags |= kFlagNegSqEuclid;
  if (model.kernel.temperature != 1.0) flags |= kFlagTemperature;
  out.write(kCheckpointMagic, 4);
  binary::put_uint<std::uint32_t>(out, d);
  out.put(static_cast<char>(flags));
  for (Eigen::Index r = 0; r < model.weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.weight.cols(); ++c) binary::put_f64(out, model.weight(r, c));
  }
  if (model.use_bias) {
    for (Eigen::Index i = 0; i < model.bias.size(); ++i) binary::put_f64(out, model.bias[i]);
  }
  if (flags & kFlagTemperature) binary::put_f64(out, model.kernel.temperature);
  if (!out) throw DataError("write failed for " + path.string());
}

TransformModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  binary::Reader reader(in);
  char magic[4];
  reader.read_bytes(magic, 4, "magic");
  if (!std::equal(magic, magic + 4, kCheckpointMagic)) {
    throw DataError(path.string() + ": bad magic, not a checkpoint");
  }
  const auto d = static_cast<Eigen::Index>(reader.get_uint<std::uint32_t>("dimension"));
  const auto flags = reader.get_uint<std::uint8_t>("flags");
  if (flags & ~(kFlagBias | kFlagNegSqEuclid | kFlagTemperature)) {
    throw DataError(path.string() + ": unknown checkpoint flags");
  }
  TransformModel m = TransformModel::identity(d);
  m.use_bias = flags & kFlagBias;
  m.kernel.kind = (flags & kFlagNegSqEuclid) ? KernelKind::kNegSquaredEuclidean : KernelKind::kDot;
  for (Eigen::Index r = 0; r < d; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) m.weight(r, c) = reader.get_f64("weight entry");
  }
  if (m.use_bias) {
    for (Eigen::Index i = 0; i < d; ++i) m.bias[i] = reader.get_f64("bias entry");
  }
  if (flags & kFlagTemperature) {
    m.kernel.temperature = reader.get_f64("temperature");
    if (!(m.kernel.temperature > 0.0)) throw DataError(path.string() + ": non-positive temperature");
  }
  if (!reader.at_end()) throw DataError(path.string() + ": trailing bytes in checkpoint");
  return m;
}

}  // namespace wse
