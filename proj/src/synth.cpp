#include "wse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "wse/error.hpp"
#include "wse/rng.hpp"

namespace wse {

namespace {

// Block-diagonal rotation by `angle` on consecutive coordinate planes.
void put_rotation(Eigen::MatrixXd& m, Eigen::Index offset, Eigen::Index dims, double angle) {
  for (Eigen::Index i = offset; i < offset + dims; i += 2) {
    m(i, i) = std::cos(angle);
    m(i, i + 1) = -std::sin(angle);
    m(i + 1, i) = std::sin(angle);
    m(i + 1, i + 1) = std::cos(angle);
  }
}

std::string padded(std::size_t i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%0*zu", width, i);
  return buf;
}

int digits(std::size_t n) {
  int d = 1;
  while (n >= 10) {
    n /= 10;
    ++d;
  }
  return d;
}

}  // namespace

SynthCorpus make_synth_corpus(const SynthConfig& cfg) {
  const Eigen::Index d = cfg.dimension;
  const Eigen::Index dp = cfg.shared_dims;
  const Eigen::Index dn = cfg.context_dims;
  if (dp + dn > d) throw UsageError("shared_dims + context_dims exceeds dimension");
  const Eigen::Index dm = d - dp - dn;
  if (dp % 2 != 0 || dm % 2 != 0) {
    throw UsageError("shared_dims and dimension - shared_dims - context_dims must be even");
  }
  if (cfg.senses < 2) throw UsageError("synthetic words need at least 2 senses");
  if (cfg.words < 1 || cfg.usages_per_sense < 1) throw UsageError("empty synthetic corpus");
  if (!(cfg.rho > 0.0 && cfg.rho < 1.0)) throw UsageError("rho must lie in (0, 1)");

  // Rotation and variance on the contrast part cancel the raw similarity
  // that the shared part gives consecutive senses, so raw dot products do
  // not single out a word's own senses; only the map links them.
  const double theta = std::acos(cfg.rho);
  const double c2 = std::cos(2.0 * theta);
  const double c = (-c2 + std::sqrt(c2 * c2 + 8.0 * cfg.rho * cfg.rho)) / (4.0 * cfg.rho);
  const double contrast_var = cfg.rho / c;
  const double phi = std::acos(-c);

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  put_rotation(m, 0, dp, theta);
  put_rotation(m, dp, dm, phi);

  Rng basis_rng(derive_seed(cfg.seed, 0xffffffffULL));
  Eigen::MatrixXd gauss(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) gauss(i, j) = basis_rng.normal();
  }
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ();

  SynthCorpus out;
  out.store = EmbeddingStore(cfg.dimension);
  out.hidden_map = q * m * q.transpose();

  const int wd = digits(cfg.words - 1);
  const int ud = digits(cfg.usages_per_sense - 1);
  for (std::size_t w = 0; w < cfg.words; ++w) {
    Rng rng(derive_seed(cfg.seed, w));
    const std::string lemma = "w" + padded(w, wd);

    Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i < dp; ++i) g[i] = rng.normal() / std::sqrt(static_cast<double>(dp));
    for (Eigen::Index i = dp; i < dp + dm; ++i) {
      g[i] = rng.normal() * std::sqrt(contrast_var / static_cast<double>(dm));
    }

    Eigen::VectorXd raw = g;
    for (std::size_t k = 0; k < cfg.senses; ++k) {
      if (k > 0) raw = m * raw;
      const Eigen::VectorXd sense_vec = q * raw;
      const SenseId sense{lemma + ".s" + std::to_string(k)};
      for (std::size_t u = 0; u < cfg.usages_per_sense; ++u) {
        Eigen::VectorXd ctx = Eigen::VectorXd::Zero(d);
        for (Eigen::Index i = d - dn; i < d; ++i) {
          ctx[i] = rng.normal() * cfg.context_scale / std::sqrt(static_cast<double>(dn));
        }
        Eigen::VectorXd h = sense_vec + q * ctx;
        for (Eigen::Index i = 0; i < d; ++i) h[i] += rng.normal(0.0, 1.0) * cfg.noise;

        UsageInstance usage;
        usage.id = sense.value + ".u" + padded(u, ud);
        usage.lemma = lemma;
        usage.sense = sense;
        usage.pos = "noun";
        usage.target_index = rng.index(cfg.context_tokens + 1);
        for (std::size_t t = 0; t < cfg.context_tokens; ++t) {
          usage.tokens.push_back("c" + std::to_string(rng.index(64)));
        }
        usage.tokens.insert(usage.tokens.begin() + static_cast<std::ptrdiff_t>(usage.target_index),
                            lemma);

        ContextualEmbedding rec;
        rec.usage_id = usage.id;
        rec.token = lemma;
        rec.vector.resize(cfg.dimension);
        for (Eigen::Index i = 0; i < d; ++i) rec.vector[i] = static_cast<float>(h[i]);
        out.store.add(std::move(rec));
        out.usages.push_back(std::move(usage));
      }
    }
  }
  return out;
}

WsdSplit skewed_wsd_split(const SenseInventory& inv, const std::set<std::string>& words,
                          const SkewConfig& skew, std::uint64_t seed) {
  if (skew.few_min > skew.few_max) throw UsageError("few_min exceeds few_max");
  WsdSplit out;
  std::size_t w_index = 0;
  for (const auto& lemma : words) {
    const WordType* word = inv.find_word(lemma);
    if (word == nullptr) throw DataError("unknown word '" + lemma + "'");
    Rng rng(derive_seed(seed, w_index++));
    std::vector<SenseId> order = word->senses;
    rng.shuffle(order);
    for (std::size_t r = 0; r < order.size(); ++r) {
      std::size_t n_train = 0;
      if (r == 0) n_train = skew.high_count;
      if (r == 1) n_train = skew.few_min + rng.index(skew.few_max - skew.few_min + 1);
      std::size_t seen = 0;
      for (const auto& id : word->usages) {
        const UsageInstance& u = inv.usage(id);
        if (u.sense != order[r]) continue;
        (seen++ < n_train ? out.train : out.test).push_back(u);
      }
    }
  }
  return out;
}

}  // namespace wse
