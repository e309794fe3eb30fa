#include "wse/embed.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "wse/binary_io.hpp"
#include "wse/error.hpp"
#include "wse/partition.hpp"
#include "wse/rng.hpp"

namespace wse {

struct EmbeddingStore::Cache {
  std::mutex mutex;
  std::unordered_map<std::string, std::shared_ptr<const Eigen::MatrixXd>> exemplars;
  std::unordered_map<std::string, std::shared_ptr<const Eigen::VectorXd>> prototypes;
};

EmbeddingStore::EmbeddingStore(std::uint32_t dimension)
    : dimension_(dimension), cache_(std::make_unique<Cache>()) {}

EmbeddingStore::EmbeddingStore(const EmbeddingStore& other)
    : dimension_(other.dimension_),
      records_(other.records_),
      index_(other.index_),
      by_token_(other.by_token_),
      cache_(std::make_unique<Cache>()) {}

EmbeddingStore& EmbeddingStore::operator=(const EmbeddingStore& other) {
  if (this != &other) {
    dimension_ = other.dimension_;
    records_ = other.records_;
    index_ = other.index_;
    by_token_ = other.by_token_;
    cache_ = std::make_unique<Cache>();
  }
  return *this;
}

EmbeddingStore::EmbeddingStore(EmbeddingStore&&) noexcept = default;
EmbeddingStore& EmbeddingStore::operator=(EmbeddingStore&&) noexcept = default;
EmbeddingStore::~EmbeddingStore() = default;

void EmbeddingStore::add(ContextualEmbedding record) {
  if (record.vector.size() != dimension_) {
    throw InvariantError("embedding for usage " + record.usage_id + " has dimension " +
                         std::to_string(record.vector.size()) + ", store expects " +
                         std::to_string(dimension_));
  }
  for (float x : record.vector) {
    if (!std::isfinite(x)) throw InvariantError("non-finite embedding for usage " + record.usage_id);
  }
  if (!index_.emplace(record.usage_id, records_.size()).second) {
    throw InvariantError("duplicate embedding for usage " + record.usage_id);
  }
  by_token_[record.token].push_back(record.usage_id);
  records_.push_back(std::move(record));
  cache_ = std::make_unique<Cache>();
}

const ContextualEmbedding* EmbeddingStore::find(const std::string& usage_id) const {
  auto it = index_.find(usage_id);
  return it == index_.end() ? nullptr : &records_[it->second];
}

bool EmbeddingStore::has_token(const std::string& token) const {
  return by_token_.count(token) != 0;
}

std::span<const std::string> EmbeddingStore::token_usages(const std::string& token) const {
  auto it = by_token_.find(token);
  if (it == by_token_.end()) return {};
  return it->second;
}

std::vector<std::string> EmbeddingStore::tokens() const {
  std::vector<std::string> out;
  out.reserve(by_token_.size());
  for (const auto& [token, _] : by_token_) out.push_back(token);
  std::sort(out.begin(), out.end());
  return out;
}

Eigen::VectorXd EmbeddingStore::vector(const std::string& usage_id) const {
  const ContextualEmbedding* rec = find(usage_id);
  if (rec == nullptr) throw DataError("no embedding for usage '" + usage_id + "'");
  return Eigen::Map<const Eigen::VectorXf>(rec->vector.data(), dimension_).cast<double>();
}

std::shared_ptr<const Eigen::MatrixXd> EmbeddingStore::exemplars(const std::string& token) const {
  {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->exemplars.find(token);
    if (it != cache_->exemplars.end()) return it->second;
  }
  auto it = by_token_.find(token);
  if (it == by_token_.end() || it->second.empty()) {
    throw DataError("no embeddings for token '" + token + "'");
  }
  auto m = std::make_shared<Eigen::MatrixXd>(it->second.size(), dimension_);
  for (std::size_t r = 0; r < it->second.size(); ++r) {
    const auto& v = records_[index_.at(it->second[r])].vector;
    m->row(static_cast<Eigen::Index>(r)) =
        Eigen::Map<const Eigen::VectorXf>(v.data(), dimension_).cast<double>().transpose();
  }
  std::lock_guard lock(cache_->mutex);
  return cache_->exemplars.emplace(token, std::move(m)).first->second;
}

std::shared_ptr<const Eigen::VectorXd> EmbeddingStore::prototype(const std::string& token) const {
  {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->prototypes.find(token);
    if (it != cache_->prototypes.end()) return it->second;
  }
  auto ex = exemplars(token);
  auto z = std::make_shared<Eigen::VectorXd>(ex->colwise().mean().transpose());
  std::lock_guard lock(cache_->mutex);
  return cache_->prototypes.emplace(token, std::move(z)).first->second;
}

namespace {
constexpr char kEmbeddingMagic[4] = {'W', 'S', 'E', '1'};
}

void save_embeddings(const EmbeddingStore& store, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kEmbeddingMagic, 4);
  binary::put_uint<std::uint32_t>(out, store.dimension());
  binary::put_uint<std::uint64_t>(out, store.size());
  for (const auto& rec : store.records()) {
    for (const std::string* s : {&rec.usage_id, &rec.token}) {
      if (s->size() > std::numeric_limits<std::uint16_t>::max()) {
        throw InvariantError("identifier longer than 65535 bytes: " + s->substr(0, 32) + "...");
      }
      binary::put_uint<std::uint16_t>(out, static_cast<std::uint16_t>(s->size()));
      out.write(s->data(), static_cast<std::streamsize>(s->size()));
    }
    for (float x : rec.vector) binary::put_f32(out, x);
  }
  if (!out) throw DataError("write failed for " + path.string());
}

EmbeddingStore load_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  binary::Reader reader(in);
  char magic[4];
  reader.read_bytes(magic, 4, "magic");
  if (!std::equal(magic, magic + 4, kEmbeddingMagic)) {
    throw DataError(path.string() + ": bad magic, not an embedding file");
  }
  const auto dim = reader.get_uint<std::uint32_t>("dimension");
  const auto count = reader.get_uint<std::uint64_t>("record count");
  EmbeddingStore store(dim);
  for (std::uint64_t i = 0; i < count; ++i) {
    ContextualEmbedding rec;
    rec.usage_id = reader.get_string(reader.get_uint<std::uint16_t>("id length"), "usage id");
    rec.token = reader.get_string(reader.get_uint<std::uint16_t>("token length"), "token id");
    rec.vector.resize(dim);
    for (auto& x : rec.vector) x = reader.get_f32("vector entry");
    store.add(std::move(rec));
  }
  if (!reader.at_end()) throw DataError(path.string() + ": trailing bytes after last record");
  return store;
}

Eigen::VectorXd typevec(const std::string& s, std::uint32_t dimension, std::uint64_t seed) {
  const std::uint64_t base = fnv1a64(s) ^ mix64(seed);
  Eigen::VectorXd v(dimension);
  for (std::uint32_t i = 0; i < dimension; ++i) {
    const std::uint64_t bits = mix64(base + i * 0x9e3779b97f4a7c15ULL) >> 11;
    v[i] = 2.0 * (static_cast<double>(bits) * 0x1.0p-53) - 1.0;
  }
  const double norm = v.norm();
  if (norm == 0.0) {
    v.setZero();
    v[0] = 1.0;
    return v;
  }
  return v / norm;
}

ContextualEmbedding toy_encode(const UsageInstance& usage, const std::string& token_at_target,
                               const ToyEncoderConfig& cfg) {
  if (cfg.dimension < 1) throw UsageError("encoder dimension must be at least 1");
  const Eigen::VectorXd own = typevec(token_at_target, cfg.dimension, cfg.seed);
  Eigen::VectorXd context = Eigen::VectorXd::Zero(cfg.dimension);
  std::size_t n = 0;
  for (std::size_t j = 0; j < usage.tokens.size(); ++j) {
    if (j == usage.target_index) continue;
    context += typevec(usage.tokens[j], cfg.dimension, cfg.seed);
    ++n;
  }
  context = n == 0 ? own : Eigen::VectorXd(context / static_cast<double>(n));
  const Eigen::VectorXd h = cfg.alpha * own + (1.0 - cfg.alpha) * context;

  ContextualEmbedding out;
  out.usage_id = usage.id;
  out.token = token_at_target;
  out.vector.resize(cfg.dimension);
  for (std::uint32_t i = 0; i < cfg.dimension; ++i) out.vector[i] = static_cast<float>(h[i]);
  return out;
}

ContextualEmbedding encode_substituted(const UsageInstance& usage,
                                       const std::string& candidate_token,
                                       const ToyEncoderConfig& cfg) {
  return toy_encode(usage, candidate_token, cfg);
}

EmbeddingStore encode_usages(const std::vector<UsageInstance>& usages,
                             const ToyEncoderConfig& cfg) {
  EmbeddingStore store(cfg.dimension);
  for (const auto& u : usages) store.add(toy_encode(u, u.tokens.at(u.target_index), cfg));
  return store;
}

EmbeddingStore relabel_for_partitions(const EmbeddingStore& base, const SenseInventory& inv,
                                      const PartitionSet& set) {
  EmbeddingStore out(base.dimension());
  for (const auto& rec : base.records()) {
    ContextualEmbedding copy = rec;
    if (const UsageInstance* u = inv.find_usage(rec.usage_id)) {
      auto it = set.partitions().find(u->lemma);
      if (it != set.partitions().end()) {
        copy.token = u->sense == it->second.target_sense ? it->second.target_token
                                                         : it->second.source_token;
      }
    }
    out.add(std::move(copy));
  }
  return out;
}

}  // namespace wse
