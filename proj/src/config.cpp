#include "wse/config.hpp"

#include <charconv>
#include <fstream>

#include "wse/error.hpp"

namespace wse {

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema = {
      {"seed", "0", "master seed"},
      {"corpus", "", "sense-annotated corpus (JSON lines)"},
      {"first_sense", "", "first-sense rank sidecar"},
      {"taxonomy", "", "child<TAB>parent sense taxonomy"},
      {"embeddings", "", "usage-keyed base embedding file; empty uses the toy encoder"},
      {"checkpoint", "", "transform checkpoint for eval-wsd; empty uses checkpoint_0.bin"},
      {"min_senses", "2", "vocabulary filter: minimum senses per word"},
      {"min_mentions", "10", "vocabulary filter: minimum usages per sense"},
      {"partition_sets", "5", "number of partition sets"},
      {"train_fraction", "0.7", "fraction of words on the training side"},
      {"encoder_dimension", "64", "toy encoder dimension"},
      {"encoder_alpha", "0.5", "toy encoder weight of the target token"},
      {"encoder_seed", "0", "toy encoder hash seed"},
      {"kernel", "dot", "dot | neg_sq_euclidean"},
      {"temperature", "1", "kernel temperature"},
      {"model", "exemplar", "chaining model used in training: exemplar | prototype"},
      {"optimizer", "adam", "adam | sgd"},
      {"batch_size", "16", "word pairs per episode"},
      {"learning_rate", "2e-5", "optimizer step size"},
      {"epochs", "8", "passes over the training words"},
      {"init_sigma", "1e-3", "std of the noise added to the identity at initialization"},
      {"use_bias", "false", "learn an additive bias"},
      {"n_negatives", "99", "negative candidates per trial"},
      {"usages_per_token", "0", "target usages sampled per test word; 0 takes all"},
      {"scorers", "random,sts,prototype,exemplar", "comma-separated WSE scorers"},
      {"n_bins", "5", "relatedness bins"},
      {"wsd_train", "", "WSD training corpus; empty uses the skewed synthetic split"},
      {"wsd_test", "", "WSD test corpus"},
      {"few_max", "10", "largest training count in the few-shot bin"},
      {"wsd_high_count", "15", "skewed split: training usages of the frequent sense"},
      {"wsd_few_min", "1", "skewed split: minimum training usages of the rare sense"},
      {"wsd_few_max", "10", "skewed split: maximum training usages of the rare sense"},
      {"synth_words", "400", "synthetic word types"},
      {"synth_senses", "3", "senses per synthetic word"},
      {"synth_usages", "20", "usages per synthetic sense"},
      {"synth_dimension", "32", "synthetic embedding dimension"},
      {"synth_shared_dims", "22", "dimensions rotated between consecutive senses"},
      {"synth_context_dims", "8", "dimensions carrying usage context"},
      {"synth_rho", "0.9", "cosine between consecutive senses on the shared part"},
      {"synth_noise", "0.05", "isotropic usage noise"},
      {"synth_context_scale", "0", "norm scale of the usage context component"},
  };
  return schema;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw UsageError("config key '" + key + "': '" + v + "' is not a valid number");
  }
  return out;
}

}  // namespace

RunConfig::RunConfig() {
  for (const auto& k : config_schema()) {
    values_[k.name] = k.default_value;
    sources_[k.name] = Source::kDefault;
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config " + path.string());
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path.string() + ":" + std::to_string(n) + ": expected key = value");
    }
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), Source::kFile);
    } catch (const UsageError& e) {
      throw UsageError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
}

void RunConfig::set(const std::string& key, const std::string& value, Source source) {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
  it->second = value;
  sources_[key] = source;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw UsageError("unknown config key '" + key + "'");
  return it->second;
}

std::int64_t RunConfig::get_int(const std::string& key) const {
  return parse_number<std::int64_t>(key, get(key));
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  return parse_number<std::uint64_t>(key, get(key));
}

std::size_t RunConfig::get_size(const std::string& key) const {
  return parse_number<std::size_t>(key, get(key));
}

double RunConfig::get_double(const std::string& key) const {
  const std::string& v = get(key);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size()) {
    throw UsageError("config key '" + key + "': '" + v + "' is not a valid number");
  }
  return out;
}

bool RunConfig::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw UsageError("config key '" + key + "': '" + v + "' is not a boolean");
}

RunConfig::Source RunConfig::source(const std::string& key) const {
  get(key);
  return sources_.at(key);
}

std::string source_name(RunConfig::Source s) {
  switch (s) {
    case RunConfig::Source::kDefault:
      return "default";
    case RunConfig::Source::kFile:
      return "file";
    case RunConfig::Source::kCli:
      return "cli";
  }
  return "?";
}

RunConfig resolve_config(const std::filesystem::path* file,
                         const std::vector<std::pair<std::string, std::string>>& overrides) {
  RunConfig cfg;
  if (file != nullptr) cfg.load_file(*file);
  for (const auto& [k, v] : overrides) cfg.set(k, v);
  return cfg;
}

}  // namespace wse
