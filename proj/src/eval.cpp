#include "wse/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <unordered_map>

#include "wse/error.hpp"

namespace wse {

std::vector<std::string> Trial::candidates() const {
  std::vector<std::string> out;
  out.reserve(negatives.size() + 1);
  out.push_back(ground_truth);
  out.insert(out.end(), negatives.begin(), negatives.end());
  return out;
}

std::vector<Trial> build_trials(const PartitionSet& set, const Split& split,
                                std::size_t n_negatives, std::uint64_t seed,
                                std::size_t usages_per_token) {
  std::vector<std::string> words;
  for (const auto& [word, _] : set.partitions()) {
    if (split.test_words.count(word)) words.push_back(word);
  }
  if (words.size() < n_negatives + 1) {
    throw InvariantError("test side has " + std::to_string(words.size()) +
                         " partitioned words; need at least " + std::to_string(n_negatives + 1));
  }

  std::vector<Trial> trials;
  for (std::size_t w = 0; w < words.size(); ++w) {
    const Partition& p = set.at(words[w]);
    std::vector<std::string> usages = p.target_usages;
    if (usages_per_token != 0 && usages_per_token < usages.size()) {
      Rng rng(derive_seed(seed ^ 0x5bd1e995ULL, w));
      std::vector<std::string> picked;
      for (std::size_t i : rng.sample_without_replacement(usages.size(), usages_per_token)) {
        picked.push_back(usages[i]);
      }
      usages = std::move(picked);
    }
    for (const auto& usage : usages) {
      Trial t;
      t.word = words[w];
      t.target_usage = usage;
      t.target_token = p.target_token;
      t.ground_truth = p.source_token;
      Rng rng(derive_seed(seed, trials.size()));
      // Draw from the other words by skipping index w.
      for (std::size_t i : rng.sample_without_replacement(words.size() - 1, n_negatives)) {
        t.negatives.push_back(set.at(words[i < w ? i : i + 1]).source_token);
      }
      trials.push_back(std::move(t));
    }
  }
  return trials;
}

std::string scorer_name(Scorer s) {
  switch (s) {
    case Scorer::kPrototype:
      return "prototype";
    case Scorer::kExemplar:
      return "exemplar";
    case Scorer::kSts:
      return "sts";
    case Scorer::kRandom:
      return "random";
  }
  return "?";
}

Scorer parse_scorer(const std::string& name) {
  if (name == "prototype") return Scorer::kPrototype;
  if (name == "exemplar") return Scorer::kExemplar;
  if (name == "sts") return Scorer::kSts;
  if (name == "random") return Scorer::kRandom;
  throw UsageError("unknown scorer '" + name + "'");
}

namespace {

std::size_t rank_of(const std::vector<CandidateScore>& ordered, const std::string& truth) {
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (ordered[i].token == truth) return i + 1;
  }
  throw InvariantError("ground truth missing from ranked list");
}

// Exemplar matrices (and their means) of every token, in the space the
// scorer works in.
struct TokenTable {
  std::unordered_map<std::string, Eigen::MatrixXd> exemplars;
  std::unordered_map<std::string, Eigen::VectorXd> prototypes;
};

TokenTable collect_tokens(const std::vector<Trial>& trials, const ScoringContext& ctx) {
  TokenTable table;
  for (const auto& t : trials) {
    for (const auto& token : t.candidates()) {
      if (table.exemplars.count(token)) continue;
      if (!ctx.store->has_token(token)) throw DataError("no embeddings for token '" + token + "'");
      const auto raw = ctx.store->exemplars(token);
      Eigen::MatrixXd ex = ctx.model ? ctx.model->apply_rows(*raw) : *raw;
      table.prototypes.emplace(token, ex.colwise().mean().transpose());
      table.exemplars.emplace(token, std::move(ex));
    }
  }
  return table;
}

}  // namespace

SetResult evaluate(const std::vector<Trial>& trials, Scorer scorer, const ScoringContext& ctx) {
  SetResult result;
  result.ranks.reserve(trials.size());
  const SimilarityKernel k = ctx.model ? ctx.model->kernel : ctx.kernel;

  if (scorer == Scorer::kPrototype || scorer == Scorer::kExemplar) {
    if (ctx.store == nullptr) throw UsageError(scorer_name(scorer) + " scorer needs embeddings");
    const TokenTable table = collect_tokens(trials, ctx);
    for (const auto& t : trials) {
      const ContextualEmbedding* rec = ctx.store->find(t.target_usage);
      if (rec == nullptr) throw DataError("no embedding for usage '" + t.target_usage + "'");
      Eigen::VectorXd h = ctx.store->vector(t.target_usage);
      if (ctx.model) h = transform(*ctx.model, h);
      std::vector<CandidateScore> scores;
      scores.reserve(t.negatives.size() + 1);
      for (const auto& token : t.candidates()) {
        const double s = scorer == Scorer::kPrototype
                             ? kernel(h, table.prototypes.at(token), k)
                             : exemplar_score(table.exemplars.at(token), h, k);
        scores.push_back({token, s, 0.0, false});
      }
      order_and_normalize(scores);
      result.ranks.push_back(rank_of(scores, t.ground_truth));
    }
  } else if (scorer == Scorer::kSts) {
    if (ctx.replaced == nullptr) throw UsageError("sts scorer needs the replaced corpus");
    EmbeddingMap project;
    if (ctx.model) {
      const TransformModel& m = *ctx.model;
      project = [&m](const Eigen::VectorXd& v) { return transform(m, v); };
    }
    for (const auto& t : trials) {
      const UsageInstance& u = ctx.replaced->usage(t.target_usage);
      auto scores = baseline_sts(u, t.candidates(), ctx.encoder, project);
      result.ranks.push_back(rank_of(scores, t.ground_truth));
    }
  } else {
    for (std::size_t i = 0; i < trials.size(); ++i) {
      Rng rng(derive_seed(ctx.seed, i));
      auto order = baseline_random(trials[i].candidates(), rng);
      result.ranks.push_back(rank_of(order, trials[i].ground_truth));
    }
  }

  if (!result.ranks.empty()) {
    double hits = 0.0;
    double rr = 0.0;
    for (std::size_t r : result.ranks) {
      hits += r == 1 ? 1.0 : 0.0;
      rr += 1.0 / static_cast<double>(r);
    }
    result.precision = hits / static_cast<double>(result.ranks.size());
    result.mrr = rr / static_cast<double>(result.ranks.size());
  }
  return result;
}

WseReport aggregate(const std::vector<SetResult>& sets) {
  WseReport report;
  if (sets.empty()) return report;
  for (const auto& s : sets) report.per_set.emplace_back(s.precision, s.mrr);
  const double n = static_cast<double>(sets.size());
  for (const auto& [p, m] : report.per_set) {
    report.mean_precision += p / n;
    report.mrr += m / n;
  }
  if (sets.size() > 1) {
    double vp = 0.0;
    double vm = 0.0;
    for (const auto& [p, m] : report.per_set) {
      vp += (p - report.mean_precision) * (p - report.mean_precision);
      vm += (m - report.mrr) * (m - report.mrr);
    }
    report.std_precision = std::sqrt(vp / (n - 1.0));
    report.std_mrr = std::sqrt(vm / (n - 1.0));
  }
  return report;
}

Taxonomy::Taxonomy(std::map<SenseId, SenseId> parent) : parent_(std::move(parent)) {
  std::set<SenseId> nodes;
  for (const auto& [child, par] : parent_) {
    nodes.insert(child);
    nodes.insert(par);
  }
  std::vector<SenseId> roots;
  for (const auto& n : nodes) {
    if (!parent_.count(n)) roots.push_back(n);
  }
  if (roots.size() != 1) {
    throw InvariantError("taxonomy must have exactly one root, found " +
                         std::to_string(roots.size()));
  }
  root_ = roots.front();
  depth_[root_] = 1;
  for (const auto& n : nodes) {
    std::vector<SenseId> chain;
    std::set<SenseId> on_chain;
    SenseId cur = n;
    while (!depth_.count(cur)) {
      if (!on_chain.insert(cur).second) throw InvariantError("taxonomy cycle through " + cur.value);
      chain.push_back(cur);
      cur = parent_.at(cur);
    }
    std::size_t d = depth_.at(cur);
    for (auto it = chain.rbegin(); it != chain.rend(); ++it) depth_[*it] = ++d;
  }
}

bool Taxonomy::contains(const SenseId& s) const { return depth_.count(s) != 0; }

std::size_t Taxonomy::depth(const SenseId& s) const {
  auto it = depth_.find(s);
  if (it == depth_.end()) throw DataError("sense '" + s.value + "' not in taxonomy");
  return it->second;
}

std::vector<SenseId> Taxonomy::path_to_root(const SenseId& s) const {
  depth(s);
  std::vector<SenseId> path{s};
  while (path.back() != root_) path.push_back(parent_.at(path.back()));
  return path;
}

Taxonomy load_taxonomy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::map<SenseId, SenseId> parent;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0 || tab + 1 == line.size() ||
        line.find('\t', tab + 1) != std::string::npos) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected child<TAB>parent");
    }
    SenseId child{line.substr(0, tab)};
    SenseId par{line.substr(tab + 1)};
    auto [it, inserted] = parent.emplace(child, par);
    if (!inserted && it->second != par) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": '" + child.value +
                      "' has two parents");
    }
  }
  return Taxonomy(std::move(parent));
}

double wu_palmer(const SenseId& a, const SenseId& b, const Taxonomy& tax) {
  const auto pa = tax.path_to_root(a);
  const std::set<SenseId> ancestors(pa.begin(), pa.end());
  const auto pb = tax.path_to_root(b);
  const SenseId* lcs = nullptr;
  for (const auto& s : pb) {
    if (ancestors.count(s)) {
      lcs = &s;
      break;
    }
  }
  const double da = static_cast<double>(pa.size());
  const double db = static_cast<double>(pb.size());
  return 2.0 * static_cast<double>(tax.depth(*lcs)) / (da + db);
}

double partition_relatedness(const Partition& p, const Taxonomy& tax) {
  if (p.source_senses.empty()) throw InvariantError("partition without source senses");
  double total = 0.0;
  for (const auto& s : p.source_senses) total += wu_palmer(p.target_sense, s, tax);
  return total / static_cast<double>(p.source_senses.size());
}

std::vector<RelatednessBin> relatedness_bins(
    const PartitionSet& set, const Taxonomy& tax, const std::vector<Trial>& trials,
    const std::map<std::string, std::vector<std::size_t>>& ranks_by_scorer, std::size_t n_bins) {
  if (n_bins < 1) throw UsageError("need at least one relatedness bin");
  for (const auto& [name, ranks] : ranks_by_scorer) {
    if (ranks.size() != trials.size()) {
      throw InvariantError("scorer " + name + " has " + std::to_string(ranks.size()) +
                           " ranks for " + std::to_string(trials.size()) + " trials");
    }
  }
  std::map<std::string, double> by_word;
  std::vector<double> rel(trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    auto it = by_word.find(trials[i].word);
    if (it == by_word.end()) {
      it = by_word.emplace(trials[i].word, partition_relatedness(set.at(trials[i].word), tax)).first;
    }
    rel[i] = it->second;
  }

  std::vector<RelatednessBin> bins(n_bins);
  const double lo = rel.empty() ? 0.0 : *std::min_element(rel.begin(), rel.end());
  const double hi = rel.empty() ? 0.0 : *std::max_element(rel.begin(), rel.end());
  const double width = (hi - lo) / static_cast<double>(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) {
    bins[b].lo = lo + width * static_cast<double>(b);
    bins[b].hi = b + 1 == n_bins ? hi : lo + width * static_cast<double>(b + 1);
    for (const auto& [name, _] : ranks_by_scorer) bins[b].precision[name] = 0.0;
  }
  std::vector<std::size_t> bin_of(trials.size(), 0);
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (width > 0.0) {
      bin_of[i] = std::min(n_bins - 1, static_cast<std::size_t>((rel[i] - lo) / width));
    }
    ++bins[bin_of[i]].count;
  }
  for (const auto& [name, ranks] : ranks_by_scorer) {
    for (std::size_t i = 0; i < trials.size(); ++i) {
      if (ranks[i] == 1) bins[bin_of[i]].precision[name] += 1.0;
    }
    for (auto& b : bins) {
      if (b.count > 0) b.precision[name] /= static_cast<double>(b.count);
    }
  }
  return bins;
}

}  // namespace wse
