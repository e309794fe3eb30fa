#include "wse/cli.hpp"

#include <chrono>
#include <ctime>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "wse/chaining.hpp"
#include "wse/corpus.hpp"
#include "wse/embed.hpp"
#include "wse/error.hpp"
#include "wse/eval.hpp"
#include "wse/learn.hpp"
#include "wse/partition.hpp"
#include "wse/synth.hpp"
#include "wse/wsd.hpp"

namespace fs = std::filesystem;

namespace wse {

namespace {

// Stream ids for derive_seed, one per stochastic stage.
enum : std::uint64_t {
  kStreamPartition = 1,
  kStreamSplit = 2,
  kStreamInit = 100,
  kStreamTrain = 200,
  kStreamTrials = 300,
  kStreamRandom = 350,
  kStreamWsd = 400,
};

std::string set_file(const char* stem, std::size_t i, const char* ext) {
  return std::string(stem) + "_" + std::to_string(i) + ext;
}

fs::path require(const fs::path& p) {
  if (!fs::exists(p)) throw DataError("missing upstream artifact: " + p.string());
  return p;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Report start_report(const std::string& command, const RunConfig& cfg) {
  Report r(command);
  r.echo_config(cfg);
  r.provenance("seed", cfg.get_u64("seed"));
  r.provenance("started_at", utc_now());
  return r;
}

SimilarityKernel kernel_from(const RunConfig& cfg) {
  SimilarityKernel k;
  const std::string& kind = cfg.get("kernel");
  if (kind == "dot") {
    k.kind = KernelKind::kDot;
  } else if (kind == "neg_sq_euclidean") {
    k.kind = KernelKind::kNegSquaredEuclidean;
  } else {
    throw UsageError("kernel must be dot or neg_sq_euclidean, got '" + kind + "'");
  }
  k.temperature = cfg.get_double("temperature");
  if (!(k.temperature > 0.0)) throw UsageError("temperature must be positive");
  return k;
}

ToyEncoderConfig encoder_from(const RunConfig& cfg) {
  ToyEncoderConfig e;
  e.dimension = static_cast<std::uint32_t>(cfg.get_size("encoder_dimension"));
  e.alpha = cfg.get_double("encoder_alpha");
  e.seed = cfg.get_u64("encoder_seed");
  return e;
}

ChainingModel model_from(const RunConfig& cfg) {
  const std::string& m = cfg.get("model");
  if (m == "exemplar") return ChainingModel::kExemplar;
  if (m == "prototype") return ChainingModel::kPrototype;
  throw UsageError("model must be exemplar or prototype, got '" + m + "'");
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

struct Built {
  SenseInventory inv;
  std::vector<PartitionSet> sets;
  Split split;
};

Built load_built(const RunConfig& cfg, const fs::path& out) {
  Built b;
  const fs::path rank = out / "first_sense.jsonl";
  b.inv = load_corpus(require(out / "filtered.jsonl"),
                      fs::exists(rank) ? std::optional<fs::path>(rank) : std::nullopt);
  const std::size_t k = cfg.get_size("partition_sets");
  for (std::size_t i = 0; i < k; ++i) {
    b.sets.push_back(load_manifest(b.inv, require(out / set_file("manifest", i, ".jsonl"))));
  }
  b.split = load_split(require(out / "split.jsonl"));
  return b;
}

void add_stats(Report& r, const std::string& row, const CorpusStats& s) {
  r.metric("corpus", row, "word_types", static_cast<double>(s.word_types));
  r.metric("corpus", row, "usages", static_cast<double>(s.usages));
  r.metric("corpus", row, "mean_senses", s.mean_senses);
}

}  // namespace

Report cmd_synth(const RunConfig& cfg, const fs::path& out) {
  Report r = start_report("synth", cfg);
  SynthConfig sc;
  sc.words = cfg.get_size("synth_words");
  sc.senses = cfg.get_size("synth_senses");
  sc.usages_per_sense = cfg.get_size("synth_usages");
  sc.dimension = static_cast<std::uint32_t>(cfg.get_size("synth_dimension"));
  sc.shared_dims = static_cast<std::uint32_t>(cfg.get_size("synth_shared_dims"));
  sc.context_dims = static_cast<std::uint32_t>(cfg.get_size("synth_context_dims"));
  sc.rho = cfg.get_double("synth_rho");
  sc.noise = cfg.get_double("synth_noise");
  sc.context_scale = cfg.get_double("synth_context_scale");
  sc.seed = cfg.get_u64("seed");
  const SynthCorpus syn = make_synth_corpus(sc);

  fs::create_directories(out);
  save_corpus(syn.usages, out / "corpus.jsonl");
  save_embeddings(syn.store, out / "embeddings.bin");
  add_stats(r, "synthetic", corpus_stats(SenseInventory(syn.usages)));
  r.metric("embeddings", "synthetic", "dimension", sc.dimension);
  r.write(out);
  return r;
}

Report cmd_build(const RunConfig& cfg, const fs::path& out) {
  Report r = start_report("build", cfg);
  if (!cfg.has_value("corpus")) throw UsageError("build needs the corpus key");
  const fs::path corpus = require(cfg.get("corpus"));
  std::optional<fs::path> rank_path;
  if (cfg.has_value("first_sense")) rank_path = require(cfg.get("first_sense"));
  const SenseInventory raw = load_corpus(corpus, rank_path);
  const SenseInventory inv =
      filter_vocabulary(raw, cfg.get_size("min_senses"), cfg.get_size("min_mentions"));
  const std::uint64_t seed = cfg.get_u64("seed");
  const std::size_t k = cfg.get_size("partition_sets");
  const auto sets = build_partition_sets(inv, k, derive_seed(seed, kStreamPartition));
  const Split split =
      split_words(inv, cfg.get_double("train_fraction"), derive_seed(seed, kStreamSplit));

  fs::create_directories(out);
  save_corpus(inv, out / "filtered.jsonl");
  if (inv.first_sense_rank()) save_first_sense_rank(*inv.first_sense_rank(), out / "first_sense.jsonl");
  std::vector<int> indices;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    save_manifest(sets[i], out / set_file("manifest", i, ".jsonl"));
    save_corpus(sets[i].replaced_usages(inv), out / set_file("replaced", i, ".jsonl"));
    r.metric("partitions", "set" + std::to_string(i), "tokens",
             2.0 * static_cast<double>(sets[i].partitions().size()));
    indices.push_back(sets[i].index());
  }
  save_split(split, out / "split.jsonl");

  add_stats(r, "input", corpus_stats(raw));
  add_stats(r, "filtered", corpus_stats(inv));
  r.metric("split", "words", "train", static_cast<double>(split.train_words.size()));
  r.metric("split", "words", "test", static_cast<double>(split.test_words.size()));
  r.provenance("partition_sets", indices);
  r.write(out);
  return r;
}

Report cmd_encode(const RunConfig& cfg, const fs::path& out) {
  Report r = start_report("encode", cfg);
  const Built b = load_built(cfg, out);
  std::optional<EmbeddingStore> base;
  if (cfg.has_value("embeddings")) {
    base = load_embeddings(require(cfg.get("embeddings")));
    r.provenance("encoder", "external: " + cfg.get("embeddings"));
  } else {
    r.provenance("encoder", "toy");
  }
  const ToyEncoderConfig enc = encoder_from(cfg);
  for (std::size_t i = 0; i < b.sets.size(); ++i) {
    const EmbeddingStore store = base ? relabel_for_partitions(*base, b.inv, b.sets[i])
                                      : encode_usages(b.sets[i].replaced_usages(b.inv), enc);
    for (const auto& u : b.inv.usages()) {
      if (store.find(u.id) == nullptr) throw DataError("no embedding for usage '" + u.id + "'");
    }
    save_embeddings(store, out / set_file("embeddings", i, ".bin"));
    const std::string row = "set" + std::to_string(i);
    r.metric("embeddings", row, "records", static_cast<double>(store.size()));
    r.metric("embeddings", row, "dimension", store.dimension());
  }
  r.write(out);
  return r;
}

Report cmd_train(const RunConfig& cfg, const fs::path& out) {
  Report r = start_report("train", cfg);
  const Built b = load_built(cfg, out);
  const std::uint64_t seed = cfg.get_u64("seed");
  TrainConfig tc;
  tc.batch_size = cfg.get_size("batch_size");
  tc.learning_rate = cfg.get_double("learning_rate");
  tc.epochs = cfg.get_size("epochs");
  tc.model_kind = model_from(cfg);
  const std::string& opt = cfg.get("optimizer");
  if (opt == "adam") {
    tc.optimizer = OptimizerKind::kAdam;
  } else if (opt == "sgd") {
    tc.optimizer = OptimizerKind::kSgd;
  } else {
    throw UsageError("optimizer must be adam or sgd, got '" + opt + "'");
  }
  const SimilarityKernel k = kernel_from(cfg);

  for (std::size_t i = 0; i < b.sets.size(); ++i) {
    const EmbeddingStore store = load_embeddings(require(out / set_file("embeddings", i, ".bin")));
    const TransformModel init =
        TransformModel::initialize(store.dimension(), derive_seed(seed, kStreamInit + i),
                                   cfg.get_double("init_sigma"), k, cfg.get_bool("use_bias"));
    tc.seed = derive_seed(seed, kStreamTrain + i);
    const TrainResult res = train(init, b.sets[i], b.split, store, tc);
    save_checkpoint(res.model, out / set_file("checkpoint", i, ".bin"));

    const std::string row = "set" + std::to_string(i);
    r.metric("train", row, "episodes", static_cast<double>(res.losses.size()));
    if (!res.losses.empty()) {
      r.metric("train", row, "first_loss", res.losses.front());
      r.metric("train", row, "last_loss", res.losses.back());
    }
  }
  r.write(out);
  return r;
}

Report cmd_eval_wse(const RunConfig& cfg, const fs::path& out) {
  Report r = start_report("eval-wse", cfg);
  const Built b = load_built(cfg, out);
  const std::uint64_t seed = cfg.get_u64("seed");
  const bool external = cfg.has_value("embeddings");
  std::vector<Scorer> scorers;
  for (const auto& name : split_list(cfg.get("scorers"))) {
    const Scorer s = parse_scorer(name);
    // The sts scorer re-encodes text with the toy encoder, which is only
    // comparable to toy-encoded stores.
    if (s == Scorer::kSts && external) {
      r.provenance("skipped_scorer", "sts (embeddings come from an external encoder)");
      continue;
    }
    scorers.push_back(s);
  }
  std::optional<Taxonomy> tax;
  if (cfg.has_value("taxonomy")) tax = load_taxonomy(require(cfg.get("taxonomy")));
  const std::size_t n_bins = cfg.get_size("n_bins");

  // results[scorer][mode] over sets
  std::map<std::string, std::map<std::string, std::vector<SetResult>>> results;
  for (std::size_t i = 0; i < b.sets.size(); ++i) {
    const PartitionSet& set = b.sets[i];
    const EmbeddingStore store = load_embeddings(require(out / set_file("embeddings", i, ".bin")));
    const TransformModel trained = load_checkpoint(require(out / set_file("checkpoint", i, ".bin")));
    const SenseInventory replaced(set.replaced_usages(b.inv));
    const auto trials = build_trials(set, b.split, cfg.get_size("n_negatives"),
                                     derive_seed(seed, kStreamTrials + i),
                                     cfg.get_size("usages_per_token"));
    r.metric("trials", "set" + std::to_string(i), "count", static_cast<double>(trials.size()));

    std::map<std::string, std::vector<std::size_t>> ranks;
    for (const Scorer s : scorers) {
      for (const bool supervised : {false, true}) {
        ScoringContext ctx;
        ctx.store = &store;
        ctx.replaced = &replaced;
        ctx.encoder = encoder_from(cfg);
        ctx.kernel = kernel_from(cfg);
        ctx.seed = derive_seed(seed, kStreamRandom + i);
        if (supervised) ctx.model = trained;
        SetResult res = evaluate(trials, s, ctx);
        const std::string mode = supervised ? "supervised" : "unsupervised";
        const std::string name = scorer_name(s) + "/" + mode;
        r.metric("wse_per_set", name + "/set" + std::to_string(i), "precision", res.precision);
        r.metric("wse_per_set", name + "/set" + std::to_string(i), "mrr", res.mrr);
        ranks[name] = res.ranks;
        results[scorer_name(s)][mode].push_back(std::move(res));
      }
    }

    if (tax) {
      const auto bins = relatedness_bins(set, *tax, trials, ranks, n_bins);
      const std::string table = "relatedness_set" + std::to_string(i);
      for (std::size_t j = 0; j < bins.size(); ++j) {
        const std::string row = "bin" + std::to_string(j);
        r.metric(table, row, "lo", bins[j].lo);
        r.metric(table, row, "hi", bins[j].hi);
        r.metric(table, row, "count", static_cast<double>(bins[j].count));
        for (const auto& [name, p] : bins[j].precision) r.metric(table, row, name, p);
      }
    }
  }

  for (const auto& [scorer, modes] : results) {
    for (const auto& [mode, sets] : modes) {
      const WseReport agg = aggregate(sets);
      r.metric("wse_precision", scorer, mode, agg.mean_precision);
      r.metric("wse_precision", scorer, mode + "_std", agg.std_precision);
      r.metric("wse_mrr", scorer, mode, agg.mrr);
      r.metric("wse_mrr", scorer, mode + "_std", agg.std_mrr);
    }
  }
  if (tax) {
    r.provenance("relatedness",
                 "Wu-Palmer similarity (higher means more related), mean over source senses");
    r.provenance("n_bins", n_bins);
  }
  r.write(out);
  return r;
}

Report cmd_eval_wsd(const RunConfig& cfg, const fs::path& out) {
  Report r = start_report("eval-wsd", cfg);
  const std::size_t few_max = cfg.get_size("few_max");
  std::optional<SenseInventory::FirstSenseRank> rank;
  if (cfg.has_value("first_sense")) rank = load_first_sense_rank(require(cfg.get("first_sense")));

  std::vector<UsageInstance> train_usages;
  std::vector<UsageInstance> test_usages;
  if (cfg.has_value("wsd_train") || cfg.has_value("wsd_test")) {
    if (!cfg.has_value("wsd_train") || !cfg.has_value("wsd_test")) {
      throw UsageError("wsd_train and wsd_test must be given together");
    }
    train_usages = read_usages(require(cfg.get("wsd_train")));
    test_usages = read_usages(require(cfg.get("wsd_test")));
    r.provenance("wsd_split", "files");
  } else {
    const Built b = load_built(cfg, out);
    if (!rank && b.inv.first_sense_rank()) rank = b.inv.first_sense_rank();
    SkewConfig skew;
    skew.high_count = cfg.get_size("wsd_high_count");
    skew.few_min = cfg.get_size("wsd_few_min");
    skew.few_max = cfg.get_size("wsd_few_max");
    const WsdSplit ws =
        skewed_wsd_split(b.inv, b.split.test_words, skew, derive_seed(cfg.get_u64("seed"), kStreamWsd));
    train_usages = ws.train;
    test_usages = ws.test;
    r.provenance("wsd_split", "skewed split of the test-side words");
  }

  std::vector<UsageInstance> all = train_usages;
  all.insert(all.end(), test_usages.begin(), test_usages.end());
  const SenseInventory inv(all);
  const SenseInventory train_inv(train_usages, rank);

  const EmbeddingStore store = cfg.has_value("embeddings")
                                   ? load_embeddings(require(cfg.get("embeddings")))
                                   : encode_usages(all, encoder_from(cfg));
  const fs::path ckpt =
      cfg.has_value("checkpoint") ? fs::path(cfg.get("checkpoint")) : out / "checkpoint_0.bin";
  const TransformModel model = load_checkpoint(require(ckpt));
  if (model.dimension() != static_cast<Eigen::Index>(store.dimension())) {
    throw DataError("checkpoint dimension " + std::to_string(model.dimension()) +
                    " does not match embeddings dimension " + std::to_string(store.dimension()));
  }

  auto emit = [&](const std::string& row, const WsdReport& rep) {
    r.metric("wsd", row, "overall", rep.f1_overall);
    for (const char* bin : {"high", "few_shot", "zero_shot"}) r.metric("wsd", row, bin, rep.f1_by_bin.at(bin));
    for (const auto& [pos, f1] : rep.per_pos) r.metric("wsd_pos", row, pos, f1);
  };

  const WsdReport identity =
      evaluate_wsd(fit_classifier(train_usages, store, std::nullopt, rank), inv, test_usages, store,
                   few_max);
  const WsdReport transformed =
      evaluate_wsd(fit_classifier(train_usages, store, model, rank), inv, test_usages, store, few_max);
  emit("identity", identity);
  emit("transform", transformed);
  emit("mfs", baseline_mfs(train_inv, test_usages, few_max));
  bool degraded = false;
  const WsdReport s1 = baseline_s1(train_inv, test_usages, &degraded, few_max);
  if (degraded) {
    std::cerr << "warning: no first-sense rank; the s1 baseline falls back to most frequent sense\n";
    r.provenance("s1_fallback", "no first-sense rank; s1 equals mfs");
  }
  emit("s1", s1);
  for (const char* bin : {"high", "few_shot", "zero_shot"}) {
    r.metric("wsd_counts", "instances", bin, static_cast<double>(identity.bin_counts.at(bin)));
  }
  r.metric("wsd_counts", "instances", "total", static_cast<double>(identity.total));
  r.provenance("checkpoint", ckpt.string());
  r.write(out);
  return r;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Word sense extension pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string config_path;
  std::string seed;
  std::string out_dir = ".";
  std::vector<std::string> sets;
  app.add_option("--config", config_path, "key = value configuration file");
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--out", out_dir, "working directory for artifacts and reports");
  app.add_option("-s,--set", sets, "config override key=value (repeatable)");

  struct Sub {
    const char* name;
    const char* help;
    Report (*fn)(const RunConfig&, const fs::path&);
  };
  const Sub subs[] = {
      {"synth", "generate a planted-regularity corpus and its embeddings", cmd_synth},
      {"build", "filter the corpus, partition words, split train/test", cmd_build},
      {"encode", "embed the usages of every partition set", cmd_encode},
      {"train", "learn the sense-extensional transform per partition set", cmd_train},
      {"eval-wse", "rank candidate source tokens and report precision / MRR", cmd_eval_wse},
      {"eval-wsd", "nearest-prototype WSD with and without the transform", cmd_eval_wsd},
  };
  std::vector<std::pair<CLI::App*, const Sub*>> registered;
  for (const auto& s : subs) registered.emplace_back(app.add_subcommand(s.name, s.help), &s);
  std::string report_path;
  CLI::App* report_cmd = app.add_subcommand("report", "print the table of a report file");
  report_cmd->add_option("path", report_path, "<command>.report.jsonl")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (report_cmd->parsed()) {
      out << Report::from_jsonl(report_path).to_table();
      return 0;
    }
    std::vector<std::pair<std::string, std::string>> overrides;
    for (const auto& kv : sets) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
      overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!seed.empty()) overrides.emplace_back("seed", seed);
    const fs::path cfg_file(config_path);
    const RunConfig cfg = resolve_config(config_path.empty() ? nullptr : &cfg_file, overrides);
    cfg.get_u64("seed");
    for (const auto& [sub, spec] : registered) {
      if (sub->parsed()) {
        out << spec->fn(cfg, out_dir).to_table();
        return 0;
      }
    }
    return 1;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return 2;
  } catch (const InvariantError& e) {
    err << "invariant violation: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace wse
