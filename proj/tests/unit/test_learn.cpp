#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "wse/error.hpp"
#include "wse/learn.hpp"
#include "wse/synth.hpp"

using namespace wse;

namespace {

// Pair i: source token "s<i>" with the given exemplars, target token "t<i>"
// with a single context "c<i>".
struct Fixture {
  EmbeddingStore store;
  Episode episode;
};

Fixture fixture(const std::vector<std::vector<std::vector<float>>>& sources,
                const std::vector<std::vector<float>>& contexts) {
  Fixture f{EmbeddingStore(static_cast<std::uint32_t>(contexts.front().size())), {}};
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const std::string n = std::to_string(i);
    for (std::size_t e = 0; e < sources[i].size(); ++e) {
      f.store.add(test::record("s" + n + "." + std::to_string(e), "s" + n, sources[i][e]));
    }
    f.store.add(test::record("c" + n, "t" + n, contexts[i]));
    f.episode.pairs.emplace_back("s" + n, "t" + n);
    f.episode.contexts.push_back("c" + n);
  }
  return f;
}

Fixture random_fixture(Rng& rng, int d, int n, int max_exemplars) {
  std::vector<std::vector<std::vector<float>>> sources(n);
  std::vector<std::vector<float>> contexts;
  for (int i = 0; i < n; ++i) {
    const int m = 1 + static_cast<int>(rng.index(max_exemplars));
    for (int e = 0; e < m; ++e) sources[i].push_back(test::random_vector(rng, d, 0.5));
    contexts.push_back(test::random_vector(rng, d, 0.5));
  }
  return fixture(sources, contexts);
}

}  // namespace

TEST_SUITE("learn") {

TEST_CASE("transform") {
  const Eigen::Vector2d h(5, 6);
  CHECK(transform(TransformModel::identity(2), h) == h);
  TransformModel zero = TransformModel::identity(2);
  zero.weight.setZero();
  CHECK(transform(zero, h) == Eigen::Vector2d::Zero());
  TransformModel m = TransformModel::identity(2);
  m.weight << 1, 2, 3, 4;
  CHECK(transform(m, h) == Eigen::Vector2d(17, 39));
  m.use_bias = true;
  m.bias << 1, -1;
  CHECK(transform(m, h) == Eigen::Vector2d(18, 38));
  CHECK_THROWS_AS(transform(m, Eigen::Vector3d(1, 2, 3)), InvariantError);
}

TEST_CASE("initialization is the identity plus small seeded noise") {
  const TransformModel a = TransformModel::initialize(8, 3);
  CHECK(a == TransformModel::initialize(8, 3));
  CHECK_FALSE(a == TransformModel::initialize(8, 4));
  CHECK((a.weight - Eigen::MatrixXd::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-2);
}

TEST_CASE("episode loss identities") {
  const auto id = TransformModel::identity(2);
  SUBCASE("single pair has zero loss and gradient") {
    Fixture f = fixture({{{1, 2}, {0, 1}}}, {{3, -1}});
    for (auto kind : {ChainingModel::kPrototype, ChainingModel::kExemplar}) {
      CHECK(episode_loss(id, f.episode, f.store, kind) == 0.0);
      const auto g = episode_grad(id, f.episode, f.store, kind);
      CHECK(g.d_weight.cwiseAbs().maxCoeff() == 0.0);
    }
  }
  SUBCASE("identical sources give N log N") {
    Fixture f = fixture({{{1, 0}}, {{1, 0}}, {{1, 0}}, {{1, 0}}}, {{0.3f, 1}, {2, 0}, {-1, 1}, {0, 0}});
    for (auto kind : {ChainingModel::kPrototype, ChainingModel::kExemplar}) {
      CHECK(episode_loss(id, f.episode, f.store, kind) == doctest::Approx(4.0 * std::log(4.0)));
    }
  }
  SUBCASE("two-pair prototype case by hand") {
    // Scores [[2, 0], [0, 1]].
    Fixture f = fixture({{{1, 0}, {1, 0}}, {{0, 1}}}, {{2, 0}, {0, 1}});
    CHECK(episode_loss(id, f.episode, f.store, ChainingModel::kPrototype) ==
          doctest::Approx(0.44018969856119505).epsilon(1e-14));
  }
  SUBCASE("context must belong to its target token") {
    Fixture f = fixture({{{1, 0}}, {{0, 1}}}, {{2, 0}, {0, 1}});
    f.episode.contexts[0] = "c1";
    CHECK_THROWS_AS(episode_loss(id, f.episode, f.store, ChainingModel::kPrototype), InvariantError);
  }
}

TEST_CASE("loss is never negative") {
  Rng rng(12);
  for (int t = 0; t < 100; ++t) {
    Fixture f = random_fixture(rng, 3, 1 + static_cast<int>(rng.index(5)), 4);
    TransformModel m = TransformModel::initialize(3, rng.index(1000), 0.5);
    m.kernel.kind = rng.index(2) ? KernelKind::kDot : KernelKind::kNegSquaredEuclidean;
    for (auto kind : {ChainingModel::kPrototype, ChainingModel::kExemplar}) {
      CHECK(episode_loss(m, f.episode, f.store, kind) >= 0.0);
    }
  }
}

TEST_CASE("gradient matches central differences") {
  Rng rng(31);
  const double step = 1e-5;
  for (int t = 0; t < 8; ++t) {
    Fixture f = random_fixture(rng, 4, 3, 3);
    for (auto kk : {KernelKind::kDot, KernelKind::kNegSquaredEuclidean}) {
      for (auto kind : {ChainingModel::kPrototype, ChainingModel::kExemplar}) {
        TransformModel m = TransformModel::initialize(4, rng.index(1000), 0.3, {kk, 1.5}, true);
        m.bias = test::random_matrix(rng, 4, 1, 0.2);
        const auto g = episode_grad(m, f.episode, f.store, kind);
        CHECK(g.loss == doctest::Approx(episode_loss(m, f.episode, f.store, kind)).epsilon(1e-12));
        for (int r = 0; r < 4; ++r) {
          for (int c = 0; c < 4; ++c) {
            TransformModel p = m;
            TransformModel q = m;
            p.weight(r, c) += step;
            q.weight(r, c) -= step;
            const double fd = (episode_loss(p, f.episode, f.store, kind) -
                               episode_loss(q, f.episode, f.store, kind)) / (2 * step);
            CHECK(std::abs(fd - g.d_weight(r, c)) <= 1e-4 * std::max(1.0, std::abs(fd)));
          }
          TransformModel p = m;
          TransformModel q = m;
          p.bias[r] += step;
          q.bias[r] -= step;
          const double fd = (episode_loss(p, f.episode, f.store, kind) -
                             episode_loss(q, f.episode, f.store, kind)) / (2 * step);
          CHECK(std::abs(fd - g.d_bias[r]) <= 1e-4 * std::max(1.0, std::abs(fd)));
        }
      }
    }
  }
}

TEST_CASE("gradient respects a symmetric episode") {
  // Swapping the two coordinates maps the episode onto itself, so the
  // gradient at the identity must commute with the swap.
  Fixture f = fixture({{{1, 0}}, {{0, 1}}}, {{0.8f, 0.1f}, {0.1f, 0.8f}});
  Eigen::Matrix2d swap;
  swap << 0, 1, 1, 0;
  for (auto kind : {ChainingModel::kPrototype, ChainingModel::kExemplar}) {
    const auto g = episode_grad(TransformModel::identity(2), f.episode, f.store, kind);
    CHECK((swap * g.d_weight * swap - g.d_weight).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("a tiny SGD step does not increase the episode loss") {
  Rng rng(5);
  for (int t = 0; t < 30; ++t) {
    Fixture f = random_fixture(rng, 3, 4, 3);
    TransformModel m = TransformModel::initialize(3, rng.index(100), 0.2);
    for (auto kind : {ChainingModel::kPrototype, ChainingModel::kExemplar}) {
      const auto g = episode_grad(m, f.episode, f.store, kind);
      TransformModel next = m;
      next.weight -= 1e-6 * g.d_weight;
      CHECK(episode_loss(next, f.episode, f.store, kind) <= g.loss + 1e-9);
    }
  }
}

TEST_CASE("training") {
  SynthConfig sc;
  sc.words = 60;
  sc.usages_per_sense = 8;
  sc.seed = 2;
  const SynthCorpus syn = make_synth_corpus(sc);
  const SenseInventory inv(syn.usages);
  const auto sets = build_partition_sets(inv, 1, 1);
  const Split split = split_words(inv, 0.7, 1);
  const EmbeddingStore store = relabel_for_partitions(syn.store, inv, sets[0]);
  const TransformModel init = TransformModel::initialize(32, 7);

  SUBCASE("zero learning rate leaves the model unchanged") {
    TrainConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.epochs = 2;
    const TrainResult r = train(init, sets[0], split, store, cfg);
    CHECK(r.model == init);
    CHECK(r.losses.size() == 2 * 3);  // 42 train words, batches of 16 with the 10-word tail kept
  }
  SUBCASE("deterministic given the seed") {
    TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.epochs = 3;
    cfg.seed = 4;
    const TrainResult a = train(init, sets[0], split, store, cfg);
    const TrainResult b = train(init, sets[0], split, store, cfg);
    CHECK(a.losses == b.losses);
    CHECK(a.model == b.model);
  }
  SUBCASE("loss on the planted corpus drops by half") {
    TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    cfg.epochs = 20;
    const TrainResult r = train(init, sets[0], split, store, cfg);
    const std::size_t per_epoch = r.losses.size() / cfg.epochs;
    double first = 0.0;
    double last = 0.0;
    for (std::size_t i = 0; i < per_epoch; ++i) {
      first += r.losses[i];
      last += r.losses[r.losses.size() - per_epoch + i];
    }
    CHECK(last < 0.5 * first);
  }
  SUBCASE("empty train side") {
    Split none;
    none.test_words = split.train_words;
    CHECK_THROWS_AS(train(init, sets[0], none, store, TrainConfig{}), InvariantError);
  }
}

TEST_CASE("checkpoint files") {
  test::TempDir dir("learn");
  TransformModel m = TransformModel::initialize(3, 1, 0.3, {KernelKind::kNegSquaredEuclidean, 0.5}, true);
  m.bias << 1, 2, 3;
  save_checkpoint(m, dir / "m.bin");
  CHECK(std::filesystem::file_size(dir / "m.bin") == 4 + 4 + 1 + 9 * 8 + 3 * 8 + 8);
  CHECK(load_checkpoint(dir / "m.bin") == m);

  const TransformModel plain = TransformModel::identity(2);
  save_checkpoint(plain, dir / "p.bin");
  CHECK(std::filesystem::file_size(dir / "p.bin") == 4 + 4 + 1 + 4 * 8);
  CHECK(load_checkpoint(dir / "p.bin") == plain);

  std::string bytes = test::read_file(dir / "p.bin");
  bytes[8] = static_cast<char>(0x80);
  test::write_file(dir / "flags.bin", bytes);
  CHECK_THROWS_AS(load_checkpoint(dir / "flags.bin"), DataError);
  test::write_file(dir / "magic.bin", "XXXX" + test::read_file(dir / "p.bin").substr(4));
  CHECK_THROWS_AS(load_checkpoint(dir / "magic.bin"), DataError);
  test::write_file(dir / "tail.bin", test::read_file(dir / "p.bin") + "z");
  CHECK_THROWS_AS(load_checkpoint(dir / "tail.bin"), DataError);
  test::write_file(dir / "short.bin", test::read_file(dir / "p.bin").substr(0, 20));
  CHECK_THROWS_AS(load_checkpoint(dir / "short.bin"), DataError);
}

}  // TEST_SUITE
