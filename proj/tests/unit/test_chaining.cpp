#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "wse/chaining.hpp"
#include "wse/error.hpp"

using namespace wse;

namespace {

const SimilarityKernel kDot{KernelKind::kDot, 1.0};
const SimilarityKernel kEuclid{KernelKind::kNegSquaredEuclidean, 1.0};

EmbeddingStore store_of(const std::vector<std::pair<std::string, std::vector<float>>>& rows) {
  EmbeddingStore s(static_cast<std::uint32_t>(rows.front().second.size()));
  int i = 0;
  for (const auto& [token, v] : rows) s.add(test::record("u" + std::to_string(i++), token, v));
  return s;
}

}  // namespace

TEST_SUITE("chaining") {

TEST_CASE("kernel values") {
  CHECK(kernel(Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 0), kDot) == 1.0);
  CHECK(kernel(Eigen::Vector2d(3, -1), Eigen::Vector2d(3, -1), kEuclid) == 0.0);
  CHECK(kernel(Eigen::Vector2d(1, 2), Eigen::Vector2d(3, 4), {KernelKind::kDot, 2.0}) == 5.5);
  CHECK(kernel(Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 2), {KernelKind::kNegSquaredEuclidean, 0.5}) ==
        -10.0);
  CHECK_THROWS_AS(kernel(Eigen::Vector2d(1, 2), Eigen::Vector3d(1, 2, 3), kDot), InvariantError);
}

TEST_CASE("prototype score") {
  const EmbeddingStore s = store_of({{"one", {0.5f, 2}}, {"z1", {1, 0}}, {"z2", {0, 1}},
                                     {"tri", {1, 0}}, {"tri", {0, 3}}, {"tri", {2, 3}}});
  const Eigen::Vector2d h(1, 0);
  CHECK(score_prototype(s, "one", h, kDot) == kernel(h, Eigen::Vector2d(0.5, 2), kDot));
  CHECK(score_prototype(s, "z1", h, kDot) > score_prototype(s, "z2", h, kDot));
  // Mean of the three exemplars is (1, 2).
  const Eigen::Vector2d q(2, -1);
  CHECK(score_prototype(s, "tri", q, kDot) == doctest::Approx(0.0));
  CHECK(score_prototype(s, "tri", q, kEuclid) == doctest::Approx(-10.0));
  CHECK_THROWS_AS(score_prototype(s, "nope", h, kDot), DataError);
}

TEST_CASE("exemplar score") {
  const EmbeddingStore s = store_of({{"one", {0.3f, -0.7f}}, {"twin", {1, 2}}, {"twin", {1, 2}},
                                     {"pair", {1, 0}}, {"pair", {0, 1}}});
  const Eigen::Vector2d h(1, 0);
  for (const auto& k : {kDot, kEuclid}) {
    CHECK(score_exemplar(s, "one", h, k) == score_prototype(s, "one", h, k));
    CHECK(score_exemplar(s, "twin", h, k) == doctest::Approx(kernel(h, Eigen::Vector2d(1, 2), k)));
  }
  // log((e^1 + e^0) / 2)
  CHECK(score_exemplar(s, "pair", h, kDot) == doctest::Approx(0.6201145069582775).epsilon(1e-14));
}

TEST_CASE("ranking") {
  SUBCASE("single candidate") {
    const EmbeddingStore s = store_of({{"a", {1, 1}}});
    const auto r = rank_candidates(Eigen::Vector2d(0.3, 0.1), {"a"}, s, ChainingModel::kExemplar, kDot);
    REQUIRE(r.size() == 1);
    CHECK(r[0].probability == 1.0);
  }
  SUBCASE("ties resolve by token and share probability") {
    const EmbeddingStore s = store_of({{"c", {1, 0}}, {"a", {1, 0}}, {"b", {1, 0}}});
    const auto r = rank_candidates(Eigen::Vector2d(1, 1), {"c", "a", "b"}, s, ChainingModel::kPrototype, kDot);
    CHECK(r[0].token == "a");
    CHECK(r[1].token == "b");
    CHECK(r[2].token == "c");
    for (const auto& c : r) CHECK(c.probability == doctest::Approx(1.0 / 3.0));
  }
  SUBCASE("three-candidate prototype case against direct enumeration") {
    const EmbeddingStore s = store_of({{"x", {1, 0}}, {"x", {0, 1}}, {"y", {2, 2}}, {"z", {-1, 0}}});
    const Eigen::Vector2d h(0.2, 0.9);
    // Prototypes (0.5, 0.5), (2, 2), (-1, 0): dots 0.55, 2.2, -0.2.
    const auto r = rank_candidates(h, {"x", "y", "z"}, s, ChainingModel::kPrototype, kDot);
    CHECK(r[0].token == "y");
    CHECK(r[1].token == "x");
    CHECK(r[2].token == "z");
    CHECK(r[0].score == doctest::Approx(2.2));
    const double total = std::exp(0.55) + std::exp(2.2) + std::exp(-0.2);
    CHECK(r[1].probability == doctest::Approx(std::exp(0.55) / total));
  }
  SUBCASE("errors") {
    const EmbeddingStore s = store_of({{"a", {1, 1}}});
    CHECK_THROWS_AS(rank_candidates(Eigen::Vector2d(1, 1), {}, s, ChainingModel::kPrototype, kDot),
                    InvariantError);
    CHECK_THROWS_AS(rank_candidates(Eigen::Vector2d(1, 1), {"a", "b"}, s, ChainingModel::kPrototype, kDot),
                    DataError);
  }
}

TEST_CASE("sts baseline") {
  const UsageInstance u = test::usage("u", "bank", "s", {"river"});
  const ToyEncoderConfig cfg{8, 0.5, 0};
  const auto r = baseline_sts(u, {"shore", "money", "bank"}, cfg);
  REQUIRE(r.size() == 3);
  CHECK(r[0].token == "bank");
  CHECK(r[0].score == doctest::Approx(1.0));
  // Cosines from an independent Python implementation of the encoder.
  CHECK(r[1].token == "shore");
  CHECK(r[1].score == doctest::Approx(0.7092639609801684).epsilon(1e-9));
  CHECK(r[2].token == "money");
  CHECK(r[2].score == doctest::Approx(0.5561635704801258).epsilon(1e-9));

  SUBCASE("orthogonal and zero vectors") {
    bool degenerate = true;
    CHECK(cosine(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 3), &degenerate) == 0.0);
    CHECK_FALSE(degenerate);
    CHECK(cosine(Eigen::Vector2d(0, 0), Eigen::Vector2d(0, 3), &degenerate) == 0.0);
    CHECK(degenerate);
    EmbeddingMap zero = [](const Eigen::VectorXd& v) { return Eigen::VectorXd::Zero(v.size()).eval(); };
    const auto z = baseline_sts(u, {"a", "b"}, cfg, zero);
    for (const auto& c : z) CHECK(c.degenerate);
  }
}

TEST_CASE("random baseline") {
  Rng a(9);
  Rng b(9);
  std::vector<std::string> cands;
  for (int i = 0; i < 100; ++i) cands.push_back("t" + std::to_string(i));
  const auto ra = baseline_random(cands, a);
  const auto rb = baseline_random(cands, b);
  for (std::size_t i = 0; i < ra.size(); ++i) CHECK(ra[i].token == rb[i].token);

  Rng one(1);
  CHECK(baseline_random({"only"}, one)[0].token == "only");

  Rng mc(2024);
  int top1 = 0;
  const int trials = 100000;
  for (int t = 0; t < trials; ++t) top1 += baseline_random(cands, mc)[0].token == "t0";
  CHECK(std::abs(static_cast<double>(top1) / trials - 0.01) <= 0.002);
}

TEST_CASE("scoring properties") {
  Rng rng(77);
  for (int t = 0; t < 200; ++t) {
    const int d = 1 + static_cast<int>(rng.index(5));
    const int n = 1 + static_cast<int>(rng.index(8));
    const Eigen::MatrixXd ex = test::random_matrix(rng, n, d);
    const Eigen::VectorXd h = test::random_matrix(rng, d, 1);

    const double ex_score = exemplar_score(ex, h, kDot);
    CHECK(ex_score >= prototype_score(ex, h, kDot) - 1e-9);

    Eigen::PermutationMatrix<Eigen::Dynamic> perm(n);
    perm.setIdentity();
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    rng.shuffle(idx);
    for (int i = 0; i < n; ++i) perm.indices()[i] = idx[i];
    const Eigen::MatrixXd shuffled = perm * ex;
    for (const auto& k : {kDot, kEuclid}) {
      CHECK(exemplar_score(shuffled, h, k) == doctest::Approx(exemplar_score(ex, h, k)).epsilon(1e-9));
      CHECK(prototype_score(shuffled, h, k) == doctest::Approx(prototype_score(ex, h, k)).epsilon(1e-9));
      double naive = 0.0;
      for (int i = 0; i < n; ++i) naive += std::exp(kernel(h, ex.row(i).transpose(), k));
      CHECK(exemplar_score(ex, h, k) == doctest::Approx(std::log(naive / n)).epsilon(1e-6));
    }

    std::vector<CandidateScore> scores;
    for (int i = 0; i < 6; ++i) scores.push_back({"c" + std::to_string(i), rng.normal(), 0, false});
    std::vector<CandidateScore> shifted = scores;
    const double c = rng.normal(0, 50);
    for (auto& s : shifted) s.score += c;
    order_and_normalize(scores);
    order_and_normalize(shifted);
    double total = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      CHECK(scores[i].token == shifted[i].token);
      CHECK(scores[i].probability == doctest::Approx(shifted[i].probability).epsilon(1e-9));
      total += scores[i].probability;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

}  // TEST_SUITE
