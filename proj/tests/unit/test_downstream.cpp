#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "boog/downstream.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace boog;
using namespace testing_support;

namespace {

std::vector<naive::Mat> naive_weights(const MlpParams& p) {
  std::vector<naive::Mat> out;
  for (const Matrix& w : p.weights) out.push_back(to_naive(w));
  return out;
}

std::vector<naive::Vec> naive_biases(const MlpParams& p) {
  std::vector<naive::Vec> out;
  for (const Vector& b : p.biases) out.push_back(to_naive(b));
  return out;
}

// Two Gaussian blobs per class direction, well separated.
void blobs(Rng& rng, int per_class, int classes, int dim, Matrix& x, std::vector<int>& y) {
  x.resize(per_class * classes, dim);
  y.clear();
  for (int c = 0; c < classes; ++c)
    for (int i = 0; i < per_class; ++i) {
      const int r = c * per_class + i;
      for (int k = 0; k < dim; ++k) x(r, k) = 0.1 * rng.normal() + (k == c ? 2.0 : 0.0);
      y.push_back(c);
    }
}

}  // namespace

TEST_CASE("mlp gradient matches finite differences") {
  Rng rng(3);
  const Matrix x = random_matrix(rng, 7, 4);
  const std::vector<int> y{0, 1, 2, 0, 1, 2, 2};
  for (const std::vector<int>& hidden : {std::vector<int>{}, std::vector<int>{4}, std::vector<int>{5, 3}}) {
    CAPTURE(hidden.size());
    MlpParams p = init_mlp(4, hidden, 3, 11);
    for (Vector& b : p.biases) b = random_vector(rng, b.size(), 0.3);
    MlpParams grad = p;
    const double loss = mlp_loss(p, x, y, &grad);
    CHECK(loss == doctest::Approx(naive::mlp_loss(naive_weights(p), naive_biases(p), to_naive(x), y)).epsilon(1e-13));
    auto f = [&](const Vector& flat) {
      MlpParams q = p;
      q.assign(flat);
      return mlp_loss(q, x, y);
    };
    const Vector fd = finite_diff_grad(f, p.flatten(), 1e-6);
    const Vector an = grad.flatten();
    for (Eigen::Index i = 0; i < fd.size(); ++i) CHECK(rel_err(an[i], fd[i], 1e-4) <= 1e-5);
  }
}

TEST_CASE("mlp parameters") {
  const MlpParams p = init_mlp(5, {7, 3}, 2, 1);
  CHECK(p.input_dim() == 5);
  CHECK(p.output_dim() == 2);
  CHECK(p.hidden_dims() == std::vector<int>{7, 3});
  CHECK(p.size() == 5 * 7 + 7 + 7 * 3 + 3 + 3 * 2 + 2);
  MlpParams q = init_mlp(5, {7, 3}, 2, 2);
  q.assign(p.flatten());
  CHECK(q.flatten() == p.flatten());
  CHECK(init_mlp(5, {7, 3}, 2, 1).flatten() == p.flatten());
  CHECK_THROWS_AS(init_mlp(5, {0}, 2, 1), ParameterError);
  CHECK_THROWS_AS(p.logits(Matrix::Zero(2, 4)), ShapeError);
  CHECK_THROWS_AS(q.assign(Vector::Zero(3)), ShapeError);
  const std::vector<int> bad{5};
  CHECK_THROWS_AS(mlp_loss(p, Matrix::Zero(1, 5), bad), ContractError);
}

TEST_CASE("mlp training") {
  Rng rng(5);
  Matrix x, xv;
  std::vector<int> y, yv;
  blobs(rng, 20, 3, 4, x, y);
  blobs(rng, 10, 3, 4, xv, yv);
  MlpConfig cfg;
  cfg.lr = 0.05;
  const MlpParams p = train_mlp(x, y, xv, yv, 3, cfg);
  CHECK(p.hidden_dims() == std::vector<int>{4});
  CHECK(accuracy(predict_mlp(xv, p), yv) == 1.0);

  SUBCASE("memorizes a small training set") {
    const Matrix xs = random_matrix(rng, 8, 6);
    const std::vector<int> ys{0, 1, 0, 1, 1, 0, 1, 0};
    MlpConfig c2;
    c2.hidden_dims = std::vector<int>{32};
    c2.lr = 0.05;
    c2.steps = 500;
    const MlpParams m = train_mlp(xs, ys, Matrix(0, 6), {}, 2, c2);
    CHECK(accuracy(predict_mlp(xs, m), ys) == 1.0);
  }
  SUBCASE("deterministic") {
    CHECK(train_mlp(x, y, xv, yv, 3, cfg).flatten() == p.flatten());
  }
  SUBCASE("zero steps returns the initialization") {
    cfg.steps = 0;
    CHECK(train_mlp(x, y, Matrix(0, 4), {}, 3, cfg).flatten() == init_mlp(4, {4}, 3, cfg.seed).flatten());
  }
}

TEST_CASE("mlp prediction") {
  Rng rng(6);
  MlpParams p = init_mlp(3, {4}, 3, 0);
  const Matrix x = random_matrix(rng, 10, 3);
  SUBCASE("all-zero weights pick class 0") {
    p.assign(Vector::Zero(p.size()));
    for (int c : predict_mlp(x, p)) CHECK(c == 0);
  }
  SUBCASE("a constant logit shift changes nothing") {
    MlpParams q = p;
    q.biases.back().array() += 3.0;
    CHECK(predict_mlp(x, q) == predict_mlp(x, p));
  }
  SUBCASE("matches the naive forward pass") {
    const Matrix l = p.logits(x);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const naive::Vec want = naive::mlp_logits(naive_weights(p), naive_biases(p), to_naive(Vector(x.row(r).transpose())));
      for (int c = 0; c < 3; ++c) CHECK(std::abs(l(r, c) - want[c]) <= 1e-13);
    }
  }
  SUBCASE("positive scores need two classes") {
    CHECK_THROWS_AS(positive_scores(x, p), ShapeError);
    const MlpParams two = init_mlp(3, {}, 2, 0);
    const Vector s = positive_scores(x, two);
    const Matrix l = two.logits(x);
    for (Eigen::Index r = 0; r < x.rows(); ++r)
      CHECK(s[r] == doctest::Approx(1.0 / (1.0 + std::exp(l(r, 0) - l(r, 1)))).epsilon(1e-13));
  }
}

TEST_CASE("link features") {
  Vector a(2), b(2);
  a << 1, 2;
  b << 3, 4;
  Vector want(4);
  want << 1, 2, 3, 4;
  CHECK(link_features(a, b) == want);
  CHECK(link_features(b, a) != link_features(a, b));
  CHECK_THROWS_AS(link_features(a, Vector::Zero(3)), ShapeError);

  Matrix z(3, 2);
  z << 1, 2, 3, 4, 5, 6;
  LinkPairs lp{{{0, 1}, {1, 2}}, {1, 0}};
  const auto [x1, y1] = pair_features(z, lp, false);
  CHECK(x1.rows() == 2);
  CHECK(y1 == std::vector<int>{1, 0});
  const auto [x2, y2] = pair_features(z, lp, true);
  CHECK(x2.rows() == 4);
  CHECK(y2 == std::vector<int>{1, 1, 0, 0});
  CHECK(x2.row(1).transpose() == link_features(z.row(1).transpose(), z.row(0).transpose()));
}

TEST_CASE("few-shot sampling") {
  DatasetSplit split;
  std::vector<int> labels;
  for (std::uint32_t i = 0; i < 60; ++i) {
    labels.push_back(static_cast<int>(i % 3));
    (i < 30 ? split.train : split.test).push_back(i);
  }
  SUBCASE("K equal to the class size takes the whole class") {
    const FewShotTask t = sample_few_shot(split, labels, 3, 3, 10, 0);
    std::vector<std::uint32_t> s = t.support;
    std::sort(s.begin(), s.end());
    CHECK(s == split.train);
    CHECK(t.query.size() == 30);
  }
  SUBCASE("deterministic and disjoint") {
    const FewShotTask a = sample_few_shot(split, labels, 3, 2, 3, 9);
    const FewShotTask b = sample_few_shot(split, labels, 3, 2, 3, 9);
    CHECK(a.support == b.support);
    CHECK(a.classes == b.classes);
    CHECK(a.support.size() == 6);
    const std::set<std::uint32_t> q(a.query.begin(), a.query.end());
    for (std::uint32_t id : a.support) {
      CHECK_FALSE(q.count(id));
      CHECK(std::find(a.classes.begin(), a.classes.end(), labels[id]) != a.classes.end());
    }
    for (std::uint32_t id : a.query) CHECK(std::find(a.classes.begin(), a.classes.end(), labels[id]) != a.classes.end());
  }
  SUBCASE("uniform over the class pool") {
    // Class 0 has 10 train instances; each should appear with probability K/10.
    const int trials = 2000, K = 2;
    std::vector<int> hits(30, 0);
    for (int s = 0; s < trials; ++s) {
      for (std::uint32_t id : sample_few_shot(split, labels, 3, 3, K, static_cast<std::uint64_t>(s)).support)
        ++hits[id];
    }
    const double p = K / 10.0;
    const double mean = trials * p;
    const double sd = std::sqrt(trials * p * (1.0 - p));
    for (std::uint32_t id = 0; id < 30; ++id) CHECK(std::abs(hits[id] - mean) <= 3.0 * sd);
  }
  SUBCASE("too few instances names the class") {
    labels[0] = labels[3] = labels[6] = 1;  // class 0 loses three train instances
    try {
      sample_few_shot(split, labels, 3, 3, 8, 0);
      FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
      CHECK(std::string(e.what()).find("class 0") != std::string::npos);
    }
  }
  SUBCASE("invalid N or K") {
    CHECK_THROWS_AS(sample_few_shot(split, labels, 3, 4, 1, 0), ParameterError);
    CHECK_THROWS_AS(sample_few_shot(split, labels, 3, 3, 0, 0), ParameterError);
  }
}

TEST_CASE("metrics") {
  const std::vector<int> p{0, 1, 2, 1}, t{0, 1, 1, 1};
  CHECK(accuracy(p, t) == 0.75);
  CHECK_THROWS_AS(accuracy(std::vector<int>{}, std::vector<int>{}), UndefinedMetricError);

  CHECK(roc_auc(std::vector<double>{0.9, 0.8, 0.1, 0.2}, std::vector<int>{1, 1, 0, 0}) == 1.0);
  CHECK(roc_auc(std::vector<double>{0.5, 0.5, 0.5}, std::vector<int>{1, 0, 1}) == 0.5);
  CHECK(roc_auc(std::vector<double>{0.9, 0.8, 0.3}, std::vector<int>{1, 0, 1}) == 0.5);
  CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), UndefinedMetricError);

  Rng rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> s;
    std::vector<int> y;
    for (int i = 0; i < 40; ++i) {
      s.push_back(std::round(rng.uniform() * 8.0) / 8.0);  // coarse grid forces ties
      y.push_back(i % 3 == 0 ? 1 : 0);
    }
    CHECK(roc_auc(s, y) == doctest::Approx(naive::roc_auc(s, y)).epsilon(1e-14));
  }
}

TEST_CASE("link split") {
  SynthOptions o;
  o.n = 120;
  o.dim = 8;
  o.task = TaskKind::Link;
  const Dataset ds = generate_synthetic(o);
  const EmbeddedGraph& g = ds.graph();
  const LinkSplit s = make_link_split(g, 0.6, 0.2, 4);

  std::set<NodePair> seen;
  std::size_t positives = 0;
  for (const LinkPairs* lp : {&s.train, &s.val, &s.test}) {
    REQUIRE(lp->pairs.size() == lp->labels.size());
    const auto pos = static_cast<std::size_t>(std::count(lp->labels.begin(), lp->labels.end(), 1));
    CHECK(pos * 2 == lp->labels.size());
    positives += pos;
    for (std::size_t i = 0; i < lp->pairs.size(); ++i) {
      const auto [u, v] = lp->pairs[i];
      CHECK(u < v);
      CHECK(seen.insert(lp->pairs[i]).second);
      CHECK(g.has_edge(u, v) == (lp->labels[i] == 1));
    }
  }
  CHECK(positives == g.edges().size());
  CHECK(s.observed.edges().size() * 2 == s.train.pairs.size());
  for (const Edge& e : s.observed.edges()) {
    CHECK(std::find(s.train.pairs.begin(), s.train.pairs.end(), NodePair{e.u, e.v}) != s.train.pairs.end());
  }
  CHECK(s.observed.embeddings() == g.embeddings());

  const LinkSplit again = make_link_split(g, 0.6, 0.2, 4);
  CHECK(again.test.pairs == s.test.pairs);
  CHECK_THROWS_AS(make_link_split(g, 0.8, 0.2, 0), ParameterError);
  CHECK_THROWS_AS(make_link_split(g, 0.0, 0.2, 0), ParameterError);
}
