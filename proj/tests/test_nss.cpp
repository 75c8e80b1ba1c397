#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "tc3l/centers.hpp"
#include "tc3l/nss.hpp"
#include "tc3l/numeric.hpp"

using namespace tc3l;

namespace {

ClassCenters make_centers(int k, int dim, const std::vector<double>& values) {
  ClassCenters c = zero_centers(k, dim);
  c.values = values;
  return c;
}

// independent per-dimension brute force in squashed space
NegativeAssignment brute_ms(const std::vector<std::vector<double>>& embeddings,
                            const std::vector<int>& labels,
                            const ClassCenters& centers) {
  NegativeAssignment out;
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    std::vector<double> neg(centers.dim);
    std::vector<int> src(centers.dim);
    for (int j = 0; j < centers.dim; ++j) {
      double best = std::numeric_limits<double>::infinity();
      int best_k = -1;
      for (int k = 0; k < centers.k; ++k) {
        if (k == labels[i]) continue;
        const double d = sigmoid(embeddings[i][j]) - sigmoid(centers.at(k, j));
        if (d * d < best) {
          best = d * d;
          best_k = k;
        }
      }
      src[j] = best_k;
      neg[j] = centers.at(best_k, j);
    }
    out.negatives.push_back(neg);
    out.source_class.push_back(src);
  }
  return out;
}

}  // namespace

TEST_CASE("ms_nss worked example with three classes") {
  const ClassCenters centers = make_centers(3, 2, {0.0, 0.0, 2.0, -2.0, -2.0, 2.0});
  const std::vector<std::vector<double>> e = {{1.5, 1.5}};
  const std::vector<int> labels = {0};
  const NegativeAssignment neg = ms_nss(e, labels, centers);
  // sigma(1.5)=0.81757: dim 0 closest is class 1 (sigma(2)=0.88080),
  // dim 1 closest is class 2 (sigma(2)=0.88080)
  CHECK(neg.source_class[0] == std::vector<int>{1, 2});
  CHECK(neg.negatives[0] == std::vector<double>{2.0, 2.0});
}

TEST_CASE("ms_nss with two classes returns the single rival row") {
  Rng rng(3);
  const ClassCenters centers = init_centers(2, 4, rng);
  std::vector<std::vector<double>> e = {{0.1, -0.2, 0.3, 0.4}, {1.0, 1.0, 1.0, 1.0}};
  const std::vector<int> labels = {0, 1};
  const NegativeAssignment neg = ms_nss(e, labels, centers);
  for (int j = 0; j < 4; ++j) {
    CHECK(neg.source_class[0][j] == 1);
    CHECK(neg.negatives[0][j] == centers.at(1, j));
    CHECK(neg.source_class[1][j] == 0);
    CHECK(neg.negatives[1][j] == centers.at(0, j));
  }
}

TEST_CASE("ms_nss breaks exact ties toward the lower class index") {
  // rivals 1 and 2 share the value in dimension 0; distinct in dimension 1
  const ClassCenters centers = make_centers(3, 2, {0.0, 0.0, 0.7, 5.0, 0.7, -5.0});
  const std::vector<std::vector<double>> e = {{0.7, 0.0}};
  const std::vector<int> labels = {0};
  const NegativeAssignment neg = ms_nss(e, labels, centers);
  CHECK(neg.source_class[0][0] == 1);  // tie in dim 0 -> class 1
}

TEST_CASE("ms_nss equals a brute-force oracle and dominates real rivals") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 2 + static_cast<int>(rng.next_below(9));   // K <= 10
    const int dim = 1 + static_cast<int>(rng.next_below(16));  // c_d <= 16
    ClassCenters centers = zero_centers(k, dim);
    for (double& x : centers.values) x = rng.gaussian(0.0, 2.0);
    const int m = 1 + static_cast<int>(rng.next_below(4));
    std::vector<std::vector<double>> e(m);
    std::vector<int> labels(m);
    for (int i = 0; i < m; ++i) {
      labels[i] = static_cast<int>(rng.next_below(k));
      e[i].resize(dim);
      for (double& x : e[i]) x = rng.gaussian(0.0, 2.0);
    }
    const NegativeAssignment got = ms_nss(e, labels, centers);
    const NegativeAssignment want = brute_ms(e, labels, centers);
    for (int i = 0; i < m; ++i) {
      CHECK(got.source_class[i] == want.source_class[i]);
      CHECK(got.negatives[i] == want.negatives[i]);
      // exclusion + hardness dominance
      double synth = 0.0;
      for (int j = 0; j < dim; ++j) {
        CHECK(got.source_class[i][j] != labels[i]);
        const double d = sigmoid(e[i][j]) - sigmoid(got.negatives[i][j]);
        synth += d * d;
      }
      for (int r = 0; r < k; ++r) {
        if (r == labels[i]) continue;
        double real = 0.0;
        for (int j = 0; j < dim; ++j) {
          const double d = sigmoid(e[i][j]) - sigmoid(centers.at(r, j));
          real += d * d;
        }
        CHECK(synth <= real + 1e-15);
      }
    }
  }
}

TEST_CASE("confusion stats record and reset") {
  ConfusionStats stats(4);
  CHECK(stats.total() == 0);
  record_confusion(stats, {}, {});
  CHECK(stats.total() == 0);  // empty batch unchanged
  record_confusion(stats, {1}, {3});
  CHECK(stats.at(1, 3) == 1);
  CHECK(stats.total() == 1);
  // 100 seeded samples equal an independent recount
  Rng rng(11);
  std::vector<int> labels(100), preds(100);
  std::vector<std::vector<int>> recount(4, std::vector<int>(4, 0));
  for (int i = 0; i < 100; ++i) {
    labels[i] = static_cast<int>(rng.next_below(4));
    preds[i] = static_cast<int>(rng.next_below(4));
    ++recount[labels[i]][preds[i]];
  }
  ConfusionStats s2(4);
  record_confusion(s2, labels, preds);
  for (int t = 0; t < 4; ++t)
    for (int p = 0; p < 4; ++p) CHECK(s2.at(t, p) == recount[t][p]);
  CHECK(s2.total() == 100);
  s2.reset();
  CHECK(s2.total() == 0);
}

TEST_CASE("hardest_rival picks the largest off-diagonal count") {
  Rng rng(13);
  const ClassCenters centers = init_centers(4, 3, rng);
  ConfusionStats stats(4);
  stats.at(0, 1) = 5;
  stats.at(0, 2) = 9;
  stats.at(0, 0) = 50;  // the diagonal never competes
  CHECK(hardest_rival(stats, 0, centers) == 2);
  stats.at(0, 1) = 9;  // tie 9-9 -> lowest index
  CHECK(hardest_rival(stats, 0, centers) == 1);
}

TEST_CASE("hardest_rival virgin row falls back to the nearest center") {
  // K=2: the other class is forced
  ClassCenters two = make_centers(2, 2, {0.0, 0.0, 3.0, 3.0});
  ConfusionStats stats2(2);
  CHECK(hardest_rival(stats2, 0, two) == 1);
  CHECK(hardest_rival(stats2, 1, two) == 0);
  // K=3: nearest rival in raw squared euclidean distance
  ClassCenters three = make_centers(3, 2, {0.0, 0.0, 5.0, 0.0, 1.0, 1.0});
  ConfusionStats stats3(3);
  CHECK(hardest_rival(stats3, 0, three) == 2);  // |c2-c0|^2 = 2 < 25
}

TEST_CASE("ns_nss misclassified branch takes the predicted center") {
  Rng rng(17);
  const ClassCenters centers = init_centers(4, 3, rng);
  ConfusionStats stats(4);
  const std::vector<std::vector<double>> e = {{0.1, 0.2, 0.3}};
  const NegativeAssignment neg = ns_nss(e, {1}, {3}, centers, stats);
  for (int j = 0; j < 3; ++j) {
    CHECK(neg.source_class[0][j] == 3);
    CHECK(neg.negatives[0][j] == centers.at(3, j));
  }
  CHECK(stats.at(1, 3) == 1);  // the batch was recorded
}

TEST_CASE("ns_nss correct branch consults the running statistics") {
  Rng rng(19);
  const ClassCenters centers = init_centers(4, 3, rng);
  ConfusionStats stats(4);
  stats.at(1, 2) = 5;
  stats.at(1, 3) = 9;
  const std::vector<std::vector<double>> e = {{0.1, 0.2, 0.3}};
  const NegativeAssignment neg = ns_nss(e, {1}, {1}, centers, stats);
  for (int j = 0; j < 3; ++j) {
    CHECK(neg.source_class[0][j] == 3);
    CHECK(neg.negatives[0][j] == centers.at(3, j));
  }
}

TEST_CASE("ns_nss records the batch before any rival lookup") {
  Rng rng(23);
  const ClassCenters centers = init_centers(4, 2, rng);
  ConfusionStats stats(4);  // virgin
  // sample 0 misclassified as class 2; sample 1 correct -> its rival must
  // come from the just-recorded S[0][2] = 1, not the distance fallback
  const std::vector<std::vector<double>> e = {{0.0, 0.0}, {0.1, 0.1}};
  const NegativeAssignment neg = ns_nss(e, {0, 0}, {2, 0}, centers, stats);
  for (int j = 0; j < 2; ++j) CHECK(neg.source_class[1][j] == 2);
}

TEST_CASE("ns_nss correct branch with virgin stats uses the distance fallback") {
  ClassCenters centers = make_centers(2, 2, {0.0, 0.0, 4.0, 4.0});
  ConfusionStats stats(2);
  const std::vector<std::vector<double>> e = {{0.2, 0.2}};
  const NegativeAssignment neg = ns_nss(e, {0}, {0}, centers, stats);
  for (int j = 0; j < 2; ++j) CHECK(neg.source_class[0][j] == 1);
}

TEST_CASE("ns_nss misclassified branch ignores the statistics") {
  Rng rng(29);
  const ClassCenters centers = init_centers(4, 2, rng);
  const std::vector<std::vector<double>> e = {{0.3, -0.3}};
  ConfusionStats a(4);
  ConfusionStats b(4);
  b.at(2, 1) = 100;
  b.at(2, 3) = 40;
  const NegativeAssignment na = ns_nss(e, {2}, {0}, centers, a);
  const NegativeAssignment nb = ns_nss(e, {2}, {0}, centers, b);
  CHECK(na.source_class == nb.source_class);
  CHECK(na.negatives == nb.negatives);
}

TEST_CASE("mm_nss equals ns_nss when every sample is misclassified") {
  Rng rng(31);
  const ClassCenters centers = init_centers(4, 3, rng);
  std::vector<std::vector<double>> e(3, std::vector<double>(3));
  for (auto& row : e)
    for (double& x : row) x = rng.gaussian(0.0, 1.0);
  const std::vector<int> labels = {0, 1, 2};
  const std::vector<int> preds = {1, 2, 3};  // all wrong
  ConfusionStats sa(4), sb(4);
  const NegativeAssignment a = mm_nss(e, labels, preds, centers, sa);
  const NegativeAssignment b = ns_nss(e, labels, preds, centers, sb);
  CHECK(a.source_class == b.source_class);
  CHECK(a.negatives == b.negatives);
  CHECK(sa.total() == 3);  // bookkeeping still happens
}

TEST_CASE("mm_nss equals ms_nss when every sample is correct") {
  Rng rng(37);
  const ClassCenters centers = init_centers(4, 3, rng);
  std::vector<std::vector<double>> e(3, std::vector<double>(3));
  for (auto& row : e)
    for (double& x : row) x = rng.gaussian(0.0, 1.0);
  const std::vector<int> labels = {0, 1, 2};
  ConfusionStats stats(4);
  const NegativeAssignment a = mm_nss(e, labels, labels, centers, stats);
  const NegativeAssignment b = ms_nss(e, labels, centers);
  CHECK(a.source_class == b.source_class);
  CHECK(a.negatives == b.negatives);
}

TEST_CASE("mm_nss mixes the two branches per sample") {
  Rng rng(41);
  const ClassCenters centers = init_centers(5, 4, rng);
  const int m = 12;
  std::vector<std::vector<double>> e(m, std::vector<double>(4));
  std::vector<int> labels(m), preds(m);
  for (int i = 0; i < m; ++i) {
    for (double& x : e[i]) x = rng.gaussian(0.0, 1.5);
    labels[i] = static_cast<int>(rng.next_below(5));
    preds[i] = (i % 3 == 0) ? (labels[i] + 1) % 5 : labels[i];
  }
  ConfusionStats stats(5);
  const NegativeAssignment got = mm_nss(e, labels, preds, centers, stats);
  const NegativeAssignment ms = ms_nss(e, labels, centers);
  for (int i = 0; i < m; ++i) {
    if (preds[i] != labels[i]) {
      for (int j = 0; j < 4; ++j) {
        CHECK(got.source_class[i][j] == preds[i]);
        CHECK(got.negatives[i][j] == centers.at(preds[i], j));
      }
    } else {
      CHECK(got.source_class[i] == ms.source_class[i]);
      CHECK(got.negatives[i] == ms.negatives[i]);
    }
    for (int j = 0; j < 4; ++j) CHECK(got.source_class[i][j] != labels[i]);
  }
  CHECK(stats.total() == m);
}
