#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <vector>

#include "tc3l/data.hpp"
#include "tc3l/losses.hpp"
#include "tc3l/model.hpp"
#include "tc3l/numeric.hpp"
#include "tc3l/trainer.hpp"

using namespace tc3l;

namespace {

ModelConfig tiny_model() {
  ModelConfig cfg;
  cfg.d_in = 5;
  cfg.c_f = 4;
  cfg.h_f = 2;
  cfg.w_f = 2;
  cfg.c_d = 3;
  cfg.k_classes = 3;
  cfg.hidden = 6;
  return cfg;
}

DataConfig tiny_data(int n = 30) {
  DataConfig d;
  d.k_classes = 3;
  d.d_in = 5;
  d.n_total = n;
  d.proportions = {0.4, 0.3, 0.3};
  d.separation = 3.0;
  d.noise_std = 0.6;
  d.seed = 5;
  return d;
}

TrainConfig quick_train(int epochs = 2) {
  TrainConfig t;
  t.epochs = epochs;
  t.batch_size = 8;
  t.lambda = 0.1;
  t.nss = NssMode::kMs;
  t.seed = 17;
  return t;
}

bool same_params(const ModelParams& a, const ModelParams& b) {
  bool same = true;
  a.for_each_array([&](const char* name, const std::vector<double>& va) {
    b.for_each_array([&](const char* name_b, const std::vector<double>& vb) {
      if (std::string(name) == name_b && va != vb) same = false;
    });
  });
  return same;
}

}  // namespace

TEST_CASE("sgd_step worked example and fixed point") {
  std::vector<double> theta = {1.0};
  std::vector<double> v = {0.0};
  const std::vector<double> g = {1.0};
  sgd_step(theta, v, g, 0.1, 0.9, 0.0);
  CHECK(v[0] == 1.0);
  CHECK(theta[0] == doctest::Approx(0.9).epsilon(1e-15));
  sgd_step(theta, v, g, 0.1, 0.9, 0.0);
  CHECK(v[0] == doctest::Approx(1.9).epsilon(1e-15));
  CHECK(theta[0] == doctest::Approx(0.71).epsilon(1e-12));

  std::vector<double> theta2 = {2.5};
  std::vector<double> v2 = {0.0};
  sgd_step(theta2, v2, {0.0}, 0.1, 0.9, 0.0);
  CHECK(theta2[0] == 2.5);  // g=0, wd=0, v=0: nothing moves
  CHECK(v2[0] == 0.0);
}

TEST_CASE("weight decay alone multiplies parameters by (1 - lr*wd)") {
  std::vector<double> theta = {4.0, -2.0};
  std::vector<double> v = {0.0, 0.0};
  const double lr = 0.05, wd = 5e-4;
  sgd_step(theta, v, {0.0, 0.0}, lr, 0.0, wd);
  CHECK(theta[0] == 4.0 * (1.0 - lr * wd));
  CHECK(theta[1] == -2.0 * (1.0 - lr * wd));
}

TEST_CASE("learning-rate schedule decays by the factor every interval") {
  TrainConfig cfg;  // lr 0.05, factor 0.1, every 20
  CHECK(lr_at(0, cfg) == 0.05);
  CHECK(lr_at(19, cfg) == 0.05);
  CHECK(lr_at(20, cfg) == doctest::Approx(0.005).epsilon(1e-15));
  CHECK(lr_at(40, cfg) == doctest::Approx(0.0005).epsilon(1e-15));
  CHECK_THROWS_AS(lr_at(-1, cfg), std::invalid_argument);
}

TEST_CASE("train setup validation catches contradictory settings") {
  const ModelConfig mc = tiny_model();
  AttentionConfig ac;
  ac.reduction = 1;
  TrainConfig tc = quick_train();

  tc.nss = NssMode::kNone;  // lambda > 0 needs a strategy
  CHECK_THROWS_AS(validate_train_setup(mc, ac, tc), std::invalid_argument);

  tc = quick_train();
  ac.mode = AttentionMode::kNone;  // adaptive margins need element attention
  CHECK_THROWS_AS(validate_train_setup(mc, ac, tc), std::invalid_argument);
  ac.mode = AttentionMode::kElement;

  tc = quick_train();
  tc.margin_mode = MarginMode::kFixed;
  tc.fixed_margin = mc.c_d + 1.0;  // outside (0, c_d]
  CHECK_THROWS_AS(validate_train_setup(mc, ac, tc), std::invalid_argument);
  tc.fixed_margin = static_cast<double>(mc.c_d);
  validate_train_setup(mc, ac, tc);  // boundary is legal

  tc = quick_train();
  tc.momentum = 1.0;
  CHECK_THROWS_AS(validate_train_setup(mc, ac, tc), std::invalid_argument);

  tc = quick_train();
  tc.batch_size = 0;
  CHECK_THROWS_AS(validate_train_setup(mc, ac, tc), std::invalid_argument);
}

TEST_CASE("unset optional rates resolve to their defaults") {
  TrainConfig tc;
  CHECK(tc.resolved_fixed_margin(8) == 4.0);  // c_d / 2
  tc.fixed_margin = 1.5;
  CHECK(tc.resolved_fixed_margin(8) == 1.5);
  CHECK(tc.resolved_center_lr() == TrainConfig::kDefaultCenterLr);
  tc.center_lr = 0.01;
  CHECK(tc.resolved_center_lr() == 0.01);
  tc.center_lr = 0.0;  // explicit zero freezes the centers; only negative is unset
  CHECK(tc.resolved_center_lr() == 0.0);
}

TEST_CASE("init_state is deterministic and starts clean") {
  const ModelConfig mc = tiny_model();
  AttentionConfig ac;
  ac.reduction = 1;
  Rng r1(7), r2(7);
  const TrainState a = init_state(mc, ac, r1);
  const TrainState b = init_state(mc, ac, r2);
  CHECK(same_params(a.params, b.params));
  CHECK(a.att.elem_w1 == b.att.elem_w1);
  CHECK(a.centers.values == b.centers.values);
  a.velocity.for_each_array([&](const char*, const std::vector<double>& v) {
    for (double x : v) CHECK(x == 0.0);
  });
  CHECK(a.stats.total() == 0);
  CHECK(a.iterations_done == 0);
}

TEST_CASE("run rng derivation is deterministic") {
  RunRngs a = make_run_rngs(99);
  RunRngs b = make_run_rngs(99);
  CHECK(a.split_rng.next_u64() == b.split_rng.next_u64());
  CHECK(a.init_rng.next_u64() == b.init_rng.next_u64());
  CHECK(a.train_rng.next_u64() == b.train_rng.next_u64());
  // three distinct streams
  RunRngs c = make_run_rngs(99);
  const std::uint64_t s = c.split_rng.next_u64();
  const std::uint64_t i = c.init_rng.next_u64();
  const std::uint64_t t = c.train_rng.next_u64();
  CHECK(s != i);
  CHECK(i != t);
}

TEST_CASE("zero learning rate reports losses without moving parameters") {
  const ModelConfig mc = tiny_model();
  AttentionConfig ac;
  ac.reduction = 1;
  TrainConfig tc = quick_train(1);
  tc.lr = 0.0;
  tc.center_lr = 0.0;
  const Dataset ds = gen_blobs(tiny_data());
  RunRngs rngs = make_run_rngs(tc.seed);
  TrainState st = init_state(mc, ac, rngs.init_rng);
  const ModelParams before = st.params;
  const std::vector<double> centers_before = st.centers.values;
  const std::vector<double> att_before = st.att.elem_w1;
  const std::vector<CurveRow> rows = train(st, ds, tc, rngs.train_rng);
  CHECK(!rows.empty());
  for (const CurveRow& r : rows) {
    CHECK(r.loss.ce > 0.0);
    CHECK(r.loss.total >= r.loss.ce);
  }
  CHECK(same_params(st.params, before));
  CHECK(st.centers.values == centers_before);
  CHECK(st.att.elem_w1 == att_before);
}

TEST_CASE("lambda zero trains bit-identically to a plain CE loop") {
  const ModelConfig mc = tiny_model();
  AttentionConfig ac;
  ac.reduction = 1;
  TrainConfig tc = quick_train(3);
  tc.lambda = 0.0;
  tc.nss = NssMode::kNone;
  const Dataset ds = gen_blobs(tiny_data(24));

  RunRngs rngs = make_run_rngs(tc.seed);
  TrainState st = init_state(mc, ac, rngs.init_rng);
  const std::vector<double> centers0 = st.centers.values;
  const std::vector<double> att0 = st.att.elem_w1;
  train(st, ds, tc, rngs.train_rng);

  // independent reference: forward, cross-entropy, backward, sgd
  RunRngs ref_rngs = make_run_rngs(tc.seed);
  TrainState ref = init_state(mc, ac, ref_rngs.init_rng);
  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    std::vector<int> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, ref_rngs.train_rng);
    for (int start = 0; start < ds.size(); start += tc.batch_size) {
      const int end = std::min(ds.size(), start + tc.batch_size);
      Batch b;
      for (int t = start; t < end; ++t) {
        b.inputs.push_back(ds.features[order[t]]);
        b.labels.push_back(ds.labels[order[t]]);
      }
      const std::vector<ForwardTrace> traces = forward(mc, ref.params, b);
      std::vector<std::vector<double>> probs;
      for (const ForwardTrace& t : traces) probs.push_back(t.probs);
      LossGrads lg = zero_loss_grads(b.size(), mc.k_classes, mc.c_d);
      ce_loss(probs, b.labels, &lg);
      std::vector<UpstreamGrads> ups(b.size());
      for (int i = 0; i < b.size(); ++i) ups[i].d_logits = lg.d_logits[i];
      const ParamGrads mg = backward(mc, ref.params, traces, ups);
      std::vector<std::vector<double>*> pv, vv;
      std::vector<const std::vector<double>*> gv;
      ref.params.for_each_array(
          [&](const char*, std::vector<double>& v) { pv.push_back(&v); });
      ref.velocity.for_each_array(
          [&](const char*, std::vector<double>& v) { vv.push_back(&v); });
      mg.for_each_array([&](const char*, const std::vector<double>& v) {
        gv.push_back(&v);
      });
      for (std::size_t a = 0; a < pv.size(); ++a)
        sgd_step(*pv[a], *vv[a], *gv[a], tc.lr, tc.momentum, tc.weight_decay);
    }
  }
  CHECK(same_params(st.params, ref.params));
  // nothing else moved
  CHECK(st.centers.values == centers0);
  CHECK(st.att.elem_w1 == att0);
}

TEST_CASE("training replays are bit-identical") {
  const ModelConfig mc = tiny_model();
  AttentionConfig ac;
  ac.reduction = 1;
  const TrainConfig tc = quick_train(2);
  const Dataset ds = gen_blobs(tiny_data());
  auto run = [&]() {
    RunRngs rngs = make_run_rngs(tc.seed);
    TrainState st = init_state(mc, ac, rngs.init_rng);
    const std::vector<CurveRow> rows = train(st, ds, tc, rngs.train_rng);
    return std::make_pair(std::move(st), rows);
  };
  const auto [s1, r1] = run();
  const auto [s2, r2] = run();
  CHECK(same_params(s1.params, s2.params));
  CHECK(s1.centers.values == s2.centers.values);
  REQUIRE(r1.size() == r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i].iter == r2[i].iter);
    CHECK(r1[i].epoch == r2[i].epoch);
    CHECK(r1[i].loss.ce == r2[i].loss.ce);        // bitwise
    CHECK(r1[i].loss.metric == r2[i].loss.metric);
    CHECK(r1[i].loss.total == r2[i].loss.total);
    CHECK(r1[i].lr == r2[i].lr);
  }
}

TEST_CASE("curve rows carry the scheduled learning rate and iteration count") {
  const ModelConfig mc = tiny_model();
  AttentionConfig ac;
  ac.reduction = 1;
  TrainConfig tc = quick_train(4);
  tc.lr_decay_every = 2;
  tc.lr_decay_factor = 0.5;
  const Dataset ds = gen_blobs(tiny_data());
  RunRngs rngs = make_run_rngs(tc.seed);
  TrainState st = init_state(mc, ac, rngs.init_rng);
  const std::vector<CurveRow> rows = train(st, ds, tc, rngs.train_rng);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].iter == static_cast<std::int64_t>(i));
    CHECK(rows[i].lr == lr_at(rows[i].epoch, tc));
  }
  CHECK(rows.back().epoch == 3);
  CHECK(rows.back().lr == doctest::Approx(0.05 * 0.5).epsilon(1e-15));
}

TEST_CASE("confusion stats are zeroed at every epoch boundary") {
  const ModelConfig mc = tiny_model();
  AttentionConfig ac;
  ac.reduction = 1;
  TrainConfig tc = quick_train(1);
  tc.nss = NssMode::kNs;
  const Dataset ds = gen_blobs(tiny_data());
  RunRngs rngs = make_run_rngs(tc.seed);
  TrainState st = init_state(mc, ac, rngs.init_rng);
  train_epoch(st, ds, tc, 0, rngs.train_rng);
  CHECK(st.stats.total() == 0);  // reset after the epoch
  CHECK(st.epoch_stats.total() == ds.size());  // snapshot kept
  train_epoch(st, ds, tc, 1, rngs.train_rng);
  CHECK(st.stats.total() == 0);
  CHECK(st.epoch_stats.total() == ds.size());
}

TEST_CASE("a constant predictor scores one half on a balanced two-class set") {
  ModelConfig mc = tiny_model();
  mc.k_classes = 2;
  AttentionConfig ac;
  ac.reduction = 1;
  TrainState st;
  st.model_cfg = mc;
  st.att_cfg = ac;
  st.params = zero_params(mc);  // all logits zero -> always predicts class 0
  st.velocity = zero_params(mc);
  st.att = zero_attention(mc, ac);
  st.att_velocity = zero_attention(mc, ac);
  st.centers = zero_centers(mc.k_classes, mc.c_d);
  st.stats = ConfusionStats(mc.k_classes);
  st.epoch_stats = ConfusionStats(mc.k_classes);
  Dataset ds;
  for (int i = 0; i < 10; ++i) {
    ds.features.push_back(std::vector<double>(mc.d_in, 0.1 * i));
    ds.labels.push_back(i % 2);
  }
  const MetricsReport r = evaluate(st, ds);
  CHECK(r.overall_accuracy == 0.5);
  CHECK(r.per_class_accuracy == std::vector<double>{1.0, 0.0});
  CHECK(r.mean_per_class_accuracy == 0.5);
  CHECK(r.confusion.at(0, 0) == 5);
  CHECK(r.confusion.at(1, 0) == 5);
  CHECK(r.confusion.at(1, 1) == 0);
}

TEST_CASE("a well-separated problem is learned perfectly") {
  const ModelConfig mc = tiny_model();
  AttentionConfig ac;
  ac.reduction = 1;
  TrainConfig tc = quick_train(12);
  DataConfig dc = tiny_data(60);
  dc.separation = 12.0;
  dc.noise_std = 0.2;
  const Dataset ds = gen_blobs(dc);
  RunRngs rngs = make_run_rngs(tc.seed);
  TrainState st = init_state(mc, ac, rngs.init_rng);
  train(st, ds, tc, rngs.train_rng);
  const MetricsReport r = evaluate(st, ds);
  CHECK(r.overall_accuracy == 1.0);
  for (double acc : r.per_class_accuracy) CHECK(acc == 1.0);
  CHECK(r.mean_per_class_accuracy == 1.0);
  // confusion is purely diagonal
  for (int a = 0; a < mc.k_classes; ++a)
    for (int b = 0; b < mc.k_classes; ++b)
      if (a != b) CHECK(r.confusion.at(a, b) == 0);
}

TEST_CASE("evaluate matches an independent recount") {
  const ModelConfig mc = tiny_model();
  AttentionConfig ac;
  ac.reduction = 1;
  const TrainConfig tc = quick_train(2);
  const Dataset ds = gen_blobs(tiny_data(40));
  RunRngs rngs = make_run_rngs(tc.seed);
  TrainState st = init_state(mc, ac, rngs.init_rng);
  train(st, ds, tc, rngs.train_rng);
  const MetricsReport r = evaluate(st, ds);

  // recount everything through infer_one
  std::vector<std::vector<std::int64_t>> confusion(
      mc.k_classes, std::vector<std::int64_t>(mc.k_classes, 0));
  double compact = 0.0;
  for (int i = 0; i < ds.size(); ++i) {
    const ForwardTrace t = infer_one(st, ds.features[i]);
    ++confusion[ds.labels[i]][t.prediction];
    for (int j = 0; j < mc.c_d; ++j) {
      const double d = t.embedding[j] - st.centers.at(ds.labels[i], j);
      compact += d * d;
    }
  }
  std::int64_t correct = 0;
  for (int a = 0; a < mc.k_classes; ++a) {
    correct += confusion[a][a];
    for (int b = 0; b < mc.k_classes; ++b) CHECK(r.confusion.at(a, b) == confusion[a][b]);
  }
  CHECK(r.overall_accuracy ==
        doctest::Approx(static_cast<double>(correct) / ds.size()).epsilon(1e-15));
  CHECK(r.intra_class_compactness == doctest::Approx(compact / ds.size()).epsilon(1e-12));

  double min_sep = std::numeric_limits<double>::infinity();
  for (int a = 0; a < mc.k_classes; ++a)
    for (int b = a + 1; b < mc.k_classes; ++b) {
      double d2 = 0.0;
      for (int j = 0; j < mc.c_d; ++j) {
        const double d = st.centers.at(a, j) - st.centers.at(b, j);
        d2 += d * d;
      }
      min_sep = std::min(min_sep, d2);
    }
  CHECK(r.inter_class_separation == doctest::Approx(min_sep).epsilon(1e-12));
}

TEST_CASE("leave-one-out kfold validates every sample exactly once") {
  const ModelConfig mc = tiny_model();
  AttentionConfig ac;
  ac.reduction = 1;
  TrainConfig tc = quick_train(1);
  Dataset ds;
  Rng rng(3);
  for (int i = 0; i < 6; ++i) {
    std::vector<double> x(mc.d_in);
    for (double& v : x) v = rng.gaussian(0.0, 1.0);
    ds.features.push_back(x);
    ds.labels.push_back(i % 3);
  }
  std::vector<std::string> warnings;
  const KfoldResult kr = kfold(ds, 6, mc, ac, tc, &warnings);
  REQUIRE(kr.folds.size() == 6);
  for (const MetricsReport& r : kr.folds) CHECK(r.confusion.total() == 1);
  CHECK(kr.mean.confusion.total() == 6);
  CHECK(!warnings.empty());  // classes have fewer samples than folds
}

TEST_CASE("two folds on ten samples split five and five") {
  const ModelConfig mc = tiny_model();
  AttentionConfig ac;
  ac.reduction = 1;
  TrainConfig tc = quick_train(1);
  Dataset ds;
  Rng rng(4);
  for (int i = 0; i < 10; ++i) {
    std::vector<double> x(mc.d_in);
    for (double& v : x) v = rng.gaussian(0.0, 1.0);
    ds.features.push_back(x);
    ds.labels.push_back(i % 2);
  }
  const KfoldResult kr = kfold(ds, 2, mc, ac, tc);
  REQUIRE(kr.folds.size() == 2);
  CHECK(kr.folds[0].confusion.total() == 5);
  CHECK(kr.folds[1].confusion.total() == 5);
}

TEST_CASE("five-fold partitions are stratified, reproducible, and aggregated") {
  const ModelConfig mc = tiny_model();
  AttentionConfig ac;
  ac.reduction = 1;
  TrainConfig tc = quick_train(1);
  const Dataset ds = gen_blobs(tiny_data(50));
  const KfoldResult a = kfold(ds, 5, mc, ac, tc);
  const KfoldResult b = kfold(ds, 5, mc, ac, tc);
  REQUIRE(a.folds.size() == 5);
  // reproducibility
  for (int f = 0; f < 5; ++f)
    CHECK(a.folds[f].confusion.counts == b.folds[f].confusion.counts);
  // stratification: per-class validation counts differ by at most one
  const std::vector<int> full = [&] {
    std::vector<int> h(3, 0);
    for (int label : ds.labels) ++h[label];
    return h;
  }();
  for (int c = 0; c < 3; ++c) {
    std::int64_t low = 1000, high = -1;
    for (const MetricsReport& r : a.folds) {
      std::int64_t row = 0;
      for (int p = 0; p < 3; ++p) row += r.confusion.at(c, p);
      low = std::min(low, row);
      high = std::max(high, row);
    }
    CHECK(high - low <= 1);
    std::int64_t sum = 0;
    for (const MetricsReport& r : a.folds)
      for (int p = 0; p < 3; ++p) sum += r.confusion.at(c, p);
    CHECK(sum == full[c]);
  }
  // mean report micro-aggregates the summed confusion
  std::int64_t diag = 0, total = 0;
  for (int x = 0; x < 3; ++x)
    for (int y = 0; y < 3; ++y) {
      std::int64_t s = 0;
      for (const MetricsReport& r : a.folds) s += r.confusion.at(x, y);
      CHECK(a.mean.confusion.at(x, y) == s);
      total += s;
      if (x == y) diag += s;
    }
  CHECK(a.mean.overall_accuracy ==
        doctest::Approx(static_cast<double>(diag) / total).epsilon(1e-15));
  CHECK_THROWS_AS(kfold(ds, 1, mc, ac, tc), std::invalid_argument);
}
