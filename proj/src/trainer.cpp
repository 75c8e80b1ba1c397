#include "tc3l/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace tc3l {

namespace {

// gather pointers so three same-shaped param structs can be zipped
template <typename Params>
std::vector<std::vector<double>*> array_ptrs(Params& p) {
  std::vector<std::vector<double>*> out;
  p.for_each_array([&](const char*, std::vector<double>& a) { out.push_back(&a); });
  return out;
}

template <typename Params>
std::vector<std::string> array_names(Params& p) {
  std::vector<std::string> out;
  p.for_each_array([&](const char* name, std::vector<double>&) { out.push_back(name); });
  return out;
}

// schedule multiplier shared by the main and center learning rates
double decay_multiplier(int epoch, const TrainConfig& cfg) {
  const int steps = epoch / cfg.lr_decay_every;
  double m = 1.0;
  for (int t = 0; t < steps; ++t) m *= cfg.lr_decay_factor;
  return m;
}

// one batch: forward, losses, manual backward, gated updates
LossBreakdown run_batch(TrainState& s, const Batch& batch,
                        const TrainConfig& cfg, double lr, double center_lr) {
  const ModelConfig& mc = s.model_cfg;
  const int m = batch.size();
  const int plane = mc.h_f * mc.w_f;
  const bool metric_on = cfg.lambda > 0.0;
  const bool adaptive = cfg.margin_mode == MarginMode::kAdaptive;

  // forward (pixel mask applied before pooling when enabled)
  std::vector<ForwardTrace> traces;
  traces.reserve(m);
  for (int i = 0; i < m; ++i) {
    ForwardTrace t = forward_one(mc, s.params, batch.inputs[i]);
    if (s.att_cfg.pixel_on()) t.mask = attend_pixelwise(mc, s.att, t.context);
    finish_trace(mc, s.params, t);
    traces.push_back(std::move(t));
  }

  // losses and their gradients
  LossGrads lg = zero_loss_grads(m, mc.k_classes, mc.c_d);
  std::vector<std::vector<double>> probs(m);
  for (int i = 0; i < m; ++i) probs[i] = traces[i].probs;
  const double ce = ce_loss(probs, batch.labels, &lg, &s.clamp_warnings);

  double metric = 0.0;
  AttentionOutput att_out;
  if (metric_on) {
    std::vector<std::vector<double>> embeddings(m);
    std::vector<int> predictions(m);
    for (int i = 0; i < m; ++i) {
      embeddings[i] = traces[i].embedding;
      predictions[i] = traces[i].prediction;
    }
    NegativeAssignment neg;
    switch (cfg.nss) {
      case NssMode::kMs:
        neg = ms_nss(embeddings, batch.labels, s.centers);
        break;
      case NssMode::kNs:
        neg = ns_nss(embeddings, batch.labels, predictions, s.centers, s.stats);
        break;
      case NssMode::kMm:
        neg = mm_nss(embeddings, batch.labels, predictions, s.centers, s.stats);
        break;
      case NssMode::kNone:
        TC3L_CHECK(false, "train: lambda > 0 requires a negative selection mode");
    }
    if (adaptive) {
      att_out = attend_batch(mc, s.att_cfg, s.att, traces);
      metric = amtc3l(embeddings, att_out.weights, batch.labels, s.centers, neg, &lg);
    } else {
      metric = tc3l_fixed(embeddings, batch.labels, s.centers, neg,
                          cfg.resolved_fixed_margin(mc.c_d), &lg);
    }
  }
  const LossBreakdown breakdown = multitask(ce, metric, cfg.lambda);

  // backward, assembled per sample so the mask chain stays exact
  ParamGrads mg = zero_params(mc);
  AttentionGrads ag = zero_attention(mc, s.att_cfg);
  for (int i = 0; i < m; ++i) {
    const ForwardTrace& t = traces[i];
    std::vector<double> d_e = classify_backward(mc, s.params, t, lg.d_logits[i], mg);
    if (metric_on) {
      for (int j = 0; j < mc.c_d; ++j)
        d_e[j] += cfg.lambda * lg.d_embeddings[i][j];
      if (adaptive) {
        std::vector<double> d_w(mc.c_d);
        for (int j = 0; j < mc.c_d; ++j)
          d_w[j] = cfg.lambda * lg.d_weights[i][j];
        const std::vector<double> d_e_att = attend_elementwise_backward(
            mc, s.att_cfg, s.att, t.embedding, att_out.hidden[i],
            att_out.weights[i], d_w, ag);
        for (int j = 0; j < mc.c_d; ++j) d_e[j] += d_e_att[j];
      }
    }
    Tensor3 d_ctx(mc.c_d, mc.h_f, mc.w_f);
    if (t.mask.empty()) {
      for (int j = 0; j < mc.c_d; ++j)
        for (int p = 0; p < plane; ++p) d_ctx.at_pos(j, p) = d_e[j] / plane;
    } else {
      std::vector<double> d_mask(plane, 0.0);
      for (int j = 0; j < mc.c_d; ++j)
        for (int p = 0; p < plane; ++p) {
          d_ctx.at_pos(j, p) = d_e[j] * t.mask[p] / plane;
          d_mask[p] += d_e[j] * t.context.at_pos(j, p) / plane;
        }
      attend_pixelwise_backward(mc, s.att, t.context, t.mask, d_mask, ag, d_ctx);
    }
    context_encoder_backward(mc, s.params, t, d_ctx, mg);
  }

  // updates; arrays that did not participate in the loss stay untouched
  {
    auto pv = array_ptrs(s.params);
    auto vv = array_ptrs(s.velocity);
    auto gv = array_ptrs(mg);
    for (std::size_t a = 0; a < pv.size(); ++a)
      sgd_step(*pv[a], *vv[a], *gv[a], lr, cfg.momentum, cfg.weight_decay);
  }
  {
    const bool update_elem = metric_on && adaptive && s.att_cfg.element_on();
    const bool update_pix = s.att_cfg.pixel_on();
    auto pv = array_ptrs(s.att);
    auto vv = array_ptrs(s.att_velocity);
    auto gv = array_ptrs(ag);
    const std::vector<std::string> names = array_names(s.att);
    for (std::size_t a = 0; a < pv.size(); ++a) {
      const bool is_pix = names[a].rfind("pix_", 0) == 0;
      if (is_pix ? update_pix : update_elem)
        sgd_step(*pv[a], *vv[a], *gv[a], lr, cfg.momentum, cfg.weight_decay);
    }
  }
  if (metric_on) {
    // centers are prototypes, not network weights: no weight decay, and
    // no momentum either -- the pull target should trail the embeddings
    // smoothly instead of oscillating around them
    std::vector<double> d_c(lg.d_centers.size());
    for (std::size_t t = 0; t < d_c.size(); ++t)
      d_c[t] = cfg.lambda * lg.d_centers[t];
    sgd_step(s.centers.values, s.centers.velocity, d_c, center_lr, 0.0, 0.0);
  }
  return breakdown;
}

}  // namespace

void validate_train_setup(const ModelConfig& model_cfg,
                          const AttentionConfig& att_cfg,
                          const TrainConfig& cfg) {
  model_cfg.validate();
  att_cfg.validate(model_cfg.c_d);
  TC3L_CHECK(cfg.lambda >= 0.0, "train config: lambda must be nonnegative");
  TC3L_CHECK(cfg.lr >= 0.0, "train config: lr must be nonnegative");
  TC3L_CHECK(cfg.momentum >= 0.0 && cfg.momentum < 1.0,
             "train config: momentum must lie in [0,1)");
  TC3L_CHECK(cfg.weight_decay >= 0.0,
             "train config: weight_decay must be nonnegative");
  TC3L_CHECK(cfg.epochs >= 1, "train config: epochs must be positive");
  TC3L_CHECK(cfg.lr_decay_every >= 1,
             "train config: lr_decay_every must be positive");
  TC3L_CHECK(cfg.lr_decay_factor > 0.0,
             "train config: lr_decay_factor must be positive");
  TC3L_CHECK(cfg.batch_size >= 1, "train config: batch_size must be positive");
  TC3L_CHECK(cfg.jitter_std >= 0.0,
             "train config: jitter_std must be nonnegative");
  if (cfg.lambda > 0.0) {
    TC3L_CHECK(cfg.nss != NssMode::kNone,
               "train config: lambda > 0 requires nss in {ms, ns, mm}");
    if (cfg.margin_mode == MarginMode::kAdaptive)
      TC3L_CHECK(att_cfg.element_on(),
                 "train config: adaptive margins require element attention");
  }
  if (cfg.margin_mode == MarginMode::kFixed) {
    const double margin = cfg.resolved_fixed_margin(model_cfg.c_d);
    TC3L_CHECK(margin > 0.0 && margin <= model_cfg.c_d,
               "train config: fixed_margin must lie in (0, c_d]");
  }
}

TrainState init_state(const ModelConfig& model_cfg,
                      const AttentionConfig& att_cfg, Rng& init_rng) {
  model_cfg.validate();
  att_cfg.validate(model_cfg.c_d);
  TrainState s;
  s.model_cfg = model_cfg;
  s.att_cfg = att_cfg;
  s.params = init_params(model_cfg, init_rng);
  s.velocity = zero_params(model_cfg);
  s.att = init_attention(model_cfg, att_cfg, init_rng);
  s.att_velocity = zero_attention(model_cfg, att_cfg);
  s.centers = init_centers(model_cfg.k_classes, model_cfg.c_d, init_rng);
  s.stats = ConfusionStats(model_cfg.k_classes);
  s.epoch_stats = ConfusionStats(model_cfg.k_classes);
  return s;
}

RunRngs make_run_rngs(std::uint64_t seed) {
  Rng master(seed);
  return RunRngs{master.split(), master.split(), master.split()};
}

void sgd_step(std::vector<double>& param, std::vector<double>& velocity,
              const std::vector<double>& grad, double lr, double momentum,
              double weight_decay) {
  TC3L_CHECK(param.size() == velocity.size() && param.size() == grad.size(),
             "sgd_step: shape mismatch");
  for (std::size_t t = 0; t < param.size(); ++t) {
    velocity[t] = momentum * velocity[t] + grad[t] + weight_decay * param[t];
    param[t] -= lr * velocity[t];
  }
}

double lr_at(int epoch, const TrainConfig& cfg) {
  TC3L_CHECK(epoch >= 0, "lr_at: negative epoch");
  return cfg.lr * decay_multiplier(epoch, cfg);
}

ForwardTrace infer_one(const TrainState& state, const std::vector<double>& input) {
  ForwardTrace t = forward_one(state.model_cfg, state.params, input);
  if (state.att_cfg.pixel_on())
    t.mask = attend_pixelwise(state.model_cfg, state.att, t.context);
  finish_trace(state.model_cfg, state.params, t);
  return t;
}

std::vector<CurveRow> train_epoch(TrainState& state, const Dataset& dataset,
                                  const TrainConfig& cfg, int epoch,
                                  Rng& train_rng) {
  dataset.validate();
  validate_train_setup(state.model_cfg, state.att_cfg, cfg);
  TC3L_CHECK(dataset.dim() == state.model_cfg.d_in,
             "train_epoch: dataset dimension mismatch");
  const double mult = decay_multiplier(epoch, cfg);
  const double lr = cfg.lr * mult;
  // prototypes keep their step size while the network anneals: late in
  // training they still have to track the (now slowly moving) embeddings
  const double center_lr = cfg.resolved_center_lr();
  const int n = dataset.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, train_rng);
  std::vector<CurveRow> rows;
  for (int start = 0; start < n; start += cfg.batch_size) {
    const int end = std::min(n, start + cfg.batch_size);
    Batch b;
    for (int t = start; t < end; ++t) {
      b.inputs.push_back(dataset.features[order[t]]);
      b.labels.push_back(dataset.labels[order[t]]);
    }
    if (cfg.jitter_std > 0.0) b = jitter(b, cfg.jitter_std, train_rng);
    b.validate(state.model_cfg);
    CurveRow row;
    row.iter = state.iterations_done;
    row.epoch = epoch;
    row.lr = lr;
    row.loss = run_batch(state, b, cfg, lr, center_lr);
    ++state.iterations_done;
    rows.push_back(row);
  }
  state.epoch_stats = state.stats;
  state.stats.reset();
  return rows;
}

std::vector<CurveRow> train(TrainState& state, const Dataset& dataset,
                            const TrainConfig& cfg, Rng& train_rng) {
  std::vector<CurveRow> curve;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<CurveRow> rows = train_epoch(state, dataset, cfg, epoch, train_rng);
    curve.insert(curve.end(), rows.begin(), rows.end());
  }
  return curve;
}

MetricsReport evaluate(const TrainState& state, const Dataset& dataset) {
  dataset.validate();
  TC3L_CHECK(dataset.dim() == state.model_cfg.d_in,
             "evaluate: dataset dimension mismatch");
  const int k = state.model_cfg.k_classes;
  MetricsReport r;
  r.confusion = ConfusionStats(k);
  double compact = 0.0;
  for (int i = 0; i < dataset.size(); ++i) {
    const int y = dataset.labels[i];
    TC3L_CHECK(y < k, "evaluate: label out of range for the model");
    const ForwardTrace t = infer_one(state, dataset.features[i]);
    ++r.confusion.at(y, t.prediction);
    double d2 = 0.0;
    for (int j = 0; j < state.model_cfg.c_d; ++j) {
      const double diff = t.embedding[j] - state.centers.at(y, j);
      d2 += diff * diff;
    }
    compact += d2;
  }
  r.intra_class_compactness = compact / dataset.size();
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a < k; ++a)
    for (int bcls = a + 1; bcls < k; ++bcls) {
      double d2 = 0.0;
      for (int j = 0; j < state.model_cfg.c_d; ++j) {
        const double diff = state.centers.at(a, j) - state.centers.at(bcls, j);
        d2 += diff * diff;
      }
      best = std::min(best, d2);
    }
  r.inter_class_separation = best;
  std::int64_t correct = 0;
  r.per_class_accuracy.assign(k, 0.0);
  for (int c = 0; c < k; ++c) {
    std::int64_t row_total = 0;
    for (int p = 0; p < k; ++p) row_total += r.confusion.at(c, p);
    correct += r.confusion.at(c, c);
    r.per_class_accuracy[c] =
        row_total > 0 ? static_cast<double>(r.confusion.at(c, c)) / row_total : 0.0;
  }
  r.overall_accuracy = static_cast<double>(correct) / dataset.size();
  double mean_acc = 0.0;
  for (int c = 0; c < k; ++c) mean_acc += r.per_class_accuracy[c];
  r.mean_per_class_accuracy = mean_acc / k;
  return r;
}

KfoldResult kfold(const Dataset& dataset, int folds,
                  const ModelConfig& model_cfg, const AttentionConfig& att_cfg,
                  const TrainConfig& train_cfg,
                  std::vector<std::string>* warnings) {
  dataset.validate();
  TC3L_CHECK(folds >= 2, "kfold: folds must be >= 2");
  TC3L_CHECK(dataset.size() >= folds, "kfold: dataset smaller than fold count");
  Rng master(train_cfg.seed);
  Rng part_rng = master.split();
  const int k = dataset.num_classes();
  std::vector<std::vector<int>> by_class(k);
  for (int i = 0; i < dataset.size(); ++i)
    by_class[dataset.labels[i]].push_back(i);
  // stratified deal: one global round-robin counter over class blocks so
  // fold sizes differ by at most one overall and per class
  std::vector<std::vector<int>> fold_idx(folds);
  int g = 0;
  for (int c = 0; c < k; ++c) {
    if (by_class[c].empty()) continue;
    if (static_cast<int>(by_class[c].size()) < folds && warnings != nullptr)
      warnings->push_back("kfold: class " + std::to_string(c) +
                          " has fewer samples than folds; stratification is "
                          "best-effort");
    shuffle(by_class[c], part_rng);
    for (int idx : by_class[c]) fold_idx[g++ % folds].push_back(idx);
  }
  KfoldResult result;
  ConfusionStats summed(model_cfg.k_classes);
  double compact_sum = 0.0, sep_sum = 0.0;
  for (int f = 0; f < folds; ++f) {
    Dataset train_part, val_part;
    train_part.class_names = dataset.class_names;
    val_part.class_names = dataset.class_names;
    for (int h = 0; h < folds; ++h) {
      Dataset& part = h == f ? val_part : train_part;
      for (int idx : fold_idx[h]) {
        part.features.push_back(dataset.features[idx]);
        part.labels.push_back(dataset.labels[idx]);
      }
    }
    Rng fold_master = master.split();
    Rng init_rng = fold_master.split();
    Rng train_rng = fold_master.split();
    TrainState st = init_state(model_cfg, att_cfg, init_rng);
    train(st, train_part, train_cfg, train_rng);
    MetricsReport rep = evaluate(st, val_part);
    for (std::size_t t = 0; t < summed.counts.size(); ++t)
      summed.counts[t] += rep.confusion.counts[t];
    compact_sum += rep.intra_class_compactness;
    sep_sum += rep.inter_class_separation;
    result.folds.push_back(std::move(rep));
  }
  // micro-aggregate: accuracies recomputed from the summed confusion
  MetricsReport mean;
  mean.confusion = summed;
  const int km = model_cfg.k_classes;
  std::int64_t correct = 0;
  mean.per_class_accuracy.assign(km, 0.0);
  for (int c = 0; c < km; ++c) {
    std::int64_t row_total = 0;
    for (int p = 0; p < km; ++p) row_total += summed.at(c, p);
    correct += summed.at(c, c);
    mean.per_class_accuracy[c] =
        row_total > 0 ? static_cast<double>(summed.at(c, c)) / row_total : 0.0;
  }
  mean.overall_accuracy = static_cast<double>(correct) / summed.total();
  double acc = 0.0;
  for (int c = 0; c < km; ++c) acc += mean.per_class_accuracy[c];
  mean.mean_per_class_accuracy = acc / km;
  mean.intra_class_compactness = compact_sum / folds;
  mean.inter_class_separation = sep_sum / folds;
  result.mean = std::move(mean);
  return result;
}

}  // namespace tc3l
