#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tc3l/attention.hpp"
#include "tc3l/centers.hpp"
#include "tc3l/data.hpp"
#include "tc3l/losses.hpp"
#include "tc3l/model.hpp"
#include "tc3l/nss.hpp"
#include "tc3l/numeric.hpp"

namespace tc3l {

enum class MarginMode { kAdaptive, kFixed };

struct TrainConfig {
  double lambda = 0.1;                         // metric-loss weight
  NssMode nss = NssMode::kMs;                  // negative selection strategy
  MarginMode margin_mode = MarginMode::kAdaptive;
  double fixed_margin = -1.0;                  // <= 0: resolve to c_d / 2
  double lr = 0.05;
  double center_lr = -1.0;                     // < 0: resolve to kDefaultCenterLr
  double momentum = 0.9;
  double weight_decay = 5e-4;
  int epochs = 60;
  int lr_decay_every = 20;
  double lr_decay_factor = 0.1;
  int batch_size = 32;
  std::uint64_t seed = 1;
  double jitter_std = 0.0;                     // train-time augmentation

  // center gradients are damped by lambda, sigmoid slope, and the class's
  // batch share, so prototypes need a far larger step than the network to
  // reach their fixed point within the epoch budget
  static constexpr double kDefaultCenterLr = 2.0;

  double resolved_fixed_margin(int c_d) const {
    return fixed_margin > 0.0 ? fixed_margin : c_d / 2.0;
  }
  double resolved_center_lr() const {
    return center_lr >= 0.0 ? center_lr : kDefaultCenterLr;
  }
};

// cross-field checks spanning model, attention, and trainer settings
void validate_train_setup(const ModelConfig& model_cfg,
                          const AttentionConfig& att_cfg,
                          const TrainConfig& train_cfg);

// everything the training loop mutates
struct TrainState {
  ModelConfig model_cfg;
  AttentionConfig att_cfg;
  ModelParams params;
  ParamGrads velocity;
  AttentionParams att;
  AttentionGrads att_velocity;
  ClassCenters centers;
  ConfusionStats stats;        // running counts for the current epoch
  ConfusionStats epoch_stats;  // snapshot of the last finished epoch
  std::size_t clamp_warnings = 0;
  std::int64_t iterations_done = 0;
};

// init order: model params, attention params, centers (one rng, fixed order)
TrainState init_state(const ModelConfig& model_cfg,
                      const AttentionConfig& att_cfg, Rng& init_rng);

// master rng split into the fixed per-run streams
struct RunRngs {
  Rng split_rng;  // dataset split / fold partition
  Rng init_rng;   // parameter and center init
  Rng train_rng;  // epoch shuffles + jitter
};
RunRngs make_run_rngs(std::uint64_t seed);

// one curve-CSV row per iteration (= one batch)
struct CurveRow {
  std::int64_t iter = 0;
  int epoch = 0;
  LossBreakdown loss;
  double lr = 0.0;
};

// v <- momentum * v + grad + weight_decay * param;  param <- param - lr * v
void sgd_step(std::vector<double>& param, std::vector<double>& velocity,
              const std::vector<double>& grad, double lr, double momentum,
              double weight_decay);

// lr * factor^floor(epoch / decay_every)
double lr_at(int epoch, const TrainConfig& cfg);

// forward pass for one input under the state's attention settings
// (applies the pixel mask when enabled)
ForwardTrace infer_one(const TrainState& state, const std::vector<double>& input);

// one pass over the dataset: seeded shuffle into batches (last partial
// kept), jitter, forward, attention + NSS + losses when lambda > 0,
// manual backward, gated SGD updates.  Confusion stats are snapshotted
// into epoch_stats and reset at epoch end.
std::vector<CurveRow> train_epoch(TrainState& state, const Dataset& dataset,
                                  const TrainConfig& cfg, int epoch,
                                  Rng& train_rng);

// full run over cfg.epochs epochs; concatenated curve rows
std::vector<CurveRow> train(TrainState& state, const Dataset& dataset,
                            const TrainConfig& cfg, Rng& train_rng);

struct MetricsReport {
  double overall_accuracy = 0.0;
  std::vector<double> per_class_accuracy;  // K entries; 0 for absent classes
  double mean_per_class_accuracy = 0.0;
  ConfusionStats confusion;
  double intra_class_compactness = 0.0;   // mean ||e - c_y||^2, raw space
  double inter_class_separation = 0.0;    // min pairwise ||c_k - c_l||^2
};

// forward-only pass over a labeled dataset
MetricsReport evaluate(const TrainState& state, const Dataset& dataset);

struct KfoldResult {
  std::vector<MetricsReport> folds;
  MetricsReport mean;  // micro-aggregate over the summed confusion
};

// seeded stratified round-robin partition; each fold once as validation
KfoldResult kfold(const Dataset& dataset, int folds,
                  const ModelConfig& model_cfg, const AttentionConfig& att_cfg,
                  const TrainConfig& train_cfg,
                  std::vector<std::string>* warnings = nullptr);

}  // namespace tc3l
