#pragma once

#include <cstddef>
#include <vector>

#include "tc3l/centers.hpp"
#include "tc3l/nss.hpp"
#include "tc3l/numeric.hpp"

namespace tc3l {

// one batch's loss values; total = ce + lambda * metric
struct LossBreakdown {
  double ce = 0.0;
  double metric = 0.0;
  double total = 0.0;
  double lambda = 0.0;
};

// gradient buffers filled by the loss functions
//   d_logits     m x K   (cross-entropy)
//   d_embeddings m x c_d (metric loss, direct path)
//   d_weights    m x c_d (attention weights, distance terms + margin path)
//   d_centers    K x c_d row-major (positive rows + negative sources)
struct LossGrads {
  std::vector<std::vector<double>> d_logits;
  std::vector<std::vector<double>> d_embeddings;
  std::vector<std::vector<double>> d_weights;
  std::vector<double> d_centers;
};

LossGrads zero_loss_grads(int m, int k_classes, int c_d);

// mean over samples of -log p(true class); fills grads.d_logits with
// (p - onehot)/m per sample.  Probabilities below 1e-300 are clamped
// before the log and counted in *clamp_warnings when given.
double ce_loss(const std::vector<std::vector<double>>& probabilities,
               const std::vector<int>& labels, LossGrads* grads = nullptr,
               std::size_t* clamp_warnings = nullptr);

// fixed-margin variant: (1/2m) sum_i max(0, sum_j [(s_e-s_p)^2 - (s_e-s_n)^2] + margin)
// with s = sigmoid, hinge per sample.  Negatives are read live from
// `centers` via neg.source_class.  Fills d_embeddings and d_centers;
// samples with a closed hinge contribute zero gradient.
double tc3l_fixed(const std::vector<std::vector<double>>& embeddings,
                  const std::vector<int>& labels, const ClassCenters& centers,
                  const NegativeAssignment& neg, double margin,
                  LossGrads* grads = nullptr);

// adaptive-margin loss-less variant:
//   (1/2m) sum_i [ sum_j w_ij ((s_e-s_p)^2 - (s_e-s_n)^2) + alpha_i ],
//   alpha_i = sum_j w_ij, no hinge; strictly positive for finite inputs.
// Fills d_embeddings, d_weights, and d_centers.
double amtc3l(const std::vector<std::vector<double>>& embeddings,
              const std::vector<std::vector<double>>& weights,
              const std::vector<int>& labels, const ClassCenters& centers,
              const NegativeAssignment& neg, LossGrads* grads = nullptr);

// total = ce + lambda * metric
LossBreakdown multitask(double ce, double metric, double lambda);

}  // namespace tc3l
