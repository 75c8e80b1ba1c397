#include "tc3l/losses.hpp"

#include <cmath>

namespace tc3l {

namespace {

constexpr double kLogClamp = 1e-300;

void check_metric_batch(const std::vector<std::vector<double>>& embeddings,
                        const std::vector<int>& labels,
                        const ClassCenters& centers,
                        const NegativeAssignment& neg) {
  TC3L_CHECK(!embeddings.empty(), "metric loss: empty batch");
  TC3L_CHECK(embeddings.size() == labels.size(),
             "metric loss: embeddings/labels mismatch");
  TC3L_CHECK(neg.size() == static_cast<int>(embeddings.size()),
             "metric loss: negative assignment size mismatch");
  for (std::size_t i = 0; i < embeddings.size(); ++i) {
    TC3L_CHECK(embeddings[i].size() == static_cast<std::size_t>(centers.dim),
               "metric loss: embedding dimension mismatch");
    TC3L_CHECK(labels[i] >= 0 && labels[i] < centers.k,
               "metric loss: label out of range");
    TC3L_CHECK(neg.source_class[i].size() ==
                   static_cast<std::size_t>(centers.dim),
               "metric loss: source row dimension mismatch");
    for (int j = 0; j < centers.dim; ++j) {
      const int src = neg.source_class[i][j];
      TC3L_CHECK(src >= 0 && src < centers.k && src != labels[i],
                 "metric loss: invalid negative source class");
    }
  }
}

}  // namespace

LossGrads zero_loss_grads(int m, int k_classes, int c_d) {
  TC3L_CHECK(m > 0 && k_classes > 0 && c_d > 0, "zero_loss_grads: bad shape");
  LossGrads g;
  g.d_logits.assign(m, std::vector<double>(k_classes, 0.0));
  g.d_embeddings.assign(m, std::vector<double>(c_d, 0.0));
  g.d_weights.assign(m, std::vector<double>(c_d, 0.0));
  g.d_centers.assign(static_cast<std::size_t>(k_classes) * c_d, 0.0);
  return g;
}

double ce_loss(const std::vector<std::vector<double>>& probabilities,
               const std::vector<int>& labels, LossGrads* grads,
               std::size_t* clamp_warnings) {
  TC3L_CHECK(!probabilities.empty(), "ce_loss: empty batch");
  TC3L_CHECK(probabilities.size() == labels.size(),
             "ce_loss: probabilities/labels mismatch");
  const int m = static_cast<int>(probabilities.size());
  const int k = static_cast<int>(probabilities[0].size());
  double loss = 0.0;
  for (int i = 0; i < m; ++i) {
    const std::vector<double>& p = probabilities[i];
    TC3L_CHECK(static_cast<int>(p.size()) == k, "ce_loss: ragged rows");
    TC3L_CHECK(labels[i] >= 0 && labels[i] < k, "ce_loss: label out of range");
    double sum = 0.0;
    for (int c = 0; c < k; ++c) {
      TC3L_CHECK(p[c] >= 0.0 && p[c] <= 1.0, "ce_loss: probability outside [0,1]");
      sum += p[c];
    }
    TC3L_CHECK(std::abs(sum - 1.0) <= 1e-9, "ce_loss: row not on the simplex");
    double pt = p[labels[i]];
    if (pt < kLogClamp) {
      pt = kLogClamp;
      if (clamp_warnings != nullptr) ++*clamp_warnings;
    }
    loss -= std::log(pt);
    if (grads != nullptr) {
      std::vector<double>& dl = grads->d_logits[i];
      for (int c = 0; c < k; ++c) dl[c] = p[c] / m;
      dl[labels[i]] -= 1.0 / m;
    }
  }
  return loss / m;
}

double tc3l_fixed(const std::vector<std::vector<double>>& embeddings,
                  const std::vector<int>& labels, const ClassCenters& centers,
                  const NegativeAssignment& neg, double margin,
                  LossGrads* grads) {
  check_metric_batch(embeddings, labels, centers, neg);
  TC3L_CHECK(margin > 0.0 && margin <= centers.dim,
             "tc3l_fixed: margin outside (0, c_d]");
  const int m = static_cast<int>(embeddings.size());
  const double inv_2m = 1.0 / (2.0 * m);
  std::vector<std::vector<double>> d_pos, d_neg;
  if (grads != nullptr) {
    d_pos.assign(m, std::vector<double>(centers.dim, 0.0));
    d_neg.assign(m, std::vector<double>(centers.dim, 0.0));
  }
  double loss = 0.0;
  for (int i = 0; i < m; ++i) {
    const int y = labels[i];
    double arg = margin;
    for (int j = 0; j < centers.dim; ++j) {
      const double se = sigmoid(embeddings[i][j]);
      const double sp = sigmoid(centers.at(y, j));
      const double sn = sigmoid(centers.at(neg.source_class[i][j], j));
      arg += (se - sp) * (se - sp) - (se - sn) * (se - sn);
    }
    if (arg <= 0.0) continue;  // hinge closed: no loss, no gradient
    loss += inv_2m * arg;
    if (grads == nullptr) continue;
    for (int j = 0; j < centers.dim; ++j) {
      const double se = sigmoid(embeddings[i][j]);
      const double sp = sigmoid(centers.at(y, j));
      const double sn = sigmoid(centers.at(neg.source_class[i][j], j));
      const double scale = 2.0 * inv_2m;  // d(arg)/d(term) through 1/2m
      grads->d_embeddings[i][j] +=
          scale * ((se - sp) - (se - sn)) * sigmoid_grad_from_output(se);
      d_pos[i][j] = -scale * (se - sp) * sigmoid_grad_from_output(sp);
      d_neg[i][j] = scale * (se - sn) * sigmoid_grad_from_output(sn);
    }
  }
  if (grads != nullptr) {
    const std::vector<double> dc = accumulate_center_grads(
        centers.k, centers.dim, labels, d_pos, d_neg, neg.source_class);
    for (std::size_t t = 0; t < dc.size(); ++t) grads->d_centers[t] += dc[t];
  }
  return loss;
}

double amtc3l(const std::vector<std::vector<double>>& embeddings,
              const std::vector<std::vector<double>>& weights,
              const std::vector<int>& labels, const ClassCenters& centers,
              const NegativeAssignment& neg, LossGrads* grads) {
  check_metric_batch(embeddings, labels, centers, neg);
  TC3L_CHECK(weights.size() == embeddings.size(),
             "amtc3l: weights batch size mismatch");
  const int m = static_cast<int>(embeddings.size());
  const double inv_2m = 1.0 / (2.0 * m);
  std::vector<std::vector<double>> d_pos, d_neg;
  if (grads != nullptr) {
    d_pos.assign(m, std::vector<double>(centers.dim, 0.0));
    d_neg.assign(m, std::vector<double>(centers.dim, 0.0));
  }
  double loss = 0.0;
  for (int i = 0; i < m; ++i) {
    const int y = labels[i];
    TC3L_CHECK(weights[i].size() == static_cast<std::size_t>(centers.dim),
               "amtc3l: weights dimension mismatch");
    for (int j = 0; j < centers.dim; ++j) {
      const double w = weights[i][j];
      TC3L_CHECK(w >= 0.0 && w <= 1.0, "amtc3l: weight outside [0,1]");
      const int src = neg.source_class[i][j];
      const double se = sigmoid(embeddings[i][j]);
      const double sp = sigmoid(centers.at(y, j));
      const double sn = sigmoid(centers.at(src, j));
      const double dp = (se - sp) * (se - sp);
      const double dn = (se - sn) * (se - sn);
      loss += inv_2m * w * (dp - dn + 1.0);
      if (grads == nullptr) continue;
      grads->d_weights[i][j] += inv_2m * (dp - dn + 1.0);
      const double scale = 2.0 * inv_2m * w;
      grads->d_embeddings[i][j] +=
          scale * ((se - sp) - (se - sn)) * sigmoid_grad_from_output(se);
      d_pos[i][j] = -scale * (se - sp) * sigmoid_grad_from_output(sp);
      d_neg[i][j] = scale * (se - sn) * sigmoid_grad_from_output(sn);
    }
  }
  if (grads != nullptr) {
    const std::vector<double> dc = accumulate_center_grads(
        centers.k, centers.dim, labels, d_pos, d_neg, neg.source_class);
    for (std::size_t t = 0; t < dc.size(); ++t) grads->d_centers[t] += dc[t];
  }
  return loss;
}

LossBreakdown multitask(double ce, double metric, double lambda) {
  TC3L_CHECK(lambda >= 0.0, "multitask: lambda must be nonnegative");
  TC3L_CHECK(ce >= 0.0 && metric >= 0.0, "multitask: losses must be nonnegative");
  LossBreakdown b;
  b.ce = ce;
  b.metric = metric;
  b.lambda = lambda;
  b.total = lambda == 0.0 ? ce : ce + lambda * metric;
  return b;
}

}  // namespace tc3l
