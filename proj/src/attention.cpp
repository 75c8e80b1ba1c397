#include "tc3l/attention.hpp"

#include <cmath>

namespace tc3l {

void AttentionConfig::validate(int c_d) const {
  TC3L_CHECK(reduction >= 1, "AttentionConfig: reduction must be >= 1");
  TC3L_CHECK(c_d / reduction >= 1,
             "AttentionConfig: c_d / reduction must be >= 1");
}

AttentionParams zero_attention(const ModelConfig& cfg, const AttentionConfig& att) {
  att.validate(cfg.c_d);
  const int h = att.bottleneck(cfg.c_d);
  AttentionParams p;
  p.elem_w1.assign(static_cast<std::size_t>(h) * cfg.c_d, 0.0);
  p.elem_b1.assign(h, 0.0);
  p.elem_w2.assign(static_cast<std::size_t>(cfg.c_d) * h, 0.0);
  p.elem_b2.assign(cfg.c_d, 0.0);
  p.pix_w.assign(cfg.c_d, 0.0);
  p.pix_b.assign(1, 0.0);
  return p;
}

AttentionParams init_attention(const ModelConfig& cfg, const AttentionConfig& att,
                               Rng& rng) {
  AttentionParams p = zero_attention(cfg, att);
  const int h = att.bottleneck(cfg.c_d);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(cfg.c_d));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(h));
  for (double& x : p.elem_w1) x = rng.gaussian(0.0, s1);
  for (double& x : p.elem_w2) x = rng.gaussian(0.0, s2);
  for (double& x : p.pix_w) x = rng.gaussian(0.0, s1);
  return p;
}

std::vector<double> attend_elementwise(const ModelConfig& cfg,
                                       const AttentionConfig& att,
                                       const AttentionParams& p,
                                       const std::vector<double>& embedding,
                                       std::vector<double>* hidden) {
  TC3L_CHECK(embedding.size() == static_cast<std::size_t>(cfg.c_d),
             "attend_elementwise: embedding size mismatch");
  const int h = att.bottleneck(cfg.c_d);
  std::vector<double> a(h);
  for (int u = 0; u < h; ++u) {
    double acc = p.elem_b1[u];
    const double* row = p.elem_w1.data() + static_cast<std::size_t>(u) * cfg.c_d;
    for (int d = 0; d < cfg.c_d; ++d) acc += row[d] * embedding[d];
    a[u] = std::tanh(acc);
  }
  std::vector<double> w(cfg.c_d);
  for (int d = 0; d < cfg.c_d; ++d) {
    double acc = p.elem_b2[d];
    const double* row = p.elem_w2.data() + static_cast<std::size_t>(d) * h;
    for (int u = 0; u < h; ++u) acc += row[u] * a[u];
    w[d] = sigmoid(acc);
  }
  if (hidden != nullptr) *hidden = std::move(a);
  return w;
}

AttentionOutput attend_batch(const ModelConfig& cfg, const AttentionConfig& att,
                             const AttentionParams& p,
                             const std::vector<ForwardTrace>& traces) {
  AttentionOutput out;
  out.weights.reserve(traces.size());
  out.hidden.reserve(traces.size());
  for (const ForwardTrace& t : traces) {
    std::vector<double> h;
    out.weights.push_back(attend_elementwise(cfg, att, p, t.embedding, &h));
    out.hidden.push_back(std::move(h));
  }
  out.margins = margins(out.weights);
  return out;
}

std::vector<double> attend_pixelwise(const ModelConfig& cfg,
                                     const AttentionParams& p,
                                     const Tensor3& context) {
  TC3L_CHECK(context.channels == cfg.c_d, "attend_pixelwise: channel mismatch");
  const int plane = context.plane();
  std::vector<double> mask(plane);
  for (int pos = 0; pos < plane; ++pos) {
    double acc = p.pix_b[0];
    for (int d = 0; d < cfg.c_d; ++d) acc += p.pix_w[d] * context.at_pos(d, pos);
    mask[pos] = sigmoid(acc);
  }
  return mask;
}

std::vector<double> margins(const std::vector<std::vector<double>>& weights) {
  std::vector<double> alpha(weights.size(), 0.0);
  for (std::size_t i = 0; i < weights.size(); ++i) {
    double acc = 0.0;
    for (double w : weights[i]) acc += w;
    alpha[i] = acc;
  }
  return alpha;
}

std::vector<std::vector<double>> binarize_for_eval(
    const std::vector<std::vector<double>>& weights) {
  std::vector<std::vector<double>> out = weights;
  for (auto& row : out)
    for (double& w : row) w = (w >= 0.5) ? 1.0 : 0.0;
  return out;
}

std::vector<double> attend_elementwise_backward(
    const ModelConfig& cfg, const AttentionConfig& att, const AttentionParams& p,
    const std::vector<double>& embedding, const std::vector<double>& hidden,
    const std::vector<double>& weights, const std::vector<double>& d_weights,
    AttentionGrads& grads) {
  const int h = att.bottleneck(cfg.c_d);
  // sigmoid layer
  std::vector<double> d_hidden(h, 0.0);
  for (int d = 0; d < cfg.c_d; ++d) {
    const double g = d_weights[d] * sigmoid_grad_from_output(weights[d]);
    grads.elem_b2[d] += g;
    double* wrow = grads.elem_w2.data() + static_cast<std::size_t>(d) * h;
    const double* prow = p.elem_w2.data() + static_cast<std::size_t>(d) * h;
    for (int u = 0; u < h; ++u) {
      wrow[u] += g * hidden[u];
      d_hidden[u] += prow[u] * g;
    }
  }
  // tanh bottleneck
  std::vector<double> d_e(cfg.c_d, 0.0);
  for (int u = 0; u < h; ++u) {
    const double g = d_hidden[u] * (1.0 - hidden[u] * hidden[u]);
    grads.elem_b1[u] += g;
    double* wrow = grads.elem_w1.data() + static_cast<std::size_t>(u) * cfg.c_d;
    const double* prow = p.elem_w1.data() + static_cast<std::size_t>(u) * cfg.c_d;
    for (int d = 0; d < cfg.c_d; ++d) {
      wrow[d] += g * embedding[d];
      d_e[d] += prow[d] * g;
    }
  }
  return d_e;
}

void attend_pixelwise_backward(const ModelConfig& cfg, const AttentionParams& p,
                               const Tensor3& context,
                               const std::vector<double>& mask,
                               const std::vector<double>& d_mask,
                               AttentionGrads& grads, Tensor3& d_context) {
  const int plane = context.plane();
  for (int pos = 0; pos < plane; ++pos) {
    const double g = d_mask[pos] * sigmoid_grad_from_output(mask[pos]);
    grads.pix_b[0] += g;
    for (int d = 0; d < cfg.c_d; ++d) {
      grads.pix_w[d] += g * context.at_pos(d, pos);
      d_context.at_pos(d, pos) += g * p.pix_w[d];
    }
  }
}

}  // namespace tc3l
