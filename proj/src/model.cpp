#include "tc3l/model.hpp"

#include <cmath>

namespace tc3l {

namespace {

inline double nonlin(double x, bool identity) { return identity ? x : std::tanh(x); }
// derivative expressed through the stored post-activation value
inline double nonlin_grad(double a, bool identity) { return identity ? 1.0 : 1.0 - a * a; }

// y = W x + b with W stored row-major (out x in)
void affine(const std::vector<double>& w, const std::vector<double>& b,
            const std::vector<double>& x, std::vector<double>& y) {
  const std::size_t n_out = b.size();
  const std::size_t n_in = x.size();
  y.assign(n_out, 0.0);
  for (std::size_t i = 0; i < n_out; ++i) {
    double acc = b[i];
    const double* row = w.data() + i * n_in;
    for (std::size_t j = 0; j < n_in; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

}  // namespace

int ModelConfig::c_mid() const {
  return static_cast<int>(std::ceil(std::sqrt(static_cast<double>(c_f) * c_d)));
}

void ModelConfig::validate() const {
  TC3L_CHECK(d_in > 0 && c_f > 0 && h_f > 0 && w_f > 0 && c_d > 0 && hidden > 0,
             "ModelConfig: all dimensions must be positive");
  TC3L_CHECK(c_d <= c_f, "ModelConfig: c_d must not exceed c_f");
  TC3L_CHECK(k_classes >= 2, "ModelConfig: k_classes must be at least 2");
}

ModelParams zero_params(const ModelConfig& cfg) {
  cfg.validate();
  const int mid = cfg.c_mid();
  ModelParams p;
  p.enc_w1.assign(static_cast<std::size_t>(cfg.hidden) * cfg.d_in, 0.0);
  p.enc_b1.assign(cfg.hidden, 0.0);
  p.enc_w2.assign(static_cast<std::size_t>(cfg.fmap_size()) * cfg.hidden, 0.0);
  p.enc_b2.assign(cfg.fmap_size(), 0.0);
  p.red_w1.assign(static_cast<std::size_t>(mid) * cfg.c_f, 0.0);
  p.red_b1.assign(mid, 0.0);
  p.red_w2.assign(static_cast<std::size_t>(cfg.c_d) * mid, 0.0);
  p.red_b2.assign(cfg.c_d, 0.0);
  p.cls_w.assign(static_cast<std::size_t>(cfg.k_classes) * cfg.c_d, 0.0);
  p.cls_b.assign(cfg.k_classes, 0.0);
  return p;
}

ModelParams init_params(const ModelConfig& cfg, Rng& rng) {
  ModelParams p = zero_params(cfg);
  const int mid = cfg.c_mid();
  auto fill = [&rng](std::vector<double>& w, int fan_in) {
    const double std = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (double& x : w) x = rng.gaussian(0.0, std);
  };
  fill(p.enc_w1, cfg.d_in);
  fill(p.enc_w2, cfg.hidden);
  fill(p.red_w1, cfg.c_f);
  fill(p.red_w2, mid);
  fill(p.cls_w, cfg.c_d);
  return p;
}

void Batch::validate(const ModelConfig& cfg) const {
  TC3L_CHECK(size() >= 1, "Batch: must contain at least one sample");
  TC3L_CHECK(inputs.size() == labels.size(), "Batch: inputs/labels size mismatch");
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    TC3L_CHECK(inputs[i].size() == static_cast<std::size_t>(cfg.d_in),
               "Batch: input dimension mismatch");
    TC3L_CHECK(labels[i] >= 0 && labels[i] < cfg.k_classes,
               "Batch: label out of range");
  }
}

Tensor3 encode(const ModelConfig& cfg, const ModelParams& p,
               const std::vector<double>& input) {
  TC3L_CHECK(input.size() == static_cast<std::size_t>(cfg.d_in),
             "encode: input dimension mismatch");
  std::vector<double> h;
  affine(p.enc_w1, p.enc_b1, input, h);
  for (double& x : h) x = nonlin(x, cfg.identity_nonlin);
  std::vector<double> f;
  affine(p.enc_w2, p.enc_b2, h, f);
  return Tensor3(cfg.c_f, cfg.h_f, cfg.w_f, std::move(f));
}

Tensor3 contextualize(const ModelConfig& cfg, const ModelParams& p,
                      const Tensor3& feature, Tensor3* ctx_hidden) {
  TC3L_CHECK(feature.channels == cfg.c_f && feature.rows == cfg.h_f &&
                 feature.cols == cfg.w_f,
             "contextualize: feature map shape mismatch");
  const int mid = cfg.c_mid();
  const int plane = feature.plane();
  Tensor3 hidden(mid, cfg.h_f, cfg.w_f);
  Tensor3 out(cfg.c_d, cfg.h_f, cfg.w_f);
  for (int pos = 0; pos < plane; ++pos) {
    for (int u = 0; u < mid; ++u) {
      double acc = p.red_b1[u];
      const double* row = p.red_w1.data() + static_cast<std::size_t>(u) * cfg.c_f;
      for (int c = 0; c < cfg.c_f; ++c) acc += row[c] * feature.at_pos(c, pos);
      hidden.at_pos(u, pos) = nonlin(acc, cfg.identity_nonlin);
    }
    for (int d = 0; d < cfg.c_d; ++d) {
      double acc = p.red_b2[d];
      const double* row = p.red_w2.data() + static_cast<std::size_t>(d) * mid;
      for (int u = 0; u < mid; ++u) acc += row[u] * hidden.at_pos(u, pos);
      out.at_pos(d, pos) = acc;
    }
  }
  if (ctx_hidden != nullptr) *ctx_hidden = std::move(hidden);
  return out;
}

std::vector<double> pool(const Tensor3& context) {
  const int plane = context.plane();
  std::vector<double> e(context.channels, 0.0);
  for (int c = 0; c < context.channels; ++c) {
    double acc = 0.0;
    for (int pos = 0; pos < plane; ++pos) acc += context.at_pos(c, pos);
    e[c] = acc / plane;
  }
  return e;
}

std::vector<double> classify(const ModelConfig& cfg, const ModelParams& p,
                             const std::vector<double>& embedding) {
  TC3L_CHECK(embedding.size() == static_cast<std::size_t>(cfg.c_d),
             "classify: embedding dimension mismatch");
  std::vector<double> z;
  affine(p.cls_w, p.cls_b, embedding, z);
  return z;
}

int argmax_lowest(const std::vector<double>& v) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(v.size()); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

ForwardTrace forward_one(const ModelConfig& cfg, const ModelParams& p,
                         const std::vector<double>& input) {
  TC3L_CHECK(input.size() == static_cast<std::size_t>(cfg.d_in),
             "forward_one: input dimension mismatch");
  ForwardTrace t;
  t.input = input;
  std::vector<double> h;
  affine(p.enc_w1, p.enc_b1, t.input, h);
  for (double& x : h) x = nonlin(x, cfg.identity_nonlin);
  t.enc_hidden = h;
  std::vector<double> f;
  affine(p.enc_w2, p.enc_b2, h, f);
  t.feature = Tensor3(cfg.c_f, cfg.h_f, cfg.w_f, std::move(f));
  t.context = contextualize(cfg, p, t.feature, &t.ctx_hidden);
  return t;
}

void finish_trace(const ModelConfig& cfg, const ModelParams& p, ForwardTrace& t) {
  if (t.mask.empty()) {
    t.embedding = pool(t.context);
  } else {
    TC3L_CHECK(t.mask.size() == static_cast<std::size_t>(t.context.plane()),
               "finish_trace: mask size mismatch");
    Tensor3 masked = t.context;
    const int plane = masked.plane();
    for (int c = 0; c < masked.channels; ++c)
      for (int pos = 0; pos < plane; ++pos)
        masked.at_pos(c, pos) *= t.mask[pos];
    t.embedding = pool(masked);
  }
  t.logits = classify(cfg, p, t.embedding);
  t.probs = softmax(t.logits);
  t.prediction = argmax_lowest(t.logits);
}

std::vector<ForwardTrace> forward(const ModelConfig& cfg, const ModelParams& p,
                                  const Batch& batch) {
  batch.validate(cfg);
  std::vector<ForwardTrace> traces;
  traces.reserve(batch.size());
  for (int i = 0; i < batch.size(); ++i) {
    ForwardTrace t = forward_one(cfg, p, batch.inputs[i]);
    finish_trace(cfg, p, t);
    traces.push_back(std::move(t));
  }
  return traces;
}

std::vector<double> classify_backward(const ModelConfig& cfg,
                                      const ModelParams& p,
                                      const ForwardTrace& trace,
                                      const std::vector<double>& d_logits,
                                      ParamGrads& grads) {
  std::vector<double> d_e(cfg.c_d, 0.0);
  if (d_logits.empty()) return d_e;
  TC3L_CHECK(d_logits.size() == static_cast<std::size_t>(cfg.k_classes),
             "classify_backward: d_logits size mismatch");
  for (int k = 0; k < cfg.k_classes; ++k) {
    const double g = d_logits[k];
    grads.cls_b[k] += g;
    double* wrow = grads.cls_w.data() + static_cast<std::size_t>(k) * cfg.c_d;
    const double* prow = p.cls_w.data() + static_cast<std::size_t>(k) * cfg.c_d;
    for (int d = 0; d < cfg.c_d; ++d) {
      wrow[d] += g * trace.embedding[d];
      d_e[d] += prow[d] * g;
    }
  }
  return d_e;
}

void context_encoder_backward(const ModelConfig& cfg, const ModelParams& p,
                              const ForwardTrace& trace, const Tensor3& d_context,
                              ParamGrads& grads) {
  TC3L_CHECK(d_context.channels == cfg.c_d && d_context.rows == cfg.h_f &&
                 d_context.cols == cfg.w_f,
             "context_encoder_backward: d_context shape mismatch");
  const int mid = cfg.c_mid();
  const int plane = trace.feature.plane();

  Tensor3 d_feature(cfg.c_f, cfg.h_f, cfg.w_f);
  std::vector<double> d_hidden_pos(mid);
  for (int pos = 0; pos < plane; ++pos) {
    // W2 layer: d_hidden = W2^T d_out, param grads outer product
    for (int u = 0; u < mid; ++u) d_hidden_pos[u] = 0.0;
    for (int d = 0; d < cfg.c_d; ++d) {
      const double g = d_context.at_pos(d, pos);
      if (g == 0.0) continue;
      grads.red_b2[d] += g;
      double* wrow = grads.red_w2.data() + static_cast<std::size_t>(d) * mid;
      const double* prow = p.red_w2.data() + static_cast<std::size_t>(d) * mid;
      for (int u = 0; u < mid; ++u) {
        wrow[u] += g * trace.ctx_hidden.at_pos(u, pos);
        d_hidden_pos[u] += prow[u] * g;
      }
    }
    // nonlinearity, then W1 layer
    for (int u = 0; u < mid; ++u) {
      const double a = trace.ctx_hidden.at_pos(u, pos);
      const double g = d_hidden_pos[u] * nonlin_grad(a, cfg.identity_nonlin);
      if (g == 0.0) continue;
      grads.red_b1[u] += g;
      double* wrow = grads.red_w1.data() + static_cast<std::size_t>(u) * cfg.c_f;
      const double* prow = p.red_w1.data() + static_cast<std::size_t>(u) * cfg.c_f;
      for (int c = 0; c < cfg.c_f; ++c) {
        wrow[c] += g * trace.feature.at_pos(c, pos);
        d_feature.at_pos(c, pos) += prow[c] * g;
      }
    }
  }

  // encoder second affine
  const int fmap = cfg.fmap_size();
  std::vector<double> d_h(cfg.hidden, 0.0);
  for (int f = 0; f < fmap; ++f) {
    const double g = d_feature.data[f];
    if (g == 0.0) continue;
    grads.enc_b2[f] += g;
    double* wrow = grads.enc_w2.data() + static_cast<std::size_t>(f) * cfg.hidden;
    const double* prow = p.enc_w2.data() + static_cast<std::size_t>(f) * cfg.hidden;
    for (int h = 0; h < cfg.hidden; ++h) {
      wrow[h] += g * trace.enc_hidden[h];
      d_h[h] += prow[h] * g;
    }
  }
  // encoder first affine through the nonlinearity
  for (int h = 0; h < cfg.hidden; ++h) {
    const double a = trace.enc_hidden[h];
    const double g = d_h[h] * nonlin_grad(a, cfg.identity_nonlin);
    if (g == 0.0) continue;
    grads.enc_b1[h] += g;
    double* wrow = grads.enc_w1.data() + static_cast<std::size_t>(h) * cfg.d_in;
    for (int j = 0; j < cfg.d_in; ++j) wrow[j] += g * trace.input[j];
  }
}

ParamGrads backward(const ModelConfig& cfg, const ModelParams& p,
                    const std::vector<ForwardTrace>& traces,
                    const std::vector<UpstreamGrads>& upstream) {
  TC3L_CHECK(traces.size() == upstream.size(),
             "backward: traces/upstream size mismatch");
  ParamGrads grads = zero_params(cfg);
  const int plane = cfg.h_f * cfg.w_f;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const ForwardTrace& t = traces[i];
    const UpstreamGrads& up = upstream[i];

    std::vector<double> d_e = classify_backward(cfg, p, t, up.d_logits, grads);
    if (!up.d_embedding.empty()) {
      TC3L_CHECK(up.d_embedding.size() == static_cast<std::size_t>(cfg.c_d),
                 "backward: d_embedding size mismatch");
      for (int d = 0; d < cfg.c_d; ++d) d_e[d] += up.d_embedding[d];
    }

    // pool adjoint spreads the embedding gradient uniformly over positions
    Tensor3 d_context(cfg.c_d, cfg.h_f, cfg.w_f);
    for (int d = 0; d < cfg.c_d; ++d) {
      const double g = d_e[d] / plane;
      for (int pos = 0; pos < plane; ++pos) d_context.at_pos(d, pos) = g;
    }
    if (d_context.size() > 0 && up.d_context.size() > 0) {
      TC3L_CHECK(up.d_context.channels == cfg.c_d && up.d_context.rows == cfg.h_f &&
                     up.d_context.cols == cfg.w_f,
                 "backward: d_context shape mismatch");
      for (int j = 0; j < d_context.size(); ++j)
        d_context.data[j] += up.d_context.data[j];
    }
    context_encoder_backward(cfg, p, t, d_context, grads);
  }
  return grads;
}

}  // namespace tc3l
