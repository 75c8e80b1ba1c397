#ifndef TC3L_MODEL_HPP_
#define TC3L_MODEL_HPP_

#include <functional>
#include <string>
#include <vector>

#include "tc3l/numeric.hpp"

namespace tc3l {

/// Network shape. c_mid (the width between the two channel-reduction maps)
/// is derived: ceil(sqrt(c_f * c_d)).
struct ModelConfig {
  int d_in = 32;       // input feature dimension
  int c_f = 16;        // feature-map channels
  int h_f = 2;         // feature-map rows
  int w_f = 2;         // feature-map cols
  int c_d = 8;         // embedding dimension
  int k_classes = 7;   // number of classes
  int hidden = 32;     // encoder hidden width
  bool identity_nonlin = false;  // test hook: swap tanh for identity

  int c_mid() const;
  int fmap_size() const { return c_f * h_f * w_f; }
  void validate() const;
};

/// Trainable arrays. Declaration order here is the checkpoint order.
/// enc_*: two affine encoder layers (input -> hidden -> feature map).
/// red_*: the two pointwise channel-reduction maps applied per position.
/// cls_*: final linear map embedding -> logits.
struct ModelParams {
  std::vector<double> enc_w1;  // hidden x d_in
  std::vector<double> enc_b1;  // hidden
  std::vector<double> enc_w2;  // fmap_size x hidden
  std::vector<double> enc_b2;  // fmap_size
  std::vector<double> red_w1;  // c_mid x c_f
  std::vector<double> red_b1;  // c_mid
  std::vector<double> red_w2;  // c_d x c_mid
  std::vector<double> red_b2;  // c_d
  std::vector<double> cls_w;   // K x c_d
  std::vector<double> cls_b;   // K

  /// Visit arrays in declaration order (serialization, SGD, flattening).
  template <typename Fn>
  void for_each_array(Fn&& fn) {
    fn("enc_w1", enc_w1); fn("enc_b1", enc_b1);
    fn("enc_w2", enc_w2); fn("enc_b2", enc_b2);
    fn("red_w1", red_w1); fn("red_b1", red_b1);
    fn("red_w2", red_w2); fn("red_b2", red_b2);
    fn("cls_w", cls_w);   fn("cls_b", cls_b);
  }
  template <typename Fn>
  void for_each_array(Fn&& fn) const {
    const_cast<ModelParams*>(this)->for_each_array(
        [&](const char* name, std::vector<double>& v) {
          fn(name, static_cast<const std::vector<double>&>(v));
        });
  }
};

using ParamGrads = ModelParams;  // same shapes, gradient semantics

/// Zero-shaped params for a config; init_params adds the seeded Gaussians.
ModelParams zero_params(const ModelConfig& cfg);

/// Biases zero, weights ~ N(0, 1/sqrt(fan_in)), drawn in declaration order.
ModelParams init_params(const ModelConfig& cfg, Rng& rng);

/// Mini-batch of input vectors with integer labels.
struct Batch {
  std::vector<std::vector<double>> inputs;  // m x d_in
  std::vector<int> labels;                  // m, each in [0, K)

  int size() const { return static_cast<int>(labels.size()); }
  void validate(const ModelConfig& cfg) const;
};

/// Everything the backward pass needs, retained per sample.
struct ForwardTrace {
  std::vector<double> input;       // d_in
  std::vector<double> enc_hidden;  // hidden, post-nonlinearity
  Tensor3 feature;                 // c_f x h_f x w_f   (x*)
  Tensor3 ctx_hidden;              // c_mid x h_f x w_f, post-nonlinearity
  Tensor3 context;                 // c_d x h_f x w_f   (x^d)
  std::vector<double> mask;        // h_f*w_f pixel weights; empty = disabled
  std::vector<double> embedding;   // c_d                (e)
  std::vector<double> logits;      // K                  (x^z)
  std::vector<double> probs;       // K
  int prediction = 0;              // argmax, lowest index on ties
};

// -- forward pieces --------------------------------------------------------

/// Two affine layers with a smooth nonlinearity after the first, reshaped
/// to c_f x h_f x w_f.
Tensor3 encode(const ModelConfig& cfg, const ModelParams& p,
               const std::vector<double>& input);

/// Per-position channel reduction: W1 -> nonlinearity -> W2. Spatial
/// positions never mix. ctx_hidden, when non-null, receives the
/// post-nonlinearity intermediate for the backward pass.
Tensor3 contextualize(const ModelConfig& cfg, const ModelParams& p,
                      const Tensor3& feature, Tensor3* ctx_hidden = nullptr);

/// Global average pool: e_j = mean over spatial positions of channel j.
std::vector<double> pool(const Tensor3& context);

/// Logits = cls_w * e + cls_b.
std::vector<double> classify(const ModelConfig& cfg, const ModelParams& p,
                             const std::vector<double>& embedding);

int argmax_lowest(const std::vector<double>& v);

/// encode -> contextualize -> pool -> classify -> softmax -> argmax,
/// per sample, retaining intermediates. Pure given (params, batch).
std::vector<ForwardTrace> forward(const ModelConfig& cfg, const ModelParams& p,
                                  const Batch& batch);

/// First half of the per-sample forward pass: input through context map.
/// Callers that weight spatial positions set trace.mask before finishing.
ForwardTrace forward_one(const ModelConfig& cfg, const ModelParams& p,
                         const std::vector<double>& input);

/// Second half: pool -> classify -> softmax -> argmax. When trace.mask is
/// set, the context map is scaled position-wise before pooling.
void finish_trace(const ModelConfig& cfg, const ModelParams& p, ForwardTrace& t);

// -- backward --------------------------------------------------------------

/// Per-sample upstream gradients fed into backward().
struct UpstreamGrads {
  std::vector<double> d_logits;    // K (may be empty = zero)
  std::vector<double> d_embedding; // c_d (may be empty = zero)
  Tensor3 d_context;               // optional extra context-map gradient;
                                   // size 0 = none
};

/// Adjoint of the unmasked forward composition. Accumulation order over
/// samples is ascending for determinism.
ParamGrads backward(const ModelConfig& cfg, const ModelParams& p,
                    const std::vector<ForwardTrace>& traces,
                    const std::vector<UpstreamGrads>& upstream);

/// classify() adjoint for one sample: accumulates d_cls_w/d_cls_b into
/// grads and returns the embedding gradient cls_w^T * d_logits.
std::vector<double> classify_backward(const ModelConfig& cfg,
                                      const ModelParams& p,
                                      const ForwardTrace& trace,
                                      const std::vector<double>& d_logits,
                                      ParamGrads& grads);

/// contextualize()+encode() adjoint for one sample given the full
/// context-map gradient.
void context_encoder_backward(const ModelConfig& cfg, const ModelParams& p,
                              const ForwardTrace& trace, const Tensor3& d_context,
                              ParamGrads& grads);

}  // namespace tc3l

#endif  // TC3L_MODEL_HPP_
