#ifndef TC3L_ATTENTION_HPP_
#define TC3L_ATTENTION_HPP_

#include <vector>

#include "tc3l/model.hpp"
#include "tc3l/numeric.hpp"

namespace tc3l {

enum class AttentionMode { kNone, kElement, kPixel, kBoth };

struct AttentionConfig {
  AttentionMode mode = AttentionMode::kElement;
  int reduction = 4;  // bottleneck ratio of the element-wise branch

  bool element_on() const {
    return mode == AttentionMode::kElement || mode == AttentionMode::kBoth;
  }
  bool pixel_on() const {
    return mode == AttentionMode::kPixel || mode == AttentionMode::kBoth;
  }
  int bottleneck(int c_d) const { return c_d / reduction; }
  void validate(int c_d) const;
};

/// Element-wise branch: two affine maps c_d -> c_d/r -> c_d ending in
/// sigmoid. Pixel-wise branch: one pointwise map c_d -> 1 per spatial
/// position ending in sigmoid.
struct AttentionParams {
  std::vector<double> elem_w1;  // bottleneck x c_d
  std::vector<double> elem_b1;  // bottleneck
  std::vector<double> elem_w2;  // c_d x bottleneck
  std::vector<double> elem_b2;  // c_d
  std::vector<double> pix_w;    // c_d
  std::vector<double> pix_b;    // 1

  template <typename Fn>
  void for_each_array(Fn&& fn) {
    fn("elem_w1", elem_w1); fn("elem_b1", elem_b1);
    fn("elem_w2", elem_w2); fn("elem_b2", elem_b2);
    fn("pix_w", pix_w);     fn("pix_b", pix_b);
  }
  template <typename Fn>
  void for_each_array(Fn&& fn) const {
    const_cast<AttentionParams*>(this)->for_each_array(
        [&](const char* name, std::vector<double>& v) {
          fn(name, static_cast<const std::vector<double>&>(v));
        });
  }
};

using AttentionGrads = AttentionParams;

AttentionParams zero_attention(const ModelConfig& cfg, const AttentionConfig& att);
AttentionParams init_attention(const ModelConfig& cfg, const AttentionConfig& att,
                               Rng& rng);

/// Per-sample weights over embedding dimensions, the derived margins
/// alpha_i = sum_j w_ij, and the retained bottleneck activations needed
/// by the backward pass.
struct AttentionOutput {
  std::vector<std::vector<double>> weights;  // m x c_d, entries in (0,1)
  std::vector<std::vector<double>> hidden;   // m x bottleneck, post-tanh
  std::vector<double> margins;               // m
};

/// w = sigmoid(W2 * tanh(W1 * e + b1) + b2) for one sample's embedding.
/// hidden, when non-null, receives the bottleneck activation.
std::vector<double> attend_elementwise(const ModelConfig& cfg,
                                       const AttentionConfig& att,
                                       const AttentionParams& p,
                                       const std::vector<double>& embedding,
                                       std::vector<double>* hidden = nullptr);

/// Batch wrapper over attend_elementwise; fills margins.
AttentionOutput attend_batch(const ModelConfig& cfg, const AttentionConfig& att,
                             const AttentionParams& p,
                             const std::vector<ForwardTrace>& traces);

/// mask(pos) = sigmoid(pix_w . context[:, pos] + pix_b), one value per
/// spatial position.
std::vector<double> attend_pixelwise(const ModelConfig& cfg,
                                     const AttentionParams& p,
                                     const Tensor3& context);

/// alpha_i = sum_j w_ij. Strictly inside (0, c_d) since every w is.
std::vector<double> margins(const std::vector<std::vector<double>>& weights);

/// Evaluation-only view: threshold at 0.5 (>= 0.5 -> 1). Never used in
/// gradient paths.
std::vector<std::vector<double>> binarize_for_eval(
    const std::vector<std::vector<double>>& weights);

/// Adjoint of attend_elementwise for one sample. Accumulates parameter
/// gradients and returns the embedding gradient contribution.
std::vector<double> attend_elementwise_backward(
    const ModelConfig& cfg, const AttentionConfig& att, const AttentionParams& p,
    const std::vector<double>& embedding, const std::vector<double>& hidden,
    const std::vector<double>& weights, const std::vector<double>& d_weights,
    AttentionGrads& grads);

/// Adjoint of attend_pixelwise for one sample: given d_mask, accumulates
/// pix_w/pix_b gradients and adds the mask chain's context-map gradient
/// into d_context.
void attend_pixelwise_backward(const ModelConfig& cfg, const AttentionParams& p,
                               const Tensor3& context,
                               const std::vector<double>& mask,
                               const std::vector<double>& d_mask,
                               AttentionGrads& grads, Tensor3& d_context);

}  // namespace tc3l

#endif  // TC3L_ATTENTION_HPP_
