#include "tc3l/centers.hpp"

namespace tc3l {

std::span<const double> ClassCenters::row(int cls) const {
  TC3L_CHECK(cls >= 0 && cls < k, "ClassCenters: class index out of range");
  return std::span<const double>(values.data() + static_cast<std::size_t>(cls) * dim,
                                 static_cast<std::size_t>(dim));
}

ClassCenters zero_centers(int k, int dim) {
  TC3L_CHECK(k >= 2, "zero_centers: k must be at least 2");
  TC3L_CHECK(dim >= 1, "zero_centers: dim must be positive");
  ClassCenters c;
  c.k = k;
  c.dim = dim;
  c.values.assign(static_cast<std::size_t>(k) * dim, 0.0);
  c.velocity.assign(c.values.size(), 0.0);
  return c;
}

ClassCenters init_centers(int k, int dim, Rng& rng, double init_std) {
  TC3L_CHECK(k >= 2, "init_centers: k must be at least 2");
  TC3L_CHECK(dim >= 1, "init_centers: dim must be positive");
  TC3L_CHECK(init_std >= 0.0, "init_centers: init_std must be nonnegative");
  ClassCenters c;
  c.k = k;
  c.dim = dim;
  c.values.assign(static_cast<std::size_t>(k) * dim, 0.0);
  c.velocity.assign(c.values.size(), 0.0);
  for (double& v : c.values) v = rng.gaussian(0.0, init_std);
  return c;
}

std::span<const double> positive_center(const ClassCenters& centers, int label) {
  return centers.row(label);
}

std::vector<double> accumulate_center_grads(
    int k, int dim, const std::vector<int>& labels,
    const std::vector<std::vector<double>>& d_positive,
    const std::vector<std::vector<double>>& d_negative,
    const std::vector<std::vector<int>>& source_class) {
  TC3L_CHECK(labels.size() == d_positive.size() &&
                 labels.size() == d_negative.size() &&
                 labels.size() == source_class.size(),
             "accumulate_center_grads: per-sample list size mismatch");
  std::vector<double> out(static_cast<std::size_t>(k) * dim, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    TC3L_CHECK(y >= 0 && y < k, "accumulate_center_grads: label out of range");
    for (int j = 0; j < dim; ++j)
      out[static_cast<std::size_t>(y) * dim + j] += d_positive[i][j];
    for (int j = 0; j < dim; ++j) {
      const int src = source_class[i][j];
      TC3L_CHECK(src >= 0 && src < k,
                 "accumulate_center_grads: source class out of range");
      out[static_cast<std::size_t>(src) * dim + j] += d_negative[i][j];
    }
  }
  return out;
}

}  // namespace tc3l
