#ifndef TC3L_CENTERS_HPP_
#define TC3L_CENTERS_HPP_

#include <span>
#include <vector>

#include "tc3l/numeric.hpp"

namespace tc3l {

/// K learnable class-center vectors in embedding space plus the momentum
/// buffer their optimizer uses.
struct ClassCenters {
  int k = 0;
  int dim = 0;
  std::vector<double> values;    // k x dim, row-major
  std::vector<double> velocity;  // same shape

  double& at(int cls, int d) { return values[static_cast<std::size_t>(cls) * dim + d]; }
  double at(int cls, int d) const { return values[static_cast<std::size_t>(cls) * dim + d]; }

  std::span<const double> row(int cls) const;
};

/// All-zero centers and velocity of the given shape.
ClassCenters zero_centers(int k, int dim);

/// Seeded Gaussian entries, mean 0, std init_std (0.1 unless tests force 0).
ClassCenters init_centers(int k, int dim, Rng& rng, double init_std = 0.1);

/// Row view of the sample's class center (the positive prototype).
std::span<const double> positive_center(const ClassCenters& centers, int label);

/// Scatter-add per-sample center gradients into a K x dim matrix.
/// d_positive[i] lands in row labels[i]; d_negative[i][j] lands in row
/// source_class[i][j], column j. Accumulation order is sample-ascending,
/// dimension-ascending.
std::vector<double> accumulate_center_grads(
    int k, int dim, const std::vector<int>& labels,
    const std::vector<std::vector<double>>& d_positive,
    const std::vector<std::vector<double>>& d_negative,
    const std::vector<std::vector<int>>& source_class);

}  // namespace tc3l

#endif  // TC3L_CENTERS_HPP_
