#ifndef TC3L_NSS_HPP_
#define TC3L_NSS_HPP_

#include <cstdint>
#include <vector>

#include "tc3l/centers.hpp"
#include "tc3l/numeric.hpp"

namespace tc3l {

enum class NssMode { kNone, kMs, kNs, kMm };

/// K x K running counts of (true label, predicted label) pairs. The
/// diagonal records correct predictions too; rivals always come from
/// off-diagonal entries.
struct ConfusionStats {
  int k = 0;
  std::vector<std::int64_t> counts;  // k x k, row = true, col = predicted

  explicit ConfusionStats(int k_classes = 0);

  std::int64_t& at(int truth, int pred) {
    return counts[static_cast<std::size_t>(truth) * k + pred];
  }
  std::int64_t at(int truth, int pred) const {
    return counts[static_cast<std::size_t>(truth) * k + pred];
  }
  std::int64_t total() const;
  void reset();
};

/// One (label, prediction) increment per pair observed.
void record_confusion(ConfusionStats& stats, const std::vector<int>& labels,
                      const std::vector<int>& predictions);

/// argmax over k != t of stats[t][k], ties toward the lowest index. A row
/// with no off-diagonal counts falls back to the rival whose center is
/// nearest to center t in raw squared Euclidean distance.
int hardest_rival(const ConfusionStats& stats, int truth,
                  const ClassCenters& centers);

/// Per sample: the negative prototype vector and, per dimension, the class
/// its value was taken from. source_class never equals the sample's label.
struct NegativeAssignment {
  std::vector<std::vector<double>> negatives;  // m x c_d, raw center values
  std::vector<std::vector<int>> source_class;  // m x c_d

  int size() const { return static_cast<int>(negatives.size()); }
};

/// Fully synthesized negatives: for each sample and dimension, the rival
/// class whose center element is nearest in sigmoid-squashed space
/// (ties toward the lowest class index). Negatives are assembled from raw
/// center values.
NegativeAssignment ms_nss(const std::vector<std::vector<double>>& embeddings,
                          const std::vector<int>& labels,
                          const ClassCenters& centers);

/// Prediction-based negatives. Misclassified samples take the predicted
/// class's center; correct ones take the hardest rival from the running
/// stats. The batch is recorded into stats before any rival lookup.
NegativeAssignment ns_nss(const std::vector<std::vector<double>>& embeddings,
                          const std::vector<int>& labels,
                          const std::vector<int>& predictions,
                          const ClassCenters& centers, ConfusionStats& stats);

/// Mixed method: misclassified samples follow the ns_nss misclassified
/// branch, correct ones the ms_nss per-dimension synthesis. Stats are
/// still recorded for bookkeeping.
NegativeAssignment mm_nss(const std::vector<std::vector<double>>& embeddings,
                          const std::vector<int>& labels,
                          const std::vector<int>& predictions,
                          const ClassCenters& centers, ConfusionStats& stats);

}  // namespace tc3l

#endif  // TC3L_NSS_HPP_
