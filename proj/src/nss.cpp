#include "tc3l/nss.hpp"

#include <limits>
#include <numeric>

namespace tc3l {

namespace {

// full-row negative: every dimension sourced from one rival class
void assign_row(NegativeAssignment& out, int i, const ClassCenters& centers,
                int rival) {
  std::vector<double>& neg = out.negatives[i];
  std::vector<int>& src = out.source_class[i];
  neg.resize(centers.dim);
  src.assign(centers.dim, rival);
  for (int j = 0; j < centers.dim; ++j) neg[j] = centers.at(rival, j);
}

// per-dimension synthesis for one sample (the MS-NSS inner loop)
void synthesize_row(NegativeAssignment& out, int i,
                    const std::vector<double>& embedding, int label,
                    const ClassCenters& centers) {
  std::vector<double>& neg = out.negatives[i];
  std::vector<int>& src = out.source_class[i];
  neg.resize(centers.dim);
  src.resize(centers.dim);
  for (int j = 0; j < centers.dim; ++j) {
    const double se = sigmoid(embedding[j]);
    double best = std::numeric_limits<double>::infinity();
    int best_k = -1;
    for (int k = 0; k < centers.k; ++k) {
      if (k == label) continue;
      const double diff = se - sigmoid(centers.at(k, j));
      const double dist = diff * diff;
      if (dist < best) {  // strict: ties keep the lowest class index
        best = dist;
        best_k = k;
      }
    }
    src[j] = best_k;
    neg[j] = centers.at(best_k, j);
  }
}

void check_batch(const std::vector<std::vector<double>>& embeddings,
                 const std::vector<int>& labels, const ClassCenters& centers) {
  TC3L_CHECK(!embeddings.empty(), "nss: empty batch");
  TC3L_CHECK(embeddings.size() == labels.size(), "nss: embeddings/labels mismatch");
  TC3L_CHECK(centers.k >= 2, "nss: need at least two classes");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    TC3L_CHECK(labels[i] >= 0 && labels[i] < centers.k, "nss: label out of range");
    TC3L_CHECK(embeddings[i].size() == static_cast<std::size_t>(centers.dim),
               "nss: embedding dimension mismatch");
  }
}

}  // namespace

ConfusionStats::ConfusionStats(int k_classes) : k(k_classes) {
  counts.assign(static_cast<std::size_t>(k) * k, 0);
}

std::int64_t ConfusionStats::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

void ConfusionStats::reset() { counts.assign(counts.size(), 0); }

void record_confusion(ConfusionStats& stats, const std::vector<int>& labels,
                      const std::vector<int>& predictions) {
  TC3L_CHECK(labels.size() == predictions.size(),
             "record_confusion: labels/predictions length mismatch");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    TC3L_CHECK(labels[i] >= 0 && labels[i] < stats.k &&
                   predictions[i] >= 0 && predictions[i] < stats.k,
               "record_confusion: class index out of range");
    ++stats.at(labels[i], predictions[i]);
  }
}

int hardest_rival(const ConfusionStats& stats, int truth,
                  const ClassCenters& centers) {
  TC3L_CHECK(truth >= 0 && truth < stats.k, "hardest_rival: class out of range");
  TC3L_CHECK(stats.k == centers.k, "hardest_rival: stats/centers class mismatch");
  std::int64_t best_count = 0;
  int best_k = -1;
  for (int k = 0; k < stats.k; ++k) {
    if (k == truth) continue;
    if (stats.at(truth, k) > best_count) {
      best_count = stats.at(truth, k);
      best_k = k;
    }
  }
  if (best_k >= 0) return best_k;
  // virgin row: nearest rival center in raw squared Euclidean distance
  double best_dist = std::numeric_limits<double>::infinity();
  for (int k = 0; k < centers.k; ++k) {
    if (k == truth) continue;
    double dist = 0.0;
    for (int j = 0; j < centers.dim; ++j) {
      const double diff = centers.at(truth, j) - centers.at(k, j);
      dist += diff * diff;
    }
    if (dist < best_dist) {
      best_dist = dist;
      best_k = k;
    }
  }
  return best_k;
}

NegativeAssignment ms_nss(const std::vector<std::vector<double>>& embeddings,
                          const std::vector<int>& labels,
                          const ClassCenters& centers) {
  check_batch(embeddings, labels, centers);
  const int m = static_cast<int>(embeddings.size());
  NegativeAssignment out;
  out.negatives.resize(m);
  out.source_class.resize(m);
  for (int i = 0; i < m; ++i)
    synthesize_row(out, i, embeddings[i], labels[i], centers);
  return out;
}

NegativeAssignment ns_nss(const std::vector<std::vector<double>>& embeddings,
                          const std::vector<int>& labels,
                          const std::vector<int>& predictions,
                          const ClassCenters& centers, ConfusionStats& stats) {
  check_batch(embeddings, labels, centers);
  TC3L_CHECK(predictions.size() == labels.size(),
             "ns_nss: predictions length mismatch");
  record_confusion(stats, labels, predictions);  // batch counted before lookup
  const int m = static_cast<int>(embeddings.size());
  NegativeAssignment out;
  out.negatives.resize(m);
  out.source_class.resize(m);
  for (int i = 0; i < m; ++i) {
    const int rival = (predictions[i] != labels[i])
                          ? predictions[i]
                          : hardest_rival(stats, labels[i], centers);
    assign_row(out, i, centers, rival);
  }
  return out;
}

NegativeAssignment mm_nss(const std::vector<std::vector<double>>& embeddings,
                          const std::vector<int>& labels,
                          const std::vector<int>& predictions,
                          const ClassCenters& centers, ConfusionStats& stats) {
  check_batch(embeddings, labels, centers);
  TC3L_CHECK(predictions.size() == labels.size(),
             "mm_nss: predictions length mismatch");
  record_confusion(stats, labels, predictions);
  const int m = static_cast<int>(embeddings.size());
  NegativeAssignment out;
  out.negatives.resize(m);
  out.source_class.resize(m);
  for (int i = 0; i < m; ++i) {
    if (predictions[i] != labels[i]) {
      assign_row(out, i, centers, predictions[i]);
    } else {
      synthesize_row(out, i, embeddings[i], labels[i], centers);
    }
  }
  return out;
}

}  // namespace tc3l
