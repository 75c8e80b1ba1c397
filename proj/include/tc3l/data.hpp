#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tc3l/model.hpp"
#include "tc3l/numeric.hpp"

namespace tc3l {

// synthetic imbalanced blob generator settings
struct DataConfig {
  int k_classes = 7;
  int d_in = 32;
  int n_total = 2800;
  // class mix; defaults are deliberately skewed (dominant class 40%,
  // smallest 3%) so minority behavior is exercised
  std::vector<double> proportions;
  double separation = 3.0;  // scale of the class-mean directions
  double noise_std = 1.0;   // within-class spread
  double jitter_std = 0.0;  // train-time augmentation
  std::uint64_t seed = 1;

  DataConfig();
  void validate() const;
};

struct Dataset {
  std::vector<std::vector<double>> features;
  std::vector<int> labels;
  std::vector<std::string> class_names;  // optional, for reports

  int size() const { return static_cast<int>(features.size()); }
  int dim() const { return features.empty() ? 0 : static_cast<int>(features[0].size()); }
  int num_classes() const;
  void validate() const;
};

// default display names: seven expression classes for k = 7,
// "class0".."class{K-1}" otherwise
std::vector<std::string> default_class_names(int k_classes);

// per-class counts from n_total x proportions by largest remainder
// (fractional-part ties keep the lowest class index)
std::vector<int> allocate_counts(int n_total, const std::vector<double>& proportions);

// class means = separation * random unit directions; samples = mean +
// N(0, noise_std) per coordinate; draw order: means (class-ascending,
// coordinate-ascending), then samples (class-ascending), then one
// shuffle of the assembled list.  A class allocated zero samples is an
// error.
Dataset gen_blobs(const DataConfig& config);

// header "f0,...,f{D-1},label"; features written with 17 significant
// digits so a save/load round trip is bit-exact
void save_csv(const Dataset& dataset, const std::string& path);

// strict parse: exact header, no ragged rows, numeric cells only;
// errors carry the 1-based file line number.  k_classes > 0 additionally
// bounds the labels; otherwise K is inferred as max label + 1.
Dataset load_csv(const std::string& path, int k_classes = -1);

// feature-space augmentation: adds N(0, jitter_std) noise, labels untouched
Batch jitter(const Batch& batch, double jitter_std, Rng& rng);

// seeded stratified split; per-class train count = round(fraction * n_k),
// clamped to [1, n_k]; a single-sample class goes to train with a warning
std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  Rng& rng,
                                  std::vector<std::string>* warnings = nullptr);

}  // namespace tc3l
