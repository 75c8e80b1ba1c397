#include "tc3l/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

namespace tc3l {

namespace {

[[noreturn]] void csv_error(const std::string& path, int line,
                            const std::string& what) {
  throw std::invalid_argument("load_csv: " + path + ": line " +
                              std::to_string(line) + ": " + what);
}

double parse_cell(const std::string& cell, const std::string& path, int line) {
  if (cell.empty()) csv_error(path, line, "empty cell");
  const char* begin = cell.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end != begin + cell.size())
    csv_error(path, line, "non-numeric cell '" + cell + "'");
  if (!std::isfinite(v)) csv_error(path, line, "non-finite cell '" + cell + "'");
  return v;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

}  // namespace

DataConfig::DataConfig()
    : proportions{0.12, 0.03, 0.05, 0.40, 0.12, 0.08, 0.20} {}

void DataConfig::validate() const {
  TC3L_CHECK(k_classes >= 2, "data: k_classes must be >= 2");
  TC3L_CHECK(d_in >= 1, "data: d_in must be >= 1");
  TC3L_CHECK(n_total >= k_classes, "data: n_total must cover every class");
  TC3L_CHECK(static_cast<int>(proportions.size()) == k_classes,
             "data: proportions length must equal k_classes");
  double sum = 0.0;
  for (double p : proportions) {
    TC3L_CHECK(p >= 0.0, "data: proportions must be nonnegative");
    sum += p;
  }
  TC3L_CHECK(std::abs(sum - 1.0) <= 1e-9, "data: proportions must sum to 1");
  TC3L_CHECK(separation > 0.0, "data: separation must be positive");
  TC3L_CHECK(noise_std >= 0.0, "data: noise_std must be nonnegative");
  TC3L_CHECK(jitter_std >= 0.0, "data: jitter_std must be nonnegative");
}

int Dataset::num_classes() const {
  int k = 0;
  for (int label : labels) k = std::max(k, label + 1);
  return k;
}

void Dataset::validate() const {
  TC3L_CHECK(!features.empty(), "dataset: empty");
  TC3L_CHECK(features.size() == labels.size(), "dataset: features/labels mismatch");
  const std::size_t d = features[0].size();
  for (std::size_t i = 0; i < features.size(); ++i) {
    TC3L_CHECK(features[i].size() == d, "dataset: ragged features");
    TC3L_CHECK(labels[i] >= 0, "dataset: negative label");
    TC3L_CHECK(all_finite(features[i]), "dataset: non-finite feature");
  }
}

std::vector<std::string> default_class_names(int k_classes) {
  if (k_classes == 7)
    return {"Surprise", "Fear", "Disgust", "Happiness",
            "Sadness", "Anger", "Neutral"};
  std::vector<std::string> names;
  names.reserve(k_classes);
  for (int k = 0; k < k_classes; ++k) names.push_back("class" + std::to_string(k));
  return names;
}

std::vector<int> allocate_counts(int n_total,
                                 const std::vector<double>& proportions) {
  const int k = static_cast<int>(proportions.size());
  TC3L_CHECK(k >= 1 && n_total >= 0, "allocate_counts: bad arguments");
  std::vector<int> counts(k, 0);
  std::vector<double> fracs(k, 0.0);
  int assigned = 0;
  for (int c = 0; c < k; ++c) {
    const double exact = n_total * proportions[c];
    counts[c] = static_cast<int>(std::floor(exact));
    fracs[c] = exact - counts[c];
    assigned += counts[c];
  }
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return fracs[a] > fracs[b]; });
  for (int r = 0; r < n_total - assigned; ++r) ++counts[order[r]];
  return counts;
}

Dataset gen_blobs(const DataConfig& config) {
  config.validate();
  const std::vector<int> counts = allocate_counts(config.n_total, config.proportions);
  for (int c = 0; c < config.k_classes; ++c)
    TC3L_CHECK(counts[c] > 0, "gen_blobs: class " + std::to_string(c) +
                                  " allocated zero samples; raise n_total or "
                                  "its proportion");
  Rng rng(config.seed);
  // class means: separation-scaled random unit directions
  std::vector<std::vector<double>> means(config.k_classes,
                                         std::vector<double>(config.d_in, 0.0));
  for (int c = 0; c < config.k_classes; ++c) {
    double norm = 0.0;
    while (norm < 1e-12) {
      for (int j = 0; j < config.d_in; ++j) means[c][j] = rng.gaussian(0.0, 1.0);
      norm = 0.0;
      for (int j = 0; j < config.d_in; ++j) norm += means[c][j] * means[c][j];
      norm = std::sqrt(norm);
    }
    for (int j = 0; j < config.d_in; ++j)
      means[c][j] *= config.separation / norm;
  }
  Dataset ds;
  ds.features.reserve(config.n_total);
  ds.labels.reserve(config.n_total);
  for (int c = 0; c < config.k_classes; ++c) {
    for (int s = 0; s < counts[c]; ++s) {
      std::vector<double> x(config.d_in);
      for (int j = 0; j < config.d_in; ++j)
        x[j] = means[c][j] + rng.gaussian(0.0, config.noise_std);
      ds.features.push_back(std::move(x));
      ds.labels.push_back(c);
    }
  }
  // one seeded shuffle of the assembled list
  std::vector<int> order(config.n_total);
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, rng);
  Dataset out;
  out.features.reserve(config.n_total);
  out.labels.reserve(config.n_total);
  for (int idx : order) {
    out.features.push_back(std::move(ds.features[idx]));
    out.labels.push_back(ds.labels[idx]);
  }
  out.class_names = default_class_names(config.k_classes);
  out.validate();
  return out;
}

void save_csv(const Dataset& dataset, const std::string& path) {
  dataset.validate();
  std::ofstream out(path);
  TC3L_CHECK(out.good(), "save_csv: cannot open " + path);
  const int d = dataset.dim();
  for (int j = 0; j < d; ++j) out << "f" << j << ",";
  out << "label\n";
  for (int i = 0; i < dataset.size(); ++i) {
    for (int j = 0; j < d; ++j) out << format_g17(dataset.features[i][j]) << ",";
    out << dataset.labels[i] << "\n";
  }
  out.flush();
  TC3L_CHECK(out.good(), "save_csv: write failed for " + path);
}

Dataset load_csv(const std::string& path, int k_classes) {
  std::ifstream in(path);
  if (!in.good())
    throw std::invalid_argument("load_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument("load_csv: " + path + ": missing header");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_line(line);
  if (header.size() < 2 || header.back() != "label")
    csv_error(path, 1, "header must be f0,...,f{D-1},label");
  const int d = static_cast<int>(header.size()) - 1;
  for (int j = 0; j < d; ++j)
    if (header[j] != "f" + std::to_string(j))
      csv_error(path, 1, "unexpected header column '" + header[j] + "'");
  Dataset ds;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (static_cast<int>(cells.size()) != d + 1)
      csv_error(path, line_no, "expected " + std::to_string(d + 1) +
                                   " cells, found " + std::to_string(cells.size()));
    std::vector<double> x(d);
    for (int j = 0; j < d; ++j) x[j] = parse_cell(cells[j], path, line_no);
    const std::string& lc = cells[d];
    const char* begin = lc.c_str();
    char* end = nullptr;
    const long label = std::strtol(begin, &end, 10);
    if (lc.empty() || end != begin + lc.size())
      csv_error(path, line_no, "non-integer label '" + lc + "'");
    if (label < 0) csv_error(path, line_no, "negative label");
    if (k_classes > 0 && label >= k_classes)
      csv_error(path, line_no, "label " + std::to_string(label) +
                                   " out of range for " +
                                   std::to_string(k_classes) + " classes");
    ds.features.push_back(std::move(x));
    ds.labels.push_back(static_cast<int>(label));
  }
  if (ds.features.empty())
    throw std::invalid_argument("load_csv: " + path + ": no data rows");
  const int k = k_classes > 0 ? k_classes : ds.num_classes();
  ds.class_names = default_class_names(k);
  ds.validate();
  return ds;
}

Batch jitter(const Batch& batch, double jitter_std, Rng& rng) {
  TC3L_CHECK(jitter_std >= 0.0, "jitter: negative std");
  if (jitter_std == 0.0) return batch;
  Batch out = batch;
  for (std::size_t i = 0; i < out.inputs.size(); ++i)
    for (std::size_t j = 0; j < out.inputs[i].size(); ++j)
      out.inputs[i][j] += rng.gaussian(0.0, jitter_std);
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, double train_fraction,
                                  Rng& rng,
                                  std::vector<std::string>* warnings) {
  dataset.validate();
  TC3L_CHECK(train_fraction > 0.0 && train_fraction < 1.0,
             "split: train_fraction must lie in (0,1)");
  const int k = dataset.num_classes();
  std::vector<std::vector<int>> by_class(k);
  for (int i = 0; i < dataset.size(); ++i)
    by_class[dataset.labels[i]].push_back(i);
  Dataset train, test;
  train.class_names = dataset.class_names;
  test.class_names = dataset.class_names;
  for (int c = 0; c < k; ++c) {
    std::vector<int>& idx = by_class[c];
    if (idx.empty()) continue;
    shuffle(idx, rng);
    const int n = static_cast<int>(idx.size());
    int n_train = static_cast<int>(std::llround(train_fraction * n));
    if (n_train < 1) n_train = 1;
    if (n_train > n) n_train = n;
    if (n == 1 && warnings != nullptr)
      warnings->push_back("split: class " + std::to_string(c) +
                          " has a single sample; placed in train");
    for (int t = 0; t < n; ++t) {
      Dataset& part = t < n_train ? train : test;
      part.features.push_back(dataset.features[idx[t]]);
      part.labels.push_back(dataset.labels[idx[t]]);
    }
  }
  train.validate();
  TC3L_CHECK(!test.features.empty(),
             "split: test side is empty; lower train_fraction");
  test.validate();
  return {std::move(train), std::move(test)};
}

}  // namespace tc3l
