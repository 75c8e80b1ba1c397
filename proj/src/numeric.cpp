#include "tc3l/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace tc3l {

namespace {
// Largest double below 1 and smallest positive normal double: the open
// interval (0,1) that sigmoid maps finite inputs into.
const double kBelowOne = std::nextafter(1.0, 0.0);
const double kAboveZero = std::numeric_limits<double>::min();
}  // namespace

double sigmoid(double x) {
  double s;
  if (x >= 0.0) {
    s = 1.0 / (1.0 + std::exp(-x));
  } else {
    const double e = std::exp(x);
    s = e / (1.0 + e);
  }
  // exp saturation can round s onto a bound; pull it back inside (0,1)
  if (s >= 1.0) s = kBelowOne;
  if (s <= 0.0) s = kAboveZero;
  return s;
}

std::vector<double> softmax(const std::vector<double>& v) {
  TC3L_CHECK(v.size() >= 2, "softmax: need at least 2 entries");
  const double mx = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - mx);
    sum += out[i];
  }
  for (double& o : out) o /= sum;
  return out;
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Tensor3::Tensor3(int c, int r, int w) : channels(c), rows(r), cols(w) {
  TC3L_CHECK(c > 0 && r > 0 && w > 0, "Tensor3: dimensions must be positive");
  data.assign(static_cast<std::size_t>(c) * r * w, 0.0);
}

Tensor3::Tensor3(int c, int r, int w, std::vector<double> values)
    : channels(c), rows(r), cols(w), data(std::move(values)) {
  TC3L_CHECK(c > 0 && r > 0 && w > 0, "Tensor3: dimensions must be positive");
  TC3L_CHECK(data.size() == static_cast<std::size_t>(c) * r * w,
             "Tensor3: data length must equal channels*rows*cols");
  TC3L_CHECK(all_finite(data), "Tensor3: entries must be finite");
}

std::uint64_t Rng::next_below(std::uint64_t n) {
  TC3L_CHECK(n > 0, "Rng::next_below: n must be positive");
  // rejection sampling keeps the draw unbiased
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = next_u64();
  } while (x >= limit);
  return x % n;
}

double Rng::gaussian(double mean, double stddev) {
  TC3L_CHECK(stddev >= 0.0, "Rng::gaussian: stddev must be nonnegative");
  if (stddev == 0.0) return mean;
  // u1 in (0,1] so log() stays finite
  const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  const double u2 = next_double();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double z = r * std::cos(2.0 * M_PI * u2);
  return mean + stddev * z;
}

std::string format_g17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}

}  // namespace tc3l
