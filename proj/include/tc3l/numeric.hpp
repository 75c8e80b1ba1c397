#ifndef TC3L_NUMERIC_HPP_
#define TC3L_NUMERIC_HPP_

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace tc3l {

// Shape/argument violations throw; message names the offending quantity.
#define TC3L_CHECK(cond, msg)                          \
  do {                                                 \
    if (!(cond)) throw std::invalid_argument(msg);     \
  } while (0)

/// Logistic function, numerically stable for any finite x.
/// The result is kept strictly inside (0,1) even where exp() saturates,
/// so sums of sigmoids never reach their open bounds exactly.
double sigmoid(double x);

/// d/dx sigmoid(x) expressed through the already-computed output s.
inline double sigmoid_grad_from_output(double s) { return s * (1.0 - s); }

/// Max-subtraction stabilized softmax; entries positive, sum == 1 within
/// rounding, invariant under adding a constant to all inputs.
std::vector<double> softmax(const std::vector<double>& v);

bool all_finite(const std::vector<double>& v);

/// Dense channels x rows x cols tensor, row-major within a channel,
/// channels outermost. Constructors reject non-finite entries.
struct Tensor3 {
  int channels = 0;
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(int c, int r, int w);
  Tensor3(int c, int r, int w, std::vector<double> values);

  int size() const { return channels * rows * cols; }
  int plane() const { return rows * cols; }

  double& at(int c, int r, int w) { return data[(c * rows + r) * cols + w]; }
  double at(int c, int r, int w) const { return data[(c * rows + r) * cols + w]; }

  // position index p in [0, rows*cols)
  double& at_pos(int c, int p) { return data[c * rows * cols + p]; }
  double at_pos(int c, int p) const { return data[c * rows * cols + p]; }
};

/// Seeded counter-based generator (splitmix64 core). One instance owns one
/// stream; split() derives an independent child stream deterministically.
/// Identical seeds give identical draw sequences across runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t next_below(std::uint64_t n);

  /// Box-Muller draw; std == 0 returns mean exactly. Consumes two uniforms.
  double gaussian(double mean, double stddev);

  /// Independent child stream keyed off the next counter output.
  Rng split() { return Rng(next_u64()); }

 private:
  std::uint64_t state_;
};

/// Seeded in-place Fisher-Yates shuffle.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(v[i - 1], v[j]);
  }
}

/// %.17g formatting: lossless decimal round trip for doubles.
std::string format_g17(double x);

}  // namespace tc3l

#endif  // TC3L_NUMERIC_HPP_
