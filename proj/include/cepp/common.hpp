#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace cepp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// State layout is fixed: susceptible level first, then strain blocks in
/// declaration order.
using ModelState = Eigen::VectorXd;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Structurally invalid input (bad matrix, bad model file, bad parameter).
struct InvalidArgument : Error {
  using Error::Error;
};

/// Valid object evaluated outside its mathematical domain.
struct DomainError : Error {
  using Error::Error;
};

/// Iterative scheme failed to meet its tolerance within the iteration cap.
struct ConvergenceError : Error {
  using Error::Error;
};

/// Deterministic counter-based generator: the value of draw k depends only on
/// (seed, stream, k), so parallel workers can consume disjoint index ranges
/// and still reproduce a serial scan bit for bit.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t bits_at(std::uint64_t counter) const {
    return mix(mix(mix(seed_) ^ stream_) ^ counter);
  }

  /// Uniform in (0,1); never returns exactly 0 or 1.
  double uniform_at(std::uint64_t counter) const {
    const std::uint64_t b = bits_at(counter) >> 11;  // 53 bits
    return (static_cast<double>(b) + 0.5) * (1.0 / 9007199254740992.0);
  }

  std::uint64_t next_bits() { return bits_at(counter_++); }
  double uniform() { return uniform_at(counter_++); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double exponential() { return -std::log(uniform()); }
  std::uint64_t uniform_index(std::uint64_t n) { return next_bits() % n; }

  CounterRng split(std::uint64_t substream) const {
    return CounterRng(seed_, mix(stream_ ^ substream));
  }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

/// Parses "p/q" rational strings and plain decimals; model files accept both.
double parse_number_string(const std::string& text);

/// Worker count for parallel sweeps/scans: min(hardware, CEPP_THREADS).
int worker_count();

}  // namespace cepp
