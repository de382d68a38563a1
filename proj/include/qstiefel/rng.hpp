#pragma once

#include <cstdint>
#include <random>

namespace qstiefel {

// Reproducible random stream. Identical (seed, stream) pairs reproduce
// identical draws. Not safe to share between threads; give each thread its
// own stream id instead.
class RngStream {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                      0x51ef1e1u};
    engine_.seed(seq);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

  double normal() { return normal_(engine_); }
  // Uniform on [0, 1).
  double uniform() { return std::generate_canonical<double, 53>(engine_); }
  // Uniform on (0, 1), safe for logarithms.
  double uniform_open() {
    double u;
    do {
      u = uniform();
    } while (u <= 0.0);
    return u;
  }
  double gamma(double shape) {
    std::gamma_distribution<double> g(shape, 1.0);
    return g(engine_);
  }
  double beta(double a, double b) {
    double x = gamma(a);
    double y = gamma(b);
    return x / (x + y);
  }

  // Independent child stream derived from this stream's identity.
  RngStream split(std::uint64_t child) const {
    return RngStream(seed_ ^ (0x9e3779b97f4a7c15ULL * (stream_ + 1)), child + 1);
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace qstiefel
