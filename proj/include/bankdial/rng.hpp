#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace bankdial {

// Deterministic counter-free RNG (splitmix64). Every dialogue gets its own
// stream derived from (master_seed, domain, index) so generation order and
// threading cannot change the output.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : state_(seed) {}

  static uint64_t derive(uint64_t master, std::string_view domain, uint64_t index);

  uint64_t next_u64();

  // uniform in [0, 1)
  double next_double();

  // inclusive bounds
  int uniform_int(int lo, int hi);

  bool bernoulli(double p) { return next_double() < p; }

  template <typename T>
  const T& pick(const std::vector<T>& xs) {
    return xs[static_cast<size_t>(uniform_int(0, static_cast<int>(xs.size()) - 1))];
  }

  // Fisher-Yates, stable across platforms (std::shuffle is not).
  template <typename T>
  void shuffle(std::vector<T>& xs) {
    for (size_t i = xs.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(0, static_cast<int>(i) - 1));
      std::swap(xs[i - 1], xs[j]);
    }
  }

 private:
  uint64_t state_;
};

}  // namespace bankdial
