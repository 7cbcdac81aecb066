#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace termgen {

// Seeded generator whose outputs are identical across standard libraries.
// std::mt19937_64 is fully specified; the std distributions are not, so the
// range reductions below are done by hand.
class PortableRng {
 public:
  explicit PortableRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform integer in [0, bound) by rejection sampling.
  std::uint64_t below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  // Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // Uniform double in (0, 1).
  double unit_open() {
    std::uint64_t bits;
    do {
      bits = engine_() >> 11;
    } while (bits == 0);
    return static_cast<double>(bits) * 0x1.0p-53;
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = below(i);
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace termgen
