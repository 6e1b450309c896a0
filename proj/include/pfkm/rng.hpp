#ifndef PFKM_RNG_HPP
#define PFKM_RNG_HPP

#include <cstdint>
#include <vector>

namespace pfkm {

// Small deterministic generator (splitmix64). We avoid <random> distributions
// because their output is implementation-defined; reports and experiment CSVs
// must be reproducible from a seed alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, bound)
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    std::uint64_t threshold = (0ULL - bound) % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  int next_int(int lo, int hi) {  // inclusive range
    return lo + static_cast<int>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
  }

  // uniform in [0, 1)
  double next_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_real(double lo, double hi) { return lo + (hi - lo) * next_real(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derive an independent stream; used to fan a master seed out to stages.
  Rng fork(std::uint64_t stream) const {
    Rng child(state_ ^ (0xd2b74407b1ce6e93ULL * (stream + 1)));
    child.next_u64();
    return child;
  }

 private:
  std::uint64_t state_;
};

}  // namespace pfkm

#endif  // PFKM_RNG_HPP
