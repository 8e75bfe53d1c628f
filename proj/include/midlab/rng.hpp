#pragma once

#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

namespace midlab {

// Seed derivation. All randomness in the project flows from named streams
// derived from a single root seed, so runs are reproducible bit-for-bit.
inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t hash_mix(uint64_t seed, uint64_t v) {
  return splitmix64(seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

inline uint64_t hash_mix(uint64_t seed, std::string_view tag) {
  uint64_t h = seed;
  for (char c : tag) h = hash_mix(h, static_cast<uint64_t>(static_cast<unsigned char>(c)));
  return h;
}

// Deterministic random stream. mt19937_64 output is fixed by the standard;
// uniform/normal conversions are implemented here rather than with
// std::*_distribution, whose output is implementation-defined.
class RngStream {
 public:
  explicit RngStream(uint64_t seed) : eng_(seed) {}

  static RngStream derive(uint64_t root, std::string_view purpose, uint64_t index = 0) {
    return RngStream(hash_mix(hash_mix(root, purpose), index));
  }

  uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the sine counterpart is discarded so the
  // stream position is a fixed function of the number of calls.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Uniform integer in [0, n). Modulo bias is negligible for the small n used here.
  uint64_t uniform_int(uint64_t n) { return next_u64() % n; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::string save_state() const {
    std::ostringstream os;
    os << eng_;
    return os.str();
  }

  void load_state(const std::string& s) {
    std::istringstream is(s);
    is >> eng_;
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace midlab
