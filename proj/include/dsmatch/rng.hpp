#ifndef DSMATCH_RNG_HPP
#define DSMATCH_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace dsmatch {

// splitmix64 step, used to spread user seeds and derive per-trial streams.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic random source. All sampling goes through explicit
// transforms (no std::*_distribution) so that a seed reproduces the same
// stream on every platform we build on.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

    std::uint64_t bits() { return eng_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // Uniform in (0, 1]; safe as a log argument.
    double uniform01_open_left() { return 1.0 - uniform01(); }

    // Standard normal via Box-Muller; the paired sample is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u = uniform01_open_left();
        double v = uniform01();
        double r = std::sqrt(-2.0 * std::log(u));
        double a = 6.283185307179586476925286766559 * v;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    // Uniform integer in [0, m).
    std::uint64_t below(std::uint64_t m) {
        // Multiply-shift rejection-free mapping; bias is < 2^-64, fine here.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(eng_()) * m) >> 64);
    }

    // Independent stream derived from a master seed and a trial index.
    // Trials can be run in any order and still see identical randomness.
    static Rng stream(std::uint64_t master_seed, std::uint64_t index) {
        return Rng(splitmix64(master_seed) ^ splitmix64(index + 0x51ed270b7f2390c5ULL));
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace dsmatch

#endif
