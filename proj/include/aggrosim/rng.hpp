#ifndef AGGROSIM_RNG_HPP
#define AGGROSIM_RNG_HPP

#include <cstdint>
#include <random>

namespace aggrosim {

/** Deterministic uniform generator used by every randomized verify suite.
 * mt19937_64 output is pinned by the standard, and the uniform mapping below
 * avoids std::uniform_real_distribution (whose rounding is
 * implementation-defined), so failing seeds replay identically everywhere. */
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform(double lo, double hi) {
        double u = (eng_() >> 11) * 0x1.0p-53;  // [0,1)
        return lo + (hi - lo) * u;
    }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(eng_() % static_cast<std::uint64_t>(hi - lo + 1));
    }

  private:
    std::mt19937_64 eng_;
};

}  // namespace aggrosim

#endif
