#pragma once

#include <cmath>
#include <cstdint>

#include "sppl/distribution.hpp"

namespace sppl {

// Small deterministic generator (splitmix64). All randomness in the project
// flows through explicitly keyed substreams so runs are reproducible and
// per-sample work can be parallelised without shared state.
struct Rng {
  uint64_t state;

  explicit Rng(uint64_t seed) : state(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform on the open interval (0,1)
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) *
           (1.0 / 9007199254740992.0);
  }

  double draw(Dist d) {
    switch (d) {
      case Dist::Normal: {
        double u1 = uniform(), u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
      }
      case Dist::Exponential:
        return -std::log(uniform());
      case Dist::Logistic: {
        double u = uniform();
        return std::log(u / (1.0 - u));
      }
      case Dist::Cauchy:
        return std::tan(M_PI * (uniform() - 0.5));
    }
    return 0;
  }
};

inline Rng substream(uint64_t seed, uint64_t a, uint64_t b, uint64_t c = 0) {
  Rng r(seed ^ 0xd1b54a32d192ed03ULL);
  r.state ^= r.next_u64() + a;
  r.state ^= r.next_u64() + b;
  r.state ^= r.next_u64() + c;
  r.next_u64();
  return r;
}

}  // namespace sppl
