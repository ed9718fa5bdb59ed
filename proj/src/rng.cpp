// SPDX-License-Identifier: Apache-2.0
//
// Deterministic random number generation for simulation trials.
//
// All randomness in the library flows through the Rng wrapper so results are
// reproducible across platforms and across thread counts.  Substream seeds
// are derived with a splitmix64 chain, which decorrelates seeds produced
// from nearby identifiers.

#include "mimofb/rng.hpp"

#include <cmath>

namespace mimofb {

namespace {

// ------------------------------------------------------------------------
// splitmix64 finalizer.  Used only for seed derivation, not for sampling.
// ------------------------------------------------------------------------
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> ids) {
    // Chain the identifiers through the finalizer.  The order of the
    // identifiers matters, so {a, b} and {b, a} produce unrelated seeds.
    std::uint64_t state = mix64(base ^ 0x6d696d6f66620aULL);
    for (std::uint64_t id : ids) {
        state = mix64(state ^ mix64(id));
    }
    return state;
}

double Rng::uniform() {
    // 53 random mantissa bits mapped to [0, 1).
    return static_cast<double>(raw() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    // Marsaglia polar method.  Two output values per accepted pair; the
    // second is cached for the next call.
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
}

std::complex<double> Rng::cnormal() {
    // Unit-variance circularly symmetric complex Gaussian:
    // real and imaginary parts each carry variance 1/2.
    const double re = normal();
    const double im = normal();
    return std::complex<double>(re, im) * (1.0 / std::sqrt(2.0));
}

} // namespace mimofb
