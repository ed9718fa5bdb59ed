// SPDX-License-Identifier: Apache-2.0
//
// mimofb - link-level simulator for limited-feedback multiuser MIMO downlinks
// Copyright (C) 2026 mimofb contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef mimofb_rng_H
#define mimofb_rng_H

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace mimofb {

// Derives a child seed from a base seed and a list of stream/index ids.
// Equal inputs always give equal outputs, so every trial of a Monte Carlo
// run can own an independent, reproducible generator no matter how the
// trials are scheduled across threads.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> ids);

// Deterministic random source. The uniform/normal transforms are implemented
// here (rather than taken from <random> distributions) so that a given seed
// produces the same stream on every standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t raw() { return engine_(); }

    // Uniform double in [0, 1).
    double uniform();

    // Uniform double in [lo, hi).
    double uniform(double lo, double hi);

    // Standard normal via the Marsaglia polar method.
    double normal();

    // Circularly-symmetric complex normal with unit variance
    // (variance 1/2 per real and imaginary component).
    std::complex<double> cnormal();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace mimofb

#endif
