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

#ifndef mimofb_bounds_H
#define mimofb_bounds_H

#include "mimofb/channel.hpp"
#include "mimofb/rng.hpp"

namespace mimofb {

// Normalized array gain pattern sin(M*pi*x) / (M*sin(pi*x)). At integer x the
// removable singularity evaluates to +/-1 with sign (-1)^(x*(M-1)).
double upsilon(double x, int m);

// Lower bound on the squared correlation between the array responses at a
// direction and at its quantized image when the sine of the angle is
// quantized with `bits` bits over a range of width `range` (so the sine error
// is at most range * 2^-bits). Derived from a second-order expansion of the
// pattern, clamped to [0, 1]. For a UPA the bound is the product of the
// horizontal and vertical factors.
//
// `taylor_valid` reports whether the expansion really lower-bounds the exact
// pattern over the whole quantization error range (checked on a dense grid);
// for coarse quantizers the quadratic term can overshoot.
struct KSquaredBound {
    double bound = 0.0;        // lower bound on |correlation|^2
    double beta = 1.0;         // 1 - bound
    bool taylor_valid = false;
};
KSquaredBound k_squared_bound(const ArrayGeometry& geom, double range, int bits);

// Expected chordal quantization error bound for a basis-aligned codebook of
// 2^bits words over `paths` dimensions when the basis itself is off by a
// mismatch factor beta: beta + (1 - beta) * 2^(-bits/(paths-1)).
// beta = 0 recovers the perfect-basis codebook bound.
double quantization_error_bound(double bits, int paths, double beta);

// Feedback bits needed to keep the per-user rate gap below log2(b) as the
// downlink SNR (dB) grows: (paths-1)/3 * snr_db + (paths-1) * log2((users-1) * alpha / (b-1)).
double required_feedback_bits(int paths, double snr_db, int users, double alpha, double b);

// Per-user rate gap bound for quantized feedback:
// log2(1 + (users-1) * (gamma/users) * mean_h2 * alpha * (2^(-bits/(paths-1)) + beta * (1 - 2^(-bits/(paths-1))))).
double rate_gap_quantized_bound(int users, double gamma, double mean_h2, double alpha,
                                double bits, int paths, double beta);

// Per-user rate gap bound for analog feedback over an uplink at SNR gamma_ul
// with mu channel uses per path gain:
// log2(1 + (users-1) * (gamma/users) / (1 + mu * gamma_ul)).
double rate_gap_analog_bound(int users, double gamma, double mu, double gamma_ul);

// Quantized-feedback gap bound at the bit budget that matches the analog
// scheme's uplink usage (bits = mu * paths * log2(1 + gamma_ul)):
// log2(1 + gamma * paths/(paths-1) * (1 + gamma_ul)^(-mu * paths/(paths-1))).
double rate_gap_quantized_budget_bound(double gamma, int paths, double mu, double gamma_ul);

// Monte Carlo estimate of E[|t^H u|^2] for independent isotropic unit vectors
// t, u drawn in the orthogonal complement of a random unit vector in C^paths.
// The exact value is 1/(paths-1); paths = 2 gives exactly 1.
double cross_leakage_mc(int paths, int trials, Rng& rng);

} // namespace mimofb

#endif
