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

#ifndef mimofb_linkrate_H
#define mimofb_linkrate_H

#include <Eigen/Dense>

#include "mimofb/aod.hpp"
#include "mimofb/channel.hpp"
#include "mimofb/codebook.hpp"
#include "mimofb/rng.hpp"

namespace mimofb {

// Zero-forcing precoder for the stacked user channels (M x U): the columns
// of H (H^H H)^-1, each normalized to unit power. Throws std::domain_error
// when H^H H has condition number above 1e12 (rank-deficient feedback).
Eigen::MatrixXcd zf_precoder(const Eigen::MatrixXcd& h_fb);

struct RateSample {
    Eigen::VectorXd per_user;  // bits/s/Hz
    double mean = 0.0;
};

// Per-user rates log2(1 + SINR_u) under equal power split gamma/U and unit
// noise variance: SINR_u = (gamma/U) |h_u^H v_u|^2 / (1 + (gamma/U) * sum_{i!=u} |h_u^H v_i|^2).
RateSample evaluate_rates(const Eigen::MatrixXcd& channels, const Eigen::MatrixXcd& precoder,
                          double gamma);

// Unquantized uplink feedback of the path gains over mu channel uses per
// gain at uplink SNR gamma_ul: the receiver observes sqrt(mu * gamma_ul) * g + n
// and applies the linear MMSE estimator. Residual error variance per gain is
// 1 / (1 + mu * gamma_ul).
struct AnalogFeedbackOutcome {
    Eigen::VectorXcd gain_estimate;
    double error_variance = 0.0;
    double mu = 0.0;
    double gamma_ul = 0.0;
};
AnalogFeedbackOutcome analog_feedback(const Eigen::VectorXcd& gains, double mu, double gamma_ul,
                                      Rng& rng);

enum class CodebookScheme { SubspaceRvq, SubspaceLloyd, RvqFull, RotatedStatistics };
enum class AodKnowledge { Exact, Estimated };

// One downlink realization with codebook feedback. The generator is split
// deterministically into three substreams, consumed in a fixed order
// (channel, codebook, direction-estimation snapshots), so trials evaluated
// with equally-seeded generators but different schemes share their channel
// realization.
struct QuantizedTrialConfig {
    ArrayGeometry geometry{ArrayKind::Ula, 128, 1, 0.5};
    int users = 4;
    int paths = 4;
    double separation_floor = -1.0;  // < 0: default floor for the geometry
    double gamma = 1.0;              // total downlink SNR, noise variance 1
    CodebookScheme scheme = CodebookScheme::SubspaceRvq;
    int bits = 4;
    AodKnowledge aod = AodKnowledge::Exact;
    int snapshots = 200;             // covariance snapshots when estimating
    double grid_step = 1e-3;         // spectrum grid step when estimating
    int aod_bits = 0;                // > 0: quantize direction sines

    // Caller-owned codebooks shared across trials. `inner_shared` replaces
    // the per-trial inner draw (required for SubspaceLloyd), `full_shared`
    // replaces the full-dimension draw (required for RotatedStatistics).
    const Codebook* inner_shared = nullptr;
    const Codebook* full_shared = nullptr;
};

struct QuantizedTrialResult {
    RateSample ideal;      // zero-forcing on the true channels
    RateSample quantized;  // zero-forcing on the reconstructed channels
    double mean_chordal_error = 0.0;
    bool discarded = false;  // rank-deficient precoder on either side
};

QuantizedTrialResult run_quantized_trial(const QuantizedTrialConfig& config, Rng& rng);

// One downlink realization with analog gain feedback; directions are known
// at the transmitter. Substream order: channel, uplink noise.
struct AnalogTrialConfig {
    ArrayGeometry geometry{ArrayKind::Ula, 128, 1, 0.5};
    int users = 4;
    int paths = 4;
    double separation_floor = -1.0;
    double gamma = 1.0;
    double mu = 1.0;
    double gamma_ul = 1.0;
};

struct AnalogTrialResult {
    RateSample ideal;
    RateSample analog;
    bool discarded = false;
};

AnalogTrialResult run_analog_trial(const AnalogTrialConfig& config, Rng& rng);

} // namespace mimofb

#endif
