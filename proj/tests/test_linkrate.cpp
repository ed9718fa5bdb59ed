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

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>

#include "mimofb/linkrate.hpp"

using namespace mimofb;
using cd = std::complex<double>;

TEST_SUITE_BEGIN("linkrate");

namespace {

// Reference rate computation with explicit loops.
Eigen::VectorXd rates_reference(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& V, double gamma) {
    const int users = int(H.cols());
    Eigen::VectorXd out(users);
    for (int u = 0; u < users; ++u) {
        double sig = 0, intf = 0;
        for (int i = 0; i < users; ++i) {
            cd ip(0, 0);
            for (int m = 0; m < H.rows(); ++m) ip += std::conj(H(m, u)) * V(m, i);
            if (i == u)
                sig = std::norm(ip);
            else
                intf += std::norm(ip);
        }
        double sinr = (gamma / users) * sig / (1.0 + (gamma / users) * intf);
        out(u) = std::log2(1.0 + sinr);
    }
    return out;
}

} // namespace

TEST_CASE("zero-forcing on orthonormal channels returns them unchanged") {
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(6, 3);
    h(0, 0) = 1;
    h(2, 1) = 1;
    h(5, 2) = 1;
    auto v = zf_precoder(h);
    CHECK((v - h).norm() < 1e-12);
}

TEST_CASE("zero-forcing nulls cross links and normalizes columns") {
    Rng rng(70);
    for (int rep = 0; rep < 10; ++rep) {
        Eigen::MatrixXcd h(16, 4);
        for (int i = 0; i < h.size(); ++i) h(i / 4, i % 4) = rng.cnormal();
        auto v = zf_precoder(h);
        Eigen::MatrixXcd cross = h.adjoint() * v;
        for (int u = 0; u < 4; ++u) {
            CHECK(std::abs(v.col(u).norm() - 1.0) < 1e-12);
            for (int i = 0; i < 4; ++i)
                if (i != u) CHECK(std::abs(cross(u, i)) < 1e-10);
        }
    }
}

TEST_CASE("zero-forcing rejects rank-deficient feedback") {
    Eigen::MatrixXcd h(8, 3);
    Rng rng(71);
    for (int m = 0; m < 8; ++m) {
        h(m, 0) = rng.cnormal();
        h(m, 1) = rng.cnormal();
    }
    h.col(2) = h.col(0); // duplicated user direction
    CHECK_THROWS_AS(zf_precoder(h), std::domain_error);
}

TEST_CASE("rates on decoupled unit channels are exactly one bit") {
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Identity(2, 2);
    auto rs = evaluate_rates(h, h, 2.0);
    CHECK(rs.per_user(0) == 1.0);
    CHECK(rs.per_user(1) == 1.0);
    CHECK(rs.mean == 1.0);
}

TEST_CASE("rates match the explicit loop reference") {
    Rng rng(72);
    for (int rep = 0; rep < 20; ++rep) {
        int m = 8, users = 3;
        Eigen::MatrixXcd h(m, users), v(m, users);
        for (int u = 0; u < users; ++u) {
            for (int k = 0; k < m; ++k) {
                h(k, u) = 2.0 * rng.cnormal();
                v(k, u) = rng.cnormal();
            }
            v.col(u) /= v.col(u).norm();
        }
        double gamma = 0.5 + 20.0 * rng.uniform();
        auto got = evaluate_rates(h, v, gamma);
        auto want = rates_reference(h, v, gamma);
        CHECK((got.per_user - want).norm() < 1e-10);
        CHECK(got.mean == doctest::Approx(want.mean()).epsilon(1e-12));
    }
}

TEST_CASE("analog feedback implements the linear mmse estimator") {
    Rng rng(73);
    const double mu = 0.8, gul = 5.0;
    const int trials = 40000, paths = 4;
    double err2 = 0;
    cd orth(0, 0);
    double predicted = 0;
    for (int t = 0; t < trials; ++t) {
        auto g = draw_gains(paths, rng);
        auto out = analog_feedback(g, mu, gul, rng);
        predicted = out.error_variance;
        CHECK(out.mu == mu);
        CHECK(out.gamma_ul == gul);
        Eigen::VectorXcd e = g - out.gain_estimate;
        err2 += e.squaredNorm() / paths;
        orth += (e.adjoint() * out.gain_estimate)(0, 0) / double(paths);
    }
    CHECK(predicted == doctest::Approx(1.0 / (1.0 + mu * gul)).epsilon(1e-12));
    double mean_err = err2 / trials;
    // 3-sigma band around the closed-form error variance.
    CHECK(std::abs(mean_err - predicted) < 3.0 * predicted / std::sqrt(double(trials)));
    // MMSE orthogonality: error uncorrelated with the estimate.
    CHECK(std::abs(orth / double(trials)) < 3.0 / std::sqrt(double(trials)));
}

TEST_CASE("quantized trial replays: a codebook containing the channel is lossless") {
    // Replay the trial's channel substream to learn the gains, hand the
    // trial an inner codebook whose first words are exactly those gain
    // directions, and the reconstruction becomes exact.
    QuantizedTrialConfig cfg;
    cfg.geometry = {ArrayKind::Ula, 32, 1, 0.5};
    cfg.users = 2;
    cfg.paths = 3;
    cfg.gamma = 8.0;
    cfg.bits = 1;

    const std::uint64_t seed = 777;
    Rng probe(seed);
    Rng channel_replay(probe.raw());
    Codebook inner;
    inner.bits = 1;
    inner.kind = CodebookKind::Rvq;
    inner.vectors = Eigen::MatrixXcd(3, 2);
    for (int u = 0; u < 2; ++u) {
        PathSet ps = draw_path_set(cfg.geometry, 3, default_separation_floor(cfg.geometry),
                                   channel_replay);
        inner.vectors.col(u) = ps.gain / ps.gain.norm();
    }
    cfg.inner_shared = &inner;

    Rng rng(seed);
    auto res = run_quantized_trial(cfg, rng);
    REQUIRE(!res.discarded);
    CHECK(res.mean_chordal_error < 1e-12);
    CHECK((res.quantized.per_user - res.ideal.per_user).norm() < 1e-9);
}

TEST_CASE("a huge codebook closes the gap to ideal") {
    QuantizedTrialConfig cfg;
    cfg.geometry = {ArrayKind::Ula, 32, 1, 0.5};
    cfg.users = 4;
    cfg.paths = 2;
    cfg.bits = 16;
    cfg.gamma = 4.0 * 10.0 / 2.0; // receiver SNR 10 dB
    Rng rng(74);
    double gap_sum = 0;
    double gap_sq = 0;
    const int trials = 5;
    for (int t = 0; t < trials; ++t) {
        auto res = run_quantized_trial(cfg, rng);
        REQUIRE(!res.discarded);
        const double g = res.ideal.mean - res.quantized.mean;
        gap_sum += g;
        gap_sq += g * g;
    }
    const double gap_mean = gap_sum / trials;
    const double gap_var = std::max(0.0, gap_sq / trials - gap_mean * gap_mean);
    const double gap_se = std::sqrt(gap_var / trials);
    CHECK(gap_mean < 0.05);
    // Feedback never helps beyond perfect knowledge in expectation. Zero-forcing
    // is not sum-rate optimal per realization, so the sample mean may dip a hair
    // below zero; allow standard Monte Carlo slack around the expectation.
    CHECK(gap_mean > -3.0 * gap_se - 1e-9);
}

TEST_CASE("analog trial approaches ideal with unbounded uplink resources") {
    AnalogTrialConfig cfg;
    cfg.geometry = {ArrayKind::Ula, 32, 1, 0.5};
    cfg.users = 4;
    cfg.paths = 4;
    cfg.gamma = 10.0;
    cfg.mu = 1.0;
    cfg.gamma_ul = 1e9;
    Rng rng(75);
    for (int t = 0; t < 5; ++t) {
        auto res = run_analog_trial(cfg, rng);
        REQUIRE(!res.discarded);
        CHECK(res.ideal.mean - res.analog.mean < 0.01);
    }
}

TEST_CASE("feedback quality orders the schemes on average") {
    const std::uint64_t seed = 909;
    QuantizedTrialConfig qc;
    qc.geometry = {ArrayKind::Ula, 32, 1, 0.5};
    qc.gamma = 10.0;
    qc.bits = 6;
    AnalogTrialConfig ac;
    ac.geometry = qc.geometry;
    ac.gamma = 10.0;
    ac.mu = 0.5;
    ac.gamma_ul = 3.0;

    const int trials = 300;
    double dq_sum = 0, dq_sum2 = 0, da_sum = 0, da_sum2 = 0;
    for (int t = 0; t < trials; ++t) {
        Rng r1(derive_seed(seed, {std::uint64_t(t)}));
        auto q = run_quantized_trial(qc, r1);
        Rng r2(derive_seed(seed, {std::uint64_t(t)}));
        auto a = run_analog_trial(ac, r2);
        REQUIRE(!q.discarded);
        REQUIRE(!a.discarded);
        // Equal trial seeds share the channel realization across schemes.
        CHECK(std::abs(q.ideal.mean - a.ideal.mean) < 1e-12);
        double dq = q.ideal.mean - q.quantized.mean;
        double da = a.ideal.mean - a.analog.mean;
        dq_sum += dq;
        dq_sum2 += dq * dq;
        da_sum += da;
        da_sum2 += da * da;
    }
    auto mean_se = [&](double s, double s2) {
        double mean = s / trials;
        return std::pair{mean, std::sqrt(std::max(0.0, s2 / trials - mean * mean) / trials)};
    };
    auto [dq_mean, dq_se] = mean_se(dq_sum, dq_sum2);
    auto [da_mean, da_se] = mean_se(da_sum, da_sum2);
    CHECK(dq_mean > -3 * dq_se); // ideal beats quantized
    CHECK(da_mean > -3 * da_se); // ideal beats analog
}

TEST_CASE("more feedback bits never lower the mean rate") {
    QuantizedTrialConfig cfg;
    cfg.geometry = {ArrayKind::Ula, 32, 1, 0.5};
    cfg.gamma = 10.0;
    const int trials = 400;
    double prev_mean = -1e9, prev_se = 0;
    for (int bits : {2, 4, 6}) {
        cfg.bits = bits;
        double s = 0, s2 = 0;
        for (int t = 0; t < trials; ++t) {
            // Same per-trial seeds across bit levels: nested inner draws make
            // the comparison pathwise.
            Rng rng(derive_seed(4242, {std::uint64_t(t)}));
            auto res = run_quantized_trial(cfg, rng);
            REQUIRE(!res.discarded);
            s += res.quantized.mean;
            s2 += res.quantized.mean * res.quantized.mean;
        }
        double mean = s / trials;
        double se = std::sqrt(std::max(0.0, s2 / trials - mean * mean) / trials);
        CHECK(mean > prev_mean - 3 * std::sqrt(se * se + prev_se * prev_se));
        prev_mean = mean;
        prev_se = se;
    }
}

TEST_CASE("co-located users bound the interference leakage ratio") {
    // All users share one set of departure directions. The mean cross-link
    // leakage per unit of quantization error is then at most 1/(paths-1),
    // up to a finite-aperture allowance.
    ArrayGeometry geom{ArrayKind::Ula, 128, 1, 0.5};
    const int users = 4, paths = 4, bits = 6;
    Rng rng(76);
    double leak_sum = 0, err_sum = 0;
    int used = 0;
    for (int t = 0; t < 4000; ++t) {
        PathSet shared = draw_path_set(geom, paths, default_separation_floor(geom), rng);
        auto basis = steering_matrix(geom, shared);
        Eigen::MatrixXcd h(geom.size(), users), hfb(geom.size(), users);
        SubspaceQuantizer fast(basis, isotropic_unit_vectors(paths, 1 << bits, rng));
        double trial_err = 0;
        for (int u = 0; u < users; ++u) {
            h.col(u) = synthesize_channel(basis, draw_gains(paths, rng));
            auto out = fast.quantize(h.col(u));
            hfb.col(u) = out.magnitude * fast.codeword(out.index);
            trial_err += out.chordal_error / users;
        }
        Eigen::MatrixXcd v;
        try {
            v = zf_precoder(hfb);
        } catch (const std::domain_error&) {
            continue; // co-located users can collide; skip those draws
        }
        double leak = 0;
        for (int u = 0; u < users; ++u) {
            Eigen::VectorXcd dir = h.col(u) / h.col(u).norm();
            for (int i = 0; i < users; ++i)
                if (i != u) leak += std::norm(cd((dir.adjoint() * v.col(i))(0, 0)));
        }
        leak_sum += leak / (users * (users - 1));
        err_sum += trial_err;
        ++used;
    }
    REQUIRE(used > 3500);
    double ratio = leak_sum / err_sum;
    CHECK(ratio <= (1.0 / (paths - 1)) * 1.15);
}

TEST_SUITE_END();
