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
//
// Fast self-contained consistency checks for the CLI `verify` command.
// Each check measures a margin and reports it, pass or fail; the whole
// set runs in seconds so it can gate installs and container builds.

#include "mimofb/verify.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

#include "mimofb/aod.hpp"
#include "mimofb/bounds.hpp"
#include "mimofb/channel.hpp"
#include "mimofb/codebook.hpp"
#include "mimofb/linkrate.hpp"
#include "mimofb/rng.hpp"

namespace mimofb {

namespace {

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buffer[160];
    std::snprintf(buffer, sizeof buffer, pattern, a, b, c);
    return buffer;
}

// ---------------------------------------------------------------------
// Channel suite.

std::vector<VerifyCheck> verify_channel(std::uint64_t seed) {
    std::vector<VerifyCheck> checks;

    {
        // Steering vectors are unit norm for both array kinds.
        Rng rng(derive_seed(seed, {1, 1}));
        const ArrayGeometry line{ArrayKind::Ula, 64, 1, 0.5};
        const ArrayGeometry plane{ArrayKind::Upa, 8, 4, 0.5};
        double worst = 0.0;
        for (int i = 0; i < 200; ++i) {
            const double az = rng.uniform(-M_PI / 2, M_PI / 2);
            const double el = rng.uniform(-M_PI / 2, M_PI / 2);
            worst = std::max(worst, std::abs(steering_vector(line, az).norm() - 1.0));
            worst = std::max(worst, std::abs(steering_vector(plane, az, el).norm() - 1.0));
        }
        checks.push_back({"steering-unit-norm", worst < 1e-12,
                          fmt("max norm deviation %.2e (limit 1e-12)", worst)});
    }

    {
        // Path draws respect the separation floor in the sine domain.
        Rng rng(derive_seed(seed, {1, 2}));
        const ArrayGeometry geom{ArrayKind::Ula, 128, 1, 0.5};
        const double floor = default_separation_floor(geom);
        double closest = 1e300;
        for (int i = 0; i < 500; ++i) {
            const PathSet ps = draw_path_set(geom, 4, floor, rng);
            for (int a = 0; a < 4; ++a)
                for (int b = a + 1; b < 4; ++b)
                    closest = std::min(closest, std::abs(std::sin(ps.azimuth(a)) -
                                                         std::sin(ps.azimuth(b))));
        }
        checks.push_back({"path-separation-floor", closest >= floor,
                          fmt("min pairwise sine gap %.4f (floor %.4f)", closest, floor)});
    }

    {
        // Path gains have unit variance and channels have mean power P.
        Rng rng(derive_seed(seed, {1, 3}));
        const ArrayGeometry geom{ArrayKind::Ula, 64, 1, 0.5};
        const int paths = 4, trials = 4000;
        double power = 0.0;
        for (int i = 0; i < trials; ++i) {
            const PathSet ps = draw_path_set(geom, paths, default_separation_floor(geom), rng);
            power += synthesize_channel(steering_matrix(geom, ps), ps.gain).squaredNorm();
        }
        power /= trials;
        // Mean ||h||^2 = P exactly in expectation; 4000 trials put the
        // sample mean within a few percent.
        const double rel = std::abs(power - paths) / paths;
        checks.push_back({"channel-mean-power", rel < 0.10,
                          fmt("mean ||h||^2 %.3f vs %g (rel err %.3f)", power, double(paths),
                              rel)});
    }

    {
        // Steering cross-correlation at fixed directions decays with the
        // array size.
        auto peak = [](int m) {
            const ArrayGeometry geom{ArrayKind::Ula, m, 1, 0.5};
            PathSet ps;
            ps.azimuth.resize(3);
            ps.azimuth << std::asin(-0.55), std::asin(0.05), std::asin(0.62);
            ps.elevation = Eigen::VectorXd::Zero(3);
            ps.gain = Eigen::VectorXcd::Ones(3);
            const Eigen::MatrixXcd g = steering_matrix(geom, ps);
            const Eigen::MatrixXcd gram = g.adjoint() * g;
            double worst = 0.0;
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b)
                    if (a != b) worst = std::max(worst, std::abs(gram(a, b)));
            return worst;
        };
        const double at32 = peak(32), at256 = peak(256);
        checks.push_back({"steering-cross-decay", at256 < at32,
                          fmt("max |cross| %.3f at 32 antennas -> %.4f at 256", at32, at256)});
    }

    return checks;
}

// ---------------------------------------------------------------------
// Codebook suite.

std::vector<VerifyCheck> verify_codebook(std::uint64_t seed) {
    std::vector<VerifyCheck> checks;

    {
        // Aligned-codebook error stays below the closed-form bound.
        Rng rng(derive_seed(seed, {2, 1}));
        const ArrayGeometry geom{ArrayKind::Ula, 64, 1, 0.5};
        const int paths = 3, bits = 6, trials = 1000;
        double s = 0.0, s2 = 0.0;
        for (int t = 0; t < trials; ++t) {
            const PathSet ps = draw_path_set(geom, paths, default_separation_floor(geom), rng);
            const Eigen::MatrixXcd basis = steering_matrix(geom, ps);
            const Eigen::VectorXcd h = synthesize_channel(basis, ps.gain);
            const SubspaceQuantizer q(basis, isotropic_unit_vectors(paths, 1 << bits, rng));
            const double err = q.quantize(h).chordal_error;
            s += err;
            s2 += err * err;
        }
        const double mean = s / trials;
        const double se = std::sqrt(std::max(0.0, s2 / trials - mean * mean) / trials);
        const double bound = quantization_error_bound(bits, paths, 0.0);
        const double margin = bound + 3.0 * se - mean;
        checks.push_back({"aligned-error-bound", margin >= 0.0,
                          fmt("mean error %.4f vs bound %.4f (margin %.4f)", mean, bound,
                              margin)});
    }

    {
        // Draws are nested: a bigger draw from the same state starts with
        // the smaller draw.
        Rng a(derive_seed(seed, {2, 2}));
        Rng b(derive_seed(seed, {2, 2}));
        const Eigen::MatrixXcd small = isotropic_unit_vectors(4, 8, a);
        const Eigen::MatrixXcd big = isotropic_unit_vectors(4, 32, b);
        const double dev = (big.leftCols(8) - small).norm();
        checks.push_back({"nested-codebook-draws", dev == 0.0,
                          fmt("prefix deviation %.1e (want 0)", dev)});
    }

    {
        // The implicit subspace quantizer agrees with quantizing the
        // materialized codebook.
        Rng rng(derive_seed(seed, {2, 3}));
        const ArrayGeometry geom{ArrayKind::Ula, 32, 1, 0.5};
        const int paths = 4, bits = 5;
        bool agree = true;
        double worst = 0.0;
        for (int t = 0; t < 50 && agree; ++t) {
            const PathSet ps = draw_path_set(geom, paths, default_separation_floor(geom), rng);
            const Eigen::MatrixXcd basis = steering_matrix(geom, ps);
            const Eigen::VectorXcd h = synthesize_channel(basis, ps.gain);
            const Eigen::MatrixXcd inner = isotropic_unit_vectors(paths, 1 << bits, rng);
            Codebook inner_book;
            inner_book.vectors = inner;
            inner_book.bits = bits;
            const Codebook tall = build_subspace(basis, inner_book);
            const SubspaceQuantizer fast(basis, inner);
            const QuantizeOutcome via_tall = quantize(h, tall);
            const QuantizeOutcome via_fast = fast.quantize(h);
            agree = via_tall.index == via_fast.index;
            worst = std::max(worst, std::abs(via_tall.chordal_error - via_fast.chordal_error));
        }
        checks.push_back({"subspace-quantizer-consistency", agree && worst < 1e-10,
                          fmt("max error mismatch %.1e (limit 1e-10)", worst)});
    }

    {
        // Save/load round trip is exact in both formats.
        Rng rng(derive_seed(seed, {2, 4}));
        Codebook book = build_rvq(6, 4, rng);
        const char* base = std::getenv("TMPDIR");
        const std::string dir = base ? base : "/tmp";
        double worst = 0.0;
        for (CodebookFormat format : {CodebookFormat::Binary, CodebookFormat::Text}) {
            const std::string path = dir + (format == CodebookFormat::Binary
                                                ? "/mimofb_verify_book.bin"
                                                : "/mimofb_verify_book.txt");
            save_codebook(book, path, format);
            const Codebook back = load_codebook(path);
            worst = std::max(worst, (back.vectors - book.vectors).norm());
            std::remove(path.c_str());
        }
        checks.push_back({"codebook-save-load", worst == 0.0,
                          fmt("round-trip deviation %.1e (want 0)", worst)});
    }

    {
        // Training helps: the trained inner codebook quantizes held-out
        // samples at least as well as a random codebook of the same size.
        Rng rng(derive_seed(seed, {2, 5}));
        const int dim = 4, bits = 4;
        const Eigen::MatrixXcd training = isotropic_unit_vectors(dim, 2048, rng);
        const Eigen::MatrixXcd heldout = isotropic_unit_vectors(dim, 2048, rng);
        const Codebook random = build_rvq(dim, bits, rng);
        const Codebook trained = build_lloyd_inner(dim, bits, training, rng);
        const double trained_err = mean_chordal_distortion(heldout, trained);
        const double random_err = mean_chordal_distortion(heldout, random);
        checks.push_back({"trained-inner-gain", trained_err <= random_err,
                          fmt("held-out distortion %.4f trained vs %.4f random", trained_err,
                              random_err)});
    }

    return checks;
}

// ---------------------------------------------------------------------
// Bounds suite.

std::vector<VerifyCheck> verify_bounds(std::uint64_t seed) {
    std::vector<VerifyCheck> checks;

    {
        // Closed-form array pattern against the brute-force phase sum.
        Rng rng(derive_seed(seed, {3, 1}));
        double worst = 0.0;
        for (int rep = 0; rep < 100; ++rep) {
            const double x = rng.uniform(-3.0, 3.0);
            const int m = 2 + static_cast<int>(rng.uniform() * 128.0);
            std::complex<double> acc(0.0, 0.0);
            for (int k = 0; k < m; ++k) {
                const double phase = 2.0 * M_PI * (k - (m - 1) / 2.0) * x;
                acc += std::complex<double>(std::cos(phase), std::sin(phase));
            }
            worst = std::max(worst, std::abs(acc.real() / m - upsilon(x, m)));
        }
        checks.push_back({"pattern-closed-form", worst < 1e-10,
                          fmt("max deviation %.1e (limit 1e-10)", worst)});
    }

    {
        // Cross-leakage oracle: exact at two dimensions, 1/(P-1) beyond.
        Rng rng(derive_seed(seed, {3, 2}));
        const double two = cross_leakage_mc(2, 500, rng);
        const double four = cross_leakage_mc(4, 20000, rng);
        const double rel = std::abs(four - 1.0 / 3.0) * 3.0;
        checks.push_back({"leakage-oracle", two == 1.0 && rel < 0.05,
                          fmt("P=2 %.12f (want 1), P=4 rel err %.4f (limit 0.05)", two, rel)});
    }

    {
        // The quantized-feedback gap bound decreases in the bit budget and
        // matches its beta = 0 special case.
        bool monotone = true;
        double prev = 1e300;
        for (int bits = 0; bits <= 16; ++bits) {
            const double g = rate_gap_quantized_bound(4, 10.0, 4.0, 1.0 / 3.0, bits, 4, 0.0);
            if (g > prev + 1e-12) monotone = false;
            prev = g;
        }
        const double direct = quantization_error_bound(9.0, 4, 0.0);
        const double expect = std::pow(2.0, -3.0);
        const double dev = std::abs(direct - expect);
        checks.push_back({"gap-bound-shape", monotone && dev < 1e-12,
                          fmt("monotone %g, beta=0 case deviation %.1e", monotone ? 1.0 : 0.0,
                              dev)});
    }

    {
        // Budget-matched bounds cross as the uplink budget grows. Total
        // downlink SNR for a 10 dB operating point with 4 users and mean
        // channel power 4.
        const double gamma = 4.0 * std::pow(10.0, 10.0 / 10.0) / 4.0;
        const double bq_low = rate_gap_quantized_budget_bound(gamma, 4, 0.25, 5.0);
        const double ba_low = rate_gap_analog_bound(4, gamma, 0.25, 5.0);
        const double bq_high = rate_gap_quantized_budget_bound(gamma, 4, 1.5, 5.0);
        const double ba_high = rate_gap_analog_bound(4, gamma, 1.5, 5.0);
        const bool crossed = bq_low > ba_low && bq_high < ba_high;
        checks.push_back({"budget-bound-crossover", crossed,
                          fmt("low budget %.2f vs %.2f, high budget %.3f vs %.3f", bq_low, ba_low,
                              bq_high) +
                              fmt(" / %.3f", ba_high)});
    }

    {
        // Direction-quantization mismatch factor: finer sine quantizers
        // lose less beamforming gain.
        const ArrayGeometry geom{ArrayKind::Ula, 128, 1, 0.5};
        const KSquaredBound coarse = k_squared_bound(geom, 2.0, 6);
        const KSquaredBound fine = k_squared_bound(geom, 2.0, 10);
        const bool ordered = fine.bound >= coarse.bound && fine.bound <= 1.0 &&
                             coarse.bound >= 0.0;
        checks.push_back({"direction-mismatch-bound", ordered,
                          fmt("|k|^2 lower bound %.4f at 6 bits -> %.6f at 10 bits",
                              coarse.bound, fine.bound)});
    }

    return checks;
}

} // namespace

std::vector<VerifyCheck> verify_suite(const std::string& suite, std::uint64_t seed) {
    if (suite == "channel") return verify_channel(seed);
    if (suite == "codebook") return verify_codebook(seed);
    if (suite == "bounds") return verify_bounds(seed);
    if (suite == "all") {
        std::vector<VerifyCheck> all = verify_channel(seed);
        std::vector<VerifyCheck> books = verify_codebook(seed);
        std::vector<VerifyCheck> bounds = verify_bounds(seed);
        all.insert(all.end(), books.begin(), books.end());
        all.insert(all.end(), bounds.begin(), bounds.end());
        return all;
    }
    throw std::invalid_argument("unknown verify suite: " + suite +
                                " (expected channel, codebook, bounds, or all)");
}

} // namespace mimofb
