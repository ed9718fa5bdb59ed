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

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "mimofb/channel.hpp"
#include "mimofb/codebook.hpp"

using namespace mimofb;
using cd = std::complex<double>;

TEST_SUITE_BEGIN("codebook");

namespace {

// Exhaustive reference quantizer: explicit score loop, lowest index wins ties.
QuantizeOutcome quantize_reference(const Eigen::VectorXcd& h, const Eigen::MatrixXcd& words) {
    Eigen::VectorXcd dir = h / h.norm();
    Eigen::Index best = 0;
    double best_score = -1.0;
    for (Eigen::Index i = 0; i < words.cols(); ++i) {
        cd ip(0, 0);
        for (Eigen::Index m = 0; m < words.rows(); ++m) ip += std::conj(dir(m)) * words(m, i);
        double score = std::norm(ip);
        if (score > best_score) {
            best_score = score;
            best = i;
        }
    }
    return {best, 1.0 - best_score, h.norm()};
}

} // namespace

TEST_CASE("rvq words are unit norm with the advertised shape") {
    Rng rng(40);
    auto cb = build_rvq(8, 5, rng);
    CHECK(cb.bits == 5);
    CHECK(cb.kind == CodebookKind::Rvq);
    CHECK(cb.dim() == 8);
    CHECK(cb.count() == 32);
    for (Eigen::Index i = 0; i < cb.count(); ++i)
        CHECK(std::abs(cb.vectors.col(i).norm() - 1.0) < 1e-12);
}

TEST_CASE("rvq draws nest: a bigger codebook extends a smaller one") {
    Rng a(41), b(41);
    auto small = build_rvq(4, 3, a);
    auto big = build_rvq(4, 4, b);
    CHECK((big.vectors.leftCols(8) - small.vectors).norm() == 0.0);
}

TEST_CASE("rvq rejects out-of-range sizes") {
    Rng rng(42);
    CHECK_THROWS_AS(build_rvq(0, 3, rng), std::invalid_argument);
    CHECK_THROWS_AS(build_rvq(4, -1, rng), std::invalid_argument);
    CHECK_THROWS_AS(build_rvq(4, kMaxCodebookBits + 1, rng), std::invalid_argument);
    CHECK(build_rvq(4, 0, rng).count() == 1); // degenerate single-word book is legal
}

TEST_CASE("quantize agrees with the exhaustive reference") {
    Rng rng(43);
    for (int rep = 0; rep < 40; ++rep) {
        int dim = 2 + int(rng.uniform() * 12);
        int bits = 1 + int(rng.uniform() * 6);
        auto cb = build_rvq(dim, bits, rng);
        Eigen::VectorXcd h(dim);
        for (int m = 0; m < dim; ++m) h(m) = 3.0 * rng.cnormal();
        auto got = quantize(h, cb);
        auto want = quantize_reference(h, cb.vectors);
        CHECK(got.index == want.index);
        CHECK(got.chordal_error == doctest::Approx(want.chordal_error).epsilon(1e-10));
        CHECK(got.magnitude == doctest::Approx(h.norm()).epsilon(1e-12));
    }
}

TEST_CASE("quantize resolves ties to the lowest index") {
    Codebook cb;
    cb.bits = 1;
    cb.kind = CodebookKind::Rvq;
    cb.vectors = Eigen::MatrixXcd::Identity(2, 2);
    Eigen::VectorXcd h(2);
    h << cd(1, 0), cd(1, 0);
    CHECK(quantize(h, cb).index == 0);
    // Duplicate words: still the first occurrence.
    cb.vectors.col(1) = cb.vectors.col(0);
    CHECK(quantize(h, cb).index == 0);
}

TEST_CASE("quantize is invariant to scale and global phase") {
    Rng rng(44);
    auto cb = build_rvq(6, 4, rng);
    Eigen::VectorXcd h(6);
    for (int m = 0; m < 6; ++m) h(m) = rng.cnormal();
    auto base = quantize(h, cb);
    auto scaled = quantize(3.7 * std::polar(1.0, 1.234) * h, cb);
    CHECK(scaled.index == base.index);
    CHECK(scaled.chordal_error == doctest::Approx(base.chordal_error).epsilon(1e-12));
    CHECK(scaled.magnitude == doctest::Approx(3.7 * h.norm()).epsilon(1e-12));
}

TEST_CASE("a channel sitting on a word quantizes to it with zero error") {
    Rng rng(45);
    auto cb = build_rvq(5, 4, rng);
    auto out = quantize(2.5 * cb.vectors.col(11), cb);
    CHECK(out.index == 11);
    CHECK(out.chordal_error < 1e-12);
    CHECK(out.magnitude == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("rvq distortion sits inside the theoretical band") {
    // E[chordal error] for 2^B random words over C^P lies between
    // (P-1)/P * 2^(-B/(P-1)) and 2^(-B/(P-1)).
    Rng rng(46);
    const int paths = 4;
    struct { int bits; int trials; } pts[] = {{4, 10000}, {8, 4000}, {12, 1200}};
    for (auto [bits, trials] : pts) {
        double sum = 0, sum2 = 0;
        for (int t = 0; t < trials; ++t) {
            auto cb = build_rvq(paths, bits, rng);
            Eigen::VectorXcd h(paths);
            for (int m = 0; m < paths; ++m) h(m) = rng.cnormal();
            double e = quantize(h, cb).chordal_error;
            sum += e;
            sum2 += e * e;
        }
        double mean = sum / trials;
        double se = std::sqrt(std::max(0.0, sum2 / trials - mean * mean) / trials);
        double upper = std::pow(2.0, -double(bits) / (paths - 1));
        double lower = (paths - 1.0) / paths * upper;
        CHECK(mean - 3 * se < upper);
        CHECK(mean + 3 * se > lower);
    }
}

TEST_CASE("subspace words stay near unit length before renormalization") {
    ArrayGeometry geom{ArrayKind::Ula, 128, 1, 0.5};
    Rng rng(47);
    PathSet ps = draw_path_set(geom, 4, default_separation_floor(geom), rng);
    auto basis = steering_matrix(geom, ps);
    auto inner = build_rvq(4, 5, rng);
    auto cb = build_subspace(basis, inner);
    CHECK(cb.kind == CodebookKind::Subspace);
    CHECK(cb.bits == 5);
    CHECK(cb.dim() == 128);
    REQUIRE(cb.basis.has_value());
    for (Eigen::Index i = 0; i < cb.count(); ++i) {
        CHECK(std::abs(cb.vectors.col(i).norm() - 1.0) < 1e-12);
        // Unnormalized product: close to unit because the basis is nearly
        // orthonormal at this aperture and separation.
        double raw = (basis * inner.vectors.col(i)).norm();
        CHECK(raw > 0.97);
        CHECK(raw < 1.03);
    }
    CHECK_THROWS_AS(build_subspace(basis, build_rvq(3, 2, rng)), std::invalid_argument);
}

TEST_CASE("fast subspace quantizer matches the materialized codebook") {
    ArrayGeometry geom{ArrayKind::Ula, 64, 1, 0.5};
    Rng rng(48);
    PathSet ps = draw_path_set(geom, 4, default_separation_floor(geom), rng);
    auto basis = steering_matrix(geom, ps);
    for (int rep = 0; rep < 10; ++rep) {
        auto inner = build_rvq(4, 5, rng);
        auto cb = build_subspace(basis, inner);
        SubspaceQuantizer fast(basis, inner.vectors);
        for (int k = 0; k < 20; ++k) {
            Eigen::VectorXcd h = synthesize_channel(basis, draw_gains(4, rng));
            auto a = quantize(h, cb);
            auto b = fast.quantize(h);
            CHECK(a.index == b.index);
            CHECK(a.chordal_error == doctest::Approx(b.chordal_error).epsilon(1e-9));
            CHECK((fast.codeword(b.index) - cb.vectors.col(b.index)).norm() < 1e-12);
        }
    }
}

TEST_CASE("lloyd training beats a random codebook on held-out data") {
    Rng rng(49);
    const int dim = 4, bits = 3;
    auto training = isotropic_unit_vectors(dim, 2000, rng);
    auto lloyd = build_lloyd_inner(dim, bits, training, rng);
    CHECK(lloyd.kind == CodebookKind::Lloyd);
    CHECK(lloyd.count() == 8);
    for (Eigen::Index i = 0; i < lloyd.count(); ++i)
        CHECK(std::abs(lloyd.vectors.col(i).norm() - 1.0) < 1e-12);

    auto eval = isotropic_unit_vectors(dim, 6000, rng);
    double d_lloyd = mean_chordal_distortion(eval, lloyd);
    // Average a few fresh random codebooks on the same evaluation set.
    double d_rvq = 0;
    for (int k = 0; k < 5; ++k) d_rvq += mean_chordal_distortion(eval, build_rvq(dim, bits, rng));
    d_rvq /= 5;
    CHECK(d_lloyd < d_rvq);
    // Training also improves on the raw initial subset: distortion on the
    // training set is below the random-codebook level.
    CHECK(mean_chordal_distortion(training, lloyd) < d_rvq);
}

TEST_CASE("lloyd repairs empty clusters and validates inputs") {
    Rng rng(50);
    // Training data concentrated on two directions forces empty clusters
    // for a 4-word codebook.
    Eigen::MatrixXcd training(3, 600);
    Eigen::VectorXcd c1 = isotropic_unit_vectors(3, 1, rng);
    Eigen::VectorXcd c2 = isotropic_unit_vectors(3, 1, rng);
    for (int i = 0; i < 600; ++i) {
        Eigen::VectorXcd base = (i % 2 == 0) ? c1 : c2;
        Eigen::VectorXcd jitter(3);
        for (int m = 0; m < 3; ++m) jitter(m) = 1e-3 * rng.cnormal();
        Eigen::VectorXcd v = base + jitter;
        training.col(i) = v / v.norm();
    }
    auto cb = build_lloyd_inner(3, 2, training, rng);
    CHECK(cb.count() == 4);
    for (Eigen::Index i = 0; i < cb.count(); ++i)
        CHECK(std::abs(cb.vectors.col(i).norm() - 1.0) < 1e-9);
    CHECK(mean_chordal_distortion(training, cb) < 0.01);

    // Too little training data for the requested size.
    CHECK_THROWS_AS(build_lloyd_inner(3, 4, training, rng), std::invalid_argument);
}

TEST_CASE("rotated codebook reduces to plain rvq for identity statistics") {
    Rng a(51), b(51);
    auto rot = build_rotated_statistics(Eigen::MatrixXcd::Identity(6, 6), 4, a);
    auto rvq = build_rvq(6, 4, b);
    CHECK(rot.kind == CodebookKind::RotatedStatistics);
    // Identity statistics leave the isotropic draws untouched.
    CHECK((rot.vectors - rvq.vectors).norm() < 1e-12);
}

TEST_CASE("rank-one statistics collapse every word onto the principal direction") {
    Rng rng(52);
    Eigen::VectorXcd v = isotropic_unit_vectors(5, 1, rng);
    Eigen::MatrixXcd r = v * v.adjoint();
    auto cb = build_rotated_statistics(r, 3, rng);
    for (Eigen::Index i = 0; i < cb.count(); ++i)
        CHECK(std::abs(std::abs((v.adjoint() * cb.vectors.col(i)).value()) - 1.0) < 1e-10);
}

TEST_CASE("rotated codebook rejects indefinite statistics") {
    Rng rng(53);
    CHECK_THROWS_AS(build_rotated_statistics(-Eigen::MatrixXcd::Identity(4, 4), 3, rng),
                    std::invalid_argument);
    // Asymmetric input is rejected too.
    Eigen::MatrixXcd r = Eigen::MatrixXcd::Identity(4, 4);
    r(0, 1) = cd(0.5, 0.0); // no matching conjugate entry
    CHECK_THROWS_AS(build_rotated_statistics(r, 3, rng), std::invalid_argument);
    // Tiny negative eigenvalues from roundoff are clipped, not rejected.
    Eigen::MatrixXcd ok = Eigen::MatrixXcd::Identity(4, 4) * (-1e-12);
    ok += Eigen::MatrixXcd::Identity(4, 4);
    CHECK_NOTHROW(build_rotated_statistics(ok, 2, rng));
}

TEST_CASE("binary and text serialization round-trip exactly") {
    Rng rng(54);
    ArrayGeometry geom{ArrayKind::Ula, 16, 1, 0.5};
    PathSet ps = draw_path_set(geom, 3, default_separation_floor(geom), rng);
    auto cb = build_subspace(steering_matrix(geom, ps), build_rvq(3, 4, rng));

    for (auto fmt : {CodebookFormat::Binary, CodebookFormat::Text}) {
        std::string path = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") +
                           (fmt == CodebookFormat::Binary ? "/mimofb_cb_test.cbb" : "/mimofb_cb_test.cbt");
        save_codebook(cb, path, fmt);
        auto back = load_codebook(path);
        CHECK(back.bits == cb.bits);
        CHECK(back.kind == cb.kind);
        CHECK(back.dim() == cb.dim());
        CHECK(back.count() == cb.count());
        CHECK((back.vectors - cb.vectors).norm() == 0.0); // 17 digits round-trip doubles
        std::remove(path.c_str());
    }
    CHECK_THROWS_AS(load_codebook("/nonexistent/mimofb.cbb"), std::runtime_error);
}

TEST_SUITE_END();
