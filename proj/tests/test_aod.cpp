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
#include <numbers>
#include <vector>

#include "mimofb/aod.hpp"

using namespace mimofb;
using std::numbers::pi;

TEST_SUITE_BEGIN("aod");

namespace {

Eigen::MatrixXcd snapshots_for(const ArrayGeometry& geom, const PathSet& ps, int n, Rng& rng) {
    auto a = steering_matrix(geom, ps);
    Eigen::MatrixXcd snaps(geom.size(), n);
    for (int i = 0; i < n; ++i) snaps.col(i) = synthesize_channel(a, draw_gains(ps.count(), rng));
    return snaps;
}

// Reference spectrum: eigendecompose in the test, build the noise projector
// N N^H explicitly, and evaluate the quadratic form directly.
double spectrum_reference(const Eigen::MatrixXcd& cov, const ArrayGeometry& geom, int paths,
                          double az, double el) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(cov);
    const Eigen::Index m = cov.rows();
    Eigen::MatrixXcd noise = eig.eigenvectors().leftCols(m - paths); // ascending eigenvalues
    Eigen::MatrixXcd proj = noise * noise.adjoint();
    Eigen::VectorXcd a = steering_vector(geom, az, el);
    double denom = std::real((a.adjoint() * proj * a)(0, 0));
    return 1.0 / std::max(denom, 1e-12);
}

} // namespace

TEST_CASE("sample covariance matches the explicit average and is Hermitian") {
    Rng rng(60);
    Eigen::MatrixXcd snaps(5, 7);
    for (int i = 0; i < 7; ++i)
        for (int m = 0; m < 5; ++m) snaps(m, i) = rng.cnormal();
    auto cov = sample_covariance(snaps);
    Eigen::MatrixXcd want = Eigen::MatrixXcd::Zero(5, 5);
    for (int i = 0; i < 7; ++i) want += snaps.col(i) * snaps.col(i).adjoint();
    want /= 7.0;
    CHECK((cov - want).norm() < 1e-13);
    CHECK((cov - cov.adjoint()).norm() == 0.0);
    CHECK_THROWS_AS(sample_covariance(Eigen::MatrixXcd(5, 0)), std::invalid_argument);
}

TEST_CASE("noise-free covariance has exactly paths dominant eigenvalues") {
    ArrayGeometry geom{ArrayKind::Ula, 32, 1, 0.5};
    Rng rng(61);
    PathSet ps = draw_path_set(geom, 4, default_separation_floor(geom), rng);
    auto cov = sample_covariance(snapshots_for(geom, ps, 200, rng));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(cov);
    Eigen::VectorXd ev = eig.eigenvalues(); // ascending
    double fifth = ev(32 - 5);
    for (int k = 0; k < 4; ++k) CHECK(ev(31 - k) > 10.0 * std::max(fifth, 1e-300));
}

TEST_CASE("spectrum values match the explicit noise projector") {
    ArrayGeometry geom{ArrayKind::Ula, 24, 1, 0.5};
    Rng rng(62);
    PathSet ps = draw_path_set(geom, 3, default_separation_floor(geom), rng);
    auto cov = sample_covariance(snapshots_for(geom, ps, 64, rng));
    Eigen::MatrixX2d dirs(9, 2);
    for (int i = 0; i < 9; ++i) {
        dirs(i, 0) = -1.2 + 0.3 * i;
        dirs(i, 1) = 0.0;
    }
    auto got = subspace_spectrum(cov, geom, 3, dirs);
    REQUIRE(got.size() == 9);
    for (int i = 0; i < 9; ++i) {
        double want = spectrum_reference(cov, geom, 3, dirs(i, 0), dirs(i, 1));
        CHECK(got(i) == doctest::Approx(want).epsilon(1e-6));
        CHECK(got(i) <= 1.0 / 1e-12 + 1.0);
    }
    // At a true direction the spectrum dwarfs an off-path direction.
    Eigen::MatrixX2d probe(2, 2);
    probe << ps.azimuth(0), 0.0, std::asin(std::clamp(std::sin(ps.azimuth(0)) + 0.05, -1.0, 1.0)), 0.0;
    auto peaks = subspace_spectrum(cov, geom, 3, probe);
    CHECK(peaks(0) > 100.0 * peaks(1));
}

TEST_CASE("direction recovery lands within two grid steps") {
    ArrayGeometry geom{ArrayKind::Ula, 64, 1, 0.5};
    Rng rng(63);
    const double step = 1e-3;
    for (int rep = 0; rep < 5; ++rep) {
        PathSet ps = draw_path_set(geom, 3, default_separation_floor(geom), rng);
        auto cov = sample_covariance(snapshots_for(geom, ps, 100, rng));
        auto est = estimate_aods(cov, geom, 3, step);
        REQUIRE(est.azimuth.size() == 3);
        CHECK(est.complete);
        std::vector<double> truth, found;
        for (int p = 0; p < 3; ++p) {
            truth.push_back(std::sin(ps.azimuth(p)));
            found.push_back(std::sin(est.azimuth(p)));
        }
        std::sort(truth.begin(), truth.end());
        std::sort(found.begin(), found.end());
        for (int p = 0; p < 3; ++p) CHECK(std::abs(truth[p] - found[p]) <= 2 * step + 1e-12);
    }
}

TEST_CASE("overestimating the path count keeps the true directions") {
    ArrayGeometry geom{ArrayKind::Ula, 48, 1, 0.5};
    Rng rng(64);
    const double step = 1e-3;
    PathSet ps = draw_path_set(geom, 3, default_separation_floor(geom), rng);
    auto cov = sample_covariance(snapshots_for(geom, ps, 100, rng));
    auto est = estimate_aods(cov, geom, 5, step);
    REQUIRE(est.azimuth.size() == 5);
    for (int p = 0; p < 3; ++p) {
        double target = std::sin(ps.azimuth(p));
        double best = 1e9;
        for (int q = 0; q < 5; ++q) best = std::min(best, std::abs(std::sin(est.azimuth(q)) - target));
        CHECK(best <= 2 * step + 1e-12);
    }
}

TEST_CASE("planar direction recovery works on a coarse grid") {
    ArrayGeometry geom{ArrayKind::Upa, 8, 8, 0.5};
    Rng rng(65);
    const double step = 5e-3;
    PathSet ps = draw_path_set(geom, 2, default_separation_floor(geom), rng);
    auto cov = sample_covariance(snapshots_for(geom, ps, 64, rng));
    auto est = estimate_aods(cov, geom, 2, step);
    REQUIRE(est.azimuth.size() == 2);
    REQUIRE(est.elevation.size() == 2);
    for (int p = 0; p < 2; ++p) {
        double best = 1e9;
        for (int q = 0; q < 2; ++q) {
            double d = std::max(std::abs(std::sin(est.elevation(q)) - std::sin(ps.elevation(p))),
                                std::abs(std::cos(est.elevation(q)) * std::sin(est.azimuth(q)) -
                                         std::cos(ps.elevation(p)) * std::sin(ps.azimuth(p))));
            best = std::min(best, d);
        }
        CHECK(best <= 4 * step);
    }
}

TEST_CASE("featureless covariance is rejected") {
    ArrayGeometry geom{ArrayKind::Ula, 16, 1, 0.5};
    CHECK_THROWS_AS(estimate_aods(Eigen::MatrixXcd::Identity(16, 16), geom, 2, 1e-2),
                    std::runtime_error);
}

TEST_CASE("sine quantizer is a clamped mid-rise grid") {
    Rng rng(66);
    for (int bits : {2, 4, 8}) {
        double width = std::pow(2.0, 1 - bits);
        // Centers of every cell, for the brute-force nearest search.
        std::vector<double> centers;
        for (int k = -(1 << (bits - 1)); k < (1 << (bits - 1)); ++k)
            centers.push_back(width * (k + 0.5));
        double worst = 0.0;
        for (int i = 0; i < 10000; ++i) {
            double s = rng.uniform(-1.0, 1.0);
            double got = quantize_sin(s, bits);
            double nearest = centers[0];
            for (double c : centers)
                if (std::abs(c - s) < std::abs(nearest - s)) nearest = c;
            CHECK(got == doctest::Approx(nearest).epsilon(1e-12));
            worst = std::max(worst, std::abs(got - s));
        }
        CHECK(worst <= width / 2 + 1e-12);          // tight mid-rise error
        CHECK(worst <= 2.0 * std::pow(2.0, -bits)); // coarse range-based cap
        // Clamping at the edges keeps outputs inside [-1, 1].
        CHECK(quantize_sin(1.0, bits) == doctest::Approx(1.0 - width / 2).epsilon(1e-12));
        CHECK(quantize_sin(-1.0, bits) == doctest::Approx(-(1.0 - width / 2)).epsilon(1e-12));
    }
}

TEST_CASE("quantizing an estimate quantizes every sine coordinate") {
    AodEstimate est;
    est.azimuth = Eigen::VectorXd(3);
    est.azimuth << -0.7, 0.1, 1.2;
    est.elevation = Eigen::VectorXd(3);
    est.elevation << 0.4, -0.2, 0.0;
    auto q = quantize_aods(est, 6);
    REQUIRE(q.azimuth.size() == 3);
    REQUIRE(q.elevation.size() == 3);
    for (int p = 0; p < 3; ++p) {
        CHECK(std::sin(q.azimuth(p)) == doctest::Approx(quantize_sin(std::sin(est.azimuth(p)), 6))
                                            .epsilon(1e-12));
        CHECK(std::sin(q.elevation(p)) ==
              doctest::Approx(quantize_sin(std::sin(est.elevation(p)), 6)).epsilon(1e-12));
        CHECK(std::abs(std::sin(q.azimuth(p)) - std::sin(est.azimuth(p))) <= std::pow(2.0, -6) + 1e-12);
    }
}

TEST_SUITE_END();
