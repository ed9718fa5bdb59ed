// SPDX-License-Identifier: Apache-2.0
//
// Multipath channel synthesis for uniform linear and planar arrays.
//
// A channel realization is h = A g where the columns of A are array
// steering vectors at the path directions and g holds the complex path
// gains.  Directions are drawn with a minimum separation in the sine
// domain so the steering matrix stays well conditioned.

#include "mimofb/channel.hpp"

#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace mimofb {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_geometry(const ArrayGeometry& geom) {
    if (geom.m1 < 1 || geom.m2 < 1) {
        throw std::invalid_argument("array geometry needs at least one element per axis");
    }
    if (geom.kind == ArrayKind::Ula && geom.m2 != 1) {
        throw std::invalid_argument("linear arrays must have m2 == 1");
    }
    if (!(geom.spacing > 0.0) || !std::isfinite(geom.spacing)) {
        throw std::invalid_argument("element spacing must be positive and finite");
    }
}

void check_angle(double value, const char* what) {
    if (!std::isfinite(value)) {
        throw std::invalid_argument(std::string(what) + " must be finite");
    }
}

// One-dimensional steering factor with unit norm: entry m carries phase
// 2*pi*spacing*m*coordinate where coordinate is the direction sine term.
Eigen::VectorXcd axis_factor(int elements, double spacing, double coordinate) {
    Eigen::VectorXcd a(elements);
    const double scale = 1.0 / std::sqrt(static_cast<double>(elements));
    const double step = 2.0 * kPi * spacing * coordinate;
    for (int m = 0; m < elements; ++m) {
        const double phase = step * static_cast<double>(m);
        a(m) = std::complex<double>(std::cos(phase) * scale, std::sin(phase) * scale);
    }
    return a;
}

} // namespace

Eigen::VectorXcd steering_vector(const ArrayGeometry& geom, double azimuth, double elevation) {
    check_geometry(geom);
    check_angle(azimuth, "azimuth");
    check_angle(elevation, "elevation");

    if (geom.kind == ArrayKind::Ula) {
        return axis_factor(geom.m1, geom.spacing, std::sin(azimuth));
    }

    // Planar array: horizontal factor over m1 elements indexed by
    // cos(elevation)*sin(azimuth), vertical factor over m2 elements indexed
    // by sin(elevation).  Entry (i*m2 + j) is the product of horizontal
    // entry i and vertical entry j.
    const Eigen::VectorXcd ah =
        axis_factor(geom.m1, geom.spacing, std::cos(elevation) * std::sin(azimuth));
    const Eigen::VectorXcd av = axis_factor(geom.m2, geom.spacing, std::sin(elevation));
    Eigen::VectorXcd a(geom.size());
    for (int i = 0; i < geom.m1; ++i) {
        for (int j = 0; j < geom.m2; ++j) {
            a(static_cast<Eigen::Index>(i) * geom.m2 + j) = ah(i) * av(j);
        }
    }
    return a;
}

Eigen::MatrixXcd steering_matrix(const ArrayGeometry& geom, const PathSet& paths) {
    check_geometry(geom);
    if (paths.count() < 1) {
        throw std::invalid_argument("path set must contain at least one path");
    }
    if (geom.kind == ArrayKind::Upa && paths.elevation.size() != paths.count()) {
        throw std::invalid_argument("planar arrays need one elevation per path");
    }
    Eigen::MatrixXcd a(geom.size(), paths.count());
    for (Eigen::Index p = 0; p < paths.count(); ++p) {
        const double el = (paths.elevation.size() > p) ? paths.elevation(p) : 0.0;
        a.col(p) = steering_vector(geom, paths.azimuth(p), el);
    }
    return a;
}

double default_separation_floor(const ArrayGeometry& geom) {
    check_geometry(geom);
    return 4.0 / (static_cast<double>(geom.size()) * geom.spacing);
}

PathSet draw_path_set(const ArrayGeometry& geom, int paths, double min_separation, Rng& rng) {
    check_geometry(geom);
    if (paths < 1) {
        throw std::invalid_argument("path count must be positive");
    }
    if (min_separation < 0.0 || !std::isfinite(min_separation)) {
        throw std::invalid_argument("separation floor must be non-negative and finite");
    }

    const bool planar = geom.kind == ArrayKind::Upa;
    std::vector<double> az;
    std::vector<double> el;
    std::vector<double> sin_h; // accepted horizontal sine coordinates
    std::vector<double> sin_v; // accepted vertical sine coordinates
    az.reserve(static_cast<std::size_t>(paths));
    el.reserve(static_cast<std::size_t>(paths));

    // Rejection sampling with a global budget.  When the floor is too large
    // for the requested path count the sampler cannot terminate, so a capped
    // budget converts that misconfiguration into an error.
    constexpr int kMaxRejections = 10000;
    int rejections = 0;
    while (az.size() < static_cast<std::size_t>(paths)) {
        const double cand_az = rng.uniform(-kPi / 2.0, kPi / 2.0);
        const double cand_el = planar ? rng.uniform(-kPi / 2.0, kPi / 2.0) : 0.0;
        const double cand_h = planar ? std::cos(cand_el) * std::sin(cand_az) : std::sin(cand_az);
        const double cand_v = planar ? std::sin(cand_el) : 0.0;

        bool ok = true;
        for (std::size_t i = 0; i < sin_h.size(); ++i) {
            const double dh = std::abs(cand_h - sin_h[i]);
            const double dv = std::abs(cand_v - sin_v[i]);
            const double dist = planar ? std::max(dh, dv) : dh;
            if (dist < min_separation) {
                ok = false;
                break;
            }
        }
        if (!ok) {
            if (++rejections >= kMaxRejections) {
                std::ostringstream msg;
                msg << "could not place " << paths << " paths with separation floor "
                    << min_separation << " after " << kMaxRejections << " rejections";
                throw std::runtime_error(msg.str());
            }
            continue;
        }
        az.push_back(cand_az);
        el.push_back(cand_el);
        sin_h.push_back(cand_h);
        sin_v.push_back(cand_v);
    }

    PathSet out;
    out.azimuth = Eigen::Map<const Eigen::VectorXd>(az.data(), static_cast<Eigen::Index>(az.size()));
    if (planar) {
        out.elevation =
            Eigen::Map<const Eigen::VectorXd>(el.data(), static_cast<Eigen::Index>(el.size()));
    } else {
        out.elevation = Eigen::VectorXd(0);
    }
    out.gain = draw_gains(paths, rng);
    return out;
}

Eigen::VectorXcd draw_gains(Eigen::Index paths, Rng& rng) {
    if (paths < 1) {
        throw std::invalid_argument("path count must be positive");
    }
    Eigen::VectorXcd g(paths);
    for (Eigen::Index p = 0; p < paths; ++p) {
        g(p) = rng.cnormal();
    }
    return g;
}

Eigen::VectorXcd synthesize_channel(const Eigen::MatrixXcd& steering,
                                    const Eigen::VectorXcd& gain) {
    if (steering.cols() != gain.size()) {
        throw std::invalid_argument("steering matrix and gain vector disagree on path count");
    }
    return steering * gain;
}

} // namespace mimofb
