// SPDX-License-Identifier: Apache-2.0
//
// Direction-of-departure estimation from downlink snapshots.
//
// The estimator is a noise-subspace spectrum search: eigendecompose the
// sample covariance, treat the strongest `paths` eigenvectors as the signal
// subspace, and scan a sine-domain grid for directions whose steering
// vectors are (nearly) orthogonal to the noise subspace.

#include "mimofb/aod.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mimofb {

namespace {

constexpr double kSpectrumFloor = 1e-12;

// Signal-subspace basis (strongest `paths` eigenvectors) of a Hermitian
// covariance.  Throws when the spectrum is flat, because then no direction
// information is present.
Eigen::MatrixXcd signal_subspace(const Eigen::MatrixXcd& covariance, int paths) {
    if (covariance.rows() != covariance.cols() || covariance.rows() < 2) {
        throw std::invalid_argument("covariance must be square with dimension at least 2");
    }
    if (paths < 1 || paths >= covariance.rows()) {
        throw std::invalid_argument("path count must lie in [1, dimension)");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(covariance);
    const Eigen::VectorXd ev = eig.eigenvalues(); // ascending
    const double spread = ev(ev.size() - 1) - ev(0);
    if (!(spread > 1e-9 * std::max(std::abs(ev(ev.size() - 1)), 1e-300))) {
        throw std::runtime_error("covariance has a flat eigenvalue spectrum; no directions to find");
    }
    return eig.eigenvectors().rightCols(paths);
}

// Spectrum value for one direction given the signal subspace: the noise
// projector satisfies a^H N N^H a = 1 - ||S^H a||^2 for unit-norm steering.
double spectrum_value(const Eigen::MatrixXcd& signal, const Eigen::VectorXcd& a) {
    const double captured = (signal.adjoint() * a).squaredNorm();
    const double denom = std::max(1.0 - captured, kSpectrumFloor);
    return 1.0 / denom;
}

struct Peak {
    double value = 0.0;
    Eigen::Index flat = 0; // flattened grid index
};

// Selects the `paths` strongest entries of `peaks`; when there are not
// enough, fills from the strongest remaining grid values.  Returns flat
// grid indices plus a completeness flag.
std::pair<std::vector<Eigen::Index>, bool> pick_peaks(std::vector<Peak> peaks,
                                                      const std::vector<double>& spectrum,
                                                      int paths) {
    std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) {
        if (a.value != b.value) {
            return a.value > b.value;
        }
        return a.flat < b.flat;
    });
    std::vector<Eigen::Index> chosen;
    chosen.reserve(static_cast<std::size_t>(paths));
    for (const Peak& p : peaks) {
        if (static_cast<int>(chosen.size()) == paths) {
            break;
        }
        chosen.push_back(p.flat);
    }
    bool complete = static_cast<int>(chosen.size()) == paths;
    if (!complete) {
        // Not enough strict local maxima (heavily merged peaks); fill from
        // the strongest grid values not already selected.
        std::vector<Eigen::Index> order(spectrum.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = static_cast<Eigen::Index>(i);
        }
        std::sort(order.begin(), order.end(), [&spectrum](Eigen::Index a, Eigen::Index b) {
            if (spectrum[static_cast<std::size_t>(a)] != spectrum[static_cast<std::size_t>(b)]) {
                return spectrum[static_cast<std::size_t>(a)] > spectrum[static_cast<std::size_t>(b)];
            }
            return a < b;
        });
        for (Eigen::Index idx : order) {
            if (static_cast<int>(chosen.size()) == paths) {
                break;
            }
            if (std::find(chosen.begin(), chosen.end(), idx) == chosen.end()) {
                chosen.push_back(idx);
            }
        }
    }
    return {chosen, complete};
}

std::vector<double> sine_grid(double step) {
    if (!(step > 0.0) || step > 1.0) {
        throw std::invalid_argument("grid step must lie in (0, 1]");
    }
    std::vector<double> grid;
    const auto points = static_cast<std::size_t>(std::floor(2.0 / step)) + 1;
    grid.reserve(points + 1);
    for (std::size_t i = 0; i < points; ++i) {
        grid.push_back(std::min(1.0, -1.0 + step * static_cast<double>(i)));
    }
    if (grid.back() < 1.0) {
        grid.push_back(1.0);
    }
    return grid;
}

} // namespace

Eigen::MatrixXcd sample_covariance(const Eigen::MatrixXcd& snapshots) {
    if (snapshots.cols() < 1 || snapshots.rows() < 1) {
        throw std::invalid_argument("need at least one snapshot");
    }
    Eigen::MatrixXcd cov = snapshots * snapshots.adjoint() / static_cast<double>(snapshots.cols());
    // Symmetrize so the result is exactly Hermitian despite roundoff.
    return 0.5 * (cov + cov.adjoint().eval());
}

Eigen::VectorXd subspace_spectrum(const Eigen::MatrixXcd& covariance, const ArrayGeometry& geom,
                                  int paths, const Eigen::MatrixX2d& directions) {
    if (covariance.rows() != geom.size()) {
        throw std::invalid_argument("covariance dimension must match the array size");
    }
    const Eigen::MatrixXcd signal = signal_subspace(covariance, paths);
    Eigen::VectorXd out(directions.rows());
    for (Eigen::Index i = 0; i < directions.rows(); ++i) {
        out(i) = spectrum_value(signal, steering_vector(geom, directions(i, 0), directions(i, 1)));
    }
    return out;
}

AodEstimate estimate_aods(const Eigen::MatrixXcd& covariance, const ArrayGeometry& geom,
                          int paths, double grid_step) {
    if (covariance.rows() != geom.size()) {
        throw std::invalid_argument("covariance dimension must match the array size");
    }
    const Eigen::MatrixXcd signal = signal_subspace(covariance, paths);
    const std::vector<double> grid = sine_grid(grid_step);
    const auto n = static_cast<Eigen::Index>(grid.size());

    AodEstimate est;
    if (geom.kind == ArrayKind::Ula) {
        std::vector<double> spectrum(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            spectrum[i] = spectrum_value(signal, steering_vector(geom, std::asin(grid[i])));
        }
        // At half-integer element spacing the two endfire endpoints alias to
        // the same array response (a(-1) = a(+1)), so a path near one end
        // would otherwise surface as a huge peak at BOTH grid endpoints and
        // crowd out a genuine interior direction.  Detect the alias from the
        // endpoint steering vectors and, when present, scan the sine axis as
        // a circle: the duplicated +1 sample drops out of peak candidacy and
        // an endfire peak takes the sign of its stronger inner shoulder.
        const Eigen::VectorXcd a_lo = steering_vector(geom, std::asin(-1.0));
        const Eigen::VectorXcd a_hi = steering_vector(geom, std::asin(1.0));
        const bool endfire_alias = std::abs((a_lo.adjoint() * a_hi).value()) > 1.0 - 1e-9;
        const Eigen::Index last = endfire_alias ? n - 1 : n; // peak candidates in [0, last)

        std::vector<Peak> peaks;
        for (Eigen::Index i = 0; i < last; ++i) {
            bool up, down;
            const std::size_t ui = static_cast<std::size_t>(i);
            if (endfire_alias) {
                const std::size_t left = static_cast<std::size_t>(i == 0 ? last - 1 : i - 1);
                const std::size_t right = static_cast<std::size_t>(i == last - 1 ? 0 : i + 1);
                up = spectrum[ui] > spectrum[left];
                down = spectrum[ui] > spectrum[right];
            } else {
                // Strict local maxima; grid endpoints count with their one neighbor.
                up = (i == 0) || spectrum[ui] > spectrum[ui - 1];
                down = (i == n - 1) || spectrum[ui] > spectrum[ui + 1];
            }
            if (up && down) {
                peaks.push_back({spectrum[ui], i});
            }
        }
        const std::vector<double> candidates(spectrum.begin(),
                                             spectrum.begin() + static_cast<std::ptrdiff_t>(last));
        auto [chosen, complete] = pick_peaks(std::move(peaks), candidates, paths);
        est.azimuth.resize(paths);
        est.elevation.resize(0);
        for (int p = 0; p < paths; ++p) {
            const Eigen::Index idx = chosen[p];
            double sine = grid[static_cast<std::size_t>(idx)];
            if (endfire_alias && idx == 0) {
                // The wrapped endfire peak is a single physical direction that
                // could sit just inside either end; the pole is closer to the
                // shoulder with the larger spectrum value.
                const double plus_shoulder = spectrum[static_cast<std::size_t>(n - 2)];
                const double minus_shoulder = spectrum[1];
                sine = plus_shoulder > minus_shoulder ? 1.0 : -1.0;
            }
            est.azimuth(p) = std::asin(sine);
        }
        est.complete = complete;
        return est;
    }

    // Planar array: scan the (sin azimuth, sin elevation) plane.  The
    // steering vector at grid point (s, t) is evaluated at azimuth asin(s)
    // and elevation asin(t).
    // TODO: mirror the endfire alias handling above on both planar axes.
    std::vector<double> spectrum(grid.size() * grid.size());
    for (Eigen::Index r = 0; r < n; ++r) {
        const double el = std::asin(grid[static_cast<std::size_t>(r)]);
        for (Eigen::Index c = 0; c < n; ++c) {
            const double az = std::asin(grid[static_cast<std::size_t>(c)]);
            spectrum[static_cast<std::size_t>(r * n + c)] =
                spectrum_value(signal, steering_vector(geom, az, el));
        }
    }
    std::vector<Peak> peaks;
    for (Eigen::Index r = 0; r < n; ++r) {
        for (Eigen::Index c = 0; c < n; ++c) {
            const double v = spectrum[static_cast<std::size_t>(r * n + c)];
            bool is_peak = true;
            for (int dr = -1; dr <= 1 && is_peak; ++dr) {
                for (int dc = -1; dc <= 1; ++dc) {
                    if (dr == 0 && dc == 0) {
                        continue;
                    }
                    const Eigen::Index rr = r + dr;
                    const Eigen::Index cc = c + dc;
                    if (rr < 0 || rr >= n || cc < 0 || cc >= n) {
                        continue;
                    }
                    if (spectrum[static_cast<std::size_t>(rr * n + cc)] >= v) {
                        is_peak = false;
                        break;
                    }
                }
            }
            if (is_peak) {
                peaks.push_back({v, r * n + c});
            }
        }
    }
    auto [chosen, complete] = pick_peaks(std::move(peaks), spectrum, paths);
    est.azimuth.resize(paths);
    est.elevation.resize(paths);
    for (int p = 0; p < paths; ++p) {
        const Eigen::Index flat = chosen[p];
        est.azimuth(p) = std::asin(grid[static_cast<std::size_t>(flat % n)]);
        est.elevation(p) = std::asin(grid[static_cast<std::size_t>(flat / n)]);
    }
    est.complete = complete;
    return est;
}

double quantize_sin(double value, int bits) {
    if (bits < 1 || bits > 30) {
        throw std::invalid_argument("sine quantizer bits must lie in [1, 30]");
    }
    if (!std::isfinite(value)) {
        throw std::invalid_argument("sine value must be finite");
    }
    const double clamped = std::clamp(value, -1.0, 1.0);
    const double width = std::pow(2.0, 1 - bits); // cell width over [-1, 1]
    const auto cells = static_cast<long long>(1) << bits;
    auto cell = static_cast<long long>(std::floor((clamped + 1.0) / width));
    cell = std::clamp(cell, static_cast<long long>(0), cells - 1);
    return -1.0 + width * (static_cast<double>(cell) + 0.5);
}

AodEstimate quantize_aods(const AodEstimate& estimate, int bits) {
    AodEstimate out;
    out.azimuth.resize(estimate.azimuth.size());
    for (Eigen::Index p = 0; p < estimate.azimuth.size(); ++p) {
        out.azimuth(p) = std::asin(quantize_sin(std::sin(estimate.azimuth(p)), bits));
    }
    out.elevation.resize(estimate.elevation.size());
    for (Eigen::Index p = 0; p < estimate.elevation.size(); ++p) {
        out.elevation(p) = std::asin(quantize_sin(std::sin(estimate.elevation(p)), bits));
    }
    out.complete = estimate.complete;
    return out;
}

} // namespace mimofb
