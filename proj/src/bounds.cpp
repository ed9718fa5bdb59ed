// SPDX-License-Identifier: Apache-2.0
//
// Closed-form performance bounds for quantized and analog channel feedback.
//
// These expressions are deterministic companions to the Monte Carlo
// experiments: array pattern losses from direction quantization, residual
// chordal error of subspace codebooks, per-user rate gaps under zero
// forcing, and the feedback bit budget needed to hold a target gap.

#include "mimofb/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace mimofb {

namespace {

constexpr double kPi = 3.14159265358979323846;

double clamp01(double v) {
    if (v < 0.0) {
        return 0.0;
    }
    if (v > 1.0) {
        return 1.0;
    }
    return v;
}

// Quadratic pattern-loss factor for one array axis: the squared correlation
// between steering factors offset by delta in the sine domain is lowered by
// at most (m^2/3) * (pi * spacing * delta)^2, clamped to [0, 1].
double axis_quadratic_floor(int m, double spacing, double delta) {
    const double term =
        (static_cast<double>(m) * static_cast<double>(m) / 3.0) *
        (kPi * spacing * delta) * (kPi * spacing * delta);
    return clamp01(1.0 - term);
}

// Checks that the clamped quadratic floor never exceeds the exact squared
// pattern |upsilon(spacing * delta)|^2 for offsets up to delta_max.  A dense
// scan is cheap and avoids trusting the series expansion blindly.
bool axis_floor_valid(int m, double spacing, double delta_max) {
    constexpr int kScanPoints = 512;
    for (int i = 0; i <= kScanPoints; ++i) {
        const double delta = delta_max * static_cast<double>(i) / kScanPoints;
        const double exact = upsilon(spacing * delta, m);
        if (axis_quadratic_floor(m, spacing, delta) > exact * exact + 1e-12) {
            return false;
        }
    }
    return true;
}

} // namespace

double upsilon(double x, int m) {
    if (m < 1) {
        throw std::invalid_argument("array size must be positive");
    }
    if (!std::isfinite(x)) {
        throw std::invalid_argument("pattern argument must be finite");
    }
    const double denom = std::sin(kPi * x);
    if (std::abs(denom) < 1e-9) {
        // Near-integer argument: continue with the limit value, whose sign
        // alternates as (-1)^(k * (m - 1)) at integer k.
        const long long k = std::llround(x);
        const bool negative = ((std::llabs(k) * static_cast<long long>(m - 1)) % 2) == 1;
        return negative ? -1.0 : 1.0;
    }
    return std::sin(static_cast<double>(m) * kPi * x) / (static_cast<double>(m) * denom);
}

KSquaredBound k_squared_bound(const ArrayGeometry& geom, double range, int bits) {
    if (geom.m1 < 1 || geom.m2 < 1) {
        throw std::invalid_argument("array geometry needs at least one element per axis");
    }
    if (!(geom.spacing > 0.0)) {
        throw std::invalid_argument("element spacing must be positive");
    }
    if (!(range > 0.0) || bits < 1) {
        throw std::invalid_argument("direction range must be positive and bits at least 1");
    }

    // Worst-case sine-domain offset after quantizing each direction
    // coordinate with `bits` bits over a span of `range`.
    const double delta_max = range * std::pow(2.0, -static_cast<double>(bits));

    KSquaredBound out;
    if (geom.kind == ArrayKind::Ula) {
        out.bound = axis_quadratic_floor(geom.m1, geom.spacing, delta_max);
        out.taylor_valid = axis_floor_valid(geom.m1, geom.spacing, delta_max);
    } else {
        // The planar steering vector factors across axes, so the squared
        // correlation is the product of the per-axis squared patterns and
        // the floor is the product of the per-axis floors.
        out.bound = axis_quadratic_floor(geom.m1, geom.spacing, delta_max) *
                    axis_quadratic_floor(geom.m2, geom.spacing, delta_max);
        out.taylor_valid = axis_floor_valid(geom.m1, geom.spacing, delta_max) &&
                           axis_floor_valid(geom.m2, geom.spacing, delta_max);
    }
    out.beta = 1.0 - out.bound;
    return out;
}

double quantization_error_bound(double bits, int paths, double beta) {
    if (paths < 2) {
        throw std::invalid_argument("subspace quantization needs at least two paths");
    }
    if (bits < 0.0 || !std::isfinite(bits)) {
        throw std::invalid_argument("bit count must be non-negative and finite");
    }
    if (beta < 0.0 || beta > 1.0) {
        throw std::invalid_argument("basis mismatch fraction must lie in [0, 1]");
    }
    const double residual = std::pow(2.0, -bits / static_cast<double>(paths - 1));
    return beta + (1.0 - beta) * residual;
}

double required_feedback_bits(int paths, double snr_db, int users, double alpha, double b) {
    if (paths < 2) {
        throw std::invalid_argument("subspace quantization needs at least two paths");
    }
    if (users < 2) {
        throw std::invalid_argument("rate-gap budget needs at least two users");
    }
    if (!(alpha > 0.0)) {
        throw std::invalid_argument("leakage factor must be positive");
    }
    if (!(b > 1.0)) {
        throw std::invalid_argument("gap target factor must exceed 1");
    }
    const double dims = static_cast<double>(paths - 1);
    return dims / 3.0 * snr_db +
           dims * std::log2(static_cast<double>(users - 1) * alpha / (b - 1.0));
}

double rate_gap_quantized_bound(int users, double gamma, double mean_h2, double alpha,
                                double bits, int paths, double beta) {
    if (users < 1 || !(gamma > 0.0) || !(mean_h2 > 0.0) || !(alpha > 0.0)) {
        throw std::invalid_argument("rate-gap bound needs positive load parameters");
    }
    const double err = quantization_error_bound(bits, paths, beta);
    const double load = static_cast<double>(users - 1) *
                        (gamma / static_cast<double>(users)) * mean_h2 * alpha * err;
    return std::log2(1.0 + load);
}

double rate_gap_analog_bound(int users, double gamma, double mu, double gamma_ul) {
    if (users < 1 || !(gamma > 0.0) || !(mu > 0.0) || gamma_ul < 0.0) {
        throw std::invalid_argument("analog rate-gap bound needs positive parameters");
    }
    const double load = static_cast<double>(users - 1) *
                        (gamma / static_cast<double>(users)) / (1.0 + mu * gamma_ul);
    return std::log2(1.0 + load);
}

double rate_gap_quantized_budget_bound(double gamma, int paths, double mu, double gamma_ul) {
    if (!(gamma > 0.0) || paths < 2 || !(mu > 0.0) || gamma_ul < 0.0) {
        throw std::invalid_argument("budget rate-gap bound needs positive parameters");
    }
    const double ratio = static_cast<double>(paths) / static_cast<double>(paths - 1);
    return std::log2(1.0 + gamma * ratio * std::pow(1.0 + gamma_ul, -mu * ratio));
}

double cross_leakage_mc(int paths, int trials, Rng& rng) {
    if (paths < 2) {
        throw std::invalid_argument("cross leakage needs at least two paths");
    }
    if (trials < 1) {
        throw std::invalid_argument("trial count must be positive");
    }
    if (paths == 2) {
        // The orthogonal complement of a direction in a two-dimensional
        // space is one-dimensional, so both unit vectors coincide up to
        // phase and every sample equals 1 exactly.
        return 1.0;
    }

    const auto draw = [&rng](int dim) {
        Eigen::VectorXcd v(dim);
        for (int i = 0; i < dim; ++i) {
            v(i) = rng.cnormal();
        }
        return v;
    };

    double acc = 0.0;
    for (int t = 0; t < trials; ++t) {
        Eigen::VectorXcd w = draw(paths);
        w.normalize();
        // Project two isotropic draws onto the complement of w and
        // renormalize; the squared inner product of the results is the
        // leakage of one random complement direction onto another.
        Eigen::VectorXcd a = draw(paths);
        a -= w * w.dot(a);
        a.normalize();
        Eigen::VectorXcd b = draw(paths);
        b -= w * w.dot(b);
        b.normalize();
        acc += std::norm(a.dot(b));
    }
    return acc / static_cast<double>(trials);
}

} // namespace mimofb
