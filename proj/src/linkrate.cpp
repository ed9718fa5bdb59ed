// SPDX-License-Identifier: Apache-2.0
//
// Link-level rate evaluation for multiuser downlink precoding with limited
// feedback.
//
// A trial draws per-user multipath channels, reconstructs each channel from
// its feedback (codebook index plus magnitude, or analog gain estimates),
// applies zero forcing to the reconstructions, and scores the resulting
// per-user rates on the true channels.

#include "mimofb/linkrate.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace mimofb {

Eigen::MatrixXcd zf_precoder(const Eigen::MatrixXcd& h_fb) {
    const Eigen::Index m = h_fb.rows();
    const Eigen::Index users = h_fb.cols();
    if (users < 1 || m < users) {
        throw std::invalid_argument("need at least as many antennas as users");
    }
    const Eigen::MatrixXcd gram = h_fb.adjoint() * h_fb;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
    const Eigen::VectorXd ev = eig.eigenvalues(); // ascending
    const double lo = ev(0);
    const double hi = ev(ev.size() - 1);
    if (!(lo > 0.0) || hi / lo > 1e12) {
        throw std::domain_error("feedback channels are rank deficient; cannot zero-force");
    }
    // H (H^H H)^-1 through the eigendecomposition of the Gram matrix, then
    // unit-power columns.
    const Eigen::MatrixXcd inv = eig.eigenvectors() * ev.cwiseInverse().asDiagonal() *
                                 eig.eigenvectors().adjoint();
    Eigen::MatrixXcd v = h_fb * inv;
    for (Eigen::Index u = 0; u < users; ++u) {
        v.col(u) /= v.col(u).norm();
    }
    return v;
}

RateSample evaluate_rates(const Eigen::MatrixXcd& channels, const Eigen::MatrixXcd& precoder,
                          double gamma) {
    const Eigen::Index users = channels.cols();
    if (users < 1 || precoder.cols() != users || precoder.rows() != channels.rows()) {
        throw std::invalid_argument("channel and precoder shapes disagree");
    }
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("downlink SNR must be positive");
    }
    const double share = gamma / static_cast<double>(users);
    const Eigen::MatrixXd links = (channels.adjoint() * precoder).cwiseAbs2();
    RateSample out;
    out.per_user.resize(users);
    for (Eigen::Index u = 0; u < users; ++u) {
        const double signal = links(u, u);
        const double interference = links.row(u).sum() - signal;
        const double sinr = share * signal / (1.0 + share * interference);
        out.per_user(u) = std::log2(1.0 + sinr);
    }
    out.mean = out.per_user.mean();
    return out;
}

AnalogFeedbackOutcome analog_feedback(const Eigen::VectorXcd& gains, double mu, double gamma_ul,
                                      Rng& rng) {
    if (gains.size() < 1) {
        throw std::invalid_argument("need at least one gain to feed back");
    }
    if (!(mu > 0.0) || gamma_ul < 0.0) {
        throw std::invalid_argument("uplink resources must be positive");
    }
    // Observation sqrt(mu * gamma_ul) * g + n per gain, unit noise variance.
    // The per-gain linear MMSE estimate is sqrt(mu * gamma_ul) * y / (1 + mu * gamma_ul).
    const double energy = mu * gamma_ul;
    const double amp = std::sqrt(energy);
    const double shrink = amp / (1.0 + energy);
    AnalogFeedbackOutcome out;
    out.gain_estimate.resize(gains.size());
    for (Eigen::Index p = 0; p < gains.size(); ++p) {
        const std::complex<double> obs = amp * gains(p) + rng.cnormal();
        out.gain_estimate(p) = shrink * obs;
    }
    out.error_variance = 1.0 / (1.0 + energy);
    out.mu = mu;
    out.gamma_ul = gamma_ul;
    return out;
}

namespace {

struct DrawnChannels {
    std::vector<PathSet> paths;
    std::vector<Eigen::MatrixXcd> steering;
    Eigen::MatrixXcd h; // true channels, one column per user
};

// Draws every user's path set and channel from one substream, in user order,
// so equally seeded trials of any scheme share the realization.
DrawnChannels draw_channels(const ArrayGeometry& geom, int users, int paths, double floor,
                            Rng& channel_rng) {
    DrawnChannels out;
    out.paths.reserve(static_cast<std::size_t>(users));
    out.steering.reserve(static_cast<std::size_t>(users));
    out.h.resize(geom.size(), users);
    for (int u = 0; u < users; ++u) {
        PathSet ps = draw_path_set(geom, paths, floor, channel_rng);
        Eigen::MatrixXcd a = steering_matrix(geom, ps);
        out.h.col(u) = synthesize_channel(a, ps.gain);
        out.paths.push_back(std::move(ps));
        out.steering.push_back(std::move(a));
    }
    return out;
}

double resolve_floor(const ArrayGeometry& geom, double requested) {
    return requested < 0.0 ? default_separation_floor(geom) : requested;
}

// The feedback basis: steering matrix at the directions the receiver
// reports, which may be exact, estimated from snapshots, and/or quantized.
Eigen::MatrixXcd feedback_basis(const QuantizedTrialConfig& config, const DrawnChannels& drawn,
                                int user, Rng& snapshot_rng) {
    AodEstimate est;
    if (config.aod == AodKnowledge::Exact) {
        est.azimuth = drawn.paths[static_cast<std::size_t>(user)].azimuth;
        est.elevation = drawn.paths[static_cast<std::size_t>(user)].elevation;
        est.complete = true;
    } else {
        // Fresh gain draws per snapshot over the same departure directions.
        const Eigen::MatrixXcd& a = drawn.steering[static_cast<std::size_t>(user)];
        Eigen::MatrixXcd snaps(config.geometry.size(), config.snapshots);
        for (int s = 0; s < config.snapshots; ++s) {
            snaps.col(s) = synthesize_channel(a, draw_gains(config.paths, snapshot_rng));
        }
        est = estimate_aods(sample_covariance(snaps), config.geometry, config.paths,
                            config.grid_step);
    }
    if (config.aod_bits > 0) {
        est = quantize_aods(est, config.aod_bits);
    }
    PathSet reported;
    reported.azimuth = est.azimuth;
    reported.elevation = est.elevation;
    reported.gain = Eigen::VectorXcd::Ones(est.azimuth.size());
    return steering_matrix(config.geometry, reported);
}

} // namespace

QuantizedTrialResult run_quantized_trial(const QuantizedTrialConfig& config, Rng& rng) {
    if (config.users < 1 || config.paths < 1) {
        throw std::invalid_argument("users and paths must be positive");
    }
    if (config.geometry.size() < config.users) {
        throw std::invalid_argument("need at least as many antennas as users");
    }
    if (config.bits < 0 || config.bits > kMaxCodebookBits) {
        throw std::invalid_argument("feedback bits out of range");
    }
    if (config.scheme == CodebookScheme::SubspaceLloyd && config.inner_shared == nullptr) {
        throw std::invalid_argument("trained subspace feedback needs a shared inner codebook");
    }
    if (config.scheme == CodebookScheme::RotatedStatistics && config.full_shared == nullptr) {
        throw std::invalid_argument("statistics-rotated feedback needs a shared codebook");
    }
    if (config.inner_shared != nullptr && config.inner_shared->dim() != config.paths) {
        throw std::invalid_argument("shared inner codebook dimension must equal the path count");
    }
    if (config.full_shared != nullptr && config.full_shared->dim() != config.geometry.size()) {
        throw std::invalid_argument("shared codebook dimension must equal the array size");
    }

    // Fixed substream order: channel, codebook, snapshots.  All three seeds
    // are always consumed so schemes stay aligned.
    Rng channel_rng(rng.raw());
    Rng codebook_rng(rng.raw());
    Rng snapshot_rng(rng.raw());

    const double floor = resolve_floor(config.geometry, config.separation_floor);
    const DrawnChannels drawn =
        draw_channels(config.geometry, config.users, config.paths, floor, channel_rng);

    QuantizedTrialResult result;
    try {
        result.ideal = evaluate_rates(drawn.h, zf_precoder(drawn.h), config.gamma);
    } catch (const std::domain_error&) {
        result.discarded = true;
        return result;
    }

    const bool subspace_scheme = config.scheme == CodebookScheme::SubspaceRvq ||
                                 config.scheme == CodebookScheme::SubspaceLloyd;

    // Per-trial codebook draws happen exactly once, before any per-user
    // work, so the substream stays aligned across configurations that share
    // a seed.
    Eigen::MatrixXcd inner_words;
    Codebook full_book;
    const Codebook* full = config.full_shared;
    if (subspace_scheme) {
        if (config.inner_shared != nullptr) {
            inner_words = config.inner_shared->vectors;
        } else {
            inner_words = isotropic_unit_vectors(config.paths, Eigen::Index(1) << config.bits,
                                                 codebook_rng);
        }
    } else if (config.scheme == CodebookScheme::RvqFull && full == nullptr) {
        full_book = build_rvq(config.geometry.size(), config.bits, codebook_rng);
        full = &full_book;
    }

    Eigen::MatrixXcd reconstructed(config.geometry.size(), config.users);
    double chordal_sum = 0.0;
    for (int u = 0; u < config.users; ++u) {
        QuantizeOutcome out;
        if (subspace_scheme) {
            Eigen::MatrixXcd basis;
            try {
                basis = feedback_basis(config, drawn, u, snapshot_rng);
            } catch (const std::runtime_error&) {
                // Direction estimation found no usable spectrum; the trial
                // cannot report feedback, so it is discarded.
                result.discarded = true;
                return result;
            }
            SubspaceQuantizer quantizer(basis, inner_words);
            out = quantizer.quantize(drawn.h.col(u));
            reconstructed.col(u) = out.magnitude * quantizer.codeword(out.index);
        } else {
            out = quantize(drawn.h.col(u), *full);
            reconstructed.col(u) = out.magnitude * full->vectors.col(out.index);
        }
        chordal_sum += out.chordal_error;
    }
    result.mean_chordal_error = chordal_sum / static_cast<double>(config.users);

    try {
        result.quantized = evaluate_rates(drawn.h, zf_precoder(reconstructed), config.gamma);
    } catch (const std::domain_error&) {
        result.discarded = true;
        return result;
    }
    return result;
}

AnalogTrialResult run_analog_trial(const AnalogTrialConfig& config, Rng& rng) {
    if (config.users < 1 || config.paths < 1) {
        throw std::invalid_argument("users and paths must be positive");
    }
    if (config.geometry.size() < config.users) {
        throw std::invalid_argument("need at least as many antennas as users");
    }

    // Substream order: channel, uplink noise.  The channel substream is
    // consumed exactly like the quantized trial's, so equal seeds pair the
    // two trial kinds on the same realization.
    Rng channel_rng(rng.raw());
    Rng noise_rng(rng.raw());

    const double floor = resolve_floor(config.geometry, config.separation_floor);
    const DrawnChannels drawn =
        draw_channels(config.geometry, config.users, config.paths, floor, channel_rng);

    AnalogTrialResult result;
    try {
        result.ideal = evaluate_rates(drawn.h, zf_precoder(drawn.h), config.gamma);
    } catch (const std::domain_error&) {
        result.discarded = true;
        return result;
    }

    Eigen::MatrixXcd reconstructed(config.geometry.size(), config.users);
    for (int u = 0; u < config.users; ++u) {
        const auto fb = analog_feedback(drawn.paths[static_cast<std::size_t>(u)].gain, config.mu,
                                        config.gamma_ul, noise_rng);
        reconstructed.col(u) =
            synthesize_channel(drawn.steering[static_cast<std::size_t>(u)], fb.gain_estimate);
    }

    try {
        result.analog = evaluate_rates(drawn.h, zf_precoder(reconstructed), config.gamma);
    } catch (const std::domain_error&) {
        result.discarded = true;
        return result;
    }
    return result;
}

} // namespace mimofb
