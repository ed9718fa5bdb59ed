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
// Sweep orchestration: presets, config files, the parallel Monte Carlo
// driver, and CSV serialization. Determinism contract: every trial owns a
// generator seeded by hash(master seed, sweep index, trial index), shared
// codebooks are built before trials are dispatched, and reductions run
// serially in trial order, so the output bytes depend only on the resolved
// spec and never on scheduling.

#include "mimofb/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mimofb/bounds.hpp"
#include "mimofb/version.hpp"

namespace mimofb {

namespace {

// ---------------------------------------------------------------------
// Formatting and small string helpers.

std::string format_double(double v) {
    char buffer[64];
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    return buffer;
}

std::string trim(const std::string& s) {
    std::size_t lo = 0;
    std::size_t hi = s.size();
    while (lo < hi && std::isspace(static_cast<unsigned char>(s[lo]))) ++lo;
    while (hi > lo && std::isspace(static_cast<unsigned char>(s[hi - 1]))) --hi;
    return s.substr(lo, hi - lo);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
            if (!cur.empty()) {
                out.push_back(cur);
                cur.clear();
            }
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        double v = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("invalid numeric value for key " + key + ": " + value);
    }
}

long long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("invalid integer value for key " + key + ": " + value);
    }
}

std::uint64_t parse_uint(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        unsigned long long v = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw std::runtime_error("invalid integer value for key " + key + ": " + value);
    }
}

const char* scheme_name(CodebookScheme scheme) {
    switch (scheme) {
        case CodebookScheme::SubspaceRvq: return "subspace_rvq";
        case CodebookScheme::SubspaceLloyd: return "subspace_lloyd";
        case CodebookScheme::RvqFull: return "rvq";
        case CodebookScheme::RotatedStatistics: return "rotated";
    }
    return "unknown";
}

CodebookScheme scheme_from_name(const std::string& name) {
    if (name == "subspace_rvq") return CodebookScheme::SubspaceRvq;
    if (name == "subspace_lloyd") return CodebookScheme::SubspaceLloyd;
    if (name == "rvq") return CodebookScheme::RvqFull;
    if (name == "rotated") return CodebookScheme::RotatedStatistics;
    throw std::runtime_error("unknown scheme: " + name +
                             " (expected subspace_rvq, subspace_lloyd, rvq, or rotated)");
}

// ---------------------------------------------------------------------
// Monte Carlo driver.

// Runs body(t) for every trial index, fanning out over `threads` workers
// through an atomic ticket counter. The body writes into caller-owned
// per-trial slots, so scheduling cannot influence the result.
void parallel_trials(int trials, int threads, const std::function<void(int)>& body) {
    if (threads <= 1 || trials <= 1) {
        for (int t = 0; t < trials; ++t) body(t);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const int t = next.fetch_add(1);
            if (t >= trials) return;
            try {
                body(t);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int workers = std::min(threads, trials);
    pool.reserve(static_cast<std::size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

// Streaming mean and standard error over the used (non-discarded) trials.
// Accumulation happens serially in trial order for bitwise reproducibility.
// An accumulator that received no samples reports NaN, never a silent zero.
struct Accumulator {
    double sum = 0.0;
    double sum_sq = 0.0;
    long n = 0;

    void add(double x) {
        sum += x;
        sum_sq += x * x;
        ++n;
    }
    double mean() const {
        return n > 0 ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN();
    }
    double se() const {
        if (n < 1) return std::numeric_limits<double>::quiet_NaN();
        const double m = mean();
        const double var = std::max(0.0, sum_sq / static_cast<double>(n) - m * m);
        return std::sqrt(var / static_cast<double>(n));
    }
};

// Seed-stream tags keep independent draws (trials, codebook builds,
// codebook training) on disjoint substreams of the master seed.
constexpr std::uint64_t kBookStream = 0xB00Cu;
constexpr std::uint64_t kTrainStream = 0x7EA1u;

// Codebooks with more than this many exponent bits are drawn once per sweep
// point instead of once per trial: the draw itself would otherwise dominate
// the trial cost, and at these sizes the distortion of a random codebook
// concentrates tightly enough that trial-to-trial codebook variation is
// statistically negligible.
constexpr int kSharedInnerBits = 10;

double snr_to_gamma(double snr_db, int users, int paths) {
    // Total transmit SNR chosen so that the per-user receive SNR equals the
    // sweep value under the ensemble mean channel power E||h||^2 = paths.
    return static_cast<double>(users) * std::pow(10.0, snr_db / 10.0) /
           static_cast<double>(paths);
}

int snr_matched_bits(int paths, double snr_db) {
    const double raw = (static_cast<double>(paths) - 1.0) / 3.0 * snr_db;
    const int bits = static_cast<int>(std::ceil(raw));
    return std::clamp(bits, 0, kMaxCodebookBits);
}

QuantizedTrialConfig base_quantized_config(const RunSpec& spec) {
    QuantizedTrialConfig cfg;
    cfg.geometry = spec.geometry;
    cfg.users = spec.users;
    cfg.paths = spec.paths;
    cfg.separation_floor = spec.separation_floor;
    cfg.scheme = spec.scheme;
    cfg.aod = spec.aod;
    cfg.snapshots = spec.snapshots;
    cfg.grid_step = spec.grid_step;
    cfg.aod_bits = spec.aod_bits;
    return cfg;
}

// Shared per-point codebook storage. The pointers (when set) go into
// QuantizedTrialConfig::inner_shared / full_shared.
struct PointBooks {
    Codebook inner;
    Codebook full;
    bool has_inner = false;
    bool has_full = false;
};

// Builds whatever shared codebook the scheme needs at this sweep point.
// `correlation` is only consulted for the statistics-rotated scheme.
PointBooks build_point_books(const RunSpec& spec, CodebookScheme scheme, int bits,
                             std::size_t point, const Eigen::MatrixXcd* correlation) {
    PointBooks books;
    Rng book_rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(point), kBookStream,
                                         static_cast<std::uint64_t>(bits)}));
    switch (scheme) {
        case CodebookScheme::SubspaceRvq:
            if (bits > kSharedInnerBits) {
                books.inner.vectors =
                    isotropic_unit_vectors(spec.paths, Eigen::Index(1) << bits, book_rng);
                books.inner.bits = bits;
                books.inner.kind = CodebookKind::Rvq;
                books.has_inner = true;
            }
            break;
        case CodebookScheme::SubspaceLloyd: {
            Rng train_rng(derive_seed(spec.seed, {static_cast<std::uint64_t>(point), kTrainStream,
                                                  static_cast<std::uint64_t>(bits)}));
            const Eigen::Index words = Eigen::Index(1) << bits;
            const Eigen::Index samples =
                std::min<Eigen::Index>(std::max<Eigen::Index>(32 * words, 1024), 32768);
            Eigen::MatrixXcd training = isotropic_unit_vectors(spec.paths, samples, train_rng);
            LloydOptions opts;
            opts.max_iters = 20;
            opts.rel_tol = 1e-3;
            opts.min_training_per_word = 8;
            books.inner = build_lloyd_inner(spec.paths, bits, training, train_rng, opts);
            books.has_inner = true;
            break;
        }
        case CodebookScheme::RvqFull:
            if (bits > kSharedInnerBits) {
                books.full = build_rvq(spec.geometry.size(), bits, book_rng);
                books.has_full = true;
            }
            break;
        case CodebookScheme::RotatedStatistics:
            books.full = build_rotated_statistics(*correlation, bits, book_rng);
            books.has_full = true;
            break;
    }
    return books;
}

void attach_books(QuantizedTrialConfig& cfg, const PointBooks& books) {
    cfg.inner_shared = books.has_inner ? &books.inner : nullptr;
    cfg.full_shared = books.has_full ? &books.full : nullptr;
}

// ---------------------------------------------------------------------
// Preset sweeps. Each one runs paired trials (equal per-trial seeds, so
// every arm sees the same channel realization), reduces serially, and emits
// one row per sweep point. Every arm's rate column averages that arm's own
// valid trials, so one arm's rank-deficient discards cannot starve the
// other's estimate; cross-arm differences use only trials valid in both
// arms. The `trials`/`discarded` columns describe the headline statistic of
// the sweep (the gap or the paired difference).

struct PairedTrialOut {
    double ideal = 0.0;
    double a = 0.0;
    double b = 0.0;
    bool a_discarded = false;
    bool b_discarded = false;
};

// Rate-vs-SNR study with the SNR-matched bit rule: the aligned codebook and
// the statistics-rotated baseline ride the same channels at every point.
void run_snr_pair_sweep(const RunSpec& spec, int threads, bool rotated_arm, int fixed_sub_bits,
                        int fixed_rot_bits, ExperimentResult& out) {
    const bool fig7_style = fixed_sub_bits >= 0;
    out.columns = fig7_style
                      ? std::vector<std::string>{"snr_db", "rate_ideal", "rate_subspace",
                                                 "rate_rotated", "diff", "diff_se", "trials",
                                                 "discarded"}
                      : std::vector<std::string>{"snr_db", "bits", "rate_ideal", "rate_subspace",
                                                 "rate_rotated", "gap", "gap_se", "gap_bound",
                                                 "trials", "discarded"};
    Eigen::MatrixXcd correlation;
    if (rotated_arm) correlation = prior_correlation(spec.geometry);

    for (std::size_t point = 0; point < spec.snr_db.size(); ++point) {
        const double snr = spec.snr_db[point];
        const double gamma = snr_to_gamma(snr, spec.users, spec.paths);
        const int sub_bits =
            fig7_style ? fixed_sub_bits
                       : (spec.bits >= 0 ? spec.bits : snr_matched_bits(spec.paths, snr));
        const int rot_bits = fig7_style ? fixed_rot_bits : sub_bits;

        QuantizedTrialConfig sub_cfg = base_quantized_config(spec);
        sub_cfg.scheme = CodebookScheme::SubspaceRvq;
        sub_cfg.gamma = gamma;
        sub_cfg.bits = sub_bits;
        PointBooks sub_books =
            build_point_books(spec, CodebookScheme::SubspaceRvq, sub_bits, point, nullptr);
        attach_books(sub_cfg, sub_books);

        QuantizedTrialConfig rot_cfg = base_quantized_config(spec);
        rot_cfg.scheme = CodebookScheme::RotatedStatistics;
        rot_cfg.gamma = gamma;
        rot_cfg.bits = rot_bits;
        rot_cfg.aod = AodKnowledge::Exact;  // baseline needs no direction feedback
        rot_cfg.aod_bits = 0;
        PointBooks rot_books;
        if (rotated_arm) {
            rot_books = build_point_books(spec, CodebookScheme::RotatedStatistics, rot_bits,
                                          point, &correlation);
            attach_books(rot_cfg, rot_books);
        }

        std::vector<PairedTrialOut> slots(static_cast<std::size_t>(spec.trials));
        parallel_trials(spec.trials, threads, [&](int t) {
            const std::uint64_t trial_seed = derive_seed(
                spec.seed, {static_cast<std::uint64_t>(point), static_cast<std::uint64_t>(t)});
            Rng sub_rng(trial_seed);
            const QuantizedTrialResult sub = run_quantized_trial(sub_cfg, sub_rng);
            PairedTrialOut slot;
            slot.ideal = sub.ideal.mean;
            slot.a = sub.quantized.mean;
            slot.a_discarded = sub.discarded;
            if (rotated_arm) {
                Rng rot_rng(trial_seed);
                const QuantizedTrialResult rot = run_quantized_trial(rot_cfg, rot_rng);
                slot.b = rot.quantized.mean;
                slot.b_discarded = rot.discarded;
            }
            slots[static_cast<std::size_t>(t)] = slot;
        });

        Accumulator ideal, sub_rate, rot_rate, head;
        for (const PairedTrialOut& s : slots) {
            if (!s.a_discarded) {
                ideal.add(s.ideal);
                sub_rate.add(s.a);
                if (!fig7_style) head.add(s.ideal - s.a);
            }
            if (rotated_arm && !s.b_discarded) rot_rate.add(s.b);
            if (fig7_style && !s.a_discarded && !s.b_discarded) head.add(s.a - s.b);
        }
        const long discarded = spec.trials - head.n;

        if (fig7_style) {
            out.rows.push_back({snr, ideal.mean(), sub_rate.mean(), rot_rate.mean(), head.mean(),
                                head.se(), static_cast<double>(head.n),
                                static_cast<double>(discarded)});
        } else {
            const double bound =
                rate_gap_quantized_bound(spec.users, gamma, static_cast<double>(spec.paths),
                                         1.0 / (static_cast<double>(spec.paths) - 1.0),
                                         static_cast<double>(sub_bits), spec.paths, 0.0);
            out.rows.push_back({snr, static_cast<double>(sub_bits), ideal.mean(), sub_rate.mean(),
                                rot_rate.mean(), head.mean(), head.se(), bound,
                                static_cast<double>(head.n), static_cast<double>(discarded)});
        }
    }
}

// Bits required to hold the rate gap at `target` for one path count:
// geometric bracketing then bisection over the integer exponent, reusing
// per-trial seeds so every probe rides the same channel set.
struct BitSearchOutcome {
    double required = std::numeric_limits<double>::quiet_NaN();
    double gap = std::numeric_limits<double>::quiet_NaN();
    double gap_se = 0.0;
    long used = 0;
    long discarded = 0;
};

BitSearchOutcome search_required_bits(const RunSpec& spec, int threads, int paths,
                                      std::size_t point) {
    const double gamma = snr_to_gamma(spec.snr_db_fixed, spec.users, paths);

    struct ProbeOut {
        double gap = 0.0;
        double se = 0.0;
        long used = 0;
        long discarded = 0;
    };
    std::map<int, ProbeOut> cache;

    auto probe = [&](int bits) -> const ProbeOut& {
        auto it = cache.find(bits);
        if (it != cache.end()) return it->second;

        QuantizedTrialConfig cfg = base_quantized_config(spec);
        cfg.paths = paths;
        cfg.scheme = CodebookScheme::SubspaceRvq;
        cfg.gamma = gamma;
        cfg.bits = bits;
        RunSpec book_spec = spec;
        book_spec.paths = paths;
        PointBooks books =
            build_point_books(book_spec, CodebookScheme::SubspaceRvq, bits, point, nullptr);
        attach_books(cfg, books);

        std::vector<PairedTrialOut> slots(static_cast<std::size_t>(spec.trials));
        parallel_trials(spec.trials, threads, [&](int t) {
            const std::uint64_t trial_seed = derive_seed(
                spec.seed, {static_cast<std::uint64_t>(point), static_cast<std::uint64_t>(t)});
            Rng rng(trial_seed);
            const QuantizedTrialResult res = run_quantized_trial(cfg, rng);
            PairedTrialOut slot;
            slot.ideal = res.ideal.mean;
            slot.a = res.quantized.mean;
            slot.a_discarded = res.discarded;
            slots[static_cast<std::size_t>(t)] = slot;
        });

        Accumulator gap;
        long discarded = 0;
        for (const PairedTrialOut& s : slots) {
            if (s.a_discarded) {
                ++discarded;
                continue;
            }
            gap.add(s.ideal - s.a);
        }
        ProbeOut outp{gap.mean(), gap.se(), gap.n, discarded};
        return cache.emplace(bits, outp).first->second;
    };

    // Bracket geometrically from 1 bit, capped at the largest supported
    // codebook; a target unreachable at the cap reports NaN.
    int lo = 0;
    int hi = 1;
    for (;;) {
        const ProbeOut& p = probe(hi);
        if (p.used > 0 && p.gap <= spec.target_gap) break;
        lo = hi;
        if (hi >= kMaxCodebookBits) return {};
        hi = std::min(hi * 2, kMaxCodebookBits);
    }
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        const ProbeOut& p = probe(mid);
        if (p.used > 0 && p.gap <= spec.target_gap) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    const ProbeOut& final_probe = probe(hi);
    BitSearchOutcome outcome;
    outcome.required = static_cast<double>(hi);
    outcome.gap = final_probe.gap;
    outcome.gap_se = final_probe.se;
    outcome.used = final_probe.used;
    outcome.discarded = final_probe.discarded;
    return outcome;
}

void run_bit_scaling_sweep(const RunSpec& spec, int threads, ExperimentResult& out) {
    out.columns = {"paths",        "required_bits_theory", "required_bits_empirical",
                   "gap_measured", "gap_se",               "trials",
                   "discarded"};
    const double b = std::exp2(spec.target_gap);
    for (std::size_t point = 0; point < spec.paths_list.size(); ++point) {
        const int paths = spec.paths_list[point];
        const double alpha = 1.0 / (static_cast<double>(paths) - 1.0);
        const double theory =
            required_feedback_bits(paths, spec.snr_db_fixed, spec.users, alpha, b);
        const BitSearchOutcome found = search_required_bits(spec, threads, paths, point);
        out.rows.push_back({static_cast<double>(paths), theory, found.required, found.gap,
                            found.gap_se, static_cast<double>(found.used),
                            static_cast<double>(found.discarded)});
    }
}

// Trained-vs-random inner codebook comparison on shared channels.
void run_inner_training_sweep(const RunSpec& spec, int threads, ExperimentResult& out) {
    out.columns = {"snr_db", "bits",    "rate_ideal", "rate_rvq", "rate_lloyd",
                   "diff",   "diff_se", "trials",     "discarded"};
    for (std::size_t point = 0; point < spec.snr_db.size(); ++point) {
        const double snr = spec.snr_db[point];
        const double gamma = snr_to_gamma(snr, spec.users, spec.paths);
        const int bits = spec.bits >= 0 ? spec.bits : snr_matched_bits(spec.paths, snr);

        QuantizedTrialConfig rvq_cfg = base_quantized_config(spec);
        rvq_cfg.scheme = CodebookScheme::SubspaceRvq;
        rvq_cfg.gamma = gamma;
        rvq_cfg.bits = bits;
        PointBooks rvq_books =
            build_point_books(spec, CodebookScheme::SubspaceRvq, bits, point, nullptr);
        attach_books(rvq_cfg, rvq_books);

        QuantizedTrialConfig lloyd_cfg = rvq_cfg;
        lloyd_cfg.scheme = CodebookScheme::SubspaceLloyd;
        PointBooks lloyd_books =
            build_point_books(spec, CodebookScheme::SubspaceLloyd, bits, point, nullptr);
        attach_books(lloyd_cfg, lloyd_books);

        std::vector<PairedTrialOut> slots(static_cast<std::size_t>(spec.trials));
        parallel_trials(spec.trials, threads, [&](int t) {
            const std::uint64_t trial_seed = derive_seed(
                spec.seed, {static_cast<std::uint64_t>(point), static_cast<std::uint64_t>(t)});
            Rng rvq_rng(trial_seed);
            const QuantizedTrialResult rvq = run_quantized_trial(rvq_cfg, rvq_rng);
            Rng lloyd_rng(trial_seed);
            const QuantizedTrialResult lloyd = run_quantized_trial(lloyd_cfg, lloyd_rng);
            PairedTrialOut slot;
            slot.ideal = rvq.ideal.mean;
            slot.a = rvq.quantized.mean;
            slot.b = lloyd.quantized.mean;
            slot.a_discarded = rvq.discarded || lloyd.discarded;
            slots[static_cast<std::size_t>(t)] = slot;
        });

        Accumulator ideal, rvq_rate, lloyd_rate, diff;
        long discarded = 0;
        for (const PairedTrialOut& s : slots) {
            if (s.a_discarded) {
                ++discarded;
                continue;
            }
            ideal.add(s.ideal);
            rvq_rate.add(s.a);
            lloyd_rate.add(s.b);
            diff.add(s.b - s.a);
        }
        out.rows.push_back({snr, static_cast<double>(bits), ideal.mean(), rvq_rate.mean(),
                            lloyd_rate.mean(), diff.mean(), diff.se(),
                            static_cast<double>(diff.n), static_cast<double>(discarded)});
    }
}

// Direction-quantizer resolution sweep: the quantized-direction arm against
// the exact-direction arm on shared channels and shared inner draws.
void run_direction_resolution_sweep(const RunSpec& spec, int threads, ExperimentResult& out) {
    out.columns = {"b0",   "rate",    "rate_se", "rate_exact_aod", "rate_exact_aod_se",
                   "diff", "diff_se", "trials",  "discarded"};
    const double gamma = snr_to_gamma(spec.snr_db_fixed, spec.users, spec.paths);
    const int bits = spec.bits >= 0 ? spec.bits : snr_matched_bits(spec.paths, spec.snr_db_fixed);

    for (std::size_t point = 0; point < spec.b0_bits.size(); ++point) {
        const int b0 = spec.b0_bits[point];

        QuantizedTrialConfig quant_cfg = base_quantized_config(spec);
        quant_cfg.scheme = CodebookScheme::SubspaceRvq;
        quant_cfg.gamma = gamma;
        quant_cfg.bits = bits;
        quant_cfg.aod_bits = b0;
        PointBooks books =
            build_point_books(spec, CodebookScheme::SubspaceRvq, bits, point, nullptr);
        attach_books(quant_cfg, books);

        QuantizedTrialConfig exact_cfg = quant_cfg;
        exact_cfg.aod_bits = 0;

        std::vector<PairedTrialOut> slots(static_cast<std::size_t>(spec.trials));
        parallel_trials(spec.trials, threads, [&](int t) {
            const std::uint64_t trial_seed = derive_seed(
                spec.seed, {static_cast<std::uint64_t>(point), static_cast<std::uint64_t>(t)});
            Rng quant_rng(trial_seed);
            const QuantizedTrialResult quant = run_quantized_trial(quant_cfg, quant_rng);
            Rng exact_rng(trial_seed);
            const QuantizedTrialResult exact = run_quantized_trial(exact_cfg, exact_rng);
            PairedTrialOut slot;
            slot.ideal = exact.ideal.mean;
            slot.a = quant.quantized.mean;
            slot.b = exact.quantized.mean;
            slot.a_discarded = quant.discarded || exact.discarded;
            slots[static_cast<std::size_t>(t)] = slot;
        });

        Accumulator quant_rate, exact_rate, diff;
        long discarded = 0;
        for (const PairedTrialOut& s : slots) {
            if (s.a_discarded) {
                ++discarded;
                continue;
            }
            quant_rate.add(s.a);
            exact_rate.add(s.b);
            diff.add(s.b - s.a);
        }
        out.rows.push_back({static_cast<double>(b0), quant_rate.mean(), quant_rate.se(),
                            exact_rate.mean(), exact_rate.se(), diff.mean(), diff.se(),
                            static_cast<double>(diff.n), static_cast<double>(discarded)});
    }
}

// Quantized-vs-analog gap comparison across (mu, gamma_ul) operating points
// at a fixed downlink SNR. The digital arm's bit budget matches the analog
// uplink usage: bits = ceil(mu * paths * log2(1 + gamma_ul)).
void run_analog_comparison_sweep(const RunSpec& spec, int threads, bool sweep_gamma,
                                 ExperimentResult& out) {
    out.columns = sweep_gamma
                      ? std::vector<std::string>{"mu", "gamma_ul", "bits", "gap_quantized",
                                                 "gap_quantized_se", "gap_analog",
                                                 "gap_analog_se", "diff", "diff_se", "trials",
                                                 "discarded"}
                      : std::vector<std::string>{"mu", "bits", "gap_quantized",
                                                 "gap_quantized_se", "gap_analog",
                                                 "gap_analog_se", "diff", "diff_se",
                                                 "bound_quantized", "bound_analog", "trials",
                                                 "discarded"};
    const double gamma = snr_to_gamma(spec.snr_db_fixed, spec.users, spec.paths);

    struct OperatingPoint {
        double mu;
        double gamma_ul;
    };
    std::vector<OperatingPoint> points;
    for (double mu : spec.mu)
        for (double g : spec.gamma_ul) points.push_back({mu, g});

    struct AnalogPairOut {
        double gap_q = 0.0;
        double gap_a = 0.0;
        bool discarded = false;
    };

    for (std::size_t point = 0; point < points.size(); ++point) {
        const double mu = points[point].mu;
        const double gamma_ul = points[point].gamma_ul;
        const int bits = std::clamp(
            static_cast<int>(std::ceil(mu * static_cast<double>(spec.paths) *
                                       std::log2(1.0 + gamma_ul))),
            0, kMaxCodebookBits);

        QuantizedTrialConfig quant_cfg = base_quantized_config(spec);
        quant_cfg.scheme = CodebookScheme::SubspaceRvq;
        quant_cfg.gamma = gamma;
        quant_cfg.bits = bits;
        PointBooks books =
            build_point_books(spec, CodebookScheme::SubspaceRvq, bits, point, nullptr);
        attach_books(quant_cfg, books);

        AnalogTrialConfig analog_cfg;
        analog_cfg.geometry = spec.geometry;
        analog_cfg.users = spec.users;
        analog_cfg.paths = spec.paths;
        analog_cfg.separation_floor = spec.separation_floor;
        analog_cfg.gamma = gamma;
        analog_cfg.mu = mu;
        analog_cfg.gamma_ul = gamma_ul;

        std::vector<AnalogPairOut> slots(static_cast<std::size_t>(spec.trials));
        parallel_trials(spec.trials, threads, [&](int t) {
            const std::uint64_t trial_seed = derive_seed(
                spec.seed, {static_cast<std::uint64_t>(point), static_cast<std::uint64_t>(t)});
            Rng quant_rng(trial_seed);
            const QuantizedTrialResult quant = run_quantized_trial(quant_cfg, quant_rng);
            Rng analog_rng(trial_seed);
            const AnalogTrialResult analog = run_analog_trial(analog_cfg, analog_rng);
            AnalogPairOut slot;
            slot.gap_q = quant.ideal.mean - quant.quantized.mean;
            slot.gap_a = analog.ideal.mean - analog.analog.mean;
            slot.discarded = quant.discarded || analog.discarded;
            slots[static_cast<std::size_t>(t)] = slot;
        });

        Accumulator gap_q, gap_a, diff;
        long discarded = 0;
        for (const AnalogPairOut& s : slots) {
            if (s.discarded) {
                ++discarded;
                continue;
            }
            gap_q.add(s.gap_q);
            gap_a.add(s.gap_a);
            diff.add(s.gap_q - s.gap_a);
        }

        if (sweep_gamma) {
            out.rows.push_back({mu, gamma_ul, static_cast<double>(bits), gap_q.mean(), gap_q.se(),
                                gap_a.mean(), gap_a.se(), diff.mean(), diff.se(),
                                static_cast<double>(diff.n), static_cast<double>(discarded)});
        } else {
            const double bound_q =
                rate_gap_quantized_budget_bound(gamma, spec.paths, mu, gamma_ul);
            const double bound_a = rate_gap_analog_bound(spec.users, gamma, mu, gamma_ul);
            out.rows.push_back({mu, static_cast<double>(bits), gap_q.mean(), gap_q.se(),
                                gap_a.mean(), gap_a.se(), diff.mean(), diff.se(), bound_q,
                                bound_a, static_cast<double>(diff.n),
                                static_cast<double>(discarded)});
        }
    }
}

// Single-scheme rate-vs-SNR sweep for custom runs.
void run_custom_sweep(const RunSpec& spec, int threads, ExperimentResult& out) {
    out.columns = {"snr_db", "bits",   "rate_ideal", "rate_quantized",
                   "gap",    "gap_se", "trials",     "discarded"};
    Eigen::MatrixXcd correlation;
    if (spec.scheme == CodebookScheme::RotatedStatistics)
        correlation = prior_correlation(spec.geometry);

    for (std::size_t point = 0; point < spec.snr_db.size(); ++point) {
        const double snr = spec.snr_db[point];
        const double gamma = snr_to_gamma(snr, spec.users, spec.paths);
        const int bits = spec.bits >= 0 ? spec.bits : snr_matched_bits(spec.paths, snr);

        QuantizedTrialConfig cfg = base_quantized_config(spec);
        cfg.gamma = gamma;
        cfg.bits = bits;
        PointBooks books = build_point_books(spec, spec.scheme, bits, point, &correlation);
        attach_books(cfg, books);

        std::vector<PairedTrialOut> slots(static_cast<std::size_t>(spec.trials));
        parallel_trials(spec.trials, threads, [&](int t) {
            const std::uint64_t trial_seed = derive_seed(
                spec.seed, {static_cast<std::uint64_t>(point), static_cast<std::uint64_t>(t)});
            Rng rng(trial_seed);
            const QuantizedTrialResult res = run_quantized_trial(cfg, rng);
            PairedTrialOut slot;
            slot.ideal = res.ideal.mean;
            slot.a = res.quantized.mean;
            slot.a_discarded = res.discarded;
            slots[static_cast<std::size_t>(t)] = slot;
        });

        Accumulator ideal, rate, gap;
        long discarded = 0;
        for (const PairedTrialOut& s : slots) {
            if (s.a_discarded) {
                ++discarded;
                continue;
            }
            ideal.add(s.ideal);
            rate.add(s.a);
            gap.add(s.ideal - s.a);
        }
        out.rows.push_back({snr, static_cast<double>(bits), ideal.mean(), rate.mean(),
                            gap.mean(), gap.se(), static_cast<double>(gap.n),
                            static_cast<double>(discarded)});
    }
}

std::vector<double> linear_grid(double lo, double hi, double step) {
    std::vector<double> out;
    for (double v = lo; v <= hi + 1e-9; v += step) out.push_back(v);
    return out;
}

void validate_spec(const RunSpec& spec) {
    if (spec.users < 1) throw std::invalid_argument("users must be positive");
    if (spec.paths < 1) throw std::invalid_argument("paths must be positive");
    if (spec.trials < 1) throw std::invalid_argument("trials must be positive");
    if (spec.geometry.size() < spec.users)
        throw std::invalid_argument("need at least as many antennas as users");
    if (spec.bits > kMaxCodebookBits)
        throw std::invalid_argument("bits exceeds the largest supported codebook");
    if (spec.threads < 0) throw std::invalid_argument("threads must be non-negative");
}

} // namespace

// ---------------------------------------------------------------------
// CSV serialization.

void write_csv(const ExperimentResult& result, std::ostream& out) {
    out << "# name: " << result.name << "\n";
    for (const auto& [key, value] : result.metadata) out << "# " << key << ": " << value << "\n";
    for (std::size_t i = 0; i < result.columns.size(); ++i) {
        if (i > 0) out << ',';
        out << result.columns[i];
    }
    out << "\n";
    for (const auto& row : result.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i > 0) out << ',';
            out << format_double(row[i]);
        }
        out << "\n";
    }
}

void write_csv_file(const ExperimentResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_csv(result, out);
    if (!out) throw std::runtime_error("write failed: " + path);
}

ExperimentResult read_csv(std::istream& in) {
    ExperimentResult result;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = trim(line.substr(1));
            const std::size_t sep = body.find(": ");
            if (sep == std::string::npos) continue;
            const std::string key = body.substr(0, sep);
            const std::string value = body.substr(sep + 2);
            if (key == "name") {
                result.name = value;
            } else {
                result.metadata.emplace_back(key, value);
            }
            continue;
        }
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream row_in(line);
        while (std::getline(row_in, cell, ',')) cells.push_back(cell);
        if (!have_header) {
            result.columns = cells;
            have_header = true;
            continue;
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const std::string& c : cells) row.push_back(std::strtod(c.c_str(), nullptr));
        result.rows.push_back(std::move(row));
    }
    return result;
}

// ---------------------------------------------------------------------
// Presets and configuration.

std::vector<std::string> preset_names() {
    return {"fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"};
}

RunSpec preset_spec(const std::string& name) {
    RunSpec spec;
    spec.preset = name;
    if (name == "fig3") {
        spec.snr_db = linear_grid(0.0, 12.0, 1.0);
    } else if (name == "fig4") {
        spec.paths_list = {2, 3, 4, 5, 6};
        spec.snr_db_fixed = 5.0;
        spec.target_gap = 0.13;
    } else if (name == "fig5") {
        spec.snr_db = linear_grid(0.0, 12.0, 2.0);
    } else if (name == "fig6") {
        spec.b0_bits = {2, 3, 4, 5, 6, 7, 8, 9, 10};
        spec.snr_db_fixed = 6.0;
        spec.bits = 8;
    } else if (name == "fig7") {
        spec.snr_db = linear_grid(0.0, 12.0, 2.0);
        spec.bits = 5;
        spec.aod_bits = 8;
    } else if (name == "fig8") {
        spec.mu = {0.25, 0.5, 0.75, 1.0, 1.25, 1.5};
        spec.gamma_ul = {5.0};
        spec.snr_db_fixed = 10.0;
    } else if (name == "fig9") {
        spec.mu = {0.5, 0.8};
        spec.gamma_ul = {1.0, 2.0, 5.0, 10.0, 32.0};
        spec.snr_db_fixed = 10.0;
    } else if (name == "custom") {
        // Defaults from RunSpec; the caller supplies the sweep.
    } else {
        throw std::invalid_argument("unknown preset: " + name);
    }
    return spec;
}

RunSpec spec_from_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);

    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string text = trim(line);
        if (text.empty()) continue;
        const std::size_t eq = text.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("malformed line " + std::to_string(line_no) + " in " + path +
                                     ": expected key = value");
        entries.emplace_back(trim(text.substr(0, eq)), trim(text.substr(eq + 1)));
    }

    RunSpec spec;
    for (const auto& [key, value] : entries) {
        if (key == "preset") spec = preset_spec(value);
    }

    for (const auto& [key, value] : entries) {
        if (key == "preset") {
            continue;
        } else if (key == "array") {
            if (value == "ula") {
                spec.geometry.kind = ArrayKind::Ula;
                spec.geometry.m2 = 1;
            } else if (value == "upa") {
                spec.geometry.kind = ArrayKind::Upa;
            } else {
                throw std::runtime_error("unknown array kind: " + value +
                                         " (expected ula or upa)");
            }
        } else if (key == "m1") {
            spec.geometry.m1 = static_cast<int>(parse_int(key, value));
        } else if (key == "m2") {
            spec.geometry.m2 = static_cast<int>(parse_int(key, value));
        } else if (key == "spacing") {
            spec.geometry.spacing = parse_double(key, value);
        } else if (key == "users") {
            spec.users = static_cast<int>(parse_int(key, value));
        } else if (key == "paths") {
            spec.paths = static_cast<int>(parse_int(key, value));
        } else if (key == "separation_floor") {
            spec.separation_floor = parse_double(key, value);
        } else if (key == "snr_db") {
            spec.snr_db.clear();
            for (const std::string& item : split_list(value))
                spec.snr_db.push_back(parse_double(key, item));
        } else if (key == "snr_db_fixed") {
            spec.snr_db_fixed = parse_double(key, value);
        } else if (key == "bits") {
            spec.bits = static_cast<int>(parse_int(key, value));
        } else if (key == "b0_bits") {
            spec.b0_bits.clear();
            for (const std::string& item : split_list(value))
                spec.b0_bits.push_back(static_cast<int>(parse_int(key, item)));
        } else if (key == "mu") {
            spec.mu.clear();
            for (const std::string& item : split_list(value))
                spec.mu.push_back(parse_double(key, item));
        } else if (key == "gamma_ul") {
            spec.gamma_ul.clear();
            for (const std::string& item : split_list(value))
                spec.gamma_ul.push_back(parse_double(key, item));
        } else if (key == "paths_list") {
            spec.paths_list.clear();
            for (const std::string& item : split_list(value))
                spec.paths_list.push_back(static_cast<int>(parse_int(key, item)));
        } else if (key == "target_gap") {
            spec.target_gap = parse_double(key, value);
        } else if (key == "scheme") {
            spec.scheme = scheme_from_name(value);
        } else if (key == "aod") {
            if (value == "exact") {
                spec.aod = AodKnowledge::Exact;
            } else if (value == "estimated") {
                spec.aod = AodKnowledge::Estimated;
            } else {
                throw std::runtime_error("unknown aod mode: " + value +
                                         " (expected exact or estimated)");
            }
        } else if (key == "aod_bits") {
            spec.aod_bits = static_cast<int>(parse_int(key, value));
        } else if (key == "snapshots") {
            spec.snapshots = static_cast<int>(parse_int(key, value));
        } else if (key == "grid_step") {
            spec.grid_step = parse_double(key, value);
        } else if (key == "angle_coherence_ratio") {
            spec.angle_coherence_ratio = parse_double(key, value);
        } else if (key == "trials") {
            spec.trials = static_cast<int>(parse_int(key, value));
        } else if (key == "seed") {
            spec.seed = parse_uint(key, value);
        } else if (key == "threads") {
            spec.threads = static_cast<int>(parse_int(key, value));
        } else {
            throw std::runtime_error("unknown config key: " + key);
        }
    }
    return spec;
}

ExperimentResult run(RunSpec spec, const RunOverrides& overrides) {
    if (overrides.seed) spec.seed = *overrides.seed;
    if (overrides.trials) spec.trials = *overrides.trials;
    if (overrides.threads) spec.threads = *overrides.threads;
    if (spec.preset == "custom" && spec.snr_db.empty()) spec.snr_db = linear_grid(0.0, 12.0, 2.0);
    validate_spec(spec);
    const int threads = spec.threads > 0 ? spec.threads : default_thread_count();

    ExperimentResult out;
    out.name = spec.preset;
    out.metadata.emplace_back("config", config_hash(spec));
    out.metadata.emplace_back("seed", std::to_string(spec.seed));
    out.metadata.emplace_back("version", kVersion);
    out.metadata.emplace_back(
        "snr_reference", "gamma = users * 10^(snr_db/10) / paths; ensemble mean ||h||^2 = paths");

    if (spec.preset == "fig3") {
        run_snr_pair_sweep(spec, threads, true, -1, -1, out);
    } else if (spec.preset == "fig4") {
        run_bit_scaling_sweep(spec, threads, out);
    } else if (spec.preset == "fig5") {
        run_inner_training_sweep(spec, threads, out);
    } else if (spec.preset == "fig6") {
        run_direction_resolution_sweep(spec, threads, out);
    } else if (spec.preset == "fig7") {
        const double direction_cost = amortized_direction_bits(
            spec.paths, spec.aod_bits, spec.angle_coherence_ratio, spec.geometry);
        const int rot_bits = std::clamp(
            static_cast<int>(std::floor(static_cast<double>(spec.bits) + direction_cost)), 0,
            kMaxCodebookBits);
        run_snr_pair_sweep(spec, threads, true, spec.bits, rot_bits, out);
    } else if (spec.preset == "fig8") {
        run_analog_comparison_sweep(spec, threads, false, out);
    } else if (spec.preset == "fig9") {
        run_analog_comparison_sweep(spec, threads, true, out);
    } else {
        run_custom_sweep(spec, threads, out);
    }
    return out;
}

double amortized_direction_bits(int paths, int aod_bits, double coherence_ratio,
                                const ArrayGeometry& geom) {
    if (paths < 0 || aod_bits < 0) throw std::invalid_argument("negative feedback quantities");
    if (coherence_ratio <= 0.0) throw std::invalid_argument("coherence ratio must be positive");
    const double angles_per_path = geom.kind == ArrayKind::Upa ? 2.0 : 1.0;
    return angles_per_path * static_cast<double>(paths) * static_cast<double>(aod_bits) /
           coherence_ratio;
}

namespace {

// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1], via
// Newton iteration on the Legendre recurrence. Plenty accurate for the
// smooth bounded integrands below (error far under 1e-12 at n = 96).
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double deriv = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            deriv = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double step = p1 / deriv;
            x -= step;
            if (std::abs(step) < 1e-15) break;
        }
        nodes[static_cast<std::size_t>(i)] = -x;
        nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        const double w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        weights[static_cast<std::size_t>(i)] = w;
        weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
}

} // namespace

Eigen::MatrixXcd prior_correlation(const ArrayGeometry& geom) {
    const int m = geom.size();
    if (m < 1) throw std::invalid_argument("empty array");
    Eigen::MatrixXcd r(m, m);

    if (geom.kind == ArrayKind::Ula) {
        // E[exp(j z sin(az))] over az ~ U[-pi/2, pi/2] is the zeroth-order
        // Bessel function J0(z), so the entries have a closed form.
        for (int a = 0; a < m; ++a) {
            for (int b = 0; b < m; ++b) {
                const double arg = 2.0 * M_PI * geom.spacing * std::abs(a - b);
                r(a, b) = std::complex<double>(std::cyl_bessel_j(0.0, arg) / m, 0.0);
            }
        }
        return r;
    }

    // UPA: with independent azimuth and elevation uniform on [-pi/2, pi/2],
    // the entry for element offsets (di, dj) reduces to the real integral
    //   (2/pi) * Int_0^{pi/2} J0(c1 cos t) cos(c2 sin t) dt,
    // c1 = 2 pi d di (horizontal), c2 = 2 pi d dj (vertical). Tabulated over
    // offsets so the matrix is exactly symmetric.
    std::vector<double> nodes, weights;
    gauss_legendre(96, nodes, weights);
    const double half = M_PI / 4.0;  // map [-1,1] -> [0, pi/2]
    Eigen::MatrixXd table(geom.m1, geom.m2);
    for (int di = 0; di < geom.m1; ++di) {
        for (int dj = 0; dj < geom.m2; ++dj) {
            const double c1 = 2.0 * M_PI * geom.spacing * di;
            const double c2 = 2.0 * M_PI * geom.spacing * dj;
            double acc = 0.0;
            for (std::size_t k = 0; k < nodes.size(); ++k) {
                const double t = half * (nodes[k] + 1.0);
                acc += weights[k] * std::cyl_bessel_j(0.0, c1 * std::cos(t)) *
                       std::cos(c2 * std::sin(t));
            }
            table(di, dj) = (2.0 / M_PI) * half * acc / m;
        }
    }
    // Element order matches steering_vector: horizontal index major,
    // vertical index minor.
    for (int a = 0; a < m; ++a) {
        const int ai = a / geom.m2;
        const int aj = a % geom.m2;
        for (int b = 0; b < m; ++b) {
            const int bi = b / geom.m2;
            const int bj = b % geom.m2;
            r(a, b) = std::complex<double>(table(std::abs(ai - bi), std::abs(aj - bj)), 0.0);
        }
    }
    return r;
}

int default_thread_count() {
    const char* env = std::getenv("MIMOFB_THREADS");
    if (env == nullptr) return 1;
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || v < 1 || v > 1024) return 1;
    return static_cast<int>(v);
}

std::string config_hash(const RunSpec& spec) {
    // Canonical serialization of everything that can change the numbers.
    // Thread count is deliberately excluded: scheduling never affects the
    // output bytes, so it must not affect the hash either.
    std::ostringstream canon;
    canon << "preset=" << spec.preset
          << ";array=" << (spec.geometry.kind == ArrayKind::Upa ? "upa" : "ula")
          << ";m1=" << spec.geometry.m1 << ";m2=" << spec.geometry.m2
          << ";spacing=" << format_double(spec.geometry.spacing) << ";users=" << spec.users
          << ";paths=" << spec.paths
          << ";separation_floor=" << format_double(spec.separation_floor) << ";snr_db=";
    for (double v : spec.snr_db) canon << format_double(v) << ',';
    canon << ";snr_db_fixed=" << format_double(spec.snr_db_fixed) << ";bits=" << spec.bits
          << ";b0_bits=";
    for (int v : spec.b0_bits) canon << v << ',';
    canon << ";mu=";
    for (double v : spec.mu) canon << format_double(v) << ',';
    canon << ";gamma_ul=";
    for (double v : spec.gamma_ul) canon << format_double(v) << ',';
    canon << ";paths_list=";
    for (int v : spec.paths_list) canon << v << ',';
    canon << ";target_gap=" << format_double(spec.target_gap)
          << ";scheme=" << scheme_name(spec.scheme)
          << ";aod=" << (spec.aod == AodKnowledge::Estimated ? "estimated" : "exact")
          << ";aod_bits=" << spec.aod_bits << ";snapshots=" << spec.snapshots
          << ";grid_step=" << format_double(spec.grid_step)
          << ";angle_coherence_ratio=" << format_double(spec.angle_coherence_ratio)
          << ";trials=" << spec.trials << ";seed=" << spec.seed;

    const std::string text = canon.str();
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char ch : text) {
        hash ^= ch;
        hash *= 1099511628211ull;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(hash));
    return buffer;
}

} // namespace mimofb
