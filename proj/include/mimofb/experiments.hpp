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

#ifndef mimofb_experiments_H
#define mimofb_experiments_H

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mimofb/linkrate.hpp"

namespace mimofb {

// Sweep output: one row per sweep point, named columns, plus deterministic
// metadata (config hash, seed, tool version; never wall-clock or thread
// count, so equal-seed runs emit byte-identical CSV).
struct ExperimentResult {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::vector<std::pair<std::string, std::string>> metadata;
};

// CSV with `# key: value` metadata lines, a header line, LF endings, and
// 17 significant digits (doubles survive a round trip exactly).
void write_csv(const ExperimentResult& result, std::ostream& out);
void write_csv_file(const ExperimentResult& result, const std::string& path);
ExperimentResult read_csv(std::istream& in);

// Fully-resolved description of a run. Presets fill one of these; config
// files and CLI flags override individual fields.
struct RunSpec {
    std::string preset = "custom";
    ArrayGeometry geometry{ArrayKind::Ula, 128, 1, 0.5};
    int users = 4;
    int paths = 4;
    double separation_floor = -1.0;         // < 0: geometry default
    std::vector<double> snr_db;             // downlink receiver SNR sweep
    double snr_db_fixed = 6.0;              // operating point for non-SNR sweeps
    int bits = -1;                          // fixed codebook exponent; -1: snr-matched rule
    std::vector<int> b0_bits;               // direction quantizer sweep
    std::vector<double> mu;                 // uplink uses per path gain
    std::vector<double> gamma_ul;           // uplink SNR sweep (linear)
    std::vector<int> paths_list;            // path-count sweep
    double target_gap = 0.13;               // rate-gap target for bit searches
    CodebookScheme scheme = CodebookScheme::SubspaceRvq;
    AodKnowledge aod = AodKnowledge::Exact;
    int aod_bits = 0;
    int snapshots = 200;
    double grid_step = 1e-3;
    double angle_coherence_ratio = 10.0;
    int trials = 2000;
    std::uint64_t seed = 12345;
    int threads = 0;                        // 0: MIMOFB_THREADS env or 1
};

// Bundled sweeps, one study per preset name:
//   fig3  rate vs SNR with SNR-matched bits, aligned and statistics codebooks
//   fig4  bits needed to cap the rate gap, vs path count (search + closed form)
//   fig5  trained vs random inner codebook
//   fig6  rate vs direction-quantizer resolution
//   fig7  equal-total-budget comparison against the statistics codebook
//   fig8  quantized vs analog feedback across the uplink budget mu
//   fig9  quantized vs analog feedback across uplink SNR at fixed mu
std::vector<std::string> preset_names();
RunSpec preset_spec(const std::string& name);

// Flat `key = value` file with '#' comments; unknown keys are rejected with
// the offending name. A `preset` key seeds the defaults.
RunSpec spec_from_config(const std::string& path);

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<int> threads;
};

ExperimentResult run(RunSpec spec, const RunOverrides& overrides = {});

// Uplink bits per coherence block attributable to direction feedback, spread
// over the block: paths * aod_bits / coherence_ratio per angle, doubled for
// a planar array (two angles per path).
double amortized_direction_bits(int paths, int aod_bits, double coherence_ratio,
                                const ArrayGeometry& geom);

// Direction-ensemble correlation E[a a^H] for departure angles uniform over
// [-pi/2, pi/2] (azimuth and, for UPA, elevation), via Gauss-Legendre
// quadrature. This is the long-term transmit correlation the statistics
// codebook is matched to.
Eigen::MatrixXcd prior_correlation(const ArrayGeometry& geom);

// Thread count used when a spec leaves `threads` at 0: the MIMOFB_THREADS
// environment variable, else 1.
int default_thread_count();

// Hex FNV-1a hash of the canonical key=value serialization of a spec.
std::string config_hash(const RunSpec& spec);

} // namespace mimofb

#endif
