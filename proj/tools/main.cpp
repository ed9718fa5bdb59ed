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
// Command line front end: `mimofb run` executes a preset or config-file
// sweep and emits CSV; `mimofb verify` runs the self-check suites.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "mimofb/experiments.hpp"
#include "mimofb/verify.hpp"
#include "mimofb/version.hpp"

namespace {

constexpr const char* kConfigReference = R"(Configuration keys (one `key = value` per line, '#' starts a comment):
  preset                 fig3..fig9 or custom; seeds the remaining defaults
  array                  ula | upa
  m1, m2                 antenna columns / rows (ULA uses m2 = 1)
  spacing                element pitch in wavelengths
  users                  number of single-antenna users
  paths                  propagation paths per user
  separation_floor       min pairwise path separation, sine domain (< 0: default)
  snr_db                 comma-separated downlink SNR sweep in dB
  snr_db_fixed           operating SNR in dB for sweeps over other variables
  bits                   codebook exponent; -1 applies the (paths-1)/3*snr rule
  b0_bits                comma-separated direction-quantizer bit sweep
  mu                     comma-separated uplink channel uses per path gain
  gamma_ul               comma-separated uplink SNR sweep (linear scale)
  paths_list             comma-separated path counts for the bit-scaling study
  target_gap             rate-gap target in bits/s/Hz for the bit search
  scheme                 subspace_rvq | subspace_lloyd | rvq | rotated
  aod                    exact | estimated
  aod_bits               bits per reported direction sine (0 = unquantized)
  snapshots              covariance snapshots when directions are estimated
  grid_step              spectrum search step in the sine domain
  angle_coherence_ratio  angle-to-gain coherence ratio (amortizes direction bits)
  trials                 Monte Carlo trials per sweep point
  seed                   master seed (unsigned 64-bit)
  threads                worker threads (0 = MIMOFB_THREADS or 1)

CSV output: `# key: value` metadata lines (config hash, seed, version, SNR
convention), then a header row and one comma-separated row per sweep point,
values at 17 significant digits. Every sweep reports per-point means and
standard errors plus the used and discarded trial counts; rows are sorted
by the sweep variable. Equal seeds give byte-identical files at any thread
count.

Environment: MIMOFB_THREADS sets the worker count when --threads/threads is 0.)";

int run_command(const std::string& preset, const std::string& config_path,
                const std::string& out_path, const std::optional<std::uint64_t>& seed,
                const std::optional<int>& trials, const std::optional<int>& threads) {
    mimofb::RunSpec spec =
        config_path.empty() ? mimofb::preset_spec(preset) : mimofb::spec_from_config(config_path);
    mimofb::RunOverrides overrides;
    overrides.seed = seed;
    overrides.trials = trials;
    overrides.threads = threads;
    const mimofb::ExperimentResult result = mimofb::run(spec, overrides);
    if (out_path.empty()) {
        mimofb::write_csv(result, std::cout);
    } else {
        mimofb::write_csv_file(result, out_path);
        std::fprintf(stderr, "wrote %zu rows to %s\n", result.rows.size(), out_path.c_str());
    }
    return 0;
}

int verify_command(const std::string& suite, std::uint64_t seed) {
    const std::vector<mimofb::VerifyCheck> checks = mimofb::verify_suite(suite, seed);
    int failures = 0;
    for (const mimofb::VerifyCheck& check : checks) {
        std::printf("[%s] %s (%s)\n", check.pass ? "PASS" : "FAIL", check.name.c_str(),
                    check.detail.c_str());
        failures += check.pass ? 0 : 1;
    }
    std::printf("%zu checks, %d failed\n", checks.size(), failures);
    return failures;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("mimofb ") + mimofb::kVersion +
                 " - limited-feedback multiuser MIMO link simulator"};
    app.footer(kConfigReference);
    app.require_subcommand(0, 1);
    app.set_version_flag("--version", mimofb::kVersion);

    // run ---------------------------------------------------------------
    auto* run_cmd = app.add_subcommand(
        "run", "Execute a sweep and emit CSV (stdout unless --out is given)");
    std::string preset;
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::optional<int> threads;
    auto* preset_opt =
        run_cmd->add_option("--preset", preset,
                            "Bundled sweep: fig3 (rate vs SNR, SNR-matched bits), fig4 "
                            "(required bits vs path count), fig5 (trained vs random inner "
                            "codebook), fig6 (direction-quantizer resolution), fig7 "
                            "(equal-budget baseline comparison), fig8 (quantized vs analog "
                            "across the uplink budget), fig9 (quantized vs analog across "
                            "uplink SNR)");
    auto* config_opt = run_cmd->add_option("--config", config_path,
                                           "Config file (see the key reference below)");
    config_opt->excludes(preset_opt);
    run_cmd->add_option("--out", out_path, "Output CSV path (default: stdout)");
    run_cmd->add_option("--seed", seed, "Master seed override");
    run_cmd->add_option("--trials", trials, "Trials-per-point override");
    run_cmd->add_option("--threads", threads, "Worker thread override");

    // verify ------------------------------------------------------------
    auto* verify_cmd = app.add_subcommand("verify", "Run built-in consistency checks");
    std::string suite = "all";
    std::uint64_t verify_seed = 12345;
    verify_cmd->add_option("--suite", suite, "channel | codebook | bounds | all")
        ->capture_default_str();
    verify_cmd->add_option("--seed", verify_seed, "Seed for the randomized checks")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);
        return 2;
    }

    try {
        if (run_cmd->parsed()) {
            if (preset.empty() && config_path.empty()) {
                std::fprintf(stderr, "run needs --preset or --config\n");
                return 2;
            }
            return run_command(preset, config_path, out_path, seed, trials, threads);
        }
        if (verify_cmd->parsed()) {
            return verify_command(suite, verify_seed);
        }
        std::cout << app.help();
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
