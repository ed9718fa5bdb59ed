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
// Python bindings for the main operations: closed-form bounds, steering
// and quantization primitives, and the preset sweep runner.

#include <optional>
#include <string>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mimofb/bounds.hpp"
#include "mimofb/aod.hpp"
#include "mimofb/channel.hpp"
#include "mimofb/experiments.hpp"
#include "mimofb/version.hpp"

namespace py = pybind11;

namespace {

mimofb::ArrayGeometry make_geometry(const std::string& kind, int m1, int m2, double spacing) {
    mimofb::ArrayGeometry geom;
    if (kind == "ula") {
        geom.kind = mimofb::ArrayKind::Ula;
    } else if (kind == "upa") {
        geom.kind = mimofb::ArrayKind::Upa;
    } else {
        throw std::invalid_argument("array kind must be 'ula' or 'upa'");
    }
    geom.m1 = m1;
    geom.m2 = m2;
    geom.spacing = spacing;
    return geom;
}

py::dict result_to_dict(const mimofb::ExperimentResult& result) {
    py::dict out;
    out["name"] = result.name;
    out["columns"] = result.columns;
    out["rows"] = result.rows;
    py::dict meta;
    for (const auto& [key, value] : result.metadata) meta[py::str(key)] = value;
    out["metadata"] = meta;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, mod) {
    mod.doc() = "Link-level simulator for limited-feedback multiuser MIMO downlinks";
    mod.attr("__version__") = mimofb::kVersion;

    mod.def("upsilon", &mimofb::upsilon, py::arg("x"), py::arg("m"),
            "Normalized array gain pattern sin(m*pi*x)/(m*sin(pi*x)).");

    mod.def("quantization_error_bound", &mimofb::quantization_error_bound, py::arg("bits"),
            py::arg("paths"), py::arg("beta") = 0.0,
            "Expected chordal error bound beta + (1-beta)*2^(-bits/(paths-1)).");

    mod.def("required_feedback_bits", &mimofb::required_feedback_bits, py::arg("paths"),
            py::arg("snr_db"), py::arg("users"), py::arg("alpha"), py::arg("b"),
            "Bits needed to hold the rate gap below log2(b) at the given SNR.");

    mod.def("rate_gap_quantized_bound", &mimofb::rate_gap_quantized_bound, py::arg("users"),
            py::arg("gamma"), py::arg("mean_h2"), py::arg("alpha"), py::arg("bits"),
            py::arg("paths"), py::arg("beta") = 0.0,
            "Per-user rate gap bound for quantized feedback.");

    mod.def("rate_gap_analog_bound", &mimofb::rate_gap_analog_bound, py::arg("users"),
            py::arg("gamma"), py::arg("mu"), py::arg("gamma_ul"),
            "Per-user rate gap bound for analog feedback.");

    mod.def("rate_gap_quantized_budget_bound", &mimofb::rate_gap_quantized_budget_bound,
            py::arg("gamma"), py::arg("paths"), py::arg("mu"), py::arg("gamma_ul"),
            "Quantized-feedback gap bound at the analog-matched bit budget.");

    mod.def(
        "steering_vector",
        [](const std::string& kind, int m1, int m2, double spacing, double azimuth,
           double elevation) {
            return mimofb::steering_vector(make_geometry(kind, m1, m2, spacing), azimuth,
                                           elevation);
        },
        py::arg("kind"), py::arg("m1"), py::arg("m2"), py::arg("spacing"), py::arg("azimuth"),
        py::arg("elevation") = 0.0, "Unit-norm array response for a departure direction.");

    mod.def(
        "prior_correlation",
        [](const std::string& kind, int m1, int m2, double spacing) {
            return mimofb::prior_correlation(make_geometry(kind, m1, m2, spacing));
        },
        py::arg("kind"), py::arg("m1"), py::arg("m2"), py::arg("spacing") = 0.5,
        "Direction-ensemble correlation E[a a^H] for uniform departure angles.");

    mod.def("quantize_sin", &mimofb::quantize_sin, py::arg("value"), py::arg("bits"),
            "Mid-rise uniform quantizer for a sine value over [-1, 1].");

    mod.def("amortized_direction_bits",
            [](int paths, int aod_bits, double coherence_ratio, const std::string& kind, int m1,
               int m2, double spacing) {
                return mimofb::amortized_direction_bits(
                    paths, aod_bits, coherence_ratio, make_geometry(kind, m1, m2, spacing));
            },
            py::arg("paths"), py::arg("aod_bits"), py::arg("coherence_ratio"),
            py::arg("kind") = "ula", py::arg("m1") = 128, py::arg("m2") = 1,
            py::arg("spacing") = 0.5,
            "Uplink bits per block attributable to direction feedback.");

    mod.def("preset_names", &mimofb::preset_names, "Names of the bundled sweeps.");

    mod.def(
        "run_preset",
        [](const std::string& name, std::optional<std::uint64_t> seed, std::optional<int> trials,
           std::optional<int> threads) {
            mimofb::RunSpec spec = mimofb::preset_spec(name);
            mimofb::RunOverrides overrides;
            overrides.seed = seed;
            overrides.trials = trials;
            overrides.threads = threads;
            return result_to_dict(mimofb::run(spec, overrides));
        },
        py::arg("name"), py::arg("seed") = py::none(), py::arg("trials") = py::none(),
        py::arg("threads") = py::none(),
        "Run a bundled sweep; returns {name, columns, rows, metadata}.");

    mod.def(
        "run_config",
        [](const std::string& path, std::optional<std::uint64_t> seed, std::optional<int> trials,
           std::optional<int> threads) {
            mimofb::RunSpec spec = mimofb::spec_from_config(path);
            mimofb::RunOverrides overrides;
            overrides.seed = seed;
            overrides.trials = trials;
            overrides.threads = threads;
            return result_to_dict(mimofb::run(spec, overrides));
        },
        py::arg("path"), py::arg("seed") = py::none(), py::arg("trials") = py::none(),
        py::arg("threads") = py::none(),
        "Run a sweep described by a config file; returns {name, columns, rows, metadata}.");
}
