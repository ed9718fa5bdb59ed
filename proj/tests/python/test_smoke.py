# SPDX-License-Identifier: Apache-2.0
#
# mimofb - link-level simulator for limited-feedback multiuser MIMO downlinks
# Copyright (C) 2026 mimofb contributors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ------------------------------------------------------------------------
"""Smoke tests for the python bindings: surface, shapes, determinism."""

import math

import numpy as np
import pytest

import mimofb


def test_version_is_a_dotted_string():
    parts = mimofb.__version__.split(".")
    assert len(parts) == 3
    assert all(p.isdigit() for p in parts)


def test_pattern_closed_form_basics():
    assert mimofb.upsilon(0.0, 16) == pytest.approx(1.0)
    # One full grating-lobe period away the pattern returns to +/-1.
    assert abs(mimofb.upsilon(1.0, 16)) == pytest.approx(1.0)
    assert abs(mimofb.upsilon(0.37, 64)) < 0.2


def test_error_bound_shrinks_with_bits():
    values = [mimofb.quantization_error_bound(b, 4) for b in (3, 6, 9, 12)]
    assert values == sorted(values, reverse=True)
    assert values[-1] == pytest.approx(2.0 ** (-4.0), abs=1e-12)


def test_steering_vector_is_unit_norm():
    v = mimofb.steering_vector("ula", 64, 1, 0.5, 0.3)
    assert v.shape == (64,)
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)
    p = mimofb.steering_vector("upa", 8, 4, 0.5, 0.3, -0.2)
    assert p.shape == (32,)
    assert np.linalg.norm(p) == pytest.approx(1.0, abs=1e-12)


def test_quantize_sin_hits_cell_centers():
    assert mimofb.quantize_sin(-1.0, 3) == pytest.approx(-1.0 + 2.0 ** (-3))
    assert mimofb.quantize_sin(0.999, 3) == pytest.approx(1.0 - 2.0 ** (-3))
    value = 0.2345
    for bits in (4, 8, 12):
        assert abs(mimofb.quantize_sin(value, bits) - value) <= 2.0 ** (-bits)


def test_prior_correlation_is_unit_trace():
    r = mimofb.prior_correlation("ula", 16, 1)
    assert r.shape == (16, 16)
    assert np.trace(r).real == pytest.approx(1.0, abs=1e-12)
    assert r[0, 0].real == pytest.approx(1.0 / 16.0, abs=1e-12)


def test_preset_names_cover_the_bundled_sweeps():
    names = mimofb.preset_names()
    for expected in ("fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9"):
        assert expected in names


def test_run_preset_returns_consistent_table():
    out = mimofb.run_preset("fig7", seed=7, trials=5, threads=1)
    assert out["name"] == "fig7"
    assert "rate_subspace" in out["columns"]
    assert len(out["rows"]) > 0
    width = len(out["columns"])
    assert all(len(row) == width for row in out["rows"])
    assert out["metadata"]["seed"] == "7"

    again = mimofb.run_preset("fig7", seed=7, trials=5, threads=1)
    assert out["rows"] == again["rows"]


def test_run_preset_rejects_unknown_names():
    with pytest.raises(ValueError):
        mimofb.run_preset("fig99")
