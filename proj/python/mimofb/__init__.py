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
"""Python interface to the mimofb link-level simulator.

The heavy lifting happens in the compiled `_core` extension; this package
re-exports its public surface.
"""

from ._core import (
    __version__,
    amortized_direction_bits,
    preset_names,
    prior_correlation,
    quantization_error_bound,
    quantize_sin,
    rate_gap_analog_bound,
    rate_gap_quantized_bound,
    rate_gap_quantized_budget_bound,
    required_feedback_bits,
    run_config,
    run_preset,
    steering_vector,
    upsilon,
)

__all__ = [
    "__version__",
    "amortized_direction_bits",
    "preset_names",
    "prior_correlation",
    "quantization_error_bound",
    "quantize_sin",
    "rate_gap_analog_bound",
    "rate_gap_quantized_bound",
    "rate_gap_quantized_budget_bound",
    "required_feedback_bits",
    "run_config",
    "run_preset",
    "steering_vector",
    "upsilon",
]
