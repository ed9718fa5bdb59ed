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

#ifndef mimofb_verify_H
#define mimofb_verify_H

#include <cstdint>
#include <string>
#include <vector>

namespace mimofb {

// Self-contained consistency checks runnable from the CLI. Each check
// reports the measured margin alongside its verdict.
struct VerifyCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

// `suite` is one of "channel", "codebook", "bounds", or "all".
// Throws std::invalid_argument on any other name.
std::vector<VerifyCheck> verify_suite(const std::string& suite, std::uint64_t seed = 12345);

} // namespace mimofb

#endif
