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

#ifndef mimofb_channel_H
#define mimofb_channel_H

#include <Eigen/Dense>

#include "mimofb/rng.hpp"

namespace mimofb {

enum class ArrayKind { Ula, Upa };

// Antenna array at the transmitter. For a ULA `m1` is the element count and
// `m2` must be 1; for a UPA the panel has m1 columns and m2 rows. `spacing`
// is the element pitch in wavelengths.
struct ArrayGeometry {
    ArrayKind kind = ArrayKind::Ula;
    int m1 = 0;
    int m2 = 1;
    double spacing = 0.5;

    int size() const { return m1 * m2; }
};

// One user's propagation paths: azimuth (and, for UPA, elevation) angles in
// radians within [-pi/2, pi/2], plus the current complex path gains.
struct PathSet {
    Eigen::VectorXd azimuth;
    Eigen::VectorXd elevation; // empty for ULA
    Eigen::VectorXcd gain;

    Eigen::Index count() const { return azimuth.size(); }
};

// Unit-norm array response for a departure direction. For a ULA the phase of
// element m is 2*pi*spacing*m*sin(az); for a UPA the response factors into a
// horizontal part (phase 2*pi*spacing*m1*cos(el)*sin(az)) and a vertical part
// (phase 2*pi*spacing*m2*sin(el)) combined as a Kronecker product.
Eigen::VectorXcd steering_vector(const ArrayGeometry& geom, double azimuth, double elevation = 0.0);

// Stacks the steering vectors of all paths into an M x P matrix.
Eigen::MatrixXcd steering_matrix(const ArrayGeometry& geom, const PathSet& paths);

// Smallest pairwise angular spacing enforced between paths, measured in the
// sine domain: 4 / (M * spacing). Keeps the steering vectors of one user
// close to orthogonal.
double default_separation_floor(const ArrayGeometry& geom);

// Draws `paths` departure directions uniformly over [-pi/2, pi/2] (azimuth
// and, for UPA, elevation), rejecting candidates closer than `min_separation`
// to an already-drawn path in the sine domain (for UPA: in both the
// cos(el)*sin(az) and sin(el) coordinates). Fresh unit-variance complex
// normal gains are drawn for every path. Throws std::runtime_error naming
// the floor if 10000 rejection rounds cannot place all paths.
PathSet draw_path_set(const ArrayGeometry& geom, int paths, double min_separation, Rng& rng);

// Fresh unit-variance complex normal gains (one coherence block).
Eigen::VectorXcd draw_gains(Eigen::Index paths, Rng& rng);

// h = steering * gain.
Eigen::VectorXcd synthesize_channel(const Eigen::MatrixXcd& steering, const Eigen::VectorXcd& gain);

} // namespace mimofb

#endif
