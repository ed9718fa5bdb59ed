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

#ifndef mimofb_aod_H
#define mimofb_aod_H

#include <vector>

#include <Eigen/Dense>

#include "mimofb/channel.hpp"

namespace mimofb {

// (1/N) * sum of h h^H over the snapshot columns, symmetrized so the result
// is exactly Hermitian.
Eigen::MatrixXcd sample_covariance(const Eigen::MatrixXcd& snapshots);

// Subspace spectrum 1 / (a^H N N^H a) evaluated at the given directions,
// where N spans the eigenvectors of the M - paths smallest eigenvalues of
// the covariance. Denominators are floored at 1e-12. `directions` holds one
// (azimuth, elevation) pair per row; elevation is ignored for a ULA.
Eigen::VectorXd subspace_spectrum(const Eigen::MatrixXcd& covariance, const ArrayGeometry& geom,
                                  int paths, const Eigen::MatrixX2d& directions);

// Direction estimates recovered from a covariance. `complete` is false when
// the spectrum had fewer than `paths` strict local maxima and the remainder
// was filled from the largest off-peak values.
struct AodEstimate {
    Eigen::VectorXd azimuth;
    Eigen::VectorXd elevation;  // empty for ULA
    bool complete = true;
};

// Peak-picks the subspace spectrum over a regular grid in the sine domain
// (step `grid_step` covering [-1, 1]) and returns the `paths` strongest
// local maxima as angles. For a UPA the grid is two-dimensional over
// (sin azimuth, sin elevation). Throws std::runtime_error when the
// covariance carries no usable signal subspace (all eigenvalues equal).
AodEstimate estimate_aods(const Eigen::MatrixXcd& covariance, const ArrayGeometry& geom,
                          int paths, double grid_step = 1e-3);

// Mid-rise uniform quantizer for a sine value over [-1, 1] with 2^bits
// levels: cell width 2^(1-bits), reconstruction at cell centers, outermost
// cells clamped so outputs stay inside [-1, 1].
double quantize_sin(double value, int bits);

// Quantizes every angle of an estimate in the sine domain (azimuth and, when
// present, elevation) with `bits` bits each.
AodEstimate quantize_aods(const AodEstimate& estimate, int bits);

} // namespace mimofb

#endif
