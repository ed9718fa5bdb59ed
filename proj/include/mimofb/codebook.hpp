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

#ifndef mimofb_codebook_H
#define mimofb_codebook_H

#include <iosfwd>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "mimofb/rng.hpp"

namespace mimofb {

// Largest supported codebook exponent; 2^20 words caps memory use well above
// anything the bundled experiments need.
inline constexpr int kMaxCodebookBits = 20;

enum class CodebookKind {
    Rvq,                // isotropic random unit vectors, full dimension
    Lloyd,              // trained inner codebook (low dimension)
    Subspace,           // basis * rvq-inner, renormalized
    SubspaceLloyd,      // basis * lloyd-inner, renormalized
    RotatedStatistics,  // correlation^(1/2) * rvq, renormalized
};

// A set of 2^bits unit-norm quantization vectors, stored as columns.
// Subspace kinds keep the tall basis they were built from so that callers
// can recover the low-dimensional coordinates of a word.
struct Codebook {
    Eigen::MatrixXcd vectors;
    int bits = 0;
    CodebookKind kind = CodebookKind::Rvq;
    std::optional<Eigen::MatrixXcd> basis;

    Eigen::Index dim() const { return vectors.rows(); }
    Eigen::Index count() const { return vectors.cols(); }
};

struct QuantizeOutcome {
    Eigen::Index index = 0;     // chosen word
    double chordal_error = 0.0; // 1 - |<h_dir, word>|^2
    double magnitude = 0.0;     // ||h||, fed back separately without loss
};

// `count` isotropic unit-norm vectors in C^dim, as columns. Drawn column by
// column, so the first 2^B columns of a larger draw from the same generator
// state reproduce the 2^B-word codebook exactly (nested codebooks).
Eigen::MatrixXcd isotropic_unit_vectors(Eigen::Index dim, Eigen::Index count, Rng& rng);

// Random vector quantization codebook: 2^bits isotropic unit vectors.
Codebook build_rvq(Eigen::Index dim, int bits, Rng& rng);

// Codebook aligned with a tall unit-column basis (M x P): every inner word w
// maps to basis * w, renormalized to unit length. The inner codebook must
// have dimension P. Kind becomes Subspace (RVQ inner) or SubspaceLloyd.
Codebook build_subspace(const Eigen::MatrixXcd& basis, const Codebook& inner);

struct LloydOptions {
    int max_iters = 100;
    double rel_tol = 1e-4;  // stop when distortion improves less than this
    int min_training_per_word = 50;
};

// Trains a 2^bits-word codebook on unit-norm training columns with the
// generalized Lloyd algorithm under the chordal metric: samples are assigned
// to the word maximizing |x^H c|^2 and each word is refreshed as the leading
// eigenvector of its cluster's outer-product sum. Words that lose every
// sample are reseeded from the worst-quantized sample of the largest
// cluster. Initial words are a random subset of the training set.
Codebook build_lloyd_inner(Eigen::Index dim, int bits, const Eigen::MatrixXcd& training,
                           Rng& rng, const LloydOptions& opts = {});

// Mean chordal distortion of `codebook` on unit-norm sample columns.
double mean_chordal_distortion(const Eigen::MatrixXcd& samples, const Codebook& codebook);

// Codebook matched to second-order statistics: words are correlation^(1/2) * u
// with isotropic u, renormalized. `correlation` must be Hermitian positive
// semidefinite (eigenvalues above -1e-9; small negatives are clipped to 0).
Codebook build_rotated_statistics(const Eigen::MatrixXcd& correlation, int bits, Rng& rng);

// Picks the word maximizing |h^H c_i|^2 (ties break to the lowest index) and
// reports the chordal error of the normalized channel plus ||h||.
QuantizeOutcome quantize(const Eigen::VectorXcd& h, const Codebook& codebook);

// Quantizes against a subspace codebook without materializing the tall
// words: scores are computed in the inner dimension through the basis Gram
// matrix. Produces the same outcome as quantize() on build_subspace().
class SubspaceQuantizer {
public:
    SubspaceQuantizer(Eigen::MatrixXcd basis, Eigen::MatrixXcd inner_words);

    QuantizeOutcome quantize(const Eigen::VectorXcd& h) const;

    // The renormalized tall word for an index (M-dimensional).
    Eigen::VectorXcd codeword(Eigen::Index index) const;

    Eigen::Index count() const { return inner_.cols(); }

private:
    Eigen::MatrixXcd basis_;  // M x P, unit columns
    Eigen::MatrixXcd inner_;  // P x 2^B
    Eigen::VectorXd norm2_;   // ||basis * w_i||^2 per word
};

// Binary round-trip format: header (kind, bits, dimension, word count)
// followed by the words in index order, each entry as little-endian
// real/imag float64 pairs. The text form is line-oriented and human
// readable; both forms reproduce the matrix exactly (text uses 17
// significant digits).
enum class CodebookFormat { Binary, Text };
void save_codebook(const Codebook& codebook, const std::string& path,
                   CodebookFormat format = CodebookFormat::Binary);
Codebook load_codebook(const std::string& path);

} // namespace mimofb

#endif
