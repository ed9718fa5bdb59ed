// SPDX-License-Identifier: Apache-2.0
//
// Channel-direction codebooks and quantizers.
//
// Every codebook stores unit-norm words as matrix columns.  Random vector
// quantization draws isotropic words in the full channel dimension; the
// subspace variants draw (or train) words in the low path dimension and
// lift them through a tall steering basis; the statistics-rotated variant
// shapes isotropic draws with the square root of a correlation matrix.

#include "mimofb/codebook.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace mimofb {

namespace {

void check_bits(int bits) {
    if (bits < 0 || bits > kMaxCodebookBits) {
        throw std::invalid_argument("codebook bits must lie in [0, " +
                                    std::to_string(kMaxCodebookBits) + "]");
    }
}

// Scores |x^H c_i|^2 for one unit-norm direction against all words.
Eigen::VectorXd word_scores(const Eigen::VectorXcd& dir, const Eigen::MatrixXcd& words) {
    return (words.adjoint() * dir).cwiseAbs2();
}

Eigen::Index argmax_lowest(const Eigen::VectorXd& scores) {
    Eigen::Index best = 0;
    double best_score = -1.0;
    for (Eigen::Index i = 0; i < scores.size(); ++i) {
        if (scores(i) > best_score) {
            best_score = scores(i);
            best = i;
        }
    }
    return best;
}

} // namespace

Eigen::MatrixXcd isotropic_unit_vectors(Eigen::Index dim, Eigen::Index count, Rng& rng) {
    if (dim < 1 || count < 1) {
        throw std::invalid_argument("isotropic draw needs positive dimension and count");
    }
    Eigen::MatrixXcd out(dim, count);
    // Column-by-column draw order makes prefixes of a longer draw reproduce
    // a shorter one from the same generator state (nested codebooks).
    for (Eigen::Index c = 0; c < count; ++c) {
        double norm2 = 0.0;
        do {
            for (Eigen::Index m = 0; m < dim; ++m) {
                out(m, c) = rng.cnormal();
            }
            norm2 = out.col(c).squaredNorm();
        } while (!(norm2 > 0.0));
        out.col(c) /= std::sqrt(norm2);
    }
    return out;
}

Codebook build_rvq(Eigen::Index dim, int bits, Rng& rng) {
    if (dim < 1) {
        throw std::invalid_argument("codebook dimension must be positive");
    }
    check_bits(bits);
    Codebook cb;
    cb.vectors = isotropic_unit_vectors(dim, Eigen::Index(1) << bits, rng);
    cb.bits = bits;
    cb.kind = CodebookKind::Rvq;
    return cb;
}

Codebook build_subspace(const Eigen::MatrixXcd& basis, const Codebook& inner) {
    if (basis.rows() < basis.cols() || basis.cols() < 1) {
        throw std::invalid_argument("subspace basis must be tall");
    }
    if (inner.dim() != basis.cols()) {
        throw std::invalid_argument("inner codebook dimension must equal the basis width");
    }
    Codebook cb;
    cb.vectors.resize(basis.rows(), inner.count());
    for (Eigen::Index i = 0; i < inner.count(); ++i) {
        Eigen::VectorXcd v = basis * inner.vectors.col(i);
        const double norm = v.norm();
        if (!(norm > 0.0)) {
            throw std::invalid_argument("inner word lies in the null space of the basis");
        }
        cb.vectors.col(i) = v / norm;
    }
    cb.bits = inner.bits;
    cb.kind = (inner.kind == CodebookKind::Lloyd) ? CodebookKind::SubspaceLloyd
                                                  : CodebookKind::Subspace;
    cb.basis = basis;
    return cb;
}

Codebook build_lloyd_inner(Eigen::Index dim, int bits, const Eigen::MatrixXcd& training,
                           Rng& rng, const LloydOptions& opts) {
    if (dim < 1) {
        throw std::invalid_argument("codebook dimension must be positive");
    }
    check_bits(bits);
    if (training.rows() != dim) {
        throw std::invalid_argument("training samples must match the codebook dimension");
    }
    const Eigen::Index count = Eigen::Index(1) << bits;
    const Eigen::Index samples = training.cols();
    if (samples < count * opts.min_training_per_word) {
        throw std::invalid_argument("not enough training samples for the requested codebook size");
    }

    // Initial words: a random subset of distinct training columns.
    Eigen::MatrixXcd words(dim, count);
    {
        std::vector<Eigen::Index> picked;
        picked.reserve(static_cast<std::size_t>(count));
        while (picked.size() < static_cast<std::size_t>(count)) {
            const Eigen::Index cand =
                static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(samples));
            const Eigen::Index idx = std::min(cand, samples - 1);
            bool seen = false;
            for (Eigen::Index p : picked) {
                if (p == idx) {
                    seen = true;
                    break;
                }
            }
            if (!seen) {
                picked.push_back(idx);
            }
        }
        for (Eigen::Index i = 0; i < count; ++i) {
            words.col(i) = training.col(picked[static_cast<std::size_t>(i)]);
        }
    }

    std::vector<Eigen::Index> assign(static_cast<std::size_t>(samples), 0);
    std::vector<double> best_score(static_cast<std::size_t>(samples), 0.0);
    std::vector<Eigen::MatrixXcd> scatter(static_cast<std::size_t>(count));
    std::vector<Eigen::Index> members(static_cast<std::size_t>(count), 0);

    // Score in column blocks so the score matrix never grows past a few
    // hundred megabytes even for large codebooks.
    const Eigen::Index block = std::max<Eigen::Index>(
        Eigen::Index(256), (Eigen::Index(1) << 22) / std::max<Eigen::Index>(count, 1));

    double prev_distortion = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < opts.max_iters; ++iter) {
        for (auto& s : scatter) {
            s = Eigen::MatrixXcd::Zero(dim, dim);
        }
        std::fill(members.begin(), members.end(), Eigen::Index(0));

        double distortion = 0.0;
        for (Eigen::Index start = 0; start < samples; start += block) {
            const Eigen::Index width = std::min(block, samples - start);
            const Eigen::MatrixXd scores =
                (words.adjoint() * training.middleCols(start, width)).cwiseAbs2();
            for (Eigen::Index c = 0; c < width; ++c) {
                Eigen::Index best = 0;
                double sc = scores(0, c);
                for (Eigen::Index w = 1; w < count; ++w) {
                    if (scores(w, c) > sc) {
                        sc = scores(w, c);
                        best = w;
                    }
                }
                const Eigen::Index col = start + c;
                assign[static_cast<std::size_t>(col)] = best;
                best_score[static_cast<std::size_t>(col)] = sc;
                distortion += 1.0 - sc;
                scatter[static_cast<std::size_t>(best)].noalias() +=
                    training.col(col) * training.col(col).adjoint();
                ++members[static_cast<std::size_t>(best)];
            }
        }
        distortion /= static_cast<double>(samples);

        // Refresh each word as the dominant eigenvector of its cluster; the
        // dominant eigenvector maximizes the average squared projection.
        for (Eigen::Index w = 0; w < count; ++w) {
            if (members[static_cast<std::size_t>(w)] == 0) {
                // Reseed an empty cluster from the worst-quantized sample of
                // the largest cluster so every word keeps earning members.
                Eigen::Index big = 0;
                for (Eigen::Index v = 1; v < count; ++v) {
                    if (members[static_cast<std::size_t>(v)] > members[static_cast<std::size_t>(big)]) {
                        big = v;
                    }
                }
                Eigen::Index worst_col = -1;
                double worst = 2.0;
                for (Eigen::Index col = 0; col < samples; ++col) {
                    if (assign[static_cast<std::size_t>(col)] == big &&
                        best_score[static_cast<std::size_t>(col)] < worst) {
                        worst = best_score[static_cast<std::size_t>(col)];
                        worst_col = col;
                    }
                }
                if (worst_col >= 0) {
                    words.col(w) = training.col(worst_col);
                    // Hand the sample over so another empty cluster does not
                    // grab the same one.
                    assign[static_cast<std::size_t>(worst_col)] = w;
                    best_score[static_cast<std::size_t>(worst_col)] = 1.0;
                    members[static_cast<std::size_t>(w)] = 1;
                    --members[static_cast<std::size_t>(big)];
                }
                continue;
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(scatter[static_cast<std::size_t>(w)]);
            Eigen::VectorXcd lead = eig.eigenvectors().col(dim - 1); // ascending order
            words.col(w) = lead / lead.norm();
        }

        if (prev_distortion - distortion <= opts.rel_tol * std::max(prev_distortion, 1e-12) &&
            iter > 0) {
            break;
        }
        prev_distortion = distortion;
    }

    Codebook cb;
    cb.vectors = words;
    cb.bits = bits;
    cb.kind = CodebookKind::Lloyd;
    return cb;
}

double mean_chordal_distortion(const Eigen::MatrixXcd& samples, const Codebook& codebook) {
    if (samples.rows() != codebook.dim()) {
        throw std::invalid_argument("sample dimension must match the codebook");
    }
    if (samples.cols() < 1) {
        throw std::invalid_argument("need at least one sample");
    }
    const Eigen::Index count = codebook.count();
    const Eigen::Index block = std::max<Eigen::Index>(
        Eigen::Index(256), (Eigen::Index(1) << 22) / std::max<Eigen::Index>(count, 1));
    double acc = 0.0;
    for (Eigen::Index start = 0; start < samples.cols(); start += block) {
        const Eigen::Index width = std::min(block, samples.cols() - start);
        const Eigen::MatrixXd scores =
            (codebook.vectors.adjoint() * samples.middleCols(start, width)).cwiseAbs2();
        acc += static_cast<double>(width) - scores.colwise().maxCoeff().sum();
    }
    return acc / static_cast<double>(samples.cols());
}

Codebook build_rotated_statistics(const Eigen::MatrixXcd& correlation, int bits, Rng& rng) {
    if (correlation.rows() != correlation.cols() || correlation.rows() < 1) {
        throw std::invalid_argument("correlation matrix must be square");
    }
    check_bits(bits);
    const double scale = std::max(1.0, correlation.norm());
    if ((correlation - correlation.adjoint()).norm() > 1e-9 * scale) {
        throw std::invalid_argument("correlation matrix must be Hermitian");
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(correlation);
    Eigen::VectorXd lam = eig.eigenvalues();
    if (lam.minCoeff() < -1e-9 * scale) {
        throw std::invalid_argument("correlation matrix must be positive semidefinite");
    }
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        lam(i) = std::sqrt(std::max(lam(i), 0.0));
    }
    // Symmetric square root, so identity statistics pass draws through
    // unchanged and the codebook coincides with plain RVQ.
    const Eigen::MatrixXcd root =
        eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().adjoint();

    const Eigen::Index dim = correlation.rows();
    const Eigen::Index count = Eigen::Index(1) << bits;
    Codebook cb;
    cb.vectors.resize(dim, count);
    for (Eigen::Index i = 0; i < count; ++i) {
        Eigen::VectorXcd shaped;
        double norm = 0.0;
        int attempts = 0;
        do {
            // Consumes the generator exactly like an RVQ draw, then shapes.
            shaped = root * isotropic_unit_vectors(dim, 1, rng);
            norm = shaped.norm();
            if (++attempts > 100) {
                throw std::runtime_error("correlation square root annihilates every draw");
            }
        } while (!(norm > 1e-12));
        cb.vectors.col(i) = shaped / norm;
    }
    cb.bits = bits;
    cb.kind = CodebookKind::RotatedStatistics;
    return cb;
}

QuantizeOutcome quantize(const Eigen::VectorXcd& h, const Codebook& codebook) {
    if (h.size() != codebook.dim()) {
        throw std::invalid_argument("channel dimension must match the codebook");
    }
    const double mag = h.norm();
    if (!(mag > 0.0)) {
        throw std::invalid_argument("cannot quantize a zero channel");
    }
    const Eigen::VectorXd scores = word_scores(h / mag, codebook.vectors);
    const Eigen::Index best = argmax_lowest(scores);
    QuantizeOutcome out;
    out.index = best;
    out.chordal_error = std::max(0.0, 1.0 - scores(best));
    out.magnitude = mag;
    return out;
}

SubspaceQuantizer::SubspaceQuantizer(Eigen::MatrixXcd basis, Eigen::MatrixXcd inner_words)
    : basis_(std::move(basis)), inner_(std::move(inner_words)) {
    if (basis_.rows() < basis_.cols() || basis_.cols() < 1) {
        throw std::invalid_argument("subspace basis must be tall");
    }
    if (inner_.rows() != basis_.cols() || inner_.cols() < 1) {
        throw std::invalid_argument("inner words must match the basis width");
    }
    // ||basis * w_i||^2 through the P x P Gram matrix, without forming the
    // tall words: cost O(P^2) per word instead of O(M P).
    const Eigen::MatrixXcd gram = basis_.adjoint() * basis_;
    const Eigen::MatrixXcd t = gram * inner_;
    norm2_ = inner_.conjugate().cwiseProduct(t).colwise().sum().real().transpose();
    for (Eigen::Index i = 0; i < norm2_.size(); ++i) {
        if (!(norm2_(i) > 0.0)) {
            throw std::invalid_argument("inner word lies in the null space of the basis");
        }
    }
}

QuantizeOutcome SubspaceQuantizer::quantize(const Eigen::VectorXcd& h) const {
    if (h.size() != basis_.rows()) {
        throw std::invalid_argument("channel dimension must match the basis");
    }
    const double mag = h.norm();
    if (!(mag > 0.0)) {
        throw std::invalid_argument("cannot quantize a zero channel");
    }
    // |h^H (A w_i)|^2 / (||h||^2 ||A w_i||^2) = |w_i^H (A^H h)|^2 / (||h||^2 n2_i).
    const Eigen::VectorXcd y = basis_.adjoint() * h;
    const Eigen::VectorXd proj = (inner_.adjoint() * y).cwiseAbs2();
    Eigen::Index best = 0;
    double best_score = -1.0;
    const double inv_h2 = 1.0 / (mag * mag);
    for (Eigen::Index i = 0; i < proj.size(); ++i) {
        const double score = proj(i) * inv_h2 / norm2_(i);
        if (score > best_score) {
            best_score = score;
            best = i;
        }
    }
    QuantizeOutcome out;
    out.index = best;
    out.chordal_error = std::max(0.0, 1.0 - best_score);
    out.magnitude = mag;
    return out;
}

Eigen::VectorXcd SubspaceQuantizer::codeword(Eigen::Index index) const {
    if (index < 0 || index >= inner_.cols()) {
        throw std::invalid_argument("codeword index out of range");
    }
    Eigen::VectorXcd v = basis_ * inner_.col(index);
    return v / v.norm();
}

// --------------------------------------------------------------------------
// Serialization.
// --------------------------------------------------------------------------

namespace {

constexpr char kBinaryMagic[8] = {'m', 'f', 'c', 'b', '0', '0', '0', '1'};
constexpr const char* kTextMagic = "mimofb-codebook-text-1";

void write_binary(const Codebook& cb, std::ofstream& out) {
    out.write(kBinaryMagic, sizeof(kBinaryMagic));
    const std::int32_t kind = static_cast<std::int32_t>(cb.kind);
    const std::int32_t bits = cb.bits;
    const std::int64_t dim = cb.dim();
    const std::int64_t count = cb.count();
    const std::int64_t basis_rows = cb.basis ? cb.basis->rows() : 0;
    const std::int64_t basis_cols = cb.basis ? cb.basis->cols() : 0;
    out.write(reinterpret_cast<const char*>(&kind), sizeof(kind));
    out.write(reinterpret_cast<const char*>(&bits), sizeof(bits));
    out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    out.write(reinterpret_cast<const char*>(&count), sizeof(count));
    out.write(reinterpret_cast<const char*>(&basis_rows), sizeof(basis_rows));
    out.write(reinterpret_cast<const char*>(&basis_cols), sizeof(basis_cols));
    out.write(reinterpret_cast<const char*>(cb.vectors.data()),
              static_cast<std::streamsize>(sizeof(std::complex<double>) * dim * count));
    if (cb.basis) {
        out.write(reinterpret_cast<const char*>(cb.basis->data()),
                  static_cast<std::streamsize>(sizeof(std::complex<double>) * basis_rows * basis_cols));
    }
}

void write_matrix_text(const Eigen::MatrixXcd& m, std::ofstream& out) {
    char buf[32];
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            if (r > 0) {
                out << ' ';
            }
            std::snprintf(buf, sizeof(buf), "%.17g", m(r, c).real());
            out << buf << ' ';
            std::snprintf(buf, sizeof(buf), "%.17g", m(r, c).imag());
            out << buf;
        }
        out << '\n';
    }
}

void write_text(const Codebook& cb, std::ofstream& out) {
    out << kTextMagic << '\n';
    out << "kind " << static_cast<int>(cb.kind) << '\n';
    out << "bits " << cb.bits << '\n';
    out << "dim " << cb.dim() << '\n';
    out << "count " << cb.count() << '\n';
    out << "basis " << (cb.basis ? cb.basis->rows() : 0) << ' '
        << (cb.basis ? cb.basis->cols() : 0) << '\n';
    write_matrix_text(cb.vectors, out);
    if (cb.basis) {
        write_matrix_text(*cb.basis, out);
    }
}

Eigen::MatrixXcd read_matrix_text(std::istream& in, Eigen::Index rows, Eigen::Index cols,
                                  const std::string& path) {
    Eigen::MatrixXcd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            double re = 0.0;
            double im = 0.0;
            if (!(in >> re >> im)) {
                throw std::runtime_error("truncated text codebook: " + path);
            }
            m(r, c) = std::complex<double>(re, im);
        }
    }
    return m;
}

Codebook load_binary(std::ifstream& in, const std::string& path) {
    std::int32_t kind = 0;
    std::int32_t bits = 0;
    std::int64_t dim = 0;
    std::int64_t count = 0;
    std::int64_t basis_rows = 0;
    std::int64_t basis_cols = 0;
    in.read(reinterpret_cast<char*>(&kind), sizeof(kind));
    in.read(reinterpret_cast<char*>(&bits), sizeof(bits));
    in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    in.read(reinterpret_cast<char*>(&basis_rows), sizeof(basis_rows));
    in.read(reinterpret_cast<char*>(&basis_cols), sizeof(basis_cols));
    if (!in || dim < 1 || count < 1 || bits < 0 || bits > kMaxCodebookBits ||
        basis_rows < 0 || basis_cols < 0) {
        throw std::runtime_error("corrupt codebook header: " + path);
    }
    Codebook cb;
    cb.kind = static_cast<CodebookKind>(kind);
    cb.bits = bits;
    cb.vectors.resize(dim, count);
    in.read(reinterpret_cast<char*>(cb.vectors.data()),
            static_cast<std::streamsize>(sizeof(std::complex<double>) * dim * count));
    if (basis_rows > 0 && basis_cols > 0) {
        Eigen::MatrixXcd basis(basis_rows, basis_cols);
        in.read(reinterpret_cast<char*>(basis.data()),
                static_cast<std::streamsize>(sizeof(std::complex<double>) * basis_rows * basis_cols));
        cb.basis = std::move(basis);
    }
    if (!in) {
        throw std::runtime_error("truncated binary codebook: " + path);
    }
    return cb;
}

Codebook load_text(std::ifstream& in, const std::string& path) {
    std::string key;
    int kind = 0;
    int bits = 0;
    Eigen::Index dim = 0;
    Eigen::Index count = 0;
    Eigen::Index basis_rows = 0;
    Eigen::Index basis_cols = 0;
    if (!(in >> key >> kind) || key != "kind") {
        throw std::runtime_error("corrupt text codebook: " + path);
    }
    if (!(in >> key >> bits) || key != "bits") {
        throw std::runtime_error("corrupt text codebook: " + path);
    }
    if (!(in >> key >> dim) || key != "dim") {
        throw std::runtime_error("corrupt text codebook: " + path);
    }
    if (!(in >> key >> count) || key != "count") {
        throw std::runtime_error("corrupt text codebook: " + path);
    }
    if (!(in >> key >> basis_rows >> basis_cols) || key != "basis") {
        throw std::runtime_error("corrupt text codebook: " + path);
    }
    if (dim < 1 || count < 1 || bits < 0 || bits > kMaxCodebookBits) {
        throw std::runtime_error("corrupt codebook header: " + path);
    }
    Codebook cb;
    cb.kind = static_cast<CodebookKind>(kind);
    cb.bits = bits;
    cb.vectors = read_matrix_text(in, dim, count, path);
    if (basis_rows > 0 && basis_cols > 0) {
        cb.basis = read_matrix_text(in, basis_rows, basis_cols, path);
    }
    return cb;
}

} // namespace

void save_codebook(const Codebook& codebook, const std::string& path, CodebookFormat format) {
    if (codebook.dim() < 1 || codebook.count() < 1) {
        throw std::invalid_argument("cannot save an empty codebook");
    }
    std::ofstream out(path, format == CodebookFormat::Binary
                                ? std::ios::binary | std::ios::trunc
                                : std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open codebook file for writing: " + path);
    }
    if (format == CodebookFormat::Binary) {
        write_binary(codebook, out);
    } else {
        write_text(codebook, out);
    }
    out.flush();
    if (!out) {
        throw std::runtime_error("failed to write codebook file: " + path);
    }
}

Codebook load_codebook(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open codebook file: " + path);
    }
    char magic[8] = {};
    in.read(magic, sizeof(magic));
    if (in && std::memcmp(magic, kBinaryMagic, sizeof(kBinaryMagic)) == 0) {
        return load_binary(in, path);
    }
    // Not the binary magic: retry as text.
    in.clear();
    in.seekg(0);
    std::string header;
    if (!std::getline(in, header) || header != kTextMagic) {
        throw std::runtime_error("unrecognized codebook file format: " + path);
    }
    return load_text(in, path);
}

} // namespace mimofb
