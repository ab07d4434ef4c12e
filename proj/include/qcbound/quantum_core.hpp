#pragma once

// N-qubit operator algebra, Hermitian eigendecomposition and partial traces.
//
// Basis convention: site 0 is the most significant bit of the computational
// basis index. For N qubits, basis state |m> has site j in state
// (m >> (N - 1 - j)) & 1, and sigma_z on site j acts as +1 on bit 0, -1 on bit 1.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace qcbound {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kHermiticityTolerance = 1e-12;
inline constexpr double kSymmetrizeWarnThreshold = 1e-10;
inline constexpr double kDegeneracyGuard = 1e-10;

enum class PauliAxis { X, Y, Z };

inline bool is_power_of_two(std::size_t n) { return n != 0 && std::has_single_bit(n); }

inline int qubit_count_for(std::size_t dim) {
    if (!is_power_of_two(dim)) {
        throw ValidationError("dimension " + std::to_string(dim) + " is not a power of two");
    }
    return std::countr_zero(dim);
}

// Dense complex matrix known to be Hermitian. Construction symmetrizes the
// input as (M + M^dagger)/2; the size of that correction is kept and a
// warning is printed when it exceeds 1e-10.
class HermitianOperator {
  public:
    HermitianOperator() = default;

    explicit HermitianOperator(CMatrix m) {
        if (m.rows() != m.cols()) {
            throw ValidationError("HermitianOperator requires a square matrix");
        }
        if (m.rows() < 2) {
            throw ValidationError("HermitianOperator requires dim >= 2");
        }
        CMatrix sym = (m + m.adjoint()) * 0.5;
        correction_ = (sym - m).cwiseAbs().maxCoeff();
        if (correction_ > kSymmetrizeWarnThreshold) {
            std::clog << "qcbound: warning: input matrix was not Hermitian (max correction "
                      << correction_ << ")\n";
        }
        // Diagonal is exactly real after symmetrization up to rounding; pin it.
        for (Eigen::Index i = 0; i < sym.rows(); ++i) {
            sym(i, i) = Complex(sym(i, i).real(), 0.0);
        }
        matrix_ = std::move(sym);
        real_ = matrix_.imag().cwiseAbs().maxCoeff() == 0.0;
    }

    explicit HermitianOperator(const RMatrix& m) : HermitianOperator(CMatrix(m.cast<Complex>())) {}

    [[nodiscard]] Eigen::Index dim() const { return matrix_.rows(); }
    [[nodiscard]] const CMatrix& matrix() const { return matrix_; }
    [[nodiscard]] bool is_real() const { return real_; }
    [[nodiscard]] double symmetrization_correction() const { return correction_; }
    [[nodiscard]] Complex operator()(Eigen::Index i, Eigen::Index j) const { return matrix_(i, j); }

    [[nodiscard]] double trace() const { return matrix_.trace().real(); }
    // Frobenius norm.
    [[nodiscard]] double norm() const { return matrix_.norm(); }

    friend HermitianOperator operator+(const HermitianOperator& a, const HermitianOperator& b) {
        return HermitianOperator(CMatrix(a.matrix_ + b.matrix_));
    }
    friend HermitianOperator operator-(const HermitianOperator& a, const HermitianOperator& b) {
        return HermitianOperator(CMatrix(a.matrix_ - b.matrix_));
    }
    friend HermitianOperator operator*(double s, const HermitianOperator& a) {
        return HermitianOperator(CMatrix(s * a.matrix_));
    }

  private:
    CMatrix matrix_;
    double correction_ = 0.0;
    bool real_ = true;
};

inline HermitianOperator pauli(PauliAxis axis) {
    CMatrix m = CMatrix::Zero(2, 2);
    switch (axis) {
    case PauliAxis::X:
        m(0, 1) = 1.0;
        m(1, 0) = 1.0;
        break;
    case PauliAxis::Y:
        m(0, 1) = Complex(0.0, -1.0);
        m(1, 0) = Complex(0.0, 1.0);
        break;
    case PauliAxis::Z:
        m(0, 0) = 1.0;
        m(1, 1) = -1.0;
        break;
    }
    return HermitianOperator(std::move(m));
}

inline CMatrix identity(Eigen::Index dim) { return CMatrix::Identity(dim, dim); }

inline void check_site(int site, int n_qubits) {
    if (n_qubits < 1 || n_qubits > 20) {
        throw ValidationError("n_qubits must be in [1, 20], got " + std::to_string(n_qubits));
    }
    if (site < 0 || site >= n_qubits) {
        throw ValidationError("site " + std::to_string(site) + " out of range for " +
                              std::to_string(n_qubits) + " qubits");
    }
}

inline int site_bit(std::size_t index, int site, int n_qubits) {
    return static_cast<int>((index >> (n_qubits - 1 - site)) & 1U);
}

// Any 2x2 matrix placed on one site, identity elsewhere. Built entry-wise
// from the bit structure rather than by repeated Kronecker products.
inline CMatrix embed_site_matrix(const CMatrix& op, int site, int n_qubits) {
    check_site(site, n_qubits);
    if (op.rows() != 2 || op.cols() != 2) {
        throw ValidationError("embed_site expects a 2x2 operator");
    }
    const std::size_t dim = std::size_t{1} << n_qubits;
    const std::size_t mask = std::size_t{1} << (n_qubits - 1 - site);
    CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t r = 0; r < dim; ++r) {
        const std::size_t base = r & ~mask;
        const int rb = site_bit(r, site, n_qubits);
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(base)) = op(rb, 0);
        out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(base | mask)) = op(rb, 1);
    }
    return out;
}

inline HermitianOperator embed_site(const HermitianOperator& op, int site, int n_qubits) {
    return HermitianOperator(embed_site_matrix(op.matrix(), site, n_qubits));
}

// sigma_i . sigma_j = sum over x, y, z of sigma_a(i) sigma_a(j), which equals
// 2 SWAP_ij - 1; the entries are written directly from that identity.
inline HermitianOperator heisenberg_coupling(int i, int j, int n_qubits) {
    check_site(i, n_qubits);
    check_site(j, n_qubits);
    if (i == j) {
        throw ValidationError("heisenberg_coupling requires distinct sites");
    }
    const std::size_t dim = std::size_t{1} << n_qubits;
    const std::size_t mi = std::size_t{1} << (n_qubits - 1 - i);
    const std::size_t mj = std::size_t{1} << (n_qubits - 1 - j);
    CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t m = 0; m < dim; ++m) {
        const bool same = ((m & mi) != 0) == ((m & mj) != 0);
        const auto idx = static_cast<Eigen::Index>(m);
        if (same) {
            out(idx, idx) = 1.0;
        } else {
            out(idx, idx) = -1.0;
            out(idx, static_cast<Eigen::Index>(m ^ (mi | mj))) = 2.0;
        }
    }
    return HermitianOperator(std::move(out));
}

// Sum_j sigma_z(j); diagonal, entries N - 2*popcount(m).
inline HermitianOperator total_sigma_z(int n_qubits) {
    check_site(0, n_qubits);
    const std::size_t dim = std::size_t{1} << n_qubits;
    CMatrix out = CMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t m = 0; m < dim; ++m) {
        out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m)) =
            static_cast<double>(n_qubits - 2 * std::popcount(m));
    }
    return HermitianOperator(std::move(out));
}

inline double max_abs(const CMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

struct SpectralDecomposition {
    RVector eigenvalues;   // ascending
    CMatrix eigenvectors;  // column n is |n>
    double min_gap = 0.0;  // smallest consecutive eigenvalue difference

    [[nodiscard]] Eigen::Index dim() const { return eigenvalues.size(); }
    [[nodiscard]] double width() const {
        return eigenvalues.size() == 0 ? 0.0 : eigenvalues(eigenvalues.size() - 1) - eigenvalues(0);
    }
    [[nodiscard]] CVector state(Eigen::Index n) const { return eigenvectors.col(n); }
};

inline double smallest_gap(const RVector& ascending) {
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 1; i < ascending.size(); ++i) {
        gap = std::min(gap, ascending(i) - ascending(i - 1));
    }
    return gap;
}

// Largest-magnitude component made real and positive (first index wins ties).
inline void fix_phases(CMatrix& vectors) {
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
        Eigen::Index best = 0;
        double best_abs = -1.0;
        for (Eigen::Index r = 0; r < vectors.rows(); ++r) {
            const double a = std::abs(vectors(r, c));
            if (a > best_abs) {
                best_abs = a;
                best = r;
            }
        }
        if (best_abs > 0.0) {
            const Complex phase = std::conj(vectors(best, c)) / best_abs;
            vectors.col(c) *= phase;
            vectors(best, c) = Complex(vectors(best, c).real(), 0.0);
        }
    }
}

// Full eigendecomposition. Real-symmetric input goes through the real solver.
inline SpectralDecomposition eigensystem(const HermitianOperator& h) {
    SpectralDecomposition out;
    if (h.is_real()) {
        const RMatrix re = h.matrix().real();
        Eigen::SelfAdjointEigenSolver<RMatrix> solver(re, Eigen::ComputeEigenvectors);
        if (solver.info() != Eigen::Success) {
            throw ConvergenceError("real symmetric eigensolver did not converge (dim " +
                                   std::to_string(h.dim()) + ")");
        }
        out.eigenvalues = solver.eigenvalues();
        out.eigenvectors = solver.eigenvectors().cast<Complex>();
    } else {
        Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix(), Eigen::ComputeEigenvectors);
        if (solver.info() != Eigen::Success) {
            throw ConvergenceError("Hermitian eigensolver did not converge (dim " +
                                   std::to_string(h.dim()) + ")");
        }
        out.eigenvalues = solver.eigenvalues();
        out.eigenvectors = solver.eigenvectors();
    }
    fix_phases(out.eigenvectors);
    out.min_gap = smallest_gap(out.eigenvalues);
    return out;
}

inline RVector eigenvalues_only(const HermitianOperator& h) {
    if (h.is_real()) {
        const RMatrix re = h.matrix().real();
        Eigen::SelfAdjointEigenSolver<RMatrix> solver(re, Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success) {
            throw ConvergenceError("real symmetric eigensolver did not converge");
        }
        return solver.eigenvalues();
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(h.matrix(), Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw ConvergenceError("Hermitian eigensolver did not converge");
    }
    return solver.eigenvalues();
}

// Throws DegenerateSpectrumError when levels n and k sit closer than the
// guard (relative to the spectral width).
inline void require_gap(const SpectralDecomposition& d, Eigen::Index n, Eigen::Index k) {
    const double gap = std::abs(d.eigenvalues(n) - d.eigenvalues(k));
    const double guard = kDegeneracyGuard * std::max(d.width(), std::numeric_limits<double>::min());
    if (!(gap >= guard)) {
        throw DegenerateSpectrumError("levels " + std::to_string(n) + " and " + std::to_string(k) +
                                      " are degenerate (gap " + std::to_string(gap) + ")");
    }
}

inline void require_unique_ground_state(const SpectralDecomposition& d) {
    if (d.dim() < 2) {
        throw ValidationError("spectrum needs at least two levels");
    }
    require_gap(d, 0, 1);
}

// Subsystem A of an N-qubit register: the kept sites, in ascending order.
// Within A, the lowest kept site is the most significant bit, matching the
// full-register convention.
class QubitPartition {
  public:
    QubitPartition(int n_qubits, std::vector<int> kept) : n_qubits_(n_qubits), kept_(std::move(kept)) {
        if (n_qubits_ < 2 || n_qubits_ > 20) {
            throw ValidationError("partition needs 2..20 qubits, got " + std::to_string(n_qubits_));
        }
        std::sort(kept_.begin(), kept_.end());
        kept_.erase(std::unique(kept_.begin(), kept_.end()), kept_.end());
        if (kept_.empty() || static_cast<int>(kept_.size()) >= n_qubits_) {
            throw ValidationError("kept set must be a nonempty proper subset of the sites");
        }
        for (int s : kept_) {
            check_site(s, n_qubits_);
        }
        const std::size_t dim = std::size_t{1} << n_qubits_;
        row_.resize(dim);
        col_.resize(dim);
        for (std::size_t m = 0; m < dim; ++m) {
            std::size_t a = 0;
            std::size_t b = 0;
            for (int s = 0; s < n_qubits_; ++s) {
                const auto bit = static_cast<std::size_t>(site_bit(m, s, n_qubits_));
                if (std::binary_search(kept_.begin(), kept_.end(), s)) {
                    a = (a << 1) | bit;
                } else {
                    b = (b << 1) | bit;
                }
            }
            row_[m] = static_cast<Eigen::Index>(a);
            col_[m] = static_cast<Eigen::Index>(b);
        }
    }

    static QubitPartition single(int site, int n_qubits) { return QubitPartition(n_qubits, {site}); }

    [[nodiscard]] int n_qubits() const { return n_qubits_; }
    [[nodiscard]] const std::vector<int>& kept() const { return kept_; }
    [[nodiscard]] Eigen::Index dim_full() const { return static_cast<Eigen::Index>(row_.size()); }
    [[nodiscard]] Eigen::Index dim_kept() const { return Eigen::Index{1} << kept_.size(); }
    [[nodiscard]] Eigen::Index dim_traced() const { return dim_full() / dim_kept(); }

    // Reshape a full-register vector into (kept index, traced index).
    [[nodiscard]] CMatrix reshape(const CVector& v) const {
        if (v.size() != dim_full()) {
            throw ValidationError("state dimension " + std::to_string(v.size()) +
                                  " does not match 2^" + std::to_string(n_qubits_));
        }
        CMatrix out(dim_kept(), dim_traced());
        for (Eigen::Index m = 0; m < v.size(); ++m) {
            out(row_[static_cast<std::size_t>(m)], col_[static_cast<std::size_t>(m)]) = v(m);
        }
        return out;
    }

  private:
    int n_qubits_;
    std::vector<int> kept_;
    std::vector<Eigen::Index> row_;
    std::vector<Eigen::Index> col_;
};

// tr_B(|ket><bra|) on the kept subsystem.
inline CMatrix partial_trace_dyad(const CVector& ket, const CVector& bra, const QubitPartition& partition) {
    if (!is_power_of_two(static_cast<std::size_t>(ket.size())) ||
        !is_power_of_two(static_cast<std::size_t>(bra.size()))) {
        throw ValidationError("qubit partial trace needs a power-of-two dimension");
    }
    return partition.reshape(ket) * partition.reshape(bra).adjoint();
}

inline CMatrix partial_trace_dyad(Eigen::Index k, Eigen::Index l, const SpectralDecomposition& d,
                                  const QubitPartition& partition) {
    return partial_trace_dyad(CVector(d.eigenvectors.col(k)), CVector(d.eigenvectors.col(l)), partition);
}

inline CMatrix reduced_density_matrix(const CVector& state, const QubitPartition& partition) {
    return partial_trace_dyad(state, state, partition);
}

} // namespace qcbound
