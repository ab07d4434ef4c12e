#pragma once

// Linear entropy, mean bi-partite entanglement Q, and their analytic
// derivatives along tau for H(tau) = H0 + tau V, using the first-order
// eigenvector flow d|n>/dtau = sum_{m != n} |m> V_mn / (e_n - e_m).

#include <cmath>
#include <string>
#include <vector>

#include "quantum_core.hpp"

namespace qcbound {

// Imaginary parts of mathematically real sums are dropped when they are
// below this fraction of the magnitude scale of the summed terms.
inline constexpr double kImagResidueTolerance = 1e-10;

struct EntanglementInputs {
    SpectralDecomposition decomposition;  // of H(tau)
    HermitianOperator perturbation;       // V
    CMatrix v_eig;                        // <n|V|m>
    int n_qubits = 0;

    [[nodiscard]] Eigen::Index dim() const { return decomposition.dim(); }
    [[nodiscard]] double energy(Eigen::Index n) const { return decomposition.eigenvalues(n); }
    [[nodiscard]] CVector state(Eigen::Index n) const { return decomposition.eigenvectors.col(n); }
};

inline EntanglementInputs make_entanglement_inputs(SpectralDecomposition decomposition, HermitianOperator v,
                                                   int n_qubits) {
    if (v.dim() != decomposition.dim()) {
        throw ValidationError("perturbation dimension does not match the decomposition");
    }
    if (n_qubits < 1 || (Eigen::Index{1} << n_qubits) != decomposition.dim()) {
        throw ValidationError("dimension " + std::to_string(decomposition.dim()) + " is not 2^" +
                              std::to_string(n_qubits));
    }
    EntanglementInputs in;
    in.v_eig = decomposition.eigenvectors.adjoint() * v.matrix() * decomposition.eigenvectors;
    const double asym = max_abs(in.v_eig - in.v_eig.adjoint());
    if (asym > 1e-10 * std::max(1.0, max_abs(in.v_eig))) {
        throw InvariantError("V in the eigenbasis is not Hermitian (residue " + std::to_string(asym) + ")");
    }
    in.decomposition = std::move(decomposition);
    in.perturbation = std::move(v);
    in.n_qubits = n_qubits;
    return in;
}

inline double purity(const CMatrix& rho) { return rho.squaredNorm(); }

inline double linear_entropy(const CVector& state, const QubitPartition& partition) {
    return 1.0 - purity(reduced_density_matrix(state, partition));
}

inline double linear_entropy(Eigen::Index n, const SpectralDecomposition& d, const QubitPartition& partition) {
    return linear_entropy(CVector(d.eigenvectors.col(n)), partition);
}

// Single-site reduced density matrices rho_j, j = 0..N-1.
inline std::vector<CMatrix> single_site_densities(const CVector& state, int n_qubits) {
    std::vector<CMatrix> out;
    out.reserve(static_cast<std::size_t>(n_qubits));
    for (int j = 0; j < n_qubits; ++j) {
        out.push_back(reduced_density_matrix(state, QubitPartition::single(j, n_qubits)));
    }
    return out;
}

// Q = 2 - (2/N) sum_j tr(rho_j^2), in [0, 1].
inline double mean_bipartite_q(const CVector& state, int n_qubits) {
    if (n_qubits < 2 || state.size() != (Eigen::Index{1} << n_qubits)) {
        throw ValidationError("state dimension does not match 2^" + std::to_string(n_qubits));
    }
    double sum = 0.0;
    for (const auto& rho : single_site_densities(state, n_qubits)) {
        sum += purity(rho);
    }
    return 2.0 - 2.0 * sum / n_qubits;
}

inline double drop_imaginary(Complex z, double scale, const char* what) {
    if (std::abs(z.imag()) > kImagResidueTolerance * std::max(1.0, scale)) {
        throw InvariantError(std::string(what) + ": imaginary residue " + std::to_string(z.imag()) +
                             " on a real quantity");
    }
    return z.real();
}

// <k| d(|n><n|)/dtau |l>. The second term carries delta_kn (1 - delta_nl),
// following <k|d n> delta_nl + delta_kn <d n|l>.
inline Complex gamma_coeff(Eigen::Index n, Eigen::Index k, Eigen::Index l, const EntanglementInputs& in) {
    Complex out{0.0, 0.0};
    if (l == n && k != n) {
        require_gap(in.decomposition, n, k);
        out += in.v_eig(k, n) / (in.energy(n) - in.energy(k));
    }
    if (k == n && l != n) {
        require_gap(in.decomposition, n, l);
        out += in.v_eig(n, l) / (in.energy(n) - in.energy(l));
    }
    return out;
}

// A^n_kl = tr[ tr_B(|n><n|) tr_B(|k><l|) ].
inline Complex overlap_coeff(Eigen::Index n, Eigen::Index k, Eigen::Index l, const EntanglementInputs& in,
                             const QubitPartition& partition) {
    const CMatrix rho_n = partial_trace_dyad(n, n, in.decomposition, partition);
    const CMatrix dyad = partial_trace_dyad(k, l, in.decomposition, partition);
    return (rho_n * dyad).trace();
}

// dE_L^n/dtau = -2 sum_{k != n} (V_kn A^n_kn + V_nk A^n_nk) / (e_n - e_k).
inline double del_dtau(Eigen::Index n, const EntanglementInputs& in, const QubitPartition& partition) {
    const CMatrix rho_n = partial_trace_dyad(n, n, in.decomposition, partition);
    Complex sum{0.0, 0.0};
    double scale = 0.0;
    for (Eigen::Index k = 0; k < in.dim(); ++k) {
        if (k == n) {
            continue;
        }
        require_gap(in.decomposition, n, k);
        const Complex a_kn = (rho_n * partial_trace_dyad(k, n, in.decomposition, partition)).trace();
        const Complex a_nk = (rho_n * partial_trace_dyad(n, k, in.decomposition, partition)).trace();
        const Complex term =
            (in.v_eig(k, n) * a_kn + in.v_eig(n, k) * a_nk) / (in.energy(n) - in.energy(k));
        sum += term;
        scale += std::abs(term);
    }
    return drop_imaginary(-2.0 * sum, 2.0 * scale, "del_dtau");
}

// Same derivative through the full double sum -2 sum_kl gamma^n_kl A^n_kl.
// Only (k, n) and (n, l) pairs contribute, but every pair is visited.
inline double del_dtau_double_sum(Eigen::Index n, const EntanglementInputs& in,
                                  const QubitPartition& partition) {
    const CMatrix rho_n = partial_trace_dyad(n, n, in.decomposition, partition);
    Complex sum{0.0, 0.0};
    double scale = 0.0;
    for (Eigen::Index k = 0; k < in.dim(); ++k) {
        for (Eigen::Index l = 0; l < in.dim(); ++l) {
            const Complex g = gamma_coeff(n, k, l, in);
            if (g == Complex{0.0, 0.0}) {
                continue;
            }
            const Complex term = g * (rho_n * partial_trace_dyad(k, l, in.decomposition, partition)).trace();
            sum += term;
            scale += std::abs(term);
        }
    }
    return drop_imaginary(-2.0 * sum, 2.0 * scale, "del_dtau_double_sum");
}

// A^0_0k = sum_j tr[ tr_{!=j}(|0><0|) tr_{!=j}(|0><k|) ] for k = 0..dim-1.
// Each term is bounded by 1 in magnitude, so |A^0_0k| <= N.
inline CVector ground_overlap_coeffs(const EntanglementInputs& in) {
    const int n = in.n_qubits;
    const CVector ground = in.state(0);
    CVector out = CVector::Zero(in.dim());
    for (int j = 0; j < n; ++j) {
        const auto part = QubitPartition::single(j, n);
        const CMatrix g = part.reshape(ground);
        const CMatrix rho = g * g.adjoint();
        // tr[rho X_k] with X_k = g * reshape(k)^dagger.
        const CMatrix rho_g = rho * g;
        for (Eigen::Index k = 0; k < in.dim(); ++k) {
            const CMatrix gk = part.reshape(CVector(in.decomposition.eigenvectors.col(k)));
            out(k) += (gk.adjoint() * rho_g).trace();
        }
    }
    const double bound = static_cast<double>(n) * (1.0 + 1e-10);
    for (Eigen::Index k = 0; k < out.size(); ++k) {
        if (std::abs(out(k)) > bound) {
            throw InvariantError("|A^0_0k| exceeds N at k = " + std::to_string(k));
        }
    }
    return out;
}

// dQ^0/dtau = (8/N) sum_{k >= 1} Re[V_0k A^0_0k] / (e_k - e_0).
inline double dq0_dtau(const EntanglementInputs& in) {
    require_unique_ground_state(in.decomposition);
    const CVector a = ground_overlap_coeffs(in);
    double sum = 0.0;
    for (Eigen::Index k = 1; k < in.dim(); ++k) {
        require_gap(in.decomposition, 0, k);
        sum += (in.v_eig(0, k) * a(k)).real() / (in.energy(k) - in.energy(0));
    }
    return 8.0 / in.n_qubits * sum;
}

} // namespace qcbound
