#pragma once

// Level curvature, the bound constants b and b', the avoided-crossing
// two-level approximation, and the saturation index.
//
// Curvature convention: K_n = d^2 e_n / dtau^2 = 2 sum_{m != n} |V_nm|^2 / (e_n - e_m).

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>

#include "entanglement.hpp"

namespace qcbound {

inline double level_curvature(Eigen::Index n, const EntanglementInputs& in) {
    double sum = 0.0;
    for (Eigen::Index m = 0; m < in.dim(); ++m) {
        if (m == n) {
            continue;
        }
        require_gap(in.decomposition, n, m);
        sum += std::norm(in.v_eig(n, m)) / (in.energy(n) - in.energy(m));
    }
    return 2.0 * sum;
}

// sum_{k >= 1} 1 / (e_k - e_0)
inline double inverse_gap_sum(const RVector& eigenvalues) {
    if (eigenvalues.size() < 2) {
        throw ValidationError("spectrum needs at least two levels");
    }
    const double width = eigenvalues(eigenvalues.size() - 1) - eigenvalues(0);
    double sum = 0.0;
    for (Eigen::Index k = 1; k < eigenvalues.size(); ++k) {
        const double gap = eigenvalues(k) - eigenvalues(0);
        if (!(gap >= kDegeneracyGuard * width) || gap <= 0.0) {
            throw DegenerateSpectrumError("ground state is degenerate with level " + std::to_string(k));
        }
        sum += 1.0 / gap;
    }
    return sum;
}

inline double bound_b(const RVector& eigenvalues) { return 8.0 * std::sqrt(inverse_gap_sum(eigenvalues)); }
inline double bound_b(const SpectralDecomposition& d) { return bound_b(d.eigenvalues); }

// How the uniform half-width a of the per-site overlap terms is chosen for b'.
enum class BPrimeScale { InversePowerOfTwo, InverseQubits };

inline double b_prime_width(BPrimeScale scale, int n_qubits) {
    return scale == BPrimeScale::InversePowerOfTwo ? std::ldexp(1.0, -n_qubits) : 1.0 / n_qubits;
}

inline double bound_b_prime(const RVector& eigenvalues, int n_qubits, double a) {
    if (!(a > 0.0)) {
        throw ValidationError("b' width a must be positive");
    }
    if (n_qubits < 1) {
        throw ValidationError("n_qubits must be positive");
    }
    return 8.0 * a / std::sqrt(3.0 * n_qubits) * std::sqrt(inverse_gap_sum(eigenvalues));
}

inline double bound_b_prime(const SpectralDecomposition& d, int n_qubits, double a) {
    return bound_b_prime(d.eigenvalues, n_qubits, a);
}

// b_n = 8 sqrt(sum_{k != n} 1/|e_k - e_n|), the same construction centred on level n.
inline double level_bound(const RVector& eigenvalues, Eigen::Index n) {
    const double width = eigenvalues(eigenvalues.size() - 1) - eigenvalues(0);
    double sum = 0.0;
    for (Eigen::Index k = 0; k < eigenvalues.size(); ++k) {
        if (k == n) {
            continue;
        }
        const double gap = std::abs(eigenvalues(k) - eigenvalues(n));
        if (!(gap >= kDegeneracyGuard * width) || gap <= 0.0) {
            throw DegenerateSpectrumError("level " + std::to_string(n) + " is degenerate");
        }
        sum += 1.0 / gap;
    }
    return 8.0 * std::sqrt(sum);
}

inline double saturation_index(double dq_abs, double b, double k0) { return dq_abs - b * std::sqrt(std::abs(k0)); }

struct BoundRecord {
    double dq_abs = 0.0;
    double k0 = 0.0;
    double b = 0.0;
    double b_prime = 0.0;
    double delta = 0.0;
    std::uint64_t seed = 0;

    // |dQ/dtau| <= b sqrt|K0| up to slack_rel * b.
    [[nodiscard]] bool violates_b(double slack_rel = 1e-9) const {
        return dq_abs > b * std::sqrt(std::abs(k0)) + slack_rel * b;
    }
    [[nodiscard]] bool above_b_prime() const { return dq_abs > b_prime * std::sqrt(std::abs(k0)); }
};

inline BoundRecord make_bound_record(const EntanglementInputs& in, double b_prime_a, std::uint64_t seed) {
    BoundRecord r;
    r.seed = seed;
    r.dq_abs = std::abs(dq0_dtau(in));
    r.k0 = level_curvature(0, in);
    r.b = bound_b(in.decomposition);
    r.b_prime = bound_b_prime(in.decomposition, in.n_qubits, b_prime_a);
    r.delta = saturation_index(r.dq_abs, r.b, r.k0);
    return r;
}

// Two-level avoided-crossing approximation for levels 0 and 1.
struct TwoLevelRates {
    double rate0 = 0.0;            // approximate dE_L^0/dtau, keeping only k = 1
    double rate1 = 0.0;            // approximate dE_L^1/dtau, keeping only k = 0
    double ratio = 0.0;            // rate1 / rate0
    double exact_rate0 = 0.0;
    double exact_rate1 = 0.0;
    double k0 = 0.0;               // truncated curvatures
    double k1 = 0.0;
    double phi = 0.0;              // arg V_01
    double rate0_from_curvature = 0.0;  // -X0 K0 / |V01|^2
    double rate0_from_sqrt_curvature = 0.0;  // 2 sqrt2 Re[A^0_01 e^{i phi}] sqrt|K0| / sqrt(e1 - e0)
    double ratio_from_phase = 0.0;  // -Re[A^1_01 e^{i phi}] / Re[A^0_01 e^{i phi}]
};

inline constexpr double kTwoLevelDominance = 10.0;

inline TwoLevelRates two_level_rates(const EntanglementInputs& in, const QubitPartition& partition) {
    if (in.dim() < 3) {
        throw ApproximationError("two-level dominance needs at least three levels");
    }
    require_gap(in.decomposition, 0, 1);
    const double gap01 = in.energy(1) - in.energy(0);
    // Nearest other gap touching level 0 or 1 is e_2 - e_1.
    const double other = in.energy(2) - in.energy(1);
    if (!(kTwoLevelDominance * gap01 <= other)) {
        throw ApproximationError("gap e1 - e0 = " + std::to_string(gap01) +
                                 " is not 10x smaller than e2 - e1 = " + std::to_string(other));
    }
    const Complex v01 = in.v_eig(0, 1);
    const Complex v10 = in.v_eig(1, 0);
    const Complex a0_01 = overlap_coeff(0, 0, 1, in, partition);
    const Complex a0_10 = overlap_coeff(0, 1, 0, in, partition);
    const Complex a1_01 = overlap_coeff(1, 0, 1, in, partition);
    const Complex a1_10 = overlap_coeff(1, 1, 0, in, partition);
    const double e0 = in.energy(0);
    const double e1 = in.energy(1);

    TwoLevelRates out;
    const Complex x0 = v10 * a0_10 + v01 * a0_01;
    const Complex x1 = v01 * a1_01 + v10 * a1_10;
    out.rate0 = drop_imaginary(-2.0 * x0 / (e0 - e1), std::abs(x0 / (e0 - e1)), "two_level rate0");
    out.rate1 = drop_imaginary(-2.0 * x1 / (e1 - e0), std::abs(x1 / (e1 - e0)), "two_level rate1");
    out.ratio = out.rate1 / out.rate0;
    out.exact_rate0 = del_dtau(0, in, partition);
    out.exact_rate1 = del_dtau(1, in, partition);
    out.k0 = 2.0 * std::norm(v01) / (e0 - e1);
    out.k1 = 2.0 * std::norm(v01) / (e1 - e0);
    out.phi = std::arg(v01);
    out.rate0_from_curvature = -x0.real() * out.k0 / std::norm(v01);
    const Complex rot = std::polar(1.0, out.phi);
    out.rate0_from_sqrt_curvature =
        2.0 * std::numbers::sqrt2 * (a0_01 * rot).real() * std::sqrt(std::abs(out.k0)) / std::sqrt(e1 - e0);
    out.ratio_from_phase = -(a1_01 * rot).real() / (a0_01 * rot).real();
    return out;
}

// Mean sqrt|K| for the three Gaussian ensembles with gamma_nu = nu * A, and
// the ratios of the resulting mean entanglement changes at common b.
struct EnsembleRatioReport {
    double scale_a = 1.0;
    double mean_sqrt_k_goe = 0.0;
    double mean_sqrt_k_gue = 0.0;
    double mean_sqrt_k_gse = 0.0;
    double ratio_goe_gue = 0.0;
    double ratio_goe_gse = 0.0;
};

inline EnsembleRatioReport ensemble_delta_q_ratios(double scale_a = 1.0) {
    if (!(scale_a > 0.0)) {
        throw ValidationError("ensemble constant A must be positive");
    }
    const double g1 = 1.0 * scale_a;
    const double g2 = 2.0 * scale_a;
    const double g4 = 4.0 * scale_a;
    EnsembleRatioReport r;
    r.scale_a = scale_a;
    r.mean_sqrt_k_goe = 0.84 * std::sqrt(g1);
    // GUE coefficient read as sqrt(gamma_2 / 2); see README.
    r.mean_sqrt_k_gue = std::sqrt(g2 / 2.0);
    r.mean_sqrt_k_gse = 0.6 * std::sqrt(g4);
    r.ratio_goe_gue = r.mean_sqrt_k_goe / r.mean_sqrt_k_gue;
    r.ratio_goe_gse = r.mean_sqrt_k_goe / r.mean_sqrt_k_gse;
    return r;
}

} // namespace qcbound
