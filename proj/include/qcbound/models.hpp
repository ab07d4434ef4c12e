#pragma once

// The five model families. A, B and C pair a fixed H0 with a perturbation
// sampler; D interpolates between Poisson and GOE spectra; E is an open
// Heisenberg chain in a field with Gaussian on-site defects.

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "ensembles.hpp"
#include "quantum_core.hpp"

namespace qcbound {

enum class ModelFamily { A, B, C, D, E };

inline std::string to_string(ModelFamily f) {
    constexpr const char* names[] = {"A", "B", "C", "D", "E"};
    return names[static_cast<int>(f)];
}

inline ModelFamily model_family_from_string(const std::string& s) {
    if (s == "A" || s == "a") return ModelFamily::A;
    if (s == "B" || s == "b") return ModelFamily::B;
    if (s == "C" || s == "c") return ModelFamily::C;
    if (s == "D" || s == "d") return ModelFamily::D;
    if (s == "E" || s == "e") return ModelFamily::E;
    throw ValidationError("unknown model family '" + s + "'");
}

struct ModelConfig {
    ModelFamily family = ModelFamily::B;
    int n_qubits = 2;
    // Model A
    std::vector<double> fields{0.1, 0.2, 0.3};
    double coupling = 0.5;
    // Model C
    EnsembleKind perturbation_ensemble = EnsembleKind::GUE;
    // Model D
    double theta = 0.0;
    Eigen::Index dim_d = 128;
    // Model E
    double field = 1.0;
    double exchange = 1.0;
    double defect_stddev = 0.0;
    std::uint64_t master_seed = 0;

    void validate() const {
        switch (family) {
        case ModelFamily::A:
            if (n_qubits != 3) throw ValidationError("model A is defined for 3 qubits");
            if (fields.size() != 3) throw ValidationError("model A needs three field constants");
            break;
        case ModelFamily::B:
        case ModelFamily::C:
            if (n_qubits < 2 || n_qubits > 10) throw ValidationError("models B/C need 2..10 qubits");
            if (family == ModelFamily::C && perturbation_ensemble != EnsembleKind::GOE &&
                perturbation_ensemble != EnsembleKind::GUE) {
                throw ValidationError("model C perturbation must be GOE or GUE");
            }
            break;
        case ModelFamily::D:
            if (!(theta >= 0.0 && theta <= std::numbers::pi / 2 + 1e-12)) {
                throw ValidationError("theta must lie in [0, pi/2]");
            }
            if (dim_d < 20) throw ValidationError("model D dimension must be >= 20");
            break;
        case ModelFamily::E:
            if (n_qubits < 2 || n_qubits > 12) throw ValidationError("model E needs 2..12 qubits");
            if (!(defect_stddev >= 0.0)) throw ValidationError("defect spread d must be >= 0");
            if (exchange == 0.0) throw ValidationError("exchange J must be nonzero");
            break;
        }
    }
};

// H0 plus the ensemble V is drawn from.
struct PerturbedModel {
    HermitianOperator h0;
    EnsembleSpec perturbation;
    int n_qubits = 0;

    [[nodiscard]] HermitianOperator draw_perturbation(std::uint64_t seed) const {
        return sample(perturbation, seed);
    }
};

// sum_j a_j sigma_z(j) + lambda sum_{i<j} sigma_i . sigma_j
inline HermitianOperator model_a_hamiltonian(const std::vector<double>& fields, double coupling) {
    const int n = static_cast<int>(fields.size());
    CMatrix h = CMatrix::Zero(Eigen::Index{1} << n, Eigen::Index{1} << n);
    const auto sz = pauli(PauliAxis::Z);
    for (int j = 0; j < n; ++j) {
        h += fields[static_cast<std::size_t>(j)] * embed_site(sz, j, n).matrix();
    }
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            h += coupling * heisenberg_coupling(i, j, n).matrix();
        }
    }
    return HermitianOperator(std::move(h));
}

inline PerturbedModel model_a(const ModelConfig& config) {
    ModelConfig c = config;
    c.family = ModelFamily::A;
    c.validate();
    return {model_a_hamiltonian(c.fields, c.coupling), {EnsembleKind::GenericHermitian, 8, 1.0}, 3};
}

inline PerturbedModel model_b(int n_qubits, std::uint64_t h0_seed) {
    if (n_qubits < 2 || n_qubits > 10) {
        throw ValidationError("model B needs 2..10 qubits");
    }
    const Eigen::Index dim = Eigen::Index{1} << n_qubits;
    return {sample({EnsembleKind::GenericHermitian, dim, 1.0}, h0_seed),
            {EnsembleKind::GenericHermitian, dim, 1.0}, n_qubits};
}

inline PerturbedModel model_c(EnsembleKind ensemble, std::uint64_t h0_seed, int n_qubits = 2) {
    if (ensemble != EnsembleKind::GOE && ensemble != EnsembleKind::GUE) {
        throw ValidationError("model C perturbation must be GOE or GUE");
    }
    PerturbedModel m = model_b(n_qubits, h0_seed);
    m.perturbation.kind = ensemble;
    return m;
}

// Poisson-diagonal and GOE parts of one model D realization, each scaled to
// unit spectral standard deviation.
struct RosenzweigPair {
    HermitianOperator poisson;
    HermitianOperator goe;
};

inline RosenzweigPair model_d_parts(std::uint64_t seed, Eigen::Index dim = 128) {
    return {normalize_spectral_stddev(sample({EnsembleKind::PoissonDiagonal, dim, 1.0}, derive_seed(seed, 0))),
            normalize_spectral_stddev(sample({EnsembleKind::GOE, dim, 1.0}, derive_seed(seed, 1)))};
}

inline HermitianOperator model_d(const RosenzweigPair& parts, double theta) {
    if (!(theta >= 0.0 && theta <= std::numbers::pi / 2 + 1e-12)) {
        throw ValidationError("theta must lie in [0, pi/2]");
    }
    // cos and sin are exact at 0; at pi/2 the Poisson weight is pinned to 0.
    const double w_poisson = theta >= std::numbers::pi / 2 ? 0.0 : std::cos(theta);
    const double w_goe = std::sin(theta);
    return HermitianOperator(CMatrix(w_poisson * parts.poisson.matrix() + w_goe * parts.goe.matrix()));
}

inline HermitianOperator model_d(double theta, std::uint64_t seed, Eigen::Index dim = 128) {
    return model_d(model_d_parts(seed, dim), theta);
}

// Standard-normal defect profile z_j; the defects are h_j = d z_j.
inline std::vector<double> defect_profile(int n_qubits, std::uint64_t seed) {
    NormalSource normal(seed);
    std::vector<double> z(static_cast<std::size_t>(n_qubits));
    for (auto& v : z) {
        v = normal();
    }
    return z;
}

// sum_j (h + d z_j) sigma_z(j) + (J/4) sum_{j=0}^{N-2} sigma_j . sigma_{j+1}, open chain.
// Real symmetric by construction.
inline HermitianOperator model_e(int n_qubits, double d, double h, double exchange, std::uint64_t seed) {
    ModelConfig c;
    c.family = ModelFamily::E;
    c.n_qubits = n_qubits;
    c.defect_stddev = d;
    c.field = h;
    c.exchange = exchange;
    c.validate();
    const std::vector<double> z = defect_profile(n_qubits, seed);
    const std::size_t dim = std::size_t{1} << n_qubits;
    RMatrix out = RMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t m = 0; m < dim; ++m) {
        const auto idx = static_cast<Eigen::Index>(m);
        double diag = 0.0;
        for (int j = 0; j < n_qubits; ++j) {
            const double hj = h + d * z[static_cast<std::size_t>(j)];
            diag += site_bit(m, j, n_qubits) == 0 ? hj : -hj;
        }
        for (int j = 0; j + 1 < n_qubits; ++j) {
            const bool same = site_bit(m, j, n_qubits) == site_bit(m, j + 1, n_qubits);
            if (same) {
                diag += exchange / 4.0;
            } else {
                diag -= exchange / 4.0;
                const std::size_t flip = m ^ (std::size_t{3} << (n_qubits - 2 - j));
                out(idx, static_cast<Eigen::Index>(flip)) += exchange / 2.0;
            }
        }
        out(idx, idx) = diag;
    }
    return HermitianOperator(out);
}

// Basis indices with a fixed number of down spins (bit value 1).
inline std::vector<Eigen::Index> sz_sector(int n_qubits, int n_down) {
    std::vector<Eigen::Index> out;
    for (std::size_t m = 0; m < (std::size_t{1} << n_qubits); ++m) {
        if (std::popcount(m) == n_down) {
            out.push_back(static_cast<Eigen::Index>(m));
        }
    }
    return out;
}

// Largest sector: N/2 down spins (for odd N, total S_z = +1/2).
inline std::vector<Eigen::Index> largest_sz_sector(int n_qubits) { return sz_sector(n_qubits, n_qubits / 2); }

inline HermitianOperator restrict_to(const HermitianOperator& h, const std::vector<Eigen::Index>& basis) {
    const auto n = static_cast<Eigen::Index>(basis.size());
    CMatrix out(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            out(i, j) = h(basis[static_cast<std::size_t>(i)], basis[static_cast<std::size_t>(j)]);
        }
    }
    return HermitianOperator(std::move(out));
}

} // namespace qcbound
