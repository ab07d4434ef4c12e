#pragma once

// Seeded random-matrix samplers.
//
// Randomness contract: every draw comes from std::mt19937_64 (fully specified
// by the standard) seeded with a 64-bit seed; normal variates use
// boost::random::normal_distribution (ziggurat). Child seeds for task i are
// derive_seed(master, i), a splitmix64 mix. Together these make a draw a
// function of (spec, seed) alone, independent of platform and thread count.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include <boost/random/normal_distribution.hpp>
#include <boost/version.hpp>

#include "quantum_core.hpp"

namespace qcbound {

inline constexpr std::string_view kRngAlgorithm =
    "mt19937_64/boost-normal-ziggurat/splitmix64-child-seeds";

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632BE59BD9B4E019ULL));
}

class NormalSource {
  public:
    explicit NormalSource(std::uint64_t seed) : engine_(seed) {}
    double operator()(double stddev = 1.0) { return stddev * dist_(engine_); }
    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    boost::random::normal_distribution<double> dist_{0.0, 1.0};
};

enum class EnsembleKind { GOE, GUE, PoissonDiagonal, GenericHermitian };

inline std::string to_string(EnsembleKind k) {
    switch (k) {
    case EnsembleKind::GOE:
        return "GOE";
    case EnsembleKind::GUE:
        return "GUE";
    case EnsembleKind::PoissonDiagonal:
        return "Poisson";
    case EnsembleKind::GenericHermitian:
        return "Hermitian";
    }
    return "?";
}

inline EnsembleKind ensemble_from_string(std::string_view s) {
    if (s == "GOE" || s == "goe") return EnsembleKind::GOE;
    if (s == "GUE" || s == "gue") return EnsembleKind::GUE;
    if (s == "Poisson" || s == "poisson") return EnsembleKind::PoissonDiagonal;
    if (s == "Hermitian" || s == "hermitian") return EnsembleKind::GenericHermitian;
    throw ValidationError("unknown ensemble '" + std::string(s) + "'");
}

struct EnsembleSpec {
    EnsembleKind kind = EnsembleKind::GOE;
    Eigen::Index dim = 2;
    double scale = 1.0;  // off-diagonal standard deviation

    void validate() const {
        if (dim < 2) {
            throw ValidationError("ensemble dim must be >= 2");
        }
        if (!(scale > 0.0) || !std::isfinite(scale)) {
            throw ValidationError("ensemble scale must be positive");
        }
    }
};

// GOE spectral variance is (dim + 1) scale^2; a Poisson diagonal with this
// standard deviation has the same spectral spread.
inline double poisson_diagonal_stddev(Eigen::Index dim, double scale) {
    return scale * std::sqrt(static_cast<double>(dim) + 1.0);
}

// Entries are filled row by row over the upper triangle.
inline HermitianOperator sample(const EnsembleSpec& spec, std::uint64_t seed) {
    spec.validate();
    NormalSource normal(seed);
    const Eigen::Index n = spec.dim;
    const double s = spec.scale;
    CMatrix m = CMatrix::Zero(n, n);
    switch (spec.kind) {
    case EnsembleKind::GOE:
        for (Eigen::Index i = 0; i < n; ++i) {
            m(i, i) = normal(std::sqrt(2.0) * s);
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const double x = normal(s);
                m(i, j) = x;
                m(j, i) = x;
            }
        }
        break;
    case EnsembleKind::GUE:
    case EnsembleKind::GenericHermitian:
        for (Eigen::Index i = 0; i < n; ++i) {
            m(i, i) = normal(s);
            for (Eigen::Index j = i + 1; j < n; ++j) {
                const double re = normal(s / std::sqrt(2.0));
                const double im = normal(s / std::sqrt(2.0));
                m(i, j) = Complex(re, im);
                m(j, i) = Complex(re, -im);
            }
        }
        break;
    case EnsembleKind::PoissonDiagonal: {
        const double sd = poisson_diagonal_stddev(n, s);
        for (Eigen::Index i = 0; i < n; ++i) {
            m(i, i) = normal(sd);
        }
        break;
    }
    }
    return HermitianOperator(std::move(m));
}

// sqrt(tr(H^2)/dim - (tr H / dim)^2), the standard deviation of the spectrum.
inline double spectral_stddev(const HermitianOperator& h) {
    const double dim = static_cast<double>(h.dim());
    const double mean = h.trace() / dim;
    const double second = h.matrix().squaredNorm() / dim;
    return std::sqrt(std::max(0.0, second - mean * mean));
}

inline HermitianOperator normalize_spectral_stddev(const HermitianOperator& h) {
    const double sd = spectral_stddev(h);
    if (!(sd > 0.0)) {
        throw ValidationError("cannot normalize a matrix with zero spectral spread");
    }
    return (1.0 / sd) * h;
}

} // namespace qcbound
