#pragma once

// Spectral unfolding, nearest-neighbour spacings, Weibull maximum-likelihood
// fits and the chaos parameter gamma.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "quantum_core.hpp"

namespace qcbound {

struct UnfoldOptions {
    int degree = 6;
    double edge_trim = 0.05;  // fraction discarded at each end

    void validate() const {
        if (degree < 1 || degree > 20) {
            throw ValidationError("unfolding degree must be in [1, 20]");
        }
        if (!(edge_trim >= 0.0 && edge_trim < 0.5)) {
            throw ValidationError("edge trim must be in [0, 0.5)");
        }
    }
};

struct Unfolded {
    std::vector<double> levels;  // kept, unfolded
    int n_discarded = 0;
    int degree_used = 0;
};

namespace detail {

// Least-squares polynomial in x scaled to [-1, 1]; coefficients low to high.
inline RVector polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree) {
    const auto n = static_cast<Eigen::Index>(x.size());
    RMatrix vander(n, degree + 1);
    RVector rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double p = 1.0;
        for (int d = 0; d <= degree; ++d) {
            vander(i, d) = p;
            p *= x[static_cast<std::size_t>(i)];
        }
        rhs(i) = y[static_cast<std::size_t>(i)];
    }
    return vander.colPivHouseholderQr().solve(rhs);
}

inline double polyval(const RVector& c, double x) {
    double out = 0.0;
    for (Eigen::Index d = c.size() - 1; d >= 0; --d) {
        out = out * x + c(d);
    }
    return out;
}

inline double polyder(const RVector& c, double x) {
    double out = 0.0;
    for (Eigen::Index d = c.size() - 1; d >= 1; --d) {
        out = out * x + static_cast<double>(d) * c(d);
    }
    return out;
}

} // namespace detail

// Maps each level through a polynomial fit of the cumulative level count,
// then drops the trimmed fraction at both ends. If the fit is not monotone
// over the kept window the degree is reduced once.
inline Unfolded unfold(const std::vector<double>& eigenvalues, const UnfoldOptions& opt = {}) {
    opt.validate();
    const std::size_t n = eigenvalues.size();
    if (n < 20) {
        throw ValidationError("unfolding needs at least 20 levels, got " + std::to_string(n));
    }
    if (!std::is_sorted(eigenvalues.begin(), eigenvalues.end())) {
        throw ValidationError("unfolding expects ascending eigenvalues");
    }
    const double lo = eigenvalues.front();
    const double hi = eigenvalues.back();
    if (!(hi > lo)) {
        throw ValidationError("unfolding needs a spectrum with nonzero width");
    }
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    std::vector<double> x(n);
    std::vector<double> count(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = (eigenvalues[i] - mid) / half;
        count[i] = static_cast<double>(i) + 0.5;
    }
    const auto trim = static_cast<std::size_t>(std::floor(opt.edge_trim * static_cast<double>(n)));
    if (n - 2 * trim < 3) {
        throw ValidationError("edge trim leaves too few levels");
    }

    for (int degree = opt.degree; degree >= opt.degree - 1 && degree >= 1; --degree) {
        const RVector coeff = detail::polyfit(x, count, degree);
        bool monotone = true;
        // Derivative checked on a dense grid over the kept window.
        const double xa = x[trim];
        const double xb = x[n - 1 - trim];
        constexpr int kGrid = 512;
        for (int g = 0; g <= kGrid && monotone; ++g) {
            const double xg = xa + (xb - xa) * g / kGrid;
            monotone = detail::polyder(coeff, xg) > 0.0;
        }
        if (!monotone) {
            continue;
        }
        Unfolded out;
        out.degree_used = degree;
        out.n_discarded = static_cast<int>(2 * trim);
        out.levels.reserve(n - 2 * trim);
        for (std::size_t i = trim; i < n - trim; ++i) {
            out.levels.push_back(detail::polyval(coeff, x[i]));
        }
        return out;
    }
    throw ConvergenceError("unfolding: fitted counting function is not monotone");
}

struct SpacingSample {
    std::vector<double> spacings;  // mean-normalized to 1
    std::string source;
    int n_levels_discarded = 0;
};

inline SpacingSample spacings_from_unfolded(const Unfolded& u, std::string source = {}) {
    SpacingSample s;
    s.source = std::move(source);
    s.n_levels_discarded = u.n_discarded;
    if (u.levels.size() < 2) {
        return s;
    }
    s.spacings.reserve(u.levels.size() - 1);
    for (std::size_t i = 1; i < u.levels.size(); ++i) {
        s.spacings.push_back(std::max(0.0, u.levels[i] - u.levels[i - 1]));
    }
    const double mean = std::accumulate(s.spacings.begin(), s.spacings.end(), 0.0) /
                        static_cast<double>(s.spacings.size());
    if (mean > 0.0) {
        for (double& v : s.spacings) {
            v /= mean;
        }
    }
    return s;
}

inline SpacingSample spacing_sample(const std::vector<double>& eigenvalues, const UnfoldOptions& opt = {},
                                    std::string source = {}) {
    return spacings_from_unfolded(unfold(eigenvalues, opt), std::move(source));
}

inline SpacingSample pool(const std::vector<SpacingSample>& parts, std::string source = {}) {
    SpacingSample out;
    out.source = std::move(source);
    for (const auto& p : parts) {
        out.spacings.insert(out.spacings.end(), p.spacings.begin(), p.spacings.end());
        out.n_levels_discarded += p.n_levels_discarded;
    }
    return out;
}

// y(x) = a c x^(c-1) exp(-a x^c)
struct WeibullParams {
    double a = 1.0;
    double c = 1.0;
    double log_likelihood = 0.0;
    long n_samples = 0;
    int iterations = 0;
    bool converged = false;
    long n_floored = 0;  // zero spacings lifted to the floor before taking logs
    double se_a = 0.0;
    double se_c = 0.0;
    double cov_ac = 0.0;
};

inline double weibull_density(double x, double a, double c) {
    if (x <= 0.0) {
        return c < 1.0 ? std::numeric_limits<double>::infinity() : (c == 1.0 ? a : 0.0);
    }
    return a * c * std::pow(x, c - 1.0) * std::exp(-a * std::pow(x, c));
}

inline double weibull_cdf(double x, double a, double c) {
    return x <= 0.0 ? 0.0 : -std::expm1(-a * std::pow(x, c));
}

inline constexpr double kSpacingFloor = std::numeric_limits<double>::epsilon();

// Maximum likelihood by damped Newton on the profile likelihood in c, with
// a = n / sum x^c at each step.
inline WeibullParams weibull_fit(const SpacingSample& sample, int max_iterations = 100, double tol = 1e-8) {
    const auto n = static_cast<long>(sample.spacings.size());
    if (n < 100) {
        throw ValidationError("Weibull fit needs at least 100 spacings, got " + std::to_string(n));
    }
    WeibullParams p;
    p.n_samples = n;
    std::vector<double> x(sample.spacings);
    std::vector<double> lx(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] >= 0.0) || !std::isfinite(x[i])) {
            throw ValidationError("spacings must be finite and nonnegative");
        }
        if (x[i] < kSpacingFloor) {
            x[i] = kSpacingFloor;
            ++p.n_floored;
        }
        lx[i] = std::log(x[i]);
    }
    const double nd = static_cast<double>(n);
    const double sum_log = std::accumulate(lx.begin(), lx.end(), 0.0);
    double mean_log = sum_log / nd;
    double var_log = 0.0;
    for (double v : lx) {
        var_log += (v - mean_log) * (v - mean_log);
    }
    var_log /= nd;
    // Var(log X) = pi^2 / (6 c^2) for a Weibull variate.
    double c = var_log > 0.0 ? std::numbers::pi / std::sqrt(6.0 * var_log) : 1.0;

    auto moments = [&](double cc, double& s0, double& s1, double& s2) {
        s0 = s1 = s2 = 0.0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double xc = std::exp(cc * lx[i]);
            s0 += xc;
            s1 += xc * lx[i];
            s2 += xc * lx[i] * lx[i];
        }
    };

    double s0 = 0.0, s1 = 0.0, s2 = 0.0;
    for (p.iterations = 1; p.iterations <= max_iterations; ++p.iterations) {
        moments(c, s0, s1, s2);
        const double grad = nd / c + sum_log - nd * s1 / s0;
        const double hess = -nd / (c * c) - nd * (s2 * s0 - s1 * s1) / (s0 * s0);
        double step = -grad / hess;
        while (c + step <= 0.0) {
            step *= 0.5;
        }
        c += step;
        if (std::abs(step) < tol) {
            p.converged = true;
            break;
        }
    }
    if (!p.converged) {
        throw ConvergenceError("Weibull fit did not converge in " + std::to_string(max_iterations) + " iterations");
    }
    moments(c, s0, s1, s2);
    const double a = nd / s0;
    p.a = a;
    p.c = c;
    p.log_likelihood = nd * std::log(a) + nd * std::log(c) + (c - 1.0) * sum_log - a * s0;
    // Observed information for (a, c).
    const double iaa = nd / (a * a);
    const double iac = s1;
    const double icc = nd / (c * c) + a * s2;
    const double det = iaa * icc - iac * iac;
    if (det > 0.0) {
        p.se_a = std::sqrt(icc / det);
        p.se_c = std::sqrt(iaa / det);
        p.cov_ac = -iac / det;
    }
    if (!(std::isfinite(p.a) && std::isfinite(p.c) && p.a > 0.0 && p.c > 0.0)) {
        throw ConvergenceError("Weibull fit produced non-finite parameters");
    }
    return p;
}

inline double poisson_density(double s) { return std::exp(-s); }
inline double wigner_dyson_density(double s) {
    return std::numbers::pi * s / 2.0 * std::exp(-std::numbers::pi * s * s / 4.0);
}
inline double wigner_dyson_cdf(double s) { return s <= 0.0 ? 0.0 : -std::expm1(-std::numbers::pi * s * s / 4.0); }

inline constexpr double kGammaCutoff = 0.472;

namespace detail {

inline double integrate_to_cutoff(const std::function<double(double)>& f) {
    thread_local boost::math::quadrature::tanh_sinh<double> integrator;
    double err = 0.0;
    const double v = integrator.integrate(f, 0.0, kGammaCutoff, 1e-12, &err);
    if (!(err <= 1e-10)) {
        throw ConvergenceError("quadrature error estimate " + std::to_string(err) + " above 1e-10");
    }
    return v;
}

inline double gamma_denominator() {
    // Closed form of the integral of P_P - P_WD over [0, s0].
    return -std::expm1(-kGammaCutoff) - wigner_dyson_cdf(kGammaCutoff);
}

} // namespace detail

// gamma = int_0^s0 [P - P_WD] / int_0^s0 [P_P - P_WD]; 1 for Poisson, 0 for WD.
inline double gamma_chaos(const std::function<double(double)>& density) {
    const double num = detail::integrate_to_cutoff([&](double s) { return density(s) - wigner_dyson_density(s); });
    return num / detail::gamma_denominator();
}

inline double gamma_chaos(const WeibullParams& fit) {
    return gamma_chaos([&](double s) { return weibull_density(s, fit.a, fit.c); });
}

// Delta-method standard error of gamma from the fit covariance.
inline double gamma_chaos_stderr(const WeibullParams& fit) {
    const double s0c = std::pow(kGammaCutoff, fit.c);
    const double e = std::exp(-fit.a * s0c);
    const double da = s0c * e;
    const double dc = fit.a * s0c * std::log(kGammaCutoff) * e;
    const double var = da * da * fit.se_a * fit.se_a + dc * dc * fit.se_c * fit.se_c + 2.0 * da * dc * fit.cov_ac;
    return std::sqrt(std::max(0.0, var)) / std::abs(detail::gamma_denominator());
}

// Kolmogorov-Smirnov distance to the Wigner surmise.
inline double ks_distance_wigner(std::vector<double> spacings) {
    if (spacings.empty()) {
        throw ValidationError("KS distance of an empty sample");
    }
    std::sort(spacings.begin(), spacings.end());
    const double n = static_cast<double>(spacings.size());
    double d = 0.0;
    for (std::size_t i = 0; i < spacings.size(); ++i) {
        const double f = wigner_dyson_cdf(spacings[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    return d;
}

} // namespace qcbound
