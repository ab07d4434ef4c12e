#pragma once

// Monte-Carlo protocols: inequality scatter tests and the theta / defect
// sweeps. Every task i gets its own child seed and writes into slot i of the
// result; reductions run in task order, so outputs do not depend on the
// worker count.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "curvature_bound.hpp"
#include "entanglement.hpp"
#include "level_statistics.hpp"
#include "models.hpp"

namespace qcbound {

template <typename T>
std::vector<T> parallel_map(std::size_t n_tasks, unsigned threads, const std::function<T(std::size_t)>& task) {
    std::vector<std::optional<T>> slots(n_tasks);
    threads = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n_tasks, 1))));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n_tasks; i = next++) {
            try {
                slots[i].emplace(task(i));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
                next = n_tasks;
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    std::vector<T> out;
    out.reserve(n_tasks);
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

struct TrimResult {
    std::vector<double> kept;
    std::vector<double> trimmed;
};

// Linear-interpolation quantile of sorted data.
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct Fences {
    double lo = 0.0;
    double hi = 0.0;
    [[nodiscard]] bool contains(double v) const { return v >= lo && v <= hi; }
};

// Tukey fences [Q1 - k IQR, Q3 + k IQR].
inline Fences tukey_fences(const std::vector<double>& values, double k = 1.5) {
    if (values.size() < 4) {
        throw ValidationError("outlier trimming needs at least 4 values");
    }
    if (!(k >= 0.0)) {
        throw ValidationError("outlier factor k must be >= 0");
    }
    std::vector<double> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    const double q1 = quantile_sorted(sorted, 0.25);
    const double q3 = quantile_sorted(sorted, 0.75);
    return {q1 - k * (q3 - q1), q3 + k * (q3 - q1)};
}

// Splits values by the Tukey fences, input order preserved.
inline TrimResult trim_outliers(const std::vector<double>& values, double k = 1.5) {
    const Fences f = tukey_fences(values, k);
    TrimResult out;
    for (double v : values) {
        (f.contains(v) ? out.kept : out.trimmed).push_back(v);
    }
    return out;
}

struct MeanStderr {
    double mean = std::numeric_limits<double>::quiet_NaN();
    double stderr_ = std::numeric_limits<double>::quiet_NaN();
};

inline MeanStderr mean_stderr(const std::vector<double>& v) {
    MeanStderr out;
    if (v.empty()) {
        return out;
    }
    const double n = static_cast<double>(v.size());
    double sum = 0.0;
    for (double x : v) {
        sum += x;
    }
    out.mean = sum / n;
    if (v.size() < 2) {
        out.stderr_ = 0.0;
        return out;
    }
    double ss = 0.0;
    for (double x : v) {
        ss += (x - out.mean) * (x - out.mean);
    }
    out.stderr_ = std::sqrt(ss / (n - 1.0) / n);
    return out;
}

// ---------------------------------------------------------------- scatter

struct ScatterOptions {
    BPrimeScale b_prime_scale = BPrimeScale::InversePowerOfTwo;
    unsigned threads = 1;
    double slack = 1e-9;  // relative to b
    double max_rejection_fraction = 0.01;
};

struct ScatterResult {
    std::vector<BoundRecord> records;
    long requested = 0;
    long rejected = 0;
    long violations_b = 0;
    long violations_b_prime = 0;
    std::string model_tag;
    std::uint64_t master_seed = 0;
    double b = 0.0;
    double b_prime = 0.0;
    std::vector<std::string> log;
};

inline std::string model_tag(const ModelConfig& c) {
    std::string tag = to_string(c.family) + "/N=" + std::to_string(c.n_qubits);
    if (c.family == ModelFamily::C) {
        tag += "/" + to_string(c.perturbation_ensemble);
    }
    return tag;
}

// H0 of model A is fixed; B and C draw it from derive_seed(master, 0).
inline PerturbedModel perturbed_model(const ModelConfig& config, std::uint64_t master_seed) {
    config.validate();
    switch (config.family) {
    case ModelFamily::A:
        return model_a(config);
    case ModelFamily::B:
        return model_b(config.n_qubits, derive_seed(master_seed, 0));
    case ModelFamily::C:
        return model_c(config.perturbation_ensemble, derive_seed(master_seed, 0), config.n_qubits);
    default:
        throw ValidationError("scatter tests take model A, B or C");
    }
}

// Sample i uses V drawn with derive_seed(master, i + 1); its record carries that seed.
inline ScatterResult scatter_bound_test(const ModelConfig& config, long samples, std::uint64_t master_seed,
                                        const ScatterOptions& opt = {}) {
    if (samples < 1) {
        throw ValidationError("samples must be >= 1");
    }
    const PerturbedModel model = perturbed_model(config, master_seed);
    const SpectralDecomposition h0 = eigensystem(model.h0);
    const double a = b_prime_width(opt.b_prime_scale, model.n_qubits);

    ScatterResult out;
    out.requested = samples;
    out.master_seed = master_seed;
    out.model_tag = model_tag(config);
    try {
        out.b = bound_b(h0);
        out.b_prime = bound_b_prime(h0, model.n_qubits, a);
    } catch (const DegenerateSpectrumError& e) {
        throw DegenerateSpectrumError(std::string("H0 ground state is degenerate: ") + e.what());
    }

    struct Outcome {
        std::optional<BoundRecord> record;
        std::string error;
    };
    const auto outcomes = parallel_map<Outcome>(
        static_cast<std::size_t>(samples), opt.threads, [&](std::size_t i) -> Outcome {
            const std::uint64_t seed = derive_seed(master_seed, i + 1);
            try {
                auto in = make_entanglement_inputs(h0, model.draw_perturbation(seed), model.n_qubits);
                return {make_bound_record(in, a, seed), {}};
            } catch (const DegenerateSpectrumError& e) {
                return {std::nullopt, e.what()};
            }
        });
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (!outcomes[i].record) {
            ++out.rejected;
            out.log.push_back("sample " + std::to_string(i) + " rejected: " + outcomes[i].error);
            continue;
        }
        const BoundRecord& r = *outcomes[i].record;
        out.violations_b += r.violates_b(opt.slack) ? 1 : 0;
        out.violations_b_prime += r.above_b_prime() ? 1 : 0;
        out.records.push_back(r);
    }
    if (static_cast<double>(out.rejected) > opt.max_rejection_fraction * static_cast<double>(samples)) {
        throw DegenerateSpectrumError("more than 1% of samples were degenerate (" + std::to_string(out.rejected) +
                                      " of " + std::to_string(samples) + "); model misconfigured");
    }
    return out;
}

// ---------------------------------------------------------------- sweeps

enum class GammaMode { Pooled, PerRealization };
// Which level the model D bound is built around.
enum class BoundReference { Ground, LevelAverage };

struct SweepOptions {
    int realizations = 100;
    UnfoldOptions unfolding{};
    GammaMode gamma_mode = GammaMode::Pooled;
    double outlier_k = 1.5;
    unsigned threads = 1;
    BoundReference b_reference = BoundReference::Ground;
    // model D
    Eigen::Index dim = 128;
    // model E
    int n_qubits = 9;
    double field = 1.0;
    double exchange = 1.0;
    bool sector_restricted = true;
    double max_failure_fraction = 0.10;

    void validate() const {
        if (realizations < 4) {
            throw ValidationError("sweeps need at least 4 realizations");
        }
        unfolding.validate();
        if (!(outlier_k >= 0.0)) {
            throw ValidationError("outlier factor k must be >= 0");
        }
    }
};

struct SweepRow {
    double param = 0.0;
    double gamma_mean = 0.0;
    double gamma_stderr = 0.0;
    double b_mean = 0.0;
    double b_stderr = 0.0;
    double q_mean = std::numeric_limits<double>::quiet_NaN();
    double q_stderr = std::numeric_limits<double>::quiet_NaN();
    int n_kept = 0;
    int n_trimmed = 0;  // includes failed draws
    int n_failed = 0;
    long n_spacings = 0;
    double weibull_a = 0.0;
    double weibull_c = 0.0;
    bool valid = true;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<std::string> log;
};

struct DrawOutcome {
    bool ok = false;
    double b = 0.0;
    double q = std::numeric_limits<double>::quiet_NaN();
    SpacingSample spacings;
    std::string error;
};

namespace detail {

inline double level_average_bound(const RVector& e) {
    double sum = 0.0;
    for (Eigen::Index n = 0; n < e.size(); ++n) {
        sum += level_bound(e, n);
    }
    return sum / static_cast<double>(e.size());
}

inline std::vector<double> to_std(const RVector& v) { return {v.data(), v.data() + v.size()}; }

inline SweepRow aggregate(double param, const std::vector<DrawOutcome>& draws, const SweepOptions& opt,
                          std::vector<std::string>& log, const std::string& label) {
    SweepRow row;
    row.param = param;
    std::vector<double> bs;
    std::vector<double> qs;
    std::vector<SpacingSample> parts;
    for (std::size_t r = 0; r < draws.size(); ++r) {
        if (!draws[r].ok) {
            ++row.n_failed;
            log.push_back(label + " realization " + std::to_string(r) + " failed: " + draws[r].error);
            continue;
        }
        bs.push_back(draws[r].b);
        qs.push_back(draws[r].q);
        parts.push_back(draws[r].spacings);
    }
    row.valid = static_cast<double>(row.n_failed) <= opt.max_failure_fraction * static_cast<double>(draws.size());
    if (!row.valid) {
        log.push_back(label + " row invalid: " + std::to_string(row.n_failed) + " of " +
                      std::to_string(draws.size()) + " draws failed");
    }

    // Realizations are kept or dropped as a whole according to their b.
    std::vector<double> kept_b;
    std::vector<double> kept_q;
    if (bs.size() >= 4) {
        const Fences f = tukey_fences(bs, opt.outlier_k);
        for (std::size_t i = 0; i < bs.size(); ++i) {
            if (f.contains(bs[i])) {
                kept_b.push_back(bs[i]);
                kept_q.push_back(qs[i]);
            }
        }
    } else {
        kept_b = bs;
        kept_q = qs;
    }
    row.n_kept = static_cast<int>(kept_b.size());
    row.n_trimmed = static_cast<int>(draws.size()) - row.n_kept;
    const MeanStderr b = mean_stderr(kept_b);
    row.b_mean = b.mean;
    row.b_stderr = b.stderr_;
    if (std::none_of(kept_q.begin(), kept_q.end(), [](double q) { return std::isnan(q); })) {
        const MeanStderr q = mean_stderr(kept_q);
        row.q_mean = q.mean;
        row.q_stderr = q.stderr_;
    }

    const SpacingSample pooled = pool(parts, label);
    row.n_spacings = static_cast<long>(pooled.spacings.size());
    try {
        if (opt.gamma_mode == GammaMode::Pooled) {
            const WeibullParams fit = weibull_fit(pooled);
            row.weibull_a = fit.a;
            row.weibull_c = fit.c;
            row.gamma_mean = gamma_chaos(fit);
            row.gamma_stderr = gamma_chaos_stderr(fit);
        } else {
            std::vector<double> gammas;
            for (const auto& p : parts) {
                gammas.push_back(gamma_chaos(weibull_fit(p)));
            }
            const MeanStderr g = mean_stderr(gammas);
            row.gamma_mean = g.mean;
            row.gamma_stderr = g.stderr_;
            const WeibullParams fit = weibull_fit(pooled);
            row.weibull_a = fit.a;
            row.weibull_c = fit.c;
        }
    } catch (const std::exception& e) {
        row.valid = false;
        row.gamma_mean = std::numeric_limits<double>::quiet_NaN();
        row.gamma_stderr = std::numeric_limits<double>::quiet_NaN();
        log.push_back(label + " spacing fit failed: " + e.what());
    }
    return row;
}

} // namespace detail

// Realization r uses derive_seed(master, r) at every grid point, so each
// realization traces a continuous path through the grid.
inline SweepResult sweep_theta(const std::vector<double>& grid, std::uint64_t master_seed,
                               const SweepOptions& opt = {}) {
    opt.validate();
    for (double t : grid) {
        if (!(t >= 0.0 && t <= std::numbers::pi / 2 + 1e-12)) {
            throw ValidationError("theta grid must lie within [0, pi/2]");
        }
    }
    const auto parts = parallel_map<RosenzweigPair>(
        static_cast<std::size_t>(opt.realizations), opt.threads,
        [&](std::size_t r) { return model_d_parts(derive_seed(master_seed, r), opt.dim); });

    SweepResult out;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double theta = grid[g];
        const auto draws = parallel_map<DrawOutcome>(
            parts.size(), opt.threads, [&](std::size_t r) -> DrawOutcome {
                DrawOutcome d;
                try {
                    const RVector e = eigenvalues_only(model_d(parts[r], theta));
                    d.b = opt.b_reference == BoundReference::Ground ? bound_b(e) : detail::level_average_bound(e);
                    d.spacings = spacing_sample(detail::to_std(e), opt.unfolding);
                    d.ok = true;
                } catch (const std::exception& ex) {
                    d.error = ex.what();
                }
                return d;
            });
        out.rows.push_back(detail::aggregate(theta, draws, opt, out.log, "theta=" + std::to_string(theta)));
    }
    return out;
}

// Per realization: full spectrum for b, ground state for Q, and the spacing
// statistics from the largest fixed-S_z sector (or the full spectrum).
inline SweepResult sweep_defect(const std::vector<double>& grid, std::uint64_t master_seed,
                                const SweepOptions& opt = {}) {
    opt.validate();
    for (double d : grid) {
        if (!(d >= 0.0) || !std::isfinite(d)) {
            throw ValidationError("defect grid values must be >= 0");
        }
    }
    const int n = opt.n_qubits;
    const auto sector = largest_sz_sector(n);
    SweepResult out;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double dval = grid[g];
        const auto draws = parallel_map<DrawOutcome>(
            static_cast<std::size_t>(opt.realizations), opt.threads, [&](std::size_t r) -> DrawOutcome {
                DrawOutcome d;
                try {
                    const HermitianOperator h = model_e(n, dval, opt.field, opt.exchange, derive_seed(master_seed, r));
                    const SpectralDecomposition full = eigensystem(h);
                    d.b = bound_b(full);
                    d.q = mean_bipartite_q(full.state(0), n);
                    const RVector e = opt.sector_restricted ? eigenvalues_only(restrict_to(h, sector))
                                                            : full.eigenvalues;
                    d.spacings = spacing_sample(detail::to_std(e), opt.unfolding);
                    d.ok = true;
                } catch (const std::exception& ex) {
                    d.error = ex.what();
                }
                return d;
            });
        out.rows.push_back(detail::aggregate(dval, draws, opt, out.log, "d=" + std::to_string(dval)));
    }
    return out;
}

inline std::vector<double> uniform_grid(double lo, double hi, int points) {
    if (points < 1) {
        throw ValidationError("grid needs at least one point");
    }
    std::vector<double> g(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        g[static_cast<std::size_t>(i)] = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
    }
    if (points > 1) {
        g.back() = hi;
    }
    return g;
}

inline std::vector<double> default_theta_grid(int points = 16) { return uniform_grid(0.0, std::numbers::pi / 2, points); }
inline std::vector<double> default_defect_grid(int points = 26, double d_max = 2.5) {
    return uniform_grid(0.0, d_max, points);
}

} // namespace qcbound
