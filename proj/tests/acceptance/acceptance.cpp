// Acceptance run. Prints one [PASS]/[FAIL] line per criterion and exits
// nonzero if any criterion fails.
//
//   acceptance [--workdir DIR] [--smoke] [--only 1,3,8]
//
// --smoke runs the model E sweep on 8 qubits instead of 9.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <qcbound/experiments.hpp>

#include "cli.hpp"
#include "support/oracles.hpp"

namespace fs = std::filesystem;
using namespace qcbound;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

fs::path g_workdir = "acceptance_runs";

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

int cli(const std::vector<std::string>& args, std::string* stdout_text = nullptr) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    if (stdout_text != nullptr) {
        *stdout_text = out.str();
    }
    if (code != 0) {
        std::cerr << "  cli exit " << code << ": " << err.str();
    }
    return code;
}

std::vector<std::vector<double>> read_csv(const fs::path& p) {
    std::istringstream in(slurp(p));
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            row.push_back(std::strtod(cell.c_str(), nullptr));
        }
        rows.push_back(row);
    }
    return rows;
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// ---------------------------------------------------------------- 1 and 2

struct ScatterCase {
    std::string label;
    std::vector<std::string> args;
};

const std::vector<ScatterCase>& scatter_cases() {
    static const std::vector<ScatterCase> cases = {
        {"A", {"--model", "A"}},
        {"B/N=2", {"--model", "B", "--qubits", "2"}},
        {"B/N=3", {"--model", "B", "--qubits", "3"}},
        {"C/GOE", {"--model", "C", "--ensemble", "GOE"}},
        {"C/GUE", {"--model", "C", "--ensemble", "GUE"}},
    };
    return cases;
}

nlohmann::json scatter_summary(const ScatterCase& c, double& seconds) {
    const fs::path dir = g_workdir / ("check_" + c.label.substr(0, 1) + c.label.substr(c.label.size() - 1));
    std::vector<std::string> args{"check", "--samples", "3000", "--seed", "42", "--out", dir.string()};
    args.insert(args.end(), c.args.begin(), c.args.end());
    const auto t0 = std::chrono::steady_clock::now();
    const int code = cli(args);
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (code != 0 && code != cli::kExitViolation) {
        throw std::runtime_error("check " + c.label + " exited with " + std::to_string(code));
    }
    return nlohmann::json::parse(slurp(dir / "summary.json"));
}

Verdict criterion_1_and_2(int which) {
    static std::vector<nlohmann::json> summaries;
    static std::vector<double> times;
    if (summaries.empty()) {
        for (const auto& c : scatter_cases()) {
            double s = 0.0;
            summaries.push_back(scatter_summary(c, s));
            times.push_back(s);
        }
    }
    Verdict v{true, {}};
    for (std::size_t i = 0; i < summaries.size(); ++i) {
        const auto& s = summaries[i];
        const long n = s["samples_accepted"];
        if (which == 1) {
            const long viol = s["violations_b"];
            v.pass = v.pass && viol == 0 && n == 3000 && times[i] <= 300.0;
            v.detail += scatter_cases()[i].label + ": " + std::to_string(viol) + " viol/" + std::to_string(n) +
                        " (max delta " + fmt("%.3g", s["max_delta"].get<double>()) + ", " + fmt("%.1fs", times[i]) +
                        ")  ";
        } else {
            const double frac = s["fraction_above_b_prime"];
            v.pass = v.pass && frac <= 0.05;
            v.detail += scatter_cases()[i].label + ": " + fmt("%.2f%%", 100.0 * frac) + "  ";
        }
    }
    return v;
}

// ---------------------------------------------------------------- 3

Verdict criterion_3() {
    const auto t0 = std::chrono::steady_clock::now();
    double worst_q = 0.0;
    double worst_k = 0.0;
    double worst_el = 0.0;
    int instances = 0;
    for (int n : {2, 3}) {
        const Eigen::Index dim = Eigen::Index{1} << n;
        std::mt19937_64 rng(derive_seed(42, static_cast<std::uint64_t>(n)));
        for (int t = 0; t < 100; ++t, ++instances) {
            const CMatrix h0 = oracle::random_hermitian(dim, rng);
            const CMatrix v = oracle::random_hermitian(dim, rng);
            const auto in = make_entanglement_inputs(eigensystem(HermitianOperator(h0)), HermitianOperator(v), n);
            auto state = [&](Eigen::Index k, double tau) -> CVector {
                return oracle::plain_eigen(h0 + tau * v).vectors.col(k);
            };
            const double fd_q =
                oracle::richardson_derivative([&](double tau) { return oracle::dense_q(state(0, tau), n); }, 0.0, 1e-4);
            worst_q = std::max(worst_q, oracle::relative_error(dq0_dtau(in), fd_q));
            for (Eigen::Index k = 0; k < dim; ++k) {
                const auto eps = [&](double tau) { return oracle::plain_eigen(h0 + tau * v).values(k); };
                // One Richardson step on top of the 1e-3 second difference removes its h^2 error.
                const double fd_k = (4.0 * oracle::second_difference(eps, 0.0, 5e-4) -
                                     oracle::second_difference(eps, 0.0, 1e-3)) /
                                    3.0;
                worst_k = std::max(worst_k, oracle::relative_error(level_curvature(k, in), fd_k));
                const double fd_el = oracle::richardson_derivative(
                    [&](double tau) { return 1.0 - oracle::dense_purity(state(k, tau), n, {0}); }, 0.0, 1e-4);
                worst_el = std::max(worst_el,
                                    oracle::relative_error(del_dtau(k, in, QubitPartition::single(0, n)), fd_el));
            }
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {worst_q < 1e-5 && worst_k < 1e-4 && worst_el < 1e-6 && secs <= 60.0,
            std::to_string(instances) + " instances; worst rel err dQ0 " + fmt("%.2e", worst_q) + ", K " +
                fmt("%.2e", worst_k) + ", dEL " + fmt("%.2e", worst_el) + " (" + fmt("%.1fs", secs) + ")"};
}

// ---------------------------------------------------------------- 4

Verdict criterion_4() {
    std::mt19937_64 rng(derive_seed(42, 4));
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const int n = 2 + t % 3;
        const Eigen::Index dim = Eigen::Index{1} << n;
        const auto in = make_entanglement_inputs(eigensystem(HermitianOperator(oracle::random_hermitian(dim, rng))),
                                                 HermitianOperator(oracle::random_hermitian(dim, rng)), n);
        double sum = 0.0;
        double abs_sum = 0.0;
        for (Eigen::Index k = 0; k < dim; ++k) {
            const double kk = level_curvature(k, in);
            sum += kk;
            abs_sum += std::abs(kk);
        }
        worst = std::max(worst, std::abs(sum) / abs_sum);
    }
    return {worst <= 1e-9, "100 draws (N = 2..4); worst |sum K|/sum|K| = " + fmt("%.2e", worst)};
}

// ---------------------------------------------------------------- 5

Verdict criterion_5() {
    std::mt19937_64 rng(derive_seed(42, 5));
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    SpacingSample e;
    SpacingSample w;
    for (int i = 0; i < 10000; ++i) {
        e.spacings.push_back(expo(rng));
        // Inverse CDF of the Wigner surmise.
        w.spacings.push_back(std::sqrt(-4.0 / std::numbers::pi * std::log1p(-u(rng))));
    }
    const WeibullParams fe = weibull_fit(e);
    const WeibullParams fw = weibull_fit(w);
    const double gp = gamma_chaos(poisson_density);
    const double gw = gamma_chaos(wigner_dyson_density);
    const bool pass = std::abs(fe.c - 1.0) <= 0.05 && std::abs(fw.c - 2.0) <= 0.1 && std::abs(gp - 1.0) <= 1e-8 &&
                      std::abs(gw) <= 1e-8;
    return {pass, "c(exp) = " + fmt("%.4f", fe.c) + ", c(WD) = " + fmt("%.4f", fw.c) + ", gamma(P) - 1 = " +
                      fmt("%.1e", gp - 1.0) + ", gamma(WD) = " + fmt("%.1e", gw)};
}

// ---------------------------------------------------------------- 6

Verdict criterion_6() {
    std::vector<double> spacings;
    for (std::uint64_t s = 0; spacings.size() < 10000; ++s) {
        const RVector e = eigenvalues_only(sample({EnsembleKind::GOE, 128, 1.0}, derive_seed(42, s)));
        const SpacingSample part = spacing_sample(std::vector<double>(e.data(), e.data() + e.size()));
        spacings.insert(spacings.end(), part.spacings.begin(), part.spacings.end());
    }
    spacings.resize(10000);
    const double ks = ks_distance_wigner(spacings);
    return {ks < 0.02, "KS distance of 10^4 unfolded GOE spacings to P_WD = " + fmt("%.4f", ks)};
}

// ---------------------------------------------------------------- 7

Verdict criterion_7() {
    const fs::path dir = g_workdir / "sweep_theta";
    const auto t0 = std::chrono::steady_clock::now();
    if (cli({"sweep-theta", "--seed", "42", "--out", dir.string()}) != 0) {
        return {false, "sweep-theta failed"};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto rows = read_csv(dir / "theta_sweep.csv");  // theta,gamma_mean,gamma_stderr,b_mean,...
    const double g0 = rows.front()[1];
    const double g1 = rows.back()[1];
    std::size_t arg = 0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i][3] < rows[arg][3]) arg = i;
    }
    const bool pass = g0 > 0.8 && g1 < 0.2 && rows[arg][1] > 0.5 && secs <= 900.0;
    return {pass, "gamma(0) = " + fmt("%.3f", g0) + ", gamma(pi/2) = " + fmt("%.3f", g1) + "; min <b> = " +
                      fmt("%.3f", rows[arg][3]) + " at theta = " + fmt("%.3f", rows[arg][0]) + " where gamma = " +
                      fmt("%.3f", rows[arg][1]) + " (" + fmt("%.0fs", secs) + ")"};
}

// ---------------------------------------------------------------- 8

Verdict criterion_8(bool smoke) {
    const fs::path dir = g_workdir / "sweep_defect";
    const std::string qubits = smoke ? "8" : "9";
    const auto t0 = std::chrono::steady_clock::now();
    if (cli({"sweep-defect", "--seed", "42", "--qubits", qubits, "--out", dir.string()}) != 0) {
        return {false, "sweep-defect failed"};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // d,gamma_mean,gamma_stderr,b_mean,b_stderr,n_kept,n_trimmed,q_mean,q_stderr
    const auto rows = read_csv(dir / "defect_sweep.csv");
    auto arg = [&](std::size_t col, bool max) {
        std::size_t a = 0;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (max ? rows[i][col] > rows[a][col] : rows[i][col] < rows[a][col]) a = i;
        }
        return a;
    };
    const std::size_t gmin = arg(1, false);
    const std::size_t qmax = arg(7, true);
    const std::size_t bmax = arg(3, true);
    const double step = rows[1][0] - rows[0][0];
    const double dg = rows[gmin][0];
    const double dq = rows[qmax][0];
    const double db = rows[bmax][0];
    const bool gamma_ok = dg >= 0.1 - 1e-9 && dg <= 0.5 + 1e-9;
    const bool q_ok = std::abs(dq - 0.25) <= 2.0 * step + 1e-9;
    const bool b_ok = std::abs(db - dg) <= 2.0 * step + 1e-9;
    const double limit = smoke ? 900.0 : 3600.0;
    return {gamma_ok && q_ok && b_ok && secs <= limit,
            "N = " + qubits + ": argmin <gamma> at d = " + fmt("%.2f", dg) + " (gamma " + fmt("%.3f", rows[gmin][1]) +
                "), argmax <Q> at d = " + fmt("%.2f", dq) + ", argmax <b> at d = " + fmt("%.2f", db) +
                "; gamma(d=0) = " + fmt("%.3f", rows[0][1]) + " (" + fmt("%.0fs", secs) + ")"};
}

// ---------------------------------------------------------------- 9

Verdict criterion_9() {
    std::string text;
    if (cli({"report-ensembles", "--out", (g_workdir / "report").string()}, &text) != 0) {
        return {false, "report-ensembles failed"};
    }
    const bool pass = text.find("dQ_GOE/dQ_GUE = 0.84") != std::string::npos &&
                      text.find("dQ_GOE/dQ_GSE = 0.70") != std::string::npos;
    std::string flat = text;
    std::replace(flat.begin(), flat.end(), '\n', ';');
    return {pass, flat};
}

// ---------------------------------------------------------------- 10

Verdict criterion_10() {
    const std::vector<std::pair<std::vector<std::string>, std::string>> runs = {
        {{"check", "--model", "B", "--qubits", "3", "--samples", "500"}, "records.csv"},
        {{"check", "--model", "C", "--ensemble", "GOE", "--samples", "500"}, "records.csv"},
        {{"sweep-theta", "--realizations", "20", "--points", "4"}, "theta_sweep.csv"},
        {{"sweep-defect", "--realizations", "12", "--points", "4", "--qubits", "7"}, "defect_sweep.csv"},
        {{"stats", "--source", "D", "--theta", "0.4", "--realizations", "20"}, "stats.json"},
    };
    int identical = 0;
    std::string detail;
    for (const auto& [args, file] : runs) {
        std::vector<std::string> contents;
        for (const char* threads : {"1", "1", "4"}) {
            const fs::path dir = g_workdir / ("repro_" + args[0] + "_" + std::to_string(contents.size()));
            auto a = args;
            a.insert(a.end(), {"--seed", "7", "--threads", threads, "--out", dir.string()});
            if (cli(a) != 0) {
                return {false, args[0] + " failed"};
            }
            contents.push_back(slurp(dir / file));
        }
        const bool same = contents[0] == contents[1] && contents[1] == contents[2] && !contents[0].empty();
        identical += same ? 1 : 0;
        detail += args[0] + ":" + (same ? "identical " : "DIFFERENT ");
    }
    return {identical == static_cast<int>(runs.size()), detail + "(threads 1, 1, 4)"};
}

} // namespace

int main(int argc, char** argv) {
    bool smoke = false;
    std::set<int> only;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--workdir" && i + 1 < argc) {
            g_workdir = argv[++i];
        } else if (a == "--smoke") {
            smoke = true;
        } else if (a == "--only" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            std::string tok;
            while (std::getline(ss, tok, ',')) only.insert(std::stoi(tok));
        } else {
            std::cerr << "usage: acceptance [--workdir DIR] [--smoke] [--only 1,2,...]\n";
            return 2;
        }
    }
    fs::create_directories(g_workdir);

    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"Bound theorem, zero violations (A, B2, B3, C-GOE, C-GUE x 3000)", [] { return criterion_1_and_2(1); }},
        {"Statistical bound b', at most 5% above the line", [] { return criterion_1_and_2(2); }},
        {"Derivative oracles on 2- and 3-qubit instances", criterion_3},
        {"Curvature sum rule", criterion_4},
        {"Distribution recovery (Weibull fits, gamma endpoints)", criterion_5},
        {"GOE sampler spacing statistics", criterion_6},
        {"Model D theta sweep", criterion_7},
        {"Model E defect sweep", [smoke] { return criterion_8(smoke); }},
        {"Ensemble ratio report", criterion_9},
        {"Reproducibility across reruns and thread counts", criterion_10},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const int id = static_cast<int>(i) + 1;
        if (!only.empty() && only.count(id) == 0) continue;
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failed += v.pass ? 0 : 1;
        std::cout << (v.pass ? "[PASS] " : "[FAIL] ") << id << ". " << criteria[i].first << " | " << v.detail
                  << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
