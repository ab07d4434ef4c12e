#include "cli.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <Eigen/Core>
#include <boost/version.hpp>

#include <qcbound/experiments.hpp>

#ifndef QCBOUND_VERSION
#define QCBOUND_VERSION "0.0.0"
#endif

namespace qcbound::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr int kManifestVersion = 1;

// ---------------------------------------------------------------- helpers

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

unsigned resolve_threads(unsigned flag) {
    if (flag > 0) {
        return flag;
    }
    if (const char* env = std::getenv("QCBOUND_THREADS"); env != nullptr && *env != '\0') {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (*end != '\0' || v < 1 || v > 4096) {
            throw ValidationError(std::string("QCBOUND_THREADS must be a positive integer, got '") + env + "'");
        }
        return static_cast<unsigned>(v);
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    f << text;
    if (!f) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

// One flag that can also be set from the JSON config under the same name.
struct Binding {
    CLI::Option* option = nullptr;
    std::function<void(const json&)> load;
    std::function<ordered_json()> dump;
};

class Binder {
  public:
    explicit Binder(CLI::App* app) : app_(app) {}

    template <typename T>
    CLI::Option* option(const std::string& name, T& var, const std::string& help) {
        CLI::Option* o = app_->add_option("--" + name, var, help)->capture_default_str();
        add(name, o, var);
        return o;
    }

    CLI::Option* flag(const std::string& name, bool& var, const std::string& help) {
        CLI::Option* o = app_->add_flag("--" + name, var, help);
        add(name, o, var);
        return o;
    }

    // Values given on the command line win over the file.
    void apply(const json& config) {
        if (!config.is_object()) {
            throw ValidationError("config must be a JSON object");
        }
        for (const auto& [key, value] : config.items()) {
            const auto it = entries_.find(key);
            if (it == entries_.end()) {
                throw ValidationError("unknown config key '" + key + "' for '" + app_->get_name() + "'");
            }
            if (it->second.option->count() > 0) {
                continue;
            }
            try {
                it->second.load(value);
            } catch (const json::exception& e) {
                throw ValidationError("config key '" + key + "': " + e.what());
            }
        }
    }

    [[nodiscard]] ordered_json dump() const {
        ordered_json out = ordered_json::object();
        for (const auto& name : order_) {
            out[name] = entries_.at(name).dump();
        }
        return out;
    }

  private:
    template <typename T>
    void add(const std::string& name, CLI::Option* o, T& var) {
        entries_[name] = {o, [&var](const json& j) { var = j.get<T>(); }, [&var] { return ordered_json(var); }};
        order_.push_back(name);
    }

    CLI::App* app_;
    std::map<std::string, Binding> entries_;
    std::vector<std::string> order_;
};

// Options shared by every subcommand.
struct Common {
    std::string config;
    std::string out = "qcbound_out";
    std::uint64_t seed = 42;
    unsigned threads = 0;
    std::string started;
};

void bind_common(CLI::App* app, Binder& b, Common& c, bool with_seed = true) {
    app->add_option("--config", c.config, "JSON config file (or a manifest.json to rerun)");
    b.option("out", c.out, "output directory");
    if (with_seed) {
        b.option("seed", c.seed, "master seed");
    }
    b.option("threads", c.threads, "worker threads (0: QCBOUND_THREADS or all cores)");
}

void load_config(const std::string& path, const std::string& command, Binder& b) {
    if (path.empty()) {
        return;
    }
    std::ifstream f(path);
    if (!f) {
        throw ValidationError("cannot read config file '" + path + "'");
    }
    json j;
    try {
        j = json::parse(f);
    } catch (const json::exception& e) {
        throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (j.is_object() && j.contains("manifest_version")) {
        if (j.value("command", std::string{}) != command) {
            throw ValidationError("manifest '" + path + "' was written by '" + j.value("command", std::string{}) +
                                  "', not '" + command + "'");
        }
        j = j.at("config");
    }
    b.apply(j);
}

struct Unfolding {
    int degree = 6;
    double edge_trim = 0.05;
};

void bind_unfolding(Binder& b, Unfolding& u) {
    b.option("unfold-degree", u.degree, "polynomial degree of the counting-function fit");
    b.option("edge-trim", u.edge_trim, "fraction of levels dropped at each spectrum edge");
}

ordered_json unfolding_json(const Unfolding& u) {
    return {{"method", "polynomial counting-function fit"}, {"degree", u.degree}, {"edge_trim", u.edge_trim},
            {"degree_retry", "one reduction if non-monotone"}};
}

class Manifest {
  public:
    Manifest(std::string command, const Binder& b, const Common& common, fs::path dir)
        : dir_(std::move(dir)), started_(common.started) {
        doc_["manifest_version"] = kManifestVersion;
        doc_["tool"] = "qcbound";
        doc_["version"] = QCBOUND_VERSION;
        doc_["command"] = std::move(command);
        doc_["master_seed"] = common.seed;
        doc_["rng_algorithm"] = std::string(kRngAlgorithm);
        doc_["config"] = b.dump();
        doc_["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                           "." + std::to_string(EIGEN_MINOR_VERSION)},
                             {"boost", BOOST_LIB_VERSION}};
    }

    ordered_json& operator[](const std::string& key) { return doc_[key]; }

    void add_output(const std::string& name) { outputs_.push_back(name); }

    void write() {
        doc_["started_utc"] = started_;
        doc_["finished_utc"] = utc_now();
        ordered_json digests = ordered_json::object();
        for (const auto& name : outputs_) {
            digests[name] = {{"sha256", sha256_hex_file((dir_ / name).string())}};
        }
        doc_["outputs"] = digests;
        write_text(dir_ / "manifest.json", doc_.dump(2) + "\n");
    }

  private:
    fs::path dir_;
    std::string started_;
    ordered_json doc_;
    std::vector<std::string> outputs_;
};

fs::path prepare_dir(const std::string& out) {
    if (out.empty()) {
        throw ValidationError("--out must not be empty");
    }
    fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create output directory '" + out + "': " + ec.message());
    }
    return dir;
}

GammaMode gamma_mode_from(const std::string& s) {
    if (s == "pooled") return GammaMode::Pooled;
    if (s == "per-realization") return GammaMode::PerRealization;
    throw ValidationError("gamma-mode must be 'pooled' or 'per-realization', got '" + s + "'");
}

BoundReference b_reference_from(const std::string& s) {
    if (s == "ground") return BoundReference::Ground;
    if (s == "level-average") return BoundReference::LevelAverage;
    throw ValidationError("b-reference must be 'ground' or 'level-average', got '" + s + "'");
}

BPrimeScale b_prime_scale_from(const std::string& s) {
    if (s == "pow2") return BPrimeScale::InversePowerOfTwo;
    if (s == "qubits") return BPrimeScale::InverseQubits;
    throw ValidationError("b-prime-scale must be 'pow2' (a = 1/2^N) or 'qubits' (a = 1/N), got '" + s + "'");
}

ordered_json row_json(const SweepRow& r) {
    auto num = [](double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); };
    return {{"param", r.param},         {"valid", r.valid},           {"gamma_mean", num(r.gamma_mean)},
            {"gamma_stderr", num(r.gamma_stderr)}, {"b_mean", num(r.b_mean)}, {"b_stderr", num(r.b_stderr)},
            {"q_mean", num(r.q_mean)},   {"q_stderr", num(r.q_stderr)}, {"n_kept", r.n_kept},
            {"n_trimmed", r.n_trimmed}, {"n_failed", r.n_failed},     {"n_spacings", r.n_spacings},
            {"weibull_a", num(r.weibull_a)}, {"weibull_c", num(r.weibull_c)}};
}

// ---------------------------------------------------------------- check

struct CheckArgs {
    Common common;
    std::string model = "B";
    int qubits = 0;
    long samples = 3000;
    std::string ensemble = "GUE";
    std::vector<double> fields{0.1, 0.2, 0.3};
    double coupling = 0.5;
    std::string b_prime_scale = "pow2";
};

int run_check(const CheckArgs& a, const Binder& b, std::ostream& out, std::ostream& err) {
    ModelConfig config;
    config.family = model_family_from_string(a.model);
    config.n_qubits = a.qubits > 0 ? a.qubits : (config.family == ModelFamily::A ? 3 : 2);
    config.fields = a.fields;
    config.coupling = a.coupling;
    config.perturbation_ensemble = ensemble_from_string(a.ensemble);
    config.master_seed = a.common.seed;
    ScatterOptions opt;
    opt.b_prime_scale = b_prime_scale_from(a.b_prime_scale);
    opt.threads = resolve_threads(a.common.threads);
    if (a.samples < 1) {
        throw ValidationError("--samples must be >= 1");
    }
    config.validate();
    const fs::path dir = prepare_dir(a.common.out);

    const ScatterResult r = scatter_bound_test(config, a.samples, a.common.seed, opt);

    std::string csv = "sample_seed,dq_abs,k0,b,b_prime,delta\n";
    double max_delta = -std::numeric_limits<double>::infinity();
    for (const BoundRecord& rec : r.records) {
        csv += std::to_string(rec.seed) + "," + fmt17(rec.dq_abs) + "," + fmt17(rec.k0) + "," + fmt17(rec.b) + "," +
               fmt17(rec.b_prime) + "," + fmt17(rec.delta) + "\n";
        max_delta = std::max(max_delta, rec.delta);
    }
    write_text(dir / "records.csv", csv);

    const double a_width = b_prime_width(opt.b_prime_scale, config.n_qubits);
    ordered_json summary;
    summary["model"] = r.model_tag;
    summary["master_seed"] = r.master_seed;
    summary["samples_requested"] = r.requested;
    summary["samples_accepted"] = r.records.size();
    summary["samples_rejected"] = r.rejected;
    summary["violations_b"] = r.violations_b;
    summary["violations_b_prime"] = r.violations_b_prime;
    summary["fraction_above_b_prime"] =
        r.records.empty() ? 0.0 : static_cast<double>(r.violations_b_prime) / static_cast<double>(r.records.size());
    summary["b"] = r.b;
    summary["b_prime"] = r.b_prime;
    summary["b_prime_a"] = a_width;
    summary["b_prime_scale"] = a.b_prime_scale;
    summary["slack_relative_to_b"] = opt.slack;
    summary["max_delta"] = r.records.empty() ? ordered_json(nullptr) : ordered_json(max_delta);
    summary["log"] = r.log;
    write_text(dir / "summary.json", summary.dump(2) + "\n");

    Manifest m("check", b, a.common, dir);
    m["model"] = {{"family", to_string(config.family)},
                  {"n_qubits", config.n_qubits},
                  {"fields", config.fields},
                  {"coupling", config.coupling},
                  {"perturbation_ensemble", to_string(config.perturbation_ensemble)}};
    m["b_prime"] = {{"scale", a.b_prime_scale}, {"a", a_width}};
    m.add_output("records.csv");
    m.add_output("summary.json");
    m.write();

    out << r.model_tag << ": " << r.records.size() << " samples, " << r.violations_b << " b-bound violations, "
        << r.violations_b_prime << " above b' (a = " << a_width << "), b = " << fmt17(r.b) << "\n";
    if (r.violations_b > 0) {
        err << "qcbound: bound |dQ/dtau| <= b sqrt|K0| violated in " << r.violations_b << " samples\n";
        return kExitViolation;
    }
    return kExitOk;
}

// ---------------------------------------------------------------- sweeps

struct SweepArgs {
    Common common;
    int realizations = 100;
    int points = 0;
    std::vector<double> grid;
    Unfolding unfolding;
    double outlier_k = 1.5;
    std::string gamma_mode = "pooled";
    // theta
    Eigen::Index dim = 128;
    std::string b_reference = "ground";
    // defect
    double d_max = 2.5;
    int qubits = 9;
    double field = 1.0;
    double exchange = 1.0;
    bool full_spectrum = false;
};

SweepOptions sweep_options(const SweepArgs& a) {
    SweepOptions o;
    o.realizations = a.realizations;
    o.unfolding = {a.unfolding.degree, a.unfolding.edge_trim};
    o.gamma_mode = gamma_mode_from(a.gamma_mode);
    o.outlier_k = a.outlier_k;
    o.threads = resolve_threads(a.common.threads);
    o.b_reference = b_reference_from(a.b_reference);
    o.dim = a.dim;
    o.n_qubits = a.qubits;
    o.field = a.field;
    o.exchange = a.exchange;
    o.sector_restricted = !a.full_spectrum;
    o.validate();
    return o;
}

void write_sweep(const std::string& command, const std::string& csv_name, const std::string& param_name, bool with_q,
                 const SweepArgs& a, const SweepOptions& o, const SweepResult& r, const Binder& b, std::ostream& out) {
    const fs::path dir = prepare_dir(a.common.out);
    std::string csv = param_name + ",gamma_mean,gamma_stderr,b_mean,b_stderr,n_kept,n_trimmed";
    csv += with_q ? ",q_mean,q_stderr\n" : "\n";
    for (const SweepRow& row : r.rows) {
        csv += fmt17(row.param) + "," + fmt17(row.gamma_mean) + "," + fmt17(row.gamma_stderr) + "," +
               fmt17(row.b_mean) + "," + fmt17(row.b_stderr) + "," + std::to_string(row.n_kept) + "," +
               std::to_string(row.n_trimmed);
        csv += with_q ? "," + fmt17(row.q_mean) + "," + fmt17(row.q_stderr) + "\n" : "\n";
    }
    write_text(dir / csv_name, csv);

    ordered_json summary;
    summary["command"] = command;
    summary["realizations"] = o.realizations;
    summary["gamma_mode"] = a.gamma_mode;
    summary["rows"] = ordered_json::array();
    for (const SweepRow& row : r.rows) {
        summary["rows"].push_back(row_json(row));
    }
    summary["log"] = r.log;
    write_text(dir / "summary.json", summary.dump(2) + "\n");

    Manifest m(command, b, a.common, dir);
    m["unfolding"] = unfolding_json(a.unfolding);
    m["outliers"] = {{"rule", "Tukey fences on b"}, {"k", o.outlier_k}};
    m["grid"] = [&] {
        std::vector<double> g;
        for (const auto& row : r.rows) g.push_back(row.param);
        return g;
    }();
    m.add_output(csv_name);
    m.add_output("summary.json");
    m.write();

    std::size_t invalid = 0;
    for (const auto& row : r.rows) invalid += row.valid ? 0 : 1;
    out << command << ": " << r.rows.size() << " grid points, " << o.realizations << " realizations each, " << invalid
        << " invalid rows -> " << (dir / csv_name).string() << "\n";
}

int run_sweep_theta(const SweepArgs& a, const Binder& b, std::ostream& out) {
    const SweepOptions o = sweep_options(a);
    const std::vector<double> grid = a.grid.empty() ? default_theta_grid(a.points > 0 ? a.points : 16) : a.grid;
    const SweepResult r = sweep_theta(grid, a.common.seed, o);
    write_sweep("sweep-theta", "theta_sweep.csv", "theta", false, a, o, r, b, out);
    return kExitOk;
}

int run_sweep_defect(const SweepArgs& a, const Binder& b, std::ostream& out) {
    const SweepOptions o = sweep_options(a);
    ModelConfig probe;
    probe.family = ModelFamily::E;
    probe.n_qubits = a.qubits;
    probe.field = a.field;
    probe.exchange = a.exchange;
    probe.validate();
    const std::vector<double> grid =
        a.grid.empty() ? default_defect_grid(a.points > 0 ? a.points : 26, a.d_max) : a.grid;
    const SweepResult r = sweep_defect(grid, a.common.seed, o);
    write_sweep("sweep-defect", "defect_sweep.csv", "d", true, a, o, r, b, out);
    return kExitOk;
}

// ---------------------------------------------------------------- stats

struct StatsArgs {
    Common common;
    std::string source = "GOE";
    int realizations = 100;
    Eigen::Index dim = 128;
    double theta = 0.0;
    double d = 0.3;
    int qubits = 9;
    double field = 1.0;
    double exchange = 1.0;
    bool full_spectrum = false;
    Unfolding unfolding;
};

int run_stats(const StatsArgs& a, const Binder& b, std::ostream& out) {
    if (a.realizations < 1) {
        throw ValidationError("--realizations must be >= 1");
    }
    const UnfoldOptions uo{a.unfolding.degree, a.unfolding.edge_trim};
    uo.validate();
    const bool is_d = a.source == "D";
    const bool is_e = a.source == "E";
    EnsembleKind kind = EnsembleKind::GOE;
    if (is_d) {
        ModelConfig c;
        c.family = ModelFamily::D;
        c.theta = a.theta;
        c.dim_d = a.dim;
        c.validate();
    } else if (is_e) {
        ModelConfig c;
        c.family = ModelFamily::E;
        c.n_qubits = a.qubits;
        c.defect_stddev = a.d;
        c.field = a.field;
        c.exchange = a.exchange;
        c.validate();
    } else {
        kind = ensemble_from_string(a.source);
        EnsembleSpec{kind, a.dim, 1.0}.validate();
    }
    const unsigned threads = resolve_threads(a.common.threads);
    const auto sector = is_e ? largest_sz_sector(a.qubits) : std::vector<Eigen::Index>{};

    struct Draw {
        bool ok = false;
        SpacingSample s;
        std::string error;
    };
    const auto draws = parallel_map<Draw>(static_cast<std::size_t>(a.realizations), threads, [&](std::size_t r) {
        Draw d;
        const std::uint64_t seed = derive_seed(a.common.seed, r);
        try {
            RVector e;
            if (is_d) {
                e = eigenvalues_only(model_d(model_d_parts(seed, a.dim), a.theta));
            } else if (is_e) {
                const HermitianOperator h = model_e(a.qubits, a.d, a.field, a.exchange, seed);
                e = a.full_spectrum ? eigenvalues_only(h) : eigenvalues_only(restrict_to(h, sector));
            } else {
                e = eigenvalues_only(sample({kind, a.dim, 1.0}, seed));
            }
            d.s = spacing_sample(std::vector<double>(e.data(), e.data() + e.size()), uo);
            d.ok = true;
        } catch (const std::exception& ex) {
            d.error = ex.what();
        }
        return d;
    });
    std::vector<SpacingSample> parts;
    std::vector<std::string> log;
    for (std::size_t r = 0; r < draws.size(); ++r) {
        if (draws[r].ok) {
            parts.push_back(draws[r].s);
        } else {
            log.push_back("realization " + std::to_string(r) + " failed: " + draws[r].error);
        }
    }
    const SpacingSample pooled = pool(parts, a.source);
    const WeibullParams fit = weibull_fit(pooled);

    const fs::path dir = prepare_dir(a.common.out);
    ordered_json stats;
    stats["source"] = a.source;
    stats["realizations"] = a.realizations;
    stats["n_failed"] = a.realizations - static_cast<int>(parts.size());
    stats["n_spacings"] = pooled.spacings.size();
    stats["n_levels_discarded"] = pooled.n_levels_discarded;
    stats["weibull"] = {{"a", fit.a},           {"c", fit.c},           {"se_a", fit.se_a},
                        {"se_c", fit.se_c},     {"cov_ac", fit.cov_ac}, {"log_likelihood", fit.log_likelihood},
                        {"iterations", fit.iterations}, {"n_floored", fit.n_floored}};
    stats["gamma"] = gamma_chaos(fit);
    stats["gamma_stderr"] = gamma_chaos_stderr(fit);
    stats["ks_distance_wigner"] = ks_distance_wigner(pooled.spacings);
    stats["log"] = log;
    write_text(dir / "stats.json", stats.dump(2) + "\n");

    Manifest m("stats", b, a.common, dir);
    m["unfolding"] = unfolding_json(a.unfolding);
    m.add_output("stats.json");
    m.write();

    out << a.source << ": " << pooled.spacings.size() << " spacings, Weibull c = " << fit.c << ", gamma = "
        << stats["gamma"].get<double>() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- report-ensembles

struct ReportArgs {
    Common common;
    double scale_a = 1.0;
};

int run_report(const ReportArgs& a, const Binder& b, std::ostream& out) {
    const EnsembleRatioReport r = ensemble_delta_q_ratios(a.scale_a);
    const fs::path dir = prepare_dir(a.common.out);
    out << std::fixed << std::setprecision(2);
    out << "<sqrt|K|>  GOE " << r.mean_sqrt_k_goe << "  GUE " << r.mean_sqrt_k_gue << "  GSE " << r.mean_sqrt_k_gse
        << "  (A = " << r.scale_a << ")\n";
    out << "dQ_GOE/dQ_GUE = " << r.ratio_goe_gue << "\n";
    out << "dQ_GOE/dQ_GSE = " << r.ratio_goe_gse << "\n";
    out << std::defaultfloat;
    Manifest m("report-ensembles", b, a.common, dir);
    m["report"] = {{"scale_a", r.scale_a},
                   {"mean_sqrt_k_goe", r.mean_sqrt_k_goe},
                   {"mean_sqrt_k_gue", r.mean_sqrt_k_gue},
                   {"mean_sqrt_k_gse", r.mean_sqrt_k_gse},
                   {"ratio_goe_gue", r.ratio_goe_gue},
                   {"ratio_goe_gse", r.ratio_goe_gse}};
    m.write();
    return kExitOk;
}

} // namespace

std::string sha256_hex_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw std::runtime_error("cannot read " + path + " for hashing");
    }
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 initialisation failed");
    }
    char buf[1 << 16];
    while (f) {
        f.read(buf, sizeof buf);
        if (f.gcount() > 0) {
            EVP_DigestUpdate(ctx.get(), buf, static_cast<std::size_t>(f.gcount()));
        }
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx.get(), md, &len);
    std::ostringstream hex;
    for (unsigned i = 0; i < len; ++i) {
        hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
    }
    return hex.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Entanglement-rate bounds from level curvature: scatter tests, chaos sweeps and spacing statistics",
                 "qcbound"};
    app.set_version_flag("--version", QCBOUND_VERSION);
    app.require_subcommand(1);

    CheckArgs check;
    auto* check_cmd = app.add_subcommand("check", "scatter test of |dQ/dtau| <= b sqrt|K0| over random V draws");
    Binder check_b(check_cmd);
    bind_common(check_cmd, check_b, check.common);
    check_b.option("model", check.model, "model family A, B or C");
    check_b.option("qubits", check.qubits, "number of qubits (0: 3 for A, 2 otherwise)");
    check_b.option("samples", check.samples, "number of V draws");
    check_b.option("ensemble", check.ensemble, "model C perturbation ensemble, GOE or GUE");
    check_b.option("fields", check.fields, "model A field constants a_j")->delimiter(',');
    check_b.option("coupling", check.coupling, "model A exchange coupling lambda");
    check_b.option("b-prime-scale", check.b_prime_scale, "a in b': pow2 (1/2^N) or qubits (1/N)");

    SweepArgs theta;
    auto* theta_cmd = app.add_subcommand("sweep-theta", "model D: gamma and <b> along the Poisson-GOE interpolation");
    Binder theta_b(theta_cmd);
    bind_common(theta_cmd, theta_b, theta.common);
    theta_b.option("realizations", theta.realizations, "realizations per grid point");
    theta_b.option("points", theta.points, "uniform grid points over [0, pi/2] (0: 16)");
    theta_b.option("grid", theta.grid, "explicit theta values, overrides --points")->delimiter(',');
    theta_b.option("dim", theta.dim, "matrix dimension");
    bind_unfolding(theta_b, theta.unfolding);
    theta_b.option("outlier-k", theta.outlier_k, "Tukey fence factor for b");
    theta_b.option("gamma-mode", theta.gamma_mode, "pooled or per-realization");
    theta_b.option("b-reference", theta.b_reference, "ground or level-average");

    SweepArgs defect;
    auto* defect_cmd = app.add_subcommand("sweep-defect", "model E: gamma, <b> and <Q> against defect spread d");
    Binder defect_b(defect_cmd);
    bind_common(defect_cmd, defect_b, defect.common);
    defect_b.option("realizations", defect.realizations, "realizations per grid point");
    defect_b.option("points", defect.points, "uniform grid points over [0, d-max] (0: 26)");
    defect_b.option("d-max", defect.d_max, "upper end of the d grid");
    defect_b.option("grid", defect.grid, "explicit d values, overrides --points")->delimiter(',');
    defect_b.option("qubits", defect.qubits, "chain length N");
    defect_b.option("field", defect.field, "homogeneous field h");
    defect_b.option("exchange", defect.exchange, "exchange J");
    defect_b.flag("full-spectrum", defect.full_spectrum, "spacing statistics over all S_z sectors");
    bind_unfolding(defect_b, defect.unfolding);
    defect_b.option("outlier-k", defect.outlier_k, "Tukey fence factor for b");
    defect_b.option("gamma-mode", defect.gamma_mode, "pooled or per-realization");

    StatsArgs stats;
    auto* stats_cmd = app.add_subcommand("stats", "pooled Weibull fit and gamma for one ensemble or model point");
    Binder stats_b(stats_cmd);
    bind_common(stats_cmd, stats_b, stats.common);
    stats_b.option("source", stats.source, "GOE, GUE, Poisson, D or E");
    stats_b.option("realizations", stats.realizations, "number of draws pooled");
    stats_b.option("dim", stats.dim, "matrix dimension for ensembles and model D");
    stats_b.option("theta", stats.theta, "model D angle");
    stats_b.option("d", stats.d, "model E defect spread");
    stats_b.option("qubits", stats.qubits, "model E chain length");
    stats_b.option("field", stats.field, "model E field h");
    stats_b.option("exchange", stats.exchange, "model E exchange J");
    stats_b.flag("full-spectrum", stats.full_spectrum, "model E: use all S_z sectors");
    bind_unfolding(stats_b, stats.unfolding);

    ReportArgs report;
    auto* report_cmd = app.add_subcommand("report-ensembles", "GOE/GUE and GOE/GSE entanglement-change ratios");
    Binder report_b(report_cmd);
    bind_common(report_cmd, report_b, report.common, false);
    report_b.option("scale-a", report.scale_a, "common constant A in gamma_nu = nu A");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitValidation;
    }

    const std::string started = utc_now();
    for (Common* c : {&check.common, &theta.common, &defect.common, &stats.common, &report.common}) {
        c->started = started;
    }
    try {
        if (check_cmd->parsed()) {
            load_config(check.common.config, "check", check_b);
            return run_check(check, check_b, out, err);
        }
        if (theta_cmd->parsed()) {
            load_config(theta.common.config, "sweep-theta", theta_b);
            return run_sweep_theta(theta, theta_b, out);
        }
        if (defect_cmd->parsed()) {
            load_config(defect.common.config, "sweep-defect", defect_b);
            return run_sweep_defect(defect, defect_b, out);
        }
        if (stats_cmd->parsed()) {
            load_config(stats.common.config, "stats", stats_b);
            return run_stats(stats, stats_b, out);
        }
        load_config(report.common.config, "report-ensembles", report_b);
        return run_report(report, report_b, out);
    } catch (const ValidationError& e) {
        err << "qcbound: invalid input: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        err << "qcbound: error: " << e.what() << "\n";
        return kExitError;
    }
}

} // namespace qcbound::cli
