#include "poreuq/pipeline.hpp"

#include <omp.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <sstream>
#include <system_error>

#include "poreuq/density.hpp"
#include "poreuq/errors.hpp"
#include "poreuq/rng.hpp"
#include "poreuq/stats.hpp"

namespace poreuq {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(std::string_view key, std::string_view v) {
    const std::string s(v);
    std::size_t pos = 0;
    double d = 0;
    try {
        d = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError("run config: value '" + s + "' for " + std::string(key) +
                          " is not a number");
    }
    if (pos != s.size() || !std::isfinite(d))
        throw ConfigError("run config: value '" + s + "' for " + std::string(key) +
                          " is not a finite number");
    return d;
}

// Counts accept scientific notation (gsa.n_kde = 1e6) but must be integral.
std::size_t parse_count(std::string_view key, std::string_view v) {
    const double d = parse_double(key, v);
    const double r = std::nearbyint(d);
    if (!(d >= 0) || d > 9e15 || std::abs(d - r) > 1e-6 * std::max(1.0, std::abs(d)))
        throw ConfigError("run config: " + std::string(key) + " must be a nonnegative integer");
    return static_cast<std::size_t>(r);
}

int parse_int(std::string_view key, std::string_view v, int lo) {
    const std::size_t c = parse_count(key, v);
    if (c > 1u << 30 || static_cast<int>(c) < lo)
        throw ConfigError("run config: " + std::string(key) + " must be an integer >= " +
                          std::to_string(lo));
    return static_cast<int>(c);
}

bool parse_bool(std::string_view key, std::string_view v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("run config: " + std::string(key) + " expects true or false, got '" +
                      std::string(v) + "'");
}

HyperRanges preset_ranges(std::string_view name) {
    if (name == "narrow") return narrow_ranges();
    if (name == "physical") return physical_ranges();
    throw ConfigError("run config: unknown preset '" + std::string(name) + "'");
}

int axis_of(std::string_view name) {
    for (int k = 0; k < 4; ++k)
        if (name == param_names[k]) return k;
    throw ConfigError("run config: unknown parameter '" + std::string(name) + "' in ranges key");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("run_pipeline: cannot open '" + path + "' for writing");
    return os;
}

void close_out(std::ofstream& os, const std::string& path) {
    os.flush();
    if (!os) throw IoError("run_pipeline: write to '" + path + "' failed");
}

}  // namespace

void apply_config_line(RunConfig& cfg, std::string_view key, std::string_view value) {
    const std::string v(trim(value));
    if (key == "model") {
        cfg.model = prior_model_from_string(v);
    } else if (key == "ranges.preset") {
        if (v == "custom") {
            cfg.preset = v;
        } else {
            cfg.ranges = preset_ranges(v);
            cfg.preset = v;
        }
    } else if (key.rfind("ranges.", 0) == 0 && key.size() > 7) {
        if (cfg.preset != "custom")
            throw ConfigError("run config: " + std::string(key) +
                              " requires ranges.preset = custom first");
        const std::string_view rest = key.substr(7);
        const std::size_t dot = rest.rfind('.');
        if (dot == std::string_view::npos)
            throw ConfigError("run config: malformed ranges key '" + std::string(key) + "'");
        const int k = axis_of(rest.substr(0, dot));
        const std::string_view side = rest.substr(dot + 1);
        if (side == "lo")
            cfg.ranges.lo[k] = parse_double(key, v);
        else if (side == "hi")
            cfg.ranges.hi[k] = parse_double(key, v);
        else
            throw ConfigError("run config: malformed ranges key '" + std::string(key) + "'");
    } else if (key == "sample.n") {
        cfg.sample_n = parse_count(key, v);
    } else if (key == "solver.resolution") {
        cfg.solver.resolution = parse_int(key, v, 8);
    } else if (key == "solver.tol") {
        cfg.solver.tol = parse_double(key, v);
    } else if (key == "solver.diffusivity_ratio") {
        cfg.solver.diffusivity_ratio = parse_double(key, v);
    } else if (key == "solver.max_iter") {
        cfg.solver.max_iter = static_cast<long long>(parse_count(key, v));
    } else if (key == "surrogate.order") {
        cfg.surrogate_order = parse_int(key, v, 0);
    } else if (key == "surrogate.oversample") {
        cfg.oversample = parse_double(key, v);
    } else if (key == "kde.grid") {
        cfg.kde_grid = parse_int(key, v, 8);
    } else if (key == "gsa.n_kde") {
        cfg.n_kde = parse_count(key, v);
    } else if (key == "gsa.m_mc") {
        cfg.m_mc = parse_count(key, v);
    } else if (key == "gsa.eval_mode") {
        if (v == "product")
            cfg.joint_eval = false;
        else if (v == "joint")
            cfg.joint_eval = true;
        else
            throw ConfigError("run config: gsa.eval_mode expects product or joint, got '" + v +
                              "'");
    } else if (key == "gsa.marginal") {
        if (v == "auto")
            cfg.marginal = MarginalMode::auto_mode;
        else if (v == "uniform")
            cfg.marginal = MarginalMode::uniform;
        else if (v == "kde")
            cfg.marginal = MarginalMode::kde;
        else
            throw ConfigError("run config: gsa.marginal expects auto, uniform or kde, got '" + v +
                              "'");
    } else if (key == "compare.enabled") {
        cfg.compare_enabled = parse_bool(key, v);
    } else if (key == "compare.preset") {
        preset_ranges(v);  // validates the name
        cfg.compare_preset = v;
    } else if (key == "compare.n") {
        cfg.compare_n = parse_count(key, v);
    } else if (key == "cramer.B") {
        cfg.cramer_B = parse_count(key, v);
    } else if (key == "cramer.confidence") {
        cfg.cramer_confidence = parse_double(key, v);
    } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_count(key, v));
    } else if (key == "jobs") {
        cfg.jobs = parse_int(key, v, 0);
    } else if (key == "out") {
        if (v.empty()) throw ConfigError("run config: out must not be empty");
        cfg.out = v;
    } else if (key == "cache.dir") {
        cfg.cache_dir = v;
    } else {
        throw ConfigError("run config: unknown key '" + std::string(key) + "'");
    }
}

RunConfig parse_run_config(std::istream& is) {
    RunConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string_view body = trim(line);
        if (body.empty()) continue;
        const std::size_t eq = body.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("run config line " + std::to_string(lineno) +
                              ": expected key = value");
        try {
            apply_config_line(cfg, trim(body.substr(0, eq)), body.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    validate(cfg);
    return cfg;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("load_run_config: cannot read '" + path + "'");
    return parse_run_config(is);
}

void validate(const RunConfig& cfg) {
    if (cfg.preset != "narrow" && cfg.preset != "physical" && cfg.preset != "custom")
        throw ConfigError("run config: unknown preset '" + cfg.preset + "'");
    for (int k = 0; k < 4; ++k)
        if (!(cfg.ranges.lo[k] < cfg.ranges.hi[k]))
            throw ConfigError("run config: empty range for " + std::string(param_names[k]));
    if (cfg.sample_n < 2) throw ConfigError("run config: sample.n below 2");
    if (!(cfg.solver.tol > 0)) throw ConfigError("run config: solver.tol must be positive");
    if (!(cfg.solver.diffusivity_ratio > 0))
        throw ConfigError("run config: solver.diffusivity_ratio must be positive");
    if (!(cfg.oversample >= 1)) throw ConfigError("run config: surrogate.oversample below 1");
    if (cfg.n_kde < 100000) throw ConfigError("run config: gsa.n_kde below 1e5");
    if (cfg.m_mc < 1000) throw ConfigError("run config: gsa.m_mc below 1e3");
    if (cfg.compare_n < 2) throw ConfigError("run config: compare.n below 2");
    if (cfg.cramer_B < 200) throw ConfigError("run config: cramer.B below 200");
    if (!(cfg.cramer_confidence > 0 && cfg.cramer_confidence < 1))
        throw ConfigError("run config: cramer.confidence outside (0, 1)");
    if (cfg.compare_enabled && cfg.compare_preset.empty() && cfg.preset == "custom")
        throw ConfigError("run config: compare.preset is required with custom ranges");
    if (cfg.out.empty()) throw ConfigError("run config: out must not be empty");
}

static std::string resolved_compare_preset(const RunConfig& cfg) {
    if (!cfg.compare_preset.empty()) return cfg.compare_preset;
    return cfg.preset == "narrow" ? "physical" : "narrow";
}

void write_run_config(std::ostream& os, const RunConfig& cfg) {
    os << "model = " << to_string(cfg.model) << '\n';
    os << "ranges.preset = " << cfg.preset << '\n';
    if (cfg.preset == "custom")
        for (int k = 0; k < 4; ++k)
            os << "ranges." << param_names[k] << ".lo = " << fmt(cfg.ranges.lo[k]) << '\n'
               << "ranges." << param_names[k] << ".hi = " << fmt(cfg.ranges.hi[k]) << '\n';
    os << "sample.n = " << cfg.sample_n << '\n';
    os << "solver.resolution = " << cfg.solver.resolution << '\n';
    os << "solver.tol = " << fmt(cfg.solver.tol) << '\n';
    os << "solver.diffusivity_ratio = " << fmt(cfg.solver.diffusivity_ratio) << '\n';
    os << "solver.max_iter = " << cfg.solver.max_iter << '\n';
    os << "surrogate.order = " << cfg.surrogate_order << '\n';
    os << "surrogate.oversample = " << fmt(cfg.oversample) << '\n';
    os << "kde.grid = " << cfg.kde_grid << '\n';
    os << "gsa.n_kde = " << cfg.n_kde << '\n';
    os << "gsa.m_mc = " << cfg.m_mc << '\n';
    os << "gsa.eval_mode = " << (cfg.joint_eval ? "joint" : "product") << '\n';
    os << "gsa.marginal = "
       << (cfg.marginal == MarginalMode::auto_mode
               ? "auto"
               : cfg.marginal == MarginalMode::uniform ? "uniform" : "kde")
       << '\n';
    os << "compare.enabled = " << (cfg.compare_enabled ? "true" : "false") << '\n';
    if (cfg.compare_enabled) os << "compare.preset = " << resolved_compare_preset(cfg) << '\n';
    os << "compare.n = " << cfg.compare_n << '\n';
    os << "cramer.B = " << cfg.cramer_B << '\n';
    os << "cramer.confidence = " << fmt(cfg.cramer_confidence) << '\n';
    os << "seed = " << cfg.seed << '\n';
    os << "jobs = " << cfg.jobs << '\n';
    os << "out = " << cfg.out << '\n';
    if (!cfg.cache_dir.empty()) os << "cache.dir = " << cfg.cache_dir << '\n';
}

std::string cache_canonical(const PoreParams& p, int resolution, double tol, double ratio) {
    char buf[192];
    std::snprintf(buf, sizeof buf, "R=%.12f theta=%.12f d=%.12f l=%.12f res=%d tol=%.12f ratio=%.12f",
                  p.R, p.theta, p.d, p.l, resolution, tol, ratio);
    return buf;
}

static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (const char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    return h;
}

std::string cache_key(const PoreParams& p, int resolution, double tol, double ratio) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(cache_canonical(p, resolution, tol, ratio))));
    return buf;
}

SolveCache::SolveCache(std::string dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("SolveCache: cannot create '" + dir_ + "': " + ec.message());
}

bool SolveCache::lookup(const PoreParams& p, const SolverConfig& cfg, EffectiveProps& out) const {
    const std::string canon =
        cache_canonical(p, cfg.resolution, cfg.tol, cfg.diffusivity_ratio);
    const std::string path =
        dir_ + "/" + cache_key(p, cfg.resolution, cfg.tol, cfg.diffusivity_ratio);
    std::ifstream is(path, std::ios::binary);
    bool good = false;
    if (is) {
        std::string magic, stored;
        std::getline(is, magic);
        std::getline(is, stored);
        // The stored canonical line guards against hash collisions and stale
        // formats; any mismatch falls through to a fresh solve.
        if (magic == "poreuq-cache 1" && stored == canon) {
            EffectiveProps e{};
            std::string k1, k2, k3, k4;
            if (is >> k1 >> e.DL >> k2 >> e.DT >> k3 >> e.geff >> k4 >> e.porosity &&
                k1 == "DL" && k2 == "DT" && k3 == "geff" && k4 == "porosity") {
                out = e;
                good = true;
            }
        }
    }
    if (good)
        ++hits_;
    else
        ++misses_;
    return good;
}

void SolveCache::store(const PoreParams& p, const SolverConfig& cfg,
                       const EffectiveProps& value) const {
    const std::string path =
        dir_ + "/" + cache_key(p, cfg.resolution, cfg.tol, cfg.diffusivity_ratio);
    const std::string tmp = path + ".tmp" + std::to_string(omp_get_thread_num());
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw IoError("SolveCache: cannot open '" + tmp + "' for writing");
        os << "poreuq-cache 1\n"
           << cache_canonical(p, cfg.resolution, cfg.tol, cfg.diffusivity_ratio) << '\n'
           << "DL " << fmt(value.DL) << '\n'
           << "DT " << fmt(value.DT) << '\n'
           << "geff " << fmt(value.geff) << '\n'
           << "porosity " << fmt(value.porosity) << '\n';
        os.flush();
        if (!os) throw IoError("SolveCache: write to '" + tmp + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("SolveCache: cannot publish '" + path + "': " + ec.message());
}

EffectiveProps SolveCache::forward(const PoreParams& p, const SolverConfig& cfg) const {
    EffectiveProps out{};
    if (lookup(p, cfg, out)) return out;
    out = forward_model(p, cfg);
    store(p, cfg, out);
    return out;
}

void write_corr_csv(std::ostream& os, const std::array<std::array<double, 4>, 4>& corr) {
    os << "param_row,param_col,rho\n";
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            os << param_names[i] << ',' << param_names[j] << ',' << fmt(corr[i][j]) << '\n';
}

void write_sobol_csv(std::ostream& os, const std::vector<PcSurrogate>& surrogates) {
    os << "param,qoi,S1\n";
    for (const PcSurrogate& s : surrogates) {
        const std::array<double, 4> s1 = sobol_first_order(s);
        for (int k = 0; k < 4; ++k)
            os << param_names[k] << ',' << to_string(s.qoi) << ',' << fmt(s1[k]) << '\n';
    }
}

TrainedSurrogates train_surrogates(const RunConfig& cfg, const HyperRanges& ranges,
                                   const SolveCache& cache, const char* label) {
    const int o = cfg.surrogate_order;
    const PcBasis basis = tensor_basis({o, o, o, o});
    const std::size_t n =
        static_cast<std::size_t>(std::llround(std::ceil(cfg.oversample * basis.size())));

    const CounterRng rng(cfg.seed, streams::train);
    std::vector<ZVec> z(n);
    std::vector<EffectiveProps> props(n);
    std::vector<std::uint8_t> ok(n, 0);
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        z[i] = ZVec{rng.u01(i, 0), rng.u01(i, 1), rng.u01(i, 2), rng.u01(i, 3)};
        try {
            props[i] = cache.forward(rosenblatt_inverse(cfg.model, ranges, z[i]), cfg.solver);
            ok[i] = 1;
        } catch (const std::exception&) {
            ok[i] = 0;
        }
    }

    TrainedSurrogates out;
    out.n_design = n;
    for (std::size_t i = 0; i < n; ++i)
        if (!ok[i]) out.failed_rows.push_back(i);
    if (out.failed_rows.size() * 100 > n)
        throw SolveError("run_pipeline: " + std::to_string(out.failed_rows.size()) + " of " +
                         std::to_string(n) + " training solves failed on the " + label +
                         " side (budget 1%)");

    TrainingSet data;
    data.z.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        if (ok[i]) data.z.push_back(z[i]);
    data.y.resize(data.z.size());
    for (const Qoi q : {Qoi::DL, Qoi::DT, Qoi::geff}) {
        std::size_t w = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (ok[i]) data.y[w++] = get(props[i], q);
        out.surr.push_back(pce_fit_data(basis, q, data));
    }
    return out;
}

namespace {

DensityGrid qoi_density(const std::vector<double>& col, int grid) {
    const BandwidthResult bw = isj_bandwidth(col);
    return kde_1d(col, bw.h, padded_axis(col, bw.h, grid));
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

ResultsStore run_pipeline(const RunConfig& cfg) {
    validate(cfg);
    if (cfg.jobs > 0) omp_set_num_threads(cfg.jobs);

    std::error_code ec;
    fs::create_directories(cfg.out, ec);
    if (ec) throw IoError("run_pipeline: cannot create '" + cfg.out + "': " + ec.message());
    fs::create_directories(cfg.out + "/surrogates", ec);
    fs::create_directories(cfg.out + "/densities", ec);
    if (ec) throw IoError("run_pipeline: cannot create output subdirectories: " + ec.message());

    const SolveCache cache(cfg.cache_dir.empty() ? cfg.out + "/cache" : cfg.cache_dir);
    std::ostringstream log;
    const auto t_start = std::chrono::steady_clock::now();

    {
        const std::string path = cfg.out + "/manifest.txt";
        std::ofstream os = open_out(path);
        os << "poreuq-manifest 1\nversion " << kVersion << "\n\n";
        write_run_config(os, cfg);
        close_out(os, path);
    }

    // Stage 1: prior samples and their empirical correlations.
    {
        const SampleBatch batch = sample_parameters(cfg.model, cfg.ranges, cfg.sample_n, cfg.seed);
        const std::string spath = cfg.out + "/samples.csv";
        std::ofstream os = open_out(spath);
        write_samples_csv(os, batch);
        close_out(os, spath);
        const std::string cpath = cfg.out + "/corr.csv";
        std::ofstream cs = open_out(cpath);
        write_corr_csv(cs, empirical_correlation(batch));
        close_out(cs, cpath);
        log << "sample_s " << seconds_since(t_start) << '\n';
    }

    // Stage 2: cached forward solves and surrogate fits.
    const auto t_train = std::chrono::steady_clock::now();
    const TrainedSurrogates primary = train_surrogates(cfg, cfg.ranges, cache, "primary");
    for (const PcSurrogate& s : primary.surr) {
        const std::string base = cfg.out + "/surrogates/" + std::string(to_string(s.qoi));
        std::ofstream os = open_out(base + ".txt");
        write_surrogate(os, s);
        close_out(os, base + ".txt");
        std::ofstream cs = open_out(base + "_coeff.csv");
        write_coefficients_csv(cs, s);
        close_out(cs, base + "_coeff.csv");
    }
    log << "train_s " << seconds_since(t_train) << '\n';

    // Stage 3: QoI densities over the shared GSA sample.
    const auto t_density = std::chrono::steady_clock::now();
    const SampleBatch gsa_batch = gsa_sample(cfg.model, cfg.ranges, cfg.n_kde, cfg.seed);
    std::vector<std::vector<double>> cols;
    for (const PcSurrogate& s : primary.surr) cols.push_back(qoi_column(s, gsa_batch));
    for (std::size_t q = 0; q < primary.surr.size(); ++q) {
        const std::string path = cfg.out + "/densities/" +
                                 std::string(to_string(primary.surr[q].qoi)) + ".csv";
        write_density_csv(qoi_density(cols[q], cfg.kde_grid), path);
    }
    log << "density_s " << seconds_since(t_density) << '\n';

    // Stage 4: mutual-information indices, rankings, Sobol' shares.
    const auto t_gsa = std::chrono::steady_clock::now();
    GsaConfig gc;
    gc.n_kde = cfg.n_kde;
    gc.m_mc = cfg.m_mc;
    gc.grid = cfg.kde_grid;
    gc.seed = cfg.seed;
    gc.joint_eval = cfg.joint_eval;
    gc.marginal = cfg.marginal;
    std::vector<MiEstimate> estimates;
    std::vector<RankingRow> rankings;
    for (std::size_t q = 0; q < primary.surr.size(); ++q) {
        std::vector<MiEstimate> block;
        for (const Param t : {Param::R, Param::theta, Param::d, Param::l})
            block.push_back(mi_index(primary.surr[q], gsa_batch, cols[q], t, gc));
        rankings.push_back(rank_effects(block));
        estimates.insert(estimates.end(), block.begin(), block.end());
    }
    {
        const std::string path = cfg.out + "/mi.csv";
        std::ofstream os = open_out(path);
        write_mi_csv(os, estimates, rankings, cfg.n_kde, cfg.seed);
        close_out(os, path);
    }
    {
        const std::string path = cfg.out + "/trace.csv";
        std::ofstream os = open_out(path);
        write_trace_csv(os, estimates);
        close_out(os, path);
    }
    {
        const std::string path = cfg.out + "/sobol.csv";
        std::ofstream os = open_out(path);
        write_sobol_csv(os, primary.surr);
        close_out(os, path);
    }
    log << "gsa_s " << seconds_since(t_gsa) << '\n';

    // Stage 5: two-sample comparison against the other preset's surrogates.
    const auto t_compare = std::chrono::steady_clock::now();
    std::size_t compare_failures = 0;
    {
        std::vector<CramerRow> rows;
        if (cfg.compare_enabled) {
            const TrainedSurrogates other = train_surrogates(
                cfg, preset_ranges(resolved_compare_preset(cfg)), cache, "compare");
            compare_failures = other.failed_rows.size();
            const CounterRng rng(cfg.seed, streams::compare);
            for (std::size_t q = 0; q < primary.surr.size(); ++q) {
                std::vector<double> a(cfg.compare_n), b(cfg.compare_n);
#pragma omp parallel for schedule(static)
                for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(cfg.compare_n); ++i) {
                    const ZVec za{rng.u01(i, 0), rng.u01(i, 1), rng.u01(i, 2), rng.u01(i, 3)};
                    const ZVec zb{rng.u01(i, 4), rng.u01(i, 5), rng.u01(i, 6), rng.u01(i, 7)};
                    a[i] = pce_eval(primary.surr[q], za);
                    b[i] = pce_eval(other.surr[q], zb);
                }
                rows.push_back({std::string(to_string(primary.surr[q].qoi)),
                                cramer_test(a, b, cfg.cramer_confidence, cfg.cramer_B, cfg.seed),
                                cfg.seed});
            }
        }
        const std::string path = cfg.out + "/cramer.csv";
        std::ofstream os = open_out(path);
        write_cramer_csv(os, rows);
        close_out(os, path);
    }
    log << "compare_s " << seconds_since(t_compare) << '\n';

    ResultsStore store;
    store.dir = cfg.out;
    store.cache_hits = cache.hits();
    store.cache_misses = cache.misses();
    store.failed_rows = primary.failed_rows;
    store.solve_failures = primary.failed_rows.size() + compare_failures;

    {
        const std::string path = cfg.out + "/run_log.txt";
        std::ofstream os = open_out(path);
        os << "cache_hits " << store.cache_hits << '\n'
           << "cache_misses " << store.cache_misses << '\n'
           << "solve_failures " << store.solve_failures << '\n';
        for (const std::size_t i : store.failed_rows) os << "failed primary row " << i << '\n';
        os << log.str() << "total_s " << seconds_since(t_start) << '\n';
        close_out(os, path);
    }
    return store;
}

}  // namespace poreuq
