#include <CLI11.hpp>
#include <omp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "poreuq/density.hpp"
#include "poreuq/errors.hpp"
#include "poreuq/gsa.hpp"
#include "poreuq/pipeline.hpp"
#include "poreuq/rng.hpp"
#include "poreuq/stats.hpp"

using namespace poreuq;
namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config, out, preset, model;
    std::uint64_t seed = 0;
    int jobs = 0;
    std::vector<std::string> sets;  // raw key=value overrides
    CLI::Option *seed_opt = nullptr, *jobs_opt = nullptr;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--config", c.config, "run-config file (key = value lines)");
    cmd->add_option("--out", c.out, "output directory");
    c.seed_opt = cmd->add_option("--seed", c.seed, "run seed");
    c.jobs_opt = cmd->add_option("--jobs", c.jobs, "OpenMP worker count (0 = default)");
    cmd->add_option("--preset", c.preset, "hyper-range preset")
        ->check(CLI::IsMember({"narrow", "physical"}));
    cmd->add_option("--model", c.model, "prior model")->check(CLI::IsMember({"p0", "p1", "p2"}));
    cmd->add_option("--set", c.sets, "extra config override, key=value")->take_all();
}

RunConfig resolve(const Common& c) {
    RunConfig cfg = c.config.empty() ? RunConfig{} : load_run_config(c.config);
    if (!c.model.empty()) apply_config_line(cfg, "model", c.model);
    if (!c.preset.empty()) apply_config_line(cfg, "ranges.preset", c.preset);
    for (const std::string& kv : c.sets) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        apply_config_line(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (c.seed_opt->count()) cfg.seed = c.seed;
    if (c.jobs_opt->count()) cfg.jobs = c.jobs;
    if (!c.out.empty()) cfg.out = c.out;
    validate(cfg);
    if (cfg.jobs > 0) omp_set_num_threads(cfg.jobs);
    return cfg;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    return os;
}

void finish(std::ofstream& os, const std::string& path) {
    os.flush();
    if (!os) throw IoError("write to '" + path + "' failed");
    std::cout << "wrote " << path << '\n';
}

PcSurrogate load_surrogate(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot read surrogate file '" + path + "'");
    return read_surrogate(is);
}

int cmd_sample(const Common& c) {
    const RunConfig cfg = resolve(c);
    fs::create_directories(cfg.out);
    const SampleBatch batch = sample_parameters(cfg.model, cfg.ranges, cfg.sample_n, cfg.seed);
    {
        const std::string path = cfg.out + "/samples.csv";
        std::ofstream os = open_out(path);
        write_samples_csv(os, batch);
        finish(os, path);
    }
    {
        const std::string path = cfg.out + "/corr.csv";
        std::ofstream os = open_out(path);
        write_corr_csv(os, empirical_correlation(batch));
        finish(os, path);
    }
    return 0;
}

int cmd_solve(const Common& c, const PoreParams& p, bool use_cache) {
    const RunConfig cfg = resolve(c);
    EffectiveProps e{};
    if (use_cache) {
        const SolveCache cache(cfg.cache_dir.empty() ? cfg.out + "/cache" : cfg.cache_dir);
        e = cache.forward(p, cfg.solver);
        std::cout << (cache.hits() ? "cache hit\n" : "cache miss\n");
    } else {
        e = forward_model(p, cfg.solver);
    }
    std::printf("DL %.17g\nDT %.17g\ngeff %.17g\nporosity %.17g\n", e.DL, e.DT, e.geff,
                e.porosity);
    return 0;
}

int cmd_fit(const Common& c) {
    const RunConfig cfg = resolve(c);
    fs::create_directories(cfg.out + "/surrogates");
    const SolveCache cache(cfg.cache_dir.empty() ? cfg.out + "/cache" : cfg.cache_dir);
    const TrainedSurrogates trained = train_surrogates(cfg, cfg.ranges, cache, "fit");
    for (const PcSurrogate& s : trained.surr) {
        const std::string base = cfg.out + "/surrogates/" + std::string(to_string(s.qoi));
        std::ofstream os = open_out(base + ".txt");
        write_surrogate(os, s);
        finish(os, base + ".txt");
        std::ofstream cs = open_out(base + "_coeff.csv");
        write_coefficients_csv(cs, s);
        finish(cs, base + "_coeff.csv");
        std::printf("%s: n_train %zu, residual %.3e, condition %.3e\n",
                    std::string(to_string(s.qoi)).c_str(), s.diag.n_train, s.diag.residual_norm,
                    s.diag.condition);
    }
    if (!trained.failed_rows.empty())
        std::cout << trained.failed_rows.size() << " of " << trained.n_design
                  << " training solves failed\n";
    std::cout << "cache hits " << cache.hits() << ", misses " << cache.misses() << '\n';
    return 0;
}

int cmd_density(const Common& c, const std::vector<std::string>& surrogate_files) {
    const RunConfig cfg = resolve(c);
    fs::create_directories(cfg.out + "/densities");
    const SampleBatch batch = gsa_sample(cfg.model, cfg.ranges, cfg.n_kde, cfg.seed);
    for (const std::string& file : surrogate_files) {
        const PcSurrogate s = load_surrogate(file);
        const std::vector<double> col = qoi_column(s, batch);
        const BandwidthResult bw = isj_bandwidth(col);
        const DensityGrid g = kde_1d(col, bw.h, padded_axis(col, bw.h, cfg.kde_grid));
        const std::string path =
            cfg.out + "/densities/" + std::string(to_string(s.qoi)) + ".csv";
        write_density_csv(g, path);
        std::cout << "wrote " << path << " (h = " << bw.h << ")\n";
    }
    return 0;
}

int cmd_gsa(const Common& c, const std::vector<std::string>& surrogate_files) {
    const RunConfig cfg = resolve(c);
    fs::create_directories(cfg.out);
    const SampleBatch batch = gsa_sample(cfg.model, cfg.ranges, cfg.n_kde, cfg.seed);
    GsaConfig gc;
    gc.n_kde = cfg.n_kde;
    gc.m_mc = cfg.m_mc;
    gc.grid = cfg.kde_grid;
    gc.seed = cfg.seed;
    gc.joint_eval = cfg.joint_eval;
    gc.marginal = cfg.marginal;

    std::vector<PcSurrogate> loaded;
    std::vector<MiEstimate> estimates;
    std::vector<RankingRow> rankings;
    for (const std::string& file : surrogate_files) {
        loaded.push_back(load_surrogate(file));
        const PcSurrogate& s = loaded.back();
        const std::vector<double> col = qoi_column(s, batch);
        std::vector<MiEstimate> block;
        for (const Param t : {Param::R, Param::theta, Param::d, Param::l})
            block.push_back(mi_index(s, batch, col, t, gc));
        rankings.push_back(rank_effects(block));
        estimates.insert(estimates.end(), block.begin(), block.end());
        const RankingRow& rank = rankings.back();
        std::size_t top = 0;
        for (std::size_t k = 1; k < rank.share.size(); ++k)
            if (rank.share[k] > rank.share[top]) top = k;
        std::printf("%s: top effect %s (share %.3f)\n", rank.qoi.c_str(),
                    rank.param[top].c_str(), rank.share[top]);
    }
    {
        const std::string path = cfg.out + "/mi.csv";
        std::ofstream os = open_out(path);
        write_mi_csv(os, estimates, rankings, cfg.n_kde, cfg.seed);
        finish(os, path);
    }
    {
        const std::string path = cfg.out + "/trace.csv";
        std::ofstream os = open_out(path);
        write_trace_csv(os, estimates);
        finish(os, path);
    }
    {
        const std::string path = cfg.out + "/sobol.csv";
        std::ofstream os = open_out(path);
        write_sobol_csv(os, loaded);
        finish(os, path);
    }
    return 0;
}

int cmd_compare(const Common& c, const std::string& file_a, const std::string& file_b) {
    const RunConfig cfg = resolve(c);
    fs::create_directories(cfg.out);
    const PcSurrogate a = load_surrogate(file_a);
    const PcSurrogate b = load_surrogate(file_b);
    const CounterRng rng(cfg.seed, streams::compare);
    std::vector<double> xa(cfg.compare_n), xb(cfg.compare_n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(cfg.compare_n); ++i) {
        xa[i] = pce_eval(a, ZVec{rng.u01(i, 0), rng.u01(i, 1), rng.u01(i, 2), rng.u01(i, 3)});
        xb[i] = pce_eval(b, ZVec{rng.u01(i, 4), rng.u01(i, 5), rng.u01(i, 6), rng.u01(i, 7)});
    }
    std::string label(to_string(a.qoi));
    if (a.qoi != b.qoi) label += "_vs_" + std::string(to_string(b.qoi));
    const CramerRow row{label,
                        cramer_test(xa, xb, cfg.cramer_confidence, cfg.cramer_B, cfg.seed),
                        cfg.seed};
    const std::string path = cfg.out + "/cramer.csv";
    std::ofstream os = open_out(path);
    write_cramer_csv(os, {row});
    finish(os, path);
    std::printf("%s: T %.6g, critical %.6g, p %.6g, %s\n", label.c_str(), row.result.statistic,
                row.result.critical_value, row.result.p_value,
                row.result.reject ? "reject" : "accept");
    return 0;
}

int cmd_pipeline(const Common& c) {
    const RunConfig cfg = resolve(c);
    const ResultsStore store = run_pipeline(cfg);
    std::cout << "pipeline complete: " << store.dir << '\n'
              << "cache hits " << store.cache_hits << ", misses " << store.cache_misses
              << ", solve failures " << store.solve_failures << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"pore-scale uncertainty quantification toolkit"};
    app.require_subcommand(1);

    Common c_sample, c_solve, c_fit, c_density, c_gsa, c_compare, c_pipeline;

    CLI::App* sample = app.add_subcommand("sample", "draw prior samples and correlations");
    add_common(sample, c_sample);

    CLI::App* solve = app.add_subcommand("solve", "run one forward closure solve");
    add_common(solve, c_solve);
    PoreParams point{};
    bool use_cache = false;
    solve->add_option("--R", point.R, "pore radius")->required();
    solve->add_option("--theta", point.theta, "contact half-angle (radians)")->required();
    solve->add_option("--d", point.d, "nanotube slab width")->required();
    solve->add_option("--l", point.l, "cell spacing")->required();
    solve->add_flag("--cache", use_cache, "cache the solve under <out>/cache");

    CLI::App* fit = app.add_subcommand("fit", "train the three QoI surrogates");
    add_common(fit, c_fit);

    CLI::App* density = app.add_subcommand("density", "QoI densities from surrogate files");
    add_common(density, c_density);
    std::vector<std::string> density_files;
    density->add_option("--surrogate", density_files, "surrogate file(s)")
        ->required()
        ->take_all();

    CLI::App* gsa = app.add_subcommand("gsa", "mutual-information sensitivity rankings");
    add_common(gsa, c_gsa);
    std::vector<std::string> gsa_files;
    gsa->add_option("--surrogate", gsa_files, "surrogate file(s)")->required()->take_all();

    CLI::App* compare = app.add_subcommand("compare", "two-sample test between surrogates");
    add_common(compare, c_compare);
    std::string file_a, file_b;
    compare->add_option("--a", file_a, "first surrogate file")->required();
    compare->add_option("--b", file_b, "second surrogate file")->required();

    CLI::App* pipeline = app.add_subcommand("pipeline", "run every stage end to end");
    add_common(pipeline, c_pipeline);

    try {
        app.parse(argc, argv);
        if (*sample) return cmd_sample(c_sample);
        if (*solve) return cmd_solve(c_solve, point, use_cache);
        if (*fit) return cmd_fit(c_fit);
        if (*density) return cmd_density(c_density, density_files);
        if (*gsa) return cmd_gsa(c_gsa, gsa_files);
        if (*compare) return cmd_compare(c_compare, file_a, file_b);
        if (*pipeline) return cmd_pipeline(c_pipeline);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
