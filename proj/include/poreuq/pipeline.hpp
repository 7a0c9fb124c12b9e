#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "poreuq/bayesnet.hpp"
#include "poreuq/closure.hpp"
#include "poreuq/gsa.hpp"
#include "poreuq/surrogate.hpp"

namespace poreuq {

inline constexpr std::string_view kVersion = "1.0.0";

// Full experiment configuration; the file format is flat `key = value` lines
// with '#' comments. Every key is listed in the README; unknown keys are
// rejected. ranges.* keys require ranges.preset = custom.
struct RunConfig {
    PriorModel model = PriorModel::p1;
    std::string preset = "narrow";  // narrow | physical | custom
    HyperRanges ranges = narrow_ranges();
    std::size_t sample_n = 100000;   // rows of samples.csv / corr.csv input
    SolverConfig solver{64, 1e-8, 1.0, 0, BoundaryMode::mixed};
    int surrogate_order = 4;         // per-axis bound, all four axes
    double oversample = 2.0;         // training rows per basis term
    int kde_grid = 128;              // density/GSA grid points per axis
    std::size_t n_kde = 1000000;     // GSA joint-sample size
    std::size_t m_mc = 10000;        // GSA evaluation draws
    bool joint_eval = false;         // gsa.eval_mode = joint
    MarginalMode marginal = MarginalMode::auto_mode;
    bool compare_enabled = true;
    std::string compare_preset;      // empty = the opposite preset
    std::size_t compare_n = 2000;    // per-side sample count
    std::size_t cramer_B = 1000;
    double cramer_confidence = 0.95;
    std::uint64_t seed = 0;
    int jobs = 0;                    // OpenMP workers; 0 keeps the default
    std::string out = "out";
    std::string cache_dir;           // empty = <out>/cache
};

// Throws ConfigError on unknown keys, malformed values, or invalid
// combinations (custom ranges without bounds, nonpositive counts, ...).
void apply_config_line(RunConfig& cfg, std::string_view key, std::string_view value);
RunConfig parse_run_config(std::istream& is);
RunConfig load_run_config(const std::string& path);  // IoError when unreadable
void validate(const RunConfig& cfg);                 // ConfigError

// Canonical echo: every key in a fixed order, parseable by parse_run_config.
void write_run_config(std::ostream& os, const RunConfig& cfg);

// Forward-solve cache key: the canonical text holds every input rounded to
// 1e-12; the key is its 64-bit FNV-1a hash in hex. Stable across processes
// and worker schedules.
std::string cache_canonical(const PoreParams& p, int resolution, double tol, double ratio);
std::string cache_key(const PoreParams& p, int resolution, double tol, double ratio);

// Directory of one small text file per solved geometry; writes go through a
// temporary file plus an atomic rename, so concurrent writers are safe.
// Corrupt or mismatching entries count as misses and are overwritten.
class SolveCache {
public:
    explicit SolveCache(std::string dir);  // creates the directory, IoError on failure

    bool lookup(const PoreParams& p, const SolverConfig& cfg, EffectiveProps& out) const;
    void store(const PoreParams& p, const SolverConfig& cfg, const EffectiveProps& value) const;

    // Cached forward model; solves and stores on a miss.
    EffectiveProps forward(const PoreParams& p, const SolverConfig& cfg) const;

    std::size_t hits() const noexcept { return hits_.load(); }
    std::size_t misses() const noexcept { return misses_.load(); }
    const std::string& dir() const noexcept { return dir_; }

private:
    std::string dir_;
    mutable std::atomic<std::size_t> hits_{0}, misses_{0};
};

// corr.csv: param_row,param_col,rho (all 16 entries, row-major).
void write_corr_csv(std::ostream& os, const std::array<std::array<double, 4>, 4>& corr);

// sobol.csv: param,qoi,S1 with one block of four rows per surrogate.
void write_sobol_csv(std::ostream& os, const std::vector<PcSurrogate>& surrogates);

struct TrainedSurrogates {
    std::vector<PcSurrogate> surr;         // DL, DT, geff
    std::vector<std::size_t> failed_rows;  // design indices that threw
    std::size_t n_design = 0;
};

// One cached design sweep feeding all three QoI fits: a closure solve yields
// DL and DT and carries the analytic geff along. Throws SolveError once more
// than 1% of the designs fail; `label` names the sweep in that message.
TrainedSurrogates train_surrogates(const RunConfig& cfg, const HyperRanges& ranges,
                                   const SolveCache& cache, const char* label);

struct ResultsStore {
    std::string dir;
    std::size_t cache_hits = 0, cache_misses = 0;
    std::size_t solve_failures = 0;
    std::vector<std::size_t> failed_rows;  // training-design indices that failed
};

// Runs every stage: samples + correlations, cached forward solves, surrogate
// fits, QoI densities, mutual-information rankings with Sobol' indices, and
// the cross-preset Cramer comparison. Artifacts land under cfg.out:
// manifest.txt, samples.csv, corr.csv, surrogates/, densities/, mi.csv,
// trace.csv, sobol.csv, cramer.csv, run_log.txt. Outputs are byte-identical
// across reruns and worker counts for a fixed (config, seed, build). Aborts
// with SolveError when more than 1% of the training solves fail.
ResultsStore run_pipeline(const RunConfig& cfg);

}  // namespace poreuq
