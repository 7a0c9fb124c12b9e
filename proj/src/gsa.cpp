#include "poreuq/gsa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "poreuq/density.hpp"
#include "poreuq/errors.hpp"
#include "poreuq/parallel.hpp"
#include "poreuq/rng.hpp"

namespace poreuq {

namespace {

void fmt_full(char* buf, std::size_t n, double v) { std::snprintf(buf, n, "%.17g", v); }

std::size_t clamp_index(double u, std::size_t n) {
    const auto i = static_cast<std::size_t>(u * static_cast<double>(n));
    return std::min(i, n - 1);
}

// 100 evenly spaced running-mean checkpoints (every sample when m < 100).
std::vector<std::size_t> checkpoints(std::size_t m) {
    std::vector<std::size_t> out;
    const std::size_t k = std::min<std::size_t>(m, 100);
    out.reserve(k);
    for (std::size_t c = 1; c <= k; ++c) out.push_back(c * m / k);
    out.back() = m;
    return out;
}

}  // namespace

MiEstimate mutual_information(const std::vector<double>& qoi_samples,
                              const std::vector<double>& param_samples, const MiConfig& cfg) {
    const std::size_t n = qoi_samples.size();
    if (param_samples.size() != n)
        throw std::invalid_argument("mutual_information: sample columns differ in length");
    if (cfg.m_mc < 2) throw std::invalid_argument("mutual_information: m_mc below 2");
    if (cfg.grid < 8) throw std::invalid_argument("mutual_information: grid below 8");
    if (cfg.marginal == MarginalMode::auto_mode)
        throw std::invalid_argument(
            "mutual_information: auto marginal needs the prior context of mi_index");
    if (cfg.marginal == MarginalMode::uniform && !(cfg.uniform_hi > cfg.uniform_lo))
        throw std::invalid_argument("mutual_information: empty uniform marginal interval");

    const BandwidthResult bw_g = isj_bandwidth(qoi_samples);
    const BandwidthResult bw_t = isj_bandwidth(param_samples);
    const std::vector<double> ax_g = padded_axis(qoi_samples, bw_g.h, cfg.grid);
    const std::vector<double> ax_t = padded_axis(param_samples, bw_t.h, cfg.grid);

    const DensityGrid joint = kde_2d(qoi_samples, param_samples, bw_g.h, bw_t.h, ax_g, ax_t);
    const DensityGrid marg_g = kde_1d(qoi_samples, bw_g.h, ax_g);
    DensityGrid marg_t;
    if (cfg.marginal == MarginalMode::kde) marg_t = kde_1d(param_samples, bw_t.h, ax_t);
    const double uniform_density = 1.0 / (cfg.uniform_hi - cfg.uniform_lo);

    const CounterRng rng(cfg.seed, streams::mc_eval);
    std::vector<double> x(cfg.m_mc);
    std::vector<std::uint8_t> off_grid(cfg.m_mc, 0);
    parallel_for_indexed(cfg.m_mc, [&](std::size_t j) {
        const std::size_t ig = clamp_index(rng.u01(j, 0), n);
        const std::size_t it = cfg.joint_eval ? ig : clamp_index(rng.u01(j, 1), n);
        const double gj = qoi_samples[ig];
        const double tj = param_samples[it];
        if (gj < ax_g.front() || gj > ax_g.back() || tj < ax_t.front() || tj > ax_t.back())
            off_grid[j] = 1;
        const double fj = joint.value_at(gj, tj);
        const double fg = marg_g.value_at(gj);
        double ft;
        if (cfg.marginal == MarginalMode::uniform)
            ft = (tj >= cfg.uniform_lo && tj <= cfg.uniform_hi) ? uniform_density : 0.0;
        else
            ft = marg_t.value_at(tj);
        // rho*log(rho) with every zero-or-negative density mapped to 0; the
        // binned KDE can dip epsilon-negative in far tails.
        if (fj <= 0.0 || fg <= 0.0 || ft <= 0.0) {
            x[j] = 0.0;
            return;
        }
        const double rho = fj / (fg * ft);
        x[j] = rho * std::log(rho);
    });

    MiEstimate e;
    e.m_mc = cfg.m_mc;
    e.h_qoi = bw_g.h;
    e.h_param = bw_t.h;

    // Serial reduction in index order keeps the result worker-independent.
    e.trace_m = checkpoints(cfg.m_mc);
    std::size_t next = 0, off_count = 0;
    double sum = 0, sumsq = 0, mean_at_90 = 0;
    const std::size_t at_90 = std::max<std::size_t>(1, (9 * cfg.m_mc) / 10);
    for (std::size_t j = 0; j < cfg.m_mc; ++j) {
        sum += x[j];
        sumsq += x[j] * x[j];
        off_count += off_grid[j];
        if (j + 1 == at_90) mean_at_90 = sum / static_cast<double>(at_90);
        while (next < e.trace_m.size() && e.trace_m[next] == j + 1) {
            e.trace.push_back(sum / static_cast<double>(j + 1));
            ++next;
        }
    }
    const auto m = static_cast<double>(cfg.m_mc);
    e.S_hat = sum / m;
    const double var = std::max(0.0, (sumsq - m * e.S_hat * e.S_hat) / (m - 1.0));
    e.std_error = std::sqrt(var / m);
    e.out_of_grid_fraction = static_cast<double>(off_count) / m;

    const double drift = std::abs(e.S_hat - mean_at_90);
    if (drift > 2.0 * e.std_error) {
        e.converged = false;
        std::cerr << "mutual_information: running mean drifted " << drift << " nats over the "
                  << "last decile (2 std errors = " << 2.0 * e.std_error << ")\n";
    }
    return e;
}

SampleBatch gsa_sample(PriorModel model, const HyperRanges& r, std::size_t n_kde,
                       std::uint64_t seed) {
    SampleBatch batch;
    batch.model = model;
    batch.ranges = r;
    batch.seed = seed;
    batch.z.resize(n_kde);
    batch.params.resize(n_kde);
    batch.valid.assign(n_kde, 1);
    const CounterRng rng(seed, streams::kde);
    parallel_for_indexed(n_kde, [&](std::size_t i) {
        const ZVec z{rng.u01(i, 0), rng.u01(i, 1), rng.u01(i, 2), rng.u01(i, 3)};
        batch.z[i] = z;
        batch.params[i] = rosenblatt_inverse(model, r, z);
        if (model == PriorModel::p0 && !is_valid(batch.params[i])) batch.valid[i] = 0;
    });
    return batch;
}

std::vector<double> qoi_column(const PcSurrogate& s, const SampleBatch& batch) {
    std::vector<double> out(batch.size());
    parallel_for_indexed(batch.size(), [&](std::size_t i) { out[i] = pce_eval(s, batch.z[i]); });
    return out;
}

MiEstimate mi_index(const PcSurrogate& s, const SampleBatch& batch, Param param,
                    const GsaConfig& cfg) {
    return mi_index(s, batch, qoi_column(s, batch), param, cfg);
}

MiEstimate mi_index(const PcSurrogate& s, const SampleBatch& batch,
                    const std::vector<double>& qoi_col, Param param, const GsaConfig& cfg) {
    MiConfig mc;
    mc.grid = cfg.grid;
    mc.m_mc = cfg.m_mc;
    mc.seed = cfg.seed;
    mc.joint_eval = cfg.joint_eval;
    switch (cfg.marginal) {
        case MarginalMode::kde:
            mc.marginal = MarginalMode::kde;
            break;
        case MarginalMode::uniform:
        case MarginalMode::auto_mode:
            if (cfg.marginal == MarginalMode::uniform ||
                has_uniform_marginal(batch.model, param)) {
                mc.marginal = MarginalMode::uniform;
                mc.uniform_lo = batch.ranges.lo[static_cast<int>(param)];
                mc.uniform_hi = batch.ranges.hi[static_cast<int>(param)];
            } else {
                mc.marginal = MarginalMode::kde;
            }
            break;
    }
    MiEstimate e = mutual_information(qoi_col, batch.column(param), mc);
    e.param = param_names[static_cast<int>(param)];
    e.qoi = to_string(s.qoi);
    return e;
}

MiEstimate mi_index(const PcSurrogate& s, PriorModel model, const HyperRanges& r, Param param,
                    const GsaConfig& cfg) {
    return mi_index(s, gsa_sample(model, r, cfg.n_kde, cfg.seed), param, cfg);
}

RankingRow rank_effects(const std::vector<MiEstimate>& estimates) {
    if (estimates.size() < 2)
        throw std::invalid_argument("rank_effects: need at least two estimates");
    for (const MiEstimate& e : estimates)
        if (e.qoi != estimates.front().qoi)
            throw std::invalid_argument("rank_effects: estimates mix different QoIs");

    RankingRow row;
    row.qoi = estimates.front().qoi;
    double total = 0;
    std::vector<double> floored;
    for (const MiEstimate& e : estimates) {
        floored.push_back(std::max(e.S_hat, 0.0));
        total += floored.back();
    }
    if (total <= 0) throw ZeroVarianceError("rank_effects: every index is zero");
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        row.param.push_back(estimates[i].param);
        const double share = floored[i] / total;
        const double err = 2.0 * estimates[i].std_error / total;
        row.share.push_back(share);
        row.err_low.push_back(std::min(err, share));
        row.err_high.push_back(err);
    }
    return row;
}

void write_mi_csv(std::ostream& os, const std::vector<MiEstimate>& estimates,
                  const std::vector<RankingRow>& rankings, std::size_t n_kde,
                  std::uint64_t seed) {
    char buf[64];
    os << "param,qoi,S_hat,std_error,r_hat,r_err_low,r_err_high,n_kde,m_mc,seed\n";
    for (const MiEstimate& e : estimates) {
        os << e.param << ',' << e.qoi << ',';
        fmt_full(buf, sizeof buf, e.S_hat);
        os << buf << ',';
        fmt_full(buf, sizeof buf, e.std_error);
        os << buf << ',';
        bool found = false;
        for (const RankingRow& r : rankings) {
            if (r.qoi != e.qoi) continue;
            for (std::size_t i = 0; i < r.param.size(); ++i) {
                if (r.param[i] != e.param) continue;
                fmt_full(buf, sizeof buf, r.share[i]);
                os << buf << ',';
                fmt_full(buf, sizeof buf, r.err_low[i]);
                os << buf << ',';
                fmt_full(buf, sizeof buf, r.err_high[i]);
                os << buf;
                found = true;
                break;
            }
            if (found) break;
        }
        if (!found) os << ",,";
        os << ',' << n_kde << ',' << e.m_mc << ',' << seed << '\n';
    }
}

void write_trace_csv(std::ostream& os, const std::vector<MiEstimate>& estimates) {
    char buf[64];
    os << "param,qoi,m,running_mean\n";
    for (const MiEstimate& e : estimates)
        for (std::size_t c = 0; c < e.trace.size(); ++c) {
            fmt_full(buf, sizeof buf, e.trace[c]);
            os << e.param << ',' << e.qoi << ',' << e.trace_m[c] << ',' << buf << '\n';
        }
}

}  // namespace poreuq
