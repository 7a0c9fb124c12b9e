#include "poreuq/bayesnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <string>

#include "poreuq/parallel.hpp"
#include "poreuq/rng.hpp"

namespace poreuq {

std::string_view to_string(PriorModel m) {
    switch (m) {
        case PriorModel::p0: return "p0";
        case PriorModel::p1: return "p1";
        case PriorModel::p2: return "p2";
    }
    return "?";
}

PriorModel prior_model_from_string(std::string_view s) {
    if (s == "p0") return PriorModel::p0;
    if (s == "p1") return PriorModel::p1;
    if (s == "p2") return PriorModel::p2;
    throw ConfigError("prior_model_from_string: unknown model '" + std::string(s) + "'");
}

double get(const PoreParams& p, Param t) noexcept {
    switch (t) {
        case Param::R: return p.R;
        case Param::theta: return p.theta;
        case Param::d: return p.d;
        case Param::l: return p.l;
    }
    return 0.0;
}

HyperRanges narrow_ranges() {
    return {{10.0, 0.07, 4.0, 8.0}, {60.0, 0.7, 8.0, 18.0}};
}

HyperRanges physical_ranges() {
    return {{10.0, 0.05 * std::numbers::pi, 5.0, 1.0},
            {60.0, 0.4 * std::numbers::pi, 60.0, 60.0}};
}

namespace {

struct Interval {
    double lo, hi;
};

Interval d_support_p1(const HyperRanges& r, double R, double theta) {
    return {r.lo[2], std::min(2.0 * R * std::cos(theta), r.hi[2])};
}

Interval l_support_p1(const HyperRanges& r, double R, double d) {
    return {std::max(r.lo[3], 2.0 * R - std::sqrt(4.0 * R * R - d * d)), r.hi[3]};
}

Interval d_support_p2(const HyperRanges& r, double R, double theta, double l) {
    double hi = std::min(2.0 * R * std::cos(theta), r.hi[2]);
    // Gap constraint rearranged: d < sqrt(4lR - l^2). Squaring is valid only
    // for l < 2R; longer tubes clear the gap for every admissible d.
    if (l < 2.0 * R) hi = std::min(hi, std::sqrt(4.0 * l * R - l * l));
    return {r.lo[2], hi};
}

[[noreturn]] void throw_empty(const char* which, double R, double theta, double extra) {
    throw EmptySupportError(std::string("rosenblatt_inverse: empty ") + which +
                            "-interval at R=" + std::to_string(R) +
                            ", theta=" + std::to_string(theta) + ", cond=" + std::to_string(extra));
}

double to_unit(double x, Interval s, const char* what) {
    const double z = (x - s.lo) / (s.hi - s.lo);
    if (!(z > -1e-9) || !(z < 1.0 + 1e-9))
        throw OutOfSupportError(std::string("rosenblatt_forward: ") + what +
                                "=" + std::to_string(x) + " outside [" + std::to_string(s.lo) +
                                ", " + std::to_string(s.hi) + "]");
    return std::clamp(z, 0.0, 1.0);
}

}  // namespace

PoreParams rosenblatt_inverse(PriorModel model, const HyperRanges& r, const ZVec& z) {
    const double R = r.lo[0] + z[0] * (r.hi[0] - r.lo[0]);
    const double theta = r.lo[1] + z[1] * (r.hi[1] - r.lo[1]);
    double d = 0.0, l = 0.0;
    switch (model) {
        case PriorModel::p0:
            d = r.lo[2] + z[2] * (r.hi[2] - r.lo[2]);
            l = r.lo[3] + z[3] * (r.hi[3] - r.lo[3]);
            break;
        case PriorModel::p1: {
            const Interval ds = d_support_p1(r, R, theta);
            if (!(ds.hi > ds.lo)) throw_empty("d", R, theta, ds.hi);
            d = ds.lo + z[2] * (ds.hi - ds.lo);
            const Interval ls = l_support_p1(r, R, d);
            if (!(ls.hi > ls.lo)) throw_empty("l", R, theta, ls.lo);
            l = ls.lo + z[3] * (ls.hi - ls.lo);
            break;
        }
        case PriorModel::p2: {
            l = r.lo[3] + z[2] * (r.hi[3] - r.lo[3]);
            const Interval ds = d_support_p2(r, R, theta, l);
            if (!(ds.hi > ds.lo)) throw_empty("d", R, theta, ds.hi);
            d = ds.lo + z[3] * (ds.hi - ds.lo);
            break;
        }
    }
    return {R, theta, d, l};
}

ZVec rosenblatt_forward(PriorModel model, const HyperRanges& r, const PoreParams& p) {
    ZVec z{};
    z[0] = to_unit(p.R, {r.lo[0], r.hi[0]}, "R");
    z[1] = to_unit(p.theta, {r.lo[1], r.hi[1]}, "theta");
    switch (model) {
        case PriorModel::p0:
            z[2] = to_unit(p.d, {r.lo[2], r.hi[2]}, "d");
            z[3] = to_unit(p.l, {r.lo[3], r.hi[3]}, "l");
            break;
        case PriorModel::p1:
            z[2] = to_unit(p.d, d_support_p1(r, p.R, p.theta), "d");
            z[3] = to_unit(p.l, l_support_p1(r, p.R, p.d), "l");
            break;
        case PriorModel::p2:
            z[2] = to_unit(p.l, {r.lo[3], r.hi[3]}, "l");
            z[3] = to_unit(p.d, d_support_p2(r, p.R, p.theta, p.l), "d");
            break;
    }
    return z;
}

bool has_uniform_marginal(PriorModel model, Param t) noexcept {
    switch (model) {
        case PriorModel::p0: return true;
        case PriorModel::p1: return t == Param::R || t == Param::theta;
        case PriorModel::p2: return t != Param::d;
    }
    return false;
}

double uniform_marginal_density(PriorModel model, const HyperRanges& r, Param t, double x) {
    if (!has_uniform_marginal(model, t))
        throw std::invalid_argument("uniform_marginal_density: " +
                                    std::string(param_names[static_cast<int>(t)]) +
                                    " is conditioned under " + std::string(to_string(model)));
    const int k = static_cast<int>(t);
    if (x < r.lo[k] || x > r.hi[k]) return 0.0;
    return 1.0 / (r.hi[k] - r.lo[k]);
}

std::vector<double> SampleBatch::column(Param t) const {
    std::vector<double> out(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) out[i] = get(params[i], t);
    return out;
}

SampleBatch sample_parameters(PriorModel model, const HyperRanges& r, std::size_t n,
                              std::uint64_t seed) {
    SampleBatch b;
    b.model = model;
    b.ranges = r;
    b.seed = seed;
    b.z.resize(n);
    b.params.resize(n);
    b.valid.assign(n, 0);
    const CounterRng rng(seed, streams::sample);

    parallel_for_indexed(n, [&](std::size_t i) {
        const ZVec z{rng.u01(i, 0), rng.u01(i, 1), rng.u01(i, 2), rng.u01(i, 3)};
        b.z[i] = z;
        b.params[i] = rosenblatt_inverse(model, r, z);
        b.valid[i] = is_valid(b.params[i]) ? 1 : 0;
    });

    std::size_t bad = 0;
    for (auto v : b.valid) bad += v == 0;
    if (bad > 0)
        std::fprintf(stderr, "warning: sample_parameters: %zu of %zu %s draws violate feasibility\n",
                     bad, n, std::string(to_string(model)).c_str());
    return b;
}

std::array<std::array<double, 4>, 4> empirical_correlation(const SampleBatch& batch) {
    const std::size_t n = batch.size();
    if (n < 2) throw DegenerateSampleError("empirical_correlation: need at least two rows");
    std::array<double, 4> mean{};
    for (const auto& p : batch.params)
        for (int k = 0; k < 4; ++k) mean[k] += get(p, static_cast<Param>(k));
    for (int k = 0; k < 4; ++k) mean[k] /= static_cast<double>(n);

    std::array<std::array<double, 4>, 4> cov{};
    for (const auto& p : batch.params) {
        std::array<double, 4> c{};
        for (int k = 0; k < 4; ++k) c[k] = get(p, static_cast<Param>(k)) - mean[k];
        for (int a = 0; a < 4; ++a)
            for (int bdx = a; bdx < 4; ++bdx) cov[a][bdx] += c[a] * c[bdx];
    }
    for (int a = 0; a < 4; ++a)
        if (!(cov[a][a] > 0.0))
            throw DegenerateSampleError("empirical_correlation: zero variance in column " +
                                        std::string(param_names[a]));
    std::array<std::array<double, 4>, 4> rho{};
    for (int a = 0; a < 4; ++a)
        for (int bdx = 0; bdx < 4; ++bdx) {
            const double c = (bdx >= a) ? cov[a][bdx] : cov[bdx][a];
            rho[a][bdx] = c / std::sqrt(cov[a][a] * cov[bdx][bdx]);
        }
    return rho;
}

void write_samples_csv(std::ostream& os, const SampleBatch& batch) {
    os << "index,z1,z2,z3,z4,R,theta,d,l,valid\n";
    char buf[360];
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& z = batch.z[i];
        const auto& p = batch.params[i];
        std::snprintf(buf, sizeof(buf),
                      "%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", i, z[0], z[1],
                      z[2], z[3], p.R, p.theta, p.d, p.l, batch.valid[i] ? 1 : 0);
        os << buf;
    }
}

SampleBatch read_samples_csv(std::istream& is) {
    SampleBatch b;
    std::string line;
    if (!std::getline(is, line) || line != "index,z1,z2,z3,z4,R,theta,d,l,valid")
        throw IoError("read_samples_csv: bad header");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::size_t idx = 0;
        ZVec z{};
        PoreParams p{};
        int valid = 0;
        if (std::sscanf(line.c_str(), "%zu,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%lg,%d", &idx, &z[0], &z[1],
                        &z[2], &z[3], &p.R, &p.theta, &p.d, &p.l, &valid) != 10)
            throw IoError("read_samples_csv: malformed row '" + line + "'");
        b.z.push_back(z);
        b.params.push_back(p);
        b.valid.push_back(valid ? 1 : 0);
    }
    return b;
}

}  // namespace poreuq
