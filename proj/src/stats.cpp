#include "poreuq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "poreuq/errors.hpp"
#include "poreuq/parallel.hpp"
#include "poreuq/rng.hpp"

namespace poreuq {

namespace {

void check_pair(const PointSet& x, const PointSet& y) {
    if (x.dim != y.dim)
        throw std::invalid_argument("cramer_statistic: samples differ in dimension");
    if (x.dim != 1 && x.dim != 2)
        throw std::invalid_argument("cramer_statistic: dimension must be 1 or 2");
    if (x.size() < 2 || y.size() < 2)
        throw DegenerateSampleError("cramer_statistic: need at least two points per sample");
}

double half_distance(const double* a, const double* b, std::size_t dim) {
    double z = 0;
    for (std::size_t k = 0; k < dim; ++k) {
        const double d = a[k] - b[k];
        z += d * d;
    }
    return 0.5 * std::sqrt(z);
}

double combine(std::size_t m, std::size_t n, double sxx, double syy, double sxy) {
    const double dm = static_cast<double>(m), dn = static_cast<double>(n);
    return dm * dn / (dm + dn) *
           (2.0 * sxy / (dm * dn) - sxx / (dm * dm) - syy / (dn * dn));
}

}  // namespace

PointSet as_points(const std::vector<double>& xs) { return PointSet{1, xs}; }

PointSet as_points(const std::vector<std::array<double, 2>>& xs) {
    PointSet p;
    p.dim = 2;
    p.flat.reserve(2 * xs.size());
    for (const auto& q : xs) {
        p.flat.push_back(q[0]);
        p.flat.push_back(q[1]);
    }
    return p;
}

double cramer_statistic(const PointSet& x, const PointSet& y) {
    check_pair(x, y);
    const std::size_t m = x.size(), n = y.size(), dim = x.dim;
    // The three block sums run in the same i-then-j order so that identical
    // multisets cancel to exactly zero.
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            sxx += half_distance(&x.flat[i * dim], &x.flat[j * dim], dim);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            syy += half_distance(&y.flat[i * dim], &y.flat[j * dim], dim);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            sxy += half_distance(&x.flat[i * dim], &y.flat[j * dim], dim);
    return combine(m, n, sxx, syy, sxy);
}

double cramer_statistic(const std::vector<double>& x, const std::vector<double>& y) {
    return cramer_statistic(as_points(x), as_points(y));
}

CramerResult cramer_test(const PointSet& x, const PointSet& y, double confidence, std::size_t B,
                         std::uint64_t seed) {
    check_pair(x, y);
    if (B < 200) throw std::invalid_argument("cramer_test: fewer than 200 permutations");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw std::invalid_argument("cramer_test: confidence outside (0, 1)");

    const std::size_t m = x.size(), n = y.size(), N = m + n, dim = x.dim;

    // Pooled half-distance matrix in float; doubles everywhere downstream.
    std::vector<double> pooled(x.flat);
    pooled.insert(pooled.end(), y.flat.begin(), y.flat.end());
    std::vector<float> phi(N * N);
    parallel_for_indexed(N, [&](std::size_t i) {
        for (std::size_t j = 0; j < N; ++j)
            phi[i * N + j] =
                static_cast<float>(half_distance(&pooled[i * dim], &pooled[j * dim], dim));
    });

    std::vector<double> rowsum(N, 0.0);
    double total = 0;
    for (std::size_t i = 0; i < N; ++i) {
        double acc = 0;
        for (std::size_t j = 0; j < N; ++j) acc += phi[i * N + j];
        rowsum[i] = acc;
        total += acc;
    }

    // Observed statistic from the same float entries the replicates use.
    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) sxx += phi[i * N + j];
    for (std::size_t i = m; i < N; ++i)
        for (std::size_t j = m; j < N; ++j) syy += phi[i * N + j];
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = m; j < N; ++j) sxy += phi[i * N + j];
    const double observed = combine(m, n, sxx, syy, sxy);

    // Pooled relabelings: per replicate only the within-X sum A is computed;
    // the row-sum identity B = total - 2*sum(rowsum over X) + A gives the
    // rest, and the cross sum follows from the fixed pooled total.
    const CounterRng rng(seed, streams::permute);
    std::vector<double> t(B);
    parallel_for_indexed(B, [&](std::size_t b) {
        std::vector<std::uint32_t> idx(N);
        for (std::size_t i = 0; i < N; ++i) idx[i] = static_cast<std::uint32_t>(i);
        for (std::size_t i = 0; i < m; ++i) {
            const auto pick =
                i + static_cast<std::size_t>(rng.u01(b, i) * static_cast<double>(N - i));
            std::swap(idx[i], idx[std::min(pick, N - 1)]);
        }
        std::sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(m));

        double a = 0, rows = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const float* row = &phi[static_cast<std::size_t>(idx[i]) * N];
            double acc = 0;
            for (std::size_t j = 0; j < m; ++j) acc += row[idx[j]];
            a += acc;
            rows += rowsum[idx[i]];
        }
        const double bsum = total - 2.0 * rows + a;
        const double cross = 0.5 * (total - a - bsum);
        t[b] = combine(m, n, a, bsum, cross);
    });

    std::size_t count_ge = 0;
    for (double v : t)
        if (v >= observed) ++count_ge;

    CramerResult r;
    r.statistic = observed;
    r.confidence = confidence;
    r.B = B;
    const double alpha = 1.0 - confidence;
    const auto Np = static_cast<double>(B + 1);
    r.p_value = static_cast<double>(1 + count_ge) / Np;
    r.reject = r.p_value < alpha;

    // Largest K with (1+K)/(B+1) < alpha; the (K+1)-th largest replicate is
    // then the exact decision threshold: statistic > critical_value holds iff
    // p_value < alpha, ties included. K < 0 means no statistic can reject.
    auto k = static_cast<long long>(std::floor(alpha * Np)) + 1;
    while (k >= 0 && static_cast<double>(1 + k) >= alpha * Np) --k;
    if (k < 0) {
        r.critical_value = std::numeric_limits<double>::infinity();
    } else {
        std::vector<double> sorted(t);
        std::sort(sorted.begin(), sorted.end());
        r.critical_value = sorted[static_cast<std::size_t>(B - 1 - static_cast<std::size_t>(k))];
    }
    return r;
}

CramerResult cramer_test(const std::vector<double>& x, const std::vector<double>& y,
                         double confidence, std::size_t B, std::uint64_t seed) {
    return cramer_test(as_points(x), as_points(y), confidence, B, seed);
}

void write_cramer_csv(std::ostream& os, const std::vector<CramerRow>& rows) {
    char buf[64];
    os << "variable,statistic,critical_value,confidence,p_value,decision,B,seed\n";
    for (const CramerRow& row : rows) {
        os << row.variable << ',';
        std::snprintf(buf, sizeof buf, "%.17g", row.result.statistic);
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", row.result.critical_value);
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", row.result.confidence);
        os << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", row.result.p_value);
        os << buf << ',' << (row.result.reject ? "reject" : "accept") << ',' << row.result.B
           << ',' << row.seed << '\n';
    }
}

}  // namespace poreuq
