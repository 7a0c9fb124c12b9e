#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <vector>

#include "poreuq/density.hpp"
#include "poreuq/rng.hpp"

using namespace poreuq;

namespace {

using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

std::vector<double> draw(std::size_t n, std::uint64_t stream, std::uint64_t slot) {
    const CounterRng rng(7, stream);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = rng.normal(i, slot);
    return x;
}

double checksum(const DensityGrid& g) {
    double s = 0;
    for (const double v : g.f) s += v;
    return s;
}

double max_diff(const DensityGrid& a, const DensityGrid& b) {
    double m = 0;
    for (std::size_t i = 0; i < a.f.size(); ++i) m = std::max(m, std::abs(a.f[i] - b.f[i]));
    return m;
}

struct Timing {
    double serial_ms = 0, parallel_ms = 0, diff = 0, sum = 0;
};

void report(const char* name, std::size_t n, const Timing& t) {
    std::printf("%-24s n=%-8zu serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   "
                "max|diff| %.3e   checksum %.10g\n",
                name, n, t.serial_ms, t.parallel_ms, t.serial_ms / t.parallel_ms, t.diff, t.sum);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kernel benchmark: serial references vs production paths"};
    std::size_t n1 = 200000, n2_exact = 8192, n2_binned = 200000;
    int grid = 128, repeat = 3, jobs = 0;
    app.add_option("--n1", n1, "1-D sample count");
    app.add_option("--n2-exact", n2_exact, "2-D sample count on the exact path");
    app.add_option("--n2-binned", n2_binned, "2-D sample count on the binned path");
    app.add_option("--grid", grid, "grid points per axis");
    app.add_option("--repeat", repeat, "timed repetitions (best is reported)");
    app.add_option("--jobs", jobs, "OpenMP worker count (0 = default)");
    CLI11_PARSE(app, argc, argv);
    if (jobs > 0) omp_set_num_threads(jobs);

    std::printf("workers: %d\n", omp_get_max_threads());

    {
        const std::vector<double> x = draw(n1, 11, 0);
        const double h = isj_bandwidth(x).h;
        const std::vector<double> ax = padded_axis(x, h, grid);
        Timing t;
        DensityGrid ref, fast;
        for (int r = 0; r < repeat; ++r) {
            auto t0 = clock_type::now();
            ref = kde_1d_reference(x, h, ax);
            const double s = ms_since(t0);
            t.serial_ms = r ? std::min(t.serial_ms, s) : s;
            t0 = clock_type::now();
            fast = kde_1d(x, h, ax);
            const double p = ms_since(t0);
            t.parallel_ms = r ? std::min(t.parallel_ms, p) : p;
        }
        t.diff = max_diff(ref, fast);
        t.sum = checksum(fast);
        report("kde_1d", n1, t);
    }

    for (const bool binned : {false, true}) {
        const std::size_t n = binned ? n2_binned : n2_exact;
        const std::vector<double> x = draw(n, 12, 0);
        const std::vector<double> y = draw(n, 13, 1);
        const double hx = isj_bandwidth(x).h;
        const double hy = isj_bandwidth(y).h;
        const std::vector<double> ax = padded_axis(x, hx, grid);
        const std::vector<double> ay = padded_axis(y, hy, grid);
        Timing t;
        DensityGrid ref, fast;
        for (int r = 0; r < repeat; ++r) {
            auto t0 = clock_type::now();
            ref = kde_2d_reference(x, y, hx, hy, ax, ay);
            const double s = ms_since(t0);
            t.serial_ms = r ? std::min(t.serial_ms, s) : s;
            t0 = clock_type::now();
            fast = kde_2d(x, y, hx, hy, ax, ay);
            const double p = ms_since(t0);
            t.parallel_ms = r ? std::min(t.parallel_ms, p) : p;
        }
        t.diff = max_diff(ref, fast);
        t.sum = checksum(fast);
        report(binned ? "kde_2d (binned path)" : "kde_2d (exact path)", n, t);
    }
    return 0;
}
