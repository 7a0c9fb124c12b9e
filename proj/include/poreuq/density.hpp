#pragma once

#include <cstddef>
#include <vector>

#include "poreuq/errors.hpp"

namespace poreuq {

// Gaussian-kernel density estimate evaluated on a regular grid.
// 1-D: f has ax1.size() entries. 2-D: f is row-major, f[i1 * ax2.size() + i2].
struct DensityGrid {
    int dimension = 1;
    std::vector<double> ax1;
    std::vector<double> ax2;
    std::vector<double> f;
    double h1 = 0.0;
    double h2 = 0.0;
    std::size_t n = 0;

    // Trapezoid-rule integral over the grid (iterated in 2-D).
    double integral() const;
    // Linear (bilinear) interpolation; zero outside the grid span.
    double value_at(double x) const;
    double value_at(double x, double y) const;
    double max_value() const;
};

struct BandwidthResult {
    double h = 0.0;
    // False when the fixed-point equation failed to bracket a root and the
    // normal-reference rule 1.06*sigma*N^(-1/5) was used instead.
    bool isj_converged = true;
};

// Improved Sheather-Jones plug-in bandwidth (diffusion fixed point on a
// dyadic histogram grid). Requires >= 64 samples with nonzero variance.
BandwidthResult isj_bandwidth(const std::vector<double>& samples);

// Regular grid of `points` values spanning [min(samples)-3h, max(samples)+3h].
std::vector<double> padded_axis(const std::vector<double>& samples, double h, int points = 128);

// Direct kernel sums; serial reference implementations kept for testing and
// benchmarking against the accelerated paths.
DensityGrid kde_1d_reference(const std::vector<double>& samples, double h,
                             const std::vector<double>& axis);
DensityGrid kde_2d_reference(const std::vector<double>& sx, const std::vector<double>& sy,
                             double h1, double h2, const std::vector<double>& ax1,
                             const std::vector<double>& ax2);

// Production evaluators: exact parallel sums for small N, binned (gridded)
// evaluation for large N. Binned output matches the direct sum to 1e-6
// relative sup norm; results are independent of the worker count.
DensityGrid kde_1d(const std::vector<double>& samples, double h, const std::vector<double>& axis);
DensityGrid kde_2d(const std::vector<double>& sx, const std::vector<double>& sy, double h1,
                   double h2, const std::vector<double>& ax1, const std::vector<double>& ax2);

// CSV export: 1-D as "x,f" columns; 2-D as two axis header rows followed by
// the dense density matrix (rows follow ax1, columns follow ax2).
void write_density_csv(const DensityGrid& g, const std::string& path);

namespace detail {

// Unnormalized DCT-II via the even-odd FFT reordering; entry k carries
// weight 1 for k = 0 and 2*cos-phase otherwise (the convention the
// bandwidth fixed point expects). Length must be a power of two.
std::vector<double> dct2(const std::vector<double>& x);

}  // namespace detail

}  // namespace poreuq
