#include "poreuq/density.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>

#include "poreuq/parallel.hpp"

namespace poreuq {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Above this many samples the kernel sum switches to binned evaluation.
constexpr std::size_t kNaiveLimit1d = 1u << 16;
constexpr std::size_t kNaiveLimit2d = 1u << 14;
// Fine-grid sizes for the binned paths.
constexpr int kFine1d = 1 << 16;
constexpr int kFine2d = 1 << 11;

void check_nonempty(std::size_t n, const char* where) {
    if (n == 0) throw DegenerateSampleError(std::string(where) + ": empty sample set");
}

struct MinMax {
    double lo, hi;
};

MinMax minmax_of(const std::vector<double>& v) {
    const auto [a, b] = std::minmax_element(v.begin(), v.end());
    return {*a, *b};
}

// In-place iterative radix-2 complex FFT (decimation in time).
void fft_pow2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * kPi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

// Fixed-point functional for the diffusion bandwidth: returns t - xi*gamma^[l](t),
// whose root is the squared bandwidth in grid-scaled units.
double isj_fixed_point(double t, double n, const std::vector<double>& i2,
                       const std::vector<double>& a2) {
    const int l = 7;
    const std::size_t m = i2.size();
    double f = 0.0;
    for (std::size_t k = 0; k < m; ++k)
        f += std::pow(i2[k], l) * a2[k] * std::exp(-i2[k] * kPi * kPi * t);
    f *= 2.0 * std::pow(kPi, 2 * l);
    for (int s = l - 1; s >= 2; --s) {
        double k0 = 1.0;
        for (int q = 1; q <= 2 * s - 1; q += 2) k0 *= q;
        k0 /= std::sqrt(2.0 * kPi);
        const double cst = (1.0 + std::pow(0.5, s + 0.5)) / 3.0;
        const double time = std::pow(2.0 * cst * k0 / (n * f), 2.0 / (3.0 + 2.0 * s));
        double fs = 0.0;
        for (std::size_t k = 0; k < m; ++k)
            fs += std::pow(i2[k], s) * a2[k] * std::exp(-i2[k] * kPi * kPi * time);
        f = 2.0 * std::pow(kPi, 2 * s) * fs;
    }
    return t - std::pow(2.0 * n * std::sqrt(kPi) * f, -0.4);
}

double gauss(double u) { return std::exp(-0.5 * u * u); }

// Scatter one sample onto the four nearest fine-grid nodes with cubic
// Lagrange weights (exact for cubics, conserves moments up to order 3).
template <typename Acc>
void bin_cubic(double pos, int fine, Acc&& deposit) {
    int base = static_cast<int>(std::floor(pos)) - 1;
    base = std::clamp(base, 0, fine - 4);
    const double s = pos - base;
    double w[4];
    for (int m = 0; m < 4; ++m) {
        double v = 1.0;
        for (int q = 0; q < 4; ++q)
            if (q != m) v *= (s - q) / (m - q);
        w[m] = v;
    }
    deposit(base, w);
}

std::vector<double> kernel_matrix(const std::vector<double>& axis, const std::vector<double>& t,
                                  double h) {
    // column-major [node * axis.size() + grid]: Eigen map friendly
    std::vector<double> k(axis.size() * t.size());
    parallel_for_indexed(t.size(), [&](std::size_t j) {
        for (std::size_t g = 0; g < axis.size(); ++g)
            k[j * axis.size() + g] = gauss((axis[g] - t[j]) / h);
    });
    return k;
}

std::vector<double> fine_nodes(double lo, double hi, int fine) {
    std::vector<double> t(fine);
    const double dx = (hi - lo) / static_cast<double>(fine - 1);
    for (int i = 0; i < fine; ++i) t[i] = lo + dx * static_cast<double>(i);
    return t;
}

}  // namespace

namespace detail {

std::vector<double> dct2(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("dct2: length must be a power of two");
    // Even-odd reorder: even indices ascending, then odd indices descending.
    std::vector<std::complex<double>> v(n);
    std::size_t half = (n + 1) / 2;
    for (std::size_t k = 0; k < half; ++k) v[k] = x[2 * k];
    for (std::size_t k = half; k < n; ++k) v[k] = x[2 * (n - 1 - k) + 1];
    fft_pow2(v);
    std::vector<double> out(n);
    out[0] = v[0].real();
    for (std::size_t k = 1; k < n; ++k) {
        const double ang = -kPi * static_cast<double>(k) / (2.0 * static_cast<double>(n));
        out[k] = 2.0 * (std::complex<double>(std::cos(ang), std::sin(ang)) * v[k]).real();
    }
    return out;
}

}  // namespace detail

BandwidthResult isj_bandwidth(const std::vector<double>& samples) {
    const std::size_t n = samples.size();
    if (n < 64) throw DegenerateSampleError("isj_bandwidth: need at least 64 samples");
    const auto [lo0, hi0] = minmax_of(samples);
    if (hi0 == lo0) throw DegenerateSampleError("isj_bandwidth: zero-variance samples");

    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : samples) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n - 1);
    const double sigma = std::sqrt(var);
    const double silverman = 1.06 * sigma * std::pow(static_cast<double>(n), -0.2);

    // Histogram on a dyadic grid over the half-range-widened support.
    constexpr int grid = 1 << 12;
    const double range = hi0 - lo0;
    const double lo = lo0 - 0.5 * range, hi = hi0 + 0.5 * range;
    const double width = hi - lo;
    std::vector<double> hist(grid, 0.0);
    for (double v : samples) {
        int b = static_cast<int>((v - lo) / width * grid);
        b = std::clamp(b, 0, grid - 1);
        hist[b] += 1.0;
    }
    for (double& v : hist) v /= static_cast<double>(n);

    const auto a = detail::dct2(hist);
    std::vector<double> i2(grid - 1), a2(grid - 1);
    for (int k = 1; k < grid; ++k) {
        i2[k - 1] = static_cast<double>(k) * static_cast<double>(k);
        a2[k - 1] = (a[k] / 2.0) * (a[k] / 2.0);
    }

    const double nn = static_cast<double>(n);
    double tlo = 0.0;
    double flo = isj_fixed_point(tlo, nn, i2, a2);
    double thi = 0.0, fhi = 0.0;
    bool bracketed = false;
    for (double cap : {0.1, 0.2, 0.5, 1.0}) {
        thi = cap;
        fhi = isj_fixed_point(thi, nn, i2, a2);
        if ((flo <= 0.0 && fhi >= 0.0) || (flo >= 0.0 && fhi <= 0.0)) {
            bracketed = true;
            break;
        }
    }
    if (!bracketed || !std::isfinite(flo) || !std::isfinite(fhi))
        return {silverman, false};

    for (int it = 0; it < 200 && thi - tlo > 1e-16 * std::max(1.0, thi); ++it) {
        const double tm = 0.5 * (tlo + thi);
        const double fm = isj_fixed_point(tm, nn, i2, a2);
        if ((fm <= 0.0) == (flo <= 0.0)) {
            tlo = tm;
            flo = fm;
        } else {
            thi = tm;
        }
    }
    const double tstar = 0.5 * (tlo + thi);
    if (!(tstar > 0.0) || !std::isfinite(tstar)) return {silverman, false};
    return {std::sqrt(tstar) * width, true};
}

std::vector<double> padded_axis(const std::vector<double>& samples, double h, int points) {
    check_nonempty(samples.size(), "padded_axis");
    if (points < 2) throw std::invalid_argument("padded_axis: need at least 2 grid points");
    const auto [lo, hi] = minmax_of(samples);
    return fine_nodes(lo - 3.0 * h, hi + 3.0 * h, points);
}

DensityGrid kde_1d_reference(const std::vector<double>& samples, double h,
                             const std::vector<double>& axis) {
    check_nonempty(samples.size(), "kde_1d_reference");
    if (!(h > 0.0)) throw std::invalid_argument("kde_1d_reference: bandwidth must be positive");
    DensityGrid g;
    g.dimension = 1;
    g.ax1 = axis;
    g.h1 = h;
    g.n = samples.size();
    g.f.assign(axis.size(), 0.0);
    const double norm = 1.0 / (static_cast<double>(samples.size()) * std::sqrt(2.0 * kPi) * h);
    for (std::size_t j = 0; j < axis.size(); ++j) {
        double s = 0.0;
        for (const double v : samples) s += gauss((axis[j] - v) / h);
        g.f[j] = norm * s;
    }
    return g;
}

DensityGrid kde_1d(const std::vector<double>& samples, double h, const std::vector<double>& axis) {
    check_nonempty(samples.size(), "kde_1d");
    if (!(h > 0.0)) throw std::invalid_argument("kde_1d: bandwidth must be positive");
    DensityGrid g;
    g.dimension = 1;
    g.ax1 = axis;
    g.h1 = h;
    g.n = samples.size();
    g.f.assign(axis.size(), 0.0);
    const double norm = 1.0 / (static_cast<double>(samples.size()) * std::sqrt(2.0 * kPi) * h);

    const auto [lo, hi] = minmax_of(samples);
    if (samples.size() <= kNaiveLimit1d || hi == lo) {
        if (hi == lo) {
            // All samples coincide: a single kernel evaluated per grid point.
            parallel_for_indexed(axis.size(), [&](std::size_t j) {
                g.f[j] = norm * static_cast<double>(samples.size()) * gauss((axis[j] - lo) / h);
            });
            return g;
        }
        parallel_for_indexed(axis.size(), [&](std::size_t j) {
            double s = 0.0;
            for (const double v : samples) s += gauss((axis[j] - v) / h);
            g.f[j] = norm * s;
        });
        return g;
    }

    // Binned path: cubic deposition onto a fine grid, then an exact Gaussian
    // contraction from fine nodes to the output axis.
    const double dx = (hi - lo) / static_cast<double>(kFine1d - 1);
    std::vector<double> w(kFine1d, 0.0);
    for (const double v : samples)
        bin_cubic((v - lo) / dx, kFine1d, [&](int base, const double* wt) {
            for (int m = 0; m < 4; ++m) w[base + m] += wt[m];
        });
    const auto t = fine_nodes(lo, hi, kFine1d);
    parallel_for_indexed(axis.size(), [&](std::size_t j) {
        double s = 0.0;
        for (int i = 0; i < kFine1d; ++i) s += w[i] * gauss((axis[j] - t[i]) / h);
        g.f[j] = norm * s;
    });
    return g;
}

DensityGrid kde_2d_reference(const std::vector<double>& sx, const std::vector<double>& sy,
                             double h1, double h2, const std::vector<double>& ax1,
                             const std::vector<double>& ax2) {
    if (sx.size() != sy.size())
        throw std::invalid_argument("kde_2d_reference: sample vectors differ in length");
    check_nonempty(sx.size(), "kde_2d_reference");
    if (!(h1 > 0.0) || !(h2 > 0.0))
        throw std::invalid_argument("kde_2d_reference: bandwidths must be positive");
    DensityGrid g;
    g.dimension = 2;
    g.ax1 = ax1;
    g.ax2 = ax2;
    g.h1 = h1;
    g.h2 = h2;
    g.n = sx.size();
    g.f.assign(ax1.size() * ax2.size(), 0.0);
    const double norm = 1.0 / (static_cast<double>(sx.size()) * 2.0 * kPi * h1 * h2);
    for (std::size_t j1 = 0; j1 < ax1.size(); ++j1)
        for (std::size_t j2 = 0; j2 < ax2.size(); ++j2) {
            double s = 0.0;
            for (std::size_t k = 0; k < sx.size(); ++k)
                s += gauss((ax1[j1] - sx[k]) / h1) * gauss((ax2[j2] - sy[k]) / h2);
            g.f[j1 * ax2.size() + j2] = norm * s;
        }
    return g;
}

DensityGrid kde_2d(const std::vector<double>& sx, const std::vector<double>& sy, double h1,
                   double h2, const std::vector<double>& ax1, const std::vector<double>& ax2) {
    if (sx.size() != sy.size())
        throw std::invalid_argument("kde_2d: sample vectors differ in length");
    check_nonempty(sx.size(), "kde_2d");
    if (!(h1 > 0.0) || !(h2 > 0.0))
        throw std::invalid_argument("kde_2d: bandwidths must be positive");
    DensityGrid g;
    g.dimension = 2;
    g.ax1 = ax1;
    g.ax2 = ax2;
    g.h1 = h1;
    g.h2 = h2;
    g.n = sx.size();
    const std::size_t g1 = ax1.size(), g2 = ax2.size();
    g.f.assign(g1 * g2, 0.0);
    // The probability-normalized product kernel: 1/(N*2*pi*h1*h2). A literal
    // sqrt(2*pi*h1*h2) prefactor would not integrate to one.
    const double norm = 1.0 / (static_cast<double>(sx.size()) * 2.0 * kPi * h1 * h2);

    Eigen::setNbThreads(1);  // keep kernel contractions worker-count independent

    const auto [xlo, xhi] = minmax_of(sx);
    const auto [ylo, yhi] = minmax_of(sy);
    if (sx.size() <= kNaiveLimit2d || xhi == xlo || yhi == ylo) {
        // Exact sum, factorized through per-axis kernel matrices.
        const auto kx = kernel_matrix(ax1, sx, h1);
        const auto ky = kernel_matrix(ax2, sy, h2);
        using MapM = Eigen::Map<const Eigen::MatrixXd>;
        const MapM Kx(kx.data(), static_cast<Eigen::Index>(g1),
                      static_cast<Eigen::Index>(sx.size()));
        const MapM Ky(ky.data(), static_cast<Eigen::Index>(g2),
                      static_cast<Eigen::Index>(sy.size()));
        const Eigen::MatrixXd F = Kx * Ky.transpose();
        for (std::size_t j1 = 0; j1 < g1; ++j1)
            for (std::size_t j2 = 0; j2 < g2; ++j2)
                g.f[j1 * g2 + j2] =
                    norm * F(static_cast<Eigen::Index>(j1), static_cast<Eigen::Index>(j2));
        return g;
    }

    // Binned path: tensor-product cubic deposition onto a fine 2-D grid,
    // then two exact Gaussian contractions (fine -> axis) as matrix products.
    const double dx = (xhi - xlo) / static_cast<double>(kFine2d - 1);
    const double dy = (yhi - ylo) / static_cast<double>(kFine2d - 1);
    std::vector<double> w(static_cast<std::size_t>(kFine2d) * kFine2d, 0.0);
    for (std::size_t k = 0; k < sx.size(); ++k)
        bin_cubic((sx[k] - xlo) / dx, kFine2d, [&](int bx, const double* wx) {
            bin_cubic((sy[k] - ylo) / dy, kFine2d, [&](int by, const double* wy) {
                for (int mx = 0; mx < 4; ++mx)
                    for (int my = 0; my < 4; ++my)
                        w[static_cast<std::size_t>(bx + mx) * kFine2d + (by + my)] +=
                            wx[mx] * wy[my];
            });
        });
    const auto tx = fine_nodes(xlo, xhi, kFine2d);
    const auto ty = fine_nodes(ylo, yhi, kFine2d);
    const auto kx = kernel_matrix(ax1, tx, h1);
    const auto ky = kernel_matrix(ax2, ty, h2);
    using MapM = Eigen::Map<const Eigen::MatrixXd>;
    const MapM Kx(kx.data(), static_cast<Eigen::Index>(g1), kFine2d);
    const MapM Ky(ky.data(), static_cast<Eigen::Index>(g2), kFine2d);
    const MapM W(w.data(), kFine2d, kFine2d);  // column-major view of w[bx*F+by]
    // w is row-major in (bx, by); the column-major map reads it transposed, so
    // W(i,j) = w[j*F+i] = weight(bx=j, by=i). Contract accordingly.
    const Eigen::MatrixXd tmp = W * Kx.transpose();         // (by, g1)
    const Eigen::MatrixXd F = Ky * tmp;                     // (g2, g1)
    for (std::size_t j1 = 0; j1 < g1; ++j1)
        for (std::size_t j2 = 0; j2 < g2; ++j2)
            g.f[j1 * g2 + j2] =
                norm * F(static_cast<Eigen::Index>(j2), static_cast<Eigen::Index>(j1));
    return g;
}

double DensityGrid::integral() const {
    if (dimension == 1) {
        double s = 0.0;
        for (std::size_t j = 0; j + 1 < ax1.size(); ++j)
            s += 0.5 * (f[j] + f[j + 1]) * (ax1[j + 1] - ax1[j]);
        return s;
    }
    const std::size_t g2 = ax2.size();
    std::vector<double> row(ax1.size(), 0.0);
    for (std::size_t j1 = 0; j1 < ax1.size(); ++j1)
        for (std::size_t j2 = 0; j2 + 1 < g2; ++j2)
            row[j1] += 0.5 * (f[j1 * g2 + j2] + f[j1 * g2 + j2 + 1]) * (ax2[j2 + 1] - ax2[j2]);
    double s = 0.0;
    for (std::size_t j1 = 0; j1 + 1 < ax1.size(); ++j1)
        s += 0.5 * (row[j1] + row[j1 + 1]) * (ax1[j1 + 1] - ax1[j1]);
    return s;
}

namespace {

// locate x in a sorted axis: returns false outside the span, else the cell
// index and the fractional offset within it.
bool locate(const std::vector<double>& ax, double x, std::size_t& cell, double& frac) {
    if (ax.size() < 2 || x < ax.front() || x > ax.back()) return false;
    const auto it = std::upper_bound(ax.begin(), ax.end(), x);
    std::size_t hi = static_cast<std::size_t>(it - ax.begin());
    if (hi == ax.size()) --hi;
    if (hi == 0) hi = 1;
    cell = hi - 1;
    frac = (x - ax[cell]) / (ax[cell + 1] - ax[cell]);
    return true;
}

}  // namespace

double DensityGrid::value_at(double x) const {
    std::size_t c;
    double u;
    if (dimension != 1 || !locate(ax1, x, c, u)) return 0.0;
    return (1.0 - u) * f[c] + u * f[c + 1];
}

double DensityGrid::value_at(double x, double y) const {
    std::size_t cx, cy;
    double u, v;
    if (dimension != 2 || !locate(ax1, x, cx, u) || !locate(ax2, y, cy, v)) return 0.0;
    const std::size_t g2 = ax2.size();
    const double f00 = f[cx * g2 + cy], f01 = f[cx * g2 + cy + 1];
    const double f10 = f[(cx + 1) * g2 + cy], f11 = f[(cx + 1) * g2 + cy + 1];
    return (1.0 - u) * ((1.0 - v) * f00 + v * f01) + u * ((1.0 - v) * f10 + v * f11);
}

double DensityGrid::max_value() const {
    return f.empty() ? 0.0 : *std::max_element(f.begin(), f.end());
}

void write_density_csv(const DensityGrid& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("write_density_csv: cannot open " + path);
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        out << buf;
    };
    if (g.dimension == 1) {
        out << "x,f\n";
        for (std::size_t j = 0; j < g.ax1.size(); ++j) {
            put(g.ax1[j]);
            out << ',';
            put(g.f[j]);
            out << '\n';
        }
    } else {
        for (std::size_t j = 0; j < g.ax1.size(); ++j) {
            if (j) out << ',';
            put(g.ax1[j]);
        }
        out << '\n';
        for (std::size_t j = 0; j < g.ax2.size(); ++j) {
            if (j) out << ',';
            put(g.ax2[j]);
        }
        out << '\n';
        const std::size_t g2 = g.ax2.size();
        for (std::size_t j1 = 0; j1 < g.ax1.size(); ++j1) {
            for (std::size_t j2 = 0; j2 < g2; ++j2) {
                if (j2) out << ',';
                put(g.f[j1 * g2 + j2]);
            }
            out << '\n';
        }
    }
    if (!out.good()) throw IoError("write_density_csv: write failed for " + path);
}

}  // namespace poreuq
