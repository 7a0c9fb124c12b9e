#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "poreuq/geometry.hpp"
#include "poreuq/rng.hpp"
#include "test_util.hpp"

using namespace poreuq;
using std::numbers::pi;

namespace {

// Independent oracle machinery: the pore region as a union of primitive
// shapes (periodic copies included), with point-to-primitive distances.
// None of the closed-form area/arc expressions from the library appear here.

double dist_disk(double x, double y, double cx, double cy, double R) {
    return std::max(0.0, std::hypot(x - cx, y - cy) - R);
}

double dist_box(double x, double y, double x0, double x1, double y0, double y1) {
    const double dx = std::max({x0 - x, 0.0, x - x1});
    const double dy = std::max({y0 - y, 0.0, y - y1});
    return std::hypot(dx, dy);
}

double dist_pore(const PoreParams& p, double x, double y) {
    const double m = std::sqrt(p.R * p.R - 0.25 * p.d * p.d);
    const double b = 2.0 * m + p.l;
    const double a = p.R * std::cos(p.theta);
    double dmin = std::numeric_limits<double>::infinity();
    for (int sx = -1; sx <= 1; ++sx) {
        const double ox = 2.0 * a * sx;
        for (int sy = -1; sy <= 1; ++sy) {
            const double oy = b * sy;
            dmin = std::min(dmin, dist_disk(x, y, ox, oy, p.R));
            dmin = std::min(dmin, dist_disk(x, y, ox, oy + b, p.R));
            dmin = std::min(dmin, dist_box(x, y, ox - 0.5 * p.d, ox + 0.5 * p.d, oy + m, oy + b - m));
        }
    }
    return dmin;
}

// Minkowski-shell estimate of |Gamma|/|Y_f| on a res x res cell-centre grid:
// area growth of the delta-dilated region divided by delta, with delta tied
// to the cell size so the bias is first order.
struct RasterEstimate {
    double porosity;
    double geff;
};

RasterEstimate raster_estimate(const PoreParams& p, int res) {
    const double m = std::sqrt(p.R * p.R - 0.25 * p.d * p.d);
    const double b = 2.0 * m + p.l;
    const double a = p.R * std::cos(p.theta);
    const double hx = 2.0 * a / res, hy = b / res;
    const double delta = 8.0 * std::max(hx, hy);
    std::size_t nf = 0, nd = 0;
    for (int j = 0; j < res; ++j) {
        const double y = (j + 0.5) * hy;
        for (int i = 0; i < res; ++i) {
            const double x = -a + (i + 0.5) * hx;
            const double dist = dist_pore(p, x, y);
            if (dist <= 0.0) ++nf;
            if (dist <= delta) ++nd;
        }
    }
    const double area = static_cast<double>(nf) * hx * hy;
    const double interface = static_cast<double>(nd - nf) * hx * hy / delta;
    return {area / (2.0 * a * b), interface / area};
}

// Quadrature oracle for |Gamma|: walk the boundary polylines of every
// primitive and keep the segments that lie inside the cell and are not
// strictly interior to the union.
double interface_quadrature(const PoreParams& p, int nseg) {
    const double m = std::sqrt(p.R * p.R - 0.25 * p.d * p.d);
    const double b = 2.0 * m + p.l;
    const double a = p.R * std::cos(p.theta);
    const double eps = 1e-9 * p.R;

    const auto strictly_inside = [&](double x, double y) {
        if (std::hypot(x, y) < p.R - eps) return true;
        if (std::hypot(x, y - b) < p.R - eps) return true;
        return std::abs(x) < 0.5 * p.d - eps && y > m + eps && y < b - m - eps;
    };
    const auto in_cell = [&](double x, double y) {
        return std::abs(x) < a && y > 0.0 && y < b;
    };
    const auto keep = [&](double x, double y) { return in_cell(x, y) && !strictly_inside(x, y); };

    double total = 0.0;
    // the two mesopore circles
    for (double ycen : {0.0, b}) {
        const double seg = 2.0 * p.R * std::sin(pi / nseg);
        for (int k = 0; k < nseg; ++k) {
            const double phi = 2.0 * pi * (k + 0.5) / nseg;
            if (keep(p.R * std::cos(phi), ycen + p.R * std::sin(phi))) total += seg;
        }
    }
    // the nanotube rectangle perimeter
    const double sides[4][4] = {
        {-0.5 * p.d, m, -0.5 * p.d, b - m},  // left wall
        {0.5 * p.d, m, 0.5 * p.d, b - m},    // right wall
        {-0.5 * p.d, m, 0.5 * p.d, m},       // bottom edge (interior to the disk)
        {-0.5 * p.d, b - m, 0.5 * p.d, b - m},
    };
    for (const auto& s : sides) {
        const double len = std::hypot(s[2] - s[0], s[3] - s[1]);
        for (int k = 0; k < nseg; ++k) {
            const double t = (k + 0.5) / nseg;
            if (keep(s[0] + t * (s[2] - s[0]), s[1] + t * (s[3] - s[1]))) total += len / nseg;
        }
    }
    return total;
}

}  // namespace

TEST_CASE("cell dimensions match direct evaluation") {
    {
        const auto [a, b] = cell_dimensions({10.0, 0.07, 4.0, 8.0});
        CHECK(a == doctest::Approx(10.0 * std::cos(0.07)).epsilon(1e-14));
        CHECK(b == doctest::Approx(20.0 * std::sqrt(0.96) + 8.0).epsilon(1e-14));
        CHECK(a == doctest::Approx(9.9755).epsilon(1e-4));
        CHECK(b == doctest::Approx(27.5959).epsilon(1e-4));
    }
    {
        const auto [a, b] = cell_dimensions({60.0, 0.7, 8.0, 18.0});
        CHECK(a == doctest::Approx(60.0 * std::cos(0.7)).epsilon(1e-14));
        CHECK(b == doctest::Approx(120.0 * std::sqrt(1.0 - 64.0 / 14400.0) + 18.0).epsilon(1e-14));
    }
    CHECK_THROWS_AS((void)cell_dimensions({10.0, 0.1, 20.0, 5.0}), std::domain_error);
    CHECK_THROWS_AS((void)cell_dimensions({10.0, 0.1, 25.0, 5.0}), std::domain_error);
}

TEST_CASE("feasibility bounds") {
    CHECK(nanotube_diameter_bound(10.0, 0.07) == doctest::Approx(20.0 * std::cos(0.07)).epsilon(1e-14));
    CHECK(nanotube_diameter_bound(10.0, 0.07) == doctest::Approx(19.951).epsilon(1e-4));
    CHECK(nanotube_diameter_bound(60.0, 0.7) == doctest::Approx(120.0 * std::cos(0.7)).epsilon(1e-14));

    CHECK(nanotube_length_bound(10.0, 4.0) == doctest::Approx(20.0 - std::sqrt(384.0)).epsilon(1e-14));
    CHECK(nanotube_length_bound(10.0, 4.0) == doctest::Approx(0.4041).epsilon(2e-4));
    CHECK(nanotube_length_bound(10.0, 20.0) == doctest::Approx(20.0));  // d = 2R edge
    CHECK_THROWS_AS((void)nanotube_length_bound(10.0, 20.0 + 1e-9), std::domain_error);

    CHECK(goiter_diameter_bound(10.0, 1.0) == doctest::Approx(std::sqrt(39.0)).epsilon(1e-14));
    CHECK(goiter_diameter_bound(10.0, 1.0) == doctest::Approx(6.245).epsilon(1e-4));
    // at l = 2R the bound equals the mesopore diameter
    CHECK(goiter_diameter_bound(10.0, 20.0) == doctest::Approx(20.0).epsilon(1e-14));
    CHECK(goiter_diameter_bound(60.0, 60.0) == doctest::Approx(std::sqrt(10800.0)).epsilon(1e-14));
    CHECK(goiter_diameter_bound(60.0, 60.0) == doctest::Approx(103.923).epsilon(1e-5));
    CHECK_THROWS_AS((void)goiter_diameter_bound(10.0, 40.0), std::domain_error);
    CHECK_THROWS_AS((void)goiter_diameter_bound(10.0, -1.0), std::domain_error);
}

TEST_CASE("parameter validation rejects each violated constraint") {
    CHECK_NOTHROW(validate({10.0, 0.07, 4.0, 8.0}));
    CHECK_NOTHROW(validate({60.0, 0.7, 8.0, 18.0}));

    CHECK_THROWS_AS(validate({-1.0, 0.1, 1.0, 1.0}), ConstraintError);
    CHECK_THROWS_AS(validate({10.0, 0.0, 1.0, 1.0}), ConstraintError);
    CHECK_THROWS_AS(validate({10.0, 0.5 * pi, 1.0, 1.0}), ConstraintError);
    CHECK_THROWS_AS(validate({10.0, 0.1, -1.0, 1.0}), ConstraintError);
    CHECK_THROWS_AS(validate({10.0, 0.1, 1.0, -1.0}), ConstraintError);
    // tube wider than the mouth: 2R cos(1.4) = 3.40 < 4
    CHECK_THROWS_AS(validate({10.0, 1.4, 4.0, 8.0}), ConstraintError);
    // tube shorter than the mesopore overlap: bound is 0.4041
    CHECK_THROWS_AS(validate({10.0, 0.07, 4.0, 0.3}), ConstraintError);
    CHECK(is_valid({10.0, 0.07, 4.0, 8.0}));
    CHECK_FALSE(is_valid({10.0, 0.07, 4.0, 0.3}));
}

TEST_CASE("geometric effectives: positivity and porosity range over random valid params") {
    const CounterRng rng(20260825, 901);
    for (std::uint64_t i = 0; i < 20000; ++i) {
        const auto p = testutil::random_valid_params(rng, i);
        const auto g = geometric_effectives(p);
        const auto [a, b] = cell_dimensions(p);
        CHECK(g.pore_area > 0.0);
        CHECK(g.pore_area < 2.0 * a * b);
        CHECK(g.interface_length > 0.0);
        CHECK(g.porosity > 0.0);
        CHECK(g.porosity < 1.0);
        CHECK(g.geff > 0.0);
    }
}

TEST_CASE("geometric effectives agree with the primitive-shape quadrature oracle") {
    const PoreParams cases[] = {
        {10.0, 0.07, 4.0, 8.0},
        {60.0, 0.7, 8.0, 18.0},
        {23.7, 0.53, 11.3, 27.9},
        {35.0, 1.1, 9.0, 2.0},  // short tube, caps close together
    };
    for (const auto& p : cases) {
        const auto g = geometric_effectives(p);
        const double quad = interface_quadrature(p, 400000);
        CHECK(g.interface_length == doctest::Approx(quad).epsilon(5e-4));

        const auto est = raster_estimate(p, 512);
        CHECK(g.porosity == doctest::Approx(est.porosity).epsilon(0.01));
        CHECK(g.geff == doctest::Approx(est.geff).epsilon(0.02));
    }
}

TEST_CASE("near-degenerate cell approaches the isolated-disk ratio 2/R") {
    // theta, d, l -> 0 leaves a single full disk; perimeter/area = 2/R.
    const PoreParams p{10.0, 1e-3, 0.01, 1e-4};
    const auto g = geometric_effectives(p);
    CHECK(g.geff == doctest::Approx(2.0 / p.R).epsilon(1e-2));
}

TEST_CASE("rasterisation: porosity bookkeeping and argument checks") {
    const PoreParams p{23.7, 0.53, 11.3, 27.9};
    const auto mask = rasterize_pore(p, 64);
    REQUIRE(mask.nx == 64);
    REQUIRE(mask.ny == 64);
    std::size_t count = 0;
    for (auto f : mask.fluid) count += f;
    CHECK(mask.porosity == static_cast<double>(count) / (64.0 * 64.0));
    CHECK(mask.interface_length == doctest::Approx(geometric_effectives(p).interface_length));
    const auto [a, b] = cell_dimensions(p);
    CHECK(mask.hx == doctest::Approx(2.0 * a / 64));
    CHECK(mask.hy == doctest::Approx(b / 64));
    CHECK(mask.domain_area() == doctest::Approx(2.0 * a * b));

    CHECK_THROWS_AS((void)rasterize_pore(p, 15), std::invalid_argument);
    CHECK_THROWS_AS((void)rasterize_pore({10.0, 1.4, 4.0, 8.0}, 64), ConstraintError);
}

TEST_CASE("rasterised porosity settles with resolution") {
    const PoreParams p{10.0, 0.07, 4.0, 8.0};
    const double p128 = rasterize_pore(p, 128).porosity;
    const double p256 = rasterize_pore(p, 256).porosity;
    CHECK(std::abs(p128 - p256) < 1.0 / 128.0);

    const double exact = geometric_effectives(p).porosity;
    CHECK(rasterize_pore(p, 512).porosity == doctest::Approx(exact).epsilon(0.01));
}

TEST_CASE("raster estimates converge to the analytic effectives at first order") {
    const PoreParams p{23.7, 0.53, 11.3, 27.9};
    const double exact = geometric_effectives(p).geff;
    const int res[] = {64, 96, 128, 192, 256, 384, 512};
    std::vector<double> lh, le;
    for (int r : res) {
        const double err = std::abs(raster_estimate(p, r).geff - exact);
        REQUIRE(err > 0.0);
        lh.push_back(std::log(1.0 / r));
        le.push_back(std::log(err));
    }
    // least-squares slope of log(err) against log(h)
    const auto n = static_cast<double>(lh.size());
    double sh = 0, se = 0, shh = 0, she = 0;
    for (std::size_t k = 0; k < lh.size(); ++k) {
        sh += lh[k];
        se += le[k];
        shh += lh[k] * lh[k];
        she += lh[k] * le[k];
    }
    const double slope = (n * she - sh * se) / (n * shh - sh * sh);
    CHECK(slope == doctest::Approx(1.0).epsilon(0.3));
}

TEST_CASE("in_pore matches the primitive-distance classification") {
    const PoreParams p{35.0, 1.1, 9.0, 2.0};
    const auto [a, b] = cell_dimensions(p);
    const CounterRng rng(7, 902);
    const double tol = 1e-9 * p.R;
    const double m = std::sqrt(p.R * p.R - 0.25 * p.d * p.d);
    const auto inside_with_margin = [&](double x, double y) {
        if (std::hypot(x, y) < p.R - tol) return true;
        if (std::hypot(x, y - b) < p.R - tol) return true;
        return std::abs(x) < 0.5 * p.d - tol && y > m + tol && y < b - m - tol;
    };
    int checked = 0;
    for (std::uint64_t i = 0; i < 50000; ++i) {
        const double x = rng.uniform(i, 0, -a, a);
        const double y = rng.uniform(i, 1, 0.0, b);
        if (dist_pore(p, x, y) > tol) {
            CHECK_FALSE(in_pore(p, x, y));
            ++checked;
        } else if (inside_with_margin(x, y)) {
            CHECK(in_pore(p, x, y));
            ++checked;
        }
    }
    CHECK(checked > 49000);
}
