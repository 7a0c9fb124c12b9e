#include "poreuq/stats.hpp"

#include <doctest.h>
#include <omp.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "poreuq/errors.hpp"
#include "poreuq/rng.hpp"
#include "test_util.hpp"

using namespace poreuq;

namespace {

std::vector<double> normals(std::uint64_t seed, std::size_t n, double mean = 0.0,
                            double sd = 1.0) {
    const CounterRng rng(seed, streams::compare);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = mean + sd * rng.normal(i, 0);
    return out;
}

}  // namespace

TEST_CASE("identical multisets give a statistic of exactly zero") {
    const std::vector<double> x = normals(1, 200);
    CHECK(cramer_statistic(x, x) == 0.0);

    std::vector<std::array<double, 2>> p(150);
    const CounterRng rng(2, streams::compare);
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = {rng.normal(i, 0), rng.normal(i, 1)};
    CHECK(cramer_statistic(as_points(p), as_points(p)) == 0.0);

    // Relabeling within a sample leaves the statistic unchanged up to
    // floating-point summation order.
    std::vector<double> shuffled = x;
    std::reverse(shuffled.begin(), shuffled.end());
    const std::vector<double> y = normals(3, 180);
    const double a = cramer_statistic(x, y);
    const double b = cramer_statistic(shuffled, y);
    const double c = cramer_statistic(y, x);
    CHECK(std::abs(a - b) < 1e-10 * std::max(1.0, std::abs(a)));
    CHECK(std::abs(a - c) < 1e-10 * std::max(1.0, std::abs(a)));
    CHECK(a >= -1e-12);
}

TEST_CASE("statistic grows linearly with a large location shift") {
    const std::vector<double> x = normals(4, 400);
    std::vector<double> y10 = normals(5, 400), y20 = y10, y40 = y10;
    for (auto& v : y10) v += 10.0;
    for (auto& v : y20) v += 20.0;
    for (auto& v : y40) v += 40.0;
    const double t10 = cramer_statistic(x, y10);
    const double t20 = cramer_statistic(x, y20);
    const double t40 = cramer_statistic(x, y40);
    CHECK(t20 > t10);
    CHECK(t40 > t20);
    const double ratio = (t40 - t20) / (t20 - t10);
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("matched samples fluctuate near zero") {
    const std::vector<double> x = normals(6, 2000);
    const std::vector<double> y = normals(7, 2000);
    const double t = cramer_statistic(x, y);
    CHECK(t >= -1e-12);
    CHECK(t < 1.0);
}

TEST_CASE("decision, p-value and critical value agree exactly") {
    const std::vector<double> x = normals(8, 300);
    for (std::size_t scenario = 0; scenario < 3; ++scenario) {
        std::vector<double> y = normals(9 + scenario, 300);
        if (scenario == 1)
            for (auto& v : y) v += 0.5;
        if (scenario == 2)
            for (auto& v : y) v += 2.0;
        for (std::size_t B : {299, 300, 1000}) {
            const CramerResult r = cramer_test(x, y, 0.95, B, 17);
            CHECK(r.reject == (r.statistic > r.critical_value));
            CHECK(r.reject == (r.p_value < 1.0 - r.confidence));
            CHECK(r.p_value > 0.0);
            CHECK(r.p_value <= 1.0);
            CHECK(r.B == B);
        }
    }
}

TEST_CASE("a one-sigma shift is rejected decisively") {
    const std::vector<double> x = normals(10, 2000);
    std::vector<double> y = normals(11, 2000);
    for (auto& v : y) v += 1.0;
    const CramerResult r = cramer_test(x, y, 0.95, 1000, 19);
    CHECK(r.reject);
    CHECK(r.p_value < 0.001);
}

TEST_CASE("the permutation test holds its level on null data") {
    std::size_t rejections = 0;
    const std::size_t sims = 20;
    for (std::size_t s = 0; s < sims; ++s) {
        const std::vector<double> x = normals(100 + 2 * s, 300);
        const std::vector<double> y = normals(101 + 2 * s, 300);
        rejections += cramer_test(x, y, 0.95, 299, s).reject ? 1 : 0;
    }
    CHECK(rejections <= 3);
}

TEST_CASE("the test is deterministic and worker-count independent") {
    const std::vector<double> x = normals(12, 500);
    std::vector<double> y = normals(13, 500);
    for (auto& v : y) v += 0.2;

    const int before = omp_get_max_threads();
    omp_set_num_threads(2);
    const CramerResult two = cramer_test(x, y, 0.95, 400, 23);
    omp_set_num_threads(1);
    const CramerResult one = cramer_test(x, y, 0.95, 400, 23);
    omp_set_num_threads(before);

    CHECK(one.statistic == two.statistic);
    CHECK(one.critical_value == two.critical_value);
    CHECK(one.p_value == two.p_value);
    CHECK(one.reject == two.reject);
}

TEST_CASE("bivariate samples are supported and shifts are detected") {
    const CounterRng rng(14, streams::compare);
    std::vector<std::array<double, 2>> x(600), y(600), z(600);
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = {rng.normal(i, 0), rng.normal(i, 1)};
        y[i] = {rng.normal(i, 2), rng.normal(i, 3)};
        z[i] = {rng.normal(i, 4) + 1.5, rng.normal(i, 5) - 1.5};
    }
    const CramerResult null_case = cramer_test(as_points(x), as_points(y), 0.95, 300, 27);
    const CramerResult shifted = cramer_test(as_points(x), as_points(z), 0.95, 300, 27);
    CHECK(shifted.statistic > null_case.statistic);
    CHECK(shifted.reject);
    CHECK(shifted.p_value < 0.01);
}

TEST_CASE("malformed inputs are rejected") {
    const std::vector<double> x = normals(15, 50);
    const std::vector<double> tiny = {1.0};
    CHECK_THROWS_AS(cramer_statistic(x, tiny), DegenerateSampleError);

    std::vector<std::array<double, 2>> p(50);
    CHECK_THROWS_AS(cramer_statistic(as_points(x), as_points(p)), std::invalid_argument);

    PointSet bad;
    bad.dim = 3;
    bad.flat.assign(30, 0.0);
    CHECK_THROWS_AS(cramer_statistic(bad, bad), std::invalid_argument);

    CHECK_THROWS_AS(cramer_test(x, x, 0.95, 100, 0), std::invalid_argument);
    CHECK_THROWS_AS(cramer_test(x, x, 1.5, 300, 0), std::invalid_argument);
}

TEST_CASE("cramer rows serialize with the decision spelled out") {
    CramerRow row;
    row.variable = "DL";
    row.result.statistic = 10.16;
    row.result.critical_value = 0.1253;
    row.result.p_value = 0.000999000999000999;
    row.result.reject = true;
    row.result.B = 1000;
    row.seed = 5;
    std::ostringstream os;
    write_cramer_csv(os, {row});
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "variable,statistic,critical_value,confidence,p_value,decision,B,seed");
    std::getline(is, line);
    CHECK(line.substr(0, 3) == "DL,");
    CHECK(line.find("reject") != std::string::npos);
    CHECK(line.find(",1000,5") != std::string::npos);
}
