#include "poreuq/surrogate.hpp"

#include <Eigen/Dense>
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "poreuq/errors.hpp"
#include "poreuq/rng.hpp"
#include "test_util.hpp"

using namespace poreuq;

namespace {

// 5-point Gauss-Legendre rule mapped to [0,1]; exact through degree 9, which
// covers every product of two factors up to degree 4.
constexpr int kGl = 5;
constexpr double gl_node[kGl] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                 0.5384693101056831, 0.9061798459386640};
constexpr double gl_weight[kGl] = {0.2369268850561891, 0.4786286704993665, 0.5688888888888889,
                                   0.4786286704993665, 0.2369268850561891};

double factor_product_integral(int i, int j) {
    double acc = 0;
    for (int q = 0; q < kGl; ++q) {
        const double x = 0.5 * (gl_node[q] + 1.0);
        acc += 0.5 * gl_weight[q] * shifted_legendre(i, x) * shifted_legendre(j, x);
    }
    return acc;
}

TrainingSet synthetic_training(const PcBasis& basis, const std::vector<double>& truth,
                               std::size_t n, std::uint64_t seed) {
    const CounterRng rng(seed, streams::train);
    TrainingSet d;
    d.z.resize(n);
    d.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        d.z[i] = {rng.u01(i, 0), rng.u01(i, 1), rng.u01(i, 2), rng.u01(i, 3)};
        const auto psi = basis_eval(basis, d.z[i]);
        double acc = 0;
        for (std::size_t t = 0; t < psi.size(); ++t) acc += truth[t] * psi[t];
        d.y[i] = acc;
    }
    return d;
}

double holdout_rel_rms(const PcSurrogate& s, const TrainingSet& hold) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < hold.z.size(); ++i) {
        const double e = pce_eval(s, hold.z[i]) - hold.y[i];
        num += e * e;
        den += hold.y[i] * hold.y[i];
    }
    return std::sqrt(num / den);
}

}  // namespace

TEST_CASE("polynomial factors are orthonormal under exact quadrature") {
    for (int i = 0; i <= 4; ++i)
        for (int j = 0; j <= 4; ++j) {
            const double want = (i == j) ? 1.0 : 0.0;
            CHECK(std::abs(factor_product_integral(i, j) - want) < 1e-13);
        }
    CHECK_THROWS_AS(shifted_legendre(-1, 0.5), std::invalid_argument);
}

TEST_CASE("constant term is one and the linear factor vanishes at the midpoint") {
    const PcBasis basis = tensor_basis();
    for (const ZVec& z : {ZVec{0, 0, 0, 0}, ZVec{0.5, 0.5, 0.5, 0.5}, ZVec{0.12, 0.9, 0.4, 0.77}})
        CHECK(basis_eval(basis, z)[basis.position({0, 0, 0, 0})] == 1.0);
    CHECK(shifted_legendre(1, 0.5) == 0.0);
    CHECK(shifted_legendre(1, 0.25) == doctest::Approx(-0.5 * std::sqrt(3.0)).epsilon(1e-15));
}

TEST_CASE("full tensor basis enumerates every bounded multi-index once") {
    const PcBasis basis = tensor_basis();
    CHECK(basis.size() == 625);
    for (std::size_t i = 0; i < basis.size(); ++i) CHECK(basis.position(basis.index[i]) == i);

    const PcBasis small = tensor_basis({1, 2, 0, 3});
    CHECK(small.size() == 24);
    CHECK(small.index.front() == std::array<int, 4>{0, 0, 0, 0});
    CHECK(small.index.back() == std::array<int, 4>{1, 2, 0, 3});
    CHECK_THROWS_AS(small.position({0, 0, 1, 0}), std::out_of_range);
    CHECK_THROWS_AS(tensor_basis({-1, 0, 0, 0}), std::invalid_argument);
}

TEST_CASE("Monte Carlo design is orthonormal to within its sampling error") {
    const PcBasis basis = tensor_basis();
    const auto m = static_cast<Eigen::Index>(basis.size());
    const CounterRng rng(1, streams::mc_eval);
    const std::size_t n = 100000, blk = 4096;

    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(m, m);   // E[psi_i psi_j]
    Eigen::MatrixXd G2 = Eigen::MatrixXd::Zero(m, m);  // E[(psi_i psi_j)^2]
    Eigen::MatrixXd A(static_cast<Eigen::Index>(blk), m);
    std::size_t done = 0;
    while (done < n) {
        const auto rows = static_cast<Eigen::Index>(std::min(blk, n - done));
        for (Eigen::Index i = 0; i < rows; ++i) {
            const std::size_t s = done + static_cast<std::size_t>(i);
            const ZVec z{rng.u01(s, 0), rng.u01(s, 1), rng.u01(s, 2), rng.u01(s, 3)};
            const auto psi = basis_eval(basis, z);
            for (Eigen::Index j = 0; j < m; ++j) A(i, j) = psi[static_cast<std::size_t>(j)];
        }
        G.selfadjointView<Eigen::Lower>().rankUpdate(A.topRows(rows).transpose());
        const Eigen::MatrixXd B = A.topRows(rows).array().square().matrix();
        G2.selfadjointView<Eigen::Lower>().rankUpdate(B.transpose());
        done += static_cast<std::size_t>(rows);
    }
    G /= static_cast<double>(n);
    G2 /= static_cast<double>(n);

    // High-degree diagonal entries carry fourth moments near 80, so their
    // standard error at n = 1e5 is about 0.03; the bound below follows the
    // per-entry error scale instead of a single global constant.
    double worst_abs = 0, worst_z = 0;
    for (Eigen::Index r = 0; r < m; ++r)
        for (Eigen::Index c = 0; c <= r; ++c) {
            const double want = (r == c) ? 1.0 : 0.0;
            const double dev = std::abs(G(r, c) - want);
            const double var = std::max(G2(r, c) - G(r, c) * G(r, c), 0.0);
            const double se = std::sqrt(var / static_cast<double>(n));
            worst_abs = std::max(worst_abs, dev);
            worst_z = std::max(worst_z, dev / (se + 1e-12));
        }
    CHECK(worst_abs < 0.08);
    CHECK(worst_z < 6.0);
}

TEST_CASE("a polynomial inside the span is recovered exactly") {
    const PcBasis basis = tensor_basis();
    std::vector<double> truth(basis.size(), 0.0);
    truth[basis.position({0, 0, 0, 0})] = 3.0;
    truth[basis.position({1, 0, 0, 0})] = 2.0;

    const TrainingSet d = synthetic_training(basis, truth, 1250, 11);
    const PcSurrogate s = pce_fit_data(basis, Qoi::DL, d);
    CHECK(s.diag.residual_norm < 1e-8);
    CHECK(s.diag.n_train == 1250);
    double worst = 0;
    for (std::size_t t = 0; t < truth.size(); ++t)
        worst = std::max(worst, std::abs(s.coeff[t] - truth[t]));
    CHECK(worst < 1e-8);

    const double at_quarter = pce_eval(s, {0.25, 0.25, 0.25, 0.25});
    CHECK(at_quarter == doctest::Approx(3.0 - std::sqrt(3.0)).epsilon(1e-10));

    // Dense random truth exercises every coefficient, not just two.
    const CounterRng coeff_rng(5, 99);
    std::vector<double> dense(basis.size());
    for (std::size_t t = 0; t < dense.size(); ++t)
        dense[t] = coeff_rng.uniform(t, 0, -2.0, 2.0);
    const TrainingSet d2 = synthetic_training(basis, dense, 1250, 12);
    const PcSurrogate s2 = pce_fit_data(basis, Qoi::DT, d2);
    CHECK(s2.diag.residual_norm < 1e-8);
    double worst2 = 0;
    for (std::size_t t = 0; t < dense.size(); ++t)
        worst2 = std::max(worst2, std::abs(s2.coeff[t] - dense[t]));
    CHECK(worst2 < 1e-8);
}

TEST_CASE("a degree above the order bound leaves an irreducible residual") {
    const PcBasis basis = tensor_basis();
    const CounterRng rng(3, streams::train);
    TrainingSet d;
    d.z.resize(1250);
    d.y.resize(1250);
    for (std::size_t i = 0; i < d.z.size(); ++i) {
        d.z[i] = {rng.u01(i, 0), rng.u01(i, 1), rng.u01(i, 2), rng.u01(i, 3)};
        d.y[i] = shifted_legendre(5, d.z[i][0]);
    }
    const PcSurrogate s = pce_fit_data(basis, Qoi::DL, d);
    CHECK(s.diag.residual_norm > 0.3);
    CHECK(s.diag.residual_norm < 1.0);
}

TEST_CASE("fitted mean and variance match Monte Carlo statistics") {
    const PcBasis basis = tensor_basis();
    std::vector<double> truth(basis.size(), 0.0);
    truth[basis.position({0, 0, 0, 0})] = 3.0;
    truth[basis.position({1, 0, 0, 0})] = 2.0;
    const PcSurrogate s = pce_fit_data(basis, Qoi::DL, synthetic_training(basis, truth, 1250, 21));

    CHECK(surrogate_variance(s) == doctest::Approx(4.0).epsilon(1e-9));

    const std::size_t n = 200000;
    const CounterRng rng(9, streams::mc_eval);
    double sum = 0, sumsq = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double v =
            pce_eval(s, {rng.u01(i, 0), rng.u01(i, 1), rng.u01(i, 2), rng.u01(i, 3)});
        sum += v;
        sumsq += v * v;
    }
    const double mean = sum / static_cast<double>(n);
    const double var = sumsq / static_cast<double>(n) - mean * mean;
    const double se_mean = std::sqrt(var / static_cast<double>(n));
    CHECK(std::abs(mean - s.coeff[basis.position({0, 0, 0, 0})]) < 3.0 * se_mean);
    CHECK(std::abs(var - surrogate_variance(s)) < 0.02 * surrogate_variance(s));
}

TEST_CASE("first-order indices attribute additive and interactive responses") {
    const PcBasis basis = tensor_basis();

    std::vector<double> additive(basis.size(), 0.0);
    additive[basis.position({1, 0, 0, 0})] = 1.0;
    additive[basis.position({0, 1, 0, 0})] = 1.0;
    const PcSurrogate sa =
        pce_fit_data(basis, Qoi::DL, synthetic_training(basis, additive, 1250, 31));
    const auto Sa = sobol_first_order(sa);
    CHECK(std::abs(Sa[0] - 0.5) < 1e-9);
    CHECK(std::abs(Sa[1] - 0.5) < 1e-9);
    CHECK(Sa[2] < 1e-9);
    CHECK(Sa[3] < 1e-9);

    std::vector<double> interactive(basis.size(), 0.0);
    interactive[basis.position({1, 1, 0, 0})] = 1.0;
    const PcSurrogate si =
        pce_fit_data(basis, Qoi::DL, synthetic_training(basis, interactive, 1250, 32));
    for (double v : sobol_first_order(si)) CHECK(v < 1e-9);

    PcSurrogate constant;
    constant.basis = basis;
    constant.coeff.assign(basis.size(), 0.0);
    constant.coeff[basis.position({0, 0, 0, 0})] = 7.0;
    CHECK_THROWS_AS(sobol_first_order(constant), ZeroVarianceError);

    PcSurrogate dense;
    dense.basis = basis;
    dense.coeff.resize(basis.size());
    const CounterRng rng(8, 99);
    for (std::size_t t = 0; t < dense.coeff.size(); ++t)
        dense.coeff[t] = rng.uniform(t, 0, -1.0, 1.0);
    const auto Sd = sobol_first_order(dense);
    CHECK(Sd[0] + Sd[1] + Sd[2] + Sd[3] <= 1.0 + 1e-9);
    for (double v : Sd) CHECK(v >= 0.0);
}

TEST_CASE("geometric surrogate training is deterministic and accurate out of sample") {
    const HyperRanges r = narrow_ranges();
    const PcSurrogate s = pce_fit(PriorModel::p1, r, Qoi::geff, 42);
    const PcSurrogate again = pce_fit(PriorModel::p1, r, Qoi::geff, 42);
    CHECK(s.coeff == again.coeff);
    CHECK(s.coeff.size() == 625);
    CHECK(s.diag.n_train == 1250);
    CHECK(s.diag.residual_norm < 0.02);
    CHECK(s.qoi == Qoi::geff);

    const TrainingSet hold =
        training_set(PriorModel::p1, r, Qoi::geff, 100, 42, {}, streams::holdout);
    CHECK(holdout_rel_rms(s, hold) < 0.10);
}

TEST_CASE("solver-backed surrogate generalizes at coarse resolution") {
    const HyperRanges r = narrow_ranges();
    SolverConfig cfg;
    cfg.resolution = 32;
    const PcSurrogate s = pce_fit(PriorModel::p1, r, Qoi::DL, 42, cfg);
    const TrainingSet hold =
        training_set(PriorModel::p1, r, Qoi::DL, 100, 42, cfg, streams::holdout);
    CHECK(holdout_rel_rms(s, hold) < 0.15);
}

TEST_CASE("rank deficiency and size mismatches are rejected") {
    const PcBasis basis = tensor_basis();
    const CounterRng rng(4, streams::train);

    TrainingSet flat;
    flat.z.resize(1250);
    flat.y.resize(1250);
    for (std::size_t i = 0; i < flat.z.size(); ++i) {
        // Only the first coordinate varies, so all columns with the same
        // first-axis degree are parallel.
        flat.z[i] = {rng.u01(i, 0), 0.37, 0.37, 0.37};
        flat.y[i] = flat.z[i][0];
    }
    CHECK_THROWS_AS(pce_fit_data(basis, Qoi::DL, flat), RankDeficiencyError);

    TrainingSet thin;
    thin.z.resize(100);
    thin.y.resize(100);
    CHECK_THROWS_AS(pce_fit_data(basis, Qoi::DL, thin), std::invalid_argument);

    TrainingSet mismatched;
    mismatched.z.resize(1250);
    mismatched.y.resize(1249);
    CHECK_THROWS_AS(pce_fit_data(basis, Qoi::DL, mismatched), std::invalid_argument);
}

TEST_CASE("surrogate files round trip exactly") {
    const PcBasis basis = tensor_basis({1, 1, 1, 1});
    std::vector<double> truth(basis.size());
    const CounterRng rng(6, 99);
    for (std::size_t t = 0; t < truth.size(); ++t) truth[t] = rng.uniform(t, 0, -3.0, 3.0);
    const PcSurrogate s = pce_fit_data(basis, Qoi::DT, synthetic_training(basis, truth, 64, 41));

    std::stringstream ss;
    write_surrogate(ss, s);
    const PcSurrogate back = read_surrogate(ss);
    CHECK(back.qoi == s.qoi);
    CHECK(back.basis.order == s.basis.order);
    CHECK(back.basis.index == s.basis.index);
    CHECK(back.coeff == s.coeff);
    CHECK(back.diag.n_train == s.diag.n_train);
    CHECK(back.diag.residual_norm == s.diag.residual_norm);
    CHECK(back.diag.condition == s.diag.condition);

    std::stringstream bad_magic("poreuq-whatever 1\n");
    CHECK_THROWS_AS(read_surrogate(bad_magic), IoError);
    std::stringstream bad_version("poreuq-surrogate 2\n");
    CHECK_THROWS_AS(read_surrogate(bad_version), IoError);

    std::string text = ss.str();
    write_surrogate(ss, s);  // reset content
    std::stringstream truncated(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(read_surrogate(truncated), IoError);

    std::string miscounted = text;
    miscounted.replace(miscounted.find("terms 16"), 8, "terms 17");
    std::stringstream bad_count(miscounted);
    CHECK_THROWS_AS(read_surrogate(bad_count), IoError);

    std::stringstream csv;
    write_coefficients_csv(csv, s);
    std::string line;
    std::getline(csv, line);
    CHECK(line == "term,a1,a2,a3,a4,coeff");
    std::size_t rows = 0;
    while (std::getline(csv, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 16);
}

TEST_CASE("solve failures surface the failing sample index") {
    const HyperRanges r = narrow_ranges();
    SolverConfig cfg;
    cfg.resolution = 16;
    cfg.max_iter = 1;
    try {
        training_set(PriorModel::p1, r, Qoi::DL, 4, 42, cfg);
        CHECK(false);
    } catch (const SolveError& e) {
        CHECK(std::string(e.what()).find("sample") != std::string::npos);
    }
}

TEST_CASE("qoi tags map to names and fields") {
    CHECK(to_string(Qoi::DL) == "DL");
    CHECK(qoi_from_string("geff") == Qoi::geff);
    CHECK_THROWS_AS(qoi_from_string("bogus"), ConfigError);
    const EffectiveProps e{0.5, 0.25, 0.125, 0.9};
    CHECK(get(e, Qoi::DL) == 0.5);
    CHECK(get(e, Qoi::DT) == 0.25);
    CHECK(get(e, Qoi::geff) == 0.125);
}
