#include "poreuq/surrogate.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "poreuq/errors.hpp"
#include "poreuq/parallel.hpp"

namespace poreuq {

namespace {

void fmt_full(char* buf, std::size_t n, double v) { std::snprintf(buf, n, "%.17g", v); }

}  // namespace

std::string_view to_string(Qoi q) {
    switch (q) {
        case Qoi::DL: return "DL";
        case Qoi::DT: return "DT";
        case Qoi::geff: return "geff";
    }
    return "?";
}

Qoi qoi_from_string(std::string_view s) {
    if (s == "DL") return Qoi::DL;
    if (s == "DT") return Qoi::DT;
    if (s == "geff") return Qoi::geff;
    throw ConfigError("qoi_from_string: unknown quantity '" + std::string(s) + "'");
}

double get(const EffectiveProps& e, Qoi q) noexcept {
    switch (q) {
        case Qoi::DL: return e.DL;
        case Qoi::DT: return e.DT;
        case Qoi::geff: return e.geff;
    }
    return 0;
}

double shifted_legendre(int degree, double x) {
    if (degree < 0) throw std::invalid_argument("shifted_legendre: negative degree");
    const double u = 2.0 * x - 1.0;
    double pm = 1.0, p = u;
    if (degree == 0) return 1.0;
    for (int n = 1; n < degree; ++n) {
        const double pn = ((2 * n + 1) * u * p - n * pm) / (n + 1);
        pm = p;
        p = pn;
    }
    return std::sqrt(2.0 * degree + 1.0) * p;
}

PcBasis tensor_basis(const std::array<int, 4>& order) {
    for (int o : order)
        if (o < 0) throw std::invalid_argument("tensor_basis: negative order bound");
    PcBasis b;
    b.order = order;
    b.index.reserve(static_cast<std::size_t>(order[0] + 1) * (order[1] + 1) * (order[2] + 1) *
                    (order[3] + 1));
    for (int a0 = 0; a0 <= order[0]; ++a0)
        for (int a1 = 0; a1 <= order[1]; ++a1)
            for (int a2 = 0; a2 <= order[2]; ++a2)
                for (int a3 = 0; a3 <= order[3]; ++a3) b.index.push_back({a0, a1, a2, a3});
    return b;
}

std::size_t PcBasis::position(const std::array<int, 4>& alpha) const {
    std::size_t pos = 0;
    for (int k = 0; k < 4; ++k) {
        if (alpha[k] < 0 || alpha[k] > order[k])
            throw std::out_of_range("PcBasis::position: multi-index outside the order bounds");
        pos = pos * static_cast<std::size_t>(order[k] + 1) + static_cast<std::size_t>(alpha[k]);
    }
    return pos;
}

std::vector<double> basis_eval(const PcBasis& basis, const ZVec& z) {
    // Per-axis value tables by the three-term recurrence, then the tensor
    // products; one pass over the multi-index list.
    std::array<std::vector<double>, 4> table;
    for (int k = 0; k < 4; ++k) {
        table[k].resize(static_cast<std::size_t>(basis.order[k]) + 1);
        const double u = 2.0 * z[k] - 1.0;
        double pm = 1.0, p = u;
        table[k][0] = 1.0;
        for (int n = 1; n <= basis.order[k]; ++n) {
            table[k][n] = std::sqrt(2.0 * n + 1.0) * p;
            const double pn = ((2 * n + 1) * u * p - n * pm) / (n + 1);
            pm = p;
            p = pn;
        }
    }
    std::vector<double> out(basis.size());
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const auto& a = basis.index[i];
        out[i] = table[0][a[0]] * table[1][a[1]] * table[2][a[2]] * table[3][a[3]];
    }
    return out;
}

double pce_eval(const PcSurrogate& s, const ZVec& z) {
    const std::vector<double> psi = basis_eval(s.basis, z);
    double acc = 0;
    for (std::size_t i = 0; i < psi.size(); ++i) acc += s.coeff[i] * psi[i];
    return acc;
}

TrainingSet training_set(PriorModel model, const HyperRanges& r, Qoi qoi, std::size_t n,
                         std::uint64_t seed, const SolverConfig& cfg, std::uint64_t stream) {
    const CounterRng rng(seed, stream);
    TrainingSet out;
    out.z.resize(n);
    out.y.resize(n);
    parallel_for_indexed(n, [&](std::size_t i) {
        const ZVec z{rng.u01(i, 0), rng.u01(i, 1), rng.u01(i, 2), rng.u01(i, 3)};
        out.z[i] = z;
        try {
            const PoreParams p = rosenblatt_inverse(model, r, z);
            if (qoi == Qoi::geff)
                out.y[i] = geometric_effectives(p).geff;
            else
                out.y[i] = get(forward_model(p, cfg), qoi);
        } catch (const std::exception& e) {
            throw SolveError("training_set: forward model failed at sample " + std::to_string(i) +
                             ": " + e.what());
        }
    });
    return out;
}

PcSurrogate pce_fit_data(const PcBasis& basis, Qoi qoi, const TrainingSet& data) {
    const std::size_t n = data.z.size();
    const std::size_t m = basis.size();
    if (data.y.size() != n)
        throw std::invalid_argument("pce_fit_data: design and response counts disagree");
    if (n < m)
        throw std::invalid_argument("pce_fit_data: fewer training rows than basis terms");

    // Keep the dense algebra single threaded so coefficients do not depend
    // on the worker count.
    Eigen::setNbThreads(1);

    Eigen::MatrixXd A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
    parallel_for_indexed(n, [&](std::size_t i) {
        const std::vector<double> psi = basis_eval(basis, data.z[i]);
        for (std::size_t j = 0; j < m; ++j)
            A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = psi[j];
    });
    Eigen::Map<const Eigen::VectorXd> y(data.y.data(), static_cast<Eigen::Index>(n));

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < static_cast<Eigen::Index>(m))
        throw RankDeficiencyError("pce_fit_data: design matrix rank " +
                                  std::to_string(qr.rank()) + " below the " + std::to_string(m) +
                                  " basis terms");

    PcSurrogate s;
    s.basis = basis;
    s.qoi = qoi;
    const Eigen::VectorXd c = qr.solve(y);
    s.coeff.assign(c.data(), c.data() + c.size());

    const double resid = (A * c - y).norm();
    const double ynorm = y.norm();
    s.diag.residual_norm = ynorm > 0 ? resid / ynorm : resid;
    // Column pivoting sorts the triangular diagonal by magnitude, so the
    // first/last ratio estimates the condition number.
    const auto& R = qr.matrixR();
    s.diag.condition = std::abs(R(0, 0)) /
                       std::abs(R(static_cast<Eigen::Index>(m) - 1, static_cast<Eigen::Index>(m) - 1));
    s.diag.n_train = n;
    return s;
}

PcSurrogate pce_fit(PriorModel model, const HyperRanges& r, Qoi qoi, std::uint64_t seed,
                    const SolverConfig& cfg, std::size_t n_train,
                    const std::array<int, 4>& order) {
    const PcBasis basis = tensor_basis(order);
    if (n_train == 0) n_train = 2 * basis.size();
    const TrainingSet data = training_set(model, r, qoi, n_train, seed, cfg);
    return pce_fit_data(basis, qoi, data);
}

double surrogate_variance(const PcSurrogate& s) {
    const std::size_t constant = s.basis.position({0, 0, 0, 0});
    double total = 0;
    for (std::size_t i = 0; i < s.coeff.size(); ++i)
        if (i != constant) total += s.coeff[i] * s.coeff[i];
    return total;
}

std::array<double, 4> sobol_first_order(const PcSurrogate& s) {
    const double total = surrogate_variance(s);
    if (total <= 0)
        throw ZeroVarianceError("sobol_first_order: surrogate response is constant");
    std::array<double, 4> num{0, 0, 0, 0};
    for (std::size_t i = 0; i < s.coeff.size(); ++i) {
        const auto& a = s.basis.index[i];
        int active = -1, count = 0;
        for (int k = 0; k < 4; ++k)
            if (a[k] > 0) {
                active = k;
                ++count;
            }
        if (count == 1) num[static_cast<std::size_t>(active)] += s.coeff[i] * s.coeff[i];
    }
    return {num[0] / total, num[1] / total, num[2] / total, num[3] / total};
}

void write_surrogate(std::ostream& os, const PcSurrogate& s) {
    char buf[64];
    os << "poreuq-surrogate 1\n";
    os << "qoi " << to_string(s.qoi) << '\n';
    os << "order " << s.basis.order[0] << ' ' << s.basis.order[1] << ' ' << s.basis.order[2]
       << ' ' << s.basis.order[3] << '\n';
    os << "n_train " << s.diag.n_train << '\n';
    fmt_full(buf, sizeof buf, s.diag.residual_norm);
    os << "residual_norm " << buf << '\n';
    fmt_full(buf, sizeof buf, s.diag.condition);
    os << "condition " << buf << '\n';
    os << "terms " << s.basis.size() << '\n';
    for (std::size_t i = 0; i < s.basis.size(); ++i) {
        const auto& a = s.basis.index[i];
        fmt_full(buf, sizeof buf, s.coeff[i]);
        os << a[0] << ' ' << a[1] << ' ' << a[2] << ' ' << a[3] << ' ' << buf << '\n';
    }
}

namespace {

void expect_word(std::istream& is, std::string_view want) {
    std::string got;
    if (!(is >> got) || got != want)
        throw IoError("read_surrogate: expected '" + std::string(want) + "', got '" + got + "'");
}

}  // namespace

PcSurrogate read_surrogate(std::istream& is) {
    expect_word(is, "poreuq-surrogate");
    int version = 0;
    if (!(is >> version) || version != 1)
        throw IoError("read_surrogate: unsupported format version");
    expect_word(is, "qoi");
    std::string tag;
    if (!(is >> tag)) throw IoError("read_surrogate: missing qoi tag");

    PcSurrogate s;
    try {
        s.qoi = qoi_from_string(tag);
    } catch (const ConfigError& e) {
        throw IoError(std::string("read_surrogate: ") + e.what());
    }
    expect_word(is, "order");
    std::array<int, 4> order{};
    for (int k = 0; k < 4; ++k)
        if (!(is >> order[k]) || order[k] < 0)
            throw IoError("read_surrogate: malformed order bounds");
    expect_word(is, "n_train");
    if (!(is >> s.diag.n_train)) throw IoError("read_surrogate: malformed n_train");
    expect_word(is, "residual_norm");
    if (!(is >> s.diag.residual_norm)) throw IoError("read_surrogate: malformed residual_norm");
    expect_word(is, "condition");
    if (!(is >> s.diag.condition)) throw IoError("read_surrogate: malformed condition");
    expect_word(is, "terms");
    std::size_t terms = 0;
    if (!(is >> terms)) throw IoError("read_surrogate: malformed term count");

    s.basis = tensor_basis(order);
    if (terms != s.basis.size())
        throw IoError("read_surrogate: term count does not match the order bounds");
    s.coeff.resize(terms);
    for (std::size_t i = 0; i < terms; ++i) {
        std::array<int, 4> a{};
        if (!(is >> a[0] >> a[1] >> a[2] >> a[3] >> s.coeff[i]))
            throw IoError("read_surrogate: truncated coefficient table at row " +
                          std::to_string(i));
        if (a != s.basis.index[i])
            throw IoError("read_surrogate: multi-index out of order at row " + std::to_string(i));
    }
    return s;
}

void write_coefficients_csv(std::ostream& os, const PcSurrogate& s) {
    char buf[64];
    os << "term,a1,a2,a3,a4,coeff\n";
    for (std::size_t i = 0; i < s.basis.size(); ++i) {
        const auto& a = s.basis.index[i];
        fmt_full(buf, sizeof buf, s.coeff[i]);
        os << i << ',' << a[0] << ',' << a[1] << ',' << a[2] << ',' << a[3] << ',' << buf << '\n';
    }
}

}  // namespace poreuq
