#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "poreuq/bayesnet.hpp"
#include "poreuq/closure.hpp"
#include "poreuq/rng.hpp"

namespace poreuq {

// Scalar outputs of the forward model.
enum class Qoi { DL, DT, geff };

std::string_view to_string(Qoi q);
Qoi qoi_from_string(std::string_view s);  // throws ConfigError
double get(const EffectiveProps& e, Qoi q) noexcept;

// Legendre polynomial shifted to [0,1] and scaled to unit L2 norm under the
// uniform measure: q0 = 1, q1(x) = sqrt(3)(2x - 1), ...
double shifted_legendre(int degree, double x);

// Full tensor-product basis over the unit cube: one shifted-Legendre factor
// per coordinate, every multi-index with alpha_k <= order[k].
struct PcBasis {
    std::array<int, 4> order{4, 4, 4, 4};
    std::vector<std::array<int, 4>> index;  // lexicographic, last axis fastest

    std::size_t size() const noexcept { return index.size(); }
    // Position of a multi-index; throws std::out_of_range beyond the bounds.
    std::size_t position(const std::array<int, 4>& alpha) const;
};

PcBasis tensor_basis(const std::array<int, 4>& order = {4, 4, 4, 4});

// Values of every basis term at z, ordered like basis.index.
std::vector<double> basis_eval(const PcBasis& basis, const ZVec& z);

struct FitDiagnostics {
    double residual_norm = 0;  // ||A c - y|| / ||y|| (absolute when y = 0)
    double condition = 0;      // diagonal ratio of the triangular QR factor
    std::size_t n_train = 0;
};

struct PcSurrogate {
    PcBasis basis;
    Qoi qoi = Qoi::DL;
    std::vector<double> coeff;  // one per basis.index entry
    FitDiagnostics diag{};
};

double pce_eval(const PcSurrogate& s, const ZVec& z);

// Unit-cube designs with their forward-model responses.
struct TrainingSet {
    std::vector<ZVec> z;
    std::vector<double> y;
};

// Draws n designs on the given stream of the seed, maps each through the
// inverse Rosenblatt transform and evaluates the QoI: DL and DT run the
// closure solve at cfg, geff uses the closed-form geometry. Solve failures
// abort with the failing sample index in the message.
TrainingSet training_set(PriorModel model, const HyperRanges& r, Qoi qoi, std::size_t n,
                         std::uint64_t seed, const SolverConfig& cfg,
                         std::uint64_t stream = streams::train);

// Least-squares fit of the basis to the data. Throws RankDeficiencyError if
// the design matrix loses column rank and std::invalid_argument when rows
// are fewer than basis terms or sizes disagree.
PcSurrogate pce_fit_data(const PcBasis& basis, Qoi qoi, const TrainingSet& data);

// training_set + pce_fit_data; n_train 0 means oversample 2x the basis size.
PcSurrogate pce_fit(PriorModel model, const HyperRanges& r, Qoi qoi, std::uint64_t seed,
                    const SolverConfig& cfg = {}, std::size_t n_train = 0,
                    const std::array<int, 4>& order = {4, 4, 4, 4});

// Variance of the surrogate response under uniform Z: the orthonormal basis
// makes it the sum of squared non-constant coefficients.
double surrogate_variance(const PcSurrogate& s);

// First-order Sobol' indices over the Z coordinates: variance carried by
// terms supported on a single axis over the total non-constant variance.
// This attributes to inputs directly only when the prior is independent.
// Throws ZeroVarianceError when every non-constant coefficient vanishes.
std::array<double, 4> sobol_first_order(const PcSurrogate& s);

// Versioned flat text with basis spec, multi-indices and full-precision
// coefficients; read_surrogate inverts write_surrogate exactly.
void write_surrogate(std::ostream& os, const PcSurrogate& s);
PcSurrogate read_surrogate(std::istream& is);  // throws IoError on malformed input

// Schema: term,a1,a2,a3,a4,coeff
void write_coefficients_csv(std::ostream& os, const PcSurrogate& s);

}  // namespace poreuq
