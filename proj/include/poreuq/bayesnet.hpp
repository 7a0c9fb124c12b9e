#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "poreuq/errors.hpp"
#include "poreuq/geometry.hpp"

namespace poreuq {

// Prior over (R, theta, d, l).
//  p0: independent uniforms on the hyper-ranges
//  p1: causal chain, d conditioned on (R, theta), l conditioned on (R, d)
//  p2: causal chain, l uniform, d conditioned on (R, theta, l)
enum class PriorModel { p0, p1, p2 };

std::string_view to_string(PriorModel m);
PriorModel prior_model_from_string(std::string_view s);  // throws ConfigError

enum class Param : int { R = 0, theta = 1, d = 2, l = 3 };
inline constexpr std::array<std::string_view, 4> param_names{"R", "theta", "d", "l"};

double get(const PoreParams& p, Param t) noexcept;

// Axis-aligned box of admissible hyper-parameters, indexed by Param.
struct HyperRanges {
    std::array<double, 4> lo;
    std::array<double, 4> hi;
};

HyperRanges narrow_ranges();    // tight industrially relevant intervals
HyperRanges physical_ranges();  // wide physically admissible intervals

using ZVec = std::array<double, 4>;

// Inverse Rosenblatt transform: maps a unit-cube point through the
// conditional-CDF chain of the prior. Throws EmptySupportError when a
// conditional interval collapses.
PoreParams rosenblatt_inverse(PriorModel model, const HyperRanges& r, const ZVec& z);

// Forward Rosenblatt transform, the exact inverse of the above. Throws
// OutOfSupportError if any conditional CDF argument leaves its interval.
ZVec rosenblatt_forward(PriorModel model, const HyperRanges& r, const PoreParams& p);

// True when the prior's marginal for t is uniform on [lo, hi] (roots of the
// causal chain); conditioned parameters have no closed-form marginal here.
bool has_uniform_marginal(PriorModel model, Param t) noexcept;

// Exact marginal density of a root parameter (0 outside the range).
// Throws std::invalid_argument for conditioned parameters.
double uniform_marginal_density(PriorModel model, const HyperRanges& r, Param t, double x);

struct SampleBatch {
    PriorModel model = PriorModel::p1;
    HyperRanges ranges{};
    std::uint64_t seed = 0;
    std::vector<ZVec> z;
    std::vector<PoreParams> params;
    std::vector<std::uint8_t> valid;  // feasibility flag per row

    std::size_t size() const noexcept { return params.size(); }
    std::vector<double> column(Param t) const;
};

// Deterministic batch sampling: row i depends only on (seed, i), so the
// result is identical for any thread count. p0 may produce infeasible
// tuples; they are flagged and a one-line warning goes to stderr.
SampleBatch sample_parameters(PriorModel model, const HyperRanges& r, std::size_t n,
                              std::uint64_t seed);

// Pearson correlation of the four parameter columns across all rows.
// Throws DegenerateSampleError on fewer than two rows or zero variance.
std::array<std::array<double, 4>, 4> empirical_correlation(const SampleBatch& batch);

// Schema: index,z1,z2,z3,z4,R,theta,d,l,valid
void write_samples_csv(std::ostream& os, const SampleBatch& batch);
SampleBatch read_samples_csv(std::istream& is);  // throws IoError on malformed input

}  // namespace poreuq
