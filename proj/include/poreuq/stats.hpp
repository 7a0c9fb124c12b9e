#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace poreuq {

// Point sample in 1 or 2 dimensions, row-major.
struct PointSet {
    std::size_t dim = 1;
    std::vector<double> flat;  // size = count * dim

    std::size_t size() const noexcept { return dim ? flat.size() / dim : 0; }
};

PointSet as_points(const std::vector<double>& xs);
PointSet as_points(const std::vector<std::array<double, 2>>& xs);

// Two-sample Cramer distance statistic
//   T = m n/(m+n) [ 2/(m n) sum phi(|x_i-y_j|^2)
//                   - 1/m^2 sum phi(|x_i-x_j|^2) - 1/n^2 sum phi(|y_i-y_j|^2) ]
// with kernel phi(z) = sqrt(z)/2, i.e. half the Euclidean distance. Identical
// multisets give exactly zero. Throws std::invalid_argument on dimension
// mismatch and DegenerateSampleError when either sample has fewer than two
// points.
double cramer_statistic(const PointSet& x, const PointSet& y);
double cramer_statistic(const std::vector<double>& x, const std::vector<double>& y);

struct CramerResult {
    double statistic = 0;
    double critical_value = 0;  // permutation quantile matching the decision rule
    double p_value = 1;
    double confidence = 0.95;
    bool reject = false;
    std::size_t B = 1000;  // permutation replicates
};

// Permutation test on the pooled sample: p = (1 + #{T_b >= T})/(B + 1), and
// the critical value is chosen so that reject == (statistic > critical_value)
// == (p_value < 1 - confidence) holds exactly, ties included. Deterministic
// per seed and independent of the worker count. Distances are stored as a
// pooled float matrix; all accumulation is in double. Requires B >= 200 and
// confidence in (0, 1).
CramerResult cramer_test(const PointSet& x, const PointSet& y, double confidence = 0.95,
                         std::size_t B = 1000, std::uint64_t seed = 0);
CramerResult cramer_test(const std::vector<double>& x, const std::vector<double>& y,
                         double confidence = 0.95, std::size_t B = 1000, std::uint64_t seed = 0);

struct CramerRow {
    std::string variable;
    CramerResult result;
    std::uint64_t seed = 0;
};

// cramer.csv: variable,statistic,critical_value,confidence,p_value,decision,B,seed
void write_cramer_csv(std::ostream& os, const std::vector<CramerRow>& rows);

}  // namespace poreuq
