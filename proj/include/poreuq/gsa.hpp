#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "poreuq/bayesnet.hpp"
#include "poreuq/surrogate.hpp"

namespace poreuq {

// Source of the exact-marginal factor in the density ratio.
//  auto_mode: exact uniform for chain-root parameters, KDE otherwise
//  uniform:   exact uniform density on [uniform_lo, uniform_hi]
//  kde:       1-D KDE sharing the joint estimate's bandwidth
enum class MarginalMode { auto_mode, uniform, kde };

struct MiConfig {
    int grid = 128;            // joint KDE grid, per axis
    std::size_t m_mc = 10000;  // Monte Carlo evaluation draws
    std::uint64_t seed = 0;
    bool joint_eval = false;  // evaluate at joint pairs instead of the product measure
    MarginalMode marginal = MarginalMode::kde;
    double uniform_lo = 0, uniform_hi = 1;  // used by MarginalMode::uniform
};

struct MiEstimate {
    std::string param, qoi;  // report labels
    double S_hat = 0;        // nats
    double std_error = 0;
    std::size_t m_mc = 0;
    std::vector<std::size_t> trace_m;  // running-mean checkpoints (ascending, last = m_mc)
    std::vector<double> trace;         // running means; trace.back() equals S_hat
    double out_of_grid_fraction = 0;   // evaluation points outside the joint grid
    bool converged = true;             // last-decile drift within 2 std errors
    double h_qoi = 0, h_param = 0;     // bandwidths used by the plug-in densities
};

// Plug-in mutual information of two paired sample columns, in nats: kernel
// density estimates of the joint and the marginals on a padded grid, then a
// Monte Carlo average of rho*log(rho) over the product of the empirical
// marginals (or the joint pairs when cfg.joint_eval). Zero densities follow
// the 0*log(0) = 0 convention. auto_mode is resolved by mi_index and is
// rejected here. Warns on stderr when the trace drifts by more than two
// standard errors over its last decile.
MiEstimate mutual_information(const std::vector<double>& qoi_samples,
                              const std::vector<double>& param_samples, const MiConfig& cfg);

struct GsaConfig {
    std::size_t n_kde = 1000000;  // joint sample size behind the KDEs
    std::size_t m_mc = 10000;
    int grid = 128;
    std::uint64_t seed = 0;
    bool joint_eval = false;
    MarginalMode marginal = MarginalMode::auto_mode;
};

// Shared evaluation sample for one prior, drawn on the kde stream. Rows are
// used as-is; the independent prior may contain flagged infeasible tuples.
SampleBatch gsa_sample(PriorModel model, const HyperRanges& r, std::size_t n_kde,
                       std::uint64_t seed);

// Surrogate responses over the batch designs, row for row.
std::vector<double> qoi_column(const PcSurrogate& s, const SampleBatch& batch);

// Mutual-information sensitivity of the surrogate QoI to one parameter.
// The overload without a batch draws n_kde samples itself; the overload with
// a precomputed column must get qoi_column(s, batch) for the same batch.
MiEstimate mi_index(const PcSurrogate& s, const SampleBatch& batch, Param param,
                    const GsaConfig& cfg);
MiEstimate mi_index(const PcSurrogate& s, const SampleBatch& batch,
                    const std::vector<double>& qoi_col, Param param, const GsaConfig& cfg);
MiEstimate mi_index(const PcSurrogate& s, PriorModel model, const HyperRanges& r, Param param,
                    const GsaConfig& cfg);

// Normalized effect shares for one QoI: r = S / sum(S) with tiny negative
// estimates floored at zero, error bars from +-2 std errors of each index
// against the floored total (err_low clamped so share - err_low >= 0).
struct RankingRow {
    std::string qoi;
    std::vector<std::string> param;  // input order preserved
    std::vector<double> share;       // sums to 1 within 1e-9
    std::vector<double> err_low, err_high;
};

// Requires at least two estimates, all for the same QoI. Throws
// ZeroVarianceError when every floored index is zero.
RankingRow rank_effects(const std::vector<MiEstimate>& estimates);

// mi.csv: param,qoi,S_hat,std_error,r_hat,r_err_low,r_err_high,n_kde,m_mc,seed.
// Ranking columns are matched by (param, qoi); estimates without a matching
// ranking row get empty ranking fields.
void write_mi_csv(std::ostream& os, const std::vector<MiEstimate>& estimates,
                  const std::vector<RankingRow>& rankings, std::size_t n_kde,
                  std::uint64_t seed);

// trace.csv: param,qoi,m,running_mean with one block per estimate.
void write_trace_csv(std::ostream& os, const std::vector<MiEstimate>& estimates);

}  // namespace poreuq
