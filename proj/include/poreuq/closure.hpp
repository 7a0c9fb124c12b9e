#pragma once

#include <cstdint>
#include <vector>

#include "poreuq/geometry.hpp"

namespace poreuq {

// Domain boundary treatment for the two cell problems.
//  mixed:    chi1 = 0 on the lateral faces, no-flux top/bottom;
//            chi2 = 0 on top/bottom, no-flux lateral (matches the unit-cell
//            symmetry planes of the periodic medium)
//  periodic: both directions wrap; solutions pinned to zero mean
enum class BoundaryMode { mixed, periodic };

struct SolverConfig {
    int resolution = 128;
    double tol = 1e-8;              // relative residual target
    double diffusivity_ratio = 1.0; // nanotube diffusivity over mesopore diffusivity
    long long max_iter = 0;         // 0 means 10x the unknown count
    BoundaryMode boundary = BoundaryMode::mixed;
};

// Per-cell diffusivity, meaningful on fluid cells only.
struct DiffusivityField {
    std::vector<double> value;  // row-major, nx * ny
};

DiffusivityField uniform_diffusivity(const PoreMask& mask, double value = 1.0);

// 1 in the mesopores, tube_ratio inside the nanotube slab (|x| <= d/2,
// m <= y <= b - m); the slab test wins on the overlap caps.
DiffusivityField pore_diffusivity(const PoreParams& p, const PoreMask& mask, double tube_ratio);

struct ClosureSolution {
    PoreMask mask;
    DiffusivityField D;
    BoundaryMode boundary = BoundaryMode::mixed;
    std::vector<double> chi1, chi2;  // row-major, zero on solid cells
    bool singular1 = false, singular2 = false;  // pure-Neumann component, mean-zero pinned
    long long iters1 = 0, iters2 = 0;
    std::vector<double> residual_history1, residual_history2;  // ||r||/||b|| per iteration
};

// Solves the two corrector problems div(D grad chi_j) = 0 with interface
// condition n . grad chi_j = -n_j on the fluid-solid faces.
// Throws DisconnectedPoreError if the fluid cells are not 4-connected and
// SolveError if the iteration cap is reached before cfg.tol.
ClosureSolution solve_closure(const PoreMask& mask, const DiffusivityField& D,
                              const SolverConfig& cfg = {});

struct EffectiveTensor {
    double xx, xy, yx, yy;
};

// D_eff = (1/|Y|) integral over the pore of D(xi) (I + grad chi^T),
// midpoint quadrature with one-sided boundary-consistent gradients.
EffectiveTensor effective_tensor(const ClosureSolution& s);

struct EffectiveProps {
    double DL;        // xx entry: transport along the mesopore chain
    double DT;        // yy entry: transport along the nanotube axis
    double geff;      // analytic interface length over pore area
    double porosity;  // analytic pore fraction
};

// Rasterise, solve both correctors, integrate. geff and porosity come from
// the closed-form geometry and do not depend on the resolution.
EffectiveProps forward_model(const PoreParams& p, const SolverConfig& cfg = {});

}  // namespace poreuq
