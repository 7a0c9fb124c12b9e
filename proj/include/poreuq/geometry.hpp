#pragma once

#include <cstdint>
#include <vector>

#include "poreuq/errors.hpp"

namespace poreuq {

// Pore-scale geometry parameters. Lengths in nanometres, angle in radians.
struct PoreParams {
    double R;      // mesopore radius
    double theta;  // clip half-angle of the mesopore at the lateral cell faces
    double d;      // nanotube diameter
    double l;      // nanotube length
};

// Throws ConstraintError unless R > 0, 0 < theta < pi/2, d > 0, l > 0,
// d < 2R cos(theta) and l > 2R - sqrt(4R^2 - d^2).
void validate(const PoreParams& p);
bool is_valid(const PoreParams& p) noexcept;

struct CellDims {
    double a;  // half-width, cell is [-a, a] x [0, b]
    double b;  // height
};

// a = R cos(theta), b = 2R sqrt(1 - d^2/(4R^2)) + l.
// Throws std::domain_error if d >= 2R.
CellDims cell_dimensions(const PoreParams& p);

// Upper bound on d given (R, theta): d < 2R cos(theta).
double nanotube_diameter_bound(double R, double theta);

// Lower bound on l given (R, d): l > 2R - sqrt(4R^2 - d^2).
// Throws std::domain_error if d > 2R.
double nanotube_length_bound(double R, double d);

// Upper bound on d given (R, l): d < sqrt(4 l R - l^2), valid for 0 < l < 4R
// (the gap constraint rearranged; it only binds for l < 2R).
// Throws std::domain_error outside 0 < l < 4R.
double goiter_diameter_bound(double R, double l);

// Exact membership test for the pore region: two mesopore half-disks centred
// at (0, 0) and (0, b), clipped to |x| <= a, joined by the nanotube slab
// |x| <= d/2, m <= y <= b - m with m = sqrt(R^2 - d^2/4).
bool in_pore(const PoreParams& p, double x, double y) noexcept;

// Cell-centred rasterisation of the pore region.
struct PoreMask {
    int nx = 0, ny = 0;
    double hx = 0, hy = 0;   // cell sizes
    double x0 = 0, y0 = 0;   // lower-left corner of the domain
    std::vector<std::uint8_t> fluid;  // row-major, nx * ny
    double porosity = 0;             // fluid-cell fraction
    double interface_length = 0;     // analytic, not stair-step

    bool is_fluid(int i, int j) const noexcept {
        return fluid[static_cast<std::size_t>(j) * nx + i] != 0;
    }
    double cx(int i) const noexcept { return x0 + (i + 0.5) * hx; }
    double cy(int j) const noexcept { return y0 + (j + 0.5) * hy; }
    double domain_area() const noexcept { return nx * hx * ny * hy; }
};

// Rasterise on a resolution x resolution grid over [-a, a] x [0, b].
// Throws std::invalid_argument if resolution < 16.
PoreMask rasterize_pore(const PoreParams& p, int resolution);

// Closed-form area/perimeter quantities of the pore region.
struct GeometricEffectives {
    double pore_area;         // |Y_f|
    double interface_length;  // |Gamma|, solid-fluid interface only
    double porosity;          // |Y_f| / (2ab)
    double geff;              // |Gamma| / |Y_f|
};

GeometricEffectives geometric_effectives(const PoreParams& p);

}  // namespace poreuq
