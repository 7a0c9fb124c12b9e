#include "poreuq/geometry.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace poreuq {

namespace {

std::string fmt_params(const PoreParams& p) {
    return "(R=" + std::to_string(p.R) + ", theta=" + std::to_string(p.theta) +
           ", d=" + std::to_string(p.d) + ", l=" + std::to_string(p.l) + ")";
}

}  // namespace

void validate(const PoreParams& p) {
    if (!(p.R > 0.0))
        throw ConstraintError("validate: R must be positive " + fmt_params(p));
    if (!(p.theta > 0.0 && p.theta < 0.5 * std::numbers::pi))
        throw ConstraintError("validate: theta must lie in (0, pi/2) " + fmt_params(p));
    if (!(p.d > 0.0))
        throw ConstraintError("validate: d must be positive " + fmt_params(p));
    if (!(p.l > 0.0))
        throw ConstraintError("validate: l must be positive " + fmt_params(p));
    if (!(p.d < 2.0 * p.R * std::cos(p.theta)))
        throw ConstraintError("validate: nanotube wider than the mesopore mouth, need d < 2R cos(theta) " +
                              fmt_params(p));
    if (!(p.l > 2.0 * p.R - std::sqrt(4.0 * p.R * p.R - p.d * p.d)))
        throw ConstraintError("validate: nanotube shorter than the mesopore overlap, need l > 2R - sqrt(4R^2 - d^2) " +
                              fmt_params(p));
}

bool is_valid(const PoreParams& p) noexcept {
    return p.R > 0.0 && p.theta > 0.0 && p.theta < 0.5 * std::numbers::pi && p.d > 0.0 &&
           p.l > 0.0 && p.d < 2.0 * p.R * std::cos(p.theta) &&
           p.l > 2.0 * p.R - std::sqrt(4.0 * p.R * p.R - p.d * p.d);
}

CellDims cell_dimensions(const PoreParams& p) {
    if (p.d >= 2.0 * p.R)
        throw std::domain_error("cell_dimensions: d >= 2R " + fmt_params(p));
    const double a = p.R * std::cos(p.theta);
    const double b = 2.0 * p.R * std::sqrt(1.0 - p.d * p.d / (4.0 * p.R * p.R)) + p.l;
    return {a, b};
}

double nanotube_diameter_bound(double R, double theta) {
    return 2.0 * R * std::cos(theta);
}

double nanotube_length_bound(double R, double d) {
    if (d > 2.0 * R)
        throw std::domain_error("nanotube_length_bound: d > 2R (R=" + std::to_string(R) +
                                ", d=" + std::to_string(d) + ")");
    return 2.0 * R - std::sqrt(4.0 * R * R - d * d);
}

double goiter_diameter_bound(double R, double l) {
    if (!(l > 0.0 && l < 4.0 * R))
        throw std::domain_error("goiter_diameter_bound: need 0 < l < 4R (R=" + std::to_string(R) +
                                ", l=" + std::to_string(l) + ")");
    return std::sqrt(4.0 * l * R - l * l);
}

bool in_pore(const PoreParams& p, double x, double y) noexcept {
    const double R2 = p.R * p.R;
    const double m = std::sqrt(R2 - 0.25 * p.d * p.d);  // nanotube mouth height
    const double b = 2.0 * m + p.l;
    if (x * x + y * y <= R2) return true;
    const double dy = y - b;
    if (x * x + dy * dy <= R2) return true;
    return std::abs(x) <= 0.5 * p.d && y >= m && y <= b - m;
}

PoreMask rasterize_pore(const PoreParams& p, int resolution) {
    validate(p);
    if (resolution < 16)
        throw std::invalid_argument("rasterize_pore: resolution must be >= 16, got " +
                                    std::to_string(resolution));
    const auto [a, b] = cell_dimensions(p);
    PoreMask mask;
    mask.nx = resolution;
    mask.ny = resolution;
    mask.x0 = -a;
    mask.y0 = 0.0;
    mask.hx = 2.0 * a / resolution;
    mask.hy = b / resolution;
    mask.fluid.assign(static_cast<std::size_t>(resolution) * resolution, 0);

    std::size_t count = 0;
    for (int j = 0; j < resolution; ++j) {
        const double y = mask.cy(j);
        for (int i = 0; i < resolution; ++i) {
            if (in_pore(p, mask.cx(i), y)) {
                mask.fluid[static_cast<std::size_t>(j) * resolution + i] = 1;
                ++count;
            }
        }
    }
    mask.porosity = static_cast<double>(count) / (static_cast<double>(resolution) * resolution);
    mask.interface_length = geometric_effectives(p).interface_length;
    return mask;
}

GeometricEffectives geometric_effectives(const PoreParams& p) {
    validate(p);
    const double R = p.R, R2 = R * R;
    const double alpha = std::asin(0.5 * p.d / R);  // half-angle subtended by the tube mouth
    const auto [a, b] = cell_dimensions(p);

    // Half-disk clipped at |x| = a loses two half-segments of total area
    // R^2 (theta - sin theta cos theta); each tube mouth removes a cap of
    // area R^2 (alpha - sin alpha cos alpha). The tube slab contributes d*l.
    const double clip = R2 * (p.theta - std::sin(p.theta) * std::cos(p.theta));
    const double cap = R2 * (alpha - std::sin(alpha) * std::cos(alpha));
    const double area = std::numbers::pi * R2 - 2.0 * clip - 2.0 * cap + p.d * p.l;

    // d < 2R cos(theta) guarantees theta + alpha < pi/2, so each of the four
    // mesopore arcs (angular extent pi/2 - theta - alpha) has positive length.
    const double arcs = 2.0 * R * (std::numbers::pi - 2.0 * p.theta - 2.0 * alpha);
    const double interface = arcs + 2.0 * p.l;

    GeometricEffectives g;
    g.pore_area = area;
    g.interface_length = interface;
    g.porosity = area / (2.0 * a * b);
    g.geff = interface / area;
    return g;
}

}  // namespace poreuq
