#include "poreuq/closure.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace poreuq {

DiffusivityField uniform_diffusivity(const PoreMask& mask, double value) {
    DiffusivityField D;
    D.value.assign(mask.fluid.size(), value);
    return D;
}

DiffusivityField pore_diffusivity(const PoreParams& p, const PoreMask& mask, double tube_ratio) {
    const double m = std::sqrt(p.R * p.R - 0.25 * p.d * p.d);
    const double b = 2.0 * m + p.l;
    DiffusivityField D;
    D.value.assign(mask.fluid.size(), 1.0);
    for (int j = 0; j < mask.ny; ++j)
        for (int i = 0; i < mask.nx; ++i) {
            const double x = mask.cx(i), y = mask.cy(j);
            if (std::abs(x) <= 0.5 * p.d && y >= m && y <= b - m)
                D.value[static_cast<std::size_t>(j) * mask.nx + i] = tube_ratio;
        }
    return D;
}

namespace {

// Five-point stencil over the fluid cells; off-diagonal weights stored
// positive, system is  diag x - sum w x_nb = b  (symmetric).
struct Stencil {
    std::vector<double> diag, w[4];  // E, W, N, S
    std::vector<int> nb[4];          // unknown index or -1
    std::vector<double> b;
    bool has_dirichlet = false;
};

constexpr int KE = 0, KW = 1, KN = 2, KS = 3;

void check_connected(const PoreMask& mask) {
    const int nx = mask.nx, ny = mask.ny;
    std::size_t nfluid = 0;
    for (auto f : mask.fluid) nfluid += f;
    if (nfluid == 0) throw DisconnectedPoreError("solve_closure: mask has no fluid cells");

    std::vector<std::uint8_t> seen(mask.fluid.size(), 0);
    std::vector<int> stack;
    for (std::size_t c = 0; c < mask.fluid.size(); ++c)
        if (mask.fluid[c]) {
            stack.push_back(static_cast<int>(c));
            seen[c] = 1;
            break;
        }
    std::size_t reached = 0;
    while (!stack.empty()) {
        const int c = stack.back();
        stack.pop_back();
        ++reached;
        const int i = c % nx, j = c / nx;
        const int nbs[4][2] = {{i + 1, j}, {i - 1, j}, {i, j + 1}, {i, j - 1}};
        for (const auto& q : nbs) {
            if (q[0] < 0 || q[0] >= nx || q[1] < 0 || q[1] >= ny) continue;
            const std::size_t cc = static_cast<std::size_t>(q[1]) * nx + q[0];
            if (mask.fluid[cc] && !seen[cc]) {
                seen[cc] = 1;
                stack.push_back(static_cast<int>(cc));
            }
        }
    }
    if (reached != nfluid)
        throw DisconnectedPoreError("solve_closure: fluid region is not 4-connected (" +
                                    std::to_string(reached) + " of " + std::to_string(nfluid) +
                                    " cells reachable)");
}

// component: 0 for chi1 (x corrector), 1 for chi2 (y corrector)
Stencil assemble(const PoreMask& mask, const DiffusivityField& D, BoundaryMode mode,
                 const std::vector<int>& umap, std::size_t nunk, int component) {
    const int nx = mask.nx, ny = mask.ny;
    Stencil M;
    M.diag.assign(nunk, 0.0);
    M.b.assign(nunk, 0.0);
    for (int s = 0; s < 4; ++s) {
        M.w[s].assign(nunk, 0.0);
        M.nb[s].assign(nunk, -1);
    }

    // face geometry per direction: area, centre distance, outward normal comp.
    const double area[4] = {mask.hy, mask.hy, mask.hx, mask.hx};
    const double dist[4] = {mask.hx, mask.hx, mask.hy, mask.hy};
    const int di[4] = {1, -1, 0, 0};
    const int dj[4] = {0, 0, 1, -1};
    const double ncomp[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};

    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const std::size_t c = static_cast<std::size_t>(j) * nx + i;
            if (!mask.fluid[c]) continue;
            const int k = umap[c];
            const double Dc = D.value[c];
            for (int s = 0; s < 4; ++s) {
                int ii = i + di[s], jj = j + dj[s];
                bool outside = ii < 0 || ii >= nx || jj < 0 || jj >= ny;
                if (outside && mode == BoundaryMode::periodic) {
                    ii = (ii + nx) % nx;
                    jj = (jj + ny) % ny;
                    outside = false;
                }
                const double n_j = ncomp[s][component];
                if (outside) {
                    // mixed mode: chi1 is pinned on x faces, chi2 on y faces,
                    // the other direction is a symmetry (no-flux) plane.
                    const bool dirichlet = (component == 0) ? (s == KE || s == KW)
                                                            : (s == KN || s == KS);
                    if (dirichlet) {
                        M.diag[k] += 2.0 * area[s] * Dc / dist[s];
                        M.b[k] += area[s] * Dc * n_j;
                        M.has_dirichlet = true;
                    }
                    continue;
                }
                const std::size_t cc = static_cast<std::size_t>(jj) * nx + ii;
                if (mask.fluid[cc]) {
                    const double Dn = D.value[cc];
                    const double Df = 2.0 * Dc * Dn / (Dc + Dn);
                    const double w = area[s] * Df / dist[s];
                    M.diag[k] += w;
                    M.w[s][k] = w;
                    M.nb[s][k] = umap[cc];
                    // carrier part of the conservative flux D*(e_j + grad chi);
                    // cancels pairwise where D is uniform, and supplies the
                    // refraction source where D jumps between fluid cells.
                    M.b[k] += area[s] * Df * n_j;
                }
                // fluid-solid faces carry zero total flux: the interface
                // condition D*n.grad(chi) = -D*n_j is the e_j part exactly.
            }
        }
    return M;
}

void spmv(const Stencil& M, const std::vector<double>& x, std::vector<double>& y) {
    const std::size_t n = x.size();
    for (std::size_t k = 0; k < n; ++k) {
        double v = M.diag[k] * x[k];
        for (int s = 0; s < 4; ++s) {
            const int q = M.nb[s][k];
            if (q >= 0) v -= M.w[s][k] * x[q];
        }
        y[k] = v;
    }
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

void remove_mean(std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    for (double& x : v) x -= m;
}

struct CrResult {
    std::vector<double> x;
    long long iters = 0;
    std::vector<double> history;
};

// Conjugate-residual iteration: each step minimises ||b - Ax|| over the
// Krylov space, so the recorded residual norms are nonincreasing.
CrResult solve_cr(const Stencil& M, bool singular, double tol, long long max_iter) {
    const std::size_t n = M.diag.size();
    CrResult out;
    out.x.assign(n, 0.0);

    std::vector<double> b = M.b;
    if (singular) remove_mean(b);  // enforce compatibility against roundoff
    const double bnorm = std::sqrt(dot(b, b));
    if (bnorm == 0.0) {
        out.history.push_back(0.0);
        return out;
    }
    if (max_iter <= 0) max_iter = 10 * static_cast<long long>(n);

    std::vector<double> r = b, p = b, ar(n), ap(n);
    spmv(M, r, ar);
    ap = ar;
    double rho = dot(r, ar);
    for (long long it = 1; it <= max_iter; ++it) {
        const double apap = dot(ap, ap);
        if (!(apap > 0.0)) break;  // residual reached the null space
        const double alpha = rho / apap;
        for (std::size_t k = 0; k < n; ++k) {
            out.x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        out.iters = it;
        const double res = std::sqrt(dot(r, r)) / bnorm;
        out.history.push_back(res);
        if (res <= tol) {
            if (singular) remove_mean(out.x);
            return out;
        }
        spmv(M, r, ar);
        const double rho_new = dot(r, ar);
        const double beta = rho_new / rho;
        rho = rho_new;
        for (std::size_t k = 0; k < n; ++k) {
            p[k] = r[k] + beta * p[k];
            ap[k] = ar[k] + beta * ap[k];
        }
    }
    throw SolveError("solve_closure: no convergence in " + std::to_string(out.iters) +
                     " iterations (residual " +
                     std::to_string(out.history.empty() ? 1.0 : out.history.back()) + ")");
}

}  // namespace

ClosureSolution solve_closure(const PoreMask& mask, const DiffusivityField& D,
                              const SolverConfig& cfg) {
    if (D.value.size() != mask.fluid.size())
        throw std::invalid_argument("solve_closure: diffusivity field size mismatch");
    check_connected(mask);

    std::vector<int> umap(mask.fluid.size(), -1);
    std::size_t nunk = 0;
    for (std::size_t c = 0; c < mask.fluid.size(); ++c)
        if (mask.fluid[c]) umap[c] = static_cast<int>(nunk++);

    ClosureSolution sol;
    sol.mask = mask;
    sol.D = D;
    sol.boundary = cfg.boundary;
    sol.chi1.assign(mask.fluid.size(), 0.0);
    sol.chi2.assign(mask.fluid.size(), 0.0);

    for (int component = 0; component < 2; ++component) {
        const Stencil M = assemble(mask, D, cfg.boundary, umap, nunk, component);
        const bool singular = !M.has_dirichlet;
        CrResult res = solve_cr(M, singular, cfg.tol, cfg.max_iter);
        auto& chi = (component == 0) ? sol.chi1 : sol.chi2;
        for (std::size_t c = 0; c < mask.fluid.size(); ++c)
            if (umap[c] >= 0) chi[c] = res.x[umap[c]];
        if (component == 0) {
            sol.singular1 = singular;
            sol.iters1 = res.iters;
            sol.residual_history1 = std::move(res.history);
        } else {
            sol.singular2 = singular;
            sol.iters2 = res.iters;
            sol.residual_history2 = std::move(res.history);
        }
    }
    return sol;
}

namespace {

// Ghost value of chi_k across a face of a fluid cell, consistent with the
// boundary condition seen by that face.
double ghost_value(const ClosureSolution& s, const std::vector<double>& chi, int component,
                   int i, int j, int di, int dj, double h) {
    const int nx = s.mask.nx, ny = s.mask.ny;
    const std::size_t c = static_cast<std::size_t>(j) * nx + i;
    int ii = i + di, jj = j + dj;
    bool outside = ii < 0 || ii >= nx || jj < 0 || jj >= ny;
    if (outside && s.boundary == BoundaryMode::periodic) {
        ii = (ii + nx) % nx;
        jj = (jj + ny) % ny;
        outside = false;
    }
    if (!outside) {
        const std::size_t cc = static_cast<std::size_t>(jj) * nx + ii;
        if (s.mask.fluid[cc]) return chi[cc];
        // interface: dchi_k/dn = -n_k with n the outward face normal, so the
        // first-order ghost is chi_c - h n_k regardless of the face axis
        const double n_k = (component == 0) ? static_cast<double>(di) : static_cast<double>(dj);
        return chi[c] - h * n_k;
    }
    const bool dirichlet = (component == 0) ? (dj == 0) : (di == 0);
    return dirichlet ? -chi[c] : chi[c];
}

}  // namespace

EffectiveTensor effective_tensor(const ClosureSolution& s) {
    const PoreMask& mask = s.mask;
    const int nx = mask.nx, ny = mask.ny;
    double t[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const std::size_t c = static_cast<std::size_t>(j) * nx + i;
            if (!mask.fluid[c]) continue;
            const double Dc = s.D.value[c];
            for (int component = 0; component < 2; ++component) {
                const auto& chi = (component == 0) ? s.chi1 : s.chi2;
                const double e = ghost_value(s, chi, component, i, j, 1, 0, mask.hx);
                const double w = ghost_value(s, chi, component, i, j, -1, 0, mask.hx);
                const double nn = ghost_value(s, chi, component, i, j, 0, 1, mask.hy);
                const double ss = ghost_value(s, chi, component, i, j, 0, -1, mask.hy);
                const double gx = (e - w) / (2.0 * mask.hx);
                const double gy = (nn - ss) / (2.0 * mask.hy);
                t[0][component] += Dc * gx;
                t[1][component] += Dc * gy;
                t[component][component] += Dc;  // identity part
            }
        }
    const double scale = mask.hx * mask.hy / mask.domain_area();
    return {t[0][0] * scale, t[0][1] * scale, t[1][0] * scale, t[1][1] * scale};
}

EffectiveProps forward_model(const PoreParams& p, const SolverConfig& cfg) {
    const PoreMask mask = rasterize_pore(p, cfg.resolution);
    const DiffusivityField D = pore_diffusivity(p, mask, cfg.diffusivity_ratio);
    const ClosureSolution sol = solve_closure(mask, D, cfg);
    const EffectiveTensor t = effective_tensor(sol);
    const GeometricEffectives g = geometric_effectives(p);
    return {t.xx, t.yy, g.geff, g.porosity};
}

}  // namespace poreuq
