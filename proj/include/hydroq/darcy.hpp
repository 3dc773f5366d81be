// Copyright 2025 The hydroq authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/IterativeLinearSolvers>

#include "hydroq/errors.hpp"
#include "hydroq/random.hpp"

namespace hydroq {

/// Finite-difference stencil variant for the steady-state Darcy operator.
/// flux_form is the conservative discretization k_i(h_{i+1}-h_i) - k_{i-1}(h_i-h_{i-1});
/// doubled_center doubles the diagonal weight (center coefficient 2(k_i+k_{i-1}))
/// and is kept selectable for comparison. flux_form is the default: it is the
/// variant under which the noiseless inverse QUBO ground state reproduces the
/// generating field (verified by brute force in the test suite).
enum class Stencil { flux_form, doubled_center };

/// Binary permeability field. Cell i has permeability k_low + q[i]*(k_high-k_low).
///
/// 1D: n cells between n+1 head nodes; q has n entries.
/// 2D: an N x N grid of head nodes with anisotropic link permeabilities.
///     x-links kx[r][c] (c = 0..N) sit between nodes (r,c-1) and (r,c), where
///     c = 0 / c = N touch the left/right Dirichlet boundary. y-links ky[r][c]
///     (r = 0..N) sit between nodes (r-1,c) and (r,c); r = 0 and r = N are the
///     no-flow boundary links. q stores the x block (row-major, N*(N+1)) followed
///     by the y block ((N+1)*N), 2N(N+1) entries total.
struct PermeabilityField {
    int dims = 1;
    int n = 0;       // 1D cell count
    int grid_n = 0;  // 2D grid size N
    double k_low = 1.0;
    double k_high = 1.0;
    std::vector<std::uint8_t> q;

    double delta_k() const { return k_high - k_low; }
    std::size_t cell_count() const { return q.size(); }
    double k_at(std::size_t i) const { return k_low + (q[i] ? delta_k() : 0.0); }

    // 2D index helpers
    int x_var(int r, int c) const { return r * (grid_n + 1) + c; }
    int y_var(int r, int c) const { return grid_n * (grid_n + 1) + r * grid_n + c; }
    double kx(int r, int c) const { return k_at(x_var(r, c)); }
    double ky(int r, int c) const { return k_at(y_var(r, c)); }
};

/// Hydraulic heads plus the Dirichlet boundary values they were solved with.
///
/// 1D: h holds all n+1 nodes, boundary nodes included as h.front()/h.back().
/// 2D: h holds the N*N grid nodes row-major; bc_left/bc_right hold the per-row
/// Dirichlet values on the left and right edges (noise perturbs those too).
struct HeadField {
    int dims = 1;
    int n = 0;
    int grid_n = 0;
    double dx = 1.0;
    double dy = 1.0;
    std::vector<double> h;
    std::vector<double> bc_left;
    std::vector<double> bc_right;

    double at(int r, int c) const { return h[static_cast<std::size_t>(r) * grid_n + c]; }
    double& at(int r, int c) { return h[static_cast<std::size_t>(r) * grid_n + c]; }
};

/// Per-link head differences, oriented downstream minus upstream.
/// 1D: dhx[i] = h[i+1] - h[i], one entry per cell.
/// 2D: dhx has shape N x (N+1) (row-major) across x-links, dhy (N+1) x N across
/// y-links; the no-flow boundary y-links carry an exact zero.
struct HeadDifferences {
    int dims = 1;
    int n = 0;
    int grid_n = 0;
    std::vector<double> dhx;
    std::vector<double> dhy;
};

inline PermeabilityField sample_permeability_1d(int n, double k_low, double k_high,
                                                std::uint64_t seed) {
    if (n < 1) throw parameter_error("sample_permeability: n must be >= 1");
    if (!(k_low > 0.0)) throw parameter_error("sample_permeability: requires k_low > 0");
    if (k_high < k_low) throw parameter_error("sample_permeability: requires k_high >= k_low");
    PermeabilityField f;
    f.dims = 1;
    f.n = n;
    f.k_low = k_low;
    f.k_high = k_high;
    f.q.resize(n);
    Rng rng(seed);
    for (auto& qi : f.q) qi = rng.bernoulli_half() ? 1 : 0;
    return f;
}

inline PermeabilityField sample_permeability_2d(int grid_n, double k_low, double k_high,
                                                std::uint64_t seed) {
    if (grid_n < 1) throw parameter_error("sample_permeability: N must be >= 1");
    if (!(k_low > 0.0)) throw parameter_error("sample_permeability: requires k_low > 0");
    if (k_high < k_low) throw parameter_error("sample_permeability: requires k_high >= k_low");
    PermeabilityField f;
    f.dims = 2;
    f.grid_n = grid_n;
    f.k_low = k_low;
    f.k_high = k_high;
    f.q.resize(static_cast<std::size_t>(2) * grid_n * (grid_n + 1));
    Rng rng(seed);
    for (auto& qi : f.q) qi = rng.bernoulli_half() ? 1 : 0;
    return f;
}

namespace detail {

// Thomas tridiagonal solve; diag/lower/upper mutated in place.
inline std::vector<double> solve_tridiagonal(std::vector<double> lower, std::vector<double> diag,
                                             std::vector<double> upper, std::vector<double> rhs) {
    const std::size_t m = diag.size();
    for (std::size_t i = 1; i < m; ++i) {
        if (std::abs(diag[i - 1]) < 1e-300) throw illposed_error("singular tridiagonal system");
        double w = lower[i] / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    std::vector<double> x(m);
    if (std::abs(diag[m - 1]) < 1e-300) throw illposed_error("singular tridiagonal system");
    x[m - 1] = rhs[m - 1] / diag[m - 1];
    for (std::size_t i = m - 1; i-- > 0;) x[i] = (rhs[i] - upper[i] * x[i + 1]) / diag[i];
    return x;
}

}  // namespace detail

/// Solve the steady-state heads for the given field.
///
/// 1D boundary conditions: h_0 = 0, h_n = -n; 2D: h = 0 on the left edge,
/// h = -N on the right edge, no-flow on top and bottom. With flux_form the 1D
/// path uses the exact flux-constancy closed form; doubled_center and 2D go
/// through a linear solve (direct Cholesky up to 64x64, conjugate gradient with
/// a 1e-12 residual target beyond).
inline HeadField solve_heads(const PermeabilityField& field, Stencil stencil = Stencil::flux_form,
                             double dx = 1.0, double dy = 1.0) {
    for (std::size_t i = 0; i < field.cell_count(); ++i)
        if (!(field.k_at(i) > 0.0)) throw parameter_error("solve_heads: permeabilities must be > 0");

    HeadField out;
    out.dims = field.dims;
    out.dx = dx;
    out.dy = dy;

    if (field.dims == 1) {
        const int n = field.n;
        out.n = n;
        const double h0 = 0.0, hn = -static_cast<double>(n);
        out.bc_left = {h0};
        out.bc_right = {hn};
        if (stencil == Stencil::flux_form) {
            // constant flux C = (hn - h0) / sum(1/k_i)
            double inv_sum = 0.0;
            for (int i = 0; i < n; ++i) inv_sum += 1.0 / field.k_at(i);
            const double flux = (hn - h0) / inv_sum;
            out.h.resize(n + 1);
            out.h[0] = h0;
            for (int i = 0; i < n; ++i) out.h[i + 1] = out.h[i] + flux / field.k_at(i);
            out.h[n] = hn;  // clamp round-off at the fixed boundary
        } else {
            // -k_{i-1} h_{i-1} + 2(k_i + k_{i-1}) h_i - k_i h_{i+1} = 0 at interior nodes
            if (n < 2) {
                out.h = {h0, hn};
                return out;
            }
            const int m = n - 1;
            std::vector<double> lower(m, 0.0), diag(m, 0.0), upper(m, 0.0), rhs(m, 0.0);
            for (int i = 1; i <= m; ++i) {
                const double kl = field.k_at(i - 1), kr = field.k_at(i);
                diag[i - 1] = 2.0 * (kl + kr);
                if (i - 1 >= 1) lower[i - 1] = -kl;
                else rhs[i - 1] += kl * h0;
                if (i + 1 <= m) upper[i - 1] = -kr;
                else rhs[i - 1] += kr * hn;
            }
            auto interior = detail::solve_tridiagonal(lower, diag, upper, rhs);
            out.h.resize(n + 1);
            out.h[0] = h0;
            for (int i = 0; i < m; ++i) out.h[i + 1] = interior[i];
            out.h[n] = hn;
        }
        return out;
    }

    // 2D
    const int N = field.grid_n;
    out.grid_n = N;
    out.bc_left.assign(N, 0.0);
    out.bc_right.assign(N, -static_cast<double>(N));
    const double ax = 1.0 / (dx * dx), ay = 1.0 / (dy * dy);
    const auto idx = [N](int r, int c) { return r * N + c; };

    using Trip = Eigen::Triplet<double>;
    std::vector<Trip> trips;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N) * N);
    const double center_scale = (stencil == Stencil::doubled_center) ? 2.0 : 1.0;
    for (int r = 0; r < N; ++r) {
        for (int c = 0; c < N; ++c) {
            const int i = idx(r, c);
            double diag = 0.0;
            // left / right x-links (Dirichlet columns beyond the grid)
            {
                const double k = ax * field.kx(r, c);
                diag += k;
                if (c - 1 >= 0) trips.emplace_back(i, idx(r, c - 1), -k);
                else rhs[i] += k * out.bc_left[r];
            }
            {
                const double k = ax * field.kx(r, c + 1);
                diag += k;
                if (c + 1 < N) trips.emplace_back(i, idx(r, c + 1), -k);
                else rhs[i] += k * out.bc_right[r];
            }
            // north / south y-links; boundary y-links are no-flow and drop out
            if (r - 1 >= 0) {
                const double k = ay * field.ky(r, c);
                diag += k;
                trips.emplace_back(i, idx(r - 1, c), -k);
            }
            if (r + 1 < N) {
                const double k = ay * field.ky(r + 1, c);
                diag += k;
                trips.emplace_back(i, idx(r + 1, c), -k);
            }
            trips.emplace_back(i, i, center_scale * diag);
        }
    }
    Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(N) * N, static_cast<Eigen::Index>(N) * N);
    A.setFromTriplets(trips.begin(), trips.end());

    Eigen::VectorXd sol;
    if (N <= 64) {
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
        if (solver.info() != Eigen::Success) throw illposed_error("solve_heads: factorization failed");
        sol = solver.solve(rhs);
    } else {
        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg(A);
        cg.setTolerance(1e-12);
        cg.setMaxIterations(200000);
        sol = cg.solve(rhs);
        if (cg.info() != Eigen::Success) throw illposed_error("solve_heads: CG did not converge");
    }
    out.h.assign(sol.data(), sol.data() + sol.size());
    return out;
}

inline HeadDifferences head_differences(const HeadField& heads) {
    HeadDifferences d;
    d.dims = heads.dims;
    if (heads.dims == 1) {
        d.n = heads.n;
        d.dhx.resize(heads.n);
        for (int i = 0; i < heads.n; ++i) d.dhx[i] = heads.h[i + 1] - heads.h[i];
        return d;
    }
    const int N = heads.grid_n;
    d.grid_n = N;
    d.dhx.resize(static_cast<std::size_t>(N) * (N + 1));
    d.dhy.assign(static_cast<std::size_t>(N + 1) * N, 0.0);
    for (int r = 0; r < N; ++r) {
        for (int c = 0; c <= N; ++c) {
            const double up = (c - 1 >= 0) ? heads.at(r, c - 1) : heads.bc_left[r];
            const double dn = (c < N) ? heads.at(r, c) : heads.bc_right[r];
            d.dhx[static_cast<std::size_t>(r) * (N + 1) + c] = dn - up;
        }
    }
    for (int r = 1; r < N; ++r)
        for (int c = 0; c < N; ++c)
            d.dhy[static_cast<std::size_t>(r) * N + c] = heads.at(r, c) - heads.at(r - 1, c);
    return d;
}

/// The two head-difference levels of a noiseless binary 1D instance.
/// n1 counts low-permeability cells, n2 high-permeability cells. Validated
/// against solve_heads: the drop across a low cell is -n*k_high/D and across a
/// high cell -n*k_low/D with D = n1*k_high + n2*k_low.
struct DeltaHLevels {
    double dh_low;   // across a k_low cell (the large drop)
    double dh_high;  // across a k_high cell (the small drop)
};

inline DeltaHLevels analytic_delta_h(int n, int n1, int n2, double k_low, double k_high) {
    if (n1 + n2 != n || n1 < 0 || n2 < 0 || n < 1)
        throw parameter_error("analytic_delta_h: need n = n1 + n2, counts >= 0, n >= 1");
    const double denom = n1 * k_high + n2 * k_low;
    return {-n * k_high / denom, -n * k_low / denom};
}

/// Adds i.i.d. N(0, sigma) to every head value, boundary nodes included.
inline HeadField add_observation_noise(const HeadField& heads, double sigma, std::uint64_t seed) {
    if (sigma < 0.0) throw parameter_error("add_observation_noise: sigma must be >= 0");
    HeadField out = heads;
    if (sigma == 0.0) return out;
    Rng rng(seed);
    for (auto& v : out.h) v += rng.normal(0.0, sigma);
    if (out.dims == 2) {
        for (auto& v : out.bc_left) v += rng.normal(0.0, sigma);
        for (auto& v : out.bc_right) v += rng.normal(0.0, sigma);
    }
    // 1D boundary nodes live inside h and were perturbed above
    return out;
}

/// Max |interior residual| of the discrete operator; the conservation check
/// used by tests and the solver contract.
inline double max_interior_residual(const PermeabilityField& field, const HeadField& heads,
                                    Stencil stencil = Stencil::flux_form) {
    const double cs = (stencil == Stencil::doubled_center) ? 2.0 : 1.0;
    double worst = 0.0;
    if (field.dims == 1) {
        const double ax = 1.0 / (heads.dx * heads.dx);
        for (int i = 1; i < field.n; ++i) {
            const double kl = field.k_at(i - 1), kr = field.k_at(i);
            double r = ax * (-kl * heads.h[i - 1] + cs * (kl + kr) * heads.h[i] - kr * heads.h[i + 1]);
            worst = std::max(worst, std::abs(r));
        }
        return worst;
    }
    const int N = field.grid_n;
    const double ax = 1.0 / (heads.dx * heads.dx), ay = 1.0 / (heads.dy * heads.dy);
    for (int r = 0; r < N; ++r) {
        for (int c = 0; c < N; ++c) {
            const double hc = heads.at(r, c);
            double flux = 0.0, diag = 0.0;
            const double hl = (c - 1 >= 0) ? heads.at(r, c - 1) : heads.bc_left[r];
            flux += ax * field.kx(r, c) * hl;
            diag += ax * field.kx(r, c);
            const double hr = (c + 1 < N) ? heads.at(r, c + 1) : heads.bc_right[r];
            flux += ax * field.kx(r, c + 1) * hr;
            diag += ax * field.kx(r, c + 1);
            if (r - 1 >= 0) {
                flux += ay * field.ky(r, c) * heads.at(r - 1, c);
                diag += ay * field.ky(r, c);
            }
            if (r + 1 < N) {
                flux += ay * field.ky(r + 1, c) * heads.at(r + 1, c);
                diag += ay * field.ky(r + 1, c);
            }
            worst = std::max(worst, std::abs(cs * diag * hc - flux));
        }
    }
    return worst;
}

}  // namespace hydroq
