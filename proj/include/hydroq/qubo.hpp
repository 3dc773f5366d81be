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
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "hydroq/darcy.hpp"
#include "hydroq/errors.hpp"

namespace hydroq {

using Assignment = std::vector<std::uint8_t>;

/// Sparse QUBO: offset + sum a_i x_i + sum_{i<j} b_ij x_i x_j over x in {0,1}^n.
/// Quadratic keys are kept in (i < j) canonical order; exact-zero coefficients
/// are dropped on insertion.
struct Qubo {
    int n = 0;
    double offset = 0.0;
    std::map<int, double> linear;
    std::map<std::pair<int, int>, double> quadratic;

    void add_linear(int i, double c) {
        if (c == 0.0) return;
        auto [it, fresh] = linear.try_emplace(i, c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0.0) linear.erase(it);
        }
    }

    void add_quadratic(int i, int j, double c) {
        if (c == 0.0) return;
        if (i == j) throw parameter_error("Qubo: self-pair quadratic term");
        if (i > j) std::swap(i, j);
        auto [it, fresh] = quadratic.try_emplace({i, j}, c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0.0) quadratic.erase(it);
        }
    }

    double linear_at(int i) const {
        auto it = linear.find(i);
        return it == linear.end() ? 0.0 : it->second;
    }

    double quadratic_at(int i, int j) const {
        if (i > j) std::swap(i, j);
        auto it = quadratic.find({i, j});
        return it == quadratic.end() ? 0.0 : it->second;
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (const auto& [i, c] : linear) m = std::max(m, std::abs(c));
        for (const auto& [ij, c] : quadratic) m = std::max(m, std::abs(c));
        return m;
    }

    /// Smallest coefficient magnitude above the numerical-zero floor
    /// (1e-12 x the largest magnitude). Coefficients below the floor are
    /// round-off residue of analytically vanishing terms, not signal.
    double min_abs_nonzero_coeff() const {
        const double floor_mag = 1e-12 * max_abs_coeff();
        double m = 0.0;
        bool any = false;
        for (const auto& [i, c] : linear) {
            if (std::abs(c) <= floor_mag) continue;
            if (!any || std::abs(c) < m) m = std::abs(c);
            any = true;
        }
        for (const auto& [ij, c] : quadratic) {
            if (std::abs(c) <= floor_mag) continue;
            if (!any || std::abs(c) < m) m = std::abs(c);
            any = true;
        }
        return any ? m : 0.0;
    }

    /// max |c| / min nonzero |c|; 1 for empty problems.
    double dynamic_range() const {
        double lo = min_abs_nonzero_coeff();
        return lo > 0.0 ? max_abs_coeff() / lo : 1.0;
    }

    double energy(const Assignment& x) const {
        if (static_cast<int>(x.size()) != n) throw parameter_error("energy: assignment length mismatch");
        double e = offset;
        for (const auto& [i, c] : linear) e += x[i] ? c : 0.0;
        for (const auto& [ij, c] : quadratic) e += (x[ij.first] && x[ij.second]) ? c : 0.0;
        return e;
    }
};

inline double energy(const Qubo& q, const Assignment& x) { return q.energy(x); }

/// 1D inverse QUBO from head differences (the closed form).
///
/// Interior coefficients follow a_i = dh_i(-k_low (dh_{i-1} - 2 dh_i + dh_{i+1})
/// + dk dh_i) and b_i = -dh_i dh_{i+1} dk. End-cell coefficients come from the
/// exact residual-squared expansion (each end cell appears in a single interior
/// node balance), and the constant offset is included so that the energy equals
/// 1/(2 dk) times the sum of squared residuals; the noiseless minimum is then
/// exactly zero at the generating field.
inline Qubo build_qubo_1d(const HeadDifferences& dh, double k_low, double delta_k) {
    if (dh.dims != 1) throw parameter_error("build_qubo_1d: expects 1D differences");
    if (!(delta_k > 0.0)) throw parameter_error("build_qubo_1d: requires delta_k > 0");
    const int n = static_cast<int>(dh.dhx.size());
    if (n < 2) throw parameter_error("build_qubo_1d: need at least 2 cells");

    Qubo q;
    q.n = n;
    const auto& d = dh.dhx;
    const double s = 1.0 / (2.0 * delta_k);
    double offset = 0.0;
    for (int j = 1; j < n; ++j) {  // interior node j sits between cells j-1 and j
        const double cj = k_low * (d[j] - d[j - 1]);
        offset += cj * cj;
        q.add_linear(j, s * (2.0 * cj * delta_k * d[j] + delta_k * delta_k * d[j] * d[j]));
        q.add_linear(j - 1, s * (-2.0 * cj * delta_k * d[j - 1] + delta_k * delta_k * d[j - 1] * d[j - 1]));
        q.add_quadratic(j - 1, j, s * (-2.0 * delta_k * delta_k * d[j] * d[j - 1]));
    }
    q.offset = s * offset;
    return q;
}

/// Residual-squared QUBO for 1D or 2D heads: sum over interior nodes of the
/// squared discrete operator residual, with each link permeability written as
/// k_low + dk q. Energy is >= 0 everywhere and 0 at the generating field when
/// the heads are noiseless.
inline Qubo build_qubo_residual(const HeadField& heads, double k_low, double delta_k,
                                Stencil stencil = Stencil::flux_form) {
    if (!(delta_k > 0.0)) throw parameter_error("build_qubo_residual: requires delta_k > 0");
    Qubo q;
    const double cs = (stencil == Stencil::doubled_center) ? 2.0 : 1.0;

    // Accumulates (alpha + sum beta_v q_v)^2 into the qubo.
    auto accumulate = [&q](double alpha, const std::vector<std::pair<int, double>>& beta) {
        q.offset += alpha * alpha;
        for (std::size_t a = 0; a < beta.size(); ++a) {
            const auto& [v, bv] = beta[a];
            q.add_linear(v, 2.0 * alpha * bv + bv * bv);
            for (std::size_t b = a + 1; b < beta.size(); ++b)
                q.add_quadratic(v, beta[b].first, 2.0 * bv * beta[b].second);
        }
    };

    if (heads.dims == 1) {
        const int n = heads.n;
        if (n < 2) throw parameter_error("build_qubo_residual: no interior nodes");
        q.n = n;
        const double ax = 1.0 / (heads.dx * heads.dx);
        for (int j = 1; j < n; ++j) {
            // residual at node j: k_{j-1}(h_{j-1}-h_j) + k_j(h_{j+1}-h_j) [+ center term]
            const double dl = heads.h[j - 1] - heads.h[j];
            const double dr = heads.h[j + 1] - heads.h[j];
            const double extra = (cs - 1.0) * heads.h[j];  // doubled_center adds (k_l+k_r) h_j
            double alpha = ax * (k_low * (dl - extra) + k_low * (dr - extra));
            std::vector<std::pair<int, double>> beta = {
                {j - 1, ax * delta_k * (dl - extra)},
                {j, ax * delta_k * (dr - extra)},
            };
            accumulate(alpha, beta);
        }
        return q;
    }

    const int N = heads.grid_n;
    if (N < 1) throw parameter_error("build_qubo_residual: no interior nodes");
    q.n = 2 * N * (N + 1);
    const double ax = 1.0 / (heads.dx * heads.dx), ay = 1.0 / (heads.dy * heads.dy);
    const auto x_var = [N](int r, int c) { return r * (N + 1) + c; };
    const auto y_var = [N](int r, int c) { return N * (N + 1) + r * N + c; };
    for (int r = 0; r < N; ++r) {
        for (int c = 0; c < N; ++c) {
            const double hc = heads.at(r, c);
            const double extra = (cs - 1.0) * hc;
            double alpha = 0.0;
            std::vector<std::pair<int, double>> beta;
            auto link = [&](int var, double h_nb, double scale) {
                const double d = (h_nb - hc) - extra;
                alpha += scale * k_low * d;
                beta.emplace_back(var, scale * delta_k * d);
            };
            link(x_var(r, c), c - 1 >= 0 ? heads.at(r, c - 1) : heads.bc_left[r], ax);
            link(x_var(r, c + 1), c + 1 < N ? heads.at(r, c + 1) : heads.bc_right[r], ax);
            if (r - 1 >= 0) link(y_var(r, c), heads.at(r - 1, c), ay);
            if (r + 1 < N) link(y_var(r + 1, c), heads.at(r + 1, c), ay);
            accumulate(alpha, beta);
        }
    }
    return q;
}

struct Solution {
    Assignment x;
    double energy = 0.0;
};

namespace detail {

inline bool lex_less(const Assignment& a, const Assignment& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace detail

/// Exhaustive minimum; ties broken toward the lexicographically smallest
/// assignment (x[0] most significant, 0 before 1). Gray-code enumeration with
/// incremental deltas; candidates are re-evaluated exactly so round-off drift
/// cannot change the winner.
inline Solution brute_force_min(const Qubo& q) {
    if (q.n > 24) throw size_error("brute_force_min: n > 24");
    if (q.n < 0) throw parameter_error("brute_force_min: bad n");
    const int n = q.n;
    if (n == 0) return {{}, q.offset};

    std::vector<double> lin(n, 0.0);
    for (const auto& [i, c] : q.linear) lin[i] = c;
    std::vector<std::vector<std::pair<int, double>>> adj(n);
    for (const auto& [ij, c] : q.quadratic) {
        adj[ij.first].emplace_back(ij.second, c);
        adj[ij.second].emplace_back(ij.first, c);
    }

    Assignment x(n, 0);
    Solution best{x, q.offset};
    double e = q.offset;
    const double scale = std::max(1.0, q.max_abs_coeff() * n + std::abs(q.offset));
    const double eps = 1e-9 * scale;
    const std::uint64_t total = 1ULL << n;
    for (std::uint64_t code = 1; code < total; ++code) {
        const int k = std::countr_zero(code);
        double delta = lin[k];
        for (const auto& [j, c] : adj[k])
            if (x[j]) delta += c;
        e += x[k] ? -delta : delta;
        x[k] ^= 1;
        if ((code & 0xfffULL) == 0) e = q.energy(x);  // periodic resync against drift
        if (e < best.energy + eps) {
            const double exact = q.energy(x);
            e = exact;
            if (exact < best.energy || (exact == best.energy && detail::lex_less(x, best.x))) {
                best.energy = exact;
                best.x = x;
            }
        }
    }
    return best;
}

/// Exact minimum for path-coupled QUBOs (all quadratic keys of the form
/// (i, i+1)) via forward dynamic programming. O(n); same tie rule as
/// brute_force_min. Throws structure_error for non-path couplings.
inline Solution chain_exact_min(const Qubo& q) {
    for (const auto& [ij, c] : q.quadratic)
        if (ij.second != ij.first + 1)
            throw structure_error("chain_exact_min: couplings must form a consecutive-index path");
    const int n = q.n;
    Solution sol;
    if (n == 0) return {{}, q.offset};
    // suffix[i][v] = min over x_i..x_{n-1} with x_i = v of the suffix terms
    std::vector<std::array<double, 2>> suffix(n);
    suffix[n - 1] = {0.0, q.linear_at(n - 1)};
    for (int i = n - 2; i >= 0; --i) {
        const double b = q.quadratic_at(i, i + 1);
        for (int v = 0; v <= 1; ++v) {
            const double e0 = suffix[i + 1][0];
            const double e1 = b * v + suffix[i + 1][1];
            suffix[i][v] = q.linear_at(i) * v + std::min(e0, e1);
        }
    }
    sol.x.assign(n, 0);
    sol.x[0] = (suffix[0][0] <= suffix[0][1]) ? 0 : 1;
    for (int i = 0; i + 1 < n; ++i) {
        const double b = q.quadratic_at(i, i + 1);
        const double e0 = suffix[i + 1][0];
        const double e1 = b * sol.x[i] + suffix[i + 1][1];
        sol.x[i + 1] = (e0 <= e1) ? 0 : 1;
    }
    sol.energy = q.energy(sol.x);
    return sol;
}

/// Maps a binary assignment back onto a permeability field with the template's
/// geometry: k_i = k_low + x_i * dk.
inline PermeabilityField decode_permeability(const Assignment& x, const PermeabilityField& tmpl) {
    if (x.size() != tmpl.q.size()) throw parameter_error("decode_permeability: length mismatch");
    PermeabilityField out = tmpl;
    out.q = x;
    return out;
}

/// Fraction of cells where the two fields agree.
inline double accuracy(const PermeabilityField& estimate, const PermeabilityField& truth) {
    if (estimate.q.size() != truth.q.size() || estimate.dims != truth.dims)
        throw parameter_error("accuracy: shape mismatch");
    if (truth.q.empty()) throw parameter_error("accuracy: empty fields");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.q.size(); ++i)
        if (estimate.q[i] == truth.q[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(truth.q.size());
}

/// Sorted coefficient magnitudes of a QUBO; the diagnostic behind the
/// cutoff/bifurcation discussion.
struct SpectrumReport {
    std::vector<double> magnitudes;  // descending, nonzero entries only
    double dynamic_range = 1.0;
    std::map<int, std::size_t> decade_counts;  // floor(log10 |c|) -> count
    bool empty() const { return magnitudes.empty(); }
};

inline SpectrumReport coefficient_spectrum(const Qubo& q) {
    SpectrumReport r;
    const double floor_mag = 1e-12 * q.max_abs_coeff();
    for (const auto& [i, c] : q.linear)
        if (std::abs(c) > floor_mag) r.magnitudes.push_back(std::abs(c));
    for (const auto& [ij, c] : q.quadratic)
        if (std::abs(c) > floor_mag) r.magnitudes.push_back(std::abs(c));
    std::sort(r.magnitudes.begin(), r.magnitudes.end(), std::greater<double>());
    if (r.magnitudes.empty()) return r;  // all-zero marker: empty()
    r.dynamic_range = r.magnitudes.front() / r.magnitudes.back();
    for (double m : r.magnitudes) ++r.decade_counts[static_cast<int>(std::floor(std::log10(m)))];
    return r;
}

}  // namespace hydroq
