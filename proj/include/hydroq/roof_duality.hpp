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
#include <map>
#include <queue>
#include <vector>

#include "hydroq/errors.hpp"
#include "hydroq/qubo.hpp"

namespace hydroq {

// Literals: variable i appears as 2i (positive) and 2i+1 (negated).
using Literal = int;
inline Literal pos_lit(int var) { return 2 * var; }
inline Literal neg_lit(int var) { return 2 * var + 1; }
inline Literal negate(Literal l) { return l ^ 1; }
inline int lit_var(Literal l) { return l >> 1; }
inline bool lit_sign(Literal l) { return (l & 1) == 0; }  // true for positive

/// Quadratic posiform: constant + sum c_u u + sum c_uv u v with all c >= 0,
/// literals u, v over {x_i, !x_i}. Evaluates identically to the source QUBO.
struct Posiform {
    int n_vars = 0;
    double constant = 0.0;
    std::vector<std::pair<Literal, double>> unary;
    std::vector<std::tuple<Literal, Literal, double>> pairwise;

    double value(const Assignment& x) const {
        auto lit_val = [&x](Literal l) { return lit_sign(l) ? x[lit_var(l)] : 1 - x[lit_var(l)]; };
        double v = constant;
        for (const auto& [u, c] : unary) v += c * lit_val(u);
        for (const auto& [u, w, c] : pairwise) v += c * lit_val(u) * lit_val(w);
        return v;
    }
};

inline Posiform to_posiform(const Qubo& q) {
    Posiform p;
    p.n_vars = q.n;
    p.constant = q.offset;
    std::map<int, double> lin(q.linear.begin(), q.linear.end());
    for (const auto& [ij, c] : q.quadratic) {
        const auto [i, j] = ij;
        if (c >= 0.0) {
            p.pairwise.emplace_back(pos_lit(i), pos_lit(j), c);
        } else {
            // c x_i x_j = c x_i + (-c) x_i (1 - x_j)
            lin[i] += c;
            p.pairwise.emplace_back(pos_lit(i), neg_lit(j), -c);
        }
    }
    for (const auto& [i, c] : lin) {
        if (c > 0.0) {
            p.unary.emplace_back(pos_lit(i), c);
        } else if (c < 0.0) {
            p.constant += c;
            p.unary.emplace_back(neg_lit(i), -c);
        }
    }
    return p;
}

namespace detail {

// Dinic max-flow with floating-point capacities; arcs are kept in skew-symmetric
// twin pairs (arc u->v mirrors comp(v)->comp(u)) and the final flow is averaged
// across twins so the residual network is exactly symmetric.
class ImplicationNetwork {
  public:
    explicit ImplicationNetwork(const Posiform& p) : n_(p.n_vars) {
        source_ = 2 * n_;
        sink_ = 2 * n_ + 1;
        head_.assign(2 * n_ + 2, {});
        for (const auto& [u, c] : p.unary) {
            if (c <= 0.0) continue;
            add_twin_pair(source_, negate(u), u, sink_, c / 2.0);
            max_cap_ = std::max(max_cap_, c / 2.0);
        }
        for (const auto& [u, v, c] : p.pairwise) {
            if (c <= 0.0) continue;
            add_twin_pair(u, negate(v), v, negate(u), c / 2.0);
            max_cap_ = std::max(max_cap_, c / 2.0);
        }
        tol_ = 1e-12 * std::max(1.0, max_cap_);
    }

    double max_flow() {
        double flow = 0.0;
        while (bfs_levels()) {
            iter_.assign(head_.size(), 0);
            while (true) {
                double pushed = dfs_push(source_, std::numeric_limits<double>::infinity());
                if (pushed <= tol_) break;
                flow += pushed;
            }
        }
        symmetrize();
        return flow;
    }

    /// Literals reachable from the source in the residual network.
    std::vector<char> residual_reachable_from_source() const {
        std::vector<char> seen(head_.size(), 0);
        std::vector<int> stack = {source_};
        seen[source_] = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (int e : head_[u]) {
                if (residual_[e] > tol_ && !seen[to_[e]]) {
                    seen[to_[e]] = 1;
                    stack.push_back(to_[e]);
                }
            }
        }
        return seen;
    }

    /// Residual adjacency restricted to literal nodes (source/sink excluded).
    std::vector<std::vector<int>> residual_literal_graph() const {
        std::vector<std::vector<int>> adj(2 * n_);
        for (int u = 0; u < 2 * n_; ++u)
            for (int e : head_[u])
                if (residual_[e] > tol_ && to_[e] < 2 * n_) adj[u].push_back(to_[e]);
        return adj;
    }

    int source() const { return source_; }
    int sink() const { return sink_; }
    double tolerance() const { return tol_; }

  private:
    int add_edge(int u, int v, double cap) {
        int id = static_cast<int>(to_.size());
        to_.push_back(v);
        residual_.push_back(cap);
        capacity_.push_back(cap);
        head_[u].push_back(id);
        to_.push_back(u);
        residual_.push_back(0.0);
        capacity_.push_back(0.0);
        head_[v].push_back(id + 1);
        return id;
    }

    void add_twin_pair(int u1, int v1, int u2, int v2, double cap) {
        int a = add_edge(u1, v1, cap);
        int b = add_edge(u2, v2, cap);
        twin_.resize(to_.size(), -1);
        twin_[a] = b;
        twin_[b] = a;
    }

    bool bfs_levels() {
        level_.assign(head_.size(), -1);
        std::queue<int> q;
        q.push(source_);
        level_[source_] = 0;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int e : head_[u]) {
                if (residual_[e] > tol_ && level_[to_[e]] < 0) {
                    level_[to_[e]] = level_[u] + 1;
                    q.push(to_[e]);
                }
            }
        }
        return level_[sink_] >= 0;
    }

    double dfs_push(int u, double limit) {
        if (u == sink_) return limit;
        for (std::size_t& i = iter_[u]; i < head_[u].size(); ++i) {
            int e = head_[u][i];
            int v = to_[e];
            if (residual_[e] > tol_ && level_[v] == level_[u] + 1) {
                double pushed = dfs_push(v, std::min(limit, residual_[e]));
                if (pushed > tol_) {
                    residual_[e] -= pushed;
                    residual_[e ^ 1] += pushed;
                    return pushed;
                }
            }
        }
        return 0.0;
    }

    void symmetrize() {
        for (std::size_t e = 0; e < to_.size(); e += 2) {
            int t = twin_[e];
            if (t < 0 || static_cast<std::size_t>(t) < e) continue;
            double fe = capacity_[e] - residual_[e];
            double ft = capacity_[t] - residual_[t];
            double f = 0.5 * (fe + ft);
            residual_[e] = capacity_[e] - f;
            residual_[e ^ 1] = f;
            residual_[t] = capacity_[t] - f;
            residual_[t ^ 1] = f;
        }
    }

    int n_;
    int source_, sink_;
    double max_cap_ = 0.0;
    double tol_ = 1e-12;
    std::vector<std::vector<int>> head_;
    std::vector<int> to_;
    std::vector<double> residual_;
    std::vector<double> capacity_;
    std::vector<int> twin_;
    std::vector<int> level_;
    std::vector<std::size_t> iter_;
};

// Iterative Tarjan SCC; returns component id per node (ids arbitrary).
inline std::vector<int> strongly_connected_components(const std::vector<std::vector<int>>& adj,
                                                      int& component_count) {
    const int n = static_cast<int>(adj.size());
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
    std::vector<char> on_stack(n, 0);
    std::vector<int> stack;
    int next_index = 0;
    component_count = 0;
    std::vector<std::pair<int, std::size_t>> work;
    for (int root = 0; root < n; ++root) {
        if (index[root] >= 0) continue;
        work.emplace_back(root, 0);
        while (!work.empty()) {
            auto& [u, pi] = work.back();
            if (pi == 0) {
                index[u] = low[u] = next_index++;
                stack.push_back(u);
                on_stack[u] = 1;
            }
            bool descended = false;
            while (pi < adj[u].size()) {
                int v = adj[u][pi++];
                if (index[v] < 0) {
                    work.emplace_back(v, 0);
                    descended = true;
                    break;
                }
                if (on_stack[v]) low[u] = std::min(low[u], index[v]);
            }
            if (descended) continue;
            if (low[u] == index[u]) {
                while (true) {
                    int w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = component_count;
                    if (w == u) break;
                }
                ++component_count;
            }
            int done = u;
            work.pop_back();
            if (!work.empty()) low[work.back().first] = std::min(low[work.back().first], low[done]);
        }
    }
    return comp;
}

}  // namespace detail

/// Which persistency guarantee fix_variables should apply. all_optima fixes
/// only literals reachable from the flow source (they hold in every optimum);
/// some_optimum additionally assigns the remaining strongly-connected
/// components of the residual graph, which is consistent with at least one
/// optimum. Default is some_optimum, matching the behavior the experiments
/// rely on (a noiseless 1D problem fixes completely).
enum class Persistence { all_optima, some_optimum };

/// Substitute fixes into q. Returns a QUBO over the same index space (fixed
/// variables keep their ids but lose all coefficients) plus the constant those
/// fixes contributed; for any completion of the fixes,
/// original energy = returned energy + extra.
inline std::pair<Qubo, double> apply_fixes(const Qubo& q, const std::map<int, int>& fixes) {
    for (const auto& [v, val] : fixes) {
        if (v < 0 || v >= q.n) throw parameter_error("apply_fixes: variable out of range");
        if (val != 0 && val != 1) throw parameter_error("apply_fixes: fix value must be 0 or 1");
    }
    Qubo out;
    out.n = q.n;
    out.offset = q.offset;
    double extra = 0.0;
    for (const auto& [i, c] : q.linear) {
        auto it = fixes.find(i);
        if (it == fixes.end()) out.add_linear(i, c);
        else extra += c * it->second;
    }
    for (const auto& [ij, c] : q.quadratic) {
        const auto [i, j] = ij;
        auto fi = fixes.find(i), fj = fixes.find(j);
        const bool hi = fi != fixes.end(), hj = fj != fixes.end();
        if (hi && hj) extra += c * fi->second * fj->second;
        else if (hi) { if (fi->second) out.add_linear(j, c); }
        else if (hj) { if (fj->second) out.add_linear(i, c); }
        else out.add_quadratic(i, j, c);
    }
    return {out, extra};
}

/// Result of the roof-duality preprocessing pass.
struct FixReport {
    std::map<int, int> fixes;
    Qubo reduced;                // compact QUBO over the unfixed variables
    std::vector<int> free_vars;  // reduced index -> original variable id
    double extra_offset = 0.0;   // original energy = reduced energy + extra_offset
    double roof_dual_bound = 0.0;
    double fixed_fraction = 0.0;
    double dynamic_range_before = 1.0;
    double dynamic_range_after = 1.0;
};

/// Roof-duality variable fixing: posiform -> implication-network max-flow ->
/// residual reachability (all-optima persistencies) -> residual-SCC assignment
/// (some-optimum extension). Variables with no nonzero coefficient are
/// reported free, never fixed. Deterministic for a given QUBO.
inline FixReport fix_variables(const Qubo& q, Persistence mode = Persistence::some_optimum) {
    Posiform p = to_posiform(q);
    detail::ImplicationNetwork net(p);
    const double flow = net.max_flow();

    FixReport report;
    report.roof_dual_bound = p.constant + flow;
    report.dynamic_range_before = q.dynamic_range();

    std::vector<char> touched(q.n, 0);
    for (const auto& [u, c] : p.unary)
        if (c != 0.0) touched[lit_var(u)] = 1;
    for (const auto& [u, v, c] : p.pairwise)
        if (c != 0.0) { touched[lit_var(u)] = 1; touched[lit_var(v)] = 1; }

    const auto reach = net.residual_reachable_from_source();
    for (int i = 0; i < q.n; ++i) {
        const bool pos = reach[pos_lit(i)], neg = reach[neg_lit(i)];
        if (pos && neg) continue;  // numerically degenerate; leave free
        if (pos) report.fixes[i] = 1;
        else if (neg) report.fixes[i] = 0;
    }

    if (mode == Persistence::some_optimum) {
        const auto adj = net.residual_literal_graph();
        int ncomp = 0;
        const auto comp = detail::strongly_connected_components(adj, ncomp);
        // explicit topological positions of the condensation (Kahn)
        std::vector<std::vector<int>> cadj(ncomp);
        std::vector<int> indeg(ncomp, 0);
        for (int u = 0; u < static_cast<int>(adj.size()); ++u)
            for (int v : adj[u])
                if (comp[u] != comp[v]) cadj[comp[u]].push_back(comp[v]);
        for (auto& lst : cadj) {
            std::sort(lst.begin(), lst.end());
            lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
            for (int v : lst) ++indeg[v];
        }
        std::vector<int> topo_pos(ncomp, -1);
        std::vector<int> ready;
        for (int c = 0; c < ncomp; ++c)
            if (indeg[c] == 0) ready.push_back(c);
        int pos_counter = 0;
        while (!ready.empty()) {
            int c = ready.back();
            ready.pop_back();
            topo_pos[c] = pos_counter++;
            for (int v : cadj[c])
                if (--indeg[v] == 0) ready.push_back(v);
        }
        for (int i = 0; i < q.n; ++i) {
            if (!touched[i] || report.fixes.count(i)) continue;
            const int cp = comp[pos_lit(i)], cn = comp[neg_lit(i)];
            if (cp == cn) continue;  // entangled with its own negation; not fixable
            report.fixes[i] = (topo_pos[cp] > topo_pos[cn]) ? 1 : 0;
        }
    }

    auto [respaced, extra] = apply_fixes(q, report.fixes);
    report.extra_offset = extra;
    report.free_vars.reserve(q.n - report.fixes.size());
    std::vector<int> remap(q.n, -1);
    for (int i = 0; i < q.n; ++i) {
        if (report.fixes.count(i)) continue;
        remap[i] = static_cast<int>(report.free_vars.size());
        report.free_vars.push_back(i);
    }
    report.reduced.n = static_cast<int>(report.free_vars.size());
    report.reduced.offset = respaced.offset;
    for (const auto& [i, c] : respaced.linear) report.reduced.add_linear(remap[i], c);
    for (const auto& [ij, c] : respaced.quadratic)
        report.reduced.add_quadratic(remap[ij.first], remap[ij.second], c);
    report.fixed_fraction = q.n > 0 ? static_cast<double>(report.fixes.size()) / q.n : 0.0;
    report.dynamic_range_after = report.reduced.dynamic_range();
    return report;
}

/// Lower bound on the QUBO minimum (constant of the flow-reduced posiform).
/// Tight whenever fix_variables fixes every variable.
inline double roof_dual_bound(const Qubo& q) {
    Posiform p = to_posiform(q);
    detail::ImplicationNetwork net(p);
    return p.constant + net.max_flow();
}

}  // namespace hydroq
