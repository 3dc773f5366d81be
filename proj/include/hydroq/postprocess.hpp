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
#include <set>
#include <vector>

#include "hydroq/anneal.hpp"
#include "hydroq/errors.hpp"
#include "hydroq/qubo.hpp"
#include "hydroq/random.hpp"

namespace hydroq {

/// Tree decomposition of an induced subgraph: bags of variables, tree edges
/// between bags, width = max bag size - 1.
struct TreeDecomposition {
    std::vector<std::vector<int>> bags;
    std::vector<std::pair<int, int>> edges;
    std::vector<int> elimination_order;
    int width = -1;
};

/// Cover of the variable set by low-treewidth subsets.
struct Decomposition {
    std::vector<std::vector<int>> subsets;
    std::vector<TreeDecomposition> trees;
};

namespace detail {

inline std::vector<std::vector<int>> interaction_graph(const Qubo& q) {
    std::vector<std::vector<int>> adj(q.n);
    for (const auto& [ij, c] : q.quadratic) {
        adj[ij.first].push_back(ij.second);
        adj[ij.second].push_back(ij.first);
    }
    for (auto& lst : adj) {
        std::sort(lst.begin(), lst.end());
        lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
    }
    return adj;
}

// Incrementally grown window with index-order elimination bookkeeping: keeps
// the later-neighbor sets (fill edges included) so that the width after
// appending one more variable is computable in O(window * width).
struct EliminationWindow {
    const std::vector<std::vector<int>>& global_adj;
    std::vector<int> verts;              // global ids, increasing
    std::vector<int> local_of;           // global id -> local index or -1
    std::vector<std::set<int>> later;    // local: later-neighbors incl. fill
    int width = 0;

    EliminationWindow(const std::vector<std::vector<int>>& adj, int n_global)
        : global_adj(adj), local_of(n_global, -1) {}

    void reset(const std::vector<int>& seed_verts) {
        for (int v : verts) local_of[v] = -1;
        verts.clear();
        later.clear();
        width = 0;
        for (int v : seed_verts) append_unchecked(v);
    }

    // Width the window would have after appending v.
    int width_if_appended(int v) const {
        const int m = static_cast<int>(verts.size());
        std::vector<char> connected(m, 0);
        for (int u : global_adj[v]) {
            const int lu = u < static_cast<int>(local_of.size()) ? local_of[u] : -1;
            if (lu >= 0) connected[lu] = 1;
        }
        int w = width;
        for (int i = 0; i < m; ++i) {
            if (!connected[i]) continue;
            w = std::max(w, static_cast<int>(later[i].size()) + 1);
            for (int j : later[i]) connected[j] = 1;
        }
        return w;
    }

    void append_unchecked(int v) {
        const int m = static_cast<int>(verts.size());
        std::vector<char> connected(m, 0);
        for (int u : global_adj[v]) {
            const int lu = u < static_cast<int>(local_of.size()) ? local_of[u] : -1;
            if (lu >= 0) connected[lu] = 1;
        }
        for (int i = 0; i < m; ++i) {
            if (!connected[i]) continue;
            for (int j : later[i]) connected[j] = 1;
            later[i].insert(m);
            width = std::max(width, static_cast<int>(later[i].size()));
        }
        local_of[v] = m;
        verts.push_back(v);
        later.emplace_back();
    }
};

// Decomposition from a fixed elimination order; bags are the elimination
// cliques, each linked to the bag of its earliest-later-eliminated neighbor
// (disconnected pieces are chained, which keeps a single tree and preserves
// the running-intersection property).
inline TreeDecomposition fixed_order_decomposition(const std::vector<int>& verts,
                                                   const std::vector<std::vector<int>>& global_adj) {
    TreeDecomposition td;
    const int m = static_cast<int>(verts.size());
    std::map<int, int> to_local;
    for (int i = 0; i < m; ++i) to_local[verts[i]] = i;
    std::vector<std::set<int>> later(m);
    for (int i = 0; i < m; ++i)
        for (int u : global_adj[verts[i]]) {
            auto it = to_local.find(u);
            if (it != to_local.end() && it->second > i) later[i].insert(it->second);
        }
    td.width = 0;
    for (int i = 0; i < m; ++i) {
        td.width = std::max(td.width, static_cast<int>(later[i].size()));
        std::vector<int> bag;
        bag.push_back(verts[i]);
        for (int j : later[i]) bag.push_back(verts[j]);
        std::sort(bag.begin(), bag.end());
        td.bags.push_back(bag);
        td.elimination_order.push_back(verts[i]);
        if (!later[i].empty()) td.edges.emplace_back(i, *later[i].begin());
        else if (i + 1 < m) td.edges.emplace_back(i, i + 1);
        for (auto it1 = later[i].begin(); it1 != later[i].end(); ++it1)
            for (auto it2 = std::next(it1); it2 != later[i].end(); ++it2)
                later[*it1].insert(*it2);
    }
    return td;
}

// Greedy min-fill elimination on the subgraph induced by `verts`. Returns the
// decomposition with elimination cliques as bags; bag i links to the bag of
// the earliest-later-eliminated neighbor of its vertex (components are chained
// to keep a single tree, which preserves the running-intersection property).
inline TreeDecomposition min_fill_decomposition(const std::vector<int>& verts,
                                                const std::vector<std::vector<int>>& global_adj) {
    TreeDecomposition td;
    const int m = static_cast<int>(verts.size());
    std::map<int, std::set<int>> work;  // mutable induced adjacency
    std::set<int> vset(verts.begin(), verts.end());
    for (int v : verts) {
        auto& row = work[v];
        for (int u : global_adj[v])
            if (vset.count(u)) row.insert(u);
    }
    std::map<int, int> elim_pos;
    for (int step = 0; step < m; ++step) {
        int best = -1;
        long best_fill = -1;
        for (const auto& [v, nbrs] : work) {
            long fill = 0;
            for (auto it1 = nbrs.begin(); it1 != nbrs.end(); ++it1)
                for (auto it2 = std::next(it1); it2 != nbrs.end(); ++it2)
                    if (!work[*it1].count(*it2)) ++fill;
            if (best < 0 || fill < best_fill || (fill == best_fill && v < best)) {
                best = v;
                best_fill = fill;
            }
        }
        const std::set<int> nbrs = work[best];
        std::vector<int> bag(nbrs.begin(), nbrs.end());
        bag.push_back(best);
        std::sort(bag.begin(), bag.end());
        td.bags.push_back(bag);
        td.elimination_order.push_back(best);
        elim_pos[best] = step;
        td.width = std::max(td.width, static_cast<int>(bag.size()) - 1);
        for (int u : nbrs) {
            work[u].erase(best);
            for (int w : nbrs)
                if (w != u) work[u].insert(w);
        }
        work.erase(best);
    }
    // connect each bag to the bag of its vertex's earliest-eliminated remaining neighbor
    for (int i = 0; i < m; ++i) {
        const int v = td.elimination_order[i];
        int link = -1;
        for (int u : td.bags[i]) {
            if (u == v) continue;
            if (link < 0 || elim_pos[u] < elim_pos[link]) link = u;
        }
        if (link >= 0) td.edges.emplace_back(i, elim_pos[link]);
        else if (i + 1 < m) td.edges.emplace_back(i, i + 1);  // chain disconnected pieces
    }
    return td;
}

}  // namespace detail

/// Covers the variables with index-ordered sliding windows whose elimination
/// width stays within max_width; consecutive windows overlap by half so local
/// moves can cross window seams. Small windows get a greedy min-fill tree
/// decomposition; large ones keep the index elimination order (on the long
/// path-like windows the two coincide, and min-fill is quadratic in the
/// window size).
inline Decomposition decompose_low_treewidth(const Qubo& q, int max_width) {
    if (max_width < 1) throw parameter_error("decompose_low_treewidth: max_width must be >= 1");
    Decomposition d;
    const auto adj = detail::interaction_graph(q);
    auto close_window = [&](const std::vector<int>& verts) {
        if (verts.empty()) return;
        d.subsets.push_back(verts);
        if (verts.size() <= 64) {
            TreeDecomposition mf = detail::min_fill_decomposition(verts, adj);
            TreeDecomposition fo = detail::fixed_order_decomposition(verts, adj);
            d.trees.push_back(mf.width <= fo.width ? std::move(mf) : std::move(fo));
        } else {
            d.trees.push_back(detail::fixed_order_decomposition(verts, adj));
        }
    };

    detail::EliminationWindow window(adj, q.n);
    int next_var = 0;
    while (next_var < q.n) {
        if (window.verts.empty() || window.width_if_appended(next_var) <= max_width) {
            window.append_unchecked(next_var);
            ++next_var;
            continue;
        }
        close_window(window.verts);
        // next window keeps the trailing half of the last one
        std::vector<int> keep(window.verts.end() - window.verts.size() / 2, window.verts.end());
        while (true) {
            window.reset(keep);
            if (keep.empty() || window.width_if_appended(next_var) <= max_width) break;
            keep.erase(keep.begin());
        }
    }
    close_window(window.verts);
    if (d.subsets.empty()) {
        d.subsets.push_back({});
        d.trees.push_back({});
    }
    return d;
}

namespace detail {

// Conditional sub-QUBO over `subset` with every other variable frozen at x.
// local index space 0..k-1 in subset order.
struct LocalProblem {
    std::vector<int> vars;
    std::vector<double> lin;
    std::map<std::pair<int, int>, double> quad;
};

inline LocalProblem conditional_problem(const Qubo& q, const Assignment& x,
                                        const std::vector<int>& subset) {
    LocalProblem lp;
    lp.vars = subset;
    std::vector<int> local(q.n, -1);
    for (std::size_t i = 0; i < subset.size(); ++i) local[subset[i]] = static_cast<int>(i);
    lp.lin.assign(subset.size(), 0.0);
    for (std::size_t i = 0; i < subset.size(); ++i) lp.lin[i] = q.linear_at(subset[i]);
    for (const auto& [ij, c] : q.quadratic) {
        const int li = local[ij.first], lj = local[ij.second];
        if (li >= 0 && lj >= 0) {
            lp.quad[{std::min(li, lj), std::max(li, lj)}] += c;
        } else if (li >= 0) {
            if (x[ij.second]) lp.lin[li] += c;
        } else if (lj >= 0) {
            if (x[ij.first]) lp.lin[lj] += c;
        }
    }
    return lp;
}

// Factor over a sorted local-variable scope; values indexed by bits in scope
// order (scope[0] = least significant).
struct Factor {
    std::vector<int> scope;
    std::vector<double> values;
};

inline Factor merge_factors(const std::vector<Factor>& fs) {
    Factor out;
    std::set<int> sc;
    for (const auto& f : fs) sc.insert(f.scope.begin(), f.scope.end());
    out.scope.assign(sc.begin(), sc.end());
    out.values.assign(std::size_t{1} << out.scope.size(), 0.0);
    std::vector<std::size_t> strides;
    for (const auto& f : fs) {
        strides.clear();
        for (int v : f.scope) {
            const std::size_t at =
                std::lower_bound(out.scope.begin(), out.scope.end(), v) - out.scope.begin();
            strides.push_back(std::size_t{1} << at);
        }
        for (std::size_t code = 0; code < out.values.size(); ++code) {
            std::size_t sub = 0;
            for (std::size_t b = 0; b < strides.size(); ++b)
                if (code & strides[b]) sub |= std::size_t{1} << b;
            out.values[code] += f.values[sub];
        }
    }
    return out;
}

// Bucket elimination record for one variable: the merged factor it was
// eliminated from, needed for back-substitution / backward sampling.
struct Bucket {
    int var = -1;
    Factor merged;  // scope includes var
};

// Runs bucket elimination over the elimination order: each factor lives in
// the bucket of its earliest-eliminated variable, merged factors cascade to
// later buckets. fold(v0, v1) collapses the two values of the eliminated
// variable (min for optimization, -T log-sum-exp for sampling). Returns the
// residual constant and the per-variable trace for back-substitution.
template <typename Fold>
inline double eliminate(const LocalProblem& lp, const std::vector<int>& elim_order_global,
                        const std::vector<int>& global_to_local, Fold fold,
                        std::vector<Bucket>& trace) {
    const int m = static_cast<int>(lp.vars.size());
    std::vector<int> elim_pos(m, -1);
    for (int step = 0; step < m; ++step) elim_pos[global_to_local[elim_order_global[step]]] = step;

    std::vector<std::vector<Factor>> buckets(m);
    auto place = [&](Factor&& f) {
        int first = m;
        for (int u : f.scope) first = std::min(first, elim_pos[u]);
        buckets[first].push_back(std::move(f));
    };
    for (std::size_t i = 0; i < lp.lin.size(); ++i)
        if (lp.lin[i] != 0.0) place({{static_cast<int>(i)}, {0.0, lp.lin[i]}});
    for (const auto& [ij, c] : lp.quad) place({{ij.first, ij.second}, {0.0, 0.0, 0.0, c}});

    double constant = 0.0;
    for (int step = 0; step < m; ++step) {
        const int v = global_to_local[elim_order_global[step]];
        Factor merged =
            buckets[step].empty() ? Factor{{v}, {0.0, 0.0}} : merge_factors(buckets[step]);
        if (!std::binary_search(merged.scope.begin(), merged.scope.end(), v))
            merged = merge_factors({merged, Factor{{v}, {0.0, 0.0}}});
        trace.push_back({v, std::move(merged)});
        const Factor& mf = trace.back().merged;
        // fold v out
        const std::size_t at =
            std::lower_bound(mf.scope.begin(), mf.scope.end(), v) - mf.scope.begin();
        const std::size_t bit = std::size_t{1} << at;
        Factor reduced;
        for (int u : mf.scope)
            if (u != v) reduced.scope.push_back(u);
        reduced.values.assign(std::size_t{1} << reduced.scope.size(), 0.0);
        for (std::size_t code = 0; code < reduced.values.size(); ++code) {
            // expand code to the merged index with v = 0
            std::size_t lo = code & (bit - 1);
            std::size_t hi = (code >> at) << (at + 1);
            const std::size_t base = hi | lo;
            reduced.values[code] = fold(mf.values[base], mf.values[base | bit]);
        }
        if (reduced.scope.empty()) constant += reduced.values[0];
        else place(std::move(reduced));
    }
    return constant;
}

inline double factor_value_at(const Factor& f, const std::vector<int>& assignment_local) {
    std::size_t code = 0;
    for (std::size_t b = 0; b < f.scope.size(); ++b)
        if (assignment_local[f.scope[b]]) code |= std::size_t{1} << b;
    return f.values[code];
}

}  // namespace detail

/// Exact minimum of the sub-QUBO conditioned on x outside the subset,
/// computed by dynamic programming over the subset's tree decomposition.
/// Returns the improved full assignment (equal to x outside the subset).
inline Assignment minimize_subset(const Qubo& q, const Assignment& x, const std::vector<int>& subset,
                                  const TreeDecomposition& td) {
    if (subset.empty()) return x;
    auto lp = detail::conditional_problem(q, x, subset);
    std::vector<int> g2l(q.n, -1);
    for (std::size_t i = 0; i < subset.size(); ++i) g2l[subset[i]] = static_cast<int>(i);
    std::vector<detail::Bucket> trace;
    detail::eliminate(lp, td.elimination_order, g2l,
                      [](double a, double b) { return std::min(a, b); }, trace);
    std::vector<int> local(subset.size(), -1);
    for (auto it = trace.rbegin(); it != trace.rend(); ++it) {
        // choose the value minimizing the merged factor given later choices
        std::vector<int> probe(subset.size(), 0);
        for (std::size_t i = 0; i < subset.size(); ++i) probe[i] = std::max(local[i], 0);
        probe[it->var] = 0;
        const double e0 = detail::factor_value_at(it->merged, probe);
        probe[it->var] = 1;
        const double e1 = detail::factor_value_at(it->merged, probe);
        local[it->var] = e0 <= e1 ? 0 : 1;
    }
    Assignment out = x;
    for (std::size_t i = 0; i < subset.size(); ++i) out[subset[i]] = static_cast<std::uint8_t>(local[i]);
    return out;
}

/// Local exact re-optimization: passes over the decomposition's subsets in
/// order, adopting the conditional exact minimum whenever it strictly lowers
/// the energy, until a full pass makes no improvement. Never increases energy;
/// applying it twice equals applying it once.
inline Assignment optimize_local(const Qubo& q, const Assignment& x0, const Decomposition& d) {
    Assignment x = x0;
    double e = q.energy(x);
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t s = 0; s < d.subsets.size(); ++s) {
            Assignment y = minimize_subset(q, x, d.subsets[s], d.trees[s]);
            const double ey = q.energy(y);
            if (ey < e) {
                x = std::move(y);
                e = ey;
                improved = true;
            }
        }
    }
    return x;
}

/// One pass of exact conditional Boltzmann sampling at temperature T: each
/// subset in order is redrawn from exp(-E/T) over its variables given the
/// rest, via sum-product elimination and backward sampling.
inline Assignment boltzmann_sample_local(const Qubo& q, const Assignment& x0, const Decomposition& d,
                                         double temperature, std::uint64_t seed) {
    if (!(temperature > 0.0)) throw parameter_error("boltzmann_sample_local: T must be > 0");
    Assignment x = x0;
    Rng rng(seed);
    const double inv_t = 1.0 / temperature;
    // -T log(exp(-a/T) + exp(-b/T)), stabilized
    auto fold = [&](double a, double b) {
        const double lo = std::min(a, b), hi = std::max(a, b);
        return lo - temperature * std::log1p(std::exp(-(hi - lo) * inv_t));
    };
    for (std::size_t s = 0; s < d.subsets.size(); ++s) {
        const auto& subset = d.subsets[s];
        if (subset.empty()) continue;
        auto lp = detail::conditional_problem(q, x, subset);
        std::vector<int> g2l(q.n, -1);
        for (std::size_t i = 0; i < subset.size(); ++i) g2l[subset[i]] = static_cast<int>(i);
        std::vector<detail::Bucket> trace;
        detail::eliminate(lp, d.trees[s].elimination_order, g2l, fold, trace);
        std::vector<int> local(subset.size(), 0);
        for (auto it = trace.rbegin(); it != trace.rend(); ++it) {
            std::vector<int> probe = local;
            probe[it->var] = 0;
            const double e0 = detail::factor_value_at(it->merged, probe);
            probe[it->var] = 1;
            const double e1 = detail::factor_value_at(it->merged, probe);
            // p(v=1) = exp(-e1/T) / (exp(-e0/T) + exp(-e1/T))
            const double p1 = 1.0 / (1.0 + std::exp((e1 - e0) * inv_t));
            local[it->var] = rng.uniform() < p1 ? 1 : 0;
        }
        for (std::size_t i = 0; i < subset.size(); ++i) x[subset[i]] = static_cast<std::uint8_t>(local[i]);
    }
    return x;
}

/// Fuses two samples: agreement variables copy over; each connected component
/// of the disagreement-induced subgraph takes whichever donor gives the lower
/// conditional energy (couplers into the agreed frontier included, ties to the
/// first donor). The output energy never exceeds min(E(a), E(b)).
inline Assignment mqc_pair(const Qubo& q, const Assignment& a, const Assignment& b) {
    if (static_cast<int>(a.size()) != q.n || static_cast<int>(b.size()) != q.n)
        throw parameter_error("mqc_pair: assignment length mismatch");
    Assignment out = a;
    std::vector<int> comp(q.n, -1);
    std::vector<std::vector<int>> adj(q.n);
    for (const auto& [ij, c] : q.quadratic) {
        if (a[ij.first] != b[ij.first] && a[ij.second] != b[ij.second]) {
            adj[ij.first].push_back(ij.second);
            adj[ij.second].push_back(ij.first);
        }
    }
    int ncomp = 0;
    std::vector<int> stack;
    for (int v = 0; v < q.n; ++v) {
        if (a[v] == b[v] || comp[v] >= 0) continue;
        comp[v] = ncomp;
        stack.push_back(v);
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int w : adj[u])
                if (comp[w] < 0) {
                    comp[w] = ncomp;
                    stack.push_back(w);
                }
        }
        ++ncomp;
    }
    // delta[c] = E(component c from a) - E(component c from b), frontier fixed
    std::vector<double> delta(ncomp, 0.0);
    for (const auto& [i, c] : q.linear)
        if (comp[i] >= 0) delta[comp[i]] += c * (static_cast<int>(a[i]) - static_cast<int>(b[i]));
    for (const auto& [ij, c] : q.quadratic) {
        const auto [i, j] = ij;
        const int ci = comp[i], cj = comp[j];
        if (ci >= 0 && cj >= 0) {
            // disagreement-disagreement: same component or independent (no coupler)
            delta[ci] += c * (static_cast<int>(a[i] & a[j]) - static_cast<int>(b[i] & b[j]));
        } else if (ci >= 0) {
            delta[ci] += c * (static_cast<int>(a[i]) - static_cast<int>(b[i])) * (a[j] ? 1 : 0);
        } else if (cj >= 0) {
            delta[cj] += c * (static_cast<int>(a[j]) - static_cast<int>(b[j])) * (a[i] ? 1 : 0);
        }
    }
    for (int v = 0; v < q.n; ++v)
        if (comp[v] >= 0 && delta[comp[v]] > 0.0) out[v] = b[v];
    return out;
}

/// Repeated pairwise fusion: adjacent pairs in sample order, odd sample carried
/// forward, rounds until one assignment remains. Output energy is at most the
/// minimum input energy.
inline Assignment mqc(const Qubo& q, const SampleSet& samples) {
    if (samples.samples.empty()) throw parameter_error("mqc: needs at least one sample");
    std::vector<Assignment> pool;
    pool.reserve(samples.samples.size());
    for (const auto& s : samples.samples) pool.push_back(s.x);
    while (pool.size() > 1) {
        std::vector<Assignment> next;
        next.reserve((pool.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < pool.size(); i += 2)
            next.push_back(mqc_pair(q, pool[i], pool[i + 1]));
        if (pool.size() % 2) next.push_back(pool.back());
        pool = std::move(next);
    }
    return pool.front();
}

}  // namespace hydroq
