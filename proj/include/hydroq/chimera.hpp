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
#include <cstdint>
#include <map>
#include <mutex>
#include <tuple>
#include <vector>

#include "hydroq/errors.hpp"
#include "hydroq/qubo.hpp"
#include "hydroq/random.hpp"

namespace hydroq {

/// Chimera hardware graph: rows x cols unit cells of 8 qubits wired as a
/// complete bipartite 4+4. Within cell (r,c), qubit indices 0..3 form the
/// vertical shore (coupled to the cells above/below at equal index) and 4..7
/// the horizontal shore (coupled left/right). Full yield by default.
struct ChimeraTopology {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> active;

    int num_qubits() const { return 8 * rows * cols; }
    int qid(int r, int c, int k) const { return 8 * (r * cols + c) + k; }
    int cell_row(int q) const { return q / 8 / cols; }
    int cell_col(int q) const { return (q / 8) % cols; }
    int shore_index(int q) const { return q % 8; }
    bool is_active(int q) const { return active[q] != 0; }

    bool adjacent(int a, int b) const {
        if (a == b) return false;
        const int ra = cell_row(a), ca = cell_col(a), ka = shore_index(a);
        const int rb = cell_row(b), cb = cell_col(b), kb = shore_index(b);
        if (ra == rb && ca == cb) return (ka < 4) != (kb < 4);
        if (ka != kb) return false;
        if (ka < 4) return ca == cb && std::abs(ra - rb) == 1;    // vertical shore
        return ra == rb && std::abs(ca - cb) == 1;                // horizontal shore
    }

    /// Couplers in deterministic order (intra-cell first per cell, then
    /// horizontal, then vertical), active endpoints only.
    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        for (int r = 0; r < rows; ++r) {
            for (int c = 0; c < cols; ++c) {
                for (int a = 0; a < 4; ++a)
                    for (int b = 4; b < 8; ++b) push_edge(out, qid(r, c, a), qid(r, c, b));
                if (c + 1 < cols)
                    for (int k = 4; k < 8; ++k) push_edge(out, qid(r, c, k), qid(r, c + 1, k));
                if (r + 1 < rows)
                    for (int k = 0; k < 4; ++k) push_edge(out, qid(r, c, k), qid(r + 1, c, k));
            }
        }
        return out;
    }

    std::vector<std::vector<int>> adjacency() const {
        std::vector<std::vector<int>> adj(num_qubits());
        for (const auto& [a, b] : edges()) {
            adj[a].push_back(b);
            adj[b].push_back(a);
        }
        for (auto& lst : adj) std::sort(lst.begin(), lst.end());
        return adj;
    }

  private:
    void push_edge(std::vector<std::pair<int, int>>& out, int a, int b) const {
        if (is_active(a) && is_active(b)) out.emplace_back(a, b);
    }
};

inline ChimeraTopology build_chimera(int rows, int cols) {
    if (rows < 1 || cols < 1) throw parameter_error("build_chimera: rows, cols must be >= 1");
    ChimeraTopology t;
    t.rows = rows;
    t.cols = cols;
    t.active.assign(static_cast<std::size_t>(8) * rows * cols, 1);
    return t;
}

/// Minor embedding: one ordered, connected qubit chain per logical variable.
/// chain_strength < 0 selects the default at embed time (1.5 x the largest
/// logical coefficient incident to each chain); 0 disables the chain penalty.
struct Embedding {
    std::vector<std::vector<int>> chains;
    double chain_strength = -1.0;
};

namespace detail {

// Posa rotation search for a long simple path. Deterministic for a fixed seed.
// Extends greedily (fewest-free-neighbors first, smallest id on ties), rotates
// the tail when stuck, and reverses periodically so both ends get extended.
inline std::vector<int> long_path_search(const std::vector<std::vector<int>>& adj,
                                         const std::vector<std::uint8_t>& usable, int target,
                                         std::uint64_t seed, std::uint64_t iteration_budget) {
    const int n = static_cast<int>(adj.size());
    int start = -1;
    for (int v = 0; v < n && start < 0; ++v)
        if (usable[v]) start = v;
    if (start < 0) return {};

    std::vector<int> path;
    std::vector<int> pos(n, -1);
    std::vector<char> in_path(n, 0);
    path.reserve(n);
    auto push_back_vertex = [&](int v) {
        pos[v] = static_cast<int>(path.size());
        path.push_back(v);
        in_path[v] = 1;
    };
    push_back_vertex(start);

    auto free_degree = [&](int v) {
        int d = 0;
        for (int w : adj[v])
            if (usable[w] && !in_path[w]) ++d;
        return d;
    };
    auto extend_tail = [&]() {
        while (true) {
            const int u = path.back();
            int best = -1, best_d = 1 << 30;
            for (int w : adj[u]) {
                if (!usable[w] || in_path[w]) continue;
                const int d = free_degree(w);
                if (d < best_d || (d == best_d && w < best)) {
                    best = w;
                    best_d = d;
                }
            }
            if (best < 0) break;
            push_back_vertex(best);
        }
    };
    auto reverse_path = [&]() {
        std::reverse(path.begin(), path.end());
        for (std::size_t i = 0; i < path.size(); ++i) pos[path[i]] = static_cast<int>(i);
    };

    extend_tail();
    reverse_path();
    extend_tail();

    std::vector<int> best_path = path;
    Rng rng(seed);
    for (std::uint64_t it = 0; it < iteration_budget; ++it) {
        if (static_cast<int>(path.size()) >= target) break;
        const int u = path.back();
        if (!adj[u].empty()) {
            const int v = adj[u][rng.uniform_int(adj[u].size())];
            const int i = (usable[v] && in_path[v]) ? pos[v] : -1;
            if (i >= 0 && i + 2 < static_cast<int>(path.size())) {
                std::reverse(path.begin() + i + 1, path.end());
                for (std::size_t k = i + 1; k < path.size(); ++k) pos[path[k]] = static_cast<int>(k);
            }
        }
        extend_tail();
        if (path.size() > best_path.size()) best_path = path;
        if (it % 3 == 0) reverse_path();
    }
    if (path.size() > best_path.size()) best_path = path;
    return best_path;
}

}  // namespace detail

/// Longest constructible chain for this topology (memoized Posa search).
inline const std::vector<int>& chimera_longest_chain(const ChimeraTopology& topo) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, std::vector<std::uint8_t>>, std::vector<int>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(topo.rows, topo.cols, topo.active);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const auto adj = topo.adjacency();
    int usable_count = 0;
    for (auto a : topo.active) usable_count += a ? 1 : 0;
    const std::uint64_t budget = 250ULL * std::max(1, topo.num_qubits());
    auto path = detail::long_path_search(adj, topo.active, usable_count, 0x0badcafeULL, budget);
    return cache.emplace(std::move(key), std::move(path)).first->second;
}

/// Embeds a 1D chain of n logical variables, one qubit per variable with
/// consecutive variables on coupled qubits.
inline Embedding embed_1d_chain(int n, const ChimeraTopology& topo) {
    if (n < 1) throw parameter_error("embed_1d_chain: n must be >= 1");
    const auto& path = chimera_longest_chain(topo);
    if (static_cast<int>(path.size()) < n)
        throw capacity_error("embed_1d_chain: topology has no constructible path of length " +
                             std::to_string(n) + " (longest found: " + std::to_string(path.size()) + ")");
    Embedding e;
    e.chains.resize(n);
    for (int i = 0; i < n; ++i) e.chains[i] = {path[i]};
    return e;
}

/// Unit-cell embedding of the 2D inverse problem: cell (r,c) encodes the four
/// permeabilities around head node (r,c) with two qubits each; interior
/// permeabilities span the two incident cells (4-qubit chains), boundary ones
/// a single cell (2-qubit chains). N x N cells host 2N(N+1) logical variables
/// on 8N^2 qubits. Variable order matches PermeabilityField (x block then y).
inline Embedding embed_2d_unit_cells(int N, const ChimeraTopology& topo) {
    if (N < 1) throw parameter_error("embed_2d_unit_cells: N must be >= 1");
    if (topo.rows < N || topo.cols < N)
        throw capacity_error("embed_2d_unit_cells: need at least N x N unit cells");
    for (int r = 0; r < N; ++r)
        for (int c = 0; c < N; ++c)
            for (int k = 0; k < 8; ++k)
                if (!topo.is_active(topo.qid(r, c, k)))
                    throw capacity_error("embed_2d_unit_cells: inactive qubit in the embedding region");

    Embedding e;
    e.chains.resize(static_cast<std::size_t>(2) * N * (N + 1));
    // x-link (r, c): vertical-shore index c&1, horizontal-shore index 4+(c&1);
    // the horizontal coupler between cells (r,c-1) and (r,c) joins the halves.
    for (int r = 0; r < N; ++r) {
        for (int c = 0; c <= N; ++c) {
            std::vector<int> chain;
            const int v = c & 1, h = 4 + (c & 1);
            if (c - 1 >= 0) {
                chain.push_back(topo.qid(r, c - 1, v));
                chain.push_back(topo.qid(r, c - 1, h));
            }
            if (c < N) {
                chain.push_back(topo.qid(r, c, h));
                chain.push_back(topo.qid(r, c, v));
            }
            e.chains[r * (N + 1) + c] = std::move(chain);
        }
    }
    // y-link (r, c): vertical-shore index 2+(r&1) carries the inter-cell coupler.
    for (int r = 0; r <= N; ++r) {
        for (int c = 0; c < N; ++c) {
            std::vector<int> chain;
            const int v = 2 + (r & 1), h = 6 + (r & 1);
            if (r - 1 >= 0) {
                chain.push_back(topo.qid(r - 1, c, h));
                chain.push_back(topo.qid(r - 1, c, v));
            }
            if (r < N) {
                chain.push_back(topo.qid(r, c, v));
                chain.push_back(topo.qid(r, c, h));
            }
            e.chains[N * (N + 1) + r * N + c] = std::move(chain);
        }
    }
    return e;
}

/// Lifts a logical QUBO onto the hardware graph through an embedding: linear
/// terms split evenly over the chain, each logical coupler placed on the first
/// realizing physical coupler, and a ferromagnetic penalty
/// C (x_p + x_q - 2 x_p x_q) added on chain spanning-tree edges.
inline Qubo embed_qubo(const Qubo& q, const Embedding& e, const ChimeraTopology& topo) {
    if (q.n > static_cast<int>(e.chains.size()))
        throw capacity_error("embed_qubo: embedding does not cover all variables");
    auto chain_of = [&](int v) -> const std::vector<int>& {
        const auto& c = e.chains[v];
        if (c.empty()) throw capacity_error("embed_qubo: empty chain for variable " + std::to_string(v));
        return c;
    };

    // per-chain strength: explicit value, or 1.5 x max incident logical coefficient
    std::vector<double> incident(q.n, 0.0);
    for (const auto& [i, c] : q.linear) incident[i] = std::max(incident[i], std::abs(c));
    for (const auto& [ij, c] : q.quadratic) {
        incident[ij.first] = std::max(incident[ij.first], std::abs(c));
        incident[ij.second] = std::max(incident[ij.second], std::abs(c));
    }

    Qubo phys;
    phys.n = topo.num_qubits();
    phys.offset = q.offset;
    for (const auto& [v, a] : q.linear) {
        const auto& chain = chain_of(v);
        const double share = a / static_cast<double>(chain.size());
        for (int p : chain) phys.add_linear(p, share);
    }
    for (const auto& [ij, b] : q.quadratic) {
        const auto& cu = chain_of(ij.first);
        const auto& cv = chain_of(ij.second);
        bool placed = false;
        for (int p : cu) {
            for (int s : cv) {
                if (topo.adjacent(p, s)) {
                    phys.add_quadratic(p, s, b);
                    placed = true;
                    break;
                }
            }
            if (placed) break;
        }
        if (!placed)
            throw capacity_error("embed_qubo: no realizing coupler for logical edge (" +
                                 std::to_string(ij.first) + "," + std::to_string(ij.second) + ")");
    }
    for (int v = 0; v < q.n; ++v) {
        const auto& chain = e.chains[v];
        if (chain.size() < 2) continue;
        const double strength = e.chain_strength >= 0.0 ? e.chain_strength : 1.5 * incident[v];
        if (strength == 0.0) continue;
        // spanning tree over the chain's induced subgraph
        std::vector<char> reached(chain.size(), 0);
        reached[0] = 1;
        std::size_t count = 1;
        while (count < chain.size()) {
            bool grew = false;
            for (std::size_t a = 0; a < chain.size() && count < chain.size(); ++a) {
                if (!reached[a]) continue;
                for (std::size_t b = 0; b < chain.size(); ++b) {
                    if (reached[b] || !topo.adjacent(chain[a], chain[b])) continue;
                    phys.add_linear(chain[a], strength);
                    phys.add_linear(chain[b], strength);
                    phys.add_quadratic(chain[a], chain[b], -2.0 * strength);
                    reached[b] = 1;
                    ++count;
                    grew = true;
                }
            }
            if (!grew) throw capacity_error("embed_qubo: chain is not connected");
        }
    }
    return phys;
}

}  // namespace hydroq
