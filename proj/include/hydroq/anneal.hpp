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

#include "hydroq/chimera.hpp"
#include "hydroq/errors.hpp"
#include "hydroq/qubo.hpp"
#include "hydroq/random.hpp"

namespace hydroq {

struct Sample {
    Assignment x;
    double energy = 0.0;
};

/// Ordered reads plus the sampler settings that produced them.
struct SampleSet {
    std::vector<Sample> samples;
    int num_reads = 0;
    int sweeps = 0;
    std::uint64_t seed = 0;
    double sigma_hw = 0.0;

    const Sample& best() const {
        if (samples.empty()) throw parameter_error("SampleSet::best: empty sample set");
        std::size_t bi = 0;
        for (std::size_t i = 1; i < samples.size(); ++i)
            if (samples[i].energy < samples[bi].energy) bi = i;
        return samples[bi];
    }
};

/// The control-error model: rescale so max |coefficient| = 1, then add
/// i.i.d. N(0, sigma_hw) to every stored linear and quadratic coefficient.
/// The offset is untouched. At sigma_hw = 0 this is a pure rescale, which
/// leaves the argmin set unchanged.
inline Qubo apply_hardware_noise(const Qubo& q, double sigma_hw, std::uint64_t seed) {
    if (sigma_hw < 0.0) throw parameter_error("apply_hardware_noise: sigma_hw must be >= 0");
    const double m = q.max_abs_coeff();
    const double scale = m > 0.0 ? 1.0 / m : 1.0;
    Qubo out;
    out.n = q.n;
    out.offset = q.offset;
    Rng rng(seed);
    for (const auto& [i, c] : q.linear)
        out.add_linear(i, c * scale + (sigma_hw > 0.0 ? rng.normal(0.0, sigma_hw) : 0.0));
    for (const auto& [ij, c] : q.quadratic)
        out.add_quadratic(ij.first, ij.second,
                          c * scale + (sigma_hw > 0.0 ? rng.normal(0.0, sigma_hw) : 0.0));
    return out;
}

/// Simulated annealing stand-in for the quantum sampler. num_reads independent
/// restarts, each running `sweeps` Metropolis passes over a geometric
/// temperature schedule from max|coeff| down to 1e-3 max|coeff|. Read r uses
/// the derived seed (seed, r), so reads are independent and the set is
/// reproducible; energies are filled in against the given QUBO.
inline SampleSet anneal(const Qubo& q, int num_reads, int sweeps, std::uint64_t seed) {
    if (num_reads < 1) throw parameter_error("anneal: num_reads must be >= 1");
    if (sweeps < 1) throw parameter_error("anneal: sweeps must be >= 1");
    const int n = q.n;

    std::vector<double> lin(n, 0.0);
    for (const auto& [i, c] : q.linear) lin[i] = c;
    std::vector<int> deg(n, 0);
    for (const auto& [ij, c] : q.quadratic) {
        ++deg[ij.first];
        ++deg[ij.second];
    }
    std::vector<int> start(n + 1, 0);
    for (int i = 0; i < n; ++i) start[i + 1] = start[i] + deg[i];
    std::vector<int> nbr(start[n]);
    std::vector<double> wgt(start[n]);
    {
        std::vector<int> cursor(start.begin(), start.end() - 1);
        for (const auto& [ij, c] : q.quadratic) {
            nbr[cursor[ij.first]] = ij.second;
            wgt[cursor[ij.first]++] = c;
            nbr[cursor[ij.second]] = ij.first;
            wgt[cursor[ij.second]++] = c;
        }
    }

    const double t_hot = std::max(q.max_abs_coeff(), 1e-12);
    const double t_cold = 1e-3 * t_hot;
    std::vector<double> temp(sweeps);
    for (int s = 0; s < sweeps; ++s)
        temp[s] = sweeps > 1 ? t_hot * std::pow(t_cold / t_hot, static_cast<double>(s) / (sweeps - 1))
                             : t_cold;

    SampleSet out;
    out.num_reads = num_reads;
    out.sweeps = sweeps;
    out.seed = seed;
    out.samples.reserve(num_reads);

    std::vector<double> field(n);
    Assignment x(n);
    for (int read = 0; read < num_reads; ++read) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(read)));
        for (int i = 0; i < n; ++i) x[i] = rng.bernoulli_half() ? 1 : 0;
        for (int i = 0; i < n; ++i) {
            double f = lin[i];
            for (int e = start[i]; e < start[i + 1]; ++e) f += x[nbr[e]] ? wgt[e] : 0.0;
            field[i] = f;
        }
        for (int s = 0; s < sweeps; ++s) {
            const double inv_t = 1.0 / temp[s];
            for (int i = 0; i < n; ++i) {
                const double delta = x[i] ? -field[i] : field[i];
                if (delta > 0.0 && rng.uniform() >= std::exp(-delta * inv_t)) continue;
                const double step = x[i] ? -1.0 : 1.0;
                x[i] ^= 1;
                for (int e = start[i]; e < start[i + 1]; ++e) field[nbr[e]] += step * wgt[e];
            }
        }
        out.samples.push_back({x, q.energy(x)});
    }
    return out;
}

/// Resolves physical samples back to logical variables: majority vote per
/// chain; exact ties are settled per variable (in index order) by whichever
/// value gives the lower logical energy with the other variables held at their
/// current resolution, preferring 0 when indifferent. Energies are recomputed
/// against the logical QUBO.
inline SampleSet unembed(const SampleSet& samples, const Embedding& e, const Qubo& q_logical) {
    SampleSet out;
    out.num_reads = samples.num_reads;
    out.sweeps = samples.sweeps;
    out.seed = samples.seed;
    out.sigma_hw = samples.sigma_hw;
    out.samples.reserve(samples.samples.size());
    const int n = q_logical.n;

    for (const auto& s : samples.samples) {
        Assignment x(n, 0);
        std::vector<char> tied(n, 0);
        for (int v = 0; v < n; ++v) {
            const auto& chain = e.chains[v];
            int ones = 0;
            for (int p : chain) ones += s.x[p] ? 1 : 0;
            const int zeros = static_cast<int>(chain.size()) - ones;
            if (ones > zeros) x[v] = 1;
            else if (ones < zeros) x[v] = 0;
            else tied[v] = 1;
        }
        for (int v = 0; v < n; ++v) {
            if (!tied[v]) continue;
            double delta = q_logical.linear_at(v);
            for (const auto& [ij, c] : q_logical.quadratic) {
                if (ij.first == v && x[ij.second]) delta += c;
                else if (ij.second == v && x[ij.first]) delta += c;
            }
            x[v] = delta < 0.0 ? 1 : 0;
        }
        out.samples.push_back({x, q_logical.energy(x)});
    }
    return out;
}

/// Fraction of (sample, multi-qubit chain) pairs whose chain is not unanimous.
inline double chain_break_fraction(const SampleSet& samples, const Embedding& e) {
    std::size_t broken = 0, total = 0;
    for (const auto& s : samples.samples) {
        for (const auto& chain : e.chains) {
            if (chain.size() < 2) continue;
            ++total;
            int ones = 0;
            for (int p : chain) ones += s.x[p] ? 1 : 0;
            if (ones != 0 && ones != static_cast<int>(chain.size())) ++broken;
        }
    }
    return total ? static_cast<double>(broken) / static_cast<double>(total) : 0.0;
}

}  // namespace hydroq
