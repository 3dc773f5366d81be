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

#include <cmath>

#include <catch_amalgamated.hpp>

#include "hydroq/anneal.hpp"
#include "hydroq/darcy.hpp"
#include "hydroq/qubo.hpp"
#include "hydroq/random.hpp"

using namespace hydroq;

namespace {

Qubo random_qubo(int n, double density, std::uint64_t seed) {
    Rng rng(seed);
    Qubo q;
    q.n = n;
    for (int i = 0; i < n; ++i)
        if (rng.uniform() < 0.85) q.add_linear(i, rng.normal(0.0, 2.0));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (rng.uniform() < density) q.add_quadratic(i, j, rng.normal(0.0, 2.0));
    return q;
}

Qubo chain_qubo_1d(int n, double k_high, std::uint64_t seed) {
    auto f = sample_permeability_1d(n, 1.0, k_high, seed);
    return build_qubo_1d(head_differences(solve_heads(f)), 1.0, k_high - 1.0);
}

}  // namespace

TEST_CASE("hardware noise rescales and perturbs") {
    Qubo q = random_qubo(10, 0.4, 3);
    Qubo clean = apply_hardware_noise(q, 0.0, 1);
    REQUIRE(clean.max_abs_coeff() == Catch::Approx(1.0));
    // argmin set unchanged by the positive rescale
    REQUIRE(brute_force_min(clean).x == brute_force_min(q).x);

    Qubo noisy = apply_hardware_noise(q, 0.05, 1);
    REQUIRE(noisy.linear != clean.linear);
    Qubo noisy_same = apply_hardware_noise(q, 0.05, 1);
    REQUIRE(noisy.linear == noisy_same.linear);
    REQUIRE(noisy.quadratic == noisy_same.quadratic);
    REQUIRE(noisy.offset == q.offset);  // offset untouched

    REQUIRE_THROWS_AS(apply_hardware_noise(q, -0.01, 0), parameter_error);
}

TEST_CASE("noise scale drowns small coupling classes only at large delta_k") {
    // at k_high = 128 the weakest coupling class sits below a 1% noise floor
    Qubo big = chain_qubo_1d(600, 128.0, 5);
    const double m_big = big.max_abs_coeff();
    double lo_big = 1e300;
    for (const auto& [ij, c] : big.quadratic) lo_big = std::min(lo_big, std::abs(c));
    REQUIRE(lo_big / m_big < 0.01);

    // at k_high = 3 every class clears the same floor comfortably
    Qubo small = chain_qubo_1d(600, 3.0, 5);
    const double m_small = small.max_abs_coeff();
    double lo_small = 1e300;
    for (const auto& [ij, c] : small.quadratic) lo_small = std::min(lo_small, std::abs(c));
    REQUIRE(lo_small / m_small > 0.01 * 5);
}

TEST_CASE("sampler reports sound energies and is reproducible") {
    Qubo q = random_qubo(16, 0.3, 11);
    SampleSet a = anneal(q, 20, 50, 77);
    REQUIRE(a.samples.size() == 20);
    for (const auto& s : a.samples) REQUIRE(s.energy == Catch::Approx(q.energy(s.x)).margin(1e-12));
    SampleSet b = anneal(q, 20, 50, 77);
    for (std::size_t i = 0; i < a.samples.size(); ++i) REQUIRE(a.samples[i].x == b.samples[i].x);
    SampleSet c = anneal(q, 20, 50, 78);
    bool same = true;
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        if (a.samples[i].x != c.samples[i].x) same = false;
    REQUIRE_FALSE(same);

    REQUIRE_THROWS_AS(anneal(q, 0, 10, 0), parameter_error);
    REQUIRE_THROWS_AS(anneal(q, 1, 0, 0), parameter_error);
}

TEST_CASE("all-zero problem anneals to the offset") {
    Qubo zero;
    zero.n = 6;
    zero.offset = 1.25;
    SampleSet s = anneal(zero, 3, 5, 0);
    for (const auto& smp : s.samples) REQUIRE(smp.energy == 1.25);
}

TEST_CASE("best-of-reads hits the exact optimum on small problems") {
    int hits = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t) {
        Qubo q = random_qubo(12, 0.4, 1000 + t);
        Solution exact = brute_force_min(q);
        SampleSet s = anneal(q, 100, 1000, 555 + t);
        double best = s.best().energy;
        if (best <= exact.energy + 1e-9) ++hits;
    }
    REQUIRE(hits >= 95);
}

TEST_CASE("positive rescaling preserves the annealing trajectory") {
    Qubo q = random_qubo(14, 0.35, 21);
    Qubo scaled = q;
    scaled.offset *= 4.0;
    for (auto& [i, c] : scaled.linear) c *= 4.0;  // power of two: exact float scaling
    for (auto& [ij, c] : scaled.quadratic) c *= 4.0;
    SampleSet a = anneal(q, 10, 200, 9);
    SampleSet b = anneal(scaled, 10, 200, 9);
    for (std::size_t i = 0; i < a.samples.size(); ++i) REQUIRE(a.samples[i].x == b.samples[i].x);
    // argmin set also unchanged for non-dyadic scales
    Qubo odd = q;
    odd.offset *= 3.7;
    for (auto& [i, c] : odd.linear) c *= 3.7;
    for (auto& [ij, c] : odd.quadratic) c *= 3.7;
    REQUIRE(brute_force_min(odd).x == brute_force_min(q).x);
}
