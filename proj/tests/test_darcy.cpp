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

#include <algorithm>
#include <cmath>
#include <set>

#include <catch_amalgamated.hpp>

#include "hydroq/darcy.hpp"
#include "hydroq/random.hpp"

using namespace hydroq;

namespace {

// 1D field with exactly n1 low and n2 high cells, deterministically shuffled.
PermeabilityField balanced_field(int n1, int n2, double k_low, double k_high, std::uint64_t seed) {
    PermeabilityField f;
    f.dims = 1;
    f.n = n1 + n2;
    f.k_low = k_low;
    f.k_high = k_high;
    f.q.assign(n1, 0);
    f.q.insert(f.q.end(), n2, 1);
    Rng rng(seed);
    for (std::size_t i = f.q.size(); i > 1; --i) std::swap(f.q[i - 1], f.q[rng.uniform_int(i)]);
    return f;
}

}  // namespace

TEST_CASE("sample_permeability draws fair binary fields") {
    auto f = sample_permeability_1d(2030, 1.0, 128.0, 7);
    REQUIRE(f.q.size() == 2030);
    for (std::size_t i = 0; i < f.q.size(); ++i) {
        REQUIRE((f.q[i] == 0 || f.q[i] == 1));
        REQUIRE((f.k_at(i) == 1.0 || f.k_at(i) == 128.0));
    }
    auto f2 = sample_permeability_1d(2030, 1.0, 128.0, 7);
    REQUIRE(f.q == f2.q);
    auto f3 = sample_permeability_1d(2030, 1.0, 128.0, 8);
    REQUIRE(f.q != f3.q);

    // degenerate delta_k = 0 still produces a constant field
    auto fd = sample_permeability_1d(4, 1.0, 1.0, 3);
    for (std::size_t i = 0; i < 4; ++i) REQUIRE(fd.k_at(i) == 1.0);

    // fraction of ones within 5 binomial sigma of 1/2
    const int n = 10000;
    auto fb = sample_permeability_1d(n, 1.0, 2.0, 99);
    double ones = 0;
    for (auto b : fb.q) ones += b;
    const double sigma = 0.5 / std::sqrt(static_cast<double>(n));
    REQUIRE(std::abs(ones / n - 0.5) < 5.0 * sigma);

    REQUIRE_THROWS_AS(sample_permeability_1d(0, 1.0, 2.0, 0), parameter_error);
    REQUIRE_THROWS_AS(sample_permeability_1d(4, 1.0, 0.5, 0), parameter_error);
    REQUIRE_THROWS_AS(sample_permeability_1d(4, 0.0, 2.0, 0), parameter_error);
    REQUIRE_THROWS_AS(sample_permeability_2d(0, 1.0, 2.0, 0), parameter_error);
}

TEST_CASE("uniform medium gives unit head drops") {
    PermeabilityField f;
    f.dims = 1;
    f.n = 9;
    f.k_low = 3.0;
    f.k_high = 3.0;
    f.q.assign(9, 0);
    auto h = solve_heads(f);
    auto d = head_differences(h);
    for (double v : d.dhx) REQUIRE(v == Catch::Approx(-1.0).margin(1e-12));
}

TEST_CASE("1D heads match the constant-flux closed form") {
    PermeabilityField f;
    f.dims = 1;
    f.n = 6;
    f.k_low = 1.0;
    f.k_high = 4.0;
    f.q = {0, 0, 1, 1, 0, 1};
    auto h = solve_heads(f);
    auto d = head_differences(h);
    double inv = 0;
    for (int i = 0; i < 6; ++i) inv += 1.0 / f.k_at(i);
    const double flux = -6.0 / inv;
    for (int i = 0; i < 6; ++i) REQUIRE(d.dhx[i] == Catch::Approx(flux / f.k_at(i)).epsilon(1e-12));
}

TEST_CASE("1D flux constancy and monotone profile") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        auto f = sample_permeability_1d(40, 1.0, 50.0, seed);
        auto h = solve_heads(f);
        auto d = head_differences(h);
        const double flux0 = f.k_at(0) * d.dhx[0];
        for (int i = 0; i < f.n; ++i) {
            REQUIRE(f.k_at(i) * d.dhx[i] == Catch::Approx(flux0).epsilon(1e-9));
            REQUIRE(d.dhx[i] < 0.0);
        }
    }
}

TEST_CASE("noiseless binary instances have exactly two head-drop levels") {
    auto f = balanced_field(20, 20, 1.0, 64.0, 5);
    auto d = head_differences(solve_heads(f));
    std::set<long long> levels;
    for (double v : d.dhx) levels.insert(llround(v * 1e9));
    REQUIRE(levels.size() == 2);

    // k_low = 1 and balanced counts keep every drop in [-2, 0]
    for (double v : d.dhx) {
        REQUIRE(v <= 0.0);
        REQUIRE(v >= -2.0);
    }
}

TEST_CASE("analytic head-drop levels") {
    auto lv = analytic_delta_h(10, 5, 5, 2.0, 2.0);
    REQUIRE(lv.dh_low == Catch::Approx(-1.0));
    REQUIRE(lv.dh_high == Catch::Approx(-1.0));

    auto big = analytic_delta_h(100, 50, 50, 1.0, 1000.0);
    REQUIRE(std::abs(big.dh_high) < 3.0 / 1000.0);      // O(1/k_high)
    REQUIRE(std::abs(big.dh_low) > 1.0);                // O(1)
    REQUIRE(std::abs(big.dh_low) < 2.0);

    // cross-check against the solver, balanced and unbalanced
    for (auto [n1, n2] : {std::pair{3, 3}, std::pair{2, 4}, std::pair{5, 1}}) {
        auto f = balanced_field(n1, n2, 1.0, 4.0, 11);
        auto d = head_differences(solve_heads(f));
        auto an = analytic_delta_h(n1 + n2, n1, n2, 1.0, 4.0);
        for (int i = 0; i < f.n; ++i) {
            const double expect = f.q[i] ? an.dh_high : an.dh_low;
            REQUIRE(d.dhx[i] == Catch::Approx(expect).epsilon(1e-9));
        }
    }

    REQUIRE_THROWS_AS(analytic_delta_h(5, 2, 2, 1.0, 2.0), parameter_error);
}

TEST_CASE("head difference basics") {
    HeadField h;
    h.dims = 1;
    h.n = 2;
    h.h = {0.0, -1.0, -2.0};
    auto d = head_differences(h);
    REQUIRE(d.dhx == std::vector<double>{-1.0, -1.0});
}

TEST_CASE("2D solve satisfies the interior balance") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto f = sample_permeability_2d(3, 1.0, 101.0, seed);
        auto h = solve_heads(f);
        const double scale = 0.0 + [&] {
            double m = 0;
            for (double v : h.h) m = std::max(m, std::abs(v));
            return m;
        }();
        REQUIRE(max_interior_residual(f, h) <= 1e-10 * std::max(1.0, scale));
    }
}

TEST_CASE("2D head differences carry both orientations") {
    auto f = sample_permeability_2d(3, 1.0, 10.0, 2);
    auto h = solve_heads(f);
    auto d = head_differences(h);
    REQUIRE(d.dhx.size() == 3 * 4);
    REQUIRE(d.dhy.size() == 4 * 3);
    // no-flow boundary rows carry exact zeros
    for (int c = 0; c < 3; ++c) {
        REQUIRE(d.dhy[c] == 0.0);
        REQUIRE(d.dhy[3 * 3 + c] == 0.0);
    }
    // x drops reconstruct the boundary-to-boundary total
    for (int r = 0; r < 3; ++r) {
        double sum = 0;
        for (int c = 0; c <= 3; ++c) sum += d.dhx[r * 4 + c];
        REQUIRE(sum == Catch::Approx(-3.0).margin(1e-10));
    }
}

TEST_CASE("doubled-center stencil solves its own operator") {
    auto f = sample_permeability_1d(12, 1.0, 8.0, 4);
    auto h = solve_heads(f, Stencil::doubled_center);
    REQUIRE(max_interior_residual(f, h, Stencil::doubled_center) < 1e-10 * 12);
    auto h_flux = solve_heads(f, Stencil::flux_form);
    bool differs = false;
    for (std::size_t i = 0; i < h.h.size(); ++i)
        if (std::abs(h.h[i] - h_flux.h[i]) > 1e-6) differs = true;
    REQUIRE(differs);

    auto f2 = sample_permeability_2d(4, 1.0, 8.0, 4);
    auto h2 = solve_heads(f2, Stencil::doubled_center);
    REQUIRE(max_interior_residual(f2, h2, Stencil::doubled_center) < 1e-10 * 16);
}

TEST_CASE("observation noise is seeded gaussian on every node") {
    auto f = sample_permeability_1d(9999, 1.0, 2.0, 21);
    auto h = solve_heads(f);
    REQUIRE(add_observation_noise(h, 0.0, 5).h == h.h);

    const double sigma = 0.1;
    auto a = add_observation_noise(h, sigma, 5);
    auto b = add_observation_noise(h, sigma, 6);
    REQUIRE(a.h != b.h);
    REQUIRE(a.h != h.h);
    REQUIRE(a.h.front() != h.h.front());  // boundary nodes perturbed too

    const std::size_t n = h.h.size();
    double mean = 0, var = 0;
    for (std::size_t i = 0; i < n; ++i) mean += a.h[i] - h.h[i];
    mean /= n;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a.h[i] - h.h[i] - mean;
        var += d * d;
    }
    var /= (n - 1);
    REQUIRE(std::abs(mean) < 5.0 * sigma / std::sqrt(static_cast<double>(n)));
    REQUIRE(std::abs(std::sqrt(var) - sigma) < 5.0 * sigma / std::sqrt(2.0 * n));

    auto f2 = sample_permeability_2d(4, 1.0, 2.0, 3);
    auto h2 = solve_heads(f2);
    auto h2n = add_observation_noise(h2, 0.3, 4);
    REQUIRE(h2n.bc_left != h2.bc_left);
    REQUIRE(h2n.bc_right != h2.bc_right);

    REQUIRE_THROWS_AS(add_observation_noise(h, -0.1, 0), parameter_error);
}
