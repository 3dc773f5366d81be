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

#include <sstream>

#include <catch_amalgamated.hpp>

#include "hydroq/darcy.hpp"
#include "hydroq/roof_duality.hpp"
#include "hydroq/serialize.hpp"

using namespace hydroq;

TEST_CASE("permeability field round-trips through JSON") {
    auto f = sample_permeability_1d(17, 1.0, 128.0, 4);
    json j = to_json(f);
    REQUIRE(j["dims"] == 1);
    REQUIRE(j["shape"] == 17);
    auto back = permeability_from_json(j);
    REQUIRE(back.q == f.q);
    REQUIRE(back.k_low == f.k_low);
    REQUIRE(back.k_high == f.k_high);

    auto f2 = sample_permeability_2d(3, 1.0, 50.0, 4);
    auto back2 = permeability_from_json(to_json(f2));
    REQUIRE(back2.q == f2.q);
    REQUIRE(back2.grid_n == 3);

    json bad = to_json(f2);
    bad["q"] = std::vector<int>{1, 0};
    REQUIRE_THROWS_AS(permeability_from_json(bad), parameter_error);
}

TEST_CASE("head field round-trips with boundary values at full precision") {
    auto f = sample_permeability_2d(4, 1.0, 7.0, 9);
    auto h = add_observation_noise(solve_heads(f), 0.25, 11);
    auto back = heads_from_json(to_json(h));
    REQUIRE(back.h == h.h);  // bitwise: doubles survive the round trip
    REQUIRE(back.bc_left == h.bc_left);
    REQUIRE(back.bc_right == h.bc_right);
    REQUIRE(back.dx == h.dx);
}

TEST_CASE("qubo JSON uses canonical sparse keys") {
    Qubo q;
    q.n = 5;
    q.offset = -0.5;
    q.add_linear(2, 1.25);
    q.add_quadratic(4, 1, -2.5);  // canonicalized to "1,4"
    json j = to_json(q);
    REQUIRE(j["linear"].contains("2"));
    REQUIRE(j["quadratic"].contains("1,4"));
    REQUIRE_FALSE(j["quadratic"].contains("4,1"));
    auto back = qubo_from_json(j);
    REQUIRE(back.n == 5);
    REQUIRE(back.offset == -0.5);
    REQUIRE(back.linear_at(2) == 1.25);
    REQUIRE(back.quadratic_at(1, 4) == -2.5);
}

TEST_CASE("fix report serializes fixes and ranges") {
    Qubo q;
    q.n = 3;
    q.add_linear(0, -2.0);
    q.add_linear(1, 3.0);
    q.add_quadratic(0, 1, 0.5);
    FixReport r = fix_variables(q);
    json j = to_json(r);
    REQUIRE(j.contains("fixes"));
    REQUIRE(j.contains("bound"));
    REQUIRE(j.contains("fixed_fraction"));
    REQUIRE(j.contains("dynamic_range_before"));
    REQUIRE(j.contains("dynamic_range_after"));
    for (const auto& [key, val] : j["fixes"].items())
        REQUIRE((val.get<int>() == 0 || val.get<int>() == 1));
}

TEST_CASE("sample sets export as JSON lines") {
    Qubo q;
    q.n = 2;
    q.add_linear(0, 1.0);
    SampleSet s;
    s.samples.push_back({{0, 1}, 0.0});
    s.samples.push_back({{1, 1}, 1.0});
    const std::string text = to_jsonl(s);
    std::istringstream in(text);
    std::string line;
    int reads = 0;
    while (std::getline(in, line)) {
        json j = json::parse(line);
        REQUIRE(j["read"] == reads);
        REQUIRE(j.contains("energy"));
        REQUIRE(j["x"].size() == 2);
        ++reads;
    }
    REQUIRE(reads == 2);
}

TEST_CASE("topology and embedding export") {
    auto topo = build_chimera(2, 2);
    json jt = to_json(topo);
    REQUIRE(jt["qubits"] == 64);
    REQUIRE(jt["edges"].size() == topo.edges().size());

    auto e = embed_2d_unit_cells(2, topo);
    json je = to_json(e);
    REQUIRE(je["chains"].size() == 12);
}

TEST_CASE("spectrum CSV has the documented header") {
    Qubo q;
    q.n = 2;
    q.add_linear(0, 3.0);
    q.add_linear(1, -1.0);
    auto csv = spectrum_to_csv(coefficient_spectrum(q));
    REQUIRE(csv.rfind("rank,magnitude\n", 0) == 0);
    REQUIRE(csv.find("0,3\n") != std::string::npos);
}
