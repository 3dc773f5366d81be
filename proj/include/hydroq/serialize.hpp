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

#include <sstream>
#include <string>

#include <json.hpp>

#include "hydroq/anneal.hpp"
#include "hydroq/chimera.hpp"
#include "hydroq/darcy.hpp"
#include "hydroq/qubo.hpp"
#include "hydroq/roof_duality.hpp"

namespace hydroq {

using nlohmann::json;

inline json to_json(const PermeabilityField& f) {
    json j;
    j["dims"] = f.dims;
    j["shape"] = f.dims == 1 ? f.n : f.grid_n;
    j["k_L"] = f.k_low;
    j["k_H"] = f.k_high;
    j["q"] = f.q;
    return j;
}

inline PermeabilityField permeability_from_json(const json& j) {
    PermeabilityField f;
    f.dims = j.at("dims").get<int>();
    if (f.dims == 1) f.n = j.at("shape").get<int>();
    else f.grid_n = j.at("shape").get<int>();
    f.k_low = j.at("k_L").get<double>();
    f.k_high = j.at("k_H").get<double>();
    f.q = j.at("q").get<std::vector<std::uint8_t>>();
    const std::size_t expected = f.dims == 1
        ? static_cast<std::size_t>(f.n)
        : static_cast<std::size_t>(2) * f.grid_n * (f.grid_n + 1);
    if (f.q.size() != expected) throw parameter_error("permeability_from_json: q length mismatch");
    return f;
}

inline json to_json(const HeadField& h) {
    json j;
    j["dims"] = h.dims;
    j["shape"] = h.dims == 1 ? h.n : h.grid_n;
    j["dx"] = h.dx;
    j["dy"] = h.dy;
    j["bc"] = {{"left", h.bc_left}, {"right", h.bc_right}};
    j["h"] = h.h;
    return j;
}

inline HeadField heads_from_json(const json& j) {
    HeadField h;
    h.dims = j.at("dims").get<int>();
    if (h.dims == 1) h.n = j.at("shape").get<int>();
    else h.grid_n = j.at("shape").get<int>();
    h.dx = j.at("dx").get<double>();
    h.dy = j.at("dy").get<double>();
    h.bc_left = j.at("bc").at("left").get<std::vector<double>>();
    h.bc_right = j.at("bc").at("right").get<std::vector<double>>();
    h.h = j.at("h").get<std::vector<double>>();
    return h;
}

inline json to_json(const Qubo& q) {
    json lin = json::object();
    for (const auto& [i, c] : q.linear) lin[std::to_string(i)] = c;
    json quad = json::object();
    for (const auto& [ij, c] : q.quadratic)
        quad[std::to_string(ij.first) + "," + std::to_string(ij.second)] = c;
    return json{{"n", q.n}, {"offset", q.offset}, {"linear", lin}, {"quadratic", quad}};
}

inline Qubo qubo_from_json(const json& j) {
    Qubo q;
    q.n = j.at("n").get<int>();
    q.offset = j.at("offset").get<double>();
    for (const auto& [key, val] : j.at("linear").items())
        q.add_linear(std::stoi(key), val.get<double>());
    for (const auto& [key, val] : j.at("quadratic").items()) {
        const auto comma = key.find(',');
        if (comma == std::string::npos) throw parameter_error("qubo_from_json: bad quadratic key");
        q.add_quadratic(std::stoi(key.substr(0, comma)), std::stoi(key.substr(comma + 1)),
                        val.get<double>());
    }
    return q;
}

inline json to_json(const FixReport& r) {
    json fixes = json::object();
    for (const auto& [i, v] : r.fixes) fixes[std::to_string(i)] = v;
    return json{{"fixes", fixes},
                {"bound", r.roof_dual_bound},
                {"fixed_fraction", r.fixed_fraction},
                {"dynamic_range_before", r.dynamic_range_before},
                {"dynamic_range_after", r.dynamic_range_after}};
}

/// One JSON record per read: {"read": i, "energy": e, "x": [bits]}.
inline std::string to_jsonl(const SampleSet& s) {
    std::ostringstream out;
    for (std::size_t i = 0; i < s.samples.size(); ++i) {
        json j{{"read", i}, {"energy", s.samples[i].energy}, {"x", s.samples[i].x}};
        out << j.dump() << '\n';
    }
    return out.str();
}

inline json to_json(const ChimeraTopology& t) {
    json adj = json::array();
    for (const auto& [a, b] : t.edges()) adj.push_back({a, b});
    return json{{"rows", t.rows}, {"cols", t.cols}, {"qubits", t.num_qubits()}, {"edges", adj}};
}

inline json to_json(const Embedding& e) {
    json chains = json::object();
    for (std::size_t v = 0; v < e.chains.size(); ++v) chains[std::to_string(v)] = e.chains[v];
    return json{{"chains", chains}, {"chain_strength", e.chain_strength}};
}

/// Spectrum rows as CSV text: rank,magnitude.
inline std::string spectrum_to_csv(const SpectrumReport& r) {
    std::ostringstream out;
    out << "rank,magnitude\n";
    char buf[64];
    for (std::size_t i = 0; i < r.magnitudes.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, r.magnitudes[i]);
        out << buf;
    }
    return out.str();
}

}  // namespace hydroq
