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

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "hydroq/anneal.hpp"
#include "hydroq/chimera.hpp"
#include "hydroq/darcy.hpp"
#include "hydroq/postprocess.hpp"
#include "hydroq/qubo.hpp"
#include "hydroq/random.hpp"
#include "hydroq/roof_duality.hpp"
#include "hydroq/serialize.hpp"

namespace hydroq {

/// Everything a sweep needs; mirrors the flat key = value config file.
struct ExperimentConfig {
    std::string experiment = "run";
    int dims = 1;
    int n = 64;                                   // 1D chain length
    int grid_n = 4;                               // 2D measurement grid N
    std::vector<int> grid_list = {2, 4, 6, 8, 12, 16};
    std::vector<double> delta_k = {2, 4, 8, 16, 32, 50, 64, 100, 128};
    std::vector<double> sigma = {0.0};
    std::vector<int> samples = {1, 4, 16, 64, 256};
    int num_reads = 1000;
    int sweeps = 1000;
    int reads_per_call = 0;  // 0 = auto: one call per run, or per sample for mqc
    double sigma_hw = 0.01;
    int repetitions = 10;
    std::uint64_t seed = 0;
    std::vector<std::string> pipelines = {"plain"};
    std::string out;
    double k_low = 1.0;
    double chain_strength = 0.0;  // <= 0: automatic
    int max_width = 4;
    bool po_per_sample = false;
    Stencil stencil = Stencil::flux_form;
    int chimera_m = 16;  // chip size for 1D embeddings
};

struct PipelineFlags {
    bool fv = false;
    bool po = false;
    bool mqc = false;
};

inline PipelineFlags parse_pipeline(const std::string& name) {
    if (name == "plain") return {};
    if (name == "fv") return {true, false, false};
    if (name == "po") return {false, true, false};
    if (name == "fv+po") return {true, true, false};
    if (name == "mqc") return {false, false, true};
    if (name == "fv+po+mqc") return {true, true, true};
    throw parameter_error("unknown pipeline: " + name);
}

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    for (auto& item : out) {
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        item = a == std::string::npos ? "" : item.substr(a, b - a + 1);
    }
    return out;
}

inline double parse_double(const std::string& s) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used != s.size()) throw parameter_error("bad number: " + s);
        return v;
    } catch (const std::exception&) {
        throw parameter_error("bad number: " + s);
    }
}

inline long parse_long(const std::string& s) {
    try {
        std::size_t used = 0;
        long v = std::stol(s, &used);
        if (used != s.size()) throw parameter_error("bad integer: " + s);
        return v;
    } catch (const std::exception&) {
        throw parameter_error("bad integer: " + s);
    }
}

}  // namespace detail

inline ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        const auto a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw parameter_error("config line " + std::to_string(line_no) + ": expected key = value");
        auto trim = [](std::string s) {
            const auto x = s.find_first_not_of(" \t\r");
            const auto y = s.find_last_not_of(" \t\r");
            return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "experiment") cfg.experiment = val;
        else if (key == "dims") cfg.dims = static_cast<int>(detail::parse_long(val));
        else if (key == "n") cfg.n = static_cast<int>(detail::parse_long(val));
        else if (key == "grid_n") cfg.grid_n = static_cast<int>(detail::parse_long(val));
        else if (key == "grid_list") {
            cfg.grid_list.clear();
            for (const auto& item : detail::split_list(val))
                cfg.grid_list.push_back(static_cast<int>(detail::parse_long(item)));
        } else if (key == "delta_k") {
            cfg.delta_k.clear();
            for (const auto& item : detail::split_list(val)) cfg.delta_k.push_back(detail::parse_double(item));
        } else if (key == "sigma") {
            cfg.sigma.clear();
            for (const auto& item : detail::split_list(val)) cfg.sigma.push_back(detail::parse_double(item));
        } else if (key == "samples") {
            cfg.samples.clear();
            for (const auto& item : detail::split_list(val))
                cfg.samples.push_back(static_cast<int>(detail::parse_long(item)));
        } else if (key == "num_reads") cfg.num_reads = static_cast<int>(detail::parse_long(val));
        else if (key == "sweeps") cfg.sweeps = static_cast<int>(detail::parse_long(val));
        else if (key == "reads_per_call") cfg.reads_per_call = static_cast<int>(detail::parse_long(val));
        else if (key == "sigma_hw") cfg.sigma_hw = detail::parse_double(val);
        else if (key == "repetitions") cfg.repetitions = static_cast<int>(detail::parse_long(val));
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(detail::parse_long(val));
        else if (key == "pipelines") cfg.pipelines = detail::split_list(val);
        else if (key == "out") cfg.out = val;
        else if (key == "k_low") cfg.k_low = detail::parse_double(val);
        else if (key == "chain_strength") cfg.chain_strength = detail::parse_double(val);
        else if (key == "max_width") cfg.max_width = static_cast<int>(detail::parse_long(val));
        else if (key == "po_per_sample") cfg.po_per_sample = (val == "true" || val == "1");
        else if (key == "stencil") {
            if (val == "flux") cfg.stencil = Stencil::flux_form;
            else if (val == "doubled_center") cfg.stencil = Stencil::doubled_center;
            else throw parameter_error("config: stencil must be flux or doubled_center");
        } else if (key == "chimera_m") cfg.chimera_m = static_cast<int>(detail::parse_long(val));
        else throw parameter_error("config: unknown key '" + key + "'");
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parameter_error("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

inline void validate_config(const ExperimentConfig& cfg) {
    if (cfg.dims != 1 && cfg.dims != 2) throw parameter_error("config: dims must be 1 or 2");
    if (cfg.n < 2) throw parameter_error("config: n must be >= 2");
    if (cfg.grid_n < 1) throw parameter_error("config: grid_n must be >= 1");
    if (cfg.delta_k.empty() || cfg.sigma.empty() || cfg.samples.empty() || cfg.grid_list.empty())
        throw parameter_error("config: lists must be nonempty");
    for (double dk : cfg.delta_k)
        if (!(dk > 0.0)) throw parameter_error("config: delta_k values must be > 0");
    for (double s : cfg.sigma)
        if (s < 0.0) throw parameter_error("config: sigma values must be >= 0");
    for (int m : cfg.samples)
        if (m < 1) throw parameter_error("config: sample counts must be >= 1");
    if (cfg.num_reads < 1 || cfg.sweeps < 1) throw parameter_error("config: num_reads, sweeps >= 1");
    if (cfg.repetitions < 1) throw parameter_error("config: repetitions >= 1");
    if (cfg.sigma_hw < 0.0) throw parameter_error("config: sigma_hw must be >= 0");
    if (!(cfg.k_low > 0.0)) throw parameter_error("config: k_low must be > 0");
    for (const auto& p : cfg.pipelines) parse_pipeline(p);
}

struct ResultRow {
    std::string experiment;
    long run_index = 0;
    std::string pipeline;
    int dims = 1;
    int size = 0;
    double delta_k = 0.0;
    double sigma = 0.0;
    long samples_used = 0;
    double accuracy_value = std::nan("");
    double fixed_fraction = std::nan("");
    double best_energy = std::nan("");
    double energy_true = std::nan("");
    double energy_ratio = std::nan("");
    double t_generate = 0.0, t_solve = 0.0, t_fv = 0.0, t_po = 0.0, t_mqc = 0.0;
};

inline const char* result_csv_header() {
    return "experiment,run_index,pipeline,dims,size,delta_k,sigma,samples_used,accuracy,"
           "fixed_fraction,best_energy,energy_true,energy_ratio,t_generate,t_solve,t_fv,t_po,t_mqc";
}

namespace detail {

inline std::string fmt_double(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt_time(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

}  // namespace detail

inline std::string to_csv(const ResultRow& r) {
    std::ostringstream out;
    out << r.experiment << ',' << r.run_index << ',' << r.pipeline << ',' << r.dims << ',' << r.size
        << ',' << detail::fmt_double(r.delta_k) << ',' << detail::fmt_double(r.sigma) << ','
        << r.samples_used << ',' << detail::fmt_double(r.accuracy_value) << ','
        << detail::fmt_double(r.fixed_fraction) << ',' << detail::fmt_double(r.best_energy) << ','
        << detail::fmt_double(r.energy_true) << ',' << detail::fmt_double(r.energy_ratio) << ','
        << detail::fmt_time(r.t_generate) << ',' << detail::fmt_time(r.t_solve) << ','
        << detail::fmt_time(r.t_fv) << ',' << detail::fmt_time(r.t_po) << ','
        << detail::fmt_time(r.t_mqc);
    return out.str();
}

/// A generated inverse problem: ground truth, (possibly noisy) observations,
/// and the logical QUBO built from them.
struct Instance {
    PermeabilityField truth;
    HeadField heads_observed;
    Qubo qubo;
    double delta_k = 0.0;
    double sigma = 0.0;
    double t_generate = 0.0;
};

inline double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

/// Builds a 1D or 2D instance: sample field, solve heads, perturb, build QUBO
/// (closed form in 1D, residual-squared in 2D).
inline Instance make_instance(const ExperimentConfig& cfg, int dims, int size, double delta_k,
                              double sigma, std::uint64_t instance_seed) {
    Instance inst;
    inst.delta_k = delta_k;
    inst.sigma = sigma;
    const double t0 = now_seconds();
    const double k_high = cfg.k_low + delta_k;
    if (dims == 1) {
        inst.truth = sample_permeability_1d(size, cfg.k_low, k_high, derive_seed(instance_seed, 1));
        HeadField heads = solve_heads(inst.truth, cfg.stencil);
        inst.heads_observed =
            sigma > 0.0 ? add_observation_noise(heads, sigma, derive_seed(instance_seed, 2)) : heads;
        inst.qubo = build_qubo_1d(head_differences(inst.heads_observed), cfg.k_low, delta_k);
    } else {
        inst.truth = sample_permeability_2d(size, cfg.k_low, k_high, derive_seed(instance_seed, 1));
        HeadField heads = solve_heads(inst.truth, cfg.stencil);
        inst.heads_observed =
            sigma > 0.0 ? add_observation_noise(heads, sigma, derive_seed(instance_seed, 2)) : heads;
        inst.qubo = build_qubo_residual(inst.heads_observed, cfg.k_low, delta_k, cfg.stencil);
    }
    inst.t_generate = now_seconds() - t0;
    return inst;
}

/// Runs one pipeline on one instance: FV reduce -> embed -> hardware noise ->
/// anneal -> unembed -> PO -> MQC -> decode -> score. Best-energy selection
/// applies when MQC is off. `reads` is the number of annealer samples to draw
/// for this run (the MQC sample budget when MQC is on).
inline ResultRow run_pipeline(const ExperimentConfig& cfg, const Instance& inst,
                              const std::string& pipeline_name, int reads, long run_index,
                              std::uint64_t sampler_seed) {
    const PipelineFlags flags = parse_pipeline(pipeline_name);
    ResultRow row;
    row.experiment = cfg.experiment;
    row.run_index = run_index;
    row.pipeline = pipeline_name;
    row.dims = inst.truth.dims;
    row.size = inst.truth.dims == 1 ? inst.truth.n : inst.truth.grid_n;
    row.delta_k = inst.delta_k;
    row.sigma = inst.sigma;
    row.t_generate = inst.t_generate;

    const Qubo& logical = inst.qubo;
    row.energy_true = logical.energy(inst.truth.q);

    // FV preprocessing
    Qubo working = logical;
    std::map<int, int> fixes;
    if (flags.fv) {
        const double t0 = now_seconds();
        FixReport report = fix_variables(logical);
        row.t_fv = now_seconds() - t0;
        row.fixed_fraction = report.fixed_fraction;
        fixes = std::move(report.fixes);
        working = apply_fixes(logical, fixes).first;
    }

    // sampling stage (skipped when FV already fixed everything)
    std::vector<Sample> logical_samples;
    const bool all_fixed = static_cast<int>(fixes.size()) == logical.n;
    if (!all_fixed) {
        const double t0 = now_seconds();
        ChimeraTopology topo = inst.truth.dims == 1
                                   ? build_chimera(cfg.chimera_m, cfg.chimera_m)
                                   : build_chimera(inst.truth.grid_n, inst.truth.grid_n);
        Embedding emb = inst.truth.dims == 1 ? embed_1d_chain(logical.n, topo)
                                             : embed_2d_unit_cells(inst.truth.grid_n, topo);
        if (cfg.chain_strength > 0.0) emb.chain_strength = cfg.chain_strength;
        const Qubo physical = embed_qubo(working, emb, topo);

        int per_call = cfg.reads_per_call;
        if (per_call <= 0) per_call = flags.mqc ? 1 : reads;  // fresh control error per sample for MQC
        int drawn = 0, call = 0;
        while (drawn < reads) {
            const int batch = std::min(per_call, reads - drawn);
            const Qubo noisy =
                apply_hardware_noise(physical, cfg.sigma_hw, derive_seed(sampler_seed, 1000 + call));
            SampleSet phys_set =
                anneal(noisy, batch, cfg.sweeps, derive_seed(sampler_seed, 2000 + call));
            phys_set.sigma_hw = cfg.sigma_hw;
            SampleSet log_set = unembed(phys_set, emb, logical);
            for (auto& s : log_set.samples) {
                for (const auto& [v, val] : fixes) s.x[v] = static_cast<std::uint8_t>(val);
                s.energy = logical.energy(s.x);
                logical_samples.push_back(std::move(s));
            }
            drawn += batch;
            ++call;
        }
        row.t_solve = now_seconds() - t0;
        row.samples_used = reads;
    } else {
        Assignment x(logical.n, 0);
        for (const auto& [v, val] : fixes) x[v] = static_cast<std::uint8_t>(val);
        logical_samples.push_back({x, logical.energy(x)});
        row.samples_used = 0;
    }

    // PO: exact local re-optimization (per sample when feeding MQC, else on the best)
    if (flags.po) {
        const double t0 = now_seconds();
        const Decomposition decomp = decompose_low_treewidth(logical, cfg.max_width);
        const bool per_sample = flags.mqc || cfg.po_per_sample;
        if (per_sample) {
            for (auto& s : logical_samples) {
                s.x = optimize_local(logical, s.x, decomp);
                s.energy = logical.energy(s.x);
            }
        } else {
            std::size_t bi = 0;
            for (std::size_t i = 1; i < logical_samples.size(); ++i)
                if (logical_samples[i].energy < logical_samples[bi].energy) bi = i;
            logical_samples[bi].x = optimize_local(logical, logical_samples[bi].x, decomp);
            logical_samples[bi].energy = logical.energy(logical_samples[bi].x);
        }
        row.t_po = now_seconds() - t0;
    }

    // final selection: MQC fusion or lowest energy
    Assignment chosen;
    if (flags.mqc) {
        const double t0 = now_seconds();
        SampleSet pool;
        pool.samples = logical_samples;
        chosen = mqc(logical, pool);
        row.t_mqc = now_seconds() - t0;
    } else {
        std::size_t bi = 0;
        for (std::size_t i = 1; i < logical_samples.size(); ++i)
            if (logical_samples[i].energy < logical_samples[bi].energy) bi = i;
        chosen = logical_samples[bi].x;
    }
    for (const auto& [v, val] : fixes) chosen[v] = static_cast<std::uint8_t>(val);

    row.best_energy = logical.energy(chosen);
    row.accuracy_value = accuracy(decode_permeability(chosen, inst.truth), inst.truth);
    return row;
}

namespace detail {

struct SummaryAccumulator {
    // key -> (count, mean, M2) via Welford
    std::map<std::string, std::array<double, 3>> acc;

    void add(const ResultRow& r, double value) {
        std::ostringstream key;
        key << r.pipeline << ',' << r.dims << ',' << r.size << ',' << fmt_double(r.delta_k) << ','
            << fmt_double(r.sigma) << ',' << r.samples_used;
        auto& slot = acc[key.str()];
        slot[0] += 1.0;
        const double d = value - slot[1];
        slot[1] += d / slot[0];
        slot[2] += d * (value - slot[1]);
    }

    std::string csv() const {
        std::ostringstream out;
        out << "pipeline,dims,size,delta_k,sigma,samples_used,count,mean_accuracy,std_accuracy\n";
        for (const auto& [key, slot] : acc) {
            const double n = slot[0];
            const double stddev = n > 1 ? std::sqrt(slot[2] / (n - 1)) : 0.0;
            out << key << ',' << static_cast<long>(n) << ',' << fmt_double(slot[1]) << ','
                << fmt_double(stddev) << '\n';
        }
        return out.str();
    }
};

inline void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw parameter_error("cannot open output file: " + path);
    out << content;
}

}  // namespace detail

struct SweepOutput {
    std::string rows_csv;     // ResultRow rows
    std::string summary_csv;  // per-point mean/std accuracy
};

namespace detail {

template <typename Body>
inline SweepOutput run_sweep(const ExperimentConfig& cfg, Body&& body) {
    std::ostringstream rows;
    rows << result_csv_header() << '\n';
    SummaryAccumulator summary;
    long run_index = 0;
    body([&](ResultRow row) {
        row.run_index = run_index++;
        rows << to_csv(row) << '\n';
        summary.add(row, row.accuracy_value);
    });
    SweepOutput out;
    out.rows_csv = rows.str();
    out.summary_csv = summary.csv();
    if (!cfg.out.empty()) {
        write_text(cfg.out, out.rows_csv);
        write_text(cfg.out + ".summary.csv", out.summary_csv);
    }
    return out;
}

}  // namespace detail

/// Accuracy vs delta_k for the 1D problem (plus MQC sample-count curves when
/// an mqc pipeline is configured).
inline SweepOutput sweep_delta_k_1d(const ExperimentConfig& cfg) {
    validate_config(cfg);
    return detail::run_sweep(cfg, [&](auto emit) {
        for (std::size_t di = 0; di < cfg.delta_k.size(); ++di) {
            for (int rep = 0; rep < cfg.repetitions; ++rep) {
                const std::uint64_t inst_seed = derive_seed(derive_seed(cfg.seed, di), rep);
                const Instance inst =
                    make_instance(cfg, 1, cfg.n, cfg.delta_k[di], cfg.sigma.front(), inst_seed);
                for (std::size_t pi = 0; pi < cfg.pipelines.size(); ++pi) {
                    const auto flags = parse_pipeline(cfg.pipelines[pi]);
                    const std::vector<int> counts =
                        flags.mqc ? cfg.samples : std::vector<int>{cfg.num_reads};
                    for (std::size_t si = 0; si < counts.size(); ++si) {
                        emit(run_pipeline(cfg, inst, cfg.pipelines[pi], counts[si], 0,
                                          derive_seed(inst_seed, 7000 + pi * 131 + si)));
                    }
                }
            }
        }
    });
}

/// Accuracy vs delta_k for the 2D problem at fixed grid size.
inline SweepOutput sweep_delta_k_2d(const ExperimentConfig& cfg) {
    validate_config(cfg);
    return detail::run_sweep(cfg, [&](auto emit) {
        for (std::size_t di = 0; di < cfg.delta_k.size(); ++di) {
            for (int rep = 0; rep < cfg.repetitions; ++rep) {
                const std::uint64_t inst_seed =
                    derive_seed(derive_seed(cfg.seed, 100000 + di), rep);
                const Instance inst =
                    make_instance(cfg, 2, cfg.grid_n, cfg.delta_k[di], cfg.sigma.front(), inst_seed);
                for (std::size_t pi = 0; pi < cfg.pipelines.size(); ++pi) {
                    const auto flags = parse_pipeline(cfg.pipelines[pi]);
                    const std::vector<int> counts =
                        flags.mqc ? cfg.samples : std::vector<int>{cfg.num_reads};
                    for (std::size_t si = 0; si < counts.size(); ++si) {
                        emit(run_pipeline(cfg, inst, cfg.pipelines[pi], counts[si], 0,
                                          derive_seed(inst_seed, 7000 + pi * 131 + si)));
                    }
                }
            }
        }
    });
}

/// Accuracy and per-stage timing vs grid size N at fixed delta_k
/// (cfg.delta_k.front(), 100 in the published setup).
inline SweepOutput sweep_grid_scaling(const ExperimentConfig& cfg) {
    validate_config(cfg);
    return detail::run_sweep(cfg, [&](auto emit) {
        for (std::size_t gi = 0; gi < cfg.grid_list.size(); ++gi) {
            for (int rep = 0; rep < cfg.repetitions; ++rep) {
                const std::uint64_t inst_seed =
                    derive_seed(derive_seed(cfg.seed, 200000 + gi), rep);
                const Instance inst = make_instance(cfg, 2, cfg.grid_list[gi], cfg.delta_k.front(),
                                                    cfg.sigma.front(), inst_seed);
                for (std::size_t pi = 0; pi < cfg.pipelines.size(); ++pi) {
                    const auto flags = parse_pipeline(cfg.pipelines[pi]);
                    const int reads = flags.mqc ? cfg.samples.back() : cfg.num_reads;
                    emit(run_pipeline(cfg, inst, cfg.pipelines[pi], reads, 0,
                                      derive_seed(inst_seed, 7000 + pi * 131)));
                }
            }
        }
    });
}

/// Observation-noise study. In 1D the exact ground state of the noisy QUBO is
/// computed by chain dynamic programming and the row carries the energy ratio
/// H_sigma(k_min) / H_sigma(k_true); ratio = 1 when the noisy minimum still
/// decodes to the truth. In 2D the configured pipelines run at each sigma with
/// FV fixed fractions recorded.
inline SweepOutput sweep_noise(const ExperimentConfig& cfg) {
    validate_config(cfg);
    return detail::run_sweep(cfg, [&](auto emit) {
        for (std::size_t di = 0; di < cfg.delta_k.size(); ++di) {
            for (std::size_t si = 0; si < cfg.sigma.size(); ++si) {
                for (int rep = 0; rep < cfg.repetitions; ++rep) {
                    const std::uint64_t inst_seed =
                        derive_seed(derive_seed(derive_seed(cfg.seed, 300000 + di), si), rep);
                    if (cfg.dims == 1) {
                        const Instance inst =
                            make_instance(cfg, 1, cfg.n, cfg.delta_k[di], cfg.sigma[si], inst_seed);
                        const Solution sol = chain_exact_min(inst.qubo);
                        ResultRow row;
                        row.experiment = cfg.experiment;
                        row.pipeline = "chain-exact";
                        row.dims = 1;
                        row.size = cfg.n;
                        row.delta_k = cfg.delta_k[di];
                        row.sigma = cfg.sigma[si];
                        row.t_generate = inst.t_generate;
                        row.best_energy = sol.energy;
                        row.energy_true = inst.qubo.energy(inst.truth.q);
                        row.accuracy_value =
                            accuracy(decode_permeability(sol.x, inst.truth), inst.truth);
                        if (sol.x == inst.truth.q) row.energy_ratio = 1.0;
                        else if (row.energy_true != 0.0)
                            row.energy_ratio = row.best_energy / row.energy_true;
                        emit(row);
                    } else {
                        const Instance inst = make_instance(cfg, 2, cfg.grid_n, cfg.delta_k[di],
                                                            cfg.sigma[si], inst_seed);
                        for (std::size_t pi = 0; pi < cfg.pipelines.size(); ++pi) {
                            emit(run_pipeline(cfg, inst, cfg.pipelines[pi], cfg.num_reads, 0,
                                              derive_seed(inst_seed, 7000 + pi * 131)));
                        }
                    }
                }
            }
        }
    });
}

/// Coefficient spectrum of a noiseless instance at delta_k.front().
inline std::string emit_spectrum(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const Instance inst = make_instance(cfg, cfg.dims, cfg.dims == 1 ? cfg.n : cfg.grid_n,
                                        cfg.delta_k.front(), 0.0, derive_seed(cfg.seed, 424242));
    const std::string csv = spectrum_to_csv(coefficient_spectrum(inst.qubo));
    if (!cfg.out.empty()) detail::write_text(cfg.out, csv);
    return csv;
}

}  // namespace hydroq
