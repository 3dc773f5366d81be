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

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "hydroq/experiment.hpp"
#include "hydroq/serialize.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitCapacity = 3;

struct CommonArgs {
    std::string config_path;
    std::optional<long> seed;
    std::string out;
};

hydroq::ExperimentConfig resolve_config(const CommonArgs& args) {
    hydroq::ExperimentConfig cfg;
    if (!args.config_path.empty()) cfg = hydroq::load_config(args.config_path);
    if (args.seed) cfg.seed = static_cast<std::uint64_t>(*args.seed);
    if (!args.out.empty()) cfg.out = args.out;
    return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "experiment config file (key = value lines)");
    cmd->add_option("--seed", args.seed, "master seed (overrides config)");
    cmd->add_option("--out", args.out, "output path (overrides config)");
}

void write_or_print(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw hydroq::parameter_error("cannot open output file: " + path);
    out << content;
}

int run_generate(const hydroq::ExperimentConfig& cfg) {
    hydroq::validate_config(cfg);
    const int size = cfg.dims == 1 ? cfg.n : cfg.grid_n;
    const hydroq::Instance inst = hydroq::make_instance(
        cfg, cfg.dims, size, cfg.delta_k.front(), cfg.sigma.front(), hydroq::derive_seed(cfg.seed, 0));
    hydroq::json j;
    j["permeability"] = hydroq::to_json(inst.truth);
    j["heads"] = hydroq::to_json(inst.heads_observed);
    j["qubo"] = hydroq::to_json(inst.qubo);
    j["delta_k"] = inst.delta_k;
    j["sigma"] = inst.sigma;
    write_or_print(cfg.out, j.dump(2) + "\n");
    return kExitOk;
}

int run_solve(const hydroq::ExperimentConfig& cfg, const std::string& in_path,
              const std::string& pipeline) {
    hydroq::validate_config(cfg);
    hydroq::Instance inst;
    if (!in_path.empty()) {
        std::ifstream in(in_path);
        if (!in) throw hydroq::parameter_error("cannot open instance file: " + in_path);
        hydroq::json j = hydroq::json::parse(in);
        inst.truth = hydroq::permeability_from_json(j.at("permeability"));
        inst.heads_observed = hydroq::heads_from_json(j.at("heads"));
        inst.qubo = hydroq::qubo_from_json(j.at("qubo"));
        inst.delta_k = j.at("delta_k").get<double>();
        inst.sigma = j.at("sigma").get<double>();
    } else {
        const int size = cfg.dims == 1 ? cfg.n : cfg.grid_n;
        inst = hydroq::make_instance(cfg, cfg.dims, size, cfg.delta_k.front(), cfg.sigma.front(),
                                     hydroq::derive_seed(cfg.seed, 0));
    }
    const hydroq::ResultRow row = hydroq::run_pipeline(cfg, inst, pipeline, cfg.num_reads, 0,
                                                       hydroq::derive_seed(cfg.seed, 1));
    hydroq::json j;
    j["experiment"] = row.experiment;
    j["pipeline"] = row.pipeline;
    j["dims"] = row.dims;
    j["size"] = row.size;
    j["delta_k"] = row.delta_k;
    j["sigma"] = row.sigma;
    j["samples_used"] = row.samples_used;
    j["accuracy"] = row.accuracy_value;
    if (!std::isnan(row.fixed_fraction)) j["fixed_fraction"] = row.fixed_fraction;
    j["best_energy"] = row.best_energy;
    j["energy_true"] = row.energy_true;
    write_or_print(cfg.out, j.dump(2) + "\n");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"binary permeability inversion via QUBO sampling, preprocessing and postprocessing"};
    app.require_subcommand(1);

    CommonArgs gen_args, solve_args, dk1_args, dk2_args, grid_args, noise_args, spec_args;
    std::string solve_in, solve_pipeline = "plain";

    CLI::App* c_gen = app.add_subcommand("generate", "generate an instance (field, heads, QUBO)");
    add_common(c_gen, gen_args);
    CLI::App* c_solve = app.add_subcommand("solve", "run one pipeline on an instance");
    add_common(c_solve, solve_args);
    c_solve->add_option("--in", solve_in, "instance JSON produced by generate (default: generate fresh)");
    c_solve->add_option("--pipeline", solve_pipeline,
                        "plain | fv | po | fv+po | mqc | fv+po+mqc");
    CLI::App* c_dk1 = app.add_subcommand("sweep-dk-1d", "1D accuracy vs delta_k sweep");
    add_common(c_dk1, dk1_args);
    CLI::App* c_dk2 = app.add_subcommand("sweep-dk-2d", "2D accuracy vs delta_k sweep");
    add_common(c_dk2, dk2_args);
    CLI::App* c_grid = app.add_subcommand("sweep-grid", "2D accuracy/timing vs grid size sweep");
    add_common(c_grid, grid_args);
    CLI::App* c_noise = app.add_subcommand("sweep-noise", "observation-noise study");
    add_common(c_noise, noise_args);
    CLI::App* c_spec = app.add_subcommand("spectrum", "QUBO coefficient spectrum dump");
    add_common(c_spec, spec_args);

    try {
        app.parse(argc, argv);
        if (c_gen->parsed()) return run_generate(resolve_config(gen_args));
        if (c_solve->parsed()) return run_solve(resolve_config(solve_args), solve_in, solve_pipeline);
        if (c_dk1->parsed()) {
            auto cfg = resolve_config(dk1_args);
            auto out = hydroq::sweep_delta_k_1d(cfg);
            if (cfg.out.empty()) std::cout << out.rows_csv;
            return kExitOk;
        }
        if (c_dk2->parsed()) {
            auto cfg = resolve_config(dk2_args);
            auto out = hydroq::sweep_delta_k_2d(cfg);
            if (cfg.out.empty()) std::cout << out.rows_csv;
            return kExitOk;
        }
        if (c_grid->parsed()) {
            auto cfg = resolve_config(grid_args);
            auto out = hydroq::sweep_grid_scaling(cfg);
            if (cfg.out.empty()) std::cout << out.rows_csv;
            return kExitOk;
        }
        if (c_noise->parsed()) {
            auto cfg = resolve_config(noise_args);
            auto out = hydroq::sweep_noise(cfg);
            if (cfg.out.empty()) std::cout << out.rows_csv;
            return kExitOk;
        }
        if (c_spec->parsed()) {
            auto cfg = resolve_config(spec_args);
            auto csv = hydroq::emit_spectrum(cfg);
            if (cfg.out.empty()) std::cout << csv;
            return kExitOk;
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitValidation;
    } catch (const hydroq::capacity_error& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const hydroq::parameter_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const hydroq::size_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const hydroq::structure_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
