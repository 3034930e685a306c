// Copyright 2026 The SpecTTM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "specttm/specttm.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

enum Exit { kOk = 0, kInvalid = 1, kFailure = 2 };

void print_errors(const specttm::ConfigValidationError& e) {
    for (const auto& err : e.errors()) std::cerr << "error: " << err.str() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spectral transfer-tensor characterization of single-qubit noise"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(specttm::kVersion));

    std::string config_path, out_dir, preset;
    std::optional<std::uint64_t> seed;
    auto* run = app.add_subcommand("run", "Run a pipeline and write CSV outputs");
    run->add_option("config", config_path, "Config file (key = value lines)")->required();
    run->add_option("--out", out_dir, "Output directory, overrides output_dir");
    run->add_option("--seed", seed, "Master seed, overrides master_seed");
    run->add_option("--preset", preset, "Figure parameter set")->check(CLI::IsMember({"fig2", "fig3", "fig4", "fig5"}));

    auto* validate = app.add_subcommand("validate", "Check a config and echo the parsed parameters");
    validate->add_option("config", config_path, "Config file")->required();

    int qubits = 1, K = 0, M = 0;
    auto* resources = app.add_subcommand("resources", "Circuit count for a protocol size");
    resources->add_option("--qubits", qubits, "Number of qubits")->default_val(1);
    resources->add_option("--K", K, "Interleaved applications per signal")->required();
    resources->add_option("--M", M, "Memory depth")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kInvalid;
    }

    try {
        if (*resources) {
            if (qubits < 1 || K < 1 || M < 1) {
                std::cerr << "error: --qubits, --K and --M must be positive\n";
                return kInvalid;
            }
            std::cout << "resource_estimate " << specttm::resource_estimate(qubits, K, M) << "\n"
                      << "gst_resource_estimate " << specttm::gst_resource_estimate(qubits, M) << "\n";
            return kOk;
        }
        specttm::RunConfig cfg = specttm::load_config(config_path, preset);
        if (*validate) {
            std::cout << "ok config_hash=" << specttm::config_hash(cfg) << "\n";
            for (const auto& [k, v] : cfg.echo()) std::cout << k << " = " << v << "\n";
            return kOk;
        }
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (seed) cfg.master_seed = *seed;
        const auto result = specttm::run_pipeline(cfg);
        std::cout << "run_id " << result.record.run_id << "\noutput_dir " << result.record.output_dir << "\n";
        for (const auto& [k, v] : result.summary) std::cout << k << " " << v << "\n";
        for (const auto& d : result.diagnostics) std::cout << "note: " << d << "\n";
        return kOk;
    } catch (const specttm::ConfigValidationError& e) {
        print_errors(e);
        return kInvalid;
    } catch (const std::exception& e) {
        std::cerr << "runtime failure: " << e.what() << "\n";
        return kFailure;
    }
}
