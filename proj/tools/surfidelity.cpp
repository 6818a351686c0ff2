// Copyright 2026 The surfidelity Authors
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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "surfidelity/run_config.hpp"
#include "surfidelity/runner.hpp"

int main(int argc, char **argv) {
    using namespace surfidelity;
    CLI::App app{"Surface-code fidelity under correlated bit-flip noise"};
    app.set_version_flag("--version", SURFIDELITY_VERSION);
    app.require_subcommand(1, 1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    for (const char *name : {"exact", "tm", "mc", "scan", "predict", "validate"}) {
        CLI::App *sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "run configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "master seed (overrides [run] seed)");
        sub->add_option("--out", out_dir, "output directory");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    const std::string command = app.get_subcommands().front()->get_name();

    std::ifstream in(config_path);
    std::stringstream text;
    text << in.rdbuf();
    RunConfig cfg;
    try {
        ParseOptions opts;
        opts.seed_override = seed;
        opts.base_dir = std::filesystem::path(config_path).parent_path();
        if (opts.base_dir.empty()) {
            opts.base_dir = ".";
        }
        cfg = parse_config(text.str(), opts);
    } catch (const std::exception &e) {
        std::cerr << config_path << ": " << e.what() << "\n";
        return kExitUsage;
    }
    if (to_string(cfg.command) != command) {
        std::cerr << config_path << ": [run] command is '" << to_string(cfg.command) << "' but '" << command
                  << "' was requested\n";
        return kExitUsage;
    }
    ExecuteOptions exec;
    if (out_dir) {
        exec.out_dir = *out_dir;
    }
    return execute(cfg, exec);
}
