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

#include "surfidelity/run_config.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace surfidelity;

namespace {

// Expects parse_config to fail on `line` with a message containing `needle`.
void expect_error(const std::string &text, int line, const std::string &needle) {
    try {
        parse_config(text);
        ADD_FAILURE() << "expected a config error for:\n" << text;
    } catch (const ConfigError &e) {
        EXPECT_EQ(e.line(), line) << e.what();
        EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
}

}  // namespace

TEST(run_config, minimal_exact_document_gets_defaults) {
    RunConfig cfg = parse_config("[run]\ncommand = exact\n[lattice]\ndistances = 3\n");
    EXPECT_EQ(cfg.command, Command::exact);
    EXPECT_EQ(cfg.distances, std::vector<int>{3});
    EXPECT_EQ(cfg.engine, "auto");
    EXPECT_EQ(cfg.distribution.kind, DistributionKind::homogeneous);
    EXPECT_TRUE(cfg.syndrome.empty());
    EXPECT_EQ(cfg.qubit_budget, 16u);
    EXPECT_EQ(cfg.site_budget, 24);
    EXPECT_EQ(cfg.width_budget, 20);
    EXPECT_DOUBLE_EQ(cfg.tolerance, 1e-10);
    EXPECT_FALSE(cfg.seed_set);
    EXPECT_FALSE(cfg.stochastic());
}

TEST(run_config, unknown_key_names_key_and_line) {
    expect_error("[run]\ncommand = exact\n[lattice]\ndistances = 3\nspeling = 4\n", 5, "speling");
}

TEST(run_config, malformed_documents_are_rejected) {
    expect_error("command = exact\n", 1, "before any section");
    expect_error("[run]\ncommand = exact\n[nonsense]\n", 3, "unknown section");
    expect_error("[run\ncommand = exact\n", 1, "malformed section");
    expect_error("[run]\ncommand exact\n", 2, "key = value");
    expect_error("[run]\ncommand = exact\ncommand = tm\n", 3, "duplicate key");
    expect_error("[run]\ncommand = exact\n[lattice]\ndistances = 1\n", 4, "distances must be >= 2");
    expect_error("[run]\ncommand = launch\n", 2, "unknown command");
    expect_error("[run]\ncommand = exact\n[lattice]\ndistances = 3\n[coupling]\nh = abc\n", 6, "expects a number");
    expect_error("[run]\ncommand = exact\n[lattice]\ndistances = 3\n[coupling]\ndilution = 1.5\n", 0, "dilution");
    expect_error("[run]\ncommand = exact\n[lattice]\ndistances = 3\n[syndrome]\nplaquettes = (2,0)\n", 6,
                 "outside the lattice");
    expect_error("[run]\ncommand = exact\n", 0, "missing [lattice] distances");
    expect_error("[lattice]\ndistances = 3\n", 0, "missing [run] command");
}

TEST(run_config, three_size_scan_document) {
    const char *text = R"(# Pair-coupling threshold scan
[run]
command = scan
seed = 20260101

[lattice]
distances = 8, 12, 16

[coupling]
distribution = homogeneous
h = 0
sweep_parameter = J
sweep = 0.15:0.30:0.01

[mc]
sweeps = 200000
chains = 8
estimator = boundary_flip_ti
ti_steps = 21

[output]
dir = out/scan
)";
    RunConfig cfg = parse_config(text);
    EXPECT_EQ(cfg.command, Command::scan);
    EXPECT_EQ(cfg.distances, (std::vector<int>{8, 12, 16}));
    EXPECT_EQ(cfg.sweep_parameter, "J");
    ASSERT_EQ(cfg.sweep.size(), 16u);
    EXPECT_DOUBLE_EQ(cfg.sweep.front(), 0.15);
    EXPECT_NEAR(cfg.sweep.back(), 0.30, 1e-12);
    EXPECT_EQ(cfg.mc.sweeps, 200000);
    EXPECT_EQ(cfg.mc.chains, 8);
    EXPECT_EQ(cfg.mc.estimator, Estimator::boundary_flip_ti);
    EXPECT_EQ(cfg.seed, 20260101u);
    EXPECT_TRUE(cfg.stochastic());
    EXPECT_EQ(*cfg.output_dir, "out/scan");
}

TEST(run_config, scan_requirements) {
    const std::string head = "[run]\ncommand = scan\nseed = 1\n[lattice]\n";
    expect_error(head + "distances = 8\n[coupling]\nsweep_parameter = J\nsweep = 0.1,0.2,0.3,0.4\n", 5,
                 "at least two distances");
    expect_error(head + "distances = 8, 12\n[coupling]\nsweep_parameter = J\nsweep = 0.1,0.2,0.3\n", 8,
                 "four sweep values");
    expect_error(head + "distances = 8, 12\n[coupling]\nsweep = 0.1,0.2,0.3,0.4\n", 0, "sweep_parameter");
    expect_error(head + "distances = 8, 12\n[coupling]\nsweep_parameter = theta\n", 7, "sweep_parameter must be");
}

TEST(run_config, stochastic_runs_need_a_seed) {
    const std::string text = "[run]\ncommand = mc\n[lattice]\ndistances = 4\n";
    expect_error(text, 0, "seed is required");
    ParseOptions opts;
    opts.seed_override = 99;
    RunConfig cfg = parse_config(text, opts);
    EXPECT_TRUE(cfg.seed_set);
    EXPECT_EQ(cfg.seed, 99u);
    // Random couplings count as stochastic as well.
    expect_error("[run]\ncommand = exact\n[lattice]\ndistances = 3\n[coupling]\ndistribution = diluted\n", 0,
                 "seed is required");
}

TEST(run_config, value_syntax) {
    RunConfig cfg = parse_config(
        "[run]\ncommand = exact\nengine = transfer_matrix\n[lattice]\ndistances = 4\n"
        "[coupling]\nh = 0.2-0.785398i\nJ = -i\n[syndrome]\nplaquettes = (0,1) (2,3)\n");
    EXPECT_EQ(cfg.distribution.h, Complex(0.2, -0.785398));
    EXPECT_EQ(cfg.distribution.J, Complex(0.0, -1.0));
    EXPECT_EQ(cfg.syndrome, (std::vector<std::pair<int, int>>{{0, 1}, {2, 3}}));
    EXPECT_EQ(cfg.engine, "transfer_matrix");

    RunConfig mc = parse_config("[run]\ncommand = mc\nseed = 5\n[lattice]\ndistances = 4\n[mc]\nburn_in = auto\n");
    EXPECT_FALSE(mc.mc.burn_in.has_value());
    RunConfig fixed = parse_config("[run]\ncommand = mc\nseed = 5\n[lattice]\ndistances = 4\n[mc]\nburn_in = 300\n");
    EXPECT_EQ(*fixed.mc.burn_in, 300);
    expect_error("[run]\ncommand = mc\nseed = 5\n[lattice]\ndistances = 4\n[mc]\nsweeps = 100\nburn_in = 200\n", 7,
                 "sweeps must exceed burn_in");
}

TEST(run_config, sweep_ranges) {
    const std::string head = "[run]\ncommand = exact\n[lattice]\ndistances = 3\n[coupling]\nsweep_parameter = h\n";
    RunConfig down = parse_config(head + "sweep = -0.2:-0.5:-0.1\n");
    ASSERT_EQ(down.sweep.size(), 4u);
    EXPECT_NEAR(down.sweep.back(), -0.5, 1e-12);
    RunConfig list = parse_config(head + "sweep = 0.1, 0.3, 0.2\n");
    EXPECT_EQ(list.sweep, (std::vector<double>{0.1, 0.3, 0.2}));
    expect_error(head + "sweep = 0.1:0.5:-0.1\n", 7, "step");
    expect_error(head + "sweep = 0.1:0.5:0\n", 7, "step");
    expect_error(head + "sweep = 0.1:0.5\n", 7, "start:stop:step");
}

TEST(run_config, validate_defaults_and_limits) {
    RunConfig cfg = parse_config("[run]\ncommand = validate\n");
    EXPECT_EQ(cfg.distances, (std::vector<int>{2, 3}));
    EXPECT_FALSE(cfg.stochastic());
    expect_error("[run]\ncommand = validate\n[lattice]\ndistances = 4\n", 4, "distances must be <= 3");
}

TEST(run_config, predict_needs_no_lattice) {
    RunConfig cfg = parse_config("[run]\ncommand = predict\ntheta = 0, 1.5707963267948966\n[coupling]\nh1 = 0.6\n");
    EXPECT_EQ(cfg.command, Command::predict);
    EXPECT_EQ(cfg.thetas.size(), 2u);
    EXPECT_DOUBLE_EQ(cfg.distribution.h1, 0.6);
}

TEST(run_config, hash_ignores_output_and_layout_but_not_content) {
    RunConfig a = parse_config("[run]\ncommand = exact\n[lattice]\ndistances = 3\n[output]\ndir = x\n");
    RunConfig b = parse_config("# comment\n[lattice]\ndistances   =   3\n\n[run]\ncommand=exact\n");
    RunConfig c = parse_config("[run]\ncommand = exact\n[lattice]\ndistances = 2\n");
    EXPECT_EQ(a.hash(), b.hash());
    EXPECT_NE(a.hash(), c.hash());
    ParseOptions opts;
    opts.seed_override = 4;
    EXPECT_NE(parse_config("[run]\ncommand = exact\n[lattice]\ndistances = 3\n", opts).hash(), a.hash());
}

TEST(run_config, couplings_file_must_exist) {
    expect_error("[run]\ncommand = exact\n[lattice]\ndistances = 3\n[coupling]\nfile = /nonexistent/c.txt\n", 6,
                 "does not exist");
    ParseOptions opts;
    opts.base_dir = SURFIDELITY_TEST_DATA;
    RunConfig cfg = parse_config("[run]\ncommand = exact\n[lattice]\ndistances = 3\n[coupling]\nfile = couplings_l3.txt\n",
                                 opts);
    ASSERT_TRUE(cfg.couplings_file.has_value());
    EXPECT_TRUE(std::filesystem::exists(*cfg.couplings_file));
}

TEST(run_config, shipped_examples_parse) {
    int count = 0;
    for (const auto &entry : std::filesystem::directory_iterator(SURFIDELITY_CONFIGS)) {
        if (entry.path().extension() != ".ini") {
            continue;
        }
        std::ifstream in(entry.path());
        std::stringstream text;
        text << in.rdbuf();
        ParseOptions opts;
        opts.base_dir = entry.path().parent_path();
        EXPECT_NO_THROW(parse_config(text.str(), opts)) << entry.path();
        ++count;
    }
    EXPECT_GE(count, 6);
}
