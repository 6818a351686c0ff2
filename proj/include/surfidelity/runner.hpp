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

#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "surfidelity/dual_map.hpp"
#include "surfidelity/exact_engine.hpp"
#include "surfidelity/geometry.hpp"
#include "surfidelity/mc_engine.hpp"
#include "surfidelity/noise_model.hpp"
#include "surfidelity/run_config.hpp"
#include "surfidelity/threshold_analysis.hpp"
#include "surfidelity/transfer_matrix.hpp"

#ifndef SURFIDELITY_VERSION
#define SURFIDELITY_VERSION "1.0.0"
#endif

namespace surfidelity {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitEngine = 2;
inline constexpr int kExitValidation = 3;

inline constexpr const char *kOutDirEnv = "SURFIDELITY_OUT_DIR";

struct ExecuteOptions {
    std::optional<std::filesystem::path> out_dir;
    std::ostream *log = &std::cout;
    std::ostream *err = &std::cerr;
};

/// --out, then [output] dir, then $SURFIDELITY_OUT_DIR, then the working directory.
inline std::filesystem::path resolve_output_dir(const RunConfig &cfg, const ExecuteOptions &opts) {
    if (opts.out_dir) {
        return *opts.out_dir;
    }
    if (cfg.output_dir) {
        return *cfg.output_dir;
    }
    if (const char *env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') {
        return env;
    }
    return ".";
}

inline std::string fmt_g17(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string artifact_header(const RunConfig &cfg) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "# surfidelity %s config_hash=%016llx seed=%s\n", SURFIDELITY_VERSION,
                  static_cast<unsigned long long>(cfg.hash()),
                  cfg.seed_set ? std::to_string(cfg.seed).c_str() : "none");
    return buf;
}

/// Writes to a temporary sibling, then renames over the target.
inline void write_atomic(const std::filesystem::path &path, const std::string &content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        out << content;
        out.flush();
        if (!out) {
            throw std::runtime_error("failed writing " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

namespace detail {

inline DistributionSpec with_parameter(DistributionSpec spec, const std::string &param, double x) {
    if (param == "h") {
        spec.h = x;
    } else if (param == "J") {
        spec.J = x;
    } else if (param == "h1") {
        spec.h1 = x;
    } else if (param == "h2") {
        spec.h2 = x;
    } else if (param == "h12") {
        spec.h1 = x;
        spec.h2 = x;
    } else if (param == "dilution") {
        spec.dilution = x;
    } else if (param == "q") {
        spec.q = x;
    }
    return spec;
}

inline CouplingConfig make_couplings(const RunConfig &cfg, const LatticeSpec &lattice, const DistributionSpec &spec,
                                     int draw) {
    if (cfg.couplings_file) {
        std::ifstream in(*cfg.couplings_file);
        if (!in) {
            throw std::runtime_error("cannot read " + cfg.couplings_file->string());
        }
        CouplingConfig c = read_couplings(in);
        c.validate(lattice);
        return c;
    }
    return draw_random(lattice, spec,
                       derive_seed(cfg.seed, static_cast<std::uint64_t>(lattice.distance()),
                                   static_cast<std::uint64_t>(draw)));
}

inline SyndromeSet syndrome_for(const RunConfig &cfg, const LatticeSpec &lattice) {
    std::vector<int> ids;
    for (const auto &[r, c] : cfg.syndrome) {
        ids.push_back(lattice.plaquette_index(r, c));
    }
    return SyndromeSet(ids);
}

inline std::string syndrome_descriptor(const RunConfig &cfg) {
    if (cfg.syndrome.empty()) {
        return "empty";
    }
    std::string out;
    for (const auto &[r, c] : cfg.syndrome) {
        out += (out.empty() ? "" : "+") + std::string("r") + std::to_string(r) + "c" + std::to_string(c);
    }
    return out;
}

inline AmplitudeResult run_exact_engine(const RunConfig &cfg, const std::string &engine, const LatticeSpec &lattice,
                                        const CouplingConfig &config, const SyndromeSet &syndrome) {
    StringSet strings = build_strings(lattice, syndrome);
    std::string chosen = engine;
    if (chosen == "auto") {
        if (lattice.num_qubits() <= cfg.qubit_budget) {
            chosen = "qubit_brute";
        } else if (static_cast<int>(lattice.num_plaquettes()) <= cfg.site_budget) {
            chosen = "dual_brute";
        } else {
            chosen = "transfer_matrix";
        }
    }
    if (chosen == "qubit_brute") {
        return amplitudes_qubit_brute(lattice, config, syndrome, strings, cfg.qubit_budget);
    }
    if (chosen == "dual_brute") {
        return amplitudes_dual_brute(lattice, config, syndrome, strings, cfg.site_budget);
    }
    if (chosen == "sector_sums") {
        if (!syndrome.empty()) {
            throw std::invalid_argument("sector_sums supports the empty syndrome only");
        }
        return sector_sums(lattice, config, static_cast<std::size_t>(cfg.site_budget)).amplitudes;
    }
    return amplitudes_transfer(lattice, config, syndrome, strings, cfg.width_budget);
}

inline std::vector<std::pair<bool, double>> sweep_or_single(const RunConfig &cfg) {
    std::vector<std::pair<bool, double>> out;
    if (cfg.sweep_parameter.empty() || cfg.sweep.empty()) {
        out.emplace_back(false, 0.0);
    } else {
        for (double x : cfg.sweep) {
            out.emplace_back(true, x);
        }
    }
    return out;
}

inline int draws_of(const RunConfig &cfg) {
    bool random = cfg.distribution.kind != DistributionKind::homogeneous && !cfg.couplings_file;
    return random ? cfg.draws : 1;
}

struct Artifacts {
    std::vector<std::pair<std::string, std::string>> files;
    int exit_code = kExitOk;
};

inline Artifacts run_exact(const RunConfig &cfg, const std::string &engine) {
    std::ostringstream csv;
    csv << artifact_header(cfg);
    csv << "engine,L,coupling,draw,seed,syndrome,re_a,im_a,re_b,im_b,log_scale,ratio_x,fidelity\n";
    for (int L : cfg.distances) {
        LatticeSpec lattice = build_lattice(L);
        SyndromeSet syndrome = syndrome_for(cfg, lattice);
        for (const auto &[has_x, x] : sweep_or_single(cfg)) {
            DistributionSpec spec = has_x ? with_parameter(cfg.distribution, cfg.sweep_parameter, x) : cfg.distribution;
            for (int d = 0; d < draws_of(cfg); ++d) {
                CouplingConfig config = make_couplings(cfg, lattice, spec, d);
                AmplitudeResult r = run_exact_engine(cfg, engine, lattice, config, syndrome);
                csv << to_string(r.engine) << "," << L << "," << (has_x ? fmt_g17(x) : "") << "," << d << ","
                    << config.seed << "," << syndrome_descriptor(cfg) << "," << fmt_g17(r.a.real()) << ","
                    << fmt_g17(r.a.imag()) << "," << fmt_g17(r.b.real()) << "," << fmt_g17(r.b.imag()) << ","
                    << fmt_g17(r.log_scale) << "," << fmt_g17(r.ratio_x) << "," << fmt_g17(r.fidelity) << "\n";
            }
        }
    }
    Artifacts a;
    a.files.emplace_back(engine == "transfer_matrix" ? "tm.csv" : "exact.csv", csv.str());
    return a;
}

inline Artifacts run_mc(const RunConfig &cfg) {
    std::ostringstream csv;
    csv << artifact_header(cfg);
    csv << "size,coupling,draw,estimator,mean,std_error,acceptance_rate,sign_average,sector_acceptance,chains,"
           "burn_in,seed\n";
    std::size_t point = 0;
    for (int L : cfg.distances) {
        LatticeSpec lattice = build_lattice(L);
        SyndromeSet syndrome = syndrome_for(cfg, lattice);
        for (const auto &[has_x, x] : sweep_or_single(cfg)) {
            DistributionSpec spec = has_x ? with_parameter(cfg.distribution, cfg.sweep_parameter, x) : cfg.distribution;
            for (int d = 0; d < draws_of(cfg); ++d) {
                CouplingConfig config = make_couplings(cfg, lattice, spec, d);
                McConfig mc = cfg.mc;
                mc.seed = derive_seed(cfg.seed, point++);
                McEstimate e = mc.estimator == Estimator::sector_flag
                                   ? sample_sector_flag(lattice, config, syndrome, mc)
                                   : estimate_ratio_ti(build_dual(lattice, config), mc);
                csv << L << "," << (has_x ? fmt_g17(x) : "") << "," << d << "," << to_string(e.estimator) << ","
                    << fmt_g17(e.mean) << "," << fmt_g17(e.std_error) << "," << fmt_g17(e.acceptance_rate) << ","
                    << fmt_g17(e.sign_average) << "," << fmt_g17(e.sector_acceptance) << "," << e.chains_used << ","
                    << e.burn_in_used << "," << mc.seed << "\n";
            }
        }
    }
    Artifacts a;
    a.files.emplace_back("mc.csv", csv.str());
    return a;
}

inline ScanResult run_scan_points(const RunConfig &cfg, const std::vector<int> &sizes, const DistributionSpec &base,
                                  const std::string &param) {
    const int draws = draws_of(cfg);
    PointEstimator estimator = [&](int size, double x, const McConfig &mc) {
        LatticeSpec lattice = build_lattice(size);
        DistributionSpec spec = with_parameter(base, param, x);
        std::vector<McEstimate> results;
        for (int d = 0; d < draws; ++d) {
            CouplingConfig config = cfg.couplings_file
                                        ? make_couplings(cfg, lattice, spec, d)
                                        : draw_random(lattice, spec, derive_seed(mc.seed, 0x5eed, static_cast<std::uint64_t>(d)));
            McConfig local = mc;
            local.seed = derive_seed(mc.seed, static_cast<std::uint64_t>(d));
            results.push_back(mc.estimator == Estimator::sector_flag
                                  ? sample_sector_flag(lattice, config, SyndromeSet{}, local)
                                  : estimate_ratio_ti(build_dual(lattice, config), local));
        }
        McEstimate e = draws > 1 ? disorder_average(results) : results.front();
        e.seed = mc.seed;
        return e;
    };
    return scan_points(sizes, cfg.sweep, estimator, cfg.mc,
                       std::string("pairwise linear crossing of ratio_x over ") + param +
                           ", estimator=" + to_string(cfg.mc.estimator) +
                           (draws > 1 ? ", disorder average over " + std::to_string(draws) + " draws" : ""));
}

inline Artifacts run_scan(const RunConfig &cfg) {
    ScanResult result = run_scan_points(cfg, cfg.distances, cfg.distribution, cfg.sweep_parameter);
    std::ostringstream csv;
    csv << artifact_header(cfg);
    write_curve_csv(csv, result.curve);
    std::ostringstream report;
    report << artifact_header(cfg);
    report << result.report.format();
    if (cfg.sweep_parameter == "J") {
        report << "reference J_c: " << fmt_g17(critical_J_nn()) << "\n";
    } else if (cfg.sweep_parameter == "h" || cfg.sweep_parameter == "h12") {
        report << "reference |h_c|: " << fmt_g17(critical_h_real()) << "\n";
    }
    Artifacts a;
    a.files.emplace_back("scan_curve.csv", csv.str());
    a.files.emplace_back("threshold_report.txt", report.str());
    return a;
}

inline Artifacts run_predict(const RunConfig &cfg) {
    std::ostringstream out;
    out << artifact_header(cfg);
    auto block = [&](const CriticalPrediction &p) { out << "\n" << p.format(); };
    block(predict_homogeneous_h());
    block(predict_homogeneous_J());
    std::vector<double> thetas = cfg.thetas;
    if (thetas.empty()) {
        thetas = {0.0, std::numbers::pi / 2.0, std::numbers::pi};
    }
    for (double t : thetas) {
        out << "\ntheta: " << fmt_g17(t);
        block(predict_complex_h(t));
    }
    if (cfg.distribution.h1 > 0.0) {
        block(predict_two_value(cfg.distribution.h1));
    }
    block(dilution_assessment(cfg.distribution.dilution));
    block(classify_signed_random(std::abs(cfg.distribution.h.real()), cfg.distribution.q, cfg.reference));
    Artifacts a;
    a.files.emplace_back("predictions.txt", out.str());
    return a;
}

struct ValidationTally {
    int passed = 0;
    int failed = 0;
    std::ostringstream lines;

    void check(bool ok, const std::string &what) {
        (ok ? passed : failed) += 1;
        if (!ok) {
            lines << "FAIL " << what << "\n";
        }
    }
};

inline double rel_diff(double a, double b) {
    double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

inline Artifacts run_validate(const RunConfig &cfg) {
    ValidationTally t;
    for (int L : cfg.distances) {
        LatticeSpec lattice = build_lattice(L);
        std::vector<std::pair<std::string, std::vector<int>>> syndromes = {{"empty", {}},
                                                                          {"single", {lattice.plaquette_index(0, 0)}}};
        syndromes.push_back({"adjacent", {lattice.plaquette_index(0, 0), lattice.plaquette_index(0, 1)}});
        if (lattice.plaquette_rows() > 1) {
            syndromes.push_back({"diagonal", {lattice.plaquette_index(0, 0), lattice.plaquette_index(1, 1)}});
        }
        DistributionSpec spec;
        spec.kind = DistributionKind::uniform;
        spec.h_min = -0.6;
        spec.h_max = 0.6;
        spec.j_min = -0.4;
        spec.j_max = 0.4;
        for (int s = 0; s < cfg.validate_configs; ++s) {
            CouplingConfig config = draw_random(lattice, spec, static_cast<std::uint64_t>(s));
            DualIsingModel dual = build_dual(lattice, config);
            const std::string tag = "L=" + std::to_string(L) + " seed=" + std::to_string(s);
            for (const auto &[name, ids] : syndromes) {
                SyndromeSet syndrome(ids);
                StringSet strings = build_strings(lattice, syndrome);
                AmplitudeResult q = amplitudes_qubit_brute(lattice, config, syndrome, strings, cfg.qubit_budget);
                CorrelationQuad quad = correlation_quad_dual(dual, syndrome, cfg.site_budget);
                AmplitudeResult d = amplitudes_for_strings(lattice, quad, syndrome, strings);
                CorrelationQuad tquad = correlation_quad_transfer(dual, syndrome, cfg.width_budget);
                AmplitudeResult tm = amplitudes_for_strings(lattice, tquad, syndrome, strings);
                const std::string w = tag + " syndrome=" + name;
                t.check(rel_diff(q.ratio_x, d.ratio_x) <= cfg.tolerance, w + " qubit_brute vs dual_brute ratio_x");
                t.check(rel_diff(q.fidelity, d.fidelity) <= cfg.tolerance, w + " qubit_brute vs dual_brute fidelity");
                t.check(rel_diff(q.ratio_x, tm.ratio_x) <= cfg.tolerance, w + " qubit_brute vs transfer ratio_x");
                t.check(quad.symmetry_residual(syndrome.size()) <= 1e-12, w + " dual quad symmetry");
                t.check(tquad.symmetry_residual(syndrome.size()) <= 1e-12, w + " transfer quad symmetry");
                if (syndrome.empty()) {
                    SectorSumsResult ss = sector_sums(lattice, config);
                    t.check(rel_diff(q.ratio_x, ss.amplitudes.ratio_x) <= cfg.tolerance,
                            w + " qubit_brute vs sector_sums ratio_x");
                    t.check(std::abs(ss.amplitudes.a) >= std::abs(ss.amplitudes.b), w + " |A0| >= |B0|");
                }
            }
        }
    }
    std::ostringstream out;
    out << artifact_header(cfg);
    out << "oracle checks passed: " << t.passed << "\n";
    out << "oracle checks failed: " << t.failed << "\n";
    out << t.lines.str();
    bool adjudication_ok = true;
    std::string curve_csv;
    if (cfg.adjudicate) {
        DistributionSpec base = cfg.distribution;
        base.kind = DistributionKind::two_value;
        ScanResult scan = run_scan_points(cfg, cfg.adjudicate_sizes, base, "h12");
        std::ostringstream csv;
        csv << artifact_header(cfg);
        write_curve_csv(csv, scan.curve);
        curve_csv = csv.str();
        out << "\ntwo-value convention adjudication (h1 = h2 = h)\n" << scan.report.format();
        const double printed = two_value_symmetric_printed();
        const double alternative = two_value_symmetric_alternative();
        out << "printed convention symmetric point: " << fmt_g17(printed) << "\n";
        out << "alternative convention symmetric point: " << fmt_g17(alternative) << "\n";
        if (!scan.report.crossed) {
            out << "winner: none (no crossing)\n";
            adjudication_ok = false;
        } else {
            double hc = std::abs(scan.report.threshold);
            bool near_printed = std::abs(hc - printed) <= 0.10 * printed;
            bool near_alt = std::abs(hc - alternative) <= 0.10 * alternative;
            out << "measured |h_c|: " << fmt_g17(hc) << "\n";
            if (near_printed != near_alt) {
                out << "winner: " << (near_alt ? "alternative (e^{2h1}-1)(e^{2h2}-1)=2" : "printed (e^{h1}-1)(e^{h2}-1)=2")
                    << "\n";
            } else {
                out << "winner: none (" << (near_alt ? "both" : "neither") << " within 10%)\n";
                adjudication_ok = false;
            }
        }
    }
    Artifacts a;
    a.files.emplace_back("validation.txt", out.str());
    if (!curve_csv.empty()) {
        a.files.emplace_back("adjudication_curve.csv", curve_csv);
    }
    a.exit_code = (t.failed == 0 && adjudication_ok) ? kExitOk : kExitValidation;
    return a;
}

}  // namespace detail

/// Runs the configured command and writes its artifacts. Returns the process
/// exit status: 0 success, 2 engine error, 3 validation failure.
inline int execute(const RunConfig &cfg, const ExecuteOptions &opts = {}) {
    detail::Artifacts artifacts;
    try {
        switch (cfg.command) {
            case Command::exact:
                artifacts = detail::run_exact(cfg, cfg.engine);
                break;
            case Command::tm:
                artifacts = detail::run_exact(cfg, "transfer_matrix");
                break;
            case Command::mc:
                artifacts = detail::run_mc(cfg);
                break;
            case Command::scan:
                artifacts = detail::run_scan(cfg);
                break;
            case Command::predict:
                artifacts = detail::run_predict(cfg);
                break;
            case Command::validate:
                artifacts = detail::run_validate(cfg);
                break;
        }
        std::filesystem::path dir = resolve_output_dir(cfg, opts);
        std::filesystem::create_directories(dir);
        for (const auto &[name, content] : artifacts.files) {
            std::filesystem::path path = dir / (cfg.output_prefix + name);
            write_atomic(path, content);
            *opts.log << "wrote " << path.string() << "\n";
        }
        if (cfg.command == Command::predict || cfg.command == Command::validate ||
            cfg.command == Command::scan) {
            for (const auto &[name, content] : artifacts.files) {
                if (name.ends_with(".txt")) {
                    *opts.log << content;
                }
            }
        }
    } catch (const std::exception &e) {
        *opts.err << "error: " << e.what() << "\n";
        return kExitEngine;
    }
    return artifacts.exit_code;
}

}  // namespace surfidelity
