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

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "surfidelity/mc_engine.hpp"
#include "surfidelity/noise_model.hpp"
#include "surfidelity/threshold_analysis.hpp"

namespace surfidelity {

class ConfigError : public std::invalid_argument {
   public:
    ConfigError(int line, const std::string &what)
        : std::invalid_argument(line > 0 ? "config line " + std::to_string(line) + ": " + what : "config: " + what),
          line_(line) {
    }
    int line() const {
        return line_;
    }

   private:
    int line_;
};

enum class Command { exact, tm, mc, scan, predict, validate };

inline const char *to_string(Command c) {
    switch (c) {
        case Command::exact:
            return "exact";
        case Command::tm:
            return "tm";
        case Command::mc:
            return "mc";
        case Command::scan:
            return "scan";
        case Command::predict:
            return "predict";
        case Command::validate:
            return "validate";
    }
    return "?";
}

inline std::optional<Command> parse_command(std::string_view s) {
    for (Command c : {Command::exact, Command::tm, Command::mc, Command::scan, Command::predict, Command::validate}) {
        if (s == to_string(c)) {
            return c;
        }
    }
    return std::nullopt;
}

struct RunConfig {
    Command command = Command::exact;
    std::vector<int> distances;

    DistributionSpec distribution;
    std::optional<std::filesystem::path> couplings_file;
    int draws = 1;
    std::string sweep_parameter;
    std::vector<double> sweep;

    std::vector<std::pair<int, int>> syndrome;

    std::string engine = "auto";
    std::size_t qubit_budget = 16;
    int site_budget = 24;
    int width_budget = 20;
    double tolerance = 1e-10;
    double complex_tolerance = 1e-8;

    McConfig mc;
    std::uint64_t seed = 0;
    bool seed_set = false;

    std::vector<double> thetas;
    SignedRandomReference reference;

    int validate_configs = 20;
    bool adjudicate = false;
    std::vector<int> adjudicate_sizes{8, 12};

    std::optional<std::string> output_dir;
    std::string output_prefix;

    // (section.key, value) pairs as written, for hashing.
    std::map<std::string, std::string> entries;

    bool stochastic() const {
        return command == Command::mc || command == Command::scan ||
               (command == Command::validate && adjudicate) ||
               (distribution.kind != DistributionKind::homogeneous && !couplings_file &&
                command != Command::predict);
    }

    /// Sorted "section.key=value" lines, output section excluded, effective seed included.
    std::string canonical_text() const {
        std::map<std::string, std::string> canon;
        for (const auto &[k, v] : entries) {
            if (k.rfind("output.", 0) != 0) {
                canon[k] = v;
            }
        }
        canon["run.seed"] = seed_set ? std::to_string(seed) : "none";
        std::string out;
        for (const auto &[k, v] : canon) {
            out += k + "=" + v + "\n";
        }
        return out;
    }

    std::uint64_t hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : canonical_text()) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) {
        ++b;
    }
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split_list(const std::string &s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

inline double to_double(const std::string &s, int line, const std::string &key) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception &) {
        pos = 0;
    }
    if (pos != s.size() || !std::isfinite(v)) {
        throw ConfigError(line, "'" + key + "' expects a number, got '" + s + "'");
    }
    return v;
}

inline long long to_integer(const std::string &s, int line, const std::string &key) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(s, &pos);
    } catch (const std::exception &) {
        pos = 0;
    }
    if (pos != s.size()) {
        throw ConfigError(line, "'" + key + "' expects an integer, got '" + s + "'");
    }
    return v;
}

inline std::uint64_t to_seed(const std::string &s, int line, const std::string &key) {
    std::size_t pos = 0;
    unsigned long long v = 0;
    try {
        if (!s.empty() && s[0] != '-') {
            v = std::stoull(s, &pos);
        }
    } catch (const std::exception &) {
        pos = 0;
    }
    if (pos != s.size() || s.empty()) {
        throw ConfigError(line, "'" + key + "' expects an unsigned 64-bit integer, got '" + s + "'");
    }
    return v;
}

inline bool to_bool(const std::string &s, int line, const std::string &key) {
    if (s == "true" || s == "yes" || s == "1") {
        return true;
    }
    if (s == "false" || s == "no" || s == "0") {
        return false;
    }
    throw ConfigError(line, "'" + key + "' expects true or false, got '" + s + "'");
}

/// Accepts "a", "a+bi", "a-bi", "bi", "i", "-i".
inline Complex to_complex(const std::string &raw, int line, const std::string &key) {
    std::string s;
    for (char c : raw) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            s += c;
        }
    }
    if (s.empty()) {
        throw ConfigError(line, "'" + key + "' expects a number");
    }
    if (s.back() != 'i') {
        return {to_double(s, line, key), 0.0};
    }
    s.pop_back();
    std::size_t split = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            split = k;
            break;
        }
    }
    std::string re = split == std::string::npos ? "" : s.substr(0, split);
    std::string im = split == std::string::npos ? s : s.substr(split);
    if (im.empty() || im == "+") {
        im = "1";
    } else if (im == "-") {
        im = "-1";
    }
    return {re.empty() ? 0.0 : to_double(re, line, key), to_double(im, line, key)};
}

/// "a, b, c" or "start:stop:step" (inclusive, computed as start + k*step).
inline std::vector<double> to_sweep(const std::string &s, int line, const std::string &key) {
    if (s.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::string item;
        std::istringstream in(s);
        while (std::getline(in, item, ':')) {
            parts.push_back(trim(item));
        }
        if (parts.size() != 3) {
            throw ConfigError(line, "'" + key + "' range must be start:stop:step");
        }
        double a = to_double(parts[0], line, key);
        double b = to_double(parts[1], line, key);
        double step = to_double(parts[2], line, key);
        if (!(step != 0.0) || (b - a) * step < 0.0) {
            throw ConfigError(line, "'" + key + "' range step must be non-zero and point from start to stop");
        }
        auto n = static_cast<long long>(std::floor((b - a) / step + 1e-9));
        if (n > 100000) {
            throw ConfigError(line, "'" + key + "' range has too many points");
        }
        std::vector<double> out;
        for (long long k = 0; k <= n; ++k) {
            out.push_back(a + static_cast<double>(k) * step);
        }
        return out;
    }
    std::vector<double> out;
    for (const std::string &item : split_list(s)) {
        out.push_back(to_double(item, line, key));
    }
    return out;
}

inline std::vector<int> to_int_list(const std::string &s, int line, const std::string &key) {
    std::vector<int> out;
    for (const std::string &item : split_list(s)) {
        long long v = to_integer(item, line, key);
        if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
            throw ConfigError(line, "'" + key + "' value out of range");
        }
        out.push_back(static_cast<int>(v));
    }
    return out;
}

/// "empty" or a list of "(row,col)" coordinates.
inline std::vector<std::pair<int, int>> to_coordinates(const std::string &s, int line, const std::string &key) {
    std::vector<std::pair<int, int>> out;
    if (s == "empty") {
        return out;
    }
    std::size_t pos = 0;
    while (pos < s.size()) {
        if (std::isspace(static_cast<unsigned char>(s[pos])) || s[pos] == ',' || s[pos] == ';') {
            ++pos;
            continue;
        }
        if (s[pos] != '(') {
            throw ConfigError(line, "'" + key + "' expects 'empty' or coordinates like (0,1) (1,2)");
        }
        std::size_t close = s.find(')', pos);
        if (close == std::string::npos) {
            throw ConfigError(line, "'" + key + "' has an unterminated coordinate");
        }
        std::vector<int> rc = to_int_list(s.substr(pos + 1, close - pos - 1), line, key);
        if (rc.size() != 2) {
            throw ConfigError(line, "'" + key + "' coordinates need exactly two integers");
        }
        out.emplace_back(rc[0], rc[1]);
        pos = close + 1;
    }
    if (out.empty()) {
        throw ConfigError(line, "'" + key + "' is empty; write 'empty' for no syndrome");
    }
    return out;
}

inline const std::map<std::string, std::set<std::string>> &known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"run",
         {"command", "seed", "engine", "qubit_budget", "site_budget", "width_budget", "tolerance",
          "complex_tolerance", "threads", "theta", "validate_configs", "adjudicate", "adjudicate_sizes"}},
        {"lattice", {"distances"}},
        {"coupling",
         {"distribution", "h", "J", "h1", "h2", "dilution", "q", "h_min", "h_max", "j_min", "j_max", "file", "draws",
          "sweep_parameter", "sweep", "q_n", "h_n"}},
        {"syndrome", {"plaquettes"}},
        {"mc", {"sweeps", "burn_in", "chains", "thinning", "estimator", "ti_steps"}},
        {"output", {"dir", "prefix"}},
    };
    return keys;
}

inline DistributionKind to_distribution(const std::string &s, int line) {
    for (DistributionKind k : {DistributionKind::homogeneous, DistributionKind::two_value, DistributionKind::diluted,
                               DistributionKind::signed_random, DistributionKind::uniform}) {
        if (s == to_string(k)) {
            return k;
        }
    }
    throw ConfigError(line, "unknown distribution '" + s + "'");
}

}  // namespace detail

struct ParseOptions {
    std::optional<std::uint64_t> seed_override;
    std::filesystem::path base_dir = ".";
};

/// Parses the INI-style run document. Every section and key must be known;
/// duplicates are rejected.
inline RunConfig parse_config(std::string_view text, const ParseOptions &options = {}) {
    using namespace detail;
    RunConfig cfg;
    std::map<std::string, int> key_line;
    std::string section;
    bool have_command = false;
    bool have_distances = false;
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') {
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError(line_no, "malformed section header '" + line + "'");
            }
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!known_keys().count(section)) {
                throw ConfigError(line_no, "unknown section [" + section + "]");
            }
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(line_no, "expected 'key = value', got '" + line + "'");
        }
        std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (section.empty()) {
            throw ConfigError(line_no, "key '" + key + "' appears before any section");
        }
        if (!known_keys().at(section).count(key)) {
            throw ConfigError(line_no, "unknown key '" + key + "' in [" + section + "]");
        }
        std::string full = section + "." + key;
        if (key_line.count(full)) {
            throw ConfigError(line_no, "duplicate key '" + key + "' in [" + section + "] (first on line " +
                                           std::to_string(key_line[full]) + ")");
        }
        if (value.empty()) {
            throw ConfigError(line_no, "key '" + key + "' has no value");
        }
        key_line[full] = line_no;
        cfg.entries[full] = value;

        const int L = line_no;
        if (full == "run.command") {
            auto c = parse_command(value);
            if (!c) {
                throw ConfigError(L, "unknown command '" + value + "'");
            }
            cfg.command = *c;
            have_command = true;
        } else if (full == "run.seed") {
            cfg.seed = to_seed(value, L, key);
            cfg.seed_set = true;
        } else if (full == "run.engine") {
            static const std::set<std::string> engines = {"auto", "qubit_brute", "dual_brute", "transfer_matrix",
                                                          "sector_sums"};
            if (!engines.count(value)) {
                throw ConfigError(L, "unknown engine '" + value + "'");
            }
            cfg.engine = value;
        } else if (full == "run.qubit_budget") {
            long long v = to_integer(value, L, key);
            if (v < 1 || v > 40) {
                throw ConfigError(L, "qubit_budget must lie in [1, 40]");
            }
            cfg.qubit_budget = static_cast<std::size_t>(v);
        } else if (full == "run.site_budget") {
            long long v = to_integer(value, L, key);
            if (v < 1 || v > 40) {
                throw ConfigError(L, "site_budget must lie in [1, 40]");
            }
            cfg.site_budget = static_cast<int>(v);
        } else if (full == "run.width_budget") {
            long long v = to_integer(value, L, key);
            if (v < 1 || v > 26) {
                throw ConfigError(L, "width_budget must lie in [1, 26]");
            }
            cfg.width_budget = static_cast<int>(v);
        } else if (full == "run.tolerance") {
            cfg.tolerance = to_double(value, L, key);
        } else if (full == "run.complex_tolerance") {
            cfg.complex_tolerance = to_double(value, L, key);
        } else if (full == "run.threads") {
            long long v = to_integer(value, L, key);
            if (v < 0 || v > 1024) {
                throw ConfigError(L, "threads must lie in [0, 1024]");
            }
            cfg.mc.threads = static_cast<int>(v);
        } else if (full == "run.theta") {
            cfg.thetas = to_sweep(value, L, key);
        } else if (full == "run.validate_configs") {
            long long v = to_integer(value, L, key);
            if (v < 1 || v > 10000) {
                throw ConfigError(L, "validate_configs must lie in [1, 10000]");
            }
            cfg.validate_configs = static_cast<int>(v);
        } else if (full == "run.adjudicate") {
            cfg.adjudicate = to_bool(value, L, key);
        } else if (full == "run.adjudicate_sizes") {
            cfg.adjudicate_sizes = to_int_list(value, L, key);
            if (cfg.adjudicate_sizes.size() < 2) {
                throw ConfigError(L, "adjudicate_sizes needs at least two sizes");
            }
            for (int d : cfg.adjudicate_sizes) {
                if (d < 2) {
                    throw ConfigError(L, "adjudicate_sizes entries must be >= 2");
                }
            }
        } else if (full == "lattice.distances") {
            cfg.distances = to_int_list(value, L, key);
            for (int d : cfg.distances) {
                if (d < 2) {
                    throw ConfigError(L, "distances must be >= 2, got " + std::to_string(d));
                }
            }
            if (cfg.distances.empty()) {
                throw ConfigError(L, "distances list is empty");
            }
            have_distances = true;
        } else if (full == "coupling.distribution") {
            cfg.distribution.kind = to_distribution(value, L);
        } else if (full == "coupling.h") {
            cfg.distribution.h = to_complex(value, L, key);
        } else if (full == "coupling.J") {
            cfg.distribution.J = to_complex(value, L, key);
        } else if (full == "coupling.h1") {
            cfg.distribution.h1 = to_double(value, L, key);
        } else if (full == "coupling.h2") {
            cfg.distribution.h2 = to_double(value, L, key);
        } else if (full == "coupling.dilution") {
            cfg.distribution.dilution = to_double(value, L, key);
        } else if (full == "coupling.q") {
            cfg.distribution.q = to_double(value, L, key);
        } else if (full == "coupling.h_min") {
            cfg.distribution.h_min = to_double(value, L, key);
        } else if (full == "coupling.h_max") {
            cfg.distribution.h_max = to_double(value, L, key);
        } else if (full == "coupling.j_min") {
            cfg.distribution.j_min = to_double(value, L, key);
        } else if (full == "coupling.j_max") {
            cfg.distribution.j_max = to_double(value, L, key);
        } else if (full == "coupling.file") {
            std::filesystem::path p(value);
            if (p.is_relative()) {
                p = options.base_dir / p;
            }
            if (!std::filesystem::exists(p)) {
                throw ConfigError(L, "couplings file '" + p.string() + "' does not exist");
            }
            cfg.couplings_file = p;
        } else if (full == "coupling.draws") {
            long long v = to_integer(value, L, key);
            if (v < 1 || v > 100000) {
                throw ConfigError(L, "draws must lie in [1, 100000]");
            }
            cfg.draws = static_cast<int>(v);
        } else if (full == "coupling.sweep_parameter") {
            static const std::set<std::string> params = {"h", "J", "h1", "h2", "h12", "dilution", "q"};
            if (!params.count(value)) {
                throw ConfigError(L, "sweep_parameter must be one of h, J, h1, h2, h12, dilution, q");
            }
            cfg.sweep_parameter = value;
        } else if (full == "coupling.sweep") {
            cfg.sweep = to_sweep(value, L, key);
        } else if (full == "coupling.q_n") {
            cfg.reference.q_n = to_double(value, L, key);
            cfg.reference.user_supplied = true;
        } else if (full == "coupling.h_n") {
            cfg.reference.h_n = to_double(value, L, key);
            cfg.reference.user_supplied = true;
        } else if (full == "syndrome.plaquettes") {
            cfg.syndrome = to_coordinates(value, L, key);
        } else if (full == "mc.sweeps") {
            long long v = to_integer(value, L, key);
            if (v < 2 || v > 2000000000LL) {
                throw ConfigError(L, "sweeps must lie in [2, 2e9]");
            }
            cfg.mc.sweeps = static_cast<int>(v);
        } else if (full == "mc.burn_in") {
            if (value == "auto") {
                cfg.mc.burn_in.reset();
            } else {
                long long v = to_integer(value, L, key);
                if (v < 0 || v > 2000000000LL) {
                    throw ConfigError(L, "burn_in must be 'auto' or a non-negative integer");
                }
                cfg.mc.burn_in = static_cast<int>(v);
            }
        } else if (full == "mc.chains") {
            long long v = to_integer(value, L, key);
            if (v < 1 || v > 100000) {
                throw ConfigError(L, "chains must lie in [1, 100000]");
            }
            cfg.mc.chains = static_cast<int>(v);
        } else if (full == "mc.thinning") {
            long long v = to_integer(value, L, key);
            if (v < 1 || v > 1000000) {
                throw ConfigError(L, "thinning must lie in [1, 1e6]");
            }
            cfg.mc.thinning = static_cast<int>(v);
        } else if (full == "mc.estimator") {
            try {
                cfg.mc.estimator = parse_estimator(value);
            } catch (const std::invalid_argument &e) {
                throw ConfigError(L, e.what());
            }
        } else if (full == "mc.ti_steps") {
            long long v = to_integer(value, L, key);
            if (v < 2 || v > 10000) {
                throw ConfigError(L, "ti_steps must lie in [2, 10000]");
            }
            cfg.mc.ti_steps = static_cast<int>(v);
        } else if (full == "output.dir") {
            cfg.output_dir = value;
        } else if (full == "output.prefix") {
            if (value.find('/') != std::string::npos) {
                throw ConfigError(L, "prefix must not contain '/'");
            }
            cfg.output_prefix = value;
        }
    }

    if (!have_command) {
        throw ConfigError(0, "missing [run] command");
    }
    if (options.seed_override) {
        cfg.seed = *options.seed_override;
        cfg.seed_set = true;
    }
    cfg.mc.seed = cfg.seed;
    auto line_of = [&](const std::string &k) { return key_line.count(k) ? key_line.at(k) : 0; };
    try {
        cfg.distribution.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(0, e.what());
    }
    try {
        cfg.mc.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(line_of("mc.sweeps"), e.what());
    }
    if (cfg.command == Command::validate) {
        if (!have_distances) {
            cfg.distances = {2, 3};
        }
        for (int d : cfg.distances) {
            if (d > 3) {
                throw ConfigError(line_of("lattice.distances"), "validate runs brute-force oracles: distances must be <= 3");
            }
        }
    } else if (cfg.command != Command::predict && !have_distances) {
        throw ConfigError(0, "missing [lattice] distances");
    }
    for (int d : cfg.distances) {
        for (const auto &[r, c] : cfg.syndrome) {
            if (r < 0 || c < 0 || r >= d - 1 || c >= d) {
                throw ConfigError(line_of("syndrome.plaquettes"),
                                  "plaquette (" + std::to_string(r) + "," + std::to_string(c) +
                                      ") outside the lattice of distance " + std::to_string(d));
            }
        }
    }
    if (cfg.command == Command::scan) {
        if (cfg.distances.size() < 2) {
            throw ConfigError(line_of("lattice.distances"), "scan needs at least two distances");
        }
        if (cfg.sweep_parameter.empty()) {
            throw ConfigError(0, "scan needs [coupling] sweep_parameter");
        }
        if (cfg.sweep.size() < 4) {
            throw ConfigError(line_of("coupling.sweep"), "scan needs at least four sweep values");
        }
        if (!cfg.syndrome.empty()) {
            throw ConfigError(line_of("syndrome.plaquettes"), "scan runs on the empty syndrome");
        }
    }
    if (cfg.command == Command::validate && cfg.adjudicate && cfg.sweep.size() < 4) {
        throw ConfigError(line_of("coupling.sweep"), "adjudication needs at least four sweep values");
    }
    if (cfg.couplings_file && cfg.distances.size() != 1) {
        throw ConfigError(line_of("coupling.file"), "an explicit couplings file needs exactly one distance");
    }
    if (cfg.mc.estimator == Estimator::boundary_flip_ti && !cfg.syndrome.empty() && cfg.command == Command::mc) {
        throw ConfigError(line_of("mc.estimator"), "boundary_flip_ti supports the empty syndrome only");
    }
    if (cfg.stochastic() && !cfg.seed_set) {
        throw ConfigError(0, "a seed is required ([run] seed or --seed) for stochastic runs");
    }
    return cfg;
}

}  // namespace surfidelity
