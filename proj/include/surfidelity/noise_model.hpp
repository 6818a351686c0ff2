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
#include <cmath>
#include <complex>
#include <compare>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "surfidelity/geometry.hpp"
#include "surfidelity/rng.hpp"

namespace surfidelity {

using Complex = std::complex<double>;

/// Unordered qubit pair, stored with a < b.
struct QubitPair {
    int a = 0;
    int b = 0;
    static QubitPair of(int x, int y) {
        if (x == y) {
            throw std::invalid_argument("pair coupling needs two distinct qubits, got " + std::to_string(x) + " twice");
        }
        return x < y ? QubitPair{x, y} : QubitPair{y, x};
    }
    auto operator<=>(const QubitPair &) const = default;
};

/// Horizontal/vertical edge pairs meeting at a common star (the L-shaped pairs).
/// Collinear pairs through a star are not included.
inline std::vector<QubitPair> perpendicular_pairs(const LatticeSpec &lattice) {
    std::vector<QubitPair> pairs;
    for (const Face &star : lattice.stars()) {
        for (int i : star.qubits) {
            if (lattice.qubit(i).orientation != EdgeOrientation::horizontal) {
                continue;
            }
            for (int j : star.qubits) {
                if (lattice.qubit(j).orientation == EdgeOrientation::vertical) {
                    pairs.push_back(QubitPair::of(i, j));
                }
            }
        }
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

/// The effective bit-flip action H = sum_i h_i s_i + sum_{ij} J_ij s_i s_j.
struct CouplingConfig {
    int distance = 0;
    std::vector<Complex> fields;
    std::map<QubitPair, Complex> pair_couplings;
    std::string distribution = "explicit";
    std::uint64_t seed = 0;

    bool is_real() const {
        for (const Complex &h : fields) {
            if (h.imag() != 0) {
                return false;
            }
        }
        for (const auto &[pair, j] : pair_couplings) {
            if (j.imag() != 0) {
                return false;
            }
        }
        return true;
    }

    /// Every coupling multiplied by `a`.
    CouplingConfig scaled(Complex a) const {
        CouplingConfig out = *this;
        for (Complex &h : out.fields) {
            h *= a;
        }
        for (auto &[pair, j] : out.pair_couplings) {
            j *= a;
        }
        return out;
    }

    void validate(const LatticeSpec &lattice) const {
        if (distance != lattice.distance() || fields.size() != lattice.num_qubits()) {
            throw std::invalid_argument("coupling config does not match lattice of distance " +
                                        std::to_string(lattice.distance()));
        }
        for (const auto &[pair, j] : pair_couplings) {
            if (pair.a < 0 || pair.a >= pair.b || static_cast<std::size_t>(pair.b) >= lattice.num_qubits()) {
                throw std::invalid_argument("pair coupling (" + std::to_string(pair.a) + "," +
                                            std::to_string(pair.b) + ") does not name two distinct qubits");
            }
        }
    }
};

inline CouplingConfig make_homogeneous(const LatticeSpec &lattice, Complex h, Complex J) {
    CouplingConfig config;
    config.distance = lattice.distance();
    config.fields.assign(lattice.num_qubits(), h);
    if (J != Complex{0.0, 0.0}) {
        for (const QubitPair &p : perpendicular_pairs(lattice)) {
            config.pair_couplings.emplace(p, J);
        }
    }
    std::ostringstream desc;
    desc << std::setprecision(17) << "homogeneous(h=" << h << ",J=" << J << ")";
    config.distribution = desc.str();
    return config;
}

enum class DistributionKind { homogeneous, two_value, diluted, signed_random, uniform };

inline const char *to_string(DistributionKind k) {
    switch (k) {
        case DistributionKind::homogeneous:
            return "homogeneous";
        case DistributionKind::two_value:
            return "two_value";
        case DistributionKind::diluted:
            return "diluted";
        case DistributionKind::signed_random:
            return "signed_random";
        case DistributionKind::uniform:
            return "uniform";
    }
    return "?";
}

/// Recipe for drawing the single-qubit fields. Pair couplings are always the
/// constant `J` on every perpendicular pair (none when J = 0), except for
/// `uniform`, which draws them from [j_min, j_max].
struct DistributionSpec {
    DistributionKind kind = DistributionKind::homogeneous;
    Complex h{0.0, 0.0};
    Complex J{0.0, 0.0};
    double h1 = 0.0;        // two_value
    double h2 = 0.0;        // two_value
    double dilution = 0.0;  // diluted: probability a field is zero
    double q = 1.0;         // signed_random: probability a field is +h
    double h_min = 0.0;     // uniform
    double h_max = 0.0;
    double j_min = 0.0;
    double j_max = 0.0;

    void validate() const {
        auto finite = [](double x) { return std::isfinite(x); };
        auto finite_c = [&](Complex z) { return finite(z.real()) && finite(z.imag()); };
        if (!finite_c(h) || !finite_c(J) || !finite(h1) || !finite(h2) || !finite(h_min) || !finite(h_max) ||
            !finite(j_min) || !finite(j_max)) {
            throw std::invalid_argument("distribution parameters must be finite");
        }
        if (!(dilution >= 0.0 && dilution <= 1.0)) {
            throw std::invalid_argument("dilution must be a probability in [0,1], got " + std::to_string(dilution));
        }
        if (!(q >= 0.0 && q <= 1.0)) {
            throw std::invalid_argument("sign probability q must lie in [0,1], got " + std::to_string(q));
        }
        if (h_min > h_max || j_min > j_max) {
            throw std::invalid_argument("uniform ranges need min <= max");
        }
    }

    std::string describe() const {
        std::ostringstream out;
        out << std::setprecision(17) << to_string(kind) << "(";
        switch (kind) {
            case DistributionKind::homogeneous:
                out << "h=" << h;
                break;
            case DistributionKind::two_value:
                out << "h1=" << h1 << ",h2=" << h2;
                break;
            case DistributionKind::diluted:
                out << "h=" << h << ",d=" << dilution;
                break;
            case DistributionKind::signed_random:
                out << "h=" << h << ",q=" << q;
                break;
            case DistributionKind::uniform:
                out << "h=[" << h_min << "," << h_max << "],J=[" << j_min << "," << j_max << "]";
                break;
        }
        if (kind != DistributionKind::uniform) {
            out << ",J=" << J;
        }
        out << ")";
        return out.str();
    }
};

/// Deterministic in (lattice, spec, seed): fields are drawn in qubit-id order,
/// then pair couplings in pair order, from one mt19937_64 stream.
inline CouplingConfig draw_random(const LatticeSpec &lattice, const DistributionSpec &spec, std::uint64_t seed) {
    spec.validate();
    Rng rng(seed);
    CouplingConfig config;
    config.distance = lattice.distance();
    config.fields.resize(lattice.num_qubits());
    for (Complex &field : config.fields) {
        switch (spec.kind) {
            case DistributionKind::homogeneous:
                field = spec.h;
                break;
            case DistributionKind::two_value:
                field = rng.uniform() < 0.5 ? spec.h1 : spec.h2;
                break;
            case DistributionKind::diluted:
                field = rng.uniform() < spec.dilution ? Complex{0.0, 0.0} : spec.h;
                break;
            case DistributionKind::signed_random:
                field = rng.uniform() < spec.q ? spec.h : -spec.h;
                break;
            case DistributionKind::uniform:
                field = spec.h_min + (spec.h_max - spec.h_min) * rng.uniform();
                break;
        }
    }
    if (spec.kind == DistributionKind::uniform) {
        if (spec.j_min != 0.0 || spec.j_max != 0.0) {
            for (const QubitPair &p : perpendicular_pairs(lattice)) {
                config.pair_couplings.emplace(p, spec.j_min + (spec.j_max - spec.j_min) * rng.uniform());
            }
        }
    } else if (spec.J != Complex{0.0, 0.0}) {
        for (const QubitPair &p : perpendicular_pairs(lattice)) {
            config.pair_couplings.emplace(p, spec.J);
        }
    }
    config.distribution = spec.describe();
    config.seed = seed;
    return config;
}

/// Spin configuration in the x basis, one entry (+1 or -1) per qubit.
using Spins = std::vector<std::int8_t>;

inline Complex energy(const CouplingConfig &config, std::span<const std::int8_t> sigma) {
    if (sigma.size() != config.fields.size()) {
        throw std::invalid_argument("spin configuration has " + std::to_string(sigma.size()) + " entries, expected " +
                                    std::to_string(config.fields.size()));
    }
    Complex e{0.0, 0.0};
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        e += config.fields[i] * static_cast<double>(sigma[i]);
    }
    for (const auto &[pair, j] : config.pair_couplings) {
        e += j * static_cast<double>(sigma[static_cast<std::size_t>(pair.a)] * sigma[static_cast<std::size_t>(pair.b)]);
    }
    return e;
}

// Text fixture format:
//   # couplings distance=<L> seed=<seed> distribution=<descriptor>
//   F <qubit> <re> <im>
//   P <qubit> <qubit> <re> <im>

inline void write_couplings(std::ostream &out, const CouplingConfig &config) {
    out << "# couplings distance=" << config.distance << " seed=" << config.seed
        << " distribution=" << config.distribution << "\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < config.fields.size(); ++i) {
        out << "F " << i << " " << config.fields[i].real() << " " << config.fields[i].imag() << "\n";
    }
    for (const auto &[pair, j] : config.pair_couplings) {
        out << "P " << pair.a << " " << pair.b << " " << j.real() << " " << j.imag() << "\n";
    }
}

inline CouplingConfig read_couplings(std::istream &in) {
    CouplingConfig config;
    std::string line;
    int line_no = 0;
    bool have_header = false;
    auto fail = [&](const std::string &why) {
        throw std::invalid_argument("couplings line " + std::to_string(line_no) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag == "#") {
            std::string kind;
            ls >> kind;
            if (kind != "couplings") {
                continue;
            }
            std::string field;
            while (ls >> field) {
                auto eq = field.find('=');
                if (eq == std::string::npos) {
                    fail("malformed header field '" + field + "'");
                }
                std::string key = field.substr(0, eq);
                std::string value = field.substr(eq + 1);
                if (key == "distance") {
                    config.distance = std::stoi(value);
                } else if (key == "seed") {
                    config.seed = std::stoull(value);
                } else if (key == "distribution") {
                    std::string rest;
                    std::getline(ls, rest);
                    config.distribution = value + rest;
                }
            }
            if (config.distance < 2) {
                fail("header lacks a valid distance");
            }
            config.fields.assign(build_lattice(config.distance).num_qubits(), Complex{0.0, 0.0});
            have_header = true;
        } else if (tag == "F" || tag == "P") {
            if (!have_header) {
                fail("record before header");
            }
            int a = 0;
            int b = 0;
            double re = 0.0;
            double im = 0.0;
            ls >> a;
            if (tag == "P") {
                ls >> b;
            }
            ls >> re >> im;
            if (!ls) {
                fail("malformed " + tag + " record");
            }
            if (a < 0 || static_cast<std::size_t>(a) >= config.fields.size() ||
                (tag == "P" && (b < 0 || static_cast<std::size_t>(b) >= config.fields.size()))) {
                fail("qubit id out of range");
            }
            if (tag == "F") {
                config.fields[static_cast<std::size_t>(a)] = {re, im};
            } else {
                config.pair_couplings[QubitPair::of(a, b)] = {re, im};
            }
        } else {
            fail("unknown record tag '" + tag + "'");
        }
    }
    if (!have_header) {
        throw std::invalid_argument("couplings document has no header line");
    }
    return config;
}

}  // namespace surfidelity
