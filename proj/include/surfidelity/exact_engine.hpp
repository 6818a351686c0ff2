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

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "surfidelity/dual_map.hpp"
#include "surfidelity/errors.hpp"
#include "surfidelity/geometry.hpp"
#include "surfidelity/noise_model.hpp"

namespace surfidelity {

enum class Engine { qubit_brute, dual_brute, transfer_matrix, sector_sums, monte_carlo };

inline const char *to_string(Engine e) {
    switch (e) {
        case Engine::qubit_brute:
            return "qubit_brute";
        case Engine::dual_brute:
            return "dual_brute";
        case Engine::transfer_matrix:
            return "transfer_matrix";
        case Engine::sector_sums:
            return "sector_sums";
        case Engine::monte_carlo:
            return "monte_carlo";
    }
    return "?";
}

/// |a|^2 / (|a|^2 + |b|^2).
inline double fidelity(Complex a, Complex b) {
    double ma = std::abs(a);
    double mb = std::abs(b);
    if (ma == 0.0 && mb == 0.0) {
        throw UndefinedFidelity("fidelity undefined: both amplitudes vanish");
    }
    if (ma >= mb) {
        double t = mb / ma;
        return 1.0 / (1.0 + t * t);
    }
    double t = ma / mb;
    return t * t / (1.0 + t * t);
}

/// Amplitudes A (recovered state) and B (logically flipped state) for one syndrome.
///
/// The true amplitudes are a * exp(log_scale) and b * exp(log_scale); each
/// engine fixes its own global normalization, recorded in normalization_note.
/// Only ratio_x and fidelity are comparable across engines.
struct AmplitudeResult {
    Complex a;
    Complex b;
    double log_scale = 0.0;
    double fidelity = std::numeric_limits<double>::quiet_NaN();
    double ratio_x = std::numeric_limits<double>::quiet_NaN();
    Engine engine = Engine::qubit_brute;
    std::string normalization_note;
};

inline AmplitudeResult make_amplitude_result(Complex a, Complex b, double log_scale, Engine engine,
                                             std::string note) {
    AmplitudeResult r;
    r.a = a;
    r.b = b;
    r.log_scale = log_scale;
    r.engine = engine;
    r.normalization_note = std::move(note);
    if (a != 0.0 || b != 0.0) {
        r.fidelity = fidelity(a, b);
    }
    r.ratio_x = a != 0.0 ? std::abs(b) / std::abs(a) : std::numeric_limits<double>::infinity();
    return r;
}

/// C(alpha_t, alpha_b) for the four boundary sign choices. True values are the
/// stored entries times exp(log_scale).
struct CorrelationQuad {
    Complex c_pp;
    Complex c_pm;
    Complex c_mp;
    Complex c_mm;
    double log_scale = 0.0;
    Engine engine = Engine::dual_brute;

    Complex at(int alpha_t, int alpha_b) const {
        if (alpha_t > 0) {
            return alpha_b > 0 ? c_pp : c_pm;
        }
        return alpha_b > 0 ? c_mp : c_mm;
    }

    /// Largest |C(-a_t,-a_b) - (-1)^{N_p} C(a_t,a_b)|, relative to the largest |C|.
    double symmetry_residual(std::size_t num_marked) const {
        double sign = num_marked % 2 == 0 ? 1.0 : -1.0;
        double scale = std::max({std::abs(c_pp), std::abs(c_pm), std::abs(c_mp), std::abs(c_mm)});
        if (scale == 0.0) {
            return 0.0;
        }
        return std::max(std::abs(c_mm - sign * c_pp), std::abs(c_mp - sign * c_pm)) / scale;
    }
};

namespace detail {

/// Neumaier-compensated complex accumulator; enumeration sums mix large
/// cancelling terms once marked sites are involved.
class CompensatedSum {
   public:
    void add(Complex z) {
        add1(re_, re_c_, z.real());
        add1(im_, im_c_, z.imag());
    }
    Complex value() const {
        return {re_ + re_c_, im_ + im_c_};
    }

   private:
    static void add1(double &sum, double &comp, double x) {
        double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    double re_ = 0.0, re_c_ = 0.0, im_ = 0.0, im_c_ = 0.0;
};

inline int string_sign(std::span<const std::int8_t> sigma, std::span<const int> qubits) {
    int s = 1;
    for (int q : qubits) {
        s *= sigma[static_cast<std::size_t>(q)];
    }
    return s;
}

inline void flip(Spins &sigma, std::span<const int> qubits) {
    for (int q : qubits) {
        sigma[static_cast<std::size_t>(q)] = static_cast<std::int8_t>(-sigma[static_cast<std::size_t>(q)]);
    }
}

inline void require_consistent(const LatticeSpec &lattice, const SyndromeSet &syndrome, const StringSet &strings) {
    syndrome.validate(lattice.num_plaquettes());
    if (syndrome_of_flip_set(lattice, strings.qubits) != syndrome) {
        throw std::invalid_argument("string operator does not reproduce the syndrome");
    }
}

}  // namespace detail

inline constexpr std::size_t kDefaultQubitBudget = 16;
inline constexpr int kDefaultSiteBudget = 24;
inline constexpr std::size_t kDefaultSectorBudget = 20;

/// Direct evaluation of
///   A = sum' (prod_{i in S} s_i) e^{-H(s)},   B = same with X-bar S,
/// where sum' runs over the star-constrained x-basis configurations. The
/// constrained set is generated from the all-up state by the group of plaquette
/// flips times one Z-bar flip (here the bottom row of horizontal qubits),
/// visited in Gray-code order; every energy is recomputed from scratch.
inline AmplitudeResult amplitudes_qubit_brute(const LatticeSpec &lattice, const CouplingConfig &config,
                                              const SyndromeSet &syndrome, const StringSet &strings,
                                              std::size_t qubit_budget = kDefaultQubitBudget) {
    config.validate(lattice);
    detail::require_consistent(lattice, syndrome, strings);
    if (lattice.num_qubits() > qubit_budget) {
        throw BudgetExceeded("qubit enumeration budget exceeded: " + std::to_string(lattice.num_qubits()) +
                             " qubits > " + std::to_string(qubit_budget));
    }
    std::vector<std::vector<int>> generators;
    for (const Face &p : lattice.plaquettes()) {
        generators.push_back(p.qubits);
    }
    generators.push_back(lattice.horizontal_row(lattice.distance() - 1));

    const std::vector<int> xs = apply_logical_x(lattice, strings).qubits;
    Spins sigma(lattice.num_qubits(), 1);
    detail::CompensatedSum a;
    detail::CompensatedSum b;
    const std::uint64_t count = std::uint64_t{1} << generators.size();
    for (std::uint64_t k = 0; k < count; ++k) {
        if (k > 0) {
            detail::flip(sigma, generators[static_cast<std::size_t>(std::countr_zero(k))]);
        }
        Complex w = std::exp(-energy(config, sigma));
        a.add(static_cast<double>(detail::string_sign(sigma, strings.qubits)) * w);
        b.add(static_cast<double>(detail::string_sign(sigma, xs)) * w);
    }
    return make_amplitude_result(a.value(), b.value(), 0.0, Engine::qubit_brute,
                                 "unnormalized sums over the constrained x-basis states (codeword normalization "
                                 "omitted)");
}

/// C(alpha_t, alpha_b) = sum_mu (prod_{k in marked} mu_k) e^{-H~(mu; alpha_t, alpha_b)}
/// by enumerating all 2^sites dual configurations.
inline CorrelationQuad correlation_quad_dual(const DualIsingModel &dual, const SyndromeSet &marked,
                                             int site_budget = kDefaultSiteBudget) {
    const int n = dual.num_sites();
    marked.validate(static_cast<std::size_t>(n));
    if (n > site_budget || n > 62) {
        throw BudgetExceeded("dual enumeration budget exceeded: " + std::to_string(n) + " sites > " +
                             std::to_string(site_budget));
    }
    std::vector<DualBond> bonds = dual.nn_bonds();
    for (const DualBond &b : dual.diag_bonds()) {
        bonds.push_back(b);
    }
    std::vector<std::pair<int, Complex>> top;
    std::vector<std::pair<int, Complex>> bottom;
    for (int c = 0; c < dual.cols(); ++c) {
        top.emplace_back(dual.site(0, c), dual.top_field(c));
        bottom.emplace_back(dual.site(dual.rows() - 1, c), dual.bottom_field(c));
    }
    std::uint64_t mark_mask = 0;
    for (int k : marked.plaquettes()) {
        mark_mask |= std::uint64_t{1} << k;
    }

    detail::CompensatedSum sums[4];
    const std::uint64_t count = std::uint64_t{1} << n;
    for (std::uint64_t x = 0; x < count; ++x) {
        auto spin = [x](int k) { return ((x >> k) & 1) ? -1.0 : 1.0; };
        Complex e_bond{0.0, 0.0};
        for (const DualBond &b : bonds) {
            e_bond += b.value * (spin(b.m) * spin(b.n));
        }
        Complex m_top{0.0, 0.0};
        Complex m_bottom{0.0, 0.0};
        for (const auto &[k, v] : top) {
            m_top += v * spin(k);
        }
        for (const auto &[k, v] : bottom) {
            m_bottom += v * spin(k);
        }
        double mark = (std::popcount(x & mark_mask) % 2 == 0) ? 1.0 : -1.0;
        sums[0].add(mark * std::exp(-(e_bond + m_top + m_bottom)));
        sums[1].add(mark * std::exp(-(e_bond + m_top - m_bottom)));
        sums[2].add(mark * std::exp(-(e_bond - m_top + m_bottom)));
        sums[3].add(mark * std::exp(-(e_bond - m_top - m_bottom)));
    }
    CorrelationQuad q;
    q.c_pp = sums[0].value();
    q.c_pm = sums[1].value();
    q.c_mp = sums[2].value();
    q.c_mm = sums[3].value();
    q.engine = Engine::dual_brute;
    return q;
}

inline constexpr const char *kDualNormalizationNote =
    "alpha_t is fixed to +1, which removes the global mu/alpha flip: A_dual = A_qubit";

/// Amplitudes from the correlation quad for a string built by build_strings:
///   even:        A = C(+,+) + C(+,-),  B = C(+,+) - C(+,-)
///   odd, top:    same as even
///   odd, bottom: A = C(+,+) - C(+,-),  B = C(+,+) + C(+,-)
/// Arguments of C are (alpha_t, alpha_b).
inline AmplitudeResult amplitudes_from_quad(const CorrelationQuad &quad, bool odd_syndrome,
                                            BoundaryTouch closest_boundary) {
    Complex plus = quad.c_pp + quad.c_pm;
    Complex minus = quad.c_pp - quad.c_pm;
    bool swapped = odd_syndrome && closest_boundary == BoundaryTouch::bottom;
    if (odd_syndrome && closest_boundary != BoundaryTouch::top && closest_boundary != BoundaryTouch::bottom) {
        throw std::invalid_argument("odd syndrome needs a string ending on the top or bottom boundary");
    }
    std::string note = kDualNormalizationNote;
    if (swapped) {
        note += "; odd/bottom relations A = C(+,+) - C(+,-), B = C(+,+) + C(+,-) checked against qubit enumeration";
    }
    return make_amplitude_result(swapped ? minus : plus, swapped ? plus : minus, quad.log_scale, quad.engine,
                                 std::move(note));
}

/// General form valid for any string pair: A = 1/2 sum_alpha f_S(alpha) C(alpha),
/// B likewise with the X-bar S factor. Uses all four quad entries, no symmetry assumed.
inline AmplitudeResult amplitudes_from_observables(const CorrelationQuad &quad, const DualObservable &s,
                                                   const DualObservable &xs) {
    Complex a{0.0, 0.0};
    Complex b{0.0, 0.0};
    for (int at : {1, -1}) {
        for (int ab : {1, -1}) {
            a += static_cast<double>(s.alpha_factor(at, ab)) * quad.at(at, ab);
            b += static_cast<double>(xs.alpha_factor(at, ab)) * quad.at(at, ab);
        }
    }
    return make_amplitude_result(0.5 * a, 0.5 * b, quad.log_scale, quad.engine, kDualNormalizationNote);
}

/// Picks the closed-form relations when the string has the standard boundary
/// structure (even: no boundary; odd: exactly one of top/bottom), and the
/// general alpha average otherwise.
inline AmplitudeResult amplitudes_for_strings(const LatticeSpec &lattice, const CorrelationQuad &quad,
                                              const SyndromeSet &syndrome, const StringSet &strings) {
    auto [s, xs] = map_strings(lattice, syndrome, strings);
    bool standard = syndrome.odd() ? (strings.boundary_touch == BoundaryTouch::top ||
                                      strings.boundary_touch == BoundaryTouch::bottom)
                                   : strings.boundary_touch == BoundaryTouch::none;
    if (standard) {
        return amplitudes_from_quad(quad, syndrome.odd(), strings.boundary_touch);
    }
    return amplitudes_from_observables(quad, s, xs);
}

inline AmplitudeResult amplitudes_dual_brute(const LatticeSpec &lattice, const CouplingConfig &config,
                                             const SyndromeSet &syndrome, const StringSet &strings,
                                             int site_budget = kDefaultSiteBudget) {
    detail::require_consistent(lattice, syndrome, strings);
    DualIsingModel dual = build_dual(lattice, config);
    return amplitudes_for_strings(lattice, correlation_quad_dual(dual, syndrome, site_budget), syndrome, strings);
}

struct SectorSumsResult {
    Complex z1;
    Complex z2;
    AmplitudeResult amplitudes;
};

/// Z1 = sum over plaquette-flip subsets P of e^{-E(P|F_x>)}, Z2 the same with the
/// Z-bar chain gamma (top row of horizontal qubits) also flipped. The empty-
/// syndrome amplitudes are A0 = Z1 + Z2, B0 = Z1 - Z2.
inline SectorSumsResult sector_sums(const LatticeSpec &lattice, const CouplingConfig &config,
                                    std::size_t plaquette_budget = kDefaultSectorBudget) {
    config.validate(lattice);
    if (lattice.num_plaquettes() > plaquette_budget) {
        throw BudgetExceeded("sector enumeration budget exceeded: " + std::to_string(lattice.num_plaquettes()) +
                             " plaquettes > " + std::to_string(plaquette_budget));
    }
    const std::vector<int> &gamma = lattice.logical_z_path();
    Spins sigma(lattice.num_qubits(), 1);
    detail::CompensatedSum z1;
    detail::CompensatedSum z2;
    const std::uint64_t count = std::uint64_t{1} << lattice.num_plaquettes();
    for (std::uint64_t k = 0; k < count; ++k) {
        if (k > 0) {
            detail::flip(sigma, lattice.plaquettes()[static_cast<std::size_t>(std::countr_zero(k))].qubits);
        }
        z1.add(std::exp(-energy(config, sigma)));
        detail::flip(sigma, gamma);
        z2.add(std::exp(-energy(config, sigma)));
        detail::flip(sigma, gamma);
    }
    SectorSumsResult out;
    out.z1 = z1.value();
    out.z2 = z2.value();
    out.amplitudes = make_amplitude_result(out.z1 + out.z2, out.z1 - out.z2, 0.0, Engine::sector_sums,
                                           "A0 = Z1 + Z2, B0 = Z1 - Z2 (2^-N prefactor omitted)");
    return out;
}

}  // namespace surfidelity
