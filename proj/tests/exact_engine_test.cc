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

#include "surfidelity/exact_engine.hpp"

#include <gtest/gtest.h>

#include <fstream>

#include "surfidelity/transfer_matrix.hpp"

using namespace surfidelity;

namespace {

double rel(double a, double b) {
    if (a == b) {
        return 0.0;
    }
    return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

DistributionSpec uniform_spec(double h, double j) {
    DistributionSpec spec;
    spec.kind = DistributionKind::uniform;
    spec.h_min = -h;
    spec.h_max = h;
    spec.j_min = -j;
    spec.j_max = j;
    return spec;
}

std::vector<std::pair<std::string, SyndromeSet>> standard_syndromes(const LatticeSpec &lat) {
    return {{"empty", SyndromeSet{}},
            {"single", SyndromeSet(std::vector<int>{lat.plaquette_index(0, 0)})},
            {"adjacent", SyndromeSet(std::vector<int>{lat.plaquette_index(0, 0), lat.plaquette_index(0, 1)})},
            {"diagonal", lat.plaquette_rows() > 1
                             ? SyndromeSet(std::vector<int>{lat.plaquette_index(0, 0), lat.plaquette_index(1, 1)})
                             : SyndromeSet(std::vector<int>{lat.plaquette_index(0, 0)})}};
}

// Brute-force over all 2^N x-basis states keeping the star-constrained ones.
std::pair<Complex, Complex> filtered_amplitudes(const LatticeSpec &lat, const CouplingConfig &config,
                                                const StringSet &strings) {
    const std::size_t n = lat.num_qubits();
    const std::vector<int> xs = apply_logical_x(lat, strings).qubits;
    Complex a{0.0, 0.0};
    Complex b{0.0, 0.0};
    for (std::uint64_t k = 0; k < (std::uint64_t{1} << n); ++k) {
        Spins s(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = (k >> i) & 1 ? -1 : 1;
        }
        bool ok = true;
        for (const Face &star : lat.stars()) {
            int p = 1;
            for (int q : star.qubits) {
                p *= s[static_cast<std::size_t>(q)];
            }
            ok = ok && p == 1;
        }
        if (!ok) {
            continue;
        }
        int sa = 1;
        for (int q : strings.qubits) {
            sa *= s[static_cast<std::size_t>(q)];
        }
        int sb = 1;
        for (int q : xs) {
            sb *= s[static_cast<std::size_t>(q)];
        }
        Complex w = std::exp(-energy(config, s));
        a += static_cast<double>(sa) * w;
        b += static_cast<double>(sb) * w;
    }
    return {a, b};
}

}  // namespace

TEST(exact_engine, fidelity_examples) {
    EXPECT_EQ(fidelity(1.0, 0.0), 1.0);
    EXPECT_EQ(fidelity(1.0, 1.0), 0.5);
    EXPECT_DOUBLE_EQ(fidelity(3.0, 4.0), 9.0 / 25.0);
    EXPECT_DOUBLE_EQ(fidelity(Complex(0.0, 3.0), Complex(-4.0, 0.0)), 9.0 / 25.0);
    EXPECT_EQ(fidelity(0.0, 2.0), 0.0);
    EXPECT_THROW(fidelity(0.0, 0.0), UndefinedFidelity);
    // No overflow for huge magnitudes.
    EXPECT_DOUBLE_EQ(fidelity(1e300, 1e300), 0.5);
}

TEST(exact_engine, zero_coupling_gives_unit_fidelity) {
    for (int L = 2; L <= 3; ++L) {
        LatticeSpec lat = build_lattice(L);
        CouplingConfig zero = make_homogeneous(lat, 0.0, 0.0);
        StringSet none = build_strings(lat, SyndromeSet{});
        AmplitudeResult q = amplitudes_qubit_brute(lat, zero, SyndromeSet{}, none);
        EXPECT_EQ(q.b, Complex(0.0, 0.0));
        EXPECT_EQ(q.fidelity, 1.0);
        EXPECT_EQ(amplitudes_dual_brute(lat, zero, SyndromeSet{}, none).fidelity, 1.0);
        EXPECT_EQ(amplitudes_transfer(lat, zero, SyndromeSet{}, none).fidelity, 1.0);
        EXPECT_EQ(sector_sums(lat, zero).amplitudes.fidelity, 1.0);
    }
}

TEST(exact_engine, qubit_brute_matches_filter_oracle) {
    for (int L = 2; L <= 3; ++L) {
        LatticeSpec lat = build_lattice(L);
        for (std::uint64_t seed = 0; seed < 3; ++seed) {
            CouplingConfig config = draw_random(lat, uniform_spec(0.7, 0.4), seed);
            if (seed == 2) {
                for (Complex &h : config.fields) {
                    h += Complex(0.0, 0.3);
                }
            }
            for (const auto &[name, syndrome] : standard_syndromes(lat)) {
                SCOPED_TRACE(testing::Message() << "L=" << L << " seed=" << seed << " " << name);
                StringSet strings = build_strings(lat, syndrome);
                AmplitudeResult r = amplitudes_qubit_brute(lat, config, syndrome, strings);
                auto [a, b] = filtered_amplitudes(lat, config, strings);
                EXPECT_LE(std::abs(r.a - a), 1e-12 * std::abs(a));
                EXPECT_LE(std::abs(r.b - b), 1e-12 * std::max(std::abs(a), std::abs(b)));
            }
        }
    }
}

TEST(exact_engine, golden_fixture_l2) {
    LatticeSpec lat = build_lattice(2);
    CouplingConfig config = make_homogeneous(lat, 0.1, 0.0);
    AmplitudeResult r = amplitudes_qubit_brute(lat, config, SyndromeSet{}, build_strings(lat, SyndromeSet{}));
    std::ifstream in(std::string(SURFIDELITY_TEST_DATA) + "/exact_l2_h0.1.golden");
    ASSERT_TRUE(in) << "missing golden file";
    std::string line;
    while (std::getline(in, line) && !line.empty() && line[0] == '#') {
    }
    std::istringstream values(line);
    double are = 0, aim = 0, bre = 0, bim = 0;
    values >> are >> aim >> bre >> bim;
    ASSERT_TRUE(values);
    EXPECT_NEAR(r.a.real(), are, 1e-13 * std::abs(are));
    EXPECT_NEAR(r.a.imag(), aim, 1e-13);
    EXPECT_NEAR(r.b.real(), bre, 1e-13 * std::abs(are));
    EXPECT_NEAR(r.b.imag(), bim, 1e-13);
}

TEST(exact_engine, cross_engine_identity) {
    for (int L = 2; L <= 3; ++L) {
        LatticeSpec lat = build_lattice(L);
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            CouplingConfig config = draw_random(lat, uniform_spec(0.6, 0.4), seed);
            DualIsingModel dual = build_dual(lat, config);
            for (const auto &[name, syndrome] : standard_syndromes(lat)) {
                SCOPED_TRACE(testing::Message() << "L=" << L << " seed=" << seed << " " << name);
                StringSet strings = build_strings(lat, syndrome);
                AmplitudeResult q = amplitudes_qubit_brute(lat, config, syndrome, strings);
                CorrelationQuad quad = correlation_quad_dual(dual, syndrome);
                AmplitudeResult d = amplitudes_for_strings(lat, quad, syndrome, strings);
                AmplitudeResult t = amplitudes_transfer(lat, config, syndrome, strings);
                EXPECT_LE(rel(q.ratio_x, d.ratio_x), 1e-10);
                EXPECT_LE(rel(q.fidelity, d.fidelity), 1e-10);
                EXPECT_LE(rel(q.ratio_x, t.ratio_x), 1e-10);
                EXPECT_LE(quad.symmetry_residual(syndrome.size()), 1e-12);
                // Fixing alpha_t = +1 picks one of the two dual preimages of each qubit state.
                EXPECT_LE(std::abs(d.a - q.a), 1e-10 * std::abs(q.a));
                if (syndrome.empty()) {
                    SectorSumsResult ss = sector_sums(lat, config);
                    EXPECT_LE(rel(q.ratio_x, ss.amplitudes.ratio_x), 1e-10);
                }
            }
        }
    }
}

TEST(exact_engine, odd_syndromes_near_either_boundary) {
    // On L=3 the bottom-row plaquettes produce strings to the bottom boundary,
    // which use the swapped relations.
    LatticeSpec lat = build_lattice(3);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        CouplingConfig config = draw_random(lat, uniform_spec(0.8, 0.3), seed);
        DualIsingModel dual = build_dual(lat, config);
        for (int p = 0; p < static_cast<int>(lat.num_plaquettes()); ++p) {
            SyndromeSet one(std::vector<int>{p});
            StringSet strings = build_strings(lat, one);
            AmplitudeResult q = amplitudes_qubit_brute(lat, config, one, strings);
            AmplitudeResult d = amplitudes_for_strings(lat, correlation_quad_dual(dual, one), one, strings);
            EXPECT_LE(rel(q.ratio_x, d.ratio_x), 1e-10) << "plaquette " << p;
            if (strings.boundary_touch == BoundaryTouch::bottom) {
                EXPECT_NE(d.normalization_note.find("odd/bottom"), std::string::npos);
            }
        }
    }
}

TEST(exact_engine, general_strings_use_alpha_average) {
    LatticeSpec lat = build_lattice(3);
    CouplingConfig config = draw_random(lat, uniform_spec(0.5, 0.3), 8);
    DualIsingModel dual = build_dual(lat, config);
    SyndromeSet pair(std::vector<int>{lat.plaquette_index(0, 0), lat.plaquette_index(1, 2)});
    StringSet strings = build_strings(lat, pair);
    StringSet other = apply_logical_x(lat, strings);
    AmplitudeResult q = amplitudes_qubit_brute(lat, config, pair, other);
    AmplitudeResult d = amplitudes_for_strings(lat, correlation_quad_dual(dual, pair), pair, other);
    EXPECT_LE(rel(q.ratio_x, d.ratio_x), 1e-10);
    AmplitudeResult base = amplitudes_qubit_brute(lat, config, pair, strings);
    EXPECT_LE(rel(q.ratio_x, 1.0 / base.ratio_x), 1e-12);
}

TEST(exact_engine, complex_couplings_agree_across_engines) {
    LatticeSpec lat = build_lattice(3);
    CouplingConfig config = make_homogeneous(lat, Complex(0.2, 0.4), Complex(0.05, -0.1));
    for (const auto &[name, syndrome] : standard_syndromes(lat)) {
        StringSet strings = build_strings(lat, syndrome);
        AmplitudeResult q = amplitudes_qubit_brute(lat, config, syndrome, strings);
        AmplitudeResult d = amplitudes_dual_brute(lat, config, syndrome, strings);
        AmplitudeResult t = amplitudes_transfer(lat, config, syndrome, strings);
        EXPECT_LE(rel(q.ratio_x, d.ratio_x), 1e-8) << name;
        EXPECT_LE(rel(q.ratio_x, t.ratio_x), 1e-8) << name;
    }
}

TEST(exact_engine, correlation_quad_examples) {
    LatticeSpec lat = build_lattice(3);
    DualIsingModel zero = build_dual(lat, make_homogeneous(lat, 0.0, 0.0));
    CorrelationQuad empty = correlation_quad_dual(zero, SyndromeSet{});
    for (Complex c : {empty.c_pp, empty.c_pm, empty.c_mp, empty.c_mm}) {
        EXPECT_EQ(c, Complex(64.0, 0.0));
    }
    CorrelationQuad one = correlation_quad_dual(zero, SyndromeSet(std::vector<int>{2}));
    for (Complex c : {one.c_pp, one.c_pm, one.c_mp, one.c_mm}) {
        EXPECT_EQ(c, Complex(0.0, 0.0));
    }
    DualIsingModel dual = build_dual(lat, draw_random(lat, uniform_spec(0.9, 0.4), 5));
    CorrelationQuad odd = correlation_quad_dual(dual, SyndromeSet(std::vector<int>{4}));
    EXPECT_LE(std::abs(odd.c_mm + odd.c_pp), 1e-12 * std::abs(odd.c_pp));
    EXPECT_LE(std::abs(odd.c_mp + odd.c_pm), 1e-12 * std::abs(odd.c_pp));
}

TEST(exact_engine, amplitudes_from_quad_limits) {
    CorrelationQuad para;
    para.c_pp = para.c_pm = para.c_mp = para.c_mm = 5.0;
    AmplitudeResult even = amplitudes_from_quad(para, false, BoundaryTouch::none);
    EXPECT_EQ(even.b, Complex(0.0, 0.0));
    EXPECT_EQ(even.fidelity, 1.0);

    CorrelationQuad ordered;
    ordered.c_pp = ordered.c_mm = 3.0;
    AmplitudeResult half = amplitudes_from_quad(ordered, false, BoundaryTouch::none);
    EXPECT_EQ(half.a, half.b);
    EXPECT_EQ(half.fidelity, 0.5);

    AmplitudeResult bottom = amplitudes_from_quad(para, true, BoundaryTouch::bottom);
    EXPECT_EQ(bottom.a, Complex(0.0, 0.0));
    EXPECT_EQ(bottom.fidelity, 0.0);
    EXPECT_TRUE(std::isinf(bottom.ratio_x));
    AmplitudeResult top = amplitudes_from_quad(para, true, BoundaryTouch::top);
    EXPECT_EQ(top.fidelity, 1.0);

    EXPECT_THROW(amplitudes_from_quad(para, true, BoundaryTouch::none), std::invalid_argument);
}

TEST(exact_engine, sector_sums_examples) {
    LatticeSpec lat = build_lattice(3);
    SectorSumsResult zero = sector_sums(lat, make_homogeneous(lat, 0.0, 0.0));
    EXPECT_EQ(zero.z1, Complex(64.0, 0.0));
    EXPECT_EQ(zero.z2, Complex(64.0, 0.0));
    EXPECT_EQ(zero.amplitudes.b, Complex(0.0, 0.0));

    LatticeSpec l2 = build_lattice(2);
    CouplingConfig j = make_homogeneous(l2, 0.0, 0.5);
    double brute = amplitudes_qubit_brute(l2, j, SyndromeSet{}, build_strings(l2, SyndromeSet{})).ratio_x;
    EXPECT_LE(rel(sector_sums(l2, j).amplitudes.ratio_x, brute), 1e-12);
}

TEST(exact_engine, a0_dominates_b0_for_real_couplings) {
    for (int L = 2; L <= 3; ++L) {
        LatticeSpec lat = build_lattice(L);
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            SectorSumsResult r = sector_sums(lat, draw_random(lat, uniform_spec(1.5, 1.0), seed));
            EXPECT_GE(std::abs(r.amplitudes.a), std::abs(r.amplitudes.b)) << "L=" << L << " seed=" << seed;
        }
    }
}

TEST(exact_engine, ratio_nondecreasing_in_pair_coupling) {
    LatticeSpec lat = build_lattice(3);
    StringSet none = build_strings(lat, SyndromeSet{});
    double prev = -1.0;
    for (int k = 0; k < 20; ++k) {
        double j = 0.05 * k;
        double r = amplitudes_qubit_brute(lat, make_homogeneous(lat, 0.0, j), SyndromeSet{}, none).ratio_x;
        EXPECT_GE(r, prev - 1e-15) << "J=" << j;
        prev = r;
    }
    EXPECT_GT(prev, 0.5);
}

TEST(exact_engine, budgets_are_enforced) {
    LatticeSpec lat = build_lattice(4);
    CouplingConfig config = make_homogeneous(lat, 0.1, 0.0);
    StringSet none = build_strings(lat, SyndromeSet{});
    EXPECT_THROW(amplitudes_qubit_brute(lat, config, SyndromeSet{}, none), BudgetExceeded);
    EXPECT_NO_THROW(amplitudes_qubit_brute(lat, config, SyndromeSet{}, none, 25));
    EXPECT_THROW(amplitudes_dual_brute(lat, config, SyndromeSet{}, none, 11), BudgetExceeded);
    EXPECT_THROW(sector_sums(lat, config, 11), BudgetExceeded);
}

TEST(exact_engine, rejects_inconsistent_strings) {
    LatticeSpec lat = build_lattice(3);
    CouplingConfig config = make_homogeneous(lat, 0.1, 0.0);
    SyndromeSet one(std::vector<int>{0});
    StringSet wrong = build_strings(lat, SyndromeSet(std::vector<int>{1}));
    EXPECT_THROW(amplitudes_qubit_brute(lat, config, one, wrong), std::invalid_argument);
}
