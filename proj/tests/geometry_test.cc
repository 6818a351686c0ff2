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

#include "surfidelity/geometry.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <vector>

using namespace surfidelity;

namespace {

std::set<int> as_set(const std::vector<int> &v) {
    return {v.begin(), v.end()};
}

int shared(const std::vector<int> &a, const std::vector<int> &b) {
    int n = 0;
    for (int x : a) {
        n += std::count(b.begin(), b.end(), x) > 0;
    }
    return n;
}

// Every subset of size <= k of {0..n-1}, lexicographic.
void subsets(int n, int k, std::vector<int> &cur, int start, std::vector<std::vector<int>> &out) {
    out.push_back(cur);
    if (static_cast<int>(cur.size()) == k) {
        return;
    }
    for (int i = start; i < n; ++i) {
        cur.push_back(i);
        subsets(n, k, cur, i + 1, out);
        cur.pop_back();
    }
}

}  // namespace

TEST(geometry, counts_small_lattices) {
    LatticeSpec l2 = build_lattice(2);
    EXPECT_EQ(l2.num_qubits(), 5u);
    EXPECT_EQ(l2.num_plaquettes(), 2u);
    EXPECT_EQ(l2.num_stars(), 2u);
    EXPECT_EQ(build_lattice(3).num_qubits(), 13u);
    EXPECT_EQ(build_lattice(20).num_qubits(), 761u);
}

TEST(geometry, rejects_tiny_distance) {
    EXPECT_THROW(build_lattice(1), std::invalid_argument);
    EXPECT_THROW(build_lattice(0), std::invalid_argument);
}

TEST(geometry, structural_invariants_hold_up_to_l8) {
    for (int L = 2; L <= 8; ++L) {
        SCOPED_TRACE(L);
        LatticeSpec lat = build_lattice(L);
        ASSERT_EQ(lat.num_qubits(), static_cast<std::size_t>(L * L + (L - 1) * (L - 1)));
        ASSERT_EQ(lat.num_plaquettes(), static_cast<std::size_t>(L * (L - 1)));
        ASSERT_EQ(lat.num_stars(), static_cast<std::size_t>(L * (L - 1)));

        std::vector<int> membership(lat.num_qubits(), 0);
        for (const Face &p : lat.plaquettes()) {
            bool side = p.col == 0 || p.col == L - 1;
            EXPECT_EQ(p.qubits.size(), side ? 3u : 4u);
            for (int q : p.qubits) {
                ++membership[static_cast<std::size_t>(q)];
            }
        }
        for (std::size_t q = 0; q < lat.num_qubits(); ++q) {
            bool boundary = lat.qubit(static_cast<int>(q)).kind != QubitKind::bulk;
            EXPECT_EQ(membership[q], boundary ? 1 : 2) << "qubit " << q;
        }
        for (const Face &s : lat.stars()) {
            bool edge_row = s.row == 0 || s.row == L - 1;
            EXPECT_EQ(s.qubits.size(), edge_row ? 3u : 4u);
            for (const Face &p : lat.plaquettes()) {
                int n = shared(s.qubits, p.qubits);
                EXPECT_TRUE(n == 0 || n == 2);
            }
        }
        EXPECT_EQ(lat.logical_x_path().size(), static_cast<std::size_t>(L));
        EXPECT_EQ(shared(lat.logical_x_path(), lat.logical_z_path()) % 2, 1);
        EXPECT_TRUE(syndrome_of_flip_set(lat, lat.logical_x_path()).empty());
    }
}

TEST(geometry, construction_is_deterministic) {
    LatticeSpec a = build_lattice(5);
    LatticeSpec b = build_lattice(5);
    ASSERT_EQ(a.num_qubits(), b.num_qubits());
    for (std::size_t p = 0; p < a.num_plaquettes(); ++p) {
        EXPECT_EQ(a.plaquettes()[p].qubits, b.plaquettes()[p].qubits);
    }
    EXPECT_EQ(a.logical_x_path(), b.logical_x_path());
}

TEST(geometry, horizontal_rows_are_logical_z_representatives) {
    LatticeSpec lat = build_lattice(4);
    for (int k = 0; k < lat.distance(); ++k) {
        std::vector<int> row = lat.horizontal_row(k);
        ASSERT_EQ(row.size(), 4u);
        // Every star touches a horizontal row in 0 or 2 qubits.
        for (const Face &s : lat.stars()) {
            EXPECT_EQ(shared(s.qubits, row) % 2, 0);
        }
        EXPECT_EQ(shared(row, lat.logical_x_path()) % 2, 1);
    }
    EXPECT_EQ(as_set(lat.horizontal_row(0)), as_set(lat.logical_z_path()));
    EXPECT_THROW(lat.horizontal_row(4), std::out_of_range);
}

TEST(geometry, syndrome_of_flip_set_examples) {
    LatticeSpec lat = build_lattice(3);
    EXPECT_TRUE(syndrome_of_flip_set(lat, {}).empty());
    EXPECT_TRUE(syndrome_of_flip_set(lat, lat.logical_x_path()).empty());
    for (std::size_t q = 0; q < lat.num_qubits(); ++q) {
        const Qubit &qb = lat.qubit(static_cast<int>(q));
        if (qb.kind != QubitKind::bulk) {
            continue;
        }
        std::vector<int> flips{static_cast<int>(q)};
        SyndromeSet s = syndrome_of_flip_set(lat, flips);
        EXPECT_EQ(s.plaquettes(), (std::vector<int>{std::min(qb.plaquettes[0], qb.plaquettes[1]),
                                                    std::max(qb.plaquettes[0], qb.plaquettes[1])}));
    }
    std::vector<int> twice{0, 0};
    EXPECT_TRUE(syndrome_of_flip_set(lat, twice).empty());
}

TEST(geometry, syndrome_set_rejects_bad_ids) {
    EXPECT_THROW(SyndromeSet(std::vector<int>{1, 1}), std::invalid_argument);
    EXPECT_THROW(SyndromeSet(std::vector<int>{-1}), std::invalid_argument);
    SyndromeSet s(std::vector<int>{5, 2});
    EXPECT_EQ(s.plaquettes(), (std::vector<int>{2, 5}));
    EXPECT_NO_THROW(s.validate(6));
    EXPECT_THROW(s.validate(5), std::invalid_argument);
}

TEST(geometry, build_strings_examples) {
    LatticeSpec lat = build_lattice(4);
    StringSet empty = build_strings(lat, SyndromeSet{});
    EXPECT_TRUE(empty.qubits.empty());
    EXPECT_EQ(empty.boundary_touch, BoundaryTouch::none);

    // Vertically adjacent plaquettes share exactly one qubit.
    SyndromeSet pair(std::vector<int>{lat.plaquette_index(1, 2), lat.plaquette_index(2, 2)});
    StringSet s = build_strings(lat, pair);
    ASSERT_EQ(s.qubits.size(), 1u);
    const Face &a = lat.plaquettes()[static_cast<std::size_t>(lat.plaquette_index(1, 2))];
    const Face &b = lat.plaquettes()[static_cast<std::size_t>(lat.plaquette_index(2, 2))];
    EXPECT_EQ(shared(a.qubits, b.qubits), 1);
    EXPECT_EQ(shared(a.qubits, s.qubits), 1);
    EXPECT_EQ(s.boundary_touch, BoundaryTouch::none);

    // A top-row plaquette connects to the top through its dangling qubit.
    SyndromeSet top(std::vector<int>{lat.plaquette_index(0, 1)});
    StringSet t = build_strings(lat, top);
    ASSERT_EQ(t.qubits.size(), 1u);
    EXPECT_EQ(lat.qubit(t.qubits[0]).kind, QubitKind::top_boundary);
    EXPECT_EQ(t.boundary_touch, BoundaryTouch::top);
    EXPECT_EQ(syndrome_of_flip_set(lat, t.qubits), top);
}

TEST(geometry, odd_string_goes_to_nearer_boundary_of_most_remote_plaquette) {
    LatticeSpec lat = build_lattice(5);  // 4 plaquette rows
    SyndromeSet s(std::vector<int>{lat.plaquette_index(3, 0), lat.plaquette_index(2, 4), lat.plaquette_index(3, 3)});
    StringSet str = build_strings(lat, s);
    EXPECT_EQ(syndrome_of_flip_set(lat, str.qubits), s);
    // Row 2 is the most remote (distance 1 to the bottom); it ends on the bottom.
    EXPECT_EQ(str.boundary_touch, BoundaryTouch::bottom);
}

TEST(geometry, build_strings_round_trip_exhaustive) {
    for (int L = 2; L <= 5; ++L) {
        SCOPED_TRACE(L);
        LatticeSpec lat = build_lattice(L);
        std::vector<std::vector<int>> all;
        std::vector<int> cur;
        subsets(static_cast<int>(lat.num_plaquettes()), 4, cur, 0, all);
        for (const auto &ids : all) {
            SyndromeSet s(ids);
            StringSet str = build_strings(lat, s);
            ASSERT_EQ(syndrome_of_flip_set(lat, str.qubits), s);
            if (!s.odd()) {
                ASSERT_EQ(str.boundary_touch, BoundaryTouch::none);
            } else {
                ASSERT_TRUE(str.boundary_touch == BoundaryTouch::top || str.boundary_touch == BoundaryTouch::bottom);
            }
        }
    }
}

TEST(geometry, apply_logical_x_is_an_involution) {
    LatticeSpec lat = build_lattice(4);
    StringSet empty = build_strings(lat, SyndromeSet{});
    StringSet x = apply_logical_x(lat, empty);
    EXPECT_EQ(as_set(x.qubits), as_set(lat.logical_x_path()));
    EXPECT_EQ(x.boundary_touch, BoundaryTouch::both);
    EXPECT_TRUE(apply_logical_x(lat, x).qubits.empty());

    SyndromeSet odd(std::vector<int>{lat.plaquette_index(0, 2)});
    StringSet t = build_strings(lat, odd);
    StringSet u = apply_logical_x(lat, t);
    EXPECT_EQ(t.boundary_touch, BoundaryTouch::top);
    EXPECT_EQ(u.boundary_touch, BoundaryTouch::bottom);
    EXPECT_EQ(syndrome_of_flip_set(lat, u.qubits), odd);
    EXPECT_EQ(apply_logical_x(lat, u).qubits, t.qubits);
}

TEST(geometry, grow_sequence_empty_syndrome) {
    auto seq = grow_lattice_sequence(SyndromeSet{}, 4, 3);
    ASSERT_EQ(seq.size(), 3u);
    EXPECT_EQ(seq[0].first.distance(), 4);
    EXPECT_EQ(seq[1].first.distance(), 6);
    EXPECT_EQ(seq[2].first.distance(), 8);
    for (const auto &[lat, s] : seq) {
        EXPECT_TRUE(s.empty());
    }
}

TEST(geometry, grow_sequence_keeps_even_pair_centered) {
    LatticeSpec l4 = build_lattice(4);  // 3 x 4 plaquettes
    SyndromeSet pair(std::vector<int>{l4.plaquette_index(1, 1), l4.plaquette_index(1, 2)});
    auto seq = grow_lattice_sequence(pair, 4, 3);
    for (const auto &[lat, s] : seq) {
        ASSERT_EQ(s.size(), 2u);
        const Face &a = lat.plaquettes()[static_cast<std::size_t>(s.plaquettes()[0])];
        const Face &b = lat.plaquettes()[static_cast<std::size_t>(s.plaquettes()[1])];
        EXPECT_EQ(a.row, lat.plaquette_rows() - 1 - b.row);
        EXPECT_EQ(a.col, lat.plaquette_cols() - 1 - b.col);
    }
}

TEST(geometry, grow_sequence_odd_keeps_nearest_boundary_fixed) {
    LatticeSpec l4 = build_lattice(4);
    SyndromeSet one(std::vector<int>{l4.plaquette_index(2, 1)});  // bottom row
    auto seq = grow_lattice_sequence(one, 4, 3);
    int prev_top = -1;
    for (const auto &[lat, s] : seq) {
        const Face &f = lat.plaquettes()[static_cast<std::size_t>(s.plaquettes()[0])];
        EXPECT_EQ(lat.plaquette_rows() - 1 - f.row, 0);
        EXPECT_GT(f.row, prev_top);
        prev_top = f.row;
    }
}

TEST(geometry, grow_sequence_rejects_oversized_syndrome) {
    EXPECT_THROW(grow_lattice_sequence(SyndromeSet(std::vector<int>{7}), 3, 2), std::invalid_argument);
    EXPECT_THROW(grow_lattice_sequence(SyndromeSet{}, 3, 0), std::invalid_argument);
}
