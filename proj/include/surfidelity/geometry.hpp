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
#include <array>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace surfidelity {

// Planar surface code of distance L.
//
// Everything lives on a doubled grid of (2L-1) x (2L-1) sites, rows counted from
// the top:
//   plaquette (r, c)  sits at (2r+1, 2c)   r in [0, L-1), c in [0, L)
//   star      (r, c)  sits at (2r, 2c+1)   r in [0, L),   c in [0, L-1)
//   qubits    sit at (even, even) [horizontal edges] and (odd, odd) [vertical edges]
// Plaquettes in the leftmost and rightmost columns have weight 3, stars on the top
// and bottom rows have weight 3, and the horizontal qubits on rows 0 and 2L-2
// dangle off a single plaquette.

enum class QubitKind : std::uint8_t { bulk, top_boundary, bottom_boundary };
enum class EdgeOrientation : std::uint8_t { horizontal, vertical };

/// Which of the top/bottom boundaries a qubit string touches an odd number of times.
enum class BoundaryTouch : std::uint8_t { none, top, bottom, both };

inline const char *to_string(BoundaryTouch t) {
    switch (t) {
        case BoundaryTouch::none:
            return "none";
        case BoundaryTouch::top:
            return "top";
        case BoundaryTouch::bottom:
            return "bottom";
        case BoundaryTouch::both:
            return "both";
    }
    return "?";
}

struct Qubit {
    int row2 = 0;
    int col2 = 0;
    QubitKind kind = QubitKind::bulk;
    EdgeOrientation orientation = EdgeOrientation::horizontal;
    /// Containing plaquettes; the second entry is -1 for top/bottom qubits.
    std::array<int, 2> plaquettes{-1, -1};
    /// Incident stars (edge endpoints); -1 where the edge dangles off the left/right side.
    std::array<int, 2> stars{-1, -1};
};

/// A plaquette or a star: grid coordinates plus member qubit ids (ascending).
struct Face {
    int row = 0;
    int col = 0;
    std::vector<int> qubits;
};

class LatticeSpec {
   public:
    int distance() const {
        return distance_;
    }
    std::size_t num_qubits() const {
        return qubits_.size();
    }
    std::size_t num_plaquettes() const {
        return plaquettes_.size();
    }
    std::size_t num_stars() const {
        return stars_.size();
    }
    int plaquette_rows() const {
        return distance_ - 1;
    }
    int plaquette_cols() const {
        return distance_;
    }
    int plaquette_index(int row, int col) const {
        if (row < 0 || row >= plaquette_rows() || col < 0 || col >= plaquette_cols()) {
            throw std::out_of_range(
                "plaquette (" + std::to_string(row) + "," + std::to_string(col) + ") outside lattice");
        }
        return row * plaquette_cols() + col;
    }
    int star_index(int row, int col) const {
        return row * (distance_ - 1) + col;
    }
    /// Qubit id at doubled-grid coordinates, if one lives there.
    std::optional<int> qubit_at(int row2, int col2) const {
        int side = 2 * distance_ - 1;
        if (row2 < 0 || col2 < 0 || row2 >= side || col2 >= side) {
            return std::nullopt;
        }
        int id = site_to_qubit_[static_cast<std::size_t>(row2 * side + col2)];
        if (id < 0) {
            return std::nullopt;
        }
        return id;
    }
    const std::vector<Qubit> &qubits() const {
        return qubits_;
    }
    const Qubit &qubit(int id) const {
        return qubits_.at(static_cast<std::size_t>(id));
    }
    const std::vector<Face> &plaquettes() const {
        return plaquettes_;
    }
    const std::vector<Face> &stars() const {
        return stars_;
    }
    /// Vertical string of L horizontal qubits down the leftmost column (X-bar support).
    const std::vector<int> &logical_x_path() const {
        return logical_x_path_;
    }
    /// Horizontal string of L qubits along the top row (Z-bar support).
    const std::vector<int> &logical_z_path() const {
        return logical_z_path_;
    }
    /// Horizontal qubits on doubled-grid row 2k, left to right. Each such row is a
    /// Z-bar path: flipping it in the x basis keeps every star satisfied.
    std::vector<int> horizontal_row(int k) const {
        if (k < 0 || k >= distance_) {
            throw std::out_of_range("horizontal row " + std::to_string(k) + " outside lattice");
        }
        std::vector<int> row;
        row.reserve(static_cast<std::size_t>(distance_));
        for (int c = 0; c < distance_; ++c) {
            row.push_back(*qubit_at(2 * k, 2 * c));
        }
        return row;
    }

    friend LatticeSpec build_lattice(int distance);

   private:
    int distance_ = 0;
    std::vector<Qubit> qubits_;
    std::vector<Face> plaquettes_;
    std::vector<Face> stars_;
    std::vector<int> site_to_qubit_;
    std::vector<int> logical_x_path_;
    std::vector<int> logical_z_path_;
};

inline LatticeSpec build_lattice(int distance) {
    if (distance < 2) {
        throw std::invalid_argument("lattice distance must be at least 2, got " + std::to_string(distance));
    }
    LatticeSpec lat;
    const int L = distance;
    const int side = 2 * L - 1;
    lat.distance_ = L;
    lat.site_to_qubit_.assign(static_cast<std::size_t>(side * side), -1);

    for (int r2 = 0; r2 < side; ++r2) {
        for (int c2 = 0; c2 < side; ++c2) {
            if ((r2 + c2) % 2 != 0) {
                continue;
            }
            Qubit q;
            q.row2 = r2;
            q.col2 = c2;
            q.orientation = (r2 % 2 == 0) ? EdgeOrientation::horizontal : EdgeOrientation::vertical;
            if (q.orientation == EdgeOrientation::horizontal && r2 == 0) {
                q.kind = QubitKind::top_boundary;
            } else if (q.orientation == EdgeOrientation::horizontal && r2 == side - 1) {
                q.kind = QubitKind::bottom_boundary;
            }
            lat.site_to_qubit_[static_cast<std::size_t>(r2 * side + c2)] = static_cast<int>(lat.qubits_.size());
            lat.qubits_.push_back(q);
        }
    }

    auto in_range = [&](int r2, int c2) { return r2 >= 0 && c2 >= 0 && r2 < side && c2 < side; };
    auto neighbours = [&](int r2, int c2) {
        std::vector<int> ids;
        const int dr[4] = {-1, 0, 0, 1};
        const int dc[4] = {0, -1, 1, 0};
        for (int k = 0; k < 4; ++k) {
            if (in_range(r2 + dr[k], c2 + dc[k])) {
                ids.push_back(lat.site_to_qubit_[static_cast<std::size_t>((r2 + dr[k]) * side + c2 + dc[k])]);
            }
        }
        std::sort(ids.begin(), ids.end());
        return ids;
    };

    for (int r = 0; r < L - 1; ++r) {
        for (int c = 0; c < L; ++c) {
            Face f{r, c, neighbours(2 * r + 1, 2 * c)};
            int id = static_cast<int>(lat.plaquettes_.size());
            for (int q : f.qubits) {
                auto &slots = lat.qubits_[static_cast<std::size_t>(q)].plaquettes;
                (slots[0] < 0 ? slots[0] : slots[1]) = id;
            }
            lat.plaquettes_.push_back(std::move(f));
        }
    }
    for (int r = 0; r < L; ++r) {
        for (int c = 0; c < L - 1; ++c) {
            Face f{r, c, neighbours(2 * r, 2 * c + 1)};
            int id = static_cast<int>(lat.stars_.size());
            for (int q : f.qubits) {
                auto &slots = lat.qubits_[static_cast<std::size_t>(q)].stars;
                (slots[0] < 0 ? slots[0] : slots[1]) = id;
            }
            lat.stars_.push_back(std::move(f));
        }
    }
    for (int r = 0; r < L; ++r) {
        lat.logical_x_path_.push_back(*lat.qubit_at(2 * r, 0));
    }
    lat.logical_z_path_ = lat.horizontal_row(0);
    return lat;
}

/// The set {p} of plaquettes reporting a -1 syndrome. Ids are kept sorted and unique.
class SyndromeSet {
   public:
    SyndromeSet() = default;
    explicit SyndromeSet(std::vector<int> plaquette_ids) : ids_(std::move(plaquette_ids)) {
        std::sort(ids_.begin(), ids_.end());
        if (std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end()) {
            throw std::invalid_argument("syndrome lists a plaquette twice");
        }
        if (!ids_.empty() && ids_.front() < 0) {
            throw std::invalid_argument("negative plaquette id in syndrome");
        }
    }
    const std::vector<int> &plaquettes() const {
        return ids_;
    }
    std::size_t size() const {
        return ids_.size();
    }
    bool empty() const {
        return ids_.empty();
    }
    bool odd() const {
        return ids_.size() % 2 == 1;
    }
    /// Throws unless every id names a plaquette of a lattice with `num_plaquettes` sites.
    void validate(std::size_t num_plaquettes) const {
        if (!ids_.empty() && static_cast<std::size_t>(ids_.back()) >= num_plaquettes) {
            throw std::invalid_argument(
                "syndrome plaquette " + std::to_string(ids_.back()) + " outside lattice with " +
                std::to_string(num_plaquettes) + " plaquettes");
        }
    }
    bool operator==(const SyndromeSet &) const = default;

   private:
    std::vector<int> ids_;
};

/// Support of a string of sigma^x operators.
struct StringSet {
    std::vector<int> qubits;  // ascending
    BoundaryTouch boundary_touch = BoundaryTouch::none;
};

inline BoundaryTouch boundary_touch_of(const LatticeSpec &lattice, std::span<const int> qubits) {
    int top = 0;
    int bottom = 0;
    for (int q : qubits) {
        auto kind = lattice.qubit(q).kind;
        top += kind == QubitKind::top_boundary;
        bottom += kind == QubitKind::bottom_boundary;
    }
    bool t = top % 2 == 1;
    bool b = bottom % 2 == 1;
    if (t && b) {
        return BoundaryTouch::both;
    }
    return t ? BoundaryTouch::top : (b ? BoundaryTouch::bottom : BoundaryTouch::none);
}

/// Plaquettes having odd overlap with the flipped qubits. Repeated ids cancel.
inline SyndromeSet syndrome_of_flip_set(const LatticeSpec &lattice, std::span<const int> flips) {
    std::vector<std::uint8_t> parity(lattice.num_plaquettes(), 0);
    for (int q : flips) {
        if (q < 0 || static_cast<std::size_t>(q) >= lattice.num_qubits()) {
            throw std::invalid_argument("qubit id " + std::to_string(q) + " outside lattice");
        }
        for (int p : lattice.qubit(q).plaquettes) {
            if (p >= 0) {
                parity[static_cast<std::size_t>(p)] ^= 1;
            }
        }
    }
    std::vector<int> ids;
    for (std::size_t p = 0; p < parity.size(); ++p) {
        if (parity[p]) {
            ids.push_back(static_cast<int>(p));
        }
    }
    return SyndromeSet(std::move(ids));
}

namespace detail {

inline StringSet string_from_mask(const LatticeSpec &lattice, const std::vector<std::uint8_t> &mask) {
    StringSet s;
    for (std::size_t q = 0; q < mask.size(); ++q) {
        if (mask[q]) {
            s.qubits.push_back(static_cast<int>(q));
        }
    }
    s.boundary_touch = boundary_touch_of(lattice, s.qubits);
    return s;
}

inline int taxicab(const LatticeSpec &lattice, int a, int b) {
    const Face &pa = lattice.plaquettes()[static_cast<std::size_t>(a)];
    const Face &pb = lattice.plaquettes()[static_cast<std::size_t>(b)];
    return std::abs(pa.row - pb.row) + std::abs(pa.col - pb.col);
}

/// For odd syndromes: the plaquette farthest from its nearer top/bottom boundary
/// (lowest id on ties), and whether that nearer boundary is the top one (top on ties).
inline std::pair<int, bool> most_remote_plaquette(const LatticeSpec &lattice, const SyndromeSet &syndrome) {
    int best = -1;
    int best_dist = -1;
    bool to_top = true;
    const int rows = lattice.plaquette_rows();
    for (int p : syndrome.plaquettes()) {
        int r = lattice.plaquettes()[static_cast<std::size_t>(p)].row;
        int d_top = r;
        int d_bottom = rows - 1 - r;
        int d = std::min(d_top, d_bottom);
        if (d > best_dist) {
            best_dist = d;
            best = p;
            to_top = d_top <= d_bottom;
        }
    }
    return {best, to_top};
}

}  // namespace detail

/// Recovery string for a syndrome: greedy nearest pairs (taxicab distance on the
/// plaquette grid, ties to the lowest ids) joined by horizontal-then-vertical paths,
/// plus, for odd syndromes, one chain from the most remote plaquette to its nearer
/// top/bottom boundary.
inline StringSet build_strings(const LatticeSpec &lattice, const SyndromeSet &syndrome) {
    syndrome.validate(lattice.num_plaquettes());
    std::vector<std::uint8_t> mask(lattice.num_qubits(), 0);
    auto toggle = [&](int r2, int c2) { mask[static_cast<std::size_t>(*lattice.qubit_at(r2, c2))] ^= 1; };

    std::vector<int> remaining = syndrome.plaquettes();
    if (syndrome.odd()) {
        auto [remote, to_top] = detail::most_remote_plaquette(lattice, syndrome);
        const Face &f = lattice.plaquettes()[static_cast<std::size_t>(remote)];
        if (to_top) {
            for (int r = f.row; r >= 0; --r) {
                toggle(2 * r, 2 * f.col);
            }
        } else {
            for (int r = f.row + 1; r <= lattice.plaquette_rows(); ++r) {
                toggle(2 * r, 2 * f.col);
            }
        }
        remaining.erase(std::find(remaining.begin(), remaining.end(), remote));
    }

    while (!remaining.empty()) {
        std::size_t bi = 0;
        std::size_t bj = 1;
        int best = -1;
        for (std::size_t i = 0; i < remaining.size(); ++i) {
            for (std::size_t j = i + 1; j < remaining.size(); ++j) {
                int d = detail::taxicab(lattice, remaining[i], remaining[j]);
                if (best < 0 || d < best) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        }
        const Face &a = lattice.plaquettes()[static_cast<std::size_t>(remaining[bi])];
        const Face &b = lattice.plaquettes()[static_cast<std::size_t>(remaining[bj])];
        for (int c = std::min(a.col, b.col); c < std::max(a.col, b.col); ++c) {
            toggle(2 * a.row + 1, 2 * c + 1);
        }
        for (int r = std::min(a.row, b.row); r < std::max(a.row, b.row); ++r) {
            toggle(2 * r + 2, 2 * b.col);
        }
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(bj));
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(bi));
    }
    return detail::string_from_mask(lattice, mask);
}

/// Representative of the other string class: symmetric difference with X-bar.
inline StringSet apply_logical_x(const LatticeSpec &lattice, const StringSet &strings) {
    std::vector<std::uint8_t> mask(lattice.num_qubits(), 0);
    for (int q : strings.qubits) {
        mask.at(static_cast<std::size_t>(q)) ^= 1;
    }
    for (int q : lattice.logical_x_path()) {
        mask[static_cast<std::size_t>(q)] ^= 1;
    }
    return detail::string_from_mask(lattice, mask);
}

/// Lattices of distance initial, initial+2, ... with the syndrome re-embedded.
///
/// Even syndromes gain one plaquette row/column on every side per step. Odd
/// syndromes keep the boundary nearest their most remote plaquette fixed and
/// gain two rows on the opposite side.
inline std::vector<std::pair<LatticeSpec, SyndromeSet>> grow_lattice_sequence(
    const SyndromeSet &syndrome, int initial_distance, int count) {
    if (count < 1) {
        throw std::invalid_argument("lattice sequence needs at least one element");
    }
    LatticeSpec first = build_lattice(initial_distance);
    syndrome.validate(first.num_plaquettes());

    int row_shift = 1;
    if (syndrome.odd()) {
        row_shift = detail::most_remote_plaquette(first, syndrome).second ? 0 : 2;
    }
    std::vector<std::pair<LatticeSpec, SyndromeSet>> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        LatticeSpec lat = build_lattice(initial_distance + 2 * k);
        std::vector<int> ids;
        for (int p : syndrome.plaquettes()) {
            const Face &f = first.plaquettes()[static_cast<std::size_t>(p)];
            ids.push_back(lat.plaquette_index(f.row + k * row_shift, f.col + k));
        }
        out.emplace_back(std::move(lat), SyndromeSet(std::move(ids)));
    }
    return out;
}

}  // namespace surfidelity
