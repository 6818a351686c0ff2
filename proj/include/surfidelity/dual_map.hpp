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
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "surfidelity/errors.hpp"
#include "surfidelity/geometry.hpp"
#include "surfidelity/noise_model.hpp"

namespace surfidelity {

struct DualBond {
    int m = 0;
    int n = 0;
    Complex value;
};

/// Ising model on a rows x cols grid of plaquette variables mu, with nearest-
/// neighbour bonds, both diagonal bonds, and fields on the first and last rows
/// that are multiplied by the boundary signs alpha_t / alpha_b.
///
/// Sites are indexed row-major. For a lattice of distance L the grid is
/// (L-1) x L and site ids coincide with plaquette ids.
class DualIsingModel {
   public:
    DualIsingModel() = default;
    DualIsingModel(int rows, int cols) : rows_(rows), cols_(cols) {
        if (rows < 1 || cols < 1) {
            throw std::invalid_argument("dual grid needs at least one row and one column");
        }
        auto n = static_cast<std::size_t>(rows * cols);
        horizontal_.assign(n, 0.0);
        vertical_.assign(n, 0.0);
        diag_dr_.assign(n, 0.0);
        diag_dl_.assign(n, 0.0);
        top_.assign(static_cast<std::size_t>(cols), 0.0);
        bottom_.assign(static_cast<std::size_t>(cols), 0.0);
    }

    int rows() const {
        return rows_;
    }
    int cols() const {
        return cols_;
    }
    int num_sites() const {
        return rows_ * cols_;
    }
    int site(int r, int c) const {
        return r * cols_ + c;
    }

    // Dense bond storage. Entries whose partner would fall off the grid stay zero.
    /// (r,c)-(r,c+1)
    Complex &horizontal(int r, int c) {
        return horizontal_[idx(r, c)];
    }
    Complex horizontal(int r, int c) const {
        return horizontal_[idx(r, c)];
    }
    /// (r,c)-(r+1,c)
    Complex &vertical(int r, int c) {
        return vertical_[idx(r, c)];
    }
    Complex vertical(int r, int c) const {
        return vertical_[idx(r, c)];
    }
    /// (r,c)-(r+1,c+1)
    Complex &diag_down_right(int r, int c) {
        return diag_dr_[idx(r, c)];
    }
    Complex diag_down_right(int r, int c) const {
        return diag_dr_[idx(r, c)];
    }
    /// (r,c+1)-(r+1,c)
    Complex &diag_down_left(int r, int c) {
        return diag_dl_[idx(r, c)];
    }
    Complex diag_down_left(int r, int c) const {
        return diag_dl_[idx(r, c)];
    }
    Complex &top_field(int c) {
        return top_.at(static_cast<std::size_t>(c));
    }
    Complex top_field(int c) const {
        return top_.at(static_cast<std::size_t>(c));
    }
    Complex &bottom_field(int c) {
        return bottom_.at(static_cast<std::size_t>(c));
    }
    Complex bottom_field(int c) const {
        return bottom_.at(static_cast<std::size_t>(c));
    }

    /// Adds `value` to the bond joining sites m and n, which must be grid or
    /// diagonal neighbours.
    void add_bond(int m, int n, Complex value) {
        if (m > n) {
            std::swap(m, n);
        }
        if (m < 0 || n >= num_sites() || m == n) {
            throw std::invalid_argument("bond endpoints outside the dual grid");
        }
        int rm = m / cols_, cm = m % cols_, rn = n / cols_, cn = n % cols_;
        if (rm == rn && cn == cm + 1) {
            horizontal(rm, cm) += value;
        } else if (rn == rm + 1 && cn == cm) {
            vertical(rm, cm) += value;
        } else if (rn == rm + 1 && cn == cm + 1) {
            diag_down_right(rm, cm) += value;
        } else if (rn == rm + 1 && cn == cm - 1) {
            diag_down_left(rm, cn) += value;
        } else {
            throw DualMappingUndefined("sites " + std::to_string(m) + " and " + std::to_string(n) +
                                       " are neither nearest nor diagonal neighbours");
        }
    }

    /// Nonzero nearest-neighbour bonds, ordered by (m, n).
    std::vector<DualBond> nn_bonds() const {
        std::vector<DualBond> out;
        for (int r = 0; r < rows_; ++r) {
            for (int c = 0; c < cols_; ++c) {
                if (c + 1 < cols_ && horizontal(r, c) != 0.0) {
                    out.push_back({site(r, c), site(r, c + 1), horizontal(r, c)});
                }
                if (r + 1 < rows_ && vertical(r, c) != 0.0) {
                    out.push_back({site(r, c), site(r + 1, c), vertical(r, c)});
                }
            }
        }
        return out;
    }

    /// Nonzero diagonal bonds, ordered by (m, n).
    std::vector<DualBond> diag_bonds() const {
        std::vector<DualBond> out;
        for (int r = 0; r + 1 < rows_; ++r) {
            for (int c = 0; c < cols_; ++c) {
                if (c >= 1 && diag_down_left(r, c - 1) != 0.0) {
                    out.push_back({site(r, c), site(r + 1, c - 1), diag_down_left(r, c - 1)});
                }
                if (c + 1 < cols_ && diag_down_right(r, c) != 0.0) {
                    out.push_back({site(r, c), site(r + 1, c + 1), diag_down_right(r, c)});
                }
            }
        }
        return out;
    }

    bool is_real() const {
        auto real = [](const std::vector<Complex> &v) {
            for (const Complex &z : v) {
                if (z.imag() != 0.0) {
                    return false;
                }
            }
            return true;
        };
        return real(horizontal_) && real(vertical_) && real(diag_dr_) && real(diag_dl_) && real(top_) &&
               real(bottom_);
    }

    bool operator==(const DualIsingModel &) const = default;

   private:
    std::size_t idx(int r, int c) const {
        return static_cast<std::size_t>(r * cols_ + c);
    }
    int rows_ = 0;
    int cols_ = 0;
    std::vector<Complex> horizontal_;
    std::vector<Complex> vertical_;
    std::vector<Complex> diag_dr_;
    std::vector<Complex> diag_dl_;
    std::vector<Complex> top_;
    std::vector<Complex> bottom_;
};

/// H~(mu; alpha_t, alpha_b): bond terms plus alpha-signed boundary fields.
inline Complex total_energy(const DualIsingModel &dual, std::span<const std::int8_t> mu, int alpha_t, int alpha_b) {
    if (mu.size() != static_cast<std::size_t>(dual.num_sites())) {
        throw std::invalid_argument("mu configuration has " + std::to_string(mu.size()) + " entries, expected " +
                                    std::to_string(dual.num_sites()));
    }
    auto s = [&](int r, int c) { return static_cast<double>(mu[static_cast<std::size_t>(dual.site(r, c))]); };
    Complex e{0.0, 0.0};
    const int R = dual.rows();
    const int C = dual.cols();
    for (int r = 0; r < R; ++r) {
        for (int c = 0; c < C; ++c) {
            if (c + 1 < C) {
                e += dual.horizontal(r, c) * s(r, c) * s(r, c + 1);
            }
            if (r + 1 < R) {
                e += dual.vertical(r, c) * s(r, c) * s(r + 1, c);
                if (c + 1 < C) {
                    e += dual.diag_down_right(r, c) * s(r, c) * s(r + 1, c + 1);
                    e += dual.diag_down_left(r, c) * s(r, c + 1) * s(r + 1, c);
                }
            }
        }
    }
    Complex top{0.0, 0.0};
    Complex bottom{0.0, 0.0};
    for (int c = 0; c < C; ++c) {
        top += dual.top_field(c) * s(0, c);
        bottom += dual.bottom_field(c) * s(R - 1, c);
    }
    return e + static_cast<double>(alpha_t) * top + static_cast<double>(alpha_b) * bottom;
}

namespace detail {

/// sigma_i written in plaquette variables: alpha_t^t alpha_b^b times the product
/// of mu over `plaquettes`.
struct DualMonomial {
    std::vector<int> plaquettes;
    int alpha_t = 0;
    int alpha_b = 0;
};

inline DualMonomial qubit_monomial(const LatticeSpec &lattice, int q) {
    const Qubit &qb = lattice.qubit(q);
    DualMonomial m;
    for (int p : qb.plaquettes) {
        if (p >= 0) {
            m.plaquettes.push_back(p);
        }
    }
    m.alpha_t = qb.kind == QubitKind::top_boundary;
    m.alpha_b = qb.kind == QubitKind::bottom_boundary;
    return m;
}

inline DualMonomial multiply(DualMonomial x, const DualMonomial &y) {
    for (int p : y.plaquettes) {
        auto it = std::find(x.plaquettes.begin(), x.plaquettes.end(), p);
        if (it == x.plaquettes.end()) {
            x.plaquettes.push_back(p);
        } else {
            x.plaquettes.erase(it);
        }
    }
    std::sort(x.plaquettes.begin(), x.plaquettes.end());
    x.alpha_t ^= y.alpha_t;
    x.alpha_b ^= y.alpha_b;
    return x;
}

inline bool vertex_sharing_perpendicular(const LatticeSpec &lattice, int i, int j) {
    const Qubit &a = lattice.qubit(i);
    const Qubit &b = lattice.qubit(j);
    if (a.orientation == b.orientation) {
        return false;
    }
    for (int s : a.stars) {
        if (s >= 0 && (s == b.stars[0] || s == b.stars[1])) {
            return true;
        }
    }
    return false;
}

}  // namespace detail

/// Rewrites the qubit action in plaquette variables via sigma_i = mu_m mu_n in the
/// bulk and sigma_i = alpha_{t/b} mu_m on the top/bottom rows.
///
/// Throws DualMappingUndefined for any pair coupling that is not an L-shaped
/// (perpendicular, star-sharing) pair.
inline DualIsingModel build_dual(const LatticeSpec &lattice, const CouplingConfig &config) {
    config.validate(lattice);
    DualIsingModel dual(lattice.plaquette_rows(), lattice.plaquette_cols());
    const int last_row = lattice.plaquette_rows() - 1;

    auto deposit = [&](const detail::DualMonomial &m, Complex value, const std::string &what) {
        const auto &ps = m.plaquettes;
        if (m.alpha_t == 0 && m.alpha_b == 0 && ps.size() == 2) {
            dual.add_bond(ps[0], ps[1], value);
            return;
        }
        if (ps.size() == 1 && (m.alpha_t ^ m.alpha_b) == 1) {
            int row = ps[0] / dual.cols();
            int col = ps[0] % dual.cols();
            if (m.alpha_t && row == 0) {
                dual.top_field(col) += value;
                return;
            }
            if (m.alpha_b && row == last_row) {
                dual.bottom_field(col) += value;
                return;
            }
        }
        throw DualMappingUndefined("dual mapping undefined for " + what);
    };

    for (std::size_t i = 0; i < config.fields.size(); ++i) {
        if (config.fields[i] != 0.0) {
            deposit(detail::qubit_monomial(lattice, static_cast<int>(i)), config.fields[i],
                    "field on qubit " + std::to_string(i));
        }
    }
    for (const auto &[pair, j] : config.pair_couplings) {
        std::string what = "coupling (" + std::to_string(pair.a) + "," + std::to_string(pair.b) + ")";
        if (!detail::vertex_sharing_perpendicular(lattice, pair.a, pair.b)) {
            throw DualMappingUndefined("dual mapping undefined for " + what +
                                       ": only perpendicular star-sharing pairs are representable");
        }
        if (j == 0.0) {
            continue;
        }
        deposit(detail::multiply(detail::qubit_monomial(lattice, pair.a), detail::qubit_monomial(lattice, pair.b)),
                j, what);
    }
    return dual;
}

/// A string operator in dual variables: alpha_t^{alpha_t_power} alpha_b^{alpha_b_power} prod_{k in mu_ids} mu_k.
struct DualObservable {
    std::vector<int> mu_ids;
    int alpha_t_power = 0;
    int alpha_b_power = 0;

    int alpha_factor(int alpha_t, int alpha_b) const {
        return (alpha_t_power ? alpha_t : 1) * (alpha_b_power ? alpha_b : 1);
    }
};

inline DualObservable observable_of_string(const LatticeSpec &lattice, std::span<const int> qubits) {
    detail::DualMonomial m;
    for (int q : qubits) {
        m = detail::multiply(std::move(m), detail::qubit_monomial(lattice, q));
    }
    return {m.plaquettes, m.alpha_t, m.alpha_b};
}

/// (S^x, X-bar S^x) as dual observables. Both carry mu_ids = {p}; the alpha
/// factors are fixed by the boundary parities of each string.
inline std::pair<DualObservable, DualObservable> map_strings(const LatticeSpec &lattice, const SyndromeSet &syndrome,
                                                             const StringSet &strings) {
    syndrome.validate(lattice.num_plaquettes());
    DualObservable s = observable_of_string(lattice, strings.qubits);
    if (s.mu_ids != syndrome.plaquettes()) {
        throw std::invalid_argument("string operator is inconsistent with the syndrome");
    }
    DualObservable xs = observable_of_string(lattice, apply_logical_x(lattice, strings).qubits);
    return {std::move(s), std::move(xs)};
}

/// Qubit spins encoded by (mu, alpha_t, alpha_b). Always star-consistent.
inline Spins qubit_spins_from_dual(const LatticeSpec &lattice, std::span<const std::int8_t> mu, int alpha_t,
                                   int alpha_b) {
    if (mu.size() != lattice.num_plaquettes()) {
        throw std::invalid_argument("mu configuration does not match lattice");
    }
    Spins sigma(lattice.num_qubits());
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        const Qubit &q = lattice.qubits()[i];
        int v = mu[static_cast<std::size_t>(q.plaquettes[0])];
        if (q.plaquettes[1] >= 0) {
            v *= mu[static_cast<std::size_t>(q.plaquettes[1])];
        } else {
            v *= q.kind == QubitKind::top_boundary ? alpha_t : alpha_b;
        }
        sigma[i] = static_cast<std::int8_t>(v);
    }
    return sigma;
}

// Dump format, mirroring the coupling fixtures:
//   # dual rows=<R> cols=<C>
//   NN <m> <n> <re> <im>
//   DG <u> <v> <re> <im>
//   BT <site> <re> <im>
//   BB <site> <re> <im>
inline void write_dual(std::ostream &out, const DualIsingModel &dual) {
    out << "# dual rows=" << dual.rows() << " cols=" << dual.cols() << "\n" << std::setprecision(17);
    for (const DualBond &b : dual.nn_bonds()) {
        out << "NN " << b.m << " " << b.n << " " << b.value.real() << " " << b.value.imag() << "\n";
    }
    for (const DualBond &b : dual.diag_bonds()) {
        out << "DG " << b.m << " " << b.n << " " << b.value.real() << " " << b.value.imag() << "\n";
    }
    for (int c = 0; c < dual.cols(); ++c) {
        if (dual.top_field(c) != 0.0) {
            out << "BT " << dual.site(0, c) << " " << dual.top_field(c).real() << " " << dual.top_field(c).imag()
                << "\n";
        }
    }
    for (int c = 0; c < dual.cols(); ++c) {
        if (dual.bottom_field(c) != 0.0) {
            out << "BB " << dual.site(dual.rows() - 1, c) << " " << dual.bottom_field(c).real() << " "
                << dual.bottom_field(c).imag() << "\n";
        }
    }
}

}  // namespace surfidelity
