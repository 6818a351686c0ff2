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
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "surfidelity/dual_map.hpp"
#include "surfidelity/errors.hpp"
#include "surfidelity/exact_engine.hpp"
#include "surfidelity/geometry.hpp"

namespace surfidelity {

inline constexpr int kDefaultTransferWidth = 20;

namespace detail {

// Rectangular Ising problem with nearest-neighbour, both diagonal bond types,
// a per-site field and optional marks. diag_dl(r, c) joins (r, c+1)-(r+1, c).
struct GridProblem {
    int rows = 0;
    int cols = 0;
    std::vector<Complex> horizontal;  // rows x (cols-1), row-major with stride cols
    std::vector<Complex> vertical;    // (rows-1) x cols
    std::vector<Complex> diag_dr;     // (rows-1) x cols, last column unused
    std::vector<Complex> diag_dl;     // (rows-1) x cols, last column unused
    std::vector<Complex> field;       // rows x cols
    std::vector<std::uint8_t> mark;   // rows x cols

    GridProblem(int r, int c)
        : rows(r),
          cols(c),
          horizontal(static_cast<std::size_t>(r * c)),
          vertical(static_cast<std::size_t>(r * c)),
          diag_dr(static_cast<std::size_t>(r * c)),
          diag_dl(static_cast<std::size_t>(r * c)),
          field(static_cast<std::size_t>(r * c)),
          mark(static_cast<std::size_t>(r * c)) {
    }
    std::size_t at(int r, int c) const {
        return static_cast<std::size_t>(r * cols + c);
    }
};

// Builds the grid for one boundary sign choice, transposed when that makes it narrower.
inline GridProblem grid_for(const DualIsingModel &dual, const SyndromeSet &marked, int alpha_t, int alpha_b) {
    const int R = dual.rows();
    const int C = dual.cols();
    const bool transpose = C > R;
    GridProblem g(transpose ? C : R, transpose ? R : C);
    auto pos = [&](int r, int c) { return transpose ? g.at(c, r) : g.at(r, c); };
    for (int r = 0; r < R; ++r) {
        for (int c = 0; c < C; ++c) {
            if (c + 1 < C) {
                (transpose ? g.vertical : g.horizontal)[pos(r, c)] = dual.horizontal(r, c);
            }
            if (r + 1 < R) {
                (transpose ? g.horizontal : g.vertical)[pos(r, c)] = dual.vertical(r, c);
                if (c + 1 < C) {
                    g.diag_dr[pos(r, c)] = dual.diag_down_right(r, c);
                    g.diag_dl[pos(r, c)] = dual.diag_down_left(r, c);
                }
            }
        }
    }
    for (int c = 0; c < C; ++c) {
        g.field[pos(0, c)] += static_cast<double>(alpha_t) * dual.top_field(c);
        g.field[pos(R - 1, c)] += static_cast<double>(alpha_b) * dual.bottom_field(c);
    }
    for (int k : marked.plaquettes()) {
        g.mark[pos(k / C, k % C)] = 1;
    }
    return g;
}

struct GridSum {
    Complex value;
    double log_scale = 0.0;
};

// Row-by-row sweep, one site at a time. State bits 0..W-1 hold the current
// frontier (new spins left of the cursor, old spins from it on) and bit W holds
// the old spin just overwritten, needed by the down-right diagonal.
inline GridSum grid_sum(const GridProblem &g) {
    const int W = g.cols;
    const std::size_t size = std::size_t{1} << (W + 1);
    const std::size_t extra = std::size_t{1} << W;
    std::vector<Complex> v(size, Complex{0.0, 0.0});
    std::vector<Complex> next(size);
    v[0] = 1.0;
    double log_scale = 0.0;

    for (int r = 0; r < g.rows; ++r) {
        for (int c = 0; c < W; ++c) {
            Complex cv = 0.0, cdr = 0.0, cdl = 0.0, ch = 0.0;
            if (r > 0) {
                cv = g.vertical[g.at(r - 1, c)];
                if (c > 0) {
                    cdr = g.diag_dr[g.at(r - 1, c - 1)];
                }
                if (c + 1 < W) {
                    cdl = g.diag_dl[g.at(r - 1, c)];
                }
            }
            if (c > 0) {
                ch = g.horizontal[g.at(r, c - 1)];
            }
            const Complex f = g.field[g.at(r, c)];
            const bool marked = g.mark[g.at(r, c)] != 0;
            // table index: n | o_c << 1 | o_{c-1} << 2 | o_{c+1} << 3 | n_{c-1} << 4
            Complex table[32];
            for (int t = 0; t < 32; ++t) {
                double n = (t & 1) ? -1.0 : 1.0;
                double oc = (t & 2) ? -1.0 : 1.0;
                double ol = (t & 4) ? -1.0 : 1.0;
                double orr = (t & 8) ? -1.0 : 1.0;
                double nl = (t & 16) ? -1.0 : 1.0;
                Complex e = n * (cv * oc + cdr * ol + cdl * orr + ch * nl + f);
                table[t] = std::exp(-e) * ((marked && n < 0) ? -1.0 : 1.0);
            }
            std::fill(next.begin(), next.end(), Complex{0.0, 0.0});
            const std::size_t bit = std::size_t{1} << c;
            for (std::size_t s = 0; s < size; ++s) {
                const Complex x = v[s];
                if (x == 0.0) {
                    continue;
                }
                const int oc = static_cast<int>((s >> c) & 1);
                int base = oc << 1;
                if (c > 0) {
                    base |= static_cast<int>((s >> W) & 1) << 2;
                    base |= static_cast<int>((s >> (c - 1)) & 1) << 4;
                }
                if (c + 1 < W) {
                    base |= static_cast<int>((s >> (c + 1)) & 1) << 3;
                }
                std::size_t s0 = (s & ~bit & ~extra) | (oc ? extra : 0);
                next[s0] += x * table[base];
                next[s0 | bit] += x * table[base | 1];
            }
            v.swap(next);
        }
        double peak = 0.0;
        for (std::size_t s = 0; s < extra; ++s) {
            v[s] += v[s | extra];
            v[s | extra] = 0.0;
            peak = std::max(peak, std::abs(v[s]));
        }
        if (peak > 0.0) {
            for (std::size_t s = 0; s < extra; ++s) {
                v[s] /= peak;
            }
            log_scale += std::log(peak);
        }
    }
    detail::CompensatedSum total;
    for (std::size_t s = 0; s < extra; ++s) {
        total.add(v[s]);
    }
    return {total.value(), log_scale};
}

}  // namespace detail

/// Exact correlation quad by transfer matrix along the longer lattice direction.
/// Cost is O(rows * cols * 2^(width+1)) per boundary sign choice, with
/// width = min(rows, cols) of the dual lattice.
inline CorrelationQuad correlation_quad_transfer(const DualIsingModel &dual, const SyndromeSet &marked,
                                                 int width_budget = kDefaultTransferWidth) {
    marked.validate(static_cast<std::size_t>(dual.num_sites()));
    const int width = std::min(dual.rows(), dual.cols());
    if (width > width_budget) {
        throw BudgetExceeded("transfer-matrix width budget exceeded: " + std::to_string(width) + " > " +
                             std::to_string(width_budget));
    }
    detail::GridSum sums[4];
    const int signs[4][2] = {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
    double common = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 4; ++k) {
        sums[k] = detail::grid_sum(detail::grid_for(dual, marked, signs[k][0], signs[k][1]));
        if (sums[k].value != 0.0) {
            common = std::max(common, sums[k].log_scale);
        }
    }
    if (!std::isfinite(common)) {
        common = 0.0;
    }
    Complex out[4];
    for (int k = 0; k < 4; ++k) {
        out[k] = sums[k].value * std::exp(sums[k].log_scale - common);
    }
    CorrelationQuad q;
    q.c_pp = out[0];
    q.c_pm = out[1];
    q.c_mp = out[2];
    q.c_mm = out[3];
    q.log_scale = common;
    q.engine = Engine::transfer_matrix;
    return q;
}

inline AmplitudeResult amplitudes_transfer(const LatticeSpec &lattice, const CouplingConfig &config,
                                           const SyndromeSet &syndrome, const StringSet &strings,
                                           int width_budget = kDefaultTransferWidth) {
    detail::require_consistent(lattice, syndrome, strings);
    DualIsingModel dual = build_dual(lattice, config);
    return amplitudes_for_strings(lattice, correlation_quad_transfer(dual, syndrome, width_budget), syndrome,
                                  strings);
}

}  // namespace surfidelity
