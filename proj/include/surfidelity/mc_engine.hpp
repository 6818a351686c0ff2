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
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "surfidelity/dual_map.hpp"
#include "surfidelity/errors.hpp"
#include "surfidelity/geometry.hpp"
#include "surfidelity/noise_model.hpp"
#include "surfidelity/rng.hpp"

namespace surfidelity {

enum class Estimator { sector_flag, boundary_flip_ti };

inline const char *to_string(Estimator e) {
    return e == Estimator::sector_flag ? "sector_flag" : "boundary_flip_ti";
}

inline Estimator parse_estimator(const std::string &s) {
    if (s == "sector_flag") {
        return Estimator::sector_flag;
    }
    if (s == "boundary_flip_ti") {
        return Estimator::boundary_flip_ti;
    }
    throw std::invalid_argument("unknown estimator '" + s + "' (expected sector_flag or boundary_flip_ti)");
}

/// Monte Carlo run parameters.
///
/// sweeps counts every sweep a chain performs, burn-in included. With
/// boundary_flip_ti the budget (sweeps and an explicit burn_in) is split evenly
/// over the ti_steps lambda points, each run as an independent chain. An empty
/// burn_in selects the automatic rule: a pilot of up to 1000 sweeps, then 10x
/// the integrated autocorrelation time measured on it.
struct McConfig {
    int sweeps = 20000;
    std::optional<int> burn_in;
    int chains = 4;
    std::uint64_t seed = 1;
    int thinning = 1;
    Estimator estimator = Estimator::sector_flag;
    int ti_steps = 21;
    int threads = 0;

    void validate() const {
        if (chains < 1) {
            throw std::invalid_argument("mc: chains must be >= 1");
        }
        if (thinning < 1) {
            throw std::invalid_argument("mc: thinning must be >= 1");
        }
        if (burn_in && *burn_in < 0) {
            throw std::invalid_argument("mc: burn_in must be >= 0");
        }
        if (sweeps < 2 || (burn_in && sweeps <= *burn_in)) {
            throw std::invalid_argument("mc: sweeps must exceed burn_in");
        }
        if (estimator == Estimator::boundary_flip_ti && ti_steps < 2) {
            throw std::invalid_argument("mc: ti_steps must be >= 2");
        }
        if (threads < 0) {
            throw std::invalid_argument("mc: threads must be >= 0");
        }
    }
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    int chains_used = 0;
    double acceptance_rate = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> seed_lineage;
    Estimator estimator = Estimator::sector_flag;
    double sign_average = 1.0;
    double sector_acceptance = std::numeric_limits<double>::quiet_NaN();
    double log_r = std::numeric_limits<double>::quiet_NaN();
    double autocorr_time = 0.0;
    int burn_in_used = 0;
    std::string note;
};

inline bool metropolis_accept(double delta_e, double u) {
    return delta_e <= 0.0 || u < std::exp(-delta_e);
}

/// Integrated autocorrelation time with Sokal's self-consistent window (c = 6).
inline double integrated_autocorr_time(const std::vector<double> &x) {
    const std::size_t n = x.size();
    if (n < 4) {
        return 1.0;
    }
    double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double c0 = 0.0;
    for (double v : x) {
        c0 += (v - mean) * (v - mean);
    }
    if (c0 <= 0.0) {
        return 1.0;
    }
    double tau = 1.0;
    for (std::size_t t = 1; t < n / 2; ++t) {
        double ct = 0.0;
        for (std::size_t i = 0; i + t < n; ++i) {
            ct += (x[i] - mean) * (x[i + t] - mean);
        }
        tau += 2.0 * ct / c0;
        if (static_cast<double>(t) >= 6.0 * tau) {
            break;
        }
    }
    return std::max(tau, 1.0);
}

/// Runs fn(i) for i in [0, n) on at most `threads` workers (0: hardware
/// concurrency). The first exception thrown is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t n, int threads, Fn fn) {
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::max<std::size_t>(1, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) {
                        error = std::current_exception();
                    }
                    next = n;
                }
            }
        });
    }
    for (auto &t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

namespace detail {

inline constexpr int kPilotSweeps = 1000;
inline constexpr int kSingleChainBatches = 16;

// Pilot length for the automatic rule, or the explicit burn-in.
inline int pilot_length(const std::optional<int> &burn_in, int total) {
    if (burn_in) {
        return *burn_in;
    }
    return std::min(kPilotSweeps, total / 4);
}

inline int auto_extra_burn(double tau, int pilot, int total) {
    int wanted = static_cast<int>(std::ceil(10.0 * tau));
    int cap = total / 2;
    return std::clamp(wanted - pilot, 0, std::max(0, cap - pilot));
}

// Leave-one-out jackknife over blocks; theta maps an excluded block index
// (or -1 for none) to the estimate.
template <typename Theta>
std::pair<double, double> jackknife(int blocks, Theta theta) {
    double full = theta(-1);
    if (blocks < 2) {
        return {full, 0.0};
    }
    std::vector<double> loo(static_cast<std::size_t>(blocks));
    for (int b = 0; b < blocks; ++b) {
        loo[static_cast<std::size_t>(b)] = theta(b);
    }
    double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / blocks;
    double var = 0.0;
    for (double v : loo) {
        var += (v - mean) * (v - mean);
    }
    return {full, std::sqrt(var * (blocks - 1) / blocks)};
}

// Splits a series into `count` contiguous batches and returns (sum, n) per batch.
inline std::vector<std::pair<double, double>> batch_sums(const std::vector<double> &x, int count) {
    std::vector<std::pair<double, double>> out(static_cast<std::size_t>(count), {0.0, 0.0});
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) {
        auto b = static_cast<std::size_t>(i * static_cast<std::size_t>(count) / std::max<std::size_t>(n, 1));
        out[b].first += x[i];
        out[b].second += 1.0;
    }
    return out;
}

// Qubit-space chain state for the sector decomposition.
struct SectorModel {
    std::vector<double> field;
    std::vector<std::vector<std::pair<int, double>>> neighbors;
    std::vector<std::vector<int>> plaquettes;
    std::vector<std::vector<int>> sector_rows;
    std::vector<std::uint8_t> plaquette_flips_s;
    std::vector<std::uint8_t> plaquette_flips_xs;
    std::vector<std::uint8_t> row_flips_s;
    std::vector<std::uint8_t> row_flips_xs;
    std::vector<std::uint8_t> in_s;
    std::vector<std::uint8_t> in_xs;
};

inline SectorModel make_sector_model(const LatticeSpec &lattice, const CouplingConfig &config,
                                     const StringSet &strings) {
    SectorModel m;
    const std::size_t n = lattice.num_qubits();
    m.field.resize(n);
    m.neighbors.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        m.field[i] = config.fields[i].real();
    }
    for (const auto &[pair, j] : config.pair_couplings) {
        if (j.real() != 0.0) {
            m.neighbors[static_cast<std::size_t>(pair.a)].emplace_back(pair.b, j.real());
            m.neighbors[static_cast<std::size_t>(pair.b)].emplace_back(pair.a, j.real());
        }
    }
    m.in_s.assign(n, 0);
    m.in_xs.assign(n, 0);
    for (int q : strings.qubits) {
        m.in_s[static_cast<std::size_t>(q)] ^= 1;
    }
    for (int q : apply_logical_x(lattice, strings).qubits) {
        m.in_xs[static_cast<std::size_t>(q)] ^= 1;
    }
    auto parity = [](const std::vector<std::uint8_t> &mask, const std::vector<int> &qs) {
        std::uint8_t p = 0;
        for (int q : qs) {
            p ^= mask[static_cast<std::size_t>(q)];
        }
        return p;
    };
    for (const Face &p : lattice.plaquettes()) {
        m.plaquettes.push_back(p.qubits);
        m.plaquette_flips_s.push_back(parity(m.in_s, p.qubits));
        m.plaquette_flips_xs.push_back(parity(m.in_xs, p.qubits));
    }
    for (int k = 0; k < lattice.distance(); ++k) {
        m.sector_rows.push_back(lattice.horizontal_row(k));
        m.row_flips_s.push_back(parity(m.in_s, m.sector_rows.back()));
        m.row_flips_xs.push_back(parity(m.in_xs, m.sector_rows.back()));
    }
    return m;
}

struct SectorChainResult {
    std::vector<double> s;
    std::vector<double> xs;
    std::uint64_t accepted = 0;
    std::uint64_t proposed = 0;
    std::uint64_t sector_accepted = 0;
    std::uint64_t sector_proposed = 0;
    double tau = 1.0;
    int burn_in = 0;
};

class SectorChain {
   public:
    SectorChain(const SectorModel &model, std::uint64_t seed)
        : m_(model), rng_(seed), sigma_(model.field.size(), 1), in_flip_(model.field.size(), 0) {
        for (std::size_t p = 0; p < m_.plaquettes.size(); ++p) {
            if (rng_.bernoulli(0.5)) {
                apply(m_.plaquettes[p], m_.plaquette_flips_s[p], m_.plaquette_flips_xs[p]);
            }
        }
        if (rng_.bernoulli(0.5)) {
            apply(m_.sector_rows[0], m_.row_flips_s[0], m_.row_flips_xs[0]);
        }
    }

    void sweep(SectorChainResult &stats) {
        for (std::size_t p = 0; p < m_.plaquettes.size(); ++p) {
            ++stats.proposed;
            if (try_flip(m_.plaquettes[p], m_.plaquette_flips_s[p], m_.plaquette_flips_xs[p])) {
                ++stats.accepted;
            }
        }
        auto k = static_cast<std::size_t>(rng_.below(m_.sector_rows.size()));
        ++stats.sector_proposed;
        if (try_flip(m_.sector_rows[k], m_.row_flips_s[k], m_.row_flips_xs[k])) {
            ++stats.sector_accepted;
        }
    }

    int sign_s() const {
        return s_;
    }
    int sign_xs() const {
        return xs_;
    }

   private:
    double delta_energy(const std::vector<int> &flip) {
        for (int q : flip) {
            in_flip_[static_cast<std::size_t>(q)] = 1;
        }
        double local = 0.0;
        for (int q : flip) {
            auto i = static_cast<std::size_t>(q);
            double h = m_.field[i];
            for (const auto &[j, J] : m_.neighbors[i]) {
                if (!in_flip_[static_cast<std::size_t>(j)]) {
                    h += J * sigma_[static_cast<std::size_t>(j)];
                }
            }
            local += sigma_[i] * h;
        }
        for (int q : flip) {
            in_flip_[static_cast<std::size_t>(q)] = 0;
        }
        return -2.0 * local;
    }

    bool try_flip(const std::vector<int> &flip, std::uint8_t flips_s, std::uint8_t flips_xs) {
        double de = delta_energy(flip);
        if (!metropolis_accept(de, de > 0.0 ? rng_.uniform() : 0.0)) {
            return false;
        }
        apply(flip, flips_s, flips_xs);
        return true;
    }

    void apply(const std::vector<int> &flip, std::uint8_t flips_s, std::uint8_t flips_xs) {
        for (int q : flip) {
            sigma_[static_cast<std::size_t>(q)] = -sigma_[static_cast<std::size_t>(q)];
        }
        if (flips_s) {
            s_ = -s_;
        }
        if (flips_xs) {
            xs_ = -xs_;
        }
    }

    const SectorModel &m_;
    Rng rng_;
    std::vector<int> sigma_;
    std::vector<std::uint8_t> in_flip_;
    int s_ = 1;
    int xs_ = 1;
};

}  // namespace detail

/// ratio_x = |<prod_{XS} sigma>| / |<prod_S sigma>| sampled over the constrained
/// x-basis states with weight e^{-H}; moves toggle one plaquette or flip one
/// horizontal Z-bar row (the sector). Real couplings only.
inline McEstimate sample_sector_flag(const LatticeSpec &lattice, const CouplingConfig &config,
                                     const SyndromeSet &syndrome, const StringSet &strings, const McConfig &mc) {
    mc.validate();
    config.validate(lattice);
    if (!config.is_real()) {
        throw SignProblem("sign-problem: complex couplings cannot be sampled; use exact engines");
    }
    syndrome.validate(lattice.num_plaquettes());
    if (syndrome_of_flip_set(lattice, strings.qubits) != syndrome) {
        throw std::invalid_argument("string operator does not reproduce the syndrome");
    }
    const detail::SectorModel model = detail::make_sector_model(lattice, config, strings);
    std::vector<detail::SectorChainResult> results(static_cast<std::size_t>(mc.chains));
    McEstimate est;
    est.estimator = Estimator::sector_flag;
    est.seed = mc.seed;
    for (int c = 0; c < mc.chains; ++c) {
        est.seed_lineage.push_back(derive_seed(mc.seed, static_cast<std::uint64_t>(c), 0));
    }
    parallel_for(results.size(), mc.threads, [&](std::size_t c) {
        detail::SectorChain chain(model, est.seed_lineage[c]);
        detail::SectorChainResult &r = results[c];
        const int pilot = detail::pilot_length(mc.burn_in, mc.sweeps);
        std::vector<double> pilot_series;
        detail::SectorChainResult discard;
        for (int t = 0; t < pilot; ++t) {
            chain.sweep(discard);
            pilot_series.push_back(chain.sign_xs() * chain.sign_s());
        }
        int extra = 0;
        if (!mc.burn_in) {
            r.tau = integrated_autocorr_time(pilot_series);
            extra = detail::auto_extra_burn(r.tau, pilot, mc.sweeps);
            for (int t = 0; t < extra; ++t) {
                chain.sweep(discard);
            }
        }
        r.burn_in = pilot + extra;
        for (int t = r.burn_in; t < mc.sweeps; ++t) {
            chain.sweep(r);
            if ((t - r.burn_in) % mc.thinning == 0) {
                r.s.push_back(chain.sign_s());
                r.xs.push_back(chain.sign_xs());
            }
        }
    });

    // Blocks are chains, or batches of the single chain.
    std::vector<std::pair<double, double>> s_blocks;
    std::vector<std::pair<double, double>> xs_blocks;
    std::uint64_t acc = 0, prop = 0, sacc = 0, sprop = 0;
    for (const auto &r : results) {
        acc += r.accepted;
        prop += r.proposed;
        sacc += r.sector_accepted;
        sprop += r.sector_proposed;
        est.autocorr_time = std::max(est.autocorr_time, r.tau);
        est.burn_in_used = std::max(est.burn_in_used, r.burn_in);
        if (mc.chains > 1) {
            s_blocks.emplace_back(std::accumulate(r.s.begin(), r.s.end(), 0.0), static_cast<double>(r.s.size()));
            xs_blocks.emplace_back(std::accumulate(r.xs.begin(), r.xs.end(), 0.0), static_cast<double>(r.xs.size()));
        } else {
            s_blocks = detail::batch_sums(r.s, detail::kSingleChainBatches);
            xs_blocks = detail::batch_sums(r.xs, detail::kSingleChainBatches);
        }
    }
    auto pooled = [&](const std::vector<std::pair<double, double>> &blocks, int skip) {
        double sum = 0.0, n = 0.0;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            if (static_cast<int>(b) != skip) {
                sum += blocks[b].first;
                n += blocks[b].second;
            }
        }
        return n > 0.0 ? sum / n : 0.0;
    };
    const int blocks = static_cast<int>(s_blocks.size());
    est.sign_average = pooled(s_blocks, -1);
    if (est.sign_average == 0.0) {
        throw SignProblem("sign-problem: sign average vanished; use exact engines");
    }
    auto [mean, err] = detail::jackknife(blocks, [&](int skip) {
        double s = pooled(s_blocks, skip);
        return s == 0.0 ? std::numeric_limits<double>::infinity() : std::abs(pooled(xs_blocks, skip)) / std::abs(s);
    });
    est.mean = mean;
    est.std_error = std::isfinite(err) ? err : std::numeric_limits<double>::infinity();
    est.chains_used = mc.chains;
    est.acceptance_rate = prop > 0 ? static_cast<double>(acc) / static_cast<double>(prop) : 0.0;
    est.sector_acceptance = sprop > 0 ? static_cast<double>(sacc) / static_cast<double>(sprop) : 0.0;
    if (std::abs(est.sign_average) < 3.0 * est.std_error) {
        est.note = "sign average compatible with zero; estimate unreliable";
    }
    return est;
}

inline McEstimate sample_sector_flag(const LatticeSpec &lattice, const CouplingConfig &config,
                                     const SyndromeSet &syndrome, const McConfig &mc) {
    return sample_sector_flag(lattice, config, syndrome, build_strings(lattice, syndrome), mc);
}

namespace detail {

// Part of the dual model that can change C(+,-)/C(+,+): the connected
// components carrying both a top and a bottom field. Every other component
// contributes the same factor to both sums.
struct SpanningSystem {
    std::vector<int> nbr_start;
    std::vector<int> nbr_index;
    std::vector<double> nbr_coupling;
    std::vector<double> top;
    std::vector<double> bottom;
    int components = 0;

    int size() const {
        return static_cast<int>(top.size());
    }
};

inline SpanningSystem spanning_system(const DualIsingModel &dual) {
    const int n = dual.num_sites();
    std::vector<std::vector<std::pair<int, double>>> adj(static_cast<std::size_t>(n));
    auto add = [&](const DualBond &b) {
        adj[static_cast<std::size_t>(b.m)].emplace_back(b.n, b.value.real());
        adj[static_cast<std::size_t>(b.n)].emplace_back(b.m, b.value.real());
    };
    for (const DualBond &b : dual.nn_bonds()) {
        add(b);
    }
    for (const DualBond &b : dual.diag_bonds()) {
        add(b);
    }
    std::vector<double> top(static_cast<std::size_t>(n), 0.0);
    std::vector<double> bottom(static_cast<std::size_t>(n), 0.0);
    for (int c = 0; c < dual.cols(); ++c) {
        top[static_cast<std::size_t>(dual.site(0, c))] += dual.top_field(c).real();
        bottom[static_cast<std::size_t>(dual.site(dual.rows() - 1, c))] += dual.bottom_field(c).real();
    }
    std::vector<int> comp(static_cast<std::size_t>(n), -1);
    std::vector<int> order;
    std::vector<std::uint8_t> spanning;
    for (int s = 0; s < n; ++s) {
        if (comp[static_cast<std::size_t>(s)] >= 0) {
            continue;
        }
        int id = static_cast<int>(spanning.size());
        bool has_top = false, has_bottom = false;
        std::vector<int> stack{s};
        comp[static_cast<std::size_t>(s)] = id;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            has_top |= top[static_cast<std::size_t>(u)] != 0.0;
            has_bottom |= bottom[static_cast<std::size_t>(u)] != 0.0;
            for (const auto &[v, J] : adj[static_cast<std::size_t>(u)]) {
                if (comp[static_cast<std::size_t>(v)] < 0) {
                    comp[static_cast<std::size_t>(v)] = id;
                    stack.push_back(v);
                }
            }
        }
        spanning.push_back(has_top && has_bottom);
    }
    SpanningSystem sys;
    std::vector<int> local(static_cast<std::size_t>(n), -1);
    for (int s = 0; s < n; ++s) {
        if (spanning[static_cast<std::size_t>(comp[static_cast<std::size_t>(s)])]) {
            local[static_cast<std::size_t>(s)] = sys.size();
            sys.top.push_back(top[static_cast<std::size_t>(s)]);
            sys.bottom.push_back(bottom[static_cast<std::size_t>(s)]);
        }
    }
    sys.components = static_cast<int>(std::count(spanning.begin(), spanning.end(), 1));
    for (int s = 0; s < n; ++s) {
        if (local[static_cast<std::size_t>(s)] < 0) {
            continue;
        }
        sys.nbr_start.push_back(static_cast<int>(sys.nbr_index.size()));
        for (const auto &[v, J] : adj[static_cast<std::size_t>(s)]) {
            sys.nbr_index.push_back(local[static_cast<std::size_t>(v)]);
            sys.nbr_coupling.push_back(J);
        }
    }
    sys.nbr_start.push_back(static_cast<int>(sys.nbr_index.size()));
    return sys;
}

struct TiUnitResult {
    std::vector<double> series;
    std::uint64_t accepted = 0;
    std::uint64_t proposed = 0;
    double tau = 1.0;
    int burn_in = 0;
};

// Single-spin Metropolis on the spanning system at bottom-field scale lambda;
// records M_b = sum_b h_b mu_b once per (thinned) sweep.
inline TiUnitResult run_ti_unit(const SpanningSystem &sys, double lambda, std::uint64_t seed, int sweeps,
                                const std::optional<int> &burn_in, int thinning) {
    Rng rng(seed);
    const int n = sys.size();
    std::vector<double> mu(static_cast<std::size_t>(n));
    std::vector<double> base(static_cast<std::size_t>(n));
    double m_bottom = 0.0;
    for (int i = 0; i < n; ++i) {
        mu[static_cast<std::size_t>(i)] = rng.bernoulli(0.5) ? 1.0 : -1.0;
        base[static_cast<std::size_t>(i)] = sys.top[static_cast<std::size_t>(i)] + lambda * sys.bottom[static_cast<std::size_t>(i)];
        m_bottom += sys.bottom[static_cast<std::size_t>(i)] * mu[static_cast<std::size_t>(i)];
    }
    TiUnitResult r;
    auto sweep = [&](bool count) {
        for (int i = 0; i < n; ++i) {
            auto ui = static_cast<std::size_t>(i);
            double h = base[ui];
            for (int k = sys.nbr_start[ui]; k < sys.nbr_start[ui + 1]; ++k) {
                h += sys.nbr_coupling[static_cast<std::size_t>(k)] * mu[static_cast<std::size_t>(sys.nbr_index[static_cast<std::size_t>(k)])];
            }
            double de = -2.0 * mu[ui] * h;
            bool ok = metropolis_accept(de, de > 0.0 ? rng.uniform() : 0.0);
            if (count) {
                ++r.proposed;
                r.accepted += ok ? 1 : 0;
            }
            if (ok) {
                mu[ui] = -mu[ui];
                m_bottom += 2.0 * sys.bottom[ui] * mu[ui];
            }
        }
    };
    const int pilot = pilot_length(burn_in, sweeps);
    std::vector<double> pilot_series;
    for (int t = 0; t < pilot; ++t) {
        sweep(false);
        pilot_series.push_back(m_bottom);
    }
    int extra = 0;
    if (!burn_in) {
        r.tau = integrated_autocorr_time(pilot_series);
        extra = auto_extra_burn(r.tau, pilot, sweeps);
        for (int t = 0; t < extra; ++t) {
            sweep(false);
        }
    }
    r.burn_in = pilot + extra;
    for (int t = r.burn_in; t < sweeps; ++t) {
        sweep(true);
        if ((t - r.burn_in) % thinning == 0) {
            r.series.push_back(m_bottom);
        }
    }
    return r;
}

}  // namespace detail

/// ratio_x = |1 - r| / (1 + r) with r = C(+,-)/C(+,+) for the empty syndrome,
/// from ln r = int_{-1}^{1} <M_b>_lambda d lambda, where the bottom field is
/// scaled by lambda and M_b = sum_b h~_b mu_b. Trapezoidal rule on ti_steps
/// equally spaced points, one independent chain per (chain, lambda) pair.
/// Only components touching both boundaries are simulated.
inline McEstimate estimate_ratio_ti(const DualIsingModel &dual, const McConfig &mc) {
    mc.validate();
    if (!dual.is_real()) {
        throw SignProblem("sign-problem: complex dual model cannot be sampled; use exact engines");
    }
    McEstimate est;
    est.estimator = Estimator::boundary_flip_ti;
    est.seed = mc.seed;
    est.chains_used = mc.chains;
    const int steps = mc.ti_steps;
    for (int c = 0; c < mc.chains; ++c) {
        for (int i = 0; i < steps; ++i) {
            est.seed_lineage.push_back(derive_seed(mc.seed, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(i)));
        }
    }
    const detail::SpanningSystem sys = detail::spanning_system(dual);
    if (sys.components == 0) {
        est.mean = 0.0;
        est.std_error = 0.0;
        est.log_r = 0.0;
        est.acceptance_rate = 1.0;
        est.note = "no component connects the top and bottom boundaries: r = 1 exactly";
        return est;
    }
    const int unit_sweeps = std::max(2, mc.sweeps / steps);
    std::optional<int> unit_burn;
    if (mc.burn_in) {
        unit_burn = std::min(*mc.burn_in / steps, unit_sweeps - 1);
    }
    std::vector<detail::TiUnitResult> units(static_cast<std::size_t>(mc.chains * steps));
    auto lambda_of = [steps](int i) { return 1.0 - 2.0 * i / (steps - 1); };
    parallel_for(units.size(), mc.threads, [&](std::size_t u) {
        int i = static_cast<int>(u) % steps;
        units[u] = detail::run_ti_unit(sys, lambda_of(i), est.seed_lineage[u], unit_sweeps, unit_burn, mc.thinning);
    });

    const int blocks = mc.chains > 1 ? mc.chains : detail::kSingleChainBatches;
    // block_sums[i][b] = (sum, count) of M_b at lambda point i in block b.
    std::vector<std::vector<std::pair<double, double>>> block_sums(static_cast<std::size_t>(steps));
    std::uint64_t acc = 0, prop = 0;
    for (int c = 0; c < mc.chains; ++c) {
        for (int i = 0; i < steps; ++i) {
            const auto &r = units[static_cast<std::size_t>(c * steps + i)];
            acc += r.accepted;
            prop += r.proposed;
            est.autocorr_time = std::max(est.autocorr_time, r.tau);
            est.burn_in_used = std::max(est.burn_in_used, r.burn_in);
            if (mc.chains > 1) {
                block_sums[static_cast<std::size_t>(i)].emplace_back(std::accumulate(r.series.begin(), r.series.end(), 0.0),
                                                                    static_cast<double>(r.series.size()));
            } else {
                block_sums[static_cast<std::size_t>(i)] = detail::batch_sums(r.series, blocks);
            }
        }
    }
    const double dl = 2.0 / (steps - 1);
    auto log_r = [&](int skip) {
        double total = 0.0;
        for (int i = 0; i < steps; ++i) {
            double sum = 0.0, n = 0.0;
            for (int b = 0; b < blocks; ++b) {
                if (b != skip) {
                    sum += block_sums[static_cast<std::size_t>(i)][static_cast<std::size_t>(b)].first;
                    n += block_sums[static_cast<std::size_t>(i)][static_cast<std::size_t>(b)].second;
                }
            }
            double w = (i == 0 || i == steps - 1) ? 0.5 * dl : dl;
            total += w * (n > 0.0 ? sum / n : 0.0);
        }
        return total;
    };
    auto ratio_of = [](double lr) {
        double r = std::exp(lr);
        return std::abs(1.0 - r) / (1.0 + r);
    };
    auto [mean, err] = detail::jackknife(blocks, [&](int skip) { return ratio_of(log_r(skip)); });
    est.mean = mean;
    est.std_error = err;
    est.log_r = log_r(-1);
    est.acceptance_rate = prop > 0 ? static_cast<double>(acc) / static_cast<double>(prop) : 0.0;
    return est;
}

/// One (size, coupling) point of a scan.
struct CurvePoint {
    int size = 0;
    double coupling = 0.0;
    McEstimate estimate;
};

struct CrossingPair {
    int size_a = 0;
    int size_b = 0;
    bool found = false;
    double location = std::numeric_limits<double>::quiet_NaN();
    double uncertainty = std::numeric_limits<double>::quiet_NaN();
    int sign_changes = 0;
};

struct ThresholdReport {
    bool crossed = false;
    double threshold = std::numeric_limits<double>::quiet_NaN();
    double uncertainty = std::numeric_limits<double>::quiet_NaN();
    std::string method;
    std::vector<CrossingPair> pairs;

    std::string format() const {
        std::ostringstream out;
        out.precision(10);
        out << "threshold: " << (crossed ? std::to_string(threshold) : std::string("none")) << "\n";
        out << "uncertainty: " << (crossed ? std::to_string(uncertainty) : std::string("none")) << "\n";
        out << "method: " << method << "\n";
        for (const CrossingPair &p : pairs) {
            out << "pair " << p.size_a << "-" << p.size_b << ": ";
            if (p.found) {
                out << "crossing " << p.location << " +- " << p.uncertainty << " (sign changes " << p.sign_changes
                    << ")\n";
            } else {
                out << "no crossing\n";
            }
        }
        return out.str();
    }
};

/// Crossings of consecutive-size curves. Each pair uses linear interpolation of
/// the curve difference between adjacent sweep points; with several sign
/// changes the steepest one is kept. The threshold is the mean over pairs and
/// the uncertainty half their spread plus the propagated statistical error.
inline ThresholdReport find_crossing(const std::vector<CurvePoint> &curve, const std::string &method) {
    std::vector<int> sizes;
    std::vector<double> xs;
    for (const CurvePoint &p : curve) {
        sizes.push_back(p.size);
        xs.push_back(p.coupling);
    }
    std::sort(sizes.begin(), sizes.end());
    sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    auto lookup = [&](int size, double x) -> const McEstimate & {
        for (const CurvePoint &p : curve) {
            if (p.size == size && p.coupling == x) {
                return p.estimate;
            }
        }
        throw std::invalid_argument("curve table is missing size " + std::to_string(size) + " at " +
                                    std::to_string(x));
    };
    ThresholdReport report;
    report.method = method;
    std::vector<double> found;
    double stat2 = 0.0;
    for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
        CrossingPair pair;
        pair.size_a = sizes[k];
        pair.size_b = sizes[k + 1];
        std::vector<double> d, e;
        for (double x : xs) {
            const McEstimate &a = lookup(pair.size_a, x);
            const McEstimate &b = lookup(pair.size_b, x);
            d.push_back(b.mean - a.mean);
            e.push_back(std::hypot(a.std_error, b.std_error));
        }
        double best_slope = 0.0;
        for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
            bool change = (d[i] < 0.0 && d[i + 1] > 0.0) || (d[i] > 0.0 && d[i + 1] < 0.0);
            if (!change) {
                continue;
            }
            ++pair.sign_changes;
            double slope = (d[i + 1] - d[i]) / (xs[i + 1] - xs[i]);
            if (std::abs(slope) > best_slope) {
                best_slope = std::abs(slope);
                pair.found = true;
                pair.location = xs[i] - d[i] / slope;
                pair.uncertainty = 0.5 * (e[i] + e[i + 1]) / std::abs(slope);
            }
        }
        if (pair.found) {
            found.push_back(pair.location);
            stat2 += pair.uncertainty * pair.uncertainty;
        }
        report.pairs.push_back(pair);
    }
    if (!found.empty()) {
        report.crossed = true;
        report.threshold = std::accumulate(found.begin(), found.end(), 0.0) / static_cast<double>(found.size());
        auto [lo, hi] = std::minmax_element(found.begin(), found.end());
        report.uncertainty = 0.5 * (*hi - *lo) + std::sqrt(stat2) / static_cast<double>(found.size());
    }
    return report;
}

using ModelFactory = std::function<CouplingConfig(const LatticeSpec &, double)>;
using PointEstimator = std::function<McEstimate(int size, double coupling, const McConfig &mc)>;

struct ScanResult {
    std::vector<CurvePoint> curve;
    ThresholdReport report;
};

/// Evaluates estimator over sizes x sweep and locates the crossings. Points run
/// in parallel; point k gets master seed derive_seed(mc.seed, k) and one thread.
inline ScanResult scan_points(const std::vector<int> &sizes, const std::vector<double> &sweep,
                              const PointEstimator &estimator, const McConfig &mc, const std::string &method) {
    if (sizes.size() < 2) {
        throw std::invalid_argument("scan needs at least 2 lattice sizes");
    }
    if (sweep.size() < 4) {
        throw std::invalid_argument("scan needs at least 4 sweep points");
    }
    mc.validate();
    ScanResult result;
    for (int L : sizes) {
        for (double x : sweep) {
            result.curve.push_back({L, x, {}});
        }
    }
    parallel_for(result.curve.size(), mc.threads, [&](std::size_t k) {
        CurvePoint &p = result.curve[k];
        McConfig local = mc;
        local.seed = derive_seed(mc.seed, k);
        local.threads = 1;
        p.estimate = estimator(p.size, p.coupling, local);
    });
    result.report = find_crossing(result.curve, method);
    return result;
}

/// ratio_x for the empty syndrome of model(lattice, x) with the configured estimator.
inline ScanResult scan_and_cross(const std::vector<int> &sizes, const std::vector<double> &sweep,
                                 const ModelFactory &model, const McConfig &mc) {
    auto estimator = [&](int size, double x, const McConfig &local) {
        LatticeSpec lattice = build_lattice(size);
        CouplingConfig config = model(lattice, x);
        if (local.estimator == Estimator::sector_flag) {
            return sample_sector_flag(lattice, config, SyndromeSet{}, local);
        }
        return estimate_ratio_ti(build_dual(lattice, config), local);
    };
    return scan_points(sizes, sweep, estimator, mc,
                       std::string("pairwise linear crossing of ratio_x, estimator=") + to_string(mc.estimator));
}

/// Mean over disorder draws; the error is the standard error across draws
/// (or the single draw's own error).
inline McEstimate disorder_average(const std::vector<McEstimate> &draws) {
    if (draws.empty()) {
        throw std::invalid_argument("disorder_average needs at least one draw");
    }
    McEstimate out = draws.front();
    const double n = static_cast<double>(draws.size());
    double mean = 0.0, acc = 0.0, sign = 0.0;
    int chains = 0;
    for (const McEstimate &e : draws) {
        mean += e.mean;
        acc += e.acceptance_rate;
        sign += e.sign_average;
        chains += e.chains_used;
    }
    out.mean = mean / n;
    out.acceptance_rate = acc / n;
    out.sign_average = sign / n;
    out.chains_used = chains;
    if (draws.size() > 1) {
        double var = 0.0;
        for (const McEstimate &e : draws) {
            var += (e.mean - out.mean) * (e.mean - out.mean);
        }
        out.std_error = std::sqrt(var / (n - 1.0) / n);
    }
    out.seed_lineage.clear();
    for (const McEstimate &e : draws) {
        out.seed_lineage.insert(out.seed_lineage.end(), e.seed_lineage.begin(), e.seed_lineage.end());
    }
    out.note = "disorder average over " + std::to_string(draws.size()) + " draws";
    return out;
}

inline void write_curve_csv(std::ostream &out, const std::vector<CurvePoint> &curve) {
    out << "size,coupling,estimator,mean,std_error,acceptance_rate,sign_average,seed\n";
    char buf[512];
    for (const CurvePoint &p : curve) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%s,%.17g,%.17g,%.17g,%.17g,%llu\n", p.size, p.coupling,
                      to_string(p.estimate.estimator), p.estimate.mean, p.estimate.std_error,
                      p.estimate.acceptance_rate, p.estimate.sign_average,
                      static_cast<unsigned long long>(p.estimate.seed));
        out << buf;
    }
}

}  // namespace surfidelity
