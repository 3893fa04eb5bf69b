// Copyright 2026 spvar contributors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "spvar/model.hpp"
#include "spvar/rng.hpp"

namespace spvar {

/// Position in a Chimera grid of K_{4,4} cells. Partition 0 holds the
/// "horizontal" legs (inter-cell couplers run to the right), partition 1
/// the "vertical" legs (couplers run downward).
struct ChimeraCoord {
    int cell_row = 0;
    int cell_col = 0;
    int partition = 0;  // 0 = horizontal, 1 = vertical
    int leg = 0;        // 0..3
};

/// width = number of cell columns (equals m for square grids).
inline int chimera_index(const ChimeraCoord& c, int width) {
    return 8 * (width * c.cell_row + c.cell_col) + 4 * c.partition + c.leg;
}

namespace detail {

inline std::vector<std::pair<int, int>> chimera_edges_rect(int rows, int cols) {
    std::vector<std::pair<int, int>> edges;
    auto idx = [cols](int r, int c, int partition, int leg) {
        return chimera_index({r, c, partition, leg}, cols);
    };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            for (int a = 0; a < 4; ++a)
                for (int b = 0; b < 4; ++b) edges.emplace_back(idx(r, c, 0, a), idx(r, c, 1, b));
            if (c + 1 < cols)
                for (int leg = 0; leg < 4; ++leg) edges.emplace_back(idx(r, c, 0, leg), idx(r, c + 1, 0, leg));
            if (r + 1 < rows)
                for (int leg = 0; leg < 4; ++leg) edges.emplace_back(idx(r, c, 1, leg), idx(r + 1, c, 1, leg));
        }
    }
    return edges;
}

}  // namespace detail

/// Edge set of an m x m Chimera graph: 16 bipartite edges inside each
/// cell plus 4 same-leg edges to the cell on the right (horizontal legs)
/// and below (vertical legs). Edge count: 16 m^2 + 8 m (m-1).
inline std::vector<std::pair<int, int>> chimera_edges(int m) {
    if (m < 1) throw std::invalid_argument("chimera_edges: m must be >= 1");
    return detail::chimera_edges_rect(m, m);
}

/// Weak-strong cluster problem: a grid x grid arrangement of cell pairs
/// on a (grid) x (2 grid) Chimera layout. Each pair is one weak cell
/// (all biases h_w) next to one strong cell (all biases +1), internally
/// ferromagnetic and joined by their 4 shared legs; strong cells of
/// adjacent pairs are joined the same way. All couplers are -1 (aligning
/// is energetically favorable in the minimization convention). The seed
/// decides, per pair, which of its two cells is the weak one. For
/// -0.5 < h_w < 0 the state with the weak clusters opposite the strong
/// ones is a false minimum; at h_w = -0.5 it becomes degenerate with the
/// aligned ground state.
inline IsingProblem gen_weak_strong(int grid, double h_w, std::uint64_t seed) {
    if (grid < 1) throw std::invalid_argument("gen_weak_strong: grid must be >= 1");
    if (!(h_w >= -0.5 && h_w < 0.0))
        throw std::domain_error("gen_weak_strong: h_w must lie in [-0.5, 0)");

    const int rows = grid, cols = 2 * grid;
    detail::Rng rng(seed);

    // weak_is_left[pair_row][pair_col]
    std::vector<std::vector<bool>> weak_is_left(rows, std::vector<bool>(grid));
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < grid; ++c) weak_is_left[r][c] = rng.coin();

    IsingProblem p(8 * rows * cols);
    auto idx = [cols](int r, int c, int partition, int leg) {
        return chimera_index({r, c, partition, leg}, cols);
    };
    auto add_intra = [&](int r, int c) {
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) p.add_coupler(idx(r, c, 0, a), idx(r, c, 1, b), -1.0);
    };
    auto join_cells = [&](int r1, int c1, int r2, int c2, int partition) {
        for (int leg = 0; leg < 4; ++leg)
            p.add_coupler(idx(r1, c1, partition, leg), idx(r2, c2, partition, leg), -1.0);
    };
    auto strong_col = [&](int r, int pc) { return 2 * pc + (weak_is_left[r][pc] ? 1 : 0); };

    for (int r = 0; r < rows; ++r) {
        for (int pc = 0; pc < grid; ++pc) {
            add_intra(r, 2 * pc);
            add_intra(r, 2 * pc + 1);
            join_cells(r, 2 * pc, r, 2 * pc + 1, 0);  // weak-strong bridge
            const int weak_c = 2 * pc + (weak_is_left[r][pc] ? 0 : 1);
            for (int part = 0; part < 2; ++part)
                for (int leg = 0; leg < 4; ++leg) {
                    p.set_bias(idx(r, weak_c, part, leg), h_w);
                    p.set_bias(idx(r, strong_col(r, pc), part, leg), 1.0);
                }
        }
    }
    // strong backbone between adjacent pairs
    for (int r = 0; r < rows; ++r)
        for (int pc = 0; pc + 1 < grid; ++pc) join_cells(r, strong_col(r, pc), r, strong_col(r, pc + 1), 0);
    for (int r = 0; r + 1 < rows; ++r)
        for (int pc = 0; pc < grid; ++pc) join_cells(r, strong_col(r, pc), r + 1, strong_col(r + 1, pc), 1);
    return p;
}

namespace detail {

// h + sum of +-couplers can reach zero? Exhaustive over neighbor signs;
// integer arithmetic, degree is at most 6 on Chimera.
inline bool zero_field_achievable(long long h, const std::vector<long long>& couplers) {
    const std::size_t d = couplers.size();
    for (std::uint64_t mask = 0; mask < (1ULL << d); ++mask) {
        long long field = h;
        for (std::size_t t = 0; t < d; ++t) field += (mask >> t) & 1 ? couplers[t] : -couplers[t];
        if (field == 0) return true;
    }
    return false;
}

}  // namespace detail

/// Chimera instance with couplers (and biases, when nonzero_bias) drawn
/// uniformly from {-n, -(n-1), -(n-2), n-2, n-1, n}, followed by local
/// degeneracy elimination: while some variable admits a neighbor sign
/// pattern with zero effective field, one of its couplers is redrawn to
/// a different value from the set. Passes are capped; exceeding the cap
/// raises an error naming the offending variable.
inline IsingProblem gen_reduced_degeneracy(int m, int n, bool nonzero_bias, std::uint64_t seed,
                                           int max_passes = 10000) {
    if (n < 3) throw std::invalid_argument("gen_reduced_degeneracy: n must be >= 3");
    const auto edges = chimera_edges(m);
    const int num_vars = 8 * m * m;
    const std::array<long long, 6> values = {-n, -(n - 1), -(n - 2), n - 2, n - 1, n};

    detail::Rng rng(seed);
    std::vector<long long> coupler(edges.size());
    for (auto& v : coupler) v = values[rng.below(6)];
    std::vector<long long> bias(num_vars, 0);
    if (nonzero_bias)
        for (auto& h : bias) h = values[rng.below(6)];

    std::vector<std::vector<int>> incident(num_vars);  // edge indices
    for (std::size_t e = 0; e < edges.size(); ++e) {
        incident[edges[e].first].push_back(static_cast<int>(e));
        incident[edges[e].second].push_back(static_cast<int>(e));
    }

    int last_degenerate = -1;
    for (int pass = 0;; ++pass) {
        if (pass >= max_passes)
            throw std::runtime_error("gen_reduced_degeneracy: pass cap exceeded while fixing variable " +
                                     std::to_string(last_degenerate));
        bool changed = false;
        for (int i = 0; i < num_vars; ++i) {
            std::vector<long long> around;
            around.reserve(incident[i].size());
            for (int e : incident[i]) around.push_back(coupler[e]);
            if (!detail::zero_field_achievable(bias[i], around)) continue;
            last_degenerate = i;
            changed = true;
            const int e = incident[i][rng.below(incident[i].size())];
            const long long old = coupler[e];
            // uniform over the five other set values
            std::uint64_t pick = rng.below(5);
            for (long long v : values) {
                if (v == old) continue;
                if (pick == 0) {
                    coupler[e] = v;
                    break;
                }
                --pick;
            }
        }
        if (!changed) break;
    }

    IsingProblem p(num_vars);
    for (std::size_t e = 0; e < edges.size(); ++e)
        p.add_coupler(edges[e].first, edges[e].second, static_cast<double>(coupler[e]));
    for (int i = 0; i < num_vars; ++i) p.set_bias(i, static_cast<double>(bias[i]));
    return p;
}

/// Chimera instance with couplers uniform on {-r..r} \ {0} and biases
/// uniform on {-r..r}.
inline IsingProblem gen_u_range(int m, int r, std::uint64_t seed) {
    if (r < 1) throw std::invalid_argument("gen_u_range: r must be >= 1");
    const auto edges = chimera_edges(m);
    detail::Rng rng(seed);
    IsingProblem p(8 * m * m);
    for (const auto& [a, b] : edges) {
        // 2r nonzero values
        const long long draw = static_cast<long long>(rng.below(2 * static_cast<std::uint64_t>(r))) - r;
        const long long v = draw >= 0 ? draw + 1 : draw;
        p.add_coupler(a, b, static_cast<double>(v));
    }
    for (int i = 0; i < p.num_vars(); ++i) {
        const long long v = static_cast<long long>(rng.below(2 * static_cast<std::uint64_t>(r) + 1)) - r;
        p.set_bias(i, static_cast<double>(v));
    }
    return p;
}

enum class CouplerDistribution { gaussian, bimodal };

/// L^3 spins on a cubic lattice with periodic boundaries and zero
/// biases. Couplers are drawn per (site, +direction) bond; at L = 2 the
/// wrap-around duplicates each bond, and the two draws are summed so
/// every unordered pair is stored once (12 edges instead of 24).
/// Gaussian draws are quantized to 6 decimal places so instances survive
/// a text round trip unchanged.
inline IsingProblem gen_3d_lattice(int L, CouplerDistribution dist, std::uint64_t seed) {
    if (L < 2) throw std::invalid_argument("gen_3d_lattice: L must be >= 2");
    detail::Rng rng(seed);
    const int n = L * L * L;
    auto site = [L](int x, int y, int z) { return x + L * (y + L * z); };

    std::map<std::pair<int, int>, double> bonds;
    auto draw = [&]() {
        if (dist == CouplerDistribution::bimodal) return rng.coin() ? 1.0 : -1.0;
        return std::round(rng.gaussian() * 1e6) / 1e6;
    };
    for (int z = 0; z < L; ++z)
        for (int y = 0; y < L; ++y)
            for (int x = 0; x < L; ++x) {
                const int a = site(x, y, z);
                const std::array<int, 3> nb = {site((x + 1) % L, y, z), site(x, (y + 1) % L, z),
                                               site(x, y, (z + 1) % L)};
                for (int b : nb) {
                    const double v = draw();
                    if (a == b) continue;  // L = 1 would self-loop; excluded by L >= 2
                    bonds[{std::min(a, b), std::max(a, b)}] += v;
                }
            }

    IsingProblem p(n);
    for (const auto& [ab, v] : bonds) p.add_coupler(ab.first, ab.second, v);
    return p;
}

/// Random Max-k-SAT instance: clauses over k distinct variables, each
/// literal negated with probability 1/2. Literals are signed 1-based
/// variable numbers.
struct MaxKSatInstance {
    int k = 3;
    int num_literals = 0;
    std::vector<std::vector<int>> clauses;
    double phi = 0.0;  // clauses / literals
};

inline MaxKSatInstance gen_maxksat(int k, int num_literals, int num_clauses, std::uint64_t seed) {
    if (k != 2 && k != 3) throw std::invalid_argument("gen_maxksat: k must be 2 or 3");
    if (num_literals < k) throw std::invalid_argument("gen_maxksat: need at least k variables");
    detail::Rng rng(seed);
    MaxKSatInstance inst;
    inst.k = k;
    inst.num_literals = num_literals;
    inst.phi = static_cast<double>(num_clauses) / num_literals;
    inst.clauses.reserve(num_clauses);
    for (int c = 0; c < num_clauses; ++c) {
        std::vector<int> vars;
        while (static_cast<int>(vars.size()) < k) {
            const int v = 1 + static_cast<int>(rng.below(num_literals));
            bool dup = false;
            for (int u : vars) dup |= (u == v);
            if (!dup) vars.push_back(v);
        }
        std::vector<int> clause;
        clause.reserve(k);
        for (int v : vars) clause.push_back(rng.coin() ? v : -v);
        inst.clauses.push_back(std::move(clause));
    }
    return inst;
}

struct MaxSatQuboInfo {
    int num_original_vars = 0;
    int num_aux = 0;
    // aux variable t (QUBO index num_original_vars + t) stands for the
    // product of these two original variables
    std::vector<std::pair<int, int>> aux_pairs;
};

/// Unsatisfied-clause count as a QUBO. Each clause contributes the
/// product over its literals of (1 - lit(x)), which is 1 exactly when
/// the clause is violated. For k = 3 the cubic monomial is replaced
/// through an auxiliary product variable w = y z, one aux per distinct
/// pair, adding the penalty P (y z - 2 y w - 2 z w + 3 w) with P = 2 per
/// clause routed through that pair (stacking keeps the substitution
/// exact however many clauses share the pair). For every assignment of
/// the original variables, the minimum over the auxiliaries equals the
/// number of unsatisfied clauses.
inline std::pair<QuboProblem, MaxSatQuboInfo> maxksat_to_qubo(const MaxKSatInstance& inst) {
    const int n = inst.num_literals;
    double offset = 0.0;
    std::vector<double> linear(n, 0.0);
    std::map<std::pair<int, int>, double> quad;                // i < j, originals
    std::map<std::pair<int, int>, int> aux_of;                 // product pair -> aux ordinal
    std::vector<std::pair<int, int>> aux_pairs;
    std::vector<int> gadget_count;                             // clauses routed per pair
    std::map<std::pair<int, int>, double> aux_quad;            // (aux ordinal, original) couplings

    for (const auto& clause : inst.clauses) {
        const int k = static_cast<int>(clause.size());
        // term per literal: positive v -> (1 - x_v), negative -> x_v
        std::vector<int> var(k);
        std::vector<double> c0(k), c1(k);
        for (int t = 0; t < k; ++t) {
            var[t] = std::abs(clause[t]) - 1;
            if (clause[t] > 0) {
                c0[t] = 1.0;
                c1[t] = -1.0;
            } else {
                c0[t] = 0.0;
                c1[t] = 1.0;
            }
        }
        for (std::uint32_t mask = 0; mask < (1u << k); ++mask) {
            double coeff = 1.0;
            std::vector<int> vars;
            for (int t = 0; t < k; ++t) {
                if ((mask >> t) & 1) {
                    coeff *= c1[t];
                    vars.push_back(var[t]);
                } else {
                    coeff *= c0[t];
                }
            }
            if (coeff == 0.0) continue;
            std::sort(vars.begin(), vars.end());
            if (vars.empty()) {
                offset += coeff;
            } else if (vars.size() == 1) {
                linear[vars[0]] += coeff;
            } else if (vars.size() == 2) {
                quad[{vars[0], vars[1]}] += coeff;
            } else {
                const std::pair<int, int> pair{vars[0], vars[1]};
                auto [it, inserted] = aux_of.emplace(pair, static_cast<int>(aux_pairs.size()));
                if (inserted) {
                    aux_pairs.push_back(pair);
                    gadget_count.push_back(0);
                }
                ++gadget_count[it->second];
                aux_quad[{it->second, vars[2]}] += coeff;  // coeff * w * x_c
            }
        }
    }

    const int num_aux = static_cast<int>(aux_pairs.size());
    QuboProblem q(n + num_aux);
    q.add_offset(offset);
    for (int i = 0; i < n; ++i)
        if (linear[i] != 0.0) q.add_term(i, i, linear[i]);
    for (const auto& [ij, v] : quad)
        if (v != 0.0) q.add_term(ij.first, ij.second, v);
    for (const auto& [aw, v] : aux_quad)
        if (v != 0.0) q.add_term(n + aw.first, aw.second, v);
    for (int t = 0; t < num_aux; ++t) {
        const auto [y, z] = aux_pairs[t];
        const double pen = 2.0 * gadget_count[t];
        const int w = n + t;
        q.add_term(y, z, pen);
        q.add_term(y, w, -2.0 * pen);
        q.add_term(z, w, -2.0 * pen);
        q.add_term(w, w, 3.0 * pen);
    }

    MaxSatQuboInfo info;
    info.num_original_vars = n;
    info.num_aux = num_aux;
    info.aux_pairs = std::move(aux_pairs);
    return {std::move(q), std::move(info)};
}

/// Number of clauses an assignment (0/1 per variable, 1-based vars)
/// leaves unsatisfied.
inline int count_unsatisfied(const MaxKSatInstance& inst, const std::vector<std::int8_t>& x) {
    if (static_cast<int>(x.size()) != inst.num_literals)
        throw std::invalid_argument("count_unsatisfied: assignment size mismatch");
    int unsat = 0;
    for (const auto& clause : inst.clauses) {
        bool sat = false;
        for (int lit : clause) {
            const int v = std::abs(lit) - 1;
            sat |= (lit > 0) ? x[v] == 1 : x[v] == 0;
        }
        unsat += sat ? 0 : 1;
    }
    return unsat;
}

}  // namespace spvar
