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

#include <cmath>
#include <cstdint>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <vector>

#include "spvar/model.hpp"

namespace spvar {

/// Original variable index -> spin it was fixed to.
using FixedAssignment = std::map<int, std::int8_t>;

/// s_var = sign * s_neighbor, both in original indices. Rules form a
/// forest oriented from eliminated leaf toward its surviving neighbor.
struct InferenceRule {
    int var;
    int neighbor;
    std::int8_t sign;
};

/// A shrunken problem plus everything needed to map its solutions back:
/// for every completion c of the surviving variables,
///   evaluate_energy(original, extend_solution(*this, c)) == evaluate_energy(problem, c)
/// exactly for integer coefficients (the eliminated constants live in
/// problem.offset).
struct ReducedProblem {
    IsingProblem problem;        // surviving variables, densely reindexed
    std::vector<int> index_map;  // surviving index -> original index
    FixedAssignment fixed;       // original index -> value
    std::vector<InferenceRule> rules;  // in elimination order
    double offset_delta = 0.0;   // already accumulated into problem.offset
    int original_num_vars = 0;

    int num_removed() const {
        return static_cast<int>(fixed.size() + rules.size());
    }
};

/// Substitutes the fixed spins into the problem: bias terms of fixed
/// variables and couplers between two fixed variables become offset,
/// couplers from a fixed to a free variable become bias on the free one.
inline ReducedProblem apply_fix(const IsingProblem& p, const FixedAssignment& fixed) {
    const int n = p.num_vars();
    std::vector<std::int8_t> value(n, 0);  // 0 = free
    for (const auto& [k, v] : fixed) {
        if (k < 0 || k >= n) throw std::out_of_range("apply_fix: fixed index " + std::to_string(k));
        if (v != 1 && v != -1) throw std::invalid_argument("apply_fix: fixed value must be +-1");
        value[k] = v;
    }

    std::vector<int> new_index(n, -1);
    std::vector<int> index_map;
    for (int i = 0; i < n; ++i) {
        if (value[i] == 0) {
            new_index[i] = static_cast<int>(index_map.size());
            index_map.push_back(i);
        }
    }

    IsingProblem out(static_cast<int>(index_map.size()));
    double offset = p.offset();
    std::vector<double> h(index_map.size(), 0.0);
    for (std::size_t t = 0; t < index_map.size(); ++t) h[t] = p.bias(index_map[t]);
    for (const auto& [k, v] : fixed) offset += p.bias(k) * v;

    for (const auto& [ij, w] : p.couplers()) {
        const auto [a, b] = ij;
        const bool fa = value[a] != 0, fb = value[b] != 0;
        if (fa && fb)
            offset += w * value[a] * value[b];
        else if (fa)
            h[new_index[b]] += w * value[a];
        else if (fb)
            h[new_index[a]] += w * value[b];
        else
            out.add_coupler(new_index[a], new_index[b], w);
    }
    for (std::size_t t = 0; t < index_map.size(); ++t) out.set_bias(static_cast<int>(t), h[t]);
    out.set_offset(offset);

    ReducedProblem rp;
    rp.problem = std::move(out);
    rp.index_map = std::move(index_map);
    rp.fixed = fixed;
    rp.offset_delta = offset - p.offset();
    rp.original_num_vars = n;
    return rp;
}

/// Repeatedly removes degree-<=1 variables. A leaf k with sole coupler
/// J to neighbor j contributes s_k (J s_j + h_k); minimizing over s_k:
///   |h_k| >  |J|: s_k = -sign(h_k) regardless of s_j    (fix)
///   |h_k| <= |J|: s_k = -sign(J) s_j                    (infer)
/// Either way the residual dependence on s_j is linear, so it folds into
/// h_j and the constant part into the offset; the identity holds for
/// every completion, not just optima. Isolated variables are fixed to
/// -sign(h) (+1 on zero bias). On a tree the surviving problem is empty
/// and its offset is the exact minimum.
inline ReducedProblem eliminate_leaves(const IsingProblem& p) {
    const int n = p.num_vars();
    std::vector<std::map<int, double>> adj(n);
    for (const auto& [ij, w] : p.couplers()) {
        if (w == 0.0) continue;  // zero couplers carry no constraint
        adj[ij.first][ij.second] = w;
        adj[ij.second][ij.first] = w;
    }
    std::vector<double> h(p.biases());
    std::vector<bool> removed(n, false);
    double offset_delta = 0.0;

    ReducedProblem rp;
    rp.original_num_vars = n;

    std::set<int> worklist;
    for (int i = 0; i < n; ++i)
        if (adj[i].size() <= 1) worklist.insert(i);

    auto sgn = [](double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); };

    while (!worklist.empty()) {
        const int k = *worklist.begin();
        worklist.erase(worklist.begin());
        if (removed[k]) continue;

        if (adj[k].empty()) {
            const std::int8_t v = h[k] > 0 ? -1 : 1;
            rp.fixed[k] = v;
            offset_delta += -std::abs(h[k]);
        } else {
            const auto [j, w] = *adj[k].begin();
            if (std::abs(h[k]) > std::abs(w)) {
                const int s = sgn(h[k]);
                rp.fixed[k] = static_cast<std::int8_t>(-s);
                h[j] += -s * w;
                offset_delta += -std::abs(h[k]);
            } else {
                const int s = sgn(w);
                rp.rules.push_back({k, j, static_cast<std::int8_t>(-s)});
                h[j] += -s * h[k];
                offset_delta += -std::abs(w);
            }
            adj[j].erase(k);
            if (adj[j].size() <= 1) worklist.insert(j);
        }
        adj[k].clear();
        removed[k] = true;
    }

    std::vector<int> new_index(n, -1);
    for (int i = 0; i < n; ++i) {
        if (!removed[i]) {
            new_index[i] = static_cast<int>(rp.index_map.size());
            rp.index_map.push_back(i);
        }
    }
    IsingProblem out(static_cast<int>(rp.index_map.size()));
    for (const auto& [ij, w] : p.couplers())
        if (!removed[ij.first] && !removed[ij.second])
            out.add_coupler(new_index[ij.first], new_index[ij.second], w);
    for (std::size_t t = 0; t < rp.index_map.size(); ++t) out.set_bias(static_cast<int>(t), h[rp.index_map[t]]);
    out.set_offset(p.offset() + offset_delta);

    rp.problem = std::move(out);
    rp.offset_delta = offset_delta;
    return rp;
}

/// Partition of variables by coupler connectivity, ordered by smallest
/// member; indices within a component ascend.
inline std::vector<std::vector<int>> connected_components(const IsingProblem& p) {
    const int n = p.num_vars();
    std::vector<std::vector<int>> comps;
    std::vector<bool> visited(n, false);
    for (int start = 0; start < n; ++start) {
        if (visited[start]) continue;
        std::vector<int> comp;
        std::queue<int> q;
        q.push(start);
        visited[start] = true;
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            comp.push_back(u);
            for (const auto& [v, w] : p.neighbors(u)) {
                if (!visited[v]) {
                    visited[v] = true;
                    q.push(v);
                }
            }
        }
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
    }
    return comps;
}

/// Rank-wise recombination across connected components: each component's
/// partial solutions are sorted by partial energy and the k-th entries
/// are recombined, so the best output reaches the sum of per-component
/// minima even when no single input solved every component at once.
inline Sample merge_component_solutions(const IsingProblem& p, const Sample& sample) {
    for (const auto& e : sample.entries)
        if (static_cast<int>(e.config.size()) != p.num_vars())
            throw std::invalid_argument("merge_component_solutions: sample/problem mismatch");

    const auto comps = connected_components(p);
    if (comps.size() <= 1) {
        Sample out = sample;
        out.sort_by_energy();
        return out;
    }

    const int n = p.num_vars();
    std::vector<int> comp_of(n, -1);
    for (std::size_t c = 0; c < comps.size(); ++c)
        for (int v : comps[c]) comp_of[v] = static_cast<int>(c);

    const std::size_t m = sample.size();
    // partial[c][t] = energy of entry t restricted to component c
    std::vector<std::vector<double>> partial(comps.size(), std::vector<double>(m, 0.0));
    for (std::size_t t = 0; t < m; ++t) {
        const auto& s = sample.entries[t].config;
        partial[0][t] = p.offset();  // constant assigned to the first component
        for (const auto& [ij, w] : p.couplers())
            partial[comp_of[ij.first]][t] += w * s[ij.first] * s[ij.second];
        for (int i = 0; i < n; ++i) partial[comp_of[i]][t] += p.bias(i) * s[i];
    }

    // rank entries per component: ascending partial energy, ties by the
    // restricted configuration
    std::vector<std::vector<std::size_t>> order(comps.size());
    for (std::size_t c = 0; c < comps.size(); ++c) {
        order[c].resize(m);
        for (std::size_t t = 0; t < m; ++t) order[c][t] = t;
        const auto& vars = comps[c];
        const auto& part = partial[c];
        std::sort(order[c].begin(), order[c].end(), [&](std::size_t a, std::size_t b) {
            if (part[a] != part[b]) return part[a] < part[b];
            for (int v : vars) {
                const auto& ca = sample.entries[a].config;
                const auto& cb = sample.entries[b].config;
                if (ca[v] != cb[v]) return ca[v] < cb[v];
            }
            return false;
        });
    }

    Sample out;
    out.entries.reserve(m);
    for (std::size_t k = 0; k < m; ++k) {
        SpinConfig cfg(n, 0);
        double energy = 0.0;
        for (std::size_t c = 0; c < comps.size(); ++c) {
            const std::size_t t = order[c][k];
            energy += partial[c][t];
            for (int v : comps[c]) cfg[v] = sample.entries[t].config[v];
        }
        out.push_back(std::move(cfg), energy);
    }
    out.sorted = true;  // sums of k-th order statistics are nondecreasing in k
    return out;
}

/// Maps a reduced-space configuration back to the original index space:
/// survivors via index_map, fixed values verbatim, inferred values by
/// replaying the rules in reverse elimination order.
inline SpinConfig extend_solution(const ReducedProblem& rp, const SpinConfig& c) {
    if (static_cast<int>(c.size()) != rp.problem.num_vars())
        throw std::invalid_argument("extend_solution: config sized for a different problem");
    SpinConfig full(rp.original_num_vars, 0);
    for (std::size_t t = 0; t < rp.index_map.size(); ++t) full[rp.index_map[t]] = c[t];
    for (const auto& [k, v] : rp.fixed) full[k] = v;
    for (auto it = rp.rules.rbegin(); it != rp.rules.rend(); ++it) {
        if (full[it->neighbor] == 0)
            throw std::runtime_error("extend_solution: unresolvable rule for variable " +
                                     std::to_string(it->var));
        full[it->var] = static_cast<std::int8_t>(it->sign * full[it->neighbor]);
    }
    for (int i = 0; i < rp.original_num_vars; ++i)
        if (full[i] == 0)
            throw std::runtime_error("extend_solution: variable " + std::to_string(i) + " left unassigned");
    return full;
}

}  // namespace spvar
