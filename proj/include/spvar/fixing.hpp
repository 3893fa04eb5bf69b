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
#include <stdexcept>
#include <vector>

#include "spvar/model.hpp"
#include "spvar/reduction.hpp"

namespace spvar {

struct SpvarParams {
    double fixing_threshold = 1.0;       // fraction of elite that must agree
    double elite_threshold = 0.2;        // fraction of the sample kept as elite
    bool adaptive_elite = false;
    double correlation_threshold = 1.0;  // |c_ij| needed for cluster membership
    double correlation_elite_threshold = 0.2;

    void validate() const {
        auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
        if (!in_unit(fixing_threshold) || !in_unit(elite_threshold) || !in_unit(correlation_threshold) ||
            !in_unit(correlation_elite_threshold))
            throw std::invalid_argument("SpvarParams: thresholds must lie in (0, 1]");
    }
};

struct SpvarOutcome {
    ReducedProblem reduced;
    int elite_size = 0;
    int fixed_count = 0;
    std::vector<double> recorded_energies;  // full sample, ascending
};

namespace detail {

inline std::size_t elite_count(double fraction, std::size_t sample_size) {
    const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(sample_size)));
    return std::min(std::max<std::size_t>(k, 1), sample_size);
}

inline Sample sorted_copy(const Sample& sample) {
    Sample s = sample;
    s.sort_by_energy();
    return s;
}

}  // namespace detail

/// Persistence fixing: keep the elite (lowest-energy fraction of the
/// sample), compute each variable's mean spin over it, and fix every
/// variable whose |mean| reaches fixing_threshold. At the default
/// threshold 1.0 this fixes exactly the variables constant across the
/// elite; spin sums are small integers so the comparison is exact.
inline SpvarOutcome spvar_fix(const IsingProblem& p, const Sample& sample, const SpvarParams& params) {
    params.validate();
    if (sample.empty()) throw std::runtime_error("spvar_fix: empty sample");
    for (const auto& e : sample.entries)
        if (static_cast<int>(e.config.size()) != p.num_vars())
            throw std::invalid_argument("spvar_fix: sample/problem mismatch");

    const Sample s = detail::sorted_copy(sample);
    const std::size_t elite = detail::elite_count(params.elite_threshold, s.size());

    const int n = p.num_vars();
    std::vector<long long> sums(n, 0);
    for (std::size_t t = 0; t < elite; ++t)
        for (int i = 0; i < n; ++i) sums[i] += s.entries[t].config[i];

    FixedAssignment fixed;
    for (int i = 0; i < n; ++i) {
        const double mean = static_cast<double>(sums[i]) / static_cast<double>(elite);
        if (std::abs(mean) >= params.fixing_threshold) fixed[i] = mean > 0 ? 1 : -1;
    }

    SpvarOutcome out;
    out.reduced = apply_fix(p, fixed);
    out.elite_size = static_cast<int>(elite);
    out.fixed_count = static_cast<int>(fixed.size());
    out.recorded_energies = s.energies();
    return out;
}

/// Zero-bias problems carry a global spin-flip degeneracy, so plain
/// persistence sees mean 0 everywhere. This instead looks at pairwise
/// correlations over coupler-adjacent pairs in the elite, clusters the
/// pairs whose |correlation| reaches correlation_threshold, and fixes
/// the largest cluster: its smallest index to +1, the rest to the
/// product of correlation signs along the connecting path. Falls back
/// to zero fixes when no pair qualifies.
inline SpvarOutcome correlation_prefix(const IsingProblem& p, const Sample& sample, const SpvarParams& params) {
    params.validate();
    if (sample.empty()) throw std::runtime_error("correlation_prefix: empty sample");
    for (const auto& e : sample.entries)
        if (static_cast<int>(e.config.size()) != p.num_vars())
            throw std::invalid_argument("correlation_prefix: sample/problem mismatch");

    const Sample s = detail::sorted_copy(sample);
    const std::size_t elite = detail::elite_count(params.correlation_elite_threshold, s.size());
    const int n = p.num_vars();

    // signed adjacency over qualifying pairs
    std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbor, sign)
    for (const auto& [ij, w] : p.couplers()) {
        const auto [a, b] = ij;
        long long sum = 0;
        for (std::size_t t = 0; t < elite; ++t) sum += s.entries[t].config[a] * s.entries[t].config[b];
        const double c = static_cast<double>(sum) / static_cast<double>(elite);
        if (std::abs(c) >= params.correlation_threshold) {
            const int sign = c > 0 ? 1 : -1;
            adj[a].emplace_back(b, sign);
            adj[b].emplace_back(a, sign);
        }
    }
    for (auto& nb : adj) std::sort(nb.begin(), nb.end());

    // clusters = connected components of the qualifying graph
    std::vector<int> cluster_of(n, -1);
    std::vector<std::vector<int>> clusters;
    for (int start = 0; start < n; ++start) {
        if (cluster_of[start] != -1 || adj[start].empty()) continue;
        const int id = static_cast<int>(clusters.size());
        std::vector<int> members;
        std::queue<int> q;
        q.push(start);
        cluster_of[start] = id;
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            members.push_back(u);
            for (const auto& [v, sign] : adj[u])
                if (cluster_of[v] == -1) {
                    cluster_of[v] = id;
                    q.push(v);
                }
        }
        clusters.push_back(std::move(members));
    }

    FixedAssignment fixed;
    if (!clusters.empty()) {
        // largest cluster; ties resolved toward the smallest min index,
        // which is discovery order here
        std::size_t best = 0;
        for (std::size_t c = 1; c < clusters.size(); ++c)
            if (clusters[c].size() > clusters[best].size()) best = c;

        const int rep = *std::min_element(clusters[best].begin(), clusters[best].end());
        std::vector<std::int8_t> value(n, 0);
        value[rep] = 1;
        std::queue<int> q;
        q.push(rep);
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            for (const auto& [v, sign] : adj[u])
                if (value[v] == 0) {
                    value[v] = static_cast<std::int8_t>(sign * value[u]);
                    q.push(v);
                }
        }
        for (int v : clusters[best]) fixed[v] = value[v];
    }

    SpvarOutcome out;
    out.reduced = apply_fix(p, fixed);
    out.elite_size = static_cast<int>(elite);
    out.fixed_count = static_cast<int>(fixed.size());
    out.recorded_energies = s.energies();
    return out;
}

/// Halves the elite threshold until persistence fixing bites, stopping
/// once the elite is down to two entries; returns the first (largest)
/// threshold that fixed at least one variable, or the floor value.
inline double adaptive_elite_threshold(const IsingProblem& p, const Sample& sample, const SpvarParams& params) {
    params.validate();
    if (sample.empty()) throw std::runtime_error("adaptive_elite_threshold: empty sample");
    double t = params.elite_threshold;
    SpvarParams probe = params;
    probe.adaptive_elite = false;
    for (;;) {
        probe.elite_threshold = t;
        const SpvarOutcome out = spvar_fix(p, sample, probe);
        if (out.fixed_count > 0) return t;
        if (detail::elite_count(t, sample.size()) <= 2) return t;
        t /= 2;
    }
}

}  // namespace spvar
