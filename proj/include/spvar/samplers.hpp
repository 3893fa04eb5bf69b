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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "spvar/model.hpp"
#include "spvar/rng.hpp"

namespace spvar {

enum class SamplerKind { sa, pticm, brute_force };
enum class ScheduleKind { linear, geometric };

/// Inverse-temperature schedule for simulated annealing. Unset endpoints
/// resolve per problem to 0.1/M .. 5/M with M = max(|J|, |h|, 1), which
/// keeps acceptance rates comparable across coupler ranges.
struct SaSchedule {
    std::optional<double> beta_start;
    std::optional<double> beta_end;
    ScheduleKind kind = ScheduleKind::geometric;
};

struct PticmParams {
    int num_replicas = 16;            // temperatures in the ladder
    std::vector<double> betas;        // explicit ladder; empty -> geometric default
    std::optional<double> beta_min;
    std::optional<double> beta_max;
    bool icm_enabled = true;          // requires all-zero biases
    int elite_states_per_replica = 10;
    bool lower_half_only = true;      // collect states from the colder half only
};

struct SamplerSpec {
    SamplerKind kind = SamplerKind::sa;
    int num_reads = 1;
    int num_sweeps = 1000;
    SaSchedule sa_schedule;
    PticmParams pticm;
    std::uint64_t seed = 0;
    int brute_force_cap = 30;
};

namespace detail {

inline double default_beta_scale(const IsingProblem& p) {
    return std::max(p.max_abs_coefficient(), 1.0);
}

inline std::pair<double, double> resolve_sa_range(const IsingProblem& p, const SaSchedule& s) {
    const double m = default_beta_scale(p);
    const double b0 = s.beta_start.value_or(0.1 / m);
    const double b1 = s.beta_end.value_or(5.0 / m);
    if (!(b0 > 0) || !(b1 > 0)) throw std::invalid_argument("sa schedule: betas must be positive");
    return {b0, b1};
}

inline double schedule_beta(double b0, double b1, ScheduleKind kind, int sweep, int num_sweeps) {
    if (num_sweeps <= 1) return b1;
    const double t = static_cast<double>(sweep) / (num_sweeps - 1);
    if (kind == ScheduleKind::linear) return b0 + (b1 - b0) * t;
    return b0 * std::pow(b1 / b0, t);
}

inline SpinConfig random_config(int n, Rng& rng) {
    SpinConfig s(n);
    for (int i = 0; i < n; ++i) s[i] = rng.spin();
    return s;
}

// One Metropolis pass in fixed index order. Downhill moves are always
// taken and flat moves with probability 1/2: taking flat moves
// deterministically makes domain walls drift in lockstep with the sweep
// order and never annihilate (a limit cycle on e.g. ferromagnetic
// rings), while the coin toss keeps detailed balance and restores the
// walls' random walk. If energy is non-null it is kept in sync
// incrementally.
inline void metropolis_sweep(const IsingProblem& p, SpinConfig& s, double beta, Rng& rng,
                             double* energy = nullptr) {
    const auto& h = p.biases();
    for (int i = 0; i < p.num_vars(); ++i) {
        double field = h[i];
        for (const auto& [j, w] : p.neighbors(i)) field += w * s[j];
        const double delta = -2.0 * s[i] * field;
        const bool accept =
            delta < 0.0 || (delta == 0.0 ? rng.coin() : rng.uniform01() < std::exp(-beta * delta));
        if (accept) {
            s[i] = static_cast<std::int8_t>(-s[i]);
            if (energy) *energy += delta;
        }
    }
}

inline Sample trivial_sample(const IsingProblem& p, int num_reads) {
    Sample out;
    for (int r = 0; r < num_reads; ++r) out.push_back(SpinConfig{}, p.offset());
    out.sorted = true;
    return out;
}

}  // namespace detail

/// num_reads independent anneals; each starts from a random state, runs
/// num_sweeps Metropolis passes while beta follows the schedule, and
/// reports the final state with its exactly evaluated energy. Each read
/// draws its own RNG stream from (seed, read index), so reads can be
/// reproduced in isolation.
inline Sample sample_sa(const IsingProblem& p, const SamplerSpec& spec) {
    if (spec.num_reads < 1) throw std::invalid_argument("sample_sa: num_reads must be >= 1");
    if (p.num_vars() == 0) return detail::trivial_sample(p, spec.num_reads);
    const auto [b0, b1] = detail::resolve_sa_range(p, spec.sa_schedule);

    Sample out;
    out.entries.reserve(spec.num_reads);
    for (int r = 0; r < spec.num_reads; ++r) {
        detail::Rng rng(detail::substream(spec.seed, static_cast<std::uint64_t>(r)));
        SpinConfig s = detail::random_config(p.num_vars(), rng);
        for (int t = 0; t < spec.num_sweeps; ++t) {
            const double beta = detail::schedule_beta(b0, b1, spec.sa_schedule.kind, t, spec.num_sweeps);
            detail::metropolis_sweep(p, s, beta, rng);
        }
        const double e = evaluate_energy(p, s);
        out.push_back(std::move(s), e);
    }
    return out;
}

/// Houdayer-type cluster move between two replicas of a zero-bias
/// problem: flips a connected cluster of opposite-overlap sites in both
/// replicas. E(r1) + E(r2) is exactly preserved because every boundary
/// coupler changes by opposite amounts in the two replicas.
///
/// Returns the two energy deltas (dE1 == -dE2); the move is applied in
/// place. No-op (and no RNG draw) when the replicas agree everywhere.
inline std::pair<double, double> icm_move_inplace(SpinConfig& r1, SpinConfig& r2, const IsingProblem& p,
                                                  detail::Rng& rng) {
    if (p.has_nonzero_bias())
        throw std::invalid_argument("icm_move: isoenergetic cluster moves require all-zero biases");
    const int n = p.num_vars();
    if (static_cast<int>(r1.size()) != n || static_cast<int>(r2.size()) != n)
        throw std::invalid_argument("icm_move: config size mismatch");

    std::vector<int> disagree;
    for (int i = 0; i < n; ++i)
        if (r1[i] != r2[i]) disagree.push_back(i);
    if (disagree.empty()) return {0.0, 0.0};

    const int seed_site = disagree[rng.below(disagree.size())];
    std::vector<bool> in_cluster(n, false);
    std::queue<int> q;
    q.push(seed_site);
    in_cluster[seed_site] = true;
    std::vector<int> cluster{seed_site};
    while (!q.empty()) {
        const int u = q.front();
        q.pop();
        for (const auto& [v, w] : p.neighbors(u)) {
            if (!in_cluster[v] && r1[v] != r2[v]) {
                in_cluster[v] = true;
                cluster.push_back(v);
                q.push(v);
            }
        }
    }

    double d1 = 0.0;
    for (int u : cluster)
        for (const auto& [v, w] : p.neighbors(u))
            if (!in_cluster[v]) d1 += -2.0 * w * r1[u] * r1[v];
    for (int u : cluster) {
        r1[u] = static_cast<std::int8_t>(-r1[u]);
        r2[u] = static_cast<std::int8_t>(-r2[u]);
    }
    return {d1, -d1};
}

/// Pure-value variant of the cluster move.
inline std::pair<SpinConfig, SpinConfig> icm_move(const SpinConfig& r1, const SpinConfig& r2,
                                                  const IsingProblem& p, detail::Rng& rng) {
    SpinConfig a = r1, b = r2;
    icm_move_inplace(a, b, p, rng);
    return {std::move(a), std::move(b)};
}

/// Hook for observing the chain state once per sweep (after the
/// Metropolis, exchange, and cluster phases). states[chain][temp].
struct PticmTrace {
    std::function<void(const std::vector<std::vector<SpinConfig>>& states,
                       const std::vector<std::vector<double>>& energies)>
        on_sweep;
};

namespace detail {

struct EliteBuffer {
    int cap;
    std::vector<SampleEntry> entries;  // ascending (energy, config)

    void insert(const SpinConfig& s, double e) {
        if (static_cast<int>(entries.size()) == cap && e > entries.back().energy) return;
        for (const auto& known : entries)
            if (known.energy == e && known.config == s) return;
        SampleEntry entry{s, e};
        auto pos = std::lower_bound(entries.begin(), entries.end(), entry, entry_less);
        entries.insert(pos, std::move(entry));
        if (static_cast<int>(entries.size()) > cap) entries.pop_back();
    }
};

inline std::vector<double> resolve_ladder(const IsingProblem& p, const PticmParams& params) {
    if (!params.betas.empty()) {
        for (std::size_t k = 0; k < params.betas.size(); ++k) {
            if (!(params.betas[k] > 0)) throw std::invalid_argument("pticm: betas must be positive");
            if (k > 0 && !(params.betas[k] > params.betas[k - 1]))
                throw std::invalid_argument("pticm: betas must be strictly increasing");
        }
        return params.betas;
    }
    const int k = params.num_replicas;
    if (k < 2) throw std::invalid_argument("pticm: at least two replicas required");
    const double m = default_beta_scale(p);
    const double b0 = params.beta_min.value_or(0.1 / m);
    const double b1 = params.beta_max.value_or(5.0 / m);
    if (!(b0 > 0) || !(b1 > b0)) throw std::invalid_argument("pticm: invalid beta range");
    std::vector<double> betas(k);
    for (int i = 0; i < k; ++i) betas[i] = b0 * std::pow(b1 / b0, static_cast<double>(i) / (k - 1));
    return betas;
}

}  // namespace detail

/// Parallel tempering, optionally with isoenergetic cluster moves. When
/// ICM is enabled two independent chains run at every temperature and
/// one cluster move per temperature couples them each sweep. A sweep is
/// one Metropolis pass per replica, exchange attempts between adjacent
/// temperatures (acceptance min(1, exp((b_hot - b_cold)(E_hot - E_cold)))
/// written for the adjacent pair), then the cluster moves.
///
/// The sample is the union of per-replica running elites: the
/// elite_states_per_replica lowest-energy distinct states seen by each
/// replica in the colder half of the ladder, flattened, sorted, and
/// truncated or padded (repeating the best state) to num_reads.
inline Sample sample_pticm(const IsingProblem& p, const SamplerSpec& spec, const PticmTrace* trace = nullptr) {
    if (spec.num_reads < 1) throw std::invalid_argument("sample_pticm: num_reads must be >= 1");
    if (spec.pticm.icm_enabled && p.has_nonzero_bias())
        throw std::invalid_argument("sample_pticm: icm_enabled requires all-zero biases");
    if (p.num_vars() == 0) return detail::trivial_sample(p, spec.num_reads);
    if (spec.pticm.elite_states_per_replica < 1)
        throw std::invalid_argument("sample_pticm: elite_states_per_replica must be >= 1");

    const std::vector<double> betas = detail::resolve_ladder(p, spec.pticm);
    const int num_temps = static_cast<int>(betas.size());
    const int num_chains = spec.pticm.icm_enabled ? 2 : 1;
    const int first_tracked = spec.pticm.lower_half_only ? num_temps / 2 : 0;

    detail::Rng rng(detail::substream(spec.seed, 0));
    std::vector<std::vector<SpinConfig>> states(num_chains, std::vector<SpinConfig>(num_temps));
    std::vector<std::vector<double>> energies(num_chains, std::vector<double>(num_temps));
    for (int c = 0; c < num_chains; ++c)
        for (int k = 0; k < num_temps; ++k) {
            states[c][k] = detail::random_config(p.num_vars(), rng);
            energies[c][k] = evaluate_energy(p, states[c][k]);
        }

    std::vector<std::vector<detail::EliteBuffer>> elites(
        num_chains, std::vector<detail::EliteBuffer>(num_temps, {spec.pticm.elite_states_per_replica, {}}));
    auto record = [&]() {
        for (int c = 0; c < num_chains; ++c)
            for (int k = first_tracked; k < num_temps; ++k) {
                // fresh evaluation also re-syncs the incremental energy
                energies[c][k] = evaluate_energy(p, states[c][k]);
                elites[c][k].insert(states[c][k], energies[c][k]);
            }
    };
    record();

    for (int sweep = 0; sweep < spec.num_sweeps; ++sweep) {
        for (int c = 0; c < num_chains; ++c) {
            for (int k = 0; k < num_temps; ++k)
                detail::metropolis_sweep(p, states[c][k], betas[k], rng, &energies[c][k]);
            for (int k = 0; k + 1 < num_temps; ++k) {
                const double arg = (betas[k + 1] - betas[k]) * (energies[c][k + 1] - energies[c][k]);
                if (arg >= 0.0 || rng.uniform01() < std::exp(arg)) {
                    std::swap(states[c][k], states[c][k + 1]);
                    std::swap(energies[c][k], energies[c][k + 1]);
                }
            }
        }
        if (spec.pticm.icm_enabled) {
            for (int k = 0; k < num_temps; ++k) {
                const auto [d1, d2] = icm_move_inplace(states[0][k], states[1][k], p, rng);
                energies[0][k] += d1;
                energies[1][k] += d2;
            }
        }
        record();
        if (trace && trace->on_sweep) trace->on_sweep(states, energies);
    }

    Sample out;
    for (int c = 0; c < num_chains; ++c)
        for (int k = first_tracked; k < num_temps; ++k)
            for (auto& e : elites[c][k].entries) out.entries.push_back(e);
    out.sort_by_energy();
    if (static_cast<int>(out.size()) > spec.num_reads) {
        out.entries.resize(spec.num_reads);
    } else {
        while (static_cast<int>(out.size()) < spec.num_reads) out.entries.push_back(out.entries.front());
    }
    return out;
}

/// Exhaustive enumeration; returns the num_reads lowest-energy states
/// (ties by lexicographic config order), so entry 0 is the certified
/// global minimum. Refuses problems above the configured cap.
inline Sample brute_force_sample(const IsingProblem& p, const SamplerSpec& spec) {
    if (spec.num_reads < 1) throw std::invalid_argument("brute_force_sample: num_reads must be >= 1");
    const int n = p.num_vars();
    if (n > spec.brute_force_cap)
        throw std::runtime_error("brute_force_sample: " + std::to_string(n) + " variables exceeds cap " +
                                 std::to_string(spec.brute_force_cap));
    if (n == 0) return detail::trivial_sample(p, spec.num_reads);

    // worst candidate on top
    auto cmp = [](const SampleEntry& a, const SampleEntry& b) { return entry_less(a, b); };
    std::priority_queue<SampleEntry, std::vector<SampleEntry>, decltype(cmp)> heap(cmp);

    SpinConfig s(n, -1);
    double e = evaluate_energy(p, s);
    const std::uint64_t total = 1ULL << n;
    for (std::uint64_t m = 0;; ++m) {
        if (static_cast<int>(heap.size()) < spec.num_reads) {
            heap.push({s, e});
        } else {
            const SampleEntry& worst = heap.top();
            if (e < worst.energy || (e == worst.energy && config_less(s, worst.config))) {
                heap.pop();
                heap.push({s, e});
            }
        }
        if (m + 1 == total) break;
        // gray-code step: flip the lowest set bit position of m+1
        const int i = std::countr_zero(m + 1);
        double field = p.bias(i);
        for (const auto& [j, w] : p.neighbors(i)) field += w * s[j];
        e += -2.0 * s[i] * field;
        s[i] = static_cast<std::int8_t>(-s[i]);
    }

    Sample out;
    out.entries.resize(heap.size());
    for (std::size_t t = heap.size(); t-- > 0;) {
        out.entries[t] = heap.top();
        heap.pop();
    }
    // the walk above tracks energies incrementally; store exact values
    for (auto& entry : out.entries) entry.energy = evaluate_energy(p, entry.config);
    out.sorted = false;
    out.sort_by_energy();
    while (static_cast<int>(out.size()) < spec.num_reads) out.entries.push_back(out.entries.front());
    return out;
}

/// Dispatch on spec.kind. Deterministic: identical (problem, spec) give
/// a bit-identical sample.
inline Sample draw_sample(const IsingProblem& p, const SamplerSpec& spec) {
    switch (spec.kind) {
        case SamplerKind::sa:
            return sample_sa(p, spec);
        case SamplerKind::pticm:
            return sample_pticm(p, spec);
        case SamplerKind::brute_force:
            return brute_force_sample(p, spec);
    }
    throw std::logic_error("draw_sample: unknown sampler kind");
}

using SamplerFn = std::function<Sample(const IsingProblem&, const SamplerSpec&)>;

}  // namespace spvar
