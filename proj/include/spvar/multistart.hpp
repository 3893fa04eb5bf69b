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

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "spvar/fixing.hpp"
#include "spvar/model.hpp"
#include "spvar/reduction.hpp"
#include "spvar/rng.hpp"
#include "spvar/samplers.hpp"

namespace spvar {

enum class SeedPhase : std::uint64_t { correlation = 0, fixing = 1, solving = 2, raw = 3 };

/// Stable, collision-free seed for one phase of one start. The pre-mix
/// input master + 4*start + phase + 1 is unique per (start, phase) and
/// the finalizer is a bijection, so distinct tuples never collide.
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t start_index, SeedPhase phase) {
    return detail::substream(master_seed, 4 * start_index + static_cast<std::uint64_t>(phase));
}

struct MultiStartParams {
    int num_starts = 1;
    int fixing_sample_size = 1;
    int solving_sample_size = 1;
    int correlation_sample_size = 0;  // used only in zero_bias_mode
    SpvarParams spvar;
    bool preprocess_leaves = false;   // tree elimination once, before the starts
    bool per_start_leaves = false;    // tree elimination after each start's fixing
    std::function<ReducedProblem(const IsingProblem&)> external_prefix_hook;  // optional plug-in
    bool zero_bias_mode = false;      // adds the correlation pre-fixing phase
    std::uint64_t master_seed = 0;

    /// Sample budget split per start: zero-bias spends 40% on
    /// correlation pre-fixing and divides the rest equally (remainder to
    /// solving); otherwise half fixing, half solving.
    static MultiStartParams from_total_budget(int total_sample_size, bool zero_bias) {
        MultiStartParams params;
        params.zero_bias_mode = zero_bias;
        if (zero_bias) {
            if (total_sample_size < 3)
                throw std::invalid_argument("from_total_budget: zero-bias budget must be >= 3");
            params.correlation_sample_size = total_sample_size * 4 / 10;
            params.fixing_sample_size = total_sample_size * 3 / 10;
            params.solving_sample_size =
                total_sample_size - params.correlation_sample_size - params.fixing_sample_size;
            params.correlation_sample_size = std::max(params.correlation_sample_size, 1);
            params.fixing_sample_size = std::max(params.fixing_sample_size, 1);
        } else {
            if (total_sample_size < 2)
                throw std::invalid_argument("from_total_budget: budget must be >= 2");
            params.fixing_sample_size = total_sample_size / 2;
            params.solving_sample_size = total_sample_size - params.fixing_sample_size;
        }
        return params;
    }

    int reads_per_start() const {
        return fixing_sample_size + solving_sample_size + (zero_bias_mode ? correlation_sample_size : 0);
    }

    void validate() const {
        if (num_starts < 1) throw std::invalid_argument("MultiStartParams: num_starts must be >= 1");
        if (fixing_sample_size < 1 || solving_sample_size < 1)
            throw std::invalid_argument("MultiStartParams: sample sizes must be >= 1");
        if (zero_bias_mode && correlation_sample_size < 1)
            throw std::invalid_argument("MultiStartParams: zero_bias_mode needs a correlation sample");
        spvar.validate();
    }
};

struct StartResult {
    std::vector<double> recorded_energies;  // correlation, fixing, solving phases in order
    double best_energy = 0.0;
    SpinConfig best_config;                 // original index space
    int fixed_count = 0;                    // variables removed by this start's reductions
    int component_count = 0;                // components of the problem handed to the solving phase
    std::vector<std::uint64_t> seeds;       // derived phase seeds, in phase order
};

struct MultiStartResult {
    std::vector<StartResult> per_start;
    SpinConfig best_config;
    double best_energy = 0.0;
    long long reads_used = 0;
};

namespace detail {

// Runs fn(0..n-1) on up to `jobs` threads. Tasks must be independent;
// callers index results by task id so the schedule cannot leak into the
// output.
inline void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int workers = std::min(jobs, n);
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

// ICM is only isoenergetic without fields; on biased problems PTICM
// degrades to plain parallel tempering.
inline SamplerSpec adjust_for_problem(const IsingProblem& p, SamplerSpec spec) {
    if (spec.kind == SamplerKind::pticm && spec.pticm.icm_enabled && p.has_nonzero_bias())
        spec.pticm.icm_enabled = false;
    return spec;
}

}  // namespace detail

/// Multi-start persistence fixing: optional global pre-processing, then
/// num_starts independent rounds of (correlation pre-fix on zero-bias
/// problems, persistence fix, solve the reduced problem), recording all
/// energies seen. Reductions fold constants into offsets, so energies
/// measured on reduced problems are directly original-space energies;
/// only configurations need extension. Starts are independent and the
/// aggregate reduces over them in index order, so the result is
/// bit-identical for any jobs count.
inline MultiStartResult run_multistart(const IsingProblem& p, const SamplerSpec& sampler_spec,
                                       const MultiStartParams& params, SamplerFn sampler = {}, int jobs = 1) {
    params.validate();
    if (!sampler) sampler = [](const IsingProblem& prob, const SamplerSpec& spec) { return draw_sample(prob, spec); };

    std::vector<ReducedProblem> global_layers;
    IsingProblem base = p;
    if (params.preprocess_leaves) {
        ReducedProblem rp = eliminate_leaves(base);
        base = rp.problem;
        global_layers.push_back(std::move(rp));
    }
    if (params.external_prefix_hook) {
        ReducedProblem rp = params.external_prefix_hook(base);
        base = rp.problem;
        global_layers.push_back(std::move(rp));
    }

    MultiStartResult result;
    result.per_start.resize(params.num_starts);

    auto run_one = [&](int s) {
        StartResult& start = result.per_start[s];
        std::vector<ReducedProblem> layers;  // this start's reductions, innermost last
        IsingProblem cur = base;

        double best_energy = 0.0;
        SpinConfig best_config;        // in the space current at capture time
        std::size_t best_depth = 0;    // start layers applied at capture time
        bool have_best = false;

        auto record = [&](const Sample& sample) {
            for (const auto& e : sample.entries) {
                start.recorded_energies.push_back(e.energy);
                if (!have_best || e.energy < best_energy) {
                    have_best = true;
                    best_energy = e.energy;
                    best_config = e.config;
                    best_depth = layers.size();
                }
            }
        };

        try {
            if (params.zero_bias_mode) {
                SamplerSpec spec = detail::adjust_for_problem(cur, sampler_spec);
                spec.num_reads = params.correlation_sample_size;
                spec.seed = derive_seed(params.master_seed, s, SeedPhase::correlation);
                start.seeds.push_back(spec.seed);
                const Sample sample = sampler(cur, spec);
                record(sample);
                SpvarOutcome out = correlation_prefix(cur, sample, params.spvar);
                start.fixed_count += out.fixed_count;
                cur = out.reduced.problem;
                layers.push_back(std::move(out.reduced));
            }

            {
                SamplerSpec spec = detail::adjust_for_problem(cur, sampler_spec);
                spec.num_reads = params.fixing_sample_size;
                spec.seed = derive_seed(params.master_seed, s, SeedPhase::fixing);
                start.seeds.push_back(spec.seed);
                const Sample sample = sampler(cur, spec);
                record(sample);
                SpvarParams eff = params.spvar;
                if (eff.adaptive_elite) eff.elite_threshold = adaptive_elite_threshold(cur, sample, eff);
                SpvarOutcome out = spvar_fix(cur, sample, eff);
                start.fixed_count += out.fixed_count;
                cur = out.reduced.problem;
                layers.push_back(std::move(out.reduced));
            }

            if (params.per_start_leaves) {
                ReducedProblem rp = eliminate_leaves(cur);
                if (rp.num_removed() > 0) {
                    start.fixed_count += rp.num_removed();
                    cur = rp.problem;
                    layers.push_back(std::move(rp));
                }
            }

            {
                SamplerSpec spec = detail::adjust_for_problem(cur, sampler_spec);
                spec.num_reads = params.solving_sample_size;
                spec.seed = derive_seed(params.master_seed, s, SeedPhase::solving);
                start.seeds.push_back(spec.seed);
                Sample sample = sampler(cur, spec);
                const auto comps = connected_components(cur);
                start.component_count = static_cast<int>(comps.size());
                if (comps.size() > 1) sample = merge_component_solutions(cur, sample);
                record(sample);
            }
        } catch (const std::exception& err) {
            throw std::runtime_error("multistart: start " + std::to_string(s) + ": " + err.what());
        }

        SpinConfig full = best_config;
        for (std::size_t d = best_depth; d-- > 0;) full = extend_solution(layers[d], full);
        for (std::size_t g = global_layers.size(); g-- > 0;) full = extend_solution(global_layers[g], full);
        start.best_energy = best_energy;
        start.best_config = std::move(full);
    };

    detail::parallel_for(params.num_starts, jobs, run_one);

    for (int s = 0; s < params.num_starts; ++s) {
        const StartResult& start = result.per_start[s];
        if (s == 0 || start.best_energy < result.best_energy) {
            result.best_energy = start.best_energy;
            result.best_config = start.best_config;
        }
    }
    result.reads_used = static_cast<long long>(params.num_starts) * params.reads_per_start();
    return result;
}

}  // namespace spvar
