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
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "spvar/rng.hpp"

namespace spvar {

struct GapResidual {
    double gap = 0.0;
    std::optional<double> residual;  // percent; empty when best_known == 0
};

inline GapResidual gap_and_residual(double best_found, double best_known) {
    GapResidual out;
    out.gap = best_found - best_known;
    if (best_known != 0.0) out.residual = 100.0 * (best_found - best_known) / std::abs(best_known);
    return out;
}

/// Recorded outcome of one instance: the best known energy and every
/// energy each start recorded. "Solved" compares against best_known with
/// a relative tolerance; integer-valued energies are exact in doubles,
/// so the default behaves as exact equality for them.
struct InstanceResult {
    double best_known = 0.0;
    std::vector<std::vector<double>> found_energies;  // per start
    long long total_sample_per_start = 0;
    double solved_tolerance = 1e-9;  // relative

    double best_found() const {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& start : found_energies)
            for (double e : start) best = std::min(best, e);
        return best;
    }

    bool energy_solves(double e) const {
        return e - best_known <= solved_tolerance * std::max(1.0, std::abs(best_known));
    }

    bool solved() const { return energy_solves(best_found()); }

    std::vector<bool> per_start_success() const {
        std::vector<bool> flags;
        flags.reserve(found_energies.size());
        for (const auto& start : found_energies) {
            bool hit = false;
            for (double e : start) hit |= energy_solves(e);
            flags.push_back(hit);
        }
        return flags;
    }
};

inline double fraction_solved(const std::vector<InstanceResult>& results) {
    if (results.empty()) throw std::invalid_argument("fraction_solved: empty result list");
    int solved = 0;
    for (const auto& r : results) solved += r.solved() ? 1 : 0;
    return static_cast<double>(solved) / static_cast<double>(results.size());
}

/// Sample size needed to observe an event of probability p at least once
/// with 99% confidence: ceil(ln 0.01 / ln(1 - p)).
inline long long r99(double p) {
    if (!(p > 0.0) || p > 1.0) throw std::domain_error("r99: p must lie in (0, 1]");
    if (p == 1.0) return 1;
    const double reads = std::log(0.01) / std::log1p(-p);
    return static_cast<long long>(std::ceil(reads));
}

/// SPVAR-adjusted R99: the per-start success rate gives the number of
/// starts needed at 99% confidence, scaled by the full sample each start
/// consumes. Empty when no start succeeded (unmeasurable; such instances
/// are excluded from medians).
inline std::optional<long long> r99_spvar(const std::vector<bool>& per_start_success,
                                          long long total_sample_per_start) {
    if (per_start_success.empty()) throw std::invalid_argument("r99_spvar: empty success list");
    if (total_sample_per_start < 1) throw std::invalid_argument("r99_spvar: bad sample size");
    long long hits = 0;
    for (bool b : per_start_success) hits += b ? 1 : 0;
    if (hits == 0) return std::nullopt;
    const double p = static_cast<double>(hits) / static_cast<double>(per_start_success.size());
    return r99(p) * total_sample_per_start;
}

/// Median as the lower-of-two order statistic for even sizes, which
/// keeps integer-valued inputs (like R99s) on actual data points.
inline double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median: empty input");
    std::sort(values.begin(), values.end());
    return values[(values.size() - 1) / 2];
}

struct BootstrapStats {
    double mean_of_medians = 0.0;
    double ci_low = 0.0;   // 2.5th percentile of the bootstrap medians
    double ci_high = 0.0;  // 97.5th percentile
};

/// B resamples with replacement, median of each; reports the mean of the
/// medians and the empirical central 95% interval. Each resample draws
/// from its own derived seed, so the result is independent of resample
/// evaluation order.
inline BootstrapStats bootstrap_median(const std::vector<double>& values, int B, std::uint64_t seed) {
    if (values.empty()) throw std::invalid_argument("bootstrap_median: empty input");
    if (B < 1) throw std::invalid_argument("bootstrap_median: B must be >= 1");
    const std::size_t n = values.size();
    std::vector<double> medians(B);
    for (int r = 0; r < B; ++r) {
        detail::Rng rng(detail::substream(seed, static_cast<std::uint64_t>(r)));
        std::vector<double> resample(n);
        for (std::size_t t = 0; t < n; ++t) resample[t] = values[rng.below(n)];
        medians[r] = median(std::move(resample));
    }
    BootstrapStats stats;
    double sum = 0.0;
    for (double m : medians) sum += m;
    stats.mean_of_medians = sum / B;
    std::sort(medians.begin(), medians.end());
    stats.ci_low = medians[static_cast<std::size_t>(std::floor(0.025 * (B - 1)))];
    stats.ci_high = medians[static_cast<std::size_t>(std::ceil(0.975 * (B - 1)))];
    return stats;
}

/// Aggregate metrics of an instance set.
struct MetricsReport {
    int num_instances = 0;
    double fraction_solved = 0.0;
    double median_gap = 0.0;
    std::optional<double> median_residual;    // empty if any best_known == 0
    std::optional<BootstrapStats> r99_stats;  // empty if nothing measurable
    int r99_unmeasurable = 0;                 // instances excluded from the R99 median
    bool r99_lower_bound = false;             // fewer than half solved: median is a lower bound
};

/// mode_spvar selects the per-start R99 accounting; otherwise p is the
/// per-read rate, estimated as the fraction of all recorded reads at the
/// best known energy.
inline MetricsReport compute_metrics(const std::vector<InstanceResult>& results, bool mode_spvar,
                                     int bootstrap_resamples, std::uint64_t seed) {
    MetricsReport report;
    report.num_instances = static_cast<int>(results.size());
    report.fraction_solved = fraction_solved(results);

    std::vector<double> gaps, residuals;
    bool residual_ok = true;
    std::vector<double> r99s;
    for (const auto& r : results) {
        const auto gr = gap_and_residual(r.best_found(), r.best_known);
        gaps.push_back(gr.gap);
        if (gr.residual)
            residuals.push_back(*gr.residual);
        else
            residual_ok = false;

        std::optional<long long> value;
        if (mode_spvar) {
            value = r99_spvar(r.per_start_success(), r.total_sample_per_start);
        } else {
            long long hits = 0, reads = 0;
            for (const auto& start : r.found_energies)
                for (double e : start) {
                    ++reads;
                    hits += r.energy_solves(e) ? 1 : 0;
                }
            if (hits > 0) value = r99(static_cast<double>(hits) / static_cast<double>(reads));
        }
        if (value)
            r99s.push_back(static_cast<double>(*value));
        else
            ++report.r99_unmeasurable;
    }

    report.median_gap = median(gaps);
    if (residual_ok && !residuals.empty()) report.median_residual = median(residuals);
    if (!r99s.empty()) report.r99_stats = bootstrap_median(r99s, bootstrap_resamples, seed);
    report.r99_lower_bound = report.fraction_solved < 0.5;
    return report;
}

}  // namespace spvar
