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

#include "catch2/catch_amalgamated.hpp"
#include "spvar/metrics.hpp"
#include "spvar/rng.hpp"

using namespace spvar;

TEST_CASE("gap and residual") {
    const auto a = gap_and_residual(-98.0, -100.0);
    CHECK(a.gap == 2.0);
    CHECK(a.residual.value() == 2.0);

    const auto b = gap_and_residual(-4.0, -4.0);
    CHECK(b.gap == 0.0);
    CHECK(b.residual.value() == 0.0);

    const auto c = gap_and_residual(1.0, 0.0);
    CHECK(c.gap == 1.0);
    CHECK(!c.residual.has_value());
}

TEST_CASE("fraction_solved") {
    auto make = [](double known, double found) {
        InstanceResult r;
        r.best_known = known;
        r.found_energies = {{found}};
        r.total_sample_per_start = 1;
        return r;
    };
    CHECK(fraction_solved({make(-3, -3), make(-5, -5)}) == 1.0);
    CHECK(fraction_solved({make(-3, -2), make(-5, -4)}) == 0.0);
    CHECK(fraction_solved({make(-3, -3), make(-5, -5), make(-1, -1), make(-2, 0)}) == 0.75);
    CHECK_THROWS_AS(fraction_solved({}), std::invalid_argument);
}

TEST_CASE("r99 formula") {
    CHECK(r99(1.0) == 1);
    CHECK(r99(0.5) == 7);
    CHECK(r99(0.01) == 459);
    CHECK(r99(0.99) >= 1);
    CHECK_THROWS_AS(r99(0.0), std::domain_error);
    CHECK_THROWS_AS(r99(-0.1), std::domain_error);
    CHECK_THROWS_AS(r99(1.1), std::domain_error);
    // non-increasing in p
    long long prev = r99(0.001);
    for (double p = 0.01; p <= 1.0; p += 0.01) {
        const long long cur = r99(std::min(p, 1.0));
        CHECK(cur <= prev);
        prev = cur;
    }
}

TEST_CASE("r99 against the Bernoulli definition") {
    // r99(p) is the least r with 1 - (1-p)^r >= 0.99; check the exact
    // bounds and that a Monte Carlo agrees with the analytic hit rate
    for (double p : {0.5, 0.1, 0.01}) {
        const long long reads = r99(p);
        const double hit_exact = 1.0 - std::pow(1.0 - p, static_cast<double>(reads));
        CHECK(hit_exact >= 0.99);
        if (reads > 1) CHECK(1.0 - std::pow(1.0 - p, static_cast<double>(reads - 1)) < 0.99);

        detail::Rng rng(static_cast<std::uint64_t>(p * 1e6));
        const int trials = 200000;
        int hit_within = 0;
        for (int t = 0; t < trials; ++t) {
            long long first = 0;
            do {
                ++first;
            } while (rng.uniform01() >= p);
            hit_within += first <= reads ? 1 : 0;
        }
        const double observed = hit_within / static_cast<double>(trials);
        const double sigma = std::sqrt(hit_exact * (1.0 - hit_exact) / trials);
        CHECK(std::abs(observed - hit_exact) <= 4.0 * sigma + 1e-9);
    }
}

TEST_CASE("r99_spvar scales by the per-start sample") {
    CHECK(r99_spvar({true, false, true, false}, 50).value() == 350);
    CHECK(r99_spvar({true, true, true}, 100).value() == 100);
    CHECK(!r99_spvar({false, false}, 10).has_value());
    CHECK_THROWS_AS(r99_spvar({}, 10), std::invalid_argument);
}

TEST_CASE("median uses the lower-of-two convention") {
    CHECK(median({3.0}) == 3.0);
    CHECK(median({1.0, 2.0}) == 1.0);
    CHECK(median({5.0, 1.0, 3.0}) == 3.0);
    CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.0);
}

TEST_CASE("bootstrap_median") {
    SECTION("constant list") {
        const auto stats = bootstrap_median({4.0, 4.0, 4.0}, 100, 1);
        CHECK(stats.mean_of_medians == 4.0);
        CHECK(stats.ci_low == 4.0);
        CHECK(stats.ci_high == 4.0);
    }
    SECTION("singleton") {
        const auto stats = bootstrap_median({7.0}, 1000, 2);
        CHECK(stats.mean_of_medians == 7.0);
    }
    SECTION("B = 1 is deterministic under seed") {
        const std::vector<double> values{1, 9, 4, 6, 2};
        const auto a = bootstrap_median(values, 1, 77);
        const auto b = bootstrap_median(values, 1, 77);
        CHECK(a.mean_of_medians == b.mean_of_medians);
        CHECK(a.ci_low == a.ci_high);
    }
    SECTION("1..100 concentrates near 50") {
        std::vector<double> values(100);
        for (int i = 0; i < 100; ++i) values[i] = i + 1;
        const auto stats = bootstrap_median(values, 1000, 3);
        CHECK(std::abs(stats.mean_of_medians - 50.5) <= 2.0);
        CHECK(stats.ci_low < stats.mean_of_medians);
        CHECK(stats.ci_high > stats.mean_of_medians);
    }
}

TEST_CASE("compute_metrics aggregates a small fixture") {
    // four instances, hand-checkable: two solved, two not
    std::vector<InstanceResult> results;
    {
        InstanceResult r;  // solved in start 0 of 2
        r.best_known = -10;
        r.found_energies = {{-10, -9}, {-8}};
        r.total_sample_per_start = 3;
        results.push_back(r);
    }
    {
        InstanceResult r;  // solved in both starts
        r.best_known = -6;
        r.found_energies = {{-6}, {-6, -5}};
        r.total_sample_per_start = 3;
        results.push_back(r);
    }
    {
        InstanceResult r;  // gap 2
        r.best_known = -8;
        r.found_energies = {{-6}, {-5}};
        r.total_sample_per_start = 3;
        results.push_back(r);
    }
    {
        InstanceResult r;  // gap 4
        r.best_known = -8;
        r.found_energies = {{-4}, {-4}};
        r.total_sample_per_start = 3;
        results.push_back(r);
    }

    const auto report = compute_metrics(results, /*mode_spvar=*/true, 200, 5);
    CHECK(report.num_instances == 4);
    CHECK(report.fraction_solved == 0.5);
    // gaps are {0, 0, 2, 4}; lower-median = 0
    CHECK(report.median_gap == 0.0);
    // residuals are {0, 0, 25, 50}
    CHECK(report.median_residual.value() == 0.0);
    // instance 0: p_s = 1/2 -> 7 starts * 3; instance 1: p_s = 1 -> 3
    CHECK(report.r99_unmeasurable == 2);
    REQUIRE(report.r99_stats.has_value());
    CHECK(report.r99_stats->ci_low >= 3.0);
    CHECK(report.r99_stats->ci_high <= 21.0);
    CHECK(!report.r99_lower_bound);

    const auto raw = compute_metrics(results, /*mode_spvar=*/false, 200, 5);
    // instance 0: 1 of 3 reads at best -> r99(1/3)
    CHECK(raw.r99_unmeasurable == 2);
    CHECK(raw.fraction_solved == 0.5);
}
