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
#include "oracles.hpp"
#include "spvar/model.hpp"

using namespace spvar;

TEST_CASE("evaluate_energy counts each coupler once") {
    IsingProblem p(2);
    p.add_coupler(0, 1, 1.0);
    CHECK(evaluate_energy(p, {1, 1}) == 1.0);
    CHECK(evaluate_energy(p, {1, -1}) == -1.0);
}

TEST_CASE("evaluate_energy on a biased chain") {
    // J_01 = 2, J_12 = -1, h = (1, 0, 0)
    IsingProblem p(3);
    p.add_coupler(0, 1, 2.0);
    p.add_coupler(1, 2, -1.0);
    p.set_bias(0, 1.0);
    // s = (-1, +1, +1): 2*(-1) + (-1)*1 + 1*(-1) = -4
    CHECK(evaluate_energy(p, {-1, 1, 1}) == -4.0);
}

TEST_CASE("evaluate_energy rejects mismatched config") {
    IsingProblem p(3);
    CHECK_THROWS_AS(evaluate_energy(p, {1, 1}), std::invalid_argument);
}

TEST_CASE("diagonal couplers and duplicates are rejected") {
    IsingProblem p(3);
    CHECK_THROWS_AS(p.add_coupler(1, 1, 1.0), std::invalid_argument);
    p.add_coupler(0, 1, 1.0);
    CHECK_THROWS_AS(p.add_coupler(1, 0, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(p.add_coupler(0, 3, 1.0), std::out_of_range);
    CHECK_THROWS_AS(p.set_bias(0, std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST_CASE("zero-bias energy has global flip symmetry") {
    auto p = oracles::random_int_problem(8, 0.5, 3, 17, /*zero_bias=*/true);
    spvar::detail::Rng rng(5);
    for (int t = 0; t < 20; ++t) {
        SpinConfig s(8);
        for (auto& v : s) v = rng.spin();
        SpinConfig flipped(8);
        for (int i = 0; i < 8; ++i) flipped[i] = -s[i];
        CHECK(evaluate_energy(p, s) == evaluate_energy(p, flipped));
    }
}

TEST_CASE("qubo_to_ising hand cases") {
    SECTION("diagonal only") {
        QuboProblem q(1);
        q.add_term(0, 0, 1.0);
        const auto p = qubo_to_ising(q);
        CHECK(p.bias(0) == 0.5);
        CHECK(p.offset() == 0.5);
        CHECK(p.couplers().empty());
    }
    SECTION("empty") {
        QuboProblem q(2);
        const auto p = qubo_to_ising(q);
        CHECK(p.offset() == 0.0);
        CHECK(!p.has_nonzero_bias());
        CHECK(p.couplers().empty());
    }
    SECTION("single off-diagonal term") {
        QuboProblem q(2);
        q.add_term(0, 1, 4.0);
        const auto p = qubo_to_ising(q);
        CHECK(p.couplers().at({0, 1}) == 1.0);
        CHECK(p.bias(0) == 1.0);
        CHECK(p.bias(1) == 1.0);
        CHECK(p.offset() == 1.0);
        // all four assignments agree under x = (s+1)/2
        for (int mask = 0; mask < 4; ++mask) {
            std::vector<std::int8_t> x{static_cast<std::int8_t>(mask & 1),
                                       static_cast<std::int8_t>((mask >> 1) & 1)};
            SpinConfig s{static_cast<std::int8_t>(2 * x[0] - 1), static_cast<std::int8_t>(2 * x[1] - 1)};
            CHECK(evaluate_qubo(q, x) == evaluate_energy(p, s));
        }
    }
}

TEST_CASE("ising/qubo round-trip preserves every energy") {
    SECTION("zero problem") {
        const IsingProblem p(3);
        const auto back = qubo_to_ising(ising_to_qubo(p));
        CHECK(back.offset() == 0.0);
        CHECK(back.couplers().empty());
    }
    SECTION("single coupler, all four configs") {
        IsingProblem p(2);
        p.add_coupler(0, 1, 1.0);
        const auto back = qubo_to_ising(ising_to_qubo(p));
        for (std::uint64_t mask = 0; mask < 4; ++mask) {
            const auto s = oracles::config_from_mask(mask, 2);
            CHECK(evaluate_energy(p, s) == evaluate_energy(back, s));
        }
    }
    SECTION("random 6-var integer problem, all 64 configs") {
        const auto p = oracles::random_int_problem(6, 0.6, 4, 99);
        const auto q = ising_to_qubo(p);
        const auto back = qubo_to_ising(q);
        for (std::uint64_t mask = 0; mask < 64; ++mask) {
            const auto s = oracles::config_from_mask(mask, 6);
            std::vector<std::int8_t> x(6);
            for (int i = 0; i < 6; ++i) x[i] = s[i] == 1 ? 1 : 0;
            CHECK(evaluate_energy(p, s) == evaluate_qubo(q, x));
            CHECK(evaluate_energy(p, s) == evaluate_energy(back, s));
        }
    }
}

TEST_CASE("parse_instance basics") {
    const auto p = parse_instance("0 1 -1\n1 1 2\n");
    CHECK(p.num_vars() == 2);
    CHECK(p.couplers().at({0, 1}) == -1.0);
    CHECK(p.bias(1) == 2.0);
    CHECK(p.bias(0) == 0.0);
}

TEST_CASE("parse_instance errors carry line numbers") {
    using Catch::Matchers::ContainsSubstring;
    CHECK_THROWS_WITH(parse_instance("0 0 1\n0 0 1\n"), ContainsSubstring("line 2") && ContainsSubstring("duplicate"));
    CHECK_THROWS_WITH(parse_instance("0 1 x\n"), ContainsSubstring("line 1"));
    CHECK_THROWS_WITH(parse_instance("1 0 1\n"), ContainsSubstring("i < j"));
    CHECK_THROWS_WITH(parse_instance("# vars 2\n0 5 1\n"), ContainsSubstring("exceeds"));
}

TEST_CASE("parse_instance accepts comments and headers") {
    const auto p = parse_instance("# a comment\n# vars 4\n# offset -2.5\n0 1 3\n");
    CHECK(p.num_vars() == 4);
    CHECK(p.offset() == -2.5);
    CHECK(p.couplers().at({0, 1}) == 3.0);
}

TEST_CASE("write/parse round-trip") {
    SECTION("empty problem is header-only") {
        const IsingProblem p(0);
        const auto text = write_instance(p);
        for (char c : text)
            if (c == '\n') continue;
        CHECK(text.find("# vars 0") != std::string::npos);
        const auto back = parse_instance(text);
        CHECK(back.num_vars() == 0);
    }
    SECTION("single bias is one line") {
        IsingProblem p(1);
        p.set_bias(0, -2.0);
        const auto text = write_instance(p);
        CHECK(text == "# vars 1\n# offset 0\n0 0 -2\n");
    }
    SECTION("random 10-var problem is reproduced exactly") {
        auto p = oracles::random_int_problem(10, 0.4, 5, 1234);
        p.set_offset(3.25);
        const auto back = parse_instance(write_instance(p));
        CHECK(back.num_vars() == p.num_vars());
        CHECK(back.offset() == p.offset());
        CHECK(back.couplers() == p.couplers());
        CHECK(back.biases() == p.biases());
        CHECK(write_instance(back) == write_instance(p));
    }
    SECTION("non-dyadic reals survive the round trip") {
        IsingProblem p(2);
        p.add_coupler(0, 1, 0.1234567890123);
        p.set_bias(0, -0.42);
        const auto back = parse_instance(write_instance(p));
        CHECK(back.couplers().at({0, 1}) == 0.1234567890123);
        CHECK(back.bias(0) == -0.42);
    }
}

TEST_CASE("sample sorts by energy with lexicographic ties") {
    Sample s;
    s.push_back({1, 1}, 2.0);
    s.push_back({1, -1}, -1.0);
    s.push_back({-1, 1}, -1.0);
    s.sort_by_energy();
    CHECK(s.entries[0].config == SpinConfig{-1, 1});
    CHECK(s.entries[1].config == SpinConfig{1, -1});
    CHECK(s.entries[2].energy == 2.0);
    CHECK(s.best().energy == -1.0);
}
