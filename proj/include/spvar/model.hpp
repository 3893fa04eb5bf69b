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
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace spvar {

/// One spin per variable, each entry exactly -1 or +1.
using SpinConfig = std::vector<std::int8_t>;

/// Ising problem in the minimization convention:
///   E(s) = offset + sum_{(i,j) in couplers} J_ij s_i s_j + sum_i h_i s_i
/// with each unordered pair stored once (i < j). Diagonal entries are
/// rejected: under s_i^2 = 1 they are constants and belong in the offset.
class IsingProblem {
  public:
    IsingProblem() = default;
    explicit IsingProblem(int num_vars) : num_vars_(num_vars), biases_(num_vars, 0.0), neighbors_(num_vars) {
        if (num_vars < 0) throw std::invalid_argument("IsingProblem: negative num_vars");
    }

    int num_vars() const { return num_vars_; }
    double offset() const { return offset_; }
    void set_offset(double v) {
        check_finite(v);
        offset_ = v;
    }
    void add_offset(double v) {
        check_finite(v);
        offset_ += v;
    }

    double bias(int i) const {
        check_index(i);
        return biases_[i];
    }
    const std::vector<double>& biases() const { return biases_; }
    void set_bias(int i, double v) {
        check_index(i);
        check_finite(v);
        biases_[i] = v;
    }
    void add_bias(int i, double v) {
        check_index(i);
        check_finite(v);
        biases_[i] += v;
    }

    void add_coupler(int i, int j, double value) {
        check_index(i);
        check_index(j);
        check_finite(value);
        if (i == j)
            throw std::invalid_argument("IsingProblem: diagonal coupler (" + std::to_string(i) +
                                        "," + std::to_string(j) + "); fold constants into the offset");
        if (i > j) std::swap(i, j);
        auto [it, inserted] = couplers_.emplace(std::make_pair(i, j), value);
        if (!inserted)
            throw std::invalid_argument("IsingProblem: duplicate coupler (" + std::to_string(i) +
                                        "," + std::to_string(j) + ")");
        neighbors_[i].emplace_back(j, value);
        neighbors_[j].emplace_back(i, value);
    }

    bool has_coupler(int i, int j) const {
        if (i > j) std::swap(i, j);
        return couplers_.count({i, j}) != 0;
    }

    /// Couplers keyed by (i, j) with i < j, in ascending order.
    const std::map<std::pair<int, int>, double>& couplers() const { return couplers_; }

    /// (neighbor, coupling) pairs of variable i, in insertion order.
    const std::vector<std::pair<int, double>>& neighbors(int i) const {
        check_index(i);
        return neighbors_[i];
    }

    int degree(int i) const { return static_cast<int>(neighbors(i).size()); }

    bool has_nonzero_bias() const {
        for (double h : biases_)
            if (h != 0.0) return true;
        return false;
    }

    /// Largest |J| or |h|; 0 for the empty problem. Used to scale
    /// temperature ranges.
    double max_abs_coefficient() const {
        double m = 0.0;
        for (const auto& [ij, v] : couplers_) m = std::max(m, std::abs(v));
        for (double h : biases_) m = std::max(m, std::abs(h));
        return m;
    }

  private:
    static void check_finite(double v) {
        if (!std::isfinite(v)) throw std::invalid_argument("IsingProblem: non-finite value");
    }
    void check_index(int i) const {
        if (i < 0 || i >= num_vars_)
            throw std::out_of_range("IsingProblem: index " + std::to_string(i) + " out of range [0," +
                                    std::to_string(num_vars_) + ")");
    }

    int num_vars_ = 0;
    std::map<std::pair<int, int>, double> couplers_;
    std::vector<double> biases_;
    std::vector<std::vector<std::pair<int, double>>> neighbors_;
    double offset_ = 0.0;
};

/// QUBO in the minimization convention:
///   E(x) = offset + sum_{(i,j) in terms, i<=j} Q_ij x_i x_j
/// over x in {0,1}^N. Diagonal terms are the linear part (x_i^2 = x_i).
class QuboProblem {
  public:
    QuboProblem() = default;
    explicit QuboProblem(int num_vars) : num_vars_(num_vars) {
        if (num_vars < 0) throw std::invalid_argument("QuboProblem: negative num_vars");
    }

    int num_vars() const { return num_vars_; }
    double offset() const { return offset_; }
    void add_offset(double v) {
        check_finite(v);
        offset_ += v;
    }

    /// Accumulates into the (min(i,j), max(i,j)) term.
    void add_term(int i, int j, double value) {
        check_index(i);
        check_index(j);
        check_finite(value);
        if (i > j) std::swap(i, j);
        terms_[{i, j}] += value;
    }

    const std::map<std::pair<int, int>, double>& terms() const { return terms_; }

  private:
    static void check_finite(double v) {
        if (!std::isfinite(v)) throw std::invalid_argument("QuboProblem: non-finite value");
    }
    void check_index(int i) const {
        if (i < 0 || i >= num_vars_)
            throw std::out_of_range("QuboProblem: index " + std::to_string(i) + " out of range [0," +
                                    std::to_string(num_vars_) + ")");
    }

    int num_vars_ = 0;
    std::map<std::pair<int, int>, double> terms_;
    double offset_ = 0.0;
};

struct SampleEntry {
    SpinConfig config;
    double energy = 0.0;
};

/// Compares -1 before +1, first differing position decides.
inline bool config_less(const SpinConfig& a, const SpinConfig& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline bool entry_less(const SampleEntry& a, const SampleEntry& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    return config_less(a.config, b.config);
}

/// A multiset of spin configurations with their energies, the raw output
/// of every sampler.
struct Sample {
    std::vector<SampleEntry> entries;
    bool sorted = false;

    std::size_t size() const { return entries.size(); }
    bool empty() const { return entries.empty(); }

    void push_back(SpinConfig config, double energy) {
        entries.push_back({std::move(config), energy});
        sorted = false;
    }

    /// Ascending by energy; ties broken by lexicographic config order.
    void sort_by_energy() {
        if (sorted) return;
        std::sort(entries.begin(), entries.end(), entry_less);
        sorted = true;
    }

    const SampleEntry& best() const {
        if (entries.empty()) throw std::runtime_error("Sample: best() on empty sample");
        if (sorted) return entries.front();
        return *std::min_element(entries.begin(), entries.end(), entry_less);
    }

    std::vector<double> energies() const {
        std::vector<double> out;
        out.reserve(entries.size());
        for (const auto& e : entries) out.push_back(e.energy);
        return out;
    }
};

inline double evaluate_energy(const IsingProblem& p, const SpinConfig& config) {
    if (static_cast<int>(config.size()) != p.num_vars())
        throw std::invalid_argument("evaluate_energy: config has " + std::to_string(config.size()) +
                                    " spins, problem has " + std::to_string(p.num_vars()));
    double e = p.offset();
    for (const auto& [ij, v] : p.couplers()) e += v * config[ij.first] * config[ij.second];
    const auto& h = p.biases();
    for (int i = 0; i < p.num_vars(); ++i) e += h[i] * config[i];
    return e;
}

/// x entries in {0,1}.
inline double evaluate_qubo(const QuboProblem& q, const std::vector<std::int8_t>& x) {
    if (static_cast<int>(x.size()) != q.num_vars())
        throw std::invalid_argument("evaluate_qubo: assignment size mismatch");
    double e = q.offset();
    for (const auto& [ij, v] : q.terms()) e += v * x[ij.first] * x[ij.second];
    return e;
}

/// Change of variables x = (s+1)/2. Energies agree pointwise, so the
/// argmin sets map onto each other.
inline IsingProblem qubo_to_ising(const QuboProblem& q) {
    const int n = q.num_vars();
    std::vector<double> h(n, 0.0);
    std::map<std::pair<int, int>, double> j;
    double offset = q.offset();
    for (const auto& [ij, v] : q.terms()) {
        const auto [a, b] = ij;
        if (a == b) {
            h[a] += v / 2;
            offset += v / 2;
        } else {
            j[{a, b}] += v / 4;
            h[a] += v / 4;
            h[b] += v / 4;
            offset += v / 4;
        }
    }
    IsingProblem p(n);
    for (const auto& [ij, v] : j)
        if (v != 0.0) p.add_coupler(ij.first, ij.second, v);
    for (int i = 0; i < n; ++i) p.set_bias(i, h[i]);
    p.set_offset(offset);
    return p;
}

/// Inverse change of variables s = 2x - 1.
inline QuboProblem ising_to_qubo(const IsingProblem& p) {
    const int n = p.num_vars();
    QuboProblem q(n);
    double offset = p.offset();
    for (const auto& [ij, v] : p.couplers()) {
        const auto [a, b] = ij;
        q.add_term(a, b, 4 * v);
        q.add_term(a, a, -2 * v);
        q.add_term(b, b, -2 * v);
        offset += v;
    }
    for (int i = 0; i < n; ++i) {
        const double h = p.bias(i);
        if (h != 0.0) q.add_term(i, i, 2 * h);
        offset -= h;
    }
    q.add_offset(offset);
    return q;
}

namespace detail {

// Shortest text that parses back to exactly the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) throw std::runtime_error("format_double failed");
    return std::string(buf, ptr);
}

inline bool parse_double(std::string_view tok, double& out) {
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc{} && ptr == tok.data() + tok.size();
}

inline bool parse_int(std::string_view tok, long long& out) {
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc{} && ptr == tok.data() + tok.size();
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> toks;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t start = i;
        while (i < line.size() && line[i] != ' ' && line[i] != '\t' && line[i] != '\r') ++i;
        if (i > start) toks.push_back(line.substr(start, i - start));
    }
    return toks;
}

}  // namespace detail

/// Text instance format, one item per line: `i j value` with i<j for
/// couplers, `i i value` for biases. `#` starts a comment; the headers
/// `# vars <n>` and `# offset <v>` are recognized. Indices are 0-based.
inline IsingProblem parse_instance(std::string_view text) {
    struct Item {
        int i, j;
        double v;
        int line;
    };
    std::vector<Item> items;
    std::map<std::pair<int, int>, int> seen;  // pair -> first line
    long long declared_vars = -1;
    double offset = 0.0;
    int max_index = -1;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = text.find('\n', pos);
        std::string_view line = text.substr(pos, eol == std::string_view::npos ? text.size() - pos : eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() + 1 : eol + 1;
        ++line_no;

        auto toks = detail::split_ws(line);
        if (toks.empty()) continue;
        if (toks[0][0] == '#') {
            if (toks.size() >= 3 && toks[0] == "#" && toks[1] == "vars") {
                if (!detail::parse_int(toks[2], declared_vars) || declared_vars < 0)
                    throw std::runtime_error("parse_instance: line " + std::to_string(line_no) +
                                             ": bad vars header");
            } else if (toks.size() >= 3 && toks[0] == "#" && toks[1] == "offset") {
                if (!detail::parse_double(toks[2], offset))
                    throw std::runtime_error("parse_instance: line " + std::to_string(line_no) +
                                             ": bad offset header");
            }
            continue;  // other # lines are comments
        }

        long long i, j;
        double v;
        if (toks.size() != 3 || !detail::parse_int(toks[0], i) || !detail::parse_int(toks[1], j) ||
            !detail::parse_double(toks[2], v))
            throw std::runtime_error("parse_instance: line " + std::to_string(line_no) + ": malformed line");
        if (i < 0 || j < 0)
            throw std::runtime_error("parse_instance: line " + std::to_string(line_no) + ": negative index");
        if (i > j)
            throw std::runtime_error("parse_instance: line " + std::to_string(line_no) +
                                     ": couplers require i < j");
        auto [it, inserted] = seen.emplace(std::make_pair(static_cast<int>(i), static_cast<int>(j)), line_no);
        if (!inserted)
            throw std::runtime_error("parse_instance: line " + std::to_string(line_no) + ": duplicate pair (" +
                                     std::to_string(i) + "," + std::to_string(j) + ") first seen on line " +
                                     std::to_string(it->second));
        items.push_back({static_cast<int>(i), static_cast<int>(j), v, line_no});
        max_index = std::max(max_index, static_cast<int>(j));
    }

    const int num_vars = declared_vars >= 0 ? static_cast<int>(declared_vars) : max_index + 1;
    if (max_index >= num_vars)
        throw std::runtime_error("parse_instance: index " + std::to_string(max_index) +
                                 " exceeds declared vars " + std::to_string(num_vars));

    IsingProblem p(num_vars);
    p.set_offset(offset);
    for (const auto& it : items) {
        if (it.i == it.j)
            p.set_bias(it.i, it.v);
        else
            p.add_coupler(it.i, it.j, it.v);
    }
    return p;
}

/// Deterministic ordering: headers, then lines ascending by (i, j) with
/// bias lines keyed as (i, i). Zero biases are omitted, so the canonical
/// form round-trips through parse_instance.
inline std::string write_instance(const IsingProblem& p) {
    std::string out;
    out += "# vars " + std::to_string(p.num_vars()) + "\n";
    out += "# offset " + detail::format_double(p.offset()) + "\n";

    std::map<std::pair<int, int>, double> lines;
    for (int i = 0; i < p.num_vars(); ++i)
        if (p.bias(i) != 0.0) lines[{i, i}] = p.bias(i);
    for (const auto& [ij, v] : p.couplers())
        if (v != 0.0) lines[ij] = v;

    for (const auto& [ij, v] : lines)
        out += std::to_string(ij.first) + " " + std::to_string(ij.second) + " " + detail::format_double(v) + "\n";
    return out;
}

}  // namespace spvar
