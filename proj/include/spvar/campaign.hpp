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

// Batch campaigns behind the CLI: instance-set generation, solve runs
// (raw sampler or multi-start persistence fixing, budget-matched), and
// metric reports. Configs are single JSON documents; results are
// line-delimited JSON records so partial campaigns stay readable.

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "spvar/generators.hpp"
#include "spvar/metrics.hpp"
#include "spvar/multistart.hpp"

namespace spvar {

using nlohmann::json;

namespace detail {

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    const auto parent = std::filesystem::path(path).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

inline std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

inline std::string config_string(const SpinConfig& s) {
    std::string out;
    out.reserve(s.size());
    for (auto v : s) out.push_back(v == 1 ? '+' : '-');
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// generate

struct GenerateConfig {
    std::string family;  // weak_strong | reduced_degeneracy | u_range | lattice3d | maxksat
    int count = 1;
    std::string out_dir = ".";
    std::string prefix;  // defaults to the family name
    std::uint64_t seed = 0;

    int grid = 1;
    double h_w = -0.42;
    int m = 2;
    int n = 5;
    bool nonzero_bias = true;
    int r = 10;
    int L = 4;
    std::string distribution = "gaussian";
    int k = 3;
    int num_literals = 50;
    int num_clauses = 100;

    static GenerateConfig from_json(const json& j) {
        GenerateConfig c;
        c.family = j.at("family").get<std::string>();
        c.count = j.value("count", c.count);
        c.out_dir = j.value("out_dir", c.out_dir);
        c.prefix = j.value("prefix", c.family);
        c.seed = j.value("seed", c.seed);
        c.grid = j.value("grid", c.grid);
        c.h_w = j.value("h_w", c.h_w);
        c.m = j.value("m", c.m);
        c.n = j.value("n", c.n);
        c.nonzero_bias = j.value("nonzero_bias", c.nonzero_bias);
        c.r = j.value("r", c.r);
        c.L = j.value("L", c.L);
        c.distribution = j.value("distribution", c.distribution);
        c.k = j.value("k", c.k);
        c.num_literals = j.value("num_literals", c.num_literals);
        c.num_clauses = j.value("num_clauses", c.num_clauses);
        return c;
    }
};

struct GeneratedSet {
    std::vector<std::string> instance_paths;
    std::string metadata_path;
};

/// Writes `count` instance files plus a JSONL metadata sidecar; the i-th
/// instance uses the i-th substream of the configured seed, so reruns
/// are byte-identical.
inline GeneratedSet cmd_generate(const GenerateConfig& cfg) {
    if (cfg.count < 1) throw std::invalid_argument("cmd_generate: count must be >= 1");
    GeneratedSet out;
    std::string metadata;
    for (int i = 0; i < cfg.count; ++i) {
        const std::uint64_t inst_seed = detail::substream(cfg.seed, static_cast<std::uint64_t>(i));
        char suffix[16];
        std::snprintf(suffix, sizeof(suffix), "_%04d", i);
        const std::string id = cfg.prefix + suffix;

        IsingProblem p;
        json meta{{"instance_id", id}, {"family", cfg.family}, {"seed", inst_seed}};
        if (cfg.family == "weak_strong") {
            p = gen_weak_strong(cfg.grid, cfg.h_w, inst_seed);
            meta["grid"] = cfg.grid;
            meta["h_w"] = cfg.h_w;
        } else if (cfg.family == "reduced_degeneracy") {
            p = gen_reduced_degeneracy(cfg.m, cfg.n, cfg.nonzero_bias, inst_seed);
            meta["m"] = cfg.m;
            meta["n"] = cfg.n;
            meta["nonzero_bias"] = cfg.nonzero_bias;
        } else if (cfg.family == "u_range") {
            p = gen_u_range(cfg.m, cfg.r, inst_seed);
            meta["m"] = cfg.m;
            meta["r"] = cfg.r;
        } else if (cfg.family == "lattice3d") {
            const auto dist = cfg.distribution == "bimodal" ? CouplerDistribution::bimodal
                                                            : CouplerDistribution::gaussian;
            p = gen_3d_lattice(cfg.L, dist, inst_seed);
            meta["L"] = cfg.L;
            meta["distribution"] = cfg.distribution;
        } else if (cfg.family == "maxksat") {
            const auto inst = gen_maxksat(cfg.k, cfg.num_literals, cfg.num_clauses, inst_seed);
            const auto [q, info] = maxksat_to_qubo(inst);
            p = qubo_to_ising(q);
            meta["k"] = cfg.k;
            meta["num_literals"] = cfg.num_literals;
            meta["num_clauses"] = cfg.num_clauses;
            meta["num_aux"] = info.num_aux;
            meta["phi"] = inst.phi;
        } else {
            throw std::invalid_argument("cmd_generate: unknown family '" + cfg.family + "'");
        }

        const std::string path = (std::filesystem::path(cfg.out_dir) / (id + ".txt")).string();
        meta["path"] = path;
        meta["num_vars"] = p.num_vars();
        detail::write_text_file(path, write_instance(p));
        out.instance_paths.push_back(path);
        metadata += meta.dump() + "\n";
    }
    out.metadata_path = (std::filesystem::path(cfg.out_dir) / (cfg.prefix + "_meta.jsonl")).string();
    detail::write_text_file(out.metadata_path, metadata);
    return out;
}

// ---------------------------------------------------------------------------
// solve

struct SolveConfig {
    std::vector<std::string> instances;
    std::string mode = "spvar";  // raw | spvar
    SamplerSpec sampler;
    MultiStartParams multistart;
    std::uint64_t master_seed = 0;
    int jobs = 1;
    std::string out;

    static SolveConfig from_json(const json& j) {
        SolveConfig c;
        for (const auto& entry : j.at("instances")) c.instances.push_back(entry.get<std::string>());
        c.mode = j.value("mode", c.mode);
        if (c.mode != "raw" && c.mode != "spvar")
            throw std::invalid_argument("solve config: mode must be raw or spvar");
        c.master_seed = j.value("seed", c.master_seed);
        c.jobs = j.value("jobs", c.jobs);
        c.out = j.value("out", c.out);

        if (j.contains("sampler")) {
            const auto& s = j.at("sampler");
            const std::string kind = s.value("kind", "sa");
            if (kind == "sa")
                c.sampler.kind = SamplerKind::sa;
            else if (kind == "pticm")
                c.sampler.kind = SamplerKind::pticm;
            else if (kind == "bruteforce" || kind == "brute_force")
                c.sampler.kind = SamplerKind::brute_force;
            else
                throw std::invalid_argument("solve config: unknown sampler kind '" + kind + "'");
            c.sampler.num_sweeps = s.value("num_sweeps", c.sampler.num_sweeps);
            if (s.contains("beta_start")) c.sampler.sa_schedule.beta_start = s.at("beta_start").get<double>();
            if (s.contains("beta_end")) c.sampler.sa_schedule.beta_end = s.at("beta_end").get<double>();
            if (s.value("schedule", "geometric") == "linear") c.sampler.sa_schedule.kind = ScheduleKind::linear;
            c.sampler.pticm.num_replicas = s.value("num_replicas", c.sampler.pticm.num_replicas);
            c.sampler.pticm.icm_enabled = s.value("icm", c.sampler.pticm.icm_enabled);
            c.sampler.pticm.elite_states_per_replica =
                s.value("elite_states_per_replica", c.sampler.pticm.elite_states_per_replica);
            c.sampler.pticm.lower_half_only = s.value("lower_half_only", c.sampler.pticm.lower_half_only);
            if (s.contains("beta_min")) c.sampler.pticm.beta_min = s.at("beta_min").get<double>();
            if (s.contains("beta_max")) c.sampler.pticm.beta_max = s.at("beta_max").get<double>();
            c.sampler.brute_force_cap = s.value("brute_force_cap", c.sampler.brute_force_cap);
        }

        const auto& ms = j.at("multistart");
        const bool zero_bias = ms.value("zero_bias_mode", false);
        if (ms.contains("total_sample_size")) {
            c.multistart = MultiStartParams::from_total_budget(ms.at("total_sample_size").get<int>(), zero_bias);
        } else {
            c.multistart.zero_bias_mode = zero_bias;
            c.multistart.fixing_sample_size = ms.at("fixing_sample_size").get<int>();
            c.multistart.solving_sample_size = ms.at("solving_sample_size").get<int>();
            c.multistart.correlation_sample_size = ms.value("correlation_sample_size", 0);
        }
        c.multistart.num_starts = ms.value("num_starts", 1);
        c.multistart.preprocess_leaves = ms.value("preprocess_leaves", false);
        c.multistart.per_start_leaves = ms.value("per_start_leaves", false);
        c.multistart.spvar.fixing_threshold = ms.value("fixing_threshold", 1.0);
        c.multistart.spvar.elite_threshold = ms.value("elite_threshold", 0.2);
        c.multistart.spvar.adaptive_elite = ms.value("adaptive_elite", false);
        c.multistart.spvar.correlation_threshold = ms.value("correlation_threshold", 1.0);
        c.multistart.spvar.correlation_elite_threshold = ms.value("correlation_elite_threshold", 0.2);
        return c;
    }
};

namespace detail {

inline json energy_counts_json(const std::vector<double>& energies) {
    std::map<double, long long> counts;
    for (double e : energies) ++counts[e];
    json arr = json::array();
    for (const auto& [e, c] : counts) arr.push_back({e, c});
    return arr;
}

inline std::string energies_digest(const std::vector<std::vector<double>>& per_start) {
    std::string blob;
    for (const auto& start : per_start) {
        for (double e : start) {
            blob += format_double(e);
            blob.push_back(',');
        }
        blob.push_back(';');
    }
    return hex64(fnv1a64(blob));
}

}  // namespace detail

/// Solves every instance and returns one JSON record each, in the
/// configured order regardless of the jobs count. Raw mode runs the
/// sampler alone with the full multi-start read budget so raw/spvar
/// comparisons are effort-matched; for the sweep-driven pticm sampler
/// the raw run also inherits the sweeps of every invocation the spvar
/// pipeline would have made. Unreadable instances produce an error
/// record and the campaign continues.
inline std::vector<json> cmd_solve(const SolveConfig& cfg) {
    cfg.multistart.validate();
    const int n = static_cast<int>(cfg.instances.size());
    std::vector<json> records(n);

    auto solve_one = [&](int idx) {
        const std::string& path = cfg.instances[idx];
        const std::string id = std::filesystem::path(path).stem().string();
        json rec{{"instance_id", id}, {"mode", cfg.mode}};
        const auto t0 = std::chrono::steady_clock::now();
        try {
            const IsingProblem p = parse_instance(detail::read_text_file(path));
            const std::uint64_t instance_seed = detail::substream(cfg.master_seed, static_cast<std::uint64_t>(idx));
            rec["num_vars"] = p.num_vars();
            rec["seeds"] = json{{"master", cfg.master_seed}, {"instance", instance_seed}};
            const long long total_budget =
                static_cast<long long>(cfg.multistart.num_starts) * cfg.multistart.reads_per_start();

            if (cfg.mode == "spvar") {
                MultiStartParams params = cfg.multistart;
                params.master_seed = instance_seed;
                const auto result = run_multistart(p, cfg.sampler, params);

                std::vector<std::vector<double>> per_start_energies;
                json fixed_counts = json::array(), component_counts = json::array();
                json per_start_best = json::array(), phase_seeds = json::array();
                for (const auto& start : result.per_start) {
                    per_start_energies.push_back(start.recorded_energies);
                    fixed_counts.push_back(start.fixed_count);
                    component_counts.push_back(start.component_count);
                    per_start_best.push_back(start.best_energy);
                    phase_seeds.push_back(start.seeds);
                }
                rec["best_energy"] = result.best_energy;
                rec["best_config"] = detail::config_string(result.best_config);
                rec["energies_digest"] = detail::energies_digest(per_start_energies);
                rec["fixed_counts"] = std::move(fixed_counts);
                rec["component_counts"] = std::move(component_counts);
                rec["per_start_best"] = std::move(per_start_best);
                rec["seeds"]["starts"] = std::move(phase_seeds);
                rec["reads_per_start"] = cfg.multistart.reads_per_start();
                rec["reads_used"] = result.reads_used;
                std::vector<double> all;
                for (const auto& s : per_start_energies) all.insert(all.end(), s.begin(), s.end());
                rec["energy_counts"] = detail::energy_counts_json(all);
            } else {
                SamplerSpec spec = detail::adjust_for_problem(p, cfg.sampler);
                spec.num_reads = static_cast<int>(total_budget);
                spec.seed = derive_seed(instance_seed, 0, SeedPhase::raw);
                if (spec.kind == SamplerKind::pticm) {
                    const int invocations =
                        cfg.multistart.num_starts * (cfg.multistart.zero_bias_mode ? 3 : 2);
                    spec.num_sweeps = cfg.sampler.num_sweeps * invocations;
                }
                const Sample sample = draw_sample(p, spec);
                const auto& best = sample.best();
                rec["best_energy"] = best.energy;
                rec["best_config"] = detail::config_string(best.config);
                rec["energies_digest"] = detail::energies_digest({sample.energies()});
                rec["fixed_counts"] = json::array();
                rec["component_counts"] = json::array();
                rec["per_start_best"] = json::array({best.energy});
                rec["seeds"]["starts"] = json::array({json::array({spec.seed})});
                rec["reads_per_start"] = total_budget;
                rec["reads_used"] = total_budget;
                rec["energy_counts"] = detail::energy_counts_json(sample.energies());
            }
        } catch (const std::exception& err) {
            rec["error"] = err.what();
        }
        const auto t1 = std::chrono::steady_clock::now();
        rec["wall_time_ms"] = std::chrono::duration<double, std::milli>(t1 - t0).count();
        records[idx] = std::move(rec);
    };

    detail::parallel_for(n, cfg.jobs, solve_one);

    if (!cfg.out.empty()) {
        std::string text;
        for (const auto& rec : records) text += rec.dump() + "\n";
        detail::write_text_file(cfg.out, text);
    }
    return records;
}

// ---------------------------------------------------------------------------
// metrics

struct MetricsConfig {
    std::vector<std::string> results_files;
    std::string best_known_path;
    std::string out;
    int bootstrap_resamples = 1000;
    std::uint64_t seed = 0;
    double solved_tolerance = 1e-9;

    static MetricsConfig from_json(const json& j) {
        MetricsConfig c;
        for (const auto& entry : j.at("results")) c.results_files.push_back(entry.get<std::string>());
        c.best_known_path = j.at("best_known").get<std::string>();
        c.out = j.value("out", c.out);
        c.bootstrap_resamples = j.value("bootstrap_resamples", c.bootstrap_resamples);
        c.seed = j.value("seed", c.seed);
        c.solved_tolerance = j.value("solved_tolerance", c.solved_tolerance);
        return c;
    }
};

namespace detail {

inline std::vector<json> read_jsonl(const std::string& path) {
    std::vector<json> records;
    std::istringstream in(read_text_file(path));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        records.push_back(json::parse(line));
    }
    return records;
}

// best-known energies from either a JSON object {id: energy} or a
// results JSONL (e.g. an exhaustive-sampler campaign)
inline std::map<std::string, double> read_best_known(const std::string& path) {
    std::map<std::string, double> best;
    const std::string text = read_text_file(path);
    try {
        const json doc = json::parse(text);
        if (doc.is_object() && !doc.contains("instance_id")) {
            for (const auto& [key, value] : doc.items()) best[key] = value.get<double>();
            return best;
        }
    } catch (const json::parse_error&) {
        // fall through to JSONL
    }
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const json rec = json::parse(line);
        if (rec.contains("error")) continue;
        best[rec.at("instance_id").get<std::string>()] = rec.at("best_energy").get<double>();
    }
    return best;
}

}  // namespace detail

/// One report per (results file, mode). Instances without a best-known
/// energy (or with error records) are excluded and listed.
inline std::vector<json> cmd_metrics(const MetricsConfig& cfg) {
    const auto best_known = detail::read_best_known(cfg.best_known_path);
    std::vector<json> reports;

    for (const auto& file : cfg.results_files) {
        std::map<std::string, std::vector<json>> by_mode;
        for (auto& rec : detail::read_jsonl(file)) by_mode[rec.value("mode", "?")].push_back(std::move(rec));

        for (const auto& [mode, records] : by_mode) {
            std::vector<InstanceResult> results;
            json excluded = json::array();
            for (const auto& rec : records) {
                const std::string id = rec.at("instance_id").get<std::string>();
                const auto it = best_known.find(id);
                if (rec.contains("error") || it == best_known.end()) {
                    excluded.push_back(id);
                    continue;
                }
                InstanceResult r;
                r.best_known = it->second;
                r.solved_tolerance = cfg.solved_tolerance;
                r.total_sample_per_start = rec.at("reads_per_start").get<long long>();
                if (mode == "spvar") {
                    for (const auto& b : rec.at("per_start_best"))
                        r.found_energies.push_back({b.get<double>()});
                } else {
                    std::vector<double> all;
                    for (const auto& pair : rec.at("energy_counts")) {
                        const double e = pair[0].get<double>();
                        const long long c = pair[1].get<long long>();
                        for (long long t = 0; t < c; ++t) all.push_back(e);
                    }
                    r.found_energies.push_back(std::move(all));
                }
                results.push_back(std::move(r));
            }

            json report{{"results_file", file}, {"mode", mode}, {"excluded", excluded}};
            if (!results.empty()) {
                const auto m = compute_metrics(results, mode == "spvar", cfg.bootstrap_resamples, cfg.seed);
                report["num_instances"] = m.num_instances;
                report["fraction_solved"] = m.fraction_solved;
                report["median_gap"] = m.median_gap;
                if (m.median_residual) report["median_residual"] = *m.median_residual;
                if (m.r99_stats) {
                    report["r99_mean_of_median"] = m.r99_stats->mean_of_medians;
                    report["r99_ci"] = {m.r99_stats->ci_low, m.r99_stats->ci_high};
                }
                report["r99_unmeasurable"] = m.r99_unmeasurable;
                report["r99_lower_bound"] = m.r99_lower_bound;
            } else {
                report["num_instances"] = 0;
            }
            reports.push_back(std::move(report));
        }
    }

    if (!cfg.out.empty()) {
        std::string text;
        for (const auto& rec : reports) text += rec.dump() + "\n";
        detail::write_text_file(cfg.out, text);
    }
    return reports;
}

/// Plain-text table of the metric reports.
inline std::string format_metrics_table(const std::vector<json>& reports) {
    std::ostringstream out;
    out << "results_file                      mode    n     solved  med_gap   med_resid  r99(median)\n";
    for (const auto& r : reports) {
        char line[256];
        const std::string file = r.at("results_file").get<std::string>();
        const std::string mode = r.at("mode").get<std::string>();
        const int n = r.value("num_instances", 0);
        if (n == 0) {
            std::snprintf(line, sizeof(line), "%-33s %-7s %-5d (no usable records)\n", file.c_str(),
                          mode.c_str(), n);
            out << line;
            continue;
        }
        const double solved = r.value("fraction_solved", 0.0);
        const double gap = r.value("median_gap", 0.0);
        const std::string resid =
            r.contains("median_residual") ? std::to_string(r.at("median_residual").get<double>()) : "n/a";
        const std::string r99s =
            r.contains("r99_mean_of_median") ? std::to_string(r.at("r99_mean_of_median").get<double>()) : "n/a";
        std::snprintf(line, sizeof(line), "%-33s %-7s %-5d %-7.3f %-9.4g %-10s %s%s\n", file.c_str(),
                      mode.c_str(), n, solved, gap, resid.c_str(), r99s.c_str(),
                      r.value("r99_lower_bound", false) ? " (lower bound)" : "");
        out << line;
    }
    return out.str();
}

}  // namespace spvar
