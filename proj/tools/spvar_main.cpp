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

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "spvar/campaign.hpp"

namespace {

spvar::json load_config(const std::string& path) {
    return spvar::json::parse(spvar::detail::read_text_file(path));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ising/QUBO meta-optimization toolkit: instance generation, "
                 "multi-start sample-persistence solving, and success metrics"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<std::string> mode, sampler, out;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", config_path, "campaign config (JSON)")->required();
        cmd->add_option("--seed", seed, "override the config seed");
        cmd->add_option("--out", out, "override the output path");
    };

    auto* generate = app.add_subcommand("generate", "write an instance set plus metadata sidecar");
    add_common(generate);

    auto* solve = app.add_subcommand("solve", "run a solve campaign over instance files");
    add_common(solve);
    solve->add_option("--jobs", jobs, "instances solved in parallel");
    solve->add_option("--mode", mode, "raw|spvar")->check(CLI::IsMember({"raw", "spvar"}));
    solve->add_option("--sampler", sampler, "sa|pticm|bruteforce")
        ->check(CLI::IsMember({"sa", "pticm", "bruteforce"}));

    auto* metrics = app.add_subcommand("metrics", "aggregate result records into a report");
    add_common(metrics);

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed()) {
            auto j = load_config(config_path);
            if (seed) j["seed"] = *seed;
            if (out) j["out_dir"] = *out;
            const auto set = spvar::cmd_generate(spvar::GenerateConfig::from_json(j));
            std::cout << "wrote " << set.instance_paths.size() << " instances, metadata at "
                      << set.metadata_path << "\n";
        } else if (solve->parsed()) {
            auto j = load_config(config_path);
            if (seed) j["seed"] = *seed;
            if (jobs) j["jobs"] = *jobs;
            if (mode) j["mode"] = *mode;
            if (sampler) j["sampler"]["kind"] = *sampler;
            if (out) j["out"] = *out;
            const auto cfg = spvar::SolveConfig::from_json(j);
            const auto records = spvar::cmd_solve(cfg);
            int errors = 0;
            for (const auto& rec : records) errors += rec.contains("error") ? 1 : 0;
            std::cout << "solved " << records.size() - errors << "/" << records.size() << " instances";
            if (!cfg.out.empty()) std::cout << ", records at " << cfg.out;
            std::cout << "\n";
            if (errors > 0) {
                for (const auto& rec : records)
                    if (rec.contains("error"))
                        std::cerr << rec.at("instance_id").get<std::string>() << ": "
                                  << rec.at("error").get<std::string>() << "\n";
            }
        } else if (metrics->parsed()) {
            auto j = load_config(config_path);
            if (seed) j["seed"] = *seed;
            if (out) j["out"] = *out;
            const auto reports = spvar::cmd_metrics(spvar::MetricsConfig::from_json(j));
            std::cout << spvar::format_metrics_table(reports);
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
