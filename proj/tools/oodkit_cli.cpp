/*
 * Copyright 2026 The oodkit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// oodkit command line: run | ablate | train-probe | synth | inspect

#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "oodkit/error.hpp"
#include "oodkit/harness.hpp"
#include "oodkit/kernels.hpp"
#include "oodkit/store.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw oodkit::ConfigError("cannot open '" + path + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void print_header(const std::string& path) {
    const oodkit::StoreHeader h = oodkit::read_store_header(path);
    std::printf("path        %s\n", path.c_str());
    std::printf("version     %u\n", static_cast<unsigned>(h.version));
    std::printf("dataset_id  %s\n", h.dataset_id.c_str());
    std::printf("rows (N)    %llu\n", static_cast<unsigned long long>(h.rows));
    std::printf("cols (d)    %llu\n", static_cast<unsigned long long>(h.cols));
    std::printf("classes (C) %llu\n", static_cast<unsigned long long>(h.num_classes));
    std::printf("labels      %s\n", h.has_labels() ? "yes" : "no");
    // Decode the payload too so that truncation and bad values are reported.
    oodkit::load_embedding_store(path);
    std::printf("payload     ok\n");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ensemble OOD detection toolkit over stored embeddings"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool serial = false;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* opt = sub->add_option("--config", config_path, "Config file (JSON)");
        if (config_required) opt->required()->check(CLI::ExistingFile);
        else opt->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "Output directory")->capture_default_str();
        sub->add_option("--seed", seed, "Override the config seed");
        sub->add_flag("--serial", serial, "Single-threaded scalar kernels (bit-exact mode)");
    };

    auto* run = app.add_subcommand("run", "Evaluate the configured member set and scores");
    add_common(run, true);
    auto* ablate = app.add_subcommand("ablate", "Evaluate every member subset and score variant");
    add_common(ablate, true);
    auto* train = app.add_subcommand("train-probe", "Train the linear probe and write probe.cook");
    add_common(train, true);
    auto* synth = app.add_subcommand("synth", "Generate a synthetic benchmark and its config");
    add_common(synth, false);
    auto* inspect = app.add_subcommand("inspect", "Print a store header and validate its payload");
    std::string store_path;
    inspect->add_option("store", store_path, "Store file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (serial) oodkit::kernels::select(oodkit::kernels::Backend::scalar);
        oodkit::RunOptions options;
        options.serial = serial;
        if (!app.got_subcommand(inspect) && app.get_subcommands().front()->count("--seed") > 0) options.seed = seed;

        if (app.got_subcommand(inspect)) {
            print_header(store_path);
        } else if (app.got_subcommand(synth)) {
            oodkit::SynthSpec spec =
                oodkit::parse_synth_spec(config_path.empty() ? std::string() : read_text(config_path));
            if (options.seed) spec.rng_seed = *options.seed;
            const auto cfg = oodkit::write_synth_benchmark(spec, out_dir);
            std::printf("wrote %s\n", cfg.string().c_str());
        } else {
            oodkit::RunConfig config = oodkit::load_config(config_path);
            oodkit::apply_options(config, options);
            if (app.got_subcommand(train)) {
                oodkit::run_train_probe(config, out_dir);
                std::printf("wrote %s/probe.cook\n", out_dir.c_str());
            } else {
                const bool is_ablation = app.got_subcommand(ablate);
                const auto result = is_ablation ? oodkit::run_ablation(config, out_dir, serial)
                                                : oodkit::run_benchmark(config, out_dir, serial);
                for (const auto& rep : result.reports) {
                    auto show = [](const std::optional<double>& v) {
                        return v ? std::to_string(*v) : std::string("-");
                    };
                    std::printf("%-16s %-8s %-19s near %s far %s avg %s\n",
                                oodkit::members_label(rep.provenance.members).c_str(),
                                std::string(oodkit::to_string(rep.provenance.score)).c_str(),
                                std::string(oodkit::to_string(rep.provenance.order)).c_str(),
                                show(rep.near_ood).c_str(), show(rep.far_ood).c_str(),
                                show(rep.avg_ood).c_str());
                }
            }
        }
    } catch (const oodkit::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const oodkit::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitData;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return kExitOk;
}
