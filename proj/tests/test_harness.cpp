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

#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "oodkit/error.hpp"
#include "oodkit/harness.hpp"
#include "oodkit/store.hpp"
#include "oodkit/synth.hpp"
#include "oodkit/zeroshot.hpp"

using namespace oodkit;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("oodkit_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

SynthSpec small_spec(std::uint64_t seed = 7) {
    SynthSpec s;
    s.num_classes = 4;
    s.dim = 16;
    s.n_per_class = 30;
    s.rng_seed = seed;
    return s;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + OODKIT_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kMinimal = R"({"stores": {"id_test": "a.cook", "ood": [{"path": "b.cook"}]}})";

}  // namespace

TEST_CASE("config defaults and path resolution") {
    const auto cfg = parse_config(kMinimal, "/data/bench");
    CHECK(cfg.id_test == fs::path("/data/bench/a.cook"));
    REQUIRE(cfg.ood.size() == 1);
    CHECK(cfg.ood[0].tag == OodTag::near);
    CHECK(cfg.members == std::vector<Member>{Member::cls, Member::probe, Member::zero});
    REQUIRE(cfg.scores.size() == 1);
    CHECK(cfg.scores[0].kind == ScoreKind::entropy);
    CHECK(cfg.scores[0].order == ScoreOrder::average_then_score);
    CHECK(cfg.temperature == 100.0);
    CHECK(cfg.probe.epochs == 20);
    CHECK_FALSE(cfg.covariate);
}

TEST_CASE("members are put in canonical order") {
    const auto cfg = parse_config(
        R"({"members": ["zero", "cls"], "stores": {"id_test": "a", "ood": [{"path": "b", "tag": "far"}]}})", ".");
    CHECK(cfg.members == std::vector<Member>{Member::cls, Member::zero});
    CHECK(cfg.ood[0].tag == OodTag::far);
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_config("{", "."), ConfigError);
    CHECK_THROWS_AS(parse_config("[]", "."), ConfigError);
    CHECK_THROWS_AS(parse_config("{}", "."), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"stores": {"id_test": "a"}})", "."), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"bogus": 1, "stores": {"id_test": "a", "ood": [{"path": "b"}]}})", "."),
                    ConfigError);
    CHECK_THROWS_AS(
        parse_config(R"({"members": ["clip"], "stores": {"id_test": "a", "ood": [{"path": "b"}]}})", "."),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(R"({"members": ["zero", "zero"], "stores": {"id_test": "a", "ood": [{"path": "b"}]}})", "."),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(R"({"scores": [{"kind": "energy"}], "stores": {"id_test": "a", "ood": [{"path": "b"}]}})", "."),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(R"({"covariate": true, "stores": {"id_test": "a", "ood": [{"path": "b"}]}})", "."),
        ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"text": {"prompt_template": "no slot"},
                                     "stores": {"id_test": "a", "ood": [{"path": "b"}]}})",
                                 "."),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"probe": {"batch_size": 0},
                                     "stores": {"id_test": "a", "ood": [{"path": "b"}]}})",
                                 "."),
                    ConfigError);
}

TEST_CASE("member subsets and score variants") {
    const std::vector<Member> all{Member::cls, Member::probe, Member::zero};
    const auto subsets = member_subsets(all);
    REQUIRE(subsets.size() == 7);
    CHECK(subsets.front() == std::vector<Member>{Member::cls});
    CHECK(subsets.back() == all);
    CHECK(all_score_variants().size() == 4);
    CHECK(members_label(all) == "cls+probe+zero");
}

TEST_CASE("synthetic benchmark runs end to end") {
    const fs::path dir = scratch("e2e");
    const fs::path cfg_path = write_synth_benchmark(small_spec(), dir / "bench");
    RunConfig cfg = load_config(cfg_path);

    SUBCASE("zero-shot alone is accurate on well separated data") {
        SynthSpec tight = small_spec(8);
        tight.within_class_std = 1e-4;
        RunConfig zc = load_config(write_synth_benchmark(tight, dir / "tight"));
        zc.members = {Member::zero};
        const auto result = run_benchmark(zc, dir / "zero_out", true);
        REQUIRE(result.reports.size() == 1);
        REQUIRE(result.reports[0].records.size() == 2);
        CHECK(*result.reports[0].records[0].accuracy == 1.0);
        CHECK_FALSE(result.probe.has_value());
        CHECK(fs::exists(dir / "zero_out" / "report.json"));
        CHECK_FALSE(fs::exists(dir / "zero_out" / "probe.cook"));
    }

    SUBCASE("full ensemble writes reports and a probe checkpoint") {
        const auto result = run_benchmark(cfg, dir / "out", true);
        REQUIRE(result.reports.size() == 1);
        CHECK(result.reports[0].records.size() == 2);
        CHECK(result.reports[0].near_ood.has_value());
        CHECK(result.reports[0].far_ood.has_value());
        CHECK(result.reports[0].avg_ood.has_value());
        CHECK(fs::exists(dir / "out" / "report.csv"));
        REQUIRE(fs::exists(dir / "out" / "probe.cook"));

        // The written checkpoint reproduces the run bit for bit.
        RunConfig from_ckpt = cfg;
        from_ckpt.probe_checkpoint = dir / "out" / "probe.cook";
        run_benchmark(from_ckpt, dir / "out_ckpt", true);
        CHECK(slurp(dir / "out" / "report.csv") == slurp(dir / "out_ckpt" / "report.csv"));
    }

    SUBCASE("serial and parallel runs are byte-identical") {
        run_benchmark(cfg, dir / "serial", true);
        run_benchmark(cfg, dir / "parallel", false);
        run_benchmark(cfg, dir / "serial2", true);
        CHECK(slurp(dir / "serial" / "report.json") == slurp(dir / "parallel" / "report.json"));
        CHECK(slurp(dir / "serial" / "report.json") == slurp(dir / "serial2" / "report.json"));
        CHECK(slurp(dir / "serial" / "probe.cook") == slurp(dir / "serial2" / "probe.cook"));
    }

    SUBCASE("ablation covers every subset and variant") {
        const auto result = run_ablation(cfg, dir / "abl", false);
        CHECK(result.reports.size() == 28);
        const std::string csv = slurp(dir / "abl" / "ablation.csv");
        const auto lines = std::count(csv.begin(), csv.end(), '\n');
        CHECK(lines == 1 + 28 * 2);
    }

    SUBCASE("removing an OOD set leaves the other rows unchanged") {
        const auto both = run_benchmark(cfg, dir / "both", true);
        RunConfig near_only = cfg;
        near_only.ood.resize(1);
        near_only.probe_checkpoint = dir / "both" / "probe.cook";
        const auto one = run_benchmark(near_only, dir / "one", true);
        REQUIRE(one.reports[0].records.size() == 1);
        CHECK(one.reports[0].records[0].auroc == both.reports[0].records[0].auroc);
        CHECK(one.reports[0].records[0].fpr_at_95 == both.reports[0].records[0].fpr_at_95);
    }

    SUBCASE("a classifier member identical to zero-shot doubles nothing") {
        // Overwrite the cls logit stores with the zero-shot logits.
        const auto b = synth_generate(small_spec());
        const std::pair<const EmbeddingSet*, const char*> sets[] = {
            {&b.id_test, "cls_id_test.cook"},
            {&b.id_test_covariate, "cls_id_test_covariate.cook"},
            {&b.ood_near, "cls_ood_near.cook"},
            {&b.ood_far, "cls_ood_far.cook"},
        };
        for (const auto& [set, file] : sets) {
            LogitSet l = zero_shot_logits(*set, b.text);
            l.member = Member::cls;
            save_embedding_store(to_store(l), dir / "bench" / file);
        }
        RunConfig zero = cfg;
        zero.members = {Member::zero};
        RunConfig pair = cfg;
        pair.members = {Member::cls, Member::zero};
        const auto a = run_benchmark(zero, dir / "z", true);
        const auto c = run_benchmark(pair, dir / "cz", true);
        for (std::size_t i = 0; i < 2; ++i) {
            CHECK(a.reports[0].records[i].auroc == doctest::Approx(c.reports[0].records[i].auroc).epsilon(1e-12));
            CHECK(*a.reports[0].records[i].accuracy == *c.reports[0].records[i].accuracy);
        }
    }

    SUBCASE("missing member inputs are configuration errors") {
        RunConfig no_text = cfg;
        no_text.text.reset();
        CHECK_THROWS_AS(run_benchmark(no_text, dir / "x", true), ConfigError);
        RunConfig no_train = cfg;
        no_train.id_train.reset();
        CHECK_THROWS_AS(run_benchmark(no_train, dir / "x", true), ConfigError);
    }

    SUBCASE("colliding dataset ids are data errors") {
        RunConfig dup = cfg;
        dup.ood.push_back(dup.ood[0]);
        CHECK_THROWS_AS(load_benchmark(dup), DataError);
    }
}

TEST_CASE("covariate evaluation concatenates the shifted test set") {
    const fs::path dir = scratch("cov");
    RunConfig cfg = load_config(write_synth_benchmark(small_spec(), dir));
    cfg.covariate = true;
    cfg.members = {Member::cls, Member::zero};
    const auto bench = load_benchmark(cfg);
    CHECK(bench.id_eval.size() == 2 * 4 * 30);
    const auto result = run_benchmark(cfg, dir / "out", true);
    CHECK(result.reports[0].records[0].id_dataset == "synth:id_test+synth:id_test_covariate");
}

TEST_CASE("synth spec parsing") {
    const auto s = parse_synth_spec(R"({"num_classes": 3, "seed": 9, "label_noise_rate": 0.1})");
    CHECK(s.num_classes == 3);
    CHECK(s.rng_seed == 9);
    CHECK(s.label_noise_rate == 0.1);
    CHECK(parse_synth_spec("").dim == SynthSpec{}.dim);
    CHECK_THROWS_AS(parse_synth_spec(R"({"classes": 3})"), ConfigError);
    CHECK_THROWS_AS(parse_synth_spec(R"({"num_classes": 1})"), ConfigError);
}

TEST_CASE("command line exit codes") {
    const fs::path dir = scratch("cli");
    {
        std::ofstream spec(dir / "spec.json");
        spec << R"({"num_classes": 3, "dim": 8, "n_per_class": 20, "seed": 3})";
    }
    CHECK(run_cli("synth --config \"" + (dir / "spec.json").string() + "\" --out \"" + (dir / "b").string() + "\"") == 0);
    CHECK(fs::exists(dir / "b" / "benchmark.json"));
    CHECK(run_cli("synth --seed 11 --out \"" + (dir / "s11").string() + "\"") == 0);
    CHECK(slurp(dir / "s11" / "benchmark.json").find("\"synth-11\"") != std::string::npos);
    CHECK(run_cli("run --serial --config \"" + (dir / "b" / "benchmark.json").string() + "\" --out \"" +
                  (dir / "r").string() + "\"") == 0);
    CHECK(fs::exists(dir / "r" / "report.json"));
    CHECK(run_cli("inspect \"" + (dir / "b" / "id_test.cook").string() + "\"") == 0);

    // Usage and configuration problems.
    CHECK(run_cli("") == 2);
    CHECK(run_cli("frobnicate") == 2);
    CHECK(run_cli("run") == 2);
    {
        std::ofstream bad(dir / "bad.json");
        bad << "{ not json";
    }
    CHECK(run_cli("run --config \"" + (dir / "bad.json").string() + "\"") == 2);

    // Data problems: a store truncated on disk.
    const std::string bytes = slurp(dir / "b" / "id_test.cook");
    {
        std::ofstream cut(dir / "b" / "id_test.cook", std::ios::binary | std::ios::trunc);
        cut << bytes.substr(0, bytes.size() / 2);
    }
    CHECK(run_cli("run --config \"" + (dir / "b" / "benchmark.json").string() + "\" --out \"" +
                  (dir / "r2").string() + "\"") == 3);
    CHECK(run_cli("inspect \"" + (dir / "b" / "id_test.cook").string() + "\"") == 3);
}
