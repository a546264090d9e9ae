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

#pragma once

// End-to-end benchmark driver: config -> stores -> member probabilities ->
// scores -> metrics -> report files.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oodkit/data_model.hpp"
#include "oodkit/ensemble.hpp"
#include "oodkit/metrics.hpp"
#include "oodkit/probe.hpp"

namespace oodkit {

struct ScoreVariant {
    ScoreKind kind = ScoreKind::entropy;
    ScoreOrder order = ScoreOrder::average_then_score;
};

struct OodStoreRef {
    std::filesystem::path path;
    OodTag tag = OodTag::near;
};

// Parsed benchmark config. Paths are already resolved against the config
// file's directory.
struct RunConfig {
    std::string name = "benchmark";
    std::optional<std::uint64_t> num_classes;
    std::optional<std::filesystem::path> id_train;
    std::optional<std::filesystem::path> id_val;
    std::filesystem::path id_test;
    std::optional<std::filesystem::path> id_test_covariate;
    std::vector<OodStoreRef> ood;
    std::optional<std::filesystem::path> text;
    std::vector<std::string> class_names;
    double temperature = kDefaultTemperature;
    std::string prompt_template{kDefaultPromptTemplate};
    std::vector<std::filesystem::path> cls_logits;
    std::optional<std::filesystem::path> probe_checkpoint;
    ProbeHyperparams probe;
    std::vector<Member> members{Member::cls, Member::probe, Member::zero};
    std::vector<ScoreVariant> scores{ScoreVariant{}};
    bool covariate = false;
    std::uint64_t seed = 0;
};

// Throws ConfigError on malformed JSON or schema violations.
RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir);
RunConfig load_config(const std::filesystem::path& path);

// Per-run overrides from the command line.
struct RunOptions {
    std::optional<std::uint64_t> seed;
    bool serial = false;
};

void apply_options(RunConfig& config, const RunOptions& options);

struct OodInput {
    EmbeddingSet set;
    OodTag tag = OodTag::near;
};

// Stores loaded and cross-checked for one config.
struct Benchmark {
    std::string name;
    std::size_t num_classes = 0;
    std::optional<EmbeddingSet> id_train;
    EmbeddingSet id_eval;  // id_test, or id_test + covariate when enabled
    std::vector<OodInput> ood;
    std::optional<ClassTextEmbeddings> text;
    std::map<std::string, LogitSet> cls_logits;  // keyed by source dataset
    std::optional<LinearProbe> probe_checkpoint;
};

// Throws ConfigError for missing member inputs, DataError for inconsistent
// stores (class counts, dataset_id collisions, shapes).
Benchmark load_benchmark(const RunConfig& config);

// Probe from the checkpoint if configured, otherwise trained on id_train and
// rounded to checkpoint precision so both paths score identically.
LinearProbe obtain_probe(const Benchmark& bench, const RunConfig& config);

// Member probabilities for the ID evaluation set and every OOD set.
struct MemberProbs {
    std::map<Member, ProbSet> id_eval;
    std::vector<std::map<Member, ProbSet>> ood;
};

MemberProbs compute_member_probs(const Benchmark& bench, std::span<const Member> members,
                                 const std::optional<LinearProbe>& probe, bool parallel);

struct EvalCell {
    std::vector<Member> members;
    ScoreVariant variant;
};

std::vector<EvalReport> evaluate_cells(const Benchmark& bench, const MemberProbs& probs,
                                       std::span<const EvalCell> cells, std::uint64_t seed,
                                       bool parallel);

// All nonempty subsets in canonical member order, by increasing bitmask.
std::vector<std::vector<Member>> member_subsets(std::span<const Member> members);

// {msp, entropy} x {average_then_score, score_then_average}.
std::vector<ScoreVariant> all_score_variants();

std::string members_label(std::span<const Member> members);

std::string report_csv(std::span<const EvalReport> reports);
std::string report_json(const std::string& name, bool covariate, std::span<const EvalReport> reports);

struct RunResult {
    std::vector<EvalReport> reports;
    std::optional<LinearProbe> probe;
};

// Writes report.json / report.csv (and probe.cook when a probe was trained).
RunResult run_benchmark(const RunConfig& config, const std::filesystem::path& out_dir, bool serial);

// Every member subset x score variant; writes ablation.json / ablation.csv.
RunResult run_ablation(const RunConfig& config, const std::filesystem::path& out_dir, bool serial);

// Trains (or loads) the probe and writes probe.cook.
LinearProbe run_train_probe(const RunConfig& config, const std::filesystem::path& out_dir);

// Generates a synthetic benchmark, its stores and a benchmark.json config
// pointing at them. Returns the config path.
std::filesystem::path write_synth_benchmark(const SynthSpec& spec, const std::filesystem::path& out_dir);

SynthSpec parse_synth_spec(const std::string& json_text);

}  // namespace oodkit
