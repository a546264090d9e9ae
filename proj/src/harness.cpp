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

#include "oodkit/harness.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <set>
#include <sstream>

#include <json.hpp>

#include "oodkit/error.hpp"
#include "oodkit/store.hpp"
#include "oodkit/synth.hpp"
#include "oodkit/zeroshot.hpp"

namespace oodkit {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr Member kCanonicalOrder[] = {Member::cls, Member::probe, Member::zero};

void reject_unknown_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                         std::string_view where) {
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) throw ConfigError("unknown key '" + key + "' in " + std::string(where));
    }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

fs::path resolve(const fs::path& base, const json& value, const char* key) {
    if (!value.is_string()) throw ConfigError(std::string("'") + key + "' must be a path string");
    fs::path p = value.get<std::string>();
    return p.is_absolute() ? p : base / p;
}

std::vector<Member> canonical(std::vector<Member> members) {
    std::vector<Member> out;
    for (Member m : kCanonicalOrder) {
        if (std::find(members.begin(), members.end(), m) != members.end()) out.push_back(m);
    }
    return out;
}

std::string format_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.8f", v);
    return buf;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    out << text;
    if (!out) throw DataError("write failure on '" + path.string() + "'");
}

EmbeddingSet concat(const EmbeddingSet& a, const EmbeddingSet& b) {
    if (a.dim() != b.dim()) {
        throw DataError("cannot concatenate '" + a.dataset_id + "' (d = " + std::to_string(a.dim()) +
                        ") with '" + b.dataset_id + "' (d = " + std::to_string(b.dim()) + ")");
    }
    std::vector<float> values(a.data.values().begin(), a.data.values().end());
    values.insert(values.end(), b.data.values().begin(), b.data.values().end());
    EmbeddingSet out;
    out.data = Matrix<float>(a.size() + b.size(), a.dim(), std::move(values));
    out.dataset_id = a.dataset_id + "+" + b.dataset_id;
    out.role = Role::id_test;
    out.num_classes = a.num_classes;
    if (a.labels && b.labels) {
        std::vector<std::uint32_t> labels = *a.labels;
        labels.insert(labels.end(), b.labels->begin(), b.labels->end());
        out.labels = std::move(labels);
    }
    return out;
}

LogitSet concat(const LogitSet& a, const LogitSet& b, std::string source) {
    if (a.data.cols() != b.data.cols()) throw DataError("cannot concatenate logits with different C");
    std::vector<double> values(a.data.values().begin(), a.data.values().end());
    values.insert(values.end(), b.data.values().begin(), b.data.values().end());
    LogitSet out;
    out.member = a.member;
    out.source_dataset = std::move(source);
    out.data = Matrix<double>(a.data.rows() + b.data.rows(), a.data.cols(), std::move(values));
    return out;
}

// Runs fn(i) for i in [0, n), concurrently when asked. Results land by index.
template <typename T>
std::vector<T> map_indices(std::size_t n, bool parallel, const std::function<T(std::size_t)>& fn) {
    std::vector<T> out;
    out.reserve(n);
    if (!parallel || n < 2) {
        for (std::size_t i = 0; i < n; ++i) out.push_back(fn(i));
        return out;
    }
    std::vector<std::future<T>> futures;
    futures.reserve(n);
    for (std::size_t i = 0; i < n; ++i) futures.push_back(std::async(std::launch::async, fn, i));
    for (auto& f : futures) out.push_back(f.get());
    return out;
}

std::map<Member, ProbSet> probs_for(const EmbeddingSet& images, std::span<const Member> members,
                                    const Benchmark& bench, const std::optional<LinearProbe>& probe) {
    std::map<Member, ProbSet> out;
    for (Member m : members) {
        switch (m) {
            case Member::cls: {
                const auto it = bench.cls_logits.find(images.dataset_id);
                if (it == bench.cls_logits.end()) {
                    throw ConfigError("no classifier logits for dataset '" + images.dataset_id + "'");
                }
                out.emplace(m, softmax(it->second));
                break;
            }
            case Member::probe:
                if (!probe) throw ConfigError("probe member requested without a probe");
                out.emplace(m, softmax(probe_logits(*probe, images)));
                break;
            case Member::zero:
                if (!bench.text) throw ConfigError("zero-shot member requested without text embeddings");
                out.emplace(m, softmax(zero_shot_logits(images, *bench.text)));
                break;
        }
    }
    return out;
}

std::vector<ProbSet> select(const std::map<Member, ProbSet>& probs, std::span<const Member> members) {
    std::vector<ProbSet> out;
    for (Member m : members) out.push_back(probs.at(m));
    return out;
}

void write_probe(const LinearProbe& probe, const std::string& name, const fs::path& out_dir) {
    save_embedding_store(to_checkpoint(probe, name), out_dir / "probe.cook");
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const fs::path& base_dir) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config must be a JSON object");
    reject_unknown_keys(root,
                        {"name", "num_classes", "seed", "members", "scores", "covariate", "stores",
                         "text", "probe"},
                        "config");

    RunConfig cfg;
    cfg.name = get_or<std::string>(root, "name", cfg.name);
    if (root.contains("num_classes")) cfg.num_classes = get_or<std::uint64_t>(root, "num_classes", 0);
    cfg.seed = get_or<std::uint64_t>(root, "seed", 0);
    cfg.covariate = get_or<bool>(root, "covariate", false);

    if (root.contains("members")) {
        cfg.members.clear();
        for (const auto& m : root.at("members")) {
            if (!m.is_string()) throw ConfigError("members must be strings");
            const Member member = member_from_string(m.get<std::string>());
            if (std::find(cfg.members.begin(), cfg.members.end(), member) != cfg.members.end()) {
                throw ConfigError("member '" + m.get<std::string>() + "' listed twice");
            }
            cfg.members.push_back(member);
        }
        cfg.members = canonical(cfg.members);
    }
    if (root.contains("scores")) {
        cfg.scores.clear();
        for (const auto& s : root.at("scores")) {
            reject_unknown_keys(s, {"kind", "order"}, "scores entry");
            ScoreVariant v;
            v.kind = score_kind_from_string(get_or<std::string>(s, "kind", "entropy"));
            v.order = score_order_from_string(get_or<std::string>(s, "order", "average_then_score"));
            cfg.scores.push_back(v);
        }
        if (cfg.scores.empty()) throw ConfigError("scores must not be empty");
    }

    if (!root.contains("stores")) throw ConfigError("config lacks 'stores'");
    const json& stores = root.at("stores");
    reject_unknown_keys(stores,
                        {"id_train", "id_val", "id_test", "id_test_covariate", "ood", "text",
                         "cls_logits"},
                        "stores");
    if (!stores.contains("id_test")) throw ConfigError("stores lacks 'id_test'");
    cfg.id_test = resolve(base_dir, stores.at("id_test"), "id_test");
    if (stores.contains("id_train")) cfg.id_train = resolve(base_dir, stores.at("id_train"), "id_train");
    if (stores.contains("id_val")) cfg.id_val = resolve(base_dir, stores.at("id_val"), "id_val");
    if (stores.contains("id_test_covariate")) {
        cfg.id_test_covariate = resolve(base_dir, stores.at("id_test_covariate"), "id_test_covariate");
    }
    if (stores.contains("text")) cfg.text = resolve(base_dir, stores.at("text"), "text");
    if (stores.contains("cls_logits")) {
        for (const auto& p : stores.at("cls_logits")) cfg.cls_logits.push_back(resolve(base_dir, p, "cls_logits"));
    }
    if (stores.contains("ood")) {
        for (const auto& o : stores.at("ood")) {
            reject_unknown_keys(o, {"path", "tag"}, "ood entry");
            if (!o.contains("path")) throw ConfigError("ood entry lacks 'path'");
            OodStoreRef ref;
            ref.path = resolve(base_dir, o.at("path"), "path");
            ref.tag = ood_tag_from_string(get_or<std::string>(o, "tag", "near"));
            cfg.ood.push_back(ref);
        }
    }
    if (cfg.ood.empty()) throw ConfigError("at least one OOD store is required");

    if (root.contains("text")) {
        const json& text = root.at("text");
        reject_unknown_keys(text, {"class_names", "temperature", "prompt_template"}, "text");
        cfg.class_names = get_or<std::vector<std::string>>(text, "class_names", {});
        cfg.temperature = get_or<double>(text, "temperature", cfg.temperature);
        cfg.prompt_template = get_or<std::string>(text, "prompt_template", cfg.prompt_template);
        build_prompts({}, cfg.prompt_template);  // validates the placeholder
        if (!(cfg.temperature > 0.0)) throw ConfigError("text.temperature must be > 0");
    }

    cfg.probe.rng_seed = cfg.seed;
    if (root.contains("probe")) {
        const json& p = root.at("probe");
        reject_unknown_keys(p,
                            {"checkpoint", "epochs", "base_lr", "momentum", "weight_decay", "nesterov",
                             "batch_size", "lr_floor", "seed"},
                            "probe");
        if (p.contains("checkpoint")) cfg.probe_checkpoint = resolve(base_dir, p.at("checkpoint"), "checkpoint");
        cfg.probe.epochs = get_or<std::uint64_t>(p, "epochs", cfg.probe.epochs);
        cfg.probe.base_lr = get_or<double>(p, "base_lr", cfg.probe.base_lr);
        cfg.probe.momentum = get_or<double>(p, "momentum", cfg.probe.momentum);
        cfg.probe.weight_decay = get_or<double>(p, "weight_decay", cfg.probe.weight_decay);
        cfg.probe.nesterov = get_or<bool>(p, "nesterov", cfg.probe.nesterov);
        cfg.probe.batch_size = get_or<std::uint64_t>(p, "batch_size", cfg.probe.batch_size);
        cfg.probe.lr_floor = get_or<double>(p, "lr_floor", cfg.probe.lr_floor);
        cfg.probe.rng_seed = get_or<std::uint64_t>(p, "seed", cfg.probe.rng_seed);
    }
    cfg.probe.validate();
    if (cfg.covariate && !cfg.id_test_covariate) {
        throw ConfigError("covariate evaluation requested but stores lacks 'id_test_covariate'");
    }
    return cfg;
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path.parent_path());
}

void apply_options(RunConfig& config, const RunOptions& options) {
    if (options.seed) {
        config.seed = *options.seed;
        config.probe.rng_seed = *options.seed;
    }
}

Benchmark load_benchmark(const RunConfig& config) {
    const auto has = [&](Member m) {
        return std::find(config.members.begin(), config.members.end(), m) != config.members.end();
    };
    if (config.members.empty()) throw ConfigError("member set must not be empty");
    if (has(Member::cls) && config.cls_logits.empty()) {
        throw ConfigError("member 'cls' requires stores.cls_logits");
    }
    if (has(Member::zero) && !config.text) throw ConfigError("member 'zero' requires stores.text");
    if (has(Member::probe) && !config.probe_checkpoint && !config.id_train) {
        throw ConfigError("member 'probe' requires stores.id_train or probe.checkpoint");
    }

    Benchmark bench;
    bench.name = config.name;

    // Every source that states a class count must agree.
    std::vector<std::pair<std::string, std::uint64_t>> class_counts;
    if (config.num_classes) class_counts.emplace_back("config", *config.num_classes);

    EmbeddingSet id_test = load_embedding_store(config.id_test, Role::id_test);
    if (id_test.num_classes) class_counts.emplace_back(id_test.dataset_id, id_test.num_classes);

    std::set<std::string> ids{id_test.dataset_id};
    auto claim = [&](const EmbeddingSet& s) {
        if (!ids.insert(s.dataset_id).second) {
            throw DataError("dataset_id collision: '" + s.dataset_id + "' appears twice");
        }
    };

    std::optional<EmbeddingSet> covariate;
    if (config.covariate) {
        covariate = load_embedding_store(*config.id_test_covariate, Role::id_test_covariate);
        claim(*covariate);
        bench.id_eval = concat(id_test, *covariate);
        ids.insert(bench.id_eval.dataset_id);
    } else {
        bench.id_eval = id_test;
    }

    for (const auto& ref : config.ood) {
        OodInput in;
        in.set = load_embedding_store(ref.path, ref.tag == OodTag::near ? Role::ood_near : Role::ood_far);
        in.tag = ref.tag;
        claim(in.set);
        if (in.set.dim() != id_test.dim()) {
            throw DataError("OOD set '" + in.set.dataset_id + "' has d = " + std::to_string(in.set.dim()) +
                            ", ID test has d = " + std::to_string(id_test.dim()));
        }
        bench.ood.push_back(std::move(in));
    }

    if (has(Member::probe) && !config.probe_checkpoint) {
        EmbeddingSet train = load_embedding_store(*config.id_train, Role::id_train);
        claim(train);
        if (!train.labels) throw DataError("id_train store '" + train.dataset_id + "' has no labels");
        if (train.num_classes) class_counts.emplace_back(train.dataset_id, train.num_classes);
        bench.id_train = std::move(train);
    }
    if (has(Member::probe) && config.probe_checkpoint) {
        const EmbeddingSet ckpt = load_embedding_store(*config.probe_checkpoint);
        bench.probe_checkpoint = probe_from_checkpoint(ckpt);
        class_counts.emplace_back(ckpt.dataset_id, bench.probe_checkpoint->num_classes());
    }
    if (has(Member::zero)) {
        const EmbeddingSet store = load_embedding_store(*config.text);
        bench.text = text_from_store(store, config.class_names, config.temperature, config.prompt_template);
        class_counts.emplace_back(store.dataset_id, bench.text->num_classes());
    }
    if (has(Member::cls)) {
        std::map<std::string, LogitSet> by_source;
        for (const auto& path : config.cls_logits) {
            LogitSet logits = logits_from_store(load_embedding_store(path));
            if (logits.member != Member::cls) {
                throw DataError("'" + path.string() + "' holds " + std::string(to_string(logits.member)) +
                                " logits, expected cls");
            }
            class_counts.emplace_back("logits:" + logits.source_dataset, logits.data.cols());
            const std::string source = logits.source_dataset;
            if (!by_source.emplace(source, std::move(logits)).second) {
                throw DataError("two classifier logit stores for dataset '" + source + "'");
            }
        }
        auto take = [&](const EmbeddingSet& images) -> const LogitSet& {
            const auto it = by_source.find(images.dataset_id);
            if (it == by_source.end()) {
                throw ConfigError("no classifier logits for dataset '" + images.dataset_id + "'");
            }
            if (it->second.data.rows() != images.size()) {
                throw DataError("classifier logits for '" + images.dataset_id + "' have " +
                                std::to_string(it->second.data.rows()) + " rows, dataset has " +
                                std::to_string(images.size()));
            }
            return it->second;
        };
        if (covariate) {
            bench.cls_logits.emplace(bench.id_eval.dataset_id,
                                     concat(take(id_test), take(*covariate), bench.id_eval.dataset_id));
        } else {
            bench.cls_logits.emplace(id_test.dataset_id, take(id_test));
        }
        for (const auto& o : bench.ood) bench.cls_logits.emplace(o.set.dataset_id, take(o.set));
    }

    if (class_counts.empty()) throw ConfigError("cannot determine the class count C");
    const std::uint64_t num_classes = class_counts.front().second;
    for (const auto& [source, count] : class_counts) {
        if (count != num_classes) {
            throw DataError("C mismatch: " + class_counts.front().first + " says " +
                            std::to_string(num_classes) + ", " + source + " says " + std::to_string(count));
        }
    }
    if (num_classes < 2) throw DataError("C must be >= 2");
    bench.num_classes = num_classes;
    bench.id_eval.num_classes = num_classes;
    bench.id_eval.validate();
    if (bench.id_train) {
        bench.id_train->num_classes = num_classes;
        bench.id_train->validate();
    }
    return bench;
}

LinearProbe obtain_probe(const Benchmark& bench, const RunConfig& config) {
    if (bench.probe_checkpoint) return *bench.probe_checkpoint;
    if (!bench.id_train) throw ConfigError("probe training requires stores.id_train");
    return round_to_checkpoint_precision(train_probe(*bench.id_train, bench.num_classes, config.probe));
}

MemberProbs compute_member_probs(const Benchmark& bench, std::span<const Member> members,
                                 const std::optional<LinearProbe>& probe, bool parallel) {
    const std::vector<Member> ms(members.begin(), members.end());
    auto per_dataset = map_indices<std::map<Member, ProbSet>>(
        bench.ood.size() + 1, parallel, [&](std::size_t i) {
            const EmbeddingSet& images = i == 0 ? bench.id_eval : bench.ood[i - 1].set;
            return probs_for(images, ms, bench, probe);
        });
    MemberProbs out;
    out.id_eval = std::move(per_dataset.front());
    for (std::size_t i = 1; i < per_dataset.size(); ++i) out.ood.push_back(std::move(per_dataset[i]));
    return out;
}

std::vector<EvalReport> evaluate_cells(const Benchmark& bench, const MemberProbs& probs,
                                       std::span<const EvalCell> cells, std::uint64_t seed,
                                       bool parallel) {
    const std::vector<EvalCell> cell_list(cells.begin(), cells.end());
    return map_indices<EvalReport>(cell_list.size(), parallel, [&](std::size_t i) {
        const EvalCell& cell = cell_list[i];
        const auto id_members = select(probs.id_eval, cell.members);

        std::optional<double> acc;
        if (bench.id_eval.labels) {
            acc = accuracy(predict(ensemble_probs(id_members)), *bench.id_eval.labels);
        }
        const ScoreVector id_scores = ood_score(id_members, cell.variant.kind, cell.variant.order);

        std::vector<PairRecord> records;
        for (std::size_t o = 0; o < bench.ood.size(); ++o) {
            const auto ood_members = select(probs.ood[o], cell.members);
            const ScoreVector ood_scores = ood_score(ood_members, cell.variant.kind, cell.variant.order);
            PairRecord r;
            r.id_dataset = bench.id_eval.dataset_id;
            r.ood_dataset = bench.ood[o].set.dataset_id;
            r.tag = bench.ood[o].tag;
            r.accuracy = acc;
            r.auroc = auroc(id_scores, ood_scores);
            r.fpr_at_95 = fpr_at_tpr(id_scores, ood_scores);
            records.push_back(std::move(r));
        }
        Provenance prov{cell.members, cell.variant.kind, cell.variant.order, seed};
        return aggregate(std::move(records), std::move(prov));
    });
}

std::vector<std::vector<Member>> member_subsets(std::span<const Member> members) {
    const auto ordered = canonical({members.begin(), members.end()});
    std::vector<std::vector<Member>> out;
    const std::size_t count = std::size_t{1} << ordered.size();
    for (std::size_t mask = 1; mask < count; ++mask) {
        std::vector<Member> subset;
        for (std::size_t i = 0; i < ordered.size(); ++i) {
            if (mask & (std::size_t{1} << i)) subset.push_back(ordered[i]);
        }
        out.push_back(std::move(subset));
    }
    return out;
}

std::vector<ScoreVariant> all_score_variants() {
    std::vector<ScoreVariant> out;
    for (ScoreKind kind : {ScoreKind::msp, ScoreKind::entropy}) {
        for (ScoreOrder order : {ScoreOrder::average_then_score, ScoreOrder::score_then_average}) {
            out.push_back({kind, order});
        }
    }
    return out;
}

std::string members_label(std::span<const Member> members) {
    std::string out;
    for (Member m : members) {
        if (!out.empty()) out += '+';
        out += to_string(m);
    }
    return out;
}

std::string report_csv(std::span<const EvalReport> reports) {
    std::string out = "id_dataset,ood_dataset,tag,members,score,order,accuracy,auroc,fpr95\n";
    for (const auto& rep : reports) {
        const std::string members = members_label(rep.provenance.members);
        for (const auto& r : rep.records) {
            out += r.id_dataset + ',' + r.ood_dataset + ',' + std::string(to_string(r.tag)) + ',' + members +
                   ',' + std::string(to_string(rep.provenance.score)) + ',' +
                   std::string(to_string(rep.provenance.order)) + ',' +
                   (r.accuracy ? format_number(*r.accuracy) : std::string()) + ',' + format_number(r.auroc) +
                   ',' + format_number(r.fpr_at_95) + '\n';
        }
    }
    return out;
}

std::string report_json(const std::string& name, bool covariate, std::span<const EvalReport> reports) {
    ordered_json root;
    root["name"] = name;
    root["covariate"] = covariate;
    ordered_json runs = ordered_json::array();
    for (const auto& rep : reports) {
        ordered_json run;
        ordered_json members = ordered_json::array();
        for (Member m : rep.provenance.members) members.push_back(std::string(to_string(m)));
        run["members"] = members;
        run["score"] = std::string(to_string(rep.provenance.score));
        run["order"] = std::string(to_string(rep.provenance.order));
        run["seed"] = rep.provenance.seed;
        ordered_json records = ordered_json::array();
        for (const auto& r : rep.records) {
            ordered_json rec;
            rec["id_dataset"] = r.id_dataset;
            rec["ood_dataset"] = r.ood_dataset;
            rec["tag"] = std::string(to_string(r.tag));
            rec["accuracy"] = r.accuracy ? ordered_json(*r.accuracy) : ordered_json(nullptr);
            rec["auroc"] = r.auroc;
            rec["fpr95"] = r.fpr_at_95;
            records.push_back(std::move(rec));
        }
        run["records"] = std::move(records);
        auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
        run["near_ood"] = opt(rep.near_ood);
        run["far_ood"] = opt(rep.far_ood);
        run["avg_ood"] = opt(rep.avg_ood);
        runs.push_back(std::move(run));
    }
    root["runs"] = std::move(runs);
    return root.dump(2) + "\n";
}

namespace {

RunResult run_cells(const RunConfig& config, const fs::path& out_dir, bool serial,
                    const std::vector<EvalCell>& cells, const std::string& stem) {
    const Benchmark bench = load_benchmark(config);
    RunResult result;
    const bool wants_probe =
        std::find(config.members.begin(), config.members.end(), Member::probe) != config.members.end();
    if (wants_probe) result.probe = obtain_probe(bench, config);
    const MemberProbs probs = compute_member_probs(bench, config.members, result.probe, !serial);
    result.reports = evaluate_cells(bench, probs, cells, config.probe.rng_seed, !serial);

    fs::create_directories(out_dir);
    write_text(out_dir / (stem + ".json"), report_json(config.name, config.covariate, result.reports));
    write_text(out_dir / (stem + ".csv"), report_csv(result.reports));
    if (result.probe && !config.probe_checkpoint) write_probe(*result.probe, config.name, out_dir);
    return result;
}

}  // namespace

RunResult run_benchmark(const RunConfig& config, const fs::path& out_dir, bool serial) {
    std::vector<EvalCell> cells;
    for (const auto& v : config.scores) cells.push_back({config.members, v});
    return run_cells(config, out_dir, serial, cells, "report");
}

RunResult run_ablation(const RunConfig& config, const fs::path& out_dir, bool serial) {
    std::vector<EvalCell> cells;
    for (const auto& subset : member_subsets(config.members)) {
        for (const auto& v : all_score_variants()) cells.push_back({subset, v});
    }
    return run_cells(config, out_dir, serial, cells, "ablation");
}

LinearProbe run_train_probe(const RunConfig& config, const fs::path& out_dir) {
    RunConfig probe_only = config;
    probe_only.members = {Member::probe};
    probe_only.probe_checkpoint.reset();
    const Benchmark bench = load_benchmark(probe_only);
    const LinearProbe probe = obtain_probe(bench, probe_only);
    fs::create_directories(out_dir);
    write_probe(probe, config.name, out_dir);
    return probe;
}

SynthSpec parse_synth_spec(const std::string& json_text) {
    json root;
    try {
        root = json_text.empty() ? json::object() : json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("synth spec is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("synth spec must be a JSON object");
    reject_unknown_keys(root,
                        {"num_classes", "dim", "n_per_class", "class_center_scale", "within_class_std",
                         "covariate_shift_std", "zero_shot_misalignment_angle", "label_noise_rate",
                         "n_ood_classes", "far_ood_shift_std", "cls_view_std", "cls_logit_scale", "seed"},
                        "synth spec");
    SynthSpec s;
    s.num_classes = get_or(root, "num_classes", s.num_classes);
    s.dim = get_or(root, "dim", s.dim);
    s.n_per_class = get_or(root, "n_per_class", s.n_per_class);
    s.class_center_scale = get_or(root, "class_center_scale", s.class_center_scale);
    s.within_class_std = get_or(root, "within_class_std", s.within_class_std);
    s.covariate_shift_std = get_or(root, "covariate_shift_std", s.covariate_shift_std);
    s.zero_shot_misalignment_angle = get_or(root, "zero_shot_misalignment_angle", s.zero_shot_misalignment_angle);
    s.label_noise_rate = get_or(root, "label_noise_rate", s.label_noise_rate);
    s.n_ood_classes = get_or(root, "n_ood_classes", s.n_ood_classes);
    s.far_ood_shift_std = get_or(root, "far_ood_shift_std", s.far_ood_shift_std);
    s.cls_view_std = get_or(root, "cls_view_std", s.cls_view_std);
    s.cls_logit_scale = get_or(root, "cls_logit_scale", s.cls_logit_scale);
    s.rng_seed = get_or(root, "seed", s.rng_seed);
    s.validate();
    return s;
}

fs::path write_synth_benchmark(const SynthSpec& spec, const fs::path& out_dir) {
    if (spec.n_ood_classes < 1) throw ConfigError("synth: a benchmark needs n_ood_classes >= 1");
    const SynthBenchmark b = synth_generate(spec);
    fs::create_directories(out_dir);

    const std::pair<const EmbeddingSet*, const char*> images[] = {
        {&b.id_train, "id_train.cook"},   {&b.id_val, "id_val.cook"},
        {&b.id_test, "id_test.cook"},     {&b.id_test_covariate, "id_test_covariate.cook"},
        {&b.ood_near, "ood_near.cook"},   {&b.ood_far, "ood_far.cook"},
    };
    for (const auto& [set, file] : images) save_embedding_store(*set, out_dir / file);
    save_embedding_store(to_store(b.text), out_dir / "text.cook");
    const std::pair<const LogitSet*, const char*> logits[] = {
        {&b.cls_id_test, "cls_id_test.cook"},
        {&b.cls_id_test_covariate, "cls_id_test_covariate.cook"},
        {&b.cls_ood_near, "cls_ood_near.cook"},
        {&b.cls_ood_far, "cls_ood_far.cook"},
    };
    for (const auto& [l, file] : logits) save_embedding_store(to_store(*l), out_dir / file);

    ordered_json cfg;
    cfg["name"] = "synth-" + std::to_string(spec.rng_seed);
    cfg["num_classes"] = spec.num_classes;
    cfg["seed"] = spec.rng_seed;
    cfg["members"] = {"cls", "probe", "zero"};
    cfg["scores"] = ordered_json::array({{{"kind", "entropy"}, {"order", "average_then_score"}}});
    cfg["covariate"] = false;
    ordered_json stores;
    stores["id_train"] = "id_train.cook";
    stores["id_val"] = "id_val.cook";
    stores["id_test"] = "id_test.cook";
    stores["id_test_covariate"] = "id_test_covariate.cook";
    stores["text"] = "text.cook";
    stores["cls_logits"] = {"cls_id_test.cook", "cls_id_test_covariate.cook", "cls_ood_near.cook",
                            "cls_ood_far.cook"};
    stores["ood"] = ordered_json::array({{{"path", "ood_near.cook"}, {"tag", "near"}},
                                         {{"path", "ood_far.cook"}, {"tag", "far"}}});
    cfg["stores"] = std::move(stores);
    ordered_json text;
    text["class_names"] = b.text.class_names;
    text["temperature"] = b.text.temperature;
    text["prompt_template"] = b.text.prompt_template;
    cfg["text"] = std::move(text);
    const ProbeHyperparams hp;
    ordered_json probe;
    probe["epochs"] = hp.epochs;
    probe["base_lr"] = hp.base_lr;
    probe["momentum"] = hp.momentum;
    probe["weight_decay"] = hp.weight_decay;
    probe["nesterov"] = hp.nesterov;
    probe["batch_size"] = hp.batch_size;
    probe["lr_floor"] = hp.lr_floor;
    cfg["probe"] = std::move(probe);

    const fs::path config_path = out_dir / "benchmark.json";
    write_text(config_path, cfg.dump(2) + "\n");
    return config_path;
}

}  // namespace oodkit
