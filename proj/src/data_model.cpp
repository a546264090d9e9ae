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

#include "oodkit/data_model.hpp"

#include <array>
#include <cmath>
#include <set>
#include <utility>

#include "oodkit/error.hpp"

namespace oodkit {

namespace {

template <typename Enum, std::size_t N>
Enum parse_enum(std::string_view text, const std::array<std::pair<std::string_view, Enum>, N>& table,
                std::string_view what) {
    for (const auto& [key, value] : table) {
        if (key == text) return value;
    }
    throw ConfigError("unknown " + std::string(what) + " '" + std::string(text) + "'");
}

constexpr std::array<std::pair<std::string_view, Role>, 6> kRoles{{
    {"id_train", Role::id_train},
    {"id_val", Role::id_val},
    {"id_test", Role::id_test},
    {"ood_near", Role::ood_near},
    {"ood_far", Role::ood_far},
    {"id_test_covariate", Role::id_test_covariate},
}};

constexpr std::array<std::pair<std::string_view, Member>, 3> kMembers{{
    {"cls", Member::cls},
    {"probe", Member::probe},
    {"zero", Member::zero},
}};

template <typename T>
void require_finite(const Matrix<T>& m, std::string_view what) {
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (!std::isfinite(m(r, c))) {
                throw DataError(std::string(what) + ": non-finite value at row " + std::to_string(r) +
                                ", column " + std::to_string(c));
            }
        }
    }
}

}  // namespace

std::string_view to_string(Role role) noexcept {
    for (const auto& [key, value] : kRoles) {
        if (value == role) return key;
    }
    return "unknown";
}

Role role_from_string(std::string_view text) { return parse_enum(text, kRoles, "role"); }

std::string_view to_string(Member member) noexcept {
    for (const auto& [key, value] : kMembers) {
        if (value == member) return key;
    }
    return "unknown";
}

Member member_from_string(std::string_view text) { return parse_enum(text, kMembers, "member"); }

std::string_view to_string(OodTag tag) noexcept { return tag == OodTag::near ? "near" : "far"; }

OodTag ood_tag_from_string(std::string_view text) {
    constexpr std::array<std::pair<std::string_view, OodTag>, 2> table{{
        {"near", OodTag::near},
        {"far", OodTag::far},
    }};
    return parse_enum(text, table, "OOD tag");
}

std::string_view to_string(ScoreKind kind) noexcept {
    return kind == ScoreKind::msp ? "msp" : "entropy";
}

std::string_view to_string(ScoreOrder order) noexcept {
    return order == ScoreOrder::average_then_score ? "average_then_score" : "score_then_average";
}

ScoreKind score_kind_from_string(std::string_view text) {
    constexpr std::array<std::pair<std::string_view, ScoreKind>, 2> table{{
        {"msp", ScoreKind::msp},
        {"entropy", ScoreKind::entropy},
    }};
    return parse_enum(text, table, "score kind");
}

ScoreOrder score_order_from_string(std::string_view text) {
    constexpr std::array<std::pair<std::string_view, ScoreOrder>, 2> table{{
        {"average_then_score", ScoreOrder::average_then_score},
        {"score_then_average", ScoreOrder::score_then_average},
    }};
    return parse_enum(text, table, "score order");
}

void EmbeddingSet::validate() const {
    if (data.rows() < 1 || data.cols() < 1) {
        throw DataError("embedding set '" + dataset_id + "' must have N >= 1 and d >= 1");
    }
    require_finite(data, "embedding set '" + dataset_id + "'");
    if (labels) {
        if (labels->size() != data.rows()) {
            throw DataError("embedding set '" + dataset_id + "': label count " +
                            std::to_string(labels->size()) + " != N " + std::to_string(data.rows()));
        }
        if (num_classes != 0) {
            for (std::size_t i = 0; i < labels->size(); ++i) {
                if ((*labels)[i] >= num_classes) {
                    throw DataError("embedding set '" + dataset_id + "': label " +
                                    std::to_string((*labels)[i]) + " at row " + std::to_string(i) +
                                    " is not below C = " + std::to_string(num_classes));
                }
            }
        }
    }
}

void ClassTextEmbeddings::validate() const {
    if (data.rows() < 2) throw DataError("class text embeddings need at least 2 classes");
    if (data.cols() < 1) throw DataError("class text embeddings need d >= 1");
    require_finite(data, "class text embeddings");
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw DataError("temperature must be positive and finite");
    }
    if (class_names.size() != data.rows()) {
        throw DataError("class name count " + std::to_string(class_names.size()) +
                        " != text rows " + std::to_string(data.rows()));
    }
    std::set<std::string_view> seen;
    for (const auto& n : class_names) {
        if (!seen.insert(n).second) throw DataError("duplicate class name '" + n + "'");
    }
}

void LogitSet::validate() const {
    if (data.rows() < 1 || data.cols() < 1) {
        throw DataError("logit set for '" + source_dataset + "' is empty");
    }
    require_finite(data, "logit set for '" + source_dataset + "'");
}

void BenchmarkPlan::validate() const {
    if (members.empty()) throw ConfigError("member set must not be empty");
    if (ood_sets.empty()) throw ConfigError("at least one OOD set is required");
    for (const auto& ood : ood_sets) {
        if (ood.dataset_id == id_test) {
            throw ConfigError("OOD set '" + ood.dataset_id + "' collides with id_test");
        }
    }
}

void SynthSpec::validate() const {
    if (num_classes < 2) throw ConfigError("synth: num_classes must be >= 2");
    if (dim < 1) throw ConfigError("synth: dim must be >= 1");
    if (n_per_class < 1) throw ConfigError("synth: n_per_class must be >= 1");
    const std::array<std::pair<const char*, double>, 6> non_negative{{
        {"class_center_scale", class_center_scale},
        {"within_class_std", within_class_std},
        {"covariate_shift_std", covariate_shift_std},
        {"far_ood_shift_std", far_ood_shift_std},
        {"cls_view_std", cls_view_std},
        {"cls_logit_scale", cls_logit_scale},
    }};
    for (const auto& [key, value] : non_negative) {
        if (!(value >= 0.0) || !std::isfinite(value)) {
            throw ConfigError(std::string("synth: ") + key + " must be finite and >= 0");
        }
    }
    if (!(class_center_scale > 0.0)) throw ConfigError("synth: class_center_scale must be > 0");
    if (!(label_noise_rate >= 0.0 && label_noise_rate < 1.0)) {
        throw ConfigError("synth: label_noise_rate must be in [0, 1)");
    }
    if (!std::isfinite(zero_shot_misalignment_angle)) {
        throw ConfigError("synth: zero_shot_misalignment_angle must be finite");
    }
    if (dim < 2 && zero_shot_misalignment_angle != 0.0) {
        throw ConfigError("synth: a misalignment rotation needs dim >= 2");
    }
}

}  // namespace oodkit
