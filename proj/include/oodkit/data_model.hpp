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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "oodkit/matrix.hpp"

namespace oodkit {

enum class Role { id_train, id_val, id_test, ood_near, ood_far, id_test_covariate };

std::string_view to_string(Role role) noexcept;
Role role_from_string(std::string_view text);

// Which predictor produced a set of logits or probabilities.
enum class Member { cls, probe, zero };

std::string_view to_string(Member member) noexcept;
Member member_from_string(std::string_view text);

inline constexpr std::string_view kDefaultPromptTemplate = "a photo of a [cls]";
inline constexpr double kDefaultTemperature = 100.0;

// N x d image embeddings, optionally labelled.
struct EmbeddingSet {
    Matrix<float> data;
    std::optional<std::vector<std::uint32_t>> labels;
    std::string dataset_id;
    Role role = Role::id_test;
    std::uint64_t num_classes = 0;  // 0 when unknown

    std::size_t size() const noexcept { return data.rows(); }
    std::size_t dim() const noexcept { return data.cols(); }

    // Throws DataError if any invariant is violated.
    void validate() const;
};

// C x d class-prompt embeddings and the temperature applied to cosines.
struct ClassTextEmbeddings {
    Matrix<float> data;
    std::vector<std::string> class_names;
    std::string prompt_template{kDefaultPromptTemplate};
    double temperature = kDefaultTemperature;
    std::string name;

    std::size_t num_classes() const noexcept { return data.rows(); }
    std::size_t dim() const noexcept { return data.cols(); }

    void validate() const;
};

// N x C unnormalized class scores from one member.
struct LogitSet {
    Matrix<double> data;
    Member member = Member::cls;
    std::string source_dataset;

    void validate() const;
};

enum class OodTag { near, far };

std::string_view to_string(OodTag tag) noexcept;
OodTag ood_tag_from_string(std::string_view text);

enum class ScoreKind { msp, entropy };
enum class ScoreOrder { average_then_score, score_then_average };

std::string_view to_string(ScoreKind kind) noexcept;
std::string_view to_string(ScoreOrder order) noexcept;
ScoreKind score_kind_from_string(std::string_view text);
ScoreOrder score_order_from_string(std::string_view text);

struct OodSetRef {
    std::string dataset_id;
    OodTag tag = OodTag::near;
};

// Dataset roles and the ensemble configuration for one evaluation.
struct BenchmarkPlan {
    std::string id_train;
    std::string id_val;
    std::string id_test;
    std::vector<OodSetRef> ood_sets;
    std::vector<Member> members;
    ScoreKind score = ScoreKind::entropy;
    ScoreOrder score_order = ScoreOrder::average_then_score;

    // Throws ConfigError.
    void validate() const;
};

// Parameters of the Gaussian-cluster benchmark generator.
struct SynthSpec {
    std::uint64_t num_classes = 10;
    std::uint64_t dim = 64;
    std::uint64_t n_per_class = 100;
    double class_center_scale = 1.0;
    double within_class_std = 0.6;
    double covariate_shift_std = 0.6;
    double zero_shot_misalignment_angle = 0.0;  // radians
    double label_noise_rate = 0.0;
    std::uint64_t n_ood_classes = 10;
    // Extra isotropic noise on far-OOD samples on top of within_class_std.
    double far_ood_shift_std = 1.5;
    // Standard-classifier stand-in: Bayes posterior on an independently
    // perturbed view of each sample.
    double cls_view_std = 0.4;
    double cls_logit_scale = 1.0;
    std::uint64_t rng_seed = 0;

    // Throws ConfigError.
    void validate() const;
};

}  // namespace oodkit
