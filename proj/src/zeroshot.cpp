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

#include "oodkit/zeroshot.hpp"

#include <algorithm>
#include <cmath>

#include "oodkit/error.hpp"
#include "oodkit/kernels.hpp"

namespace oodkit {

LogitSet zero_shot_logits(const EmbeddingSet& images, const ClassTextEmbeddings& text) {
    if (images.dim() != text.dim()) {
        throw DataError("zero-shot: image dimension " + std::to_string(images.dim()) +
                        " != text dimension " + std::to_string(text.dim()));
    }
    if (!(text.temperature > 0.0)) throw DataError("zero-shot: temperature must be positive");
    const auto& k = kernels::active();
    const std::size_t d = text.dim();
    const std::size_t num_classes = text.num_classes();

    // Unit-norm text rows in binary64.
    Matrix<double> text_unit(num_classes, d);
    for (std::size_t c = 0; c < num_classes; ++c) {
        const auto row = text.data.row(c);
        const double norm = std::sqrt(k.dot_f32(row.data(), row.data(), d));
        if (!(norm >= kMinRowNorm)) {
            throw DataError("zero-shot: text row " + std::to_string(c) + " has zero norm");
        }
        auto out = text_unit.row(c);
        for (std::size_t j = 0; j < d; ++j) out[j] = static_cast<double>(row[j]) / norm;
    }

    LogitSet logits;
    logits.member = Member::zero;
    logits.source_dataset = images.dataset_id;
    logits.data = Matrix<double>(images.size(), num_classes);
    for (std::size_t n = 0; n < images.size(); ++n) {
        const auto x = images.data.row(n);
        const double norm = std::sqrt(k.dot_f32(x.data(), x.data(), d));
        if (!(norm >= kMinRowNorm)) {
            throw DataError("zero-shot: image row " + std::to_string(n) + " of '" +
                            images.dataset_id + "' has zero norm");
        }
        auto out = logits.data.row(n);
        for (std::size_t c = 0; c < num_classes; ++c) {
            const double cosine = k.dot_f32_f64(x.data(), text_unit.row(c).data(), d) / norm;
            out[c] = text.temperature * std::clamp(cosine, -1.0, 1.0);
        }
    }
    return logits;
}

std::vector<std::string> build_prompts(std::span<const std::string> class_names,
                                       std::string_view prompt_template) {
    const auto at = prompt_template.find(kClassPlaceholder);
    if (at == std::string_view::npos) {
        throw ConfigError("prompt template '" + std::string(prompt_template) + "' lacks \"[cls]\"");
    }
    if (prompt_template.find(kClassPlaceholder, at + 1) != std::string_view::npos) {
        throw ConfigError("prompt template '" + std::string(prompt_template) +
                          "' contains \"[cls]\" more than once");
    }
    const std::string_view head = prompt_template.substr(0, at);
    const std::string_view tail = prompt_template.substr(at + kClassPlaceholder.size());

    std::vector<std::string> prompts;
    prompts.reserve(class_names.size());
    for (const auto& name : class_names) {
        std::string cls = name;
        std::replace(cls.begin(), cls.end(), '_', ' ');
        prompts.push_back(std::string(head) + cls + std::string(tail));
    }
    return prompts;
}

}  // namespace oodkit
