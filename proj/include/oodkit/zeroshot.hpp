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

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oodkit/data_model.hpp"

namespace oodkit {

inline constexpr std::string_view kClassPlaceholder = "[cls]";

// Rows with an L2 norm below this are rejected; cosine is undefined there.
inline constexpr double kMinRowNorm = 1e-12;

// logit[n][c] = temperature * cos(image_n, text_c).
LogitSet zero_shot_logits(const EmbeddingSet& images, const ClassTextEmbeddings& text);

// One prompt per class: the placeholder replaced by the class name with
// underscores turned into spaces. The template must contain "[cls]" once.
std::vector<std::string> build_prompts(std::span<const std::string> class_names,
                                       std::string_view prompt_template = kDefaultPromptTemplate);

}  // namespace oodkit
