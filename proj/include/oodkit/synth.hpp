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

#include "oodkit/data_model.hpp"

namespace oodkit {

struct SynthBenchmark {
    EmbeddingSet id_train;
    EmbeddingSet id_val;
    EmbeddingSet id_test;
    EmbeddingSet id_test_covariate;
    EmbeddingSet ood_near;
    EmbeddingSet ood_far;
    ClassTextEmbeddings text;
    // Standard-classifier logits for every evaluation split.
    LogitSet cls_id_test;
    LogitSet cls_id_test_covariate;
    LogitSet cls_ood_near;
    LogitSet cls_ood_far;
    // Generating cluster of every id_train row, before label noise.
    std::vector<std::uint32_t> id_train_true_labels;
};

// Gaussian clusters around random class centers. Near OOD uses fresh
// centers; far OOD uses fresh centers plus far_ood_shift_std extra noise.
// Text rows are the ID centers rotated by the misalignment angle in a random
// plane. Exactly round(rate * N) id_train labels are flipped to a uniformly
// drawn different class. Deterministic in the spec.
SynthBenchmark synth_generate(const SynthSpec& spec);

}  // namespace oodkit
