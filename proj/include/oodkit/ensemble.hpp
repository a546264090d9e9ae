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
#include <span>
#include <vector>

#include "oodkit/data_model.hpp"

namespace oodkit {

inline constexpr double kProbSumTolerance = 1e-9;

// N x C class probabilities and the members averaged into them.
struct ProbSet {
    Matrix<double> data;
    std::vector<Member> members;

    // Every row sums to 1 within kProbSumTolerance and entries are in [0, 1].
    void validate() const;
};

struct ScoreVector {
    std::vector<double> values;
    ScoreKind kind = ScoreKind::entropy;
    bool higher_is_ood = true;
};

// Max-subtracted row softmax.
ProbSet softmax(const LogitSet& logits);

// Equal-weight mean of the member probabilities.
ProbSet ensemble_probs(std::span<const ProbSet> members);

// Row argmax, lowest index on ties.
std::vector<std::uint32_t> predict(const ProbSet& probs);

double msp(std::span<const double> row) noexcept;
// Natural-log entropy with 0 log 0 = 0.
double entropy(std::span<const double> row) noexcept;

// Scores an already averaged ProbSet (average_then_score).
ScoreVector ood_score(const ProbSet& probs, ScoreKind kind);

// Scores a member list in either order. MSP keeps its higher-is-ID
// orientation in both orders; the flag on the result says which way it points.
ScoreVector ood_score(std::span<const ProbSet> members, ScoreKind kind, ScoreOrder order);

}  // namespace oodkit
