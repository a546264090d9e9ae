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
#include <span>
#include <string>
#include <vector>

#include "oodkit/data_model.hpp"
#include "oodkit/ensemble.hpp"

namespace oodkit {

inline constexpr double kDefaultTprTarget = 0.95;

double accuracy(std::span<const std::uint32_t> predictions, std::span<const std::uint32_t> labels);

// P(random ID sample is more ID-like than a random OOD sample), ties count
// one half. ID is the positive class; the orientation flag is honoured.
double auroc(const ScoreVector& id_scores, const ScoreVector& ood_scores);

// Fraction of OOD samples accepted at the most ID-like threshold that still
// accepts at least tpr_target of the ID samples. Acceptance is inclusive.
double fpr_at_tpr(const ScoreVector& id_scores, const ScoreVector& ood_scores,
                  double tpr_target = kDefaultTprTarget);

// One (id_test, ood_set) evaluation.
struct PairRecord {
    std::string id_dataset;
    std::string ood_dataset;
    OodTag tag = OodTag::near;
    std::optional<double> accuracy;  // absent when ID labels are missing
    double auroc = 0.0;
    double fpr_at_95 = 0.0;
};

struct Provenance {
    std::vector<Member> members;
    ScoreKind score = ScoreKind::entropy;
    ScoreOrder order = ScoreOrder::average_then_score;
    std::uint64_t seed = 0;
};

struct EvalReport {
    std::vector<PairRecord> records;
    std::optional<double> near_ood;
    std::optional<double> far_ood;
    std::optional<double> avg_ood;
    Provenance provenance;
};

// Per-dataset AUROC means for the near and far groups; avg_ood is their mean
// and exists only when both do.
EvalReport aggregate(std::vector<PairRecord> records, Provenance provenance = {});

}  // namespace oodkit
