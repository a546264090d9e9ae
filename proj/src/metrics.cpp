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

#include "oodkit/metrics.hpp"

#include <algorithm>
#include <numeric>

#include "oodkit/error.hpp"

namespace oodkit {

namespace {

void check_pair(const ScoreVector& id_scores, const ScoreVector& ood_scores) {
    if (id_scores.values.empty() || ood_scores.values.empty()) {
        throw DataError("ID and OOD score vectors must be nonempty");
    }
    if (id_scores.kind != ood_scores.kind || id_scores.higher_is_ood != ood_scores.higher_is_ood) {
        throw DataError("ID and OOD scores differ in kind or orientation");
    }
}

// Scores mapped so that larger means more ID-like.
std::vector<double> id_likeness(const ScoreVector& s) {
    std::vector<double> out = s.values;
    if (s.higher_is_ood) {
        for (double& v : out) v = -v;
    }
    return out;
}

}  // namespace

double accuracy(std::span<const std::uint32_t> predictions, std::span<const std::uint32_t> labels) {
    if (predictions.size() != labels.size()) {
        throw DataError("accuracy: " + std::to_string(predictions.size()) + " predictions vs " +
                        std::to_string(labels.size()) + " labels");
    }
    if (predictions.empty()) throw DataError("accuracy of an empty set");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) hits += predictions[i] == labels[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double auroc(const ScoreVector& id_scores, const ScoreVector& ood_scores) {
    check_pair(id_scores, ood_scores);
    const auto id = id_likeness(id_scores);
    const auto ood = id_likeness(ood_scores);

    struct Entry {
        double score;
        bool is_id;
    };
    std::vector<Entry> pooled;
    pooled.reserve(id.size() + ood.size());
    for (double v : id) pooled.push_back({v, true});
    for (double v : ood) pooled.push_back({v, false});
    std::sort(pooled.begin(), pooled.end(),
              [](const Entry& a, const Entry& b) { return a.score < b.score; });

    // Sum of 1-based midranks of the ID samples.
    double id_rank_sum = 0.0;
    for (std::size_t i = 0; i < pooled.size();) {
        std::size_t j = i;
        std::size_t id_in_group = 0;
        while (j < pooled.size() && pooled[j].score == pooled[i].score) {
            id_in_group += pooled[j].is_id ? 1 : 0;
            ++j;
        }
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);
        id_rank_sum += midrank * static_cast<double>(id_in_group);
        i = j;
    }
    const double n_id = static_cast<double>(id.size());
    const double n_ood = static_cast<double>(ood.size());
    const double u = id_rank_sum - n_id * (n_id + 1.0) / 2.0;
    return u / (n_id * n_ood);
}

double fpr_at_tpr(const ScoreVector& id_scores, const ScoreVector& ood_scores, double tpr_target) {
    check_pair(id_scores, ood_scores);
    if (!(tpr_target > 0.0 && tpr_target <= 1.0)) throw DataError("TPR target must be in (0, 1]");
    auto id = id_likeness(id_scores);
    const auto ood = id_likeness(ood_scores);
    std::sort(id.begin(), id.end(), std::greater<>());

    // Walk thresholds from the most ID-like down; at threshold id[k] every ID
    // score >= id[k] is accepted, including later ties.
    const double n_id = static_cast<double>(id.size());
    double threshold = id.back();
    for (std::size_t k = 0; k < id.size();) {
        std::size_t j = k;
        while (j < id.size() && id[j] == id[k]) ++j;
        if (static_cast<double>(j) / n_id >= tpr_target) {
            threshold = id[k];
            break;
        }
        k = j;
    }
    const auto accepted = std::count_if(ood.begin(), ood.end(), [&](double v) { return v >= threshold; });
    return static_cast<double>(accepted) / static_cast<double>(ood.size());
}

EvalReport aggregate(std::vector<PairRecord> records, Provenance provenance) {
    EvalReport report;
    report.provenance = std::move(provenance);
    double near_sum = 0.0, far_sum = 0.0;
    std::size_t near_count = 0, far_count = 0;
    for (const auto& r : records) {
        if (r.tag == OodTag::near) {
            near_sum += r.auroc;
            ++near_count;
        } else {
            far_sum += r.auroc;
            ++far_count;
        }
    }
    if (near_count > 0) report.near_ood = near_sum / static_cast<double>(near_count);
    if (far_count > 0) report.far_ood = far_sum / static_cast<double>(far_count);
    if (report.near_ood && report.far_ood) report.avg_ood = (*report.near_ood + *report.far_ood) / 2.0;
    report.records = std::move(records);
    return report;
}

}  // namespace oodkit
