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

#include "oodkit/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "oodkit/error.hpp"
#include "oodkit/kernels.hpp"

namespace oodkit {

namespace {

// Sum in ascending order so the result does not depend on member order.
double order_free_sum(std::span<double> values) {
    std::sort(values.begin(), values.end());
    double acc = 0.0;
    for (double v : values) acc += v;
    return acc;
}

void check_same_shape(std::span<const ProbSet> members) {
    if (members.empty()) throw DataError("ensemble needs at least one member");
    const auto rows = members.front().data.rows();
    const auto cols = members.front().data.cols();
    for (const auto& m : members) {
        if (m.data.rows() != rows || m.data.cols() != cols) {
            throw DataError("ensemble members disagree in shape: " + std::to_string(rows) + "x" +
                            std::to_string(cols) + " vs " + std::to_string(m.data.rows()) + "x" +
                            std::to_string(m.data.cols()));
        }
    }
}

}  // namespace

void ProbSet::validate() const {
    for (std::size_t n = 0; n < data.rows(); ++n) {
        double sum = 0.0;
        for (double p : data.row(n)) {
            if (!(p >= 0.0 && p <= 1.0)) {
                throw DataError("probability row " + std::to_string(n) + " has an entry outside [0, 1]");
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > kProbSumTolerance) {
            throw DataError("probability row " + std::to_string(n) + " sums to " + std::to_string(sum));
        }
    }
}

ProbSet softmax(const LogitSet& logits) {
    const auto& k = kernels::active();
    ProbSet out;
    out.members = {logits.member};
    out.data = Matrix<double>(logits.data.rows(), logits.data.cols());
    const std::size_t num_classes = logits.data.cols();
    for (std::size_t n = 0; n < logits.data.rows(); ++n) {
        const auto z = logits.data.row(n);
        auto p = out.data.row(n);
        const double zmax = k.max_f64(z.data(), num_classes);
        double sum = 0.0;
        for (std::size_t c = 0; c < num_classes; ++c) {
            p[c] = std::exp(z[c] - zmax);
            sum += p[c];
        }
        const double inv = 1.0 / sum;
        for (double& v : p) v *= inv;
    }
    return out;
}

ProbSet ensemble_probs(std::span<const ProbSet> members) {
    check_same_shape(members);
    if (members.size() == 1) return members.front();

    ProbSet out;
    for (const auto& m : members) {
        out.members.insert(out.members.end(), m.members.begin(), m.members.end());
    }
    const auto& first = members.front().data;
    out.data = Matrix<double>(first.rows(), first.cols());
    const double count = static_cast<double>(members.size());
    std::vector<double> column(members.size());
    auto dst = out.data.values();
    for (std::size_t i = 0; i < dst.size(); ++i) {
        for (std::size_t m = 0; m < members.size(); ++m) column[m] = members[m].data.values()[i];
        dst[i] = order_free_sum(column) / count;
    }
    return out;
}

std::vector<std::uint32_t> predict(const ProbSet& probs) {
    std::vector<std::uint32_t> out(probs.data.rows());
    for (std::size_t n = 0; n < probs.data.rows(); ++n) {
        const auto row = probs.data.row(n);
        // max_element returns the first maximum.
        out[n] = static_cast<std::uint32_t>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return out;
}

double msp(std::span<const double> row) noexcept { return *std::max_element(row.begin(), row.end()); }

double entropy(std::span<const double> row) noexcept {
    double h = 0.0;
    for (double p : row) {
        if (p > 0.0) h -= p * std::log(p);
    }
    const double upper = std::log(static_cast<double>(row.size()));
    return std::clamp(h, 0.0, upper);
}

ScoreVector ood_score(const ProbSet& probs, ScoreKind kind) {
    probs.validate();
    ScoreVector out;
    out.kind = kind;
    out.higher_is_ood = kind == ScoreKind::entropy;
    out.values.resize(probs.data.rows());
    for (std::size_t n = 0; n < probs.data.rows(); ++n) {
        const auto row = probs.data.row(n);
        out.values[n] = kind == ScoreKind::msp ? msp(row) : entropy(row);
    }
    return out;
}

ScoreVector ood_score(std::span<const ProbSet> members, ScoreKind kind, ScoreOrder order) {
    check_same_shape(members);
    if (order == ScoreOrder::average_then_score) return ood_score(ensemble_probs(members), kind);

    std::vector<ScoreVector> per_member;
    per_member.reserve(members.size());
    for (const auto& m : members) per_member.push_back(ood_score(m, kind));

    ScoreVector out;
    out.kind = kind;
    out.higher_is_ood = kind == ScoreKind::entropy;
    out.values.resize(members.front().data.rows());
    std::vector<double> column(members.size());
    const double count = static_cast<double>(members.size());
    for (std::size_t n = 0; n < out.values.size(); ++n) {
        for (std::size_t m = 0; m < members.size(); ++m) column[m] = per_member[m].values[n];
        out.values[n] = order_free_sum(column) / count;
    }
    return out;
}

}  // namespace oodkit
