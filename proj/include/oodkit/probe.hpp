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
#include <string>

#include "oodkit/data_model.hpp"

namespace oodkit {

// Affine classifier on raw (un-normalized) image embeddings.
struct LinearProbe {
    Matrix<double> weights;     // C x d
    std::vector<double> bias;   // C

    std::size_t num_classes() const noexcept { return weights.rows(); }
    std::size_t dim() const noexcept { return weights.cols(); }

    void validate() const;
    bool operator==(const LinearProbe&) const = default;
};

struct ProbeHyperparams {
    std::uint64_t epochs = 20;
    double base_lr = 0.1;
    double momentum = 0.9;
    double weight_decay = 0.0005;
    bool nesterov = true;
    std::uint64_t batch_size = 128;
    double lr_floor = 1e-6;
    std::uint64_t rng_seed = 0;

    void validate() const;
};

struct LossAndGrad {
    double loss = 0.0;
    Matrix<double> grad_weights;
    std::vector<double> grad_bias;
};

LogitSet probe_logits(const LinearProbe& probe, const EmbeddingSet& images);

// Mean cross-entropy over the selected rows and its exact gradient. Weight
// decay is not part of the loss.
LossAndGrad ce_loss_and_grad(const LinearProbe& probe, const Matrix<float>& inputs,
                             std::span<const std::uint32_t> labels,
                             std::span<const std::size_t> rows);

// Whole-set convenience overload; the set must be labelled.
LossAndGrad ce_loss_and_grad(const LinearProbe& probe, const EmbeddingSet& batch);

// Multiplier-floored cosine annealing:
//   base_lr * (m + (1 - m) * 0.5 * (1 + cos(pi * step / total_steps))),
//   m = lr_floor / base_lr.
double cosine_lr(std::uint64_t step, std::uint64_t total_steps, double base_lr, double lr_floor);

// Fan-in uniform initialization in [-1/sqrt(d), 1/sqrt(d)], W row-major then b.
LinearProbe init_probe(std::size_t num_classes, std::size_t dim, std::uint64_t seed);

// Mini-batch SGD (momentum, optional Nesterov, L2 decay added to the
// gradient) under the cosine schedule. Each epoch reshuffles with the seeded
// generator and keeps the final partial batch. Returns the last iterate.
LinearProbe train_probe(const EmbeddingSet& train, std::size_t num_classes,
                        const ProbeHyperparams& hp);

// Checkpoint in the store container: dataset_id "probe:<name>", header C set,
// rows are the C weight rows followed by the bias as one extra row (or
// ceil(C / d) zero-padded rows when C > d). Values are binary32.
EmbeddingSet to_checkpoint(const LinearProbe& probe, const std::string& name);
LinearProbe probe_from_checkpoint(const EmbeddingSet& set);

// Rounds parameters to binary32, i.e. what a checkpoint round-trip yields.
LinearProbe round_to_checkpoint_precision(const LinearProbe& probe);

}  // namespace oodkit
