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

#include "oodkit/probe.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "oodkit/error.hpp"
#include "oodkit/kernels.hpp"
#include "oodkit/rng.hpp"
#include "oodkit/store.hpp"

namespace oodkit {

namespace {

void affine_row(const kernels::KernelTable& k, const LinearProbe& probe, std::span<const float> x,
                std::span<double> out) {
    for (std::size_t c = 0; c < probe.num_classes(); ++c) {
        out[c] = k.dot_f32_f64(x.data(), probe.weights.row(c).data(), x.size()) + probe.bias[c];
    }
}

void check_dims(const LinearProbe& probe, std::size_t dim) {
    if (probe.dim() != dim) {
        throw DataError("probe expects d = " + std::to_string(probe.dim()) + ", got " +
                        std::to_string(dim));
    }
}

}  // namespace

void LinearProbe::validate() const {
    if (weights.rows() < 1 || weights.cols() < 1) throw DataError("probe has empty weights");
    if (bias.size() != weights.rows()) throw DataError("probe bias length != class count");
    for (double v : weights.values()) {
        if (!std::isfinite(v)) throw DataError("probe weights are not finite");
    }
    for (double v : bias) {
        if (!std::isfinite(v)) throw DataError("probe bias is not finite");
    }
}

void ProbeHyperparams::validate() const {
    if (epochs < 1) throw ConfigError("probe: epochs must be >= 1");
    if (!(base_lr > 0.0)) throw ConfigError("probe: base_lr must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("probe: momentum must be in [0, 1)");
    if (!(weight_decay >= 0.0)) throw ConfigError("probe: weight_decay must be >= 0");
    if (batch_size < 1) throw ConfigError("probe: batch_size must be >= 1");
    if (!(lr_floor >= 0.0)) throw ConfigError("probe: lr_floor must be >= 0");
}

LogitSet probe_logits(const LinearProbe& probe, const EmbeddingSet& images) {
    check_dims(probe, images.dim());
    const auto& k = kernels::active();
    LogitSet logits;
    logits.member = Member::probe;
    logits.source_dataset = images.dataset_id;
    logits.data = Matrix<double>(images.size(), probe.num_classes());
    for (std::size_t n = 0; n < images.size(); ++n) {
        affine_row(k, probe, images.data.row(n), logits.data.row(n));
    }
    return logits;
}

LossAndGrad ce_loss_and_grad(const LinearProbe& probe, const Matrix<float>& inputs,
                             std::span<const std::uint32_t> labels,
                             std::span<const std::size_t> rows) {
    check_dims(probe, inputs.cols());
    if (labels.size() != inputs.rows()) throw DataError("label count != input rows");
    if (rows.empty()) throw DataError("cross-entropy over an empty batch");
    const auto& k = kernels::active();
    const std::size_t num_classes = probe.num_classes();
    const std::size_t d = probe.dim();
    const double inv_batch = 1.0 / static_cast<double>(rows.size());

    LossAndGrad out;
    out.grad_weights = Matrix<double>(num_classes, d);
    out.grad_bias.assign(num_classes, 0.0);
    std::vector<double> z(num_classes);

    double loss_sum = 0.0;
    for (std::size_t r : rows) {
        const std::uint32_t y = labels[r];
        if (y >= num_classes) {
            throw DataError("label " + std::to_string(y) + " at row " + std::to_string(r) +
                            " is not below C = " + std::to_string(num_classes));
        }
        const auto x = inputs.row(r);
        affine_row(k, probe, x, z);
        const double zmax = k.max_f64(z.data(), num_classes);
        double sum = 0.0;
        for (double& v : z) {
            v = std::exp(v - zmax);
            sum += v;
        }
        // z now holds unnormalized softmax; loss = logsumexp - z_y.
        loss_sum += std::log(sum) - std::log(z[y]);
        for (std::size_t c = 0; c < num_classes; ++c) {
            const double delta = (z[c] / sum - (c == y ? 1.0 : 0.0)) * inv_batch;
            out.grad_bias[c] += delta;
            k.axpy_f32_f64(delta, x.data(), out.grad_weights.row(c).data(), d);
        }
    }
    out.loss = loss_sum * inv_batch;
    return out;
}

LossAndGrad ce_loss_and_grad(const LinearProbe& probe, const EmbeddingSet& batch) {
    if (!batch.labels) throw DataError("cross-entropy needs labels on '" + batch.dataset_id + "'");
    std::vector<std::size_t> rows(batch.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return ce_loss_and_grad(probe, batch.data, *batch.labels, rows);
}

double cosine_lr(std::uint64_t step, std::uint64_t total_steps, double base_lr, double lr_floor) {
    const double floor_mult = lr_floor / base_lr;
    const double progress =
        total_steps == 0 ? 1.0 : static_cast<double>(step) / static_cast<double>(total_steps);
    const double cosine = 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
    return base_lr * (floor_mult + (1.0 - floor_mult) * cosine);
}

LinearProbe init_probe(std::size_t num_classes, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(dim));
    LinearProbe probe;
    probe.weights = Matrix<double>(num_classes, dim);
    for (double& w : probe.weights.values()) w = rng.uniform(-bound, bound);
    probe.bias.resize(num_classes);
    for (double& b : probe.bias) b = rng.uniform(-bound, bound);
    return probe;
}

LinearProbe train_probe(const EmbeddingSet& train, std::size_t num_classes,
                        const ProbeHyperparams& hp) {
    hp.validate();
    if (train.size() == 0) throw DataError("probe training set is empty");
    if (!train.labels) throw DataError("probe training set '" + train.dataset_id + "' has no labels");
    if (num_classes < 2) throw DataError("probe needs at least 2 classes");
    for (std::size_t i = 0; i < train.size(); ++i) {
        if ((*train.labels)[i] >= num_classes) {
            throw DataError("training label " + std::to_string((*train.labels)[i]) + " at row " +
                            std::to_string(i) + " is not below C = " + std::to_string(num_classes));
        }
    }

    const std::size_t n = train.size();
    const std::size_t d = train.dim();
    const std::size_t batches_per_epoch = (n + hp.batch_size - 1) / hp.batch_size;
    const std::uint64_t total_steps = hp.epochs * batches_per_epoch;

    // Initialization and shuffling draw from separate streams.
    LinearProbe probe = init_probe(num_classes, d, hp.rng_seed);
    Rng shuffle_rng(hp.rng_seed ^ 0x9e3779b97f4a7c15ULL);

    Matrix<double> velocity_w(num_classes, d);
    std::vector<double> velocity_b(num_classes, 0.0);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::uint64_t step = 0;
    for (std::uint64_t epoch = 0; epoch < hp.epochs; ++epoch) {
        shuffle_rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t start = 0; start < n; start += hp.batch_size) {
            const std::size_t stop = std::min(n, start + static_cast<std::size_t>(hp.batch_size));
            const std::span<const std::size_t> rows(order.data() + start, stop - start);
            LossAndGrad lg = ce_loss_and_grad(probe, train.data, *train.labels, rows);
            const double lr = cosine_lr(step, total_steps, hp.base_lr, hp.lr_floor);

            auto update = [&](double& param, double grad, double& velocity) {
                grad += hp.weight_decay * param;
                velocity = step == 0 ? grad : hp.momentum * velocity + grad;
                const double direction = hp.nesterov ? grad + hp.momentum * velocity : velocity;
                param -= lr * direction;
            };
            auto w = probe.weights.values();
            auto gw = lg.grad_weights.values();
            auto vw = velocity_w.values();
            for (std::size_t i = 0; i < w.size(); ++i) update(w[i], gw[i], vw[i]);
            for (std::size_t c = 0; c < num_classes; ++c) {
                update(probe.bias[c], lg.grad_bias[c], velocity_b[c]);
            }
            ++step;
        }
    }
    probe.validate();
    return probe;
}

EmbeddingSet to_checkpoint(const LinearProbe& probe, const std::string& name) {
    probe.validate();
    const std::size_t num_classes = probe.num_classes();
    const std::size_t d = probe.dim();
    // The bias fills one extra row when C <= d; wider class sets spill into
    // ceil(C / d) zero-padded rows.
    const std::size_t bias_rows = (num_classes + d - 1) / d;
    std::vector<float> values;
    values.reserve((num_classes + bias_rows) * d);
    for (double w : probe.weights.values()) values.push_back(static_cast<float>(w));
    for (std::size_t j = 0; j < bias_rows * d; ++j) {
        values.push_back(j < num_classes ? static_cast<float>(probe.bias[j]) : 0.0f);
    }
    for (float v : values) {
        if (!std::isfinite(v)) throw DataError("probe parameter overflows binary32");
    }
    EmbeddingSet set;
    set.data = Matrix<float>(num_classes + bias_rows, d, std::move(values));
    set.dataset_id = std::string(kProbePrefix) + name;
    set.num_classes = num_classes;
    return set;
}

LinearProbe probe_from_checkpoint(const EmbeddingSet& set) {
    if (!set.dataset_id.starts_with(kProbePrefix)) {
        throw DataError("store '" + set.dataset_id + "' is not a probe checkpoint");
    }
    const std::size_t d = set.dim();
    const std::size_t num_classes = set.num_classes != 0 ? set.num_classes : set.size() - 1;
    const std::size_t bias_rows = (num_classes + d - 1) / d;
    if (num_classes < 2 || set.size() != num_classes + bias_rows) {
        throw DataError("probe checkpoint '" + set.dataset_id + "' has " + std::to_string(set.size()) +
                        " rows, expected C + ceil(C / d) with C = " + std::to_string(num_classes));
    }
    LinearProbe probe;
    probe.weights = Matrix<double>(num_classes, d);
    for (std::size_t c = 0; c < num_classes; ++c) {
        for (std::size_t j = 0; j < d; ++j) probe.weights(c, j) = set.data(c, j);
    }
    const auto flat = set.data.values().subspan(num_classes * d);
    probe.bias.assign(flat.begin(), flat.begin() + static_cast<std::ptrdiff_t>(num_classes));
    return probe;
}

LinearProbe round_to_checkpoint_precision(const LinearProbe& probe) {
    LinearProbe out = probe;
    for (double& w : out.weights.values()) w = static_cast<double>(static_cast<float>(w));
    for (double& b : out.bias) b = static_cast<double>(static_cast<float>(b));
    return out;
}

}  // namespace oodkit
