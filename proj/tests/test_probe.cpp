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

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oodkit/ensemble.hpp"
#include "oodkit/error.hpp"
#include "oodkit/metrics.hpp"
#include "oodkit/probe.hpp"
#include "oodkit/rng.hpp"
#include "oodkit/store.hpp"
#include "oodkit/synth.hpp"
#include "oracles.hpp"

using namespace oodkit;

namespace {

struct Draw {
    LinearProbe probe;
    EmbeddingSet batch;
};

Draw random_draw(Rng& rng, std::size_t n, std::size_t d, std::size_t c) {
    Draw out;
    out.probe.weights = Matrix<double>(c, d);
    for (double& w : out.probe.weights.values()) w = rng.normal();
    out.probe.bias.resize(c);
    for (double& b : out.probe.bias) b = rng.normal();
    std::vector<float> x(n * d);
    for (float& v : x) v = static_cast<float>(rng.normal());
    out.batch.data = Matrix<float>(n, d, std::move(x));
    std::vector<std::uint32_t> y(n);
    for (auto& l : y) l = static_cast<std::uint32_t>(rng.index(c));
    out.batch.labels = std::move(y);
    out.batch.dataset_id = "batch";
    return out;
}

// Max relative error between analytic and central-difference gradients.
double gradient_error(const Draw& draw, double h) {
    const auto lg = ce_loss_and_grad(draw.probe, draw.batch);
    const std::size_t c = draw.probe.num_classes();
    const std::size_t d = draw.probe.dim();
    std::vector<double> w(draw.probe.weights.values().begin(), draw.probe.weights.values().end());
    std::vector<double> b = draw.probe.bias;
    std::vector<std::vector<double>> xs;
    for (std::size_t n = 0; n < draw.batch.size(); ++n) {
        const auto row = draw.batch.data.row(n);
        xs.emplace_back(row.begin(), row.end());
    }
    const auto& ys = *draw.batch.labels;

    auto rel = [](double a, double f) { return std::abs(a - f) / std::max(1e-6, std::max(std::abs(a), std::abs(f))); };
    double worst = 0.0;
    for (std::size_t i = 0; i < c * d; ++i) {
        const double keep = w[i];
        w[i] = keep + h;
        const double up = oracle::ce_loss(w, b, xs, ys);
        w[i] = keep - h;
        const double down = oracle::ce_loss(w, b, xs, ys);
        w[i] = keep;
        worst = std::max(worst, rel(lg.grad_weights.values()[i], (up - down) / (2 * h)));
    }
    for (std::size_t i = 0; i < c; ++i) {
        const double keep = b[i];
        b[i] = keep + h;
        const double up = oracle::ce_loss(w, b, xs, ys);
        b[i] = keep - h;
        const double down = oracle::ce_loss(w, b, xs, ys);
        b[i] = keep;
        worst = std::max(worst, rel(lg.grad_bias[i], (up - down) / (2 * h)));
    }
    return worst;
}

SynthSpec separable_spec() {
    SynthSpec spec;
    spec.num_classes = 3;
    spec.dim = 8;
    spec.n_per_class = 100;
    spec.class_center_scale = 4.0;
    spec.within_class_std = 0.5;
    spec.rng_seed = 2024;
    return spec;
}

}  // namespace

TEST_CASE("probe logits: zero weights give the bias") {
    LinearProbe p;
    p.weights = Matrix<double>(2, 4);
    p.bias = {0.3, -0.3};
    EmbeddingSet x;
    x.data = Matrix<float>(3, 4, 1.5f);
    const auto l = probe_logits(p, x);
    for (std::size_t n = 0; n < 3; ++n) {
        CHECK(l.data(n, 0) == 0.3);
        CHECK(l.data(n, 1) == -0.3);
    }
    CHECK(l.member == Member::probe);
}

TEST_CASE("probe logits: identity weights pick the basis class") {
    LinearProbe p;
    p.weights = Matrix<double>(3, 3);
    for (std::size_t i = 0; i < 3; ++i) p.weights(i, i) = 1.0;
    p.bias = {0, 0, 0};
    EmbeddingSet x;
    x.data = Matrix<float>(1, 3, std::vector<float>{0, 0, 1});
    const auto l = probe_logits(p, x);
    CHECK(l.data(0, 0) == 0.0);
    CHECK(l.data(0, 1) == 0.0);
    CHECK(l.data(0, 2) == 1.0);
}

TEST_CASE("probe logits match a naive triple loop") {
    Rng rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        const auto draw = random_draw(rng, 4, 3, 2);
        std::vector<std::vector<double>> w(2, std::vector<double>(3)), x;
        for (std::size_t c = 0; c < 2; ++c)
            for (std::size_t j = 0; j < 3; ++j) w[c][j] = draw.probe.weights(c, j);
        for (std::size_t n = 0; n < 4; ++n) {
            const auto r = draw.batch.data.row(n);
            x.emplace_back(r.begin(), r.end());
        }
        const auto expected = oracle::matmul_bias(w, draw.probe.bias, x);
        const auto got = probe_logits(draw.probe, draw.batch);
        for (std::size_t n = 0; n < 4; ++n)
            for (std::size_t c = 0; c < 2; ++c) CHECK(std::abs(got.data(n, c) - expected[n][c]) <= 1e-12);
    }
    LinearProbe p = random_draw(rng, 1, 3, 2).probe;
    EmbeddingSet wrong;
    wrong.data = Matrix<float>(1, 4, 1.0f);
    CHECK_THROWS_AS(probe_logits(p, wrong), DataError);
}

TEST_CASE("cross-entropy at zero parameters is ln C") {
    Rng rng(2);
    for (std::size_t c : {2u, 3u, 10u}) {
        auto draw = random_draw(rng, 7, 5, c);
        draw.probe.weights = Matrix<double>(c, 5);
        draw.probe.bias.assign(c, 0.0);
        CHECK(ce_loss_and_grad(draw.probe, draw.batch).loss == doctest::Approx(std::log(double(c))).epsilon(1e-14));
    }
}

TEST_CASE("single example bias gradient") {
    LinearProbe p;
    p.weights = Matrix<double>(2, 1);
    p.bias = {0.0, 0.0};
    EmbeddingSet b;
    b.data = Matrix<float>(1, 1, 1.0f);
    b.labels = std::vector<std::uint32_t>{0};
    const auto lg = ce_loss_and_grad(p, b);
    CHECK(lg.grad_bias[0] == -0.5);
    CHECK(lg.grad_bias[1] == 0.5);
}

TEST_CASE("gradients match central finite differences") {
    Rng rng(3);
    SUBCASE("5-example batch, d=4, C=3") {
        CHECK(gradient_error(random_draw(rng, 5, 4, 3), 1e-5) < 1e-4);
    }
    SUBCASE("property over 100 random draws") {
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const std::size_t n = 1 + rng.index(8);
            const std::size_t d = 1 + rng.index(6);
            const std::size_t c = 2 + rng.index(4);
            worst = std::max(worst, gradient_error(random_draw(rng, n, d, c), 1e-5));
        }
        CHECK(worst < 1e-4);
    }
}

TEST_CASE("softmax shift invariance of the loss") {
    Rng rng(4);
    for (int trial = 0; trial < 50; ++trial) {
        auto draw = random_draw(rng, 6, 3, 4);
        const double before = ce_loss_and_grad(draw.probe, draw.batch).loss;
        const double shift = rng.uniform(-50.0, 50.0);
        for (double& b : draw.probe.bias) b += shift;
        CHECK(std::abs(ce_loss_and_grad(draw.probe, draw.batch).loss - before) <= 1e-12);
    }
}

TEST_CASE("full-batch gradient descent does not increase the loss") {
    Rng rng(5);
    auto draw = random_draw(rng, 40, 6, 4);
    double prev = ce_loss_and_grad(draw.probe, draw.batch).loss;
    for (int step = 0; step < 50; ++step) {
        const auto lg = ce_loss_and_grad(draw.probe, draw.batch);
        auto w = draw.probe.weights.values();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= 1e-3 * lg.grad_weights.values()[i];
        for (std::size_t c = 0; c < 4; ++c) draw.probe.bias[c] -= 1e-3 * lg.grad_bias[c];
        const double now = ce_loss_and_grad(draw.probe, draw.batch).loss;
        CHECK(now <= prev);
        prev = now;
    }
}

TEST_CASE("cosine schedule endpoints") {
    CHECK(cosine_lr(0, 1000, 0.1, 1e-6) == 0.1);
    CHECK(cosine_lr(1000, 1000, 0.1, 1e-6) == doctest::Approx(1e-6).epsilon(1e-12));
    CHECK(cosine_lr(500, 1000, 0.1, 1e-6) == doctest::Approx(0.5 * (0.1 + 1e-6)).epsilon(1e-12));
    double prev = 1.0;
    for (std::uint64_t s = 0; s <= 100; ++s) {
        const double lr = cosine_lr(s, 100, 0.1, 1e-6);
        CHECK(lr <= prev);
        prev = lr;
    }
}

TEST_CASE("initialization is fan-in uniform and seeded") {
    const auto a = init_probe(5, 16, 9);
    const auto b = init_probe(5, 16, 9);
    CHECK(a == b);
    for (double w : a.weights.values()) CHECK(std::abs(w) <= 0.25);
    for (double v : a.bias) CHECK(std::abs(v) <= 0.25);
    CHECK_FALSE(a == init_probe(5, 16, 10));
}

TEST_CASE("probe fits a separable benchmark") {
    const auto bench = synth_generate(separable_spec());
    const auto& train = bench.id_train;
    // Nearest-center classifier separates the training set outright.
    {
        std::size_t hits = 0;
        std::vector<std::vector<double>> centers(3, std::vector<double>(8, 0.0));
        for (std::size_t n = 0; n < train.size(); ++n)
            for (std::size_t j = 0; j < 8; ++j) centers[(*train.labels)[n]][j] += train.data(n, j) / 100.0;
        for (std::size_t n = 0; n < train.size(); ++n) {
            std::vector<double> neg_dist(3);
            for (std::size_t c = 0; c < 3; ++c) {
                double s = 0;
                for (std::size_t j = 0; j < 8; ++j) s += std::pow(train.data(n, j) - centers[c][j], 2);
                neg_dist[c] = -s;
            }
            hits += oracle::scan_argmax(neg_dist) == (*train.labels)[n] ? 1 : 0;
        }
        REQUIRE(hits == train.size());
    }
    ProbeHyperparams hp;
    hp.rng_seed = 1;
    const auto probe = train_probe(train, 3, hp);
    const double acc = accuracy(predict(softmax(probe_logits(probe, train))), *train.labels);
    CHECK(acc >= 0.99);
}

TEST_CASE("training is deterministic") {
    const auto bench = synth_generate(separable_spec());
    ProbeHyperparams hp;
    hp.rng_seed = 77;
    hp.epochs = 3;
    const auto a = train_probe(bench.id_train, 3, hp);
    const auto b = train_probe(bench.id_train, 3, hp);
    CHECK(a == b);
    hp.rng_seed = 78;
    CHECK_FALSE(a == train_probe(bench.id_train, 3, hp));
}

TEST_CASE("partial last batch and plain momentum") {
    const auto bench = synth_generate(separable_spec());
    ProbeHyperparams hp;
    hp.batch_size = 7;  // 300 = 42 * 7 + 6
    hp.nesterov = false;
    hp.epochs = 2;
    const auto p = train_probe(bench.id_train, 3, hp);
    CHECK(accuracy(predict(softmax(probe_logits(p, bench.id_train))), *bench.id_train.labels) > 0.9);
}

TEST_CASE("training input errors") {
    EmbeddingSet unlabelled;
    unlabelled.data = Matrix<float>(2, 2, 1.0f);
    CHECK_THROWS_AS(train_probe(unlabelled, 2, {}), DataError);
    EmbeddingSet bad = unlabelled;
    bad.labels = std::vector<std::uint32_t>{0, 5};
    CHECK_THROWS_AS(train_probe(bad, 2, {}), DataError);
    EmbeddingSet empty;
    empty.labels = std::vector<std::uint32_t>{};
    CHECK_THROWS_AS(train_probe(empty, 2, {}), DataError);
    ProbeHyperparams hp;
    hp.momentum = 1.0;
    bad.labels = std::vector<std::uint32_t>{0, 1};
    CHECK_THROWS_AS(train_probe(bad, 2, hp), ConfigError);
}

TEST_CASE("checkpoint round-trip") {
    Rng rng(8);
    for (auto [c, d] : {std::pair<std::size_t, std::size_t>{3, 8}, {10, 4}, {4, 4}}) {
        const auto p = random_draw(rng, 1, d, c).probe;
        const auto ckpt = to_checkpoint(p, "demo");
        CHECK(ckpt.dataset_id == "probe:demo");
        CHECK(ckpt.num_classes == c);
        CHECK(ckpt.size() == c + (c + d - 1) / d);
        const auto back = probe_from_checkpoint(decode_store(encode_store(ckpt)));
        CHECK(back == round_to_checkpoint_precision(p));
    }
    EmbeddingSet not_probe;
    not_probe.data = Matrix<float>(3, 2, 1.0f);
    not_probe.dataset_id = "text:x";
    CHECK_THROWS_AS(probe_from_checkpoint(not_probe), DataError);
}
