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

#include "oodkit/error.hpp"
#include "oodkit/metrics.hpp"
#include "oodkit/rng.hpp"
#include "oracles.hpp"

using namespace oodkit;

namespace {

ScoreVector msp_scores(std::vector<double> v) { return {std::move(v), ScoreKind::msp, false}; }
ScoreVector entropy_scores(std::vector<double> v) { return {std::move(v), ScoreKind::entropy, true}; }

std::vector<double> tied_scores(Rng& rng, std::size_t n, std::size_t levels, double offset) {
    std::vector<double> out(n);
    for (double& v : out) v = offset + static_cast<double>(rng.index(levels)) / static_cast<double>(levels);
    return out;
}

}  // namespace

TEST_CASE("accuracy") {
    const std::vector<std::uint32_t> y{0, 1, 2, 1};
    CHECK(accuracy(y, y) == 1.0);
    CHECK(accuracy(std::vector<std::uint32_t>{1, 0, 0, 0}, y) == 0.0);
    CHECK(accuracy(std::vector<std::uint32_t>{0, 1, 2, 0}, y) == 0.75);
    CHECK_THROWS_AS(accuracy(std::vector<std::uint32_t>{0}, y), DataError);
}

TEST_CASE("auroc examples") {
    CHECK(auroc(msp_scores({0.9, 0.8}), msp_scores({0.5, 0.1, 0.2})) == 1.0);
    CHECK(auroc(msp_scores({0.5, 0.7, 0.5}), msp_scores({0.7, 0.5, 0.5})) == 0.5);
    // 4 of the 6 (ID, OOD) pairs have the ID score higher, no ties.
    const double expected = oracle::pair_count_auroc({0.9, 0.8, 0.7}, {0.85, 0.6});
    CHECK(expected == doctest::Approx(4.0 / 6.0));
    CHECK(auroc(msp_scores({0.9, 0.8, 0.7}), msp_scores({0.85, 0.6})) == expected);
}

TEST_CASE("auroc honours orientation") {
    // Entropy: lower is more ID-like.
    CHECK(auroc(entropy_scores({0.1, 0.2}), entropy_scores({1.0, 2.0})) == 1.0);
    CHECK(auroc(entropy_scores({1.0, 2.0}), entropy_scores({0.1, 0.2})) == 0.0);
    CHECK_THROWS_AS(auroc(msp_scores({0.1}), entropy_scores({0.2})), DataError);
    CHECK_THROWS_AS(auroc(msp_scores({}), msp_scores({0.2})), DataError);
}

TEST_CASE("property: auroc equals the pair-count oracle exactly") {
    Rng rng(31);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng.index(300);
        const std::size_t m = 1 + rng.index(300);
        const std::size_t levels = 1 + rng.index(30);
        auto id = tied_scores(rng, n, levels, 0.1);
        auto ood = tied_scores(rng, m, levels, 0.0);
        CHECK(auroc(msp_scores(id), msp_scores(ood)) == oracle::pair_count_auroc(id, ood));
    }
}

TEST_CASE("property: auroc is a rank statistic and antisymmetric") {
    Rng rng(32);
    for (int trial = 0; trial < 200; ++trial) {
        auto id = tied_scores(rng, 1 + rng.index(100), 20, 0.2);
        auto ood = tied_scores(rng, 1 + rng.index(100), 20, 0.0);
        const double base = auroc(msp_scores(id), msp_scores(ood));
        auto transform = [](std::vector<double> v, auto f) {
            for (double& x : v) x = f(x);
            return v;
        };
        auto ex = [](double x) { return std::exp(3.0 * x); };
        auto affine = [](double x) { return 7.0 * x - 2.0; };
        CHECK(auroc(msp_scores(transform(id, ex)), msp_scores(transform(ood, ex))) == base);
        CHECK(auroc(msp_scores(transform(id, affine)), msp_scores(transform(ood, affine))) == base);
        const double swapped = auroc(msp_scores(ood), msp_scores(id));
        CHECK(std::abs(base + swapped - 1.0) <= 1e-12);
    }
}

TEST_CASE("fpr at 95% TPR") {
    CHECK(fpr_at_tpr(msp_scores({0.9, 0.8, 0.95}), msp_scores({0.1, 0.2})) == 0.0);

    SUBCASE("OOD identical to ID gives the achieved acceptance") {
        std::vector<double> s;
        for (int i = 0; i < 20; ++i) s.push_back(i / 20.0);
        const double fpr = fpr_at_tpr(msp_scores(s), msp_scores(s));
        CHECK(fpr == 0.95);
        std::vector<double> tied(10, 0.5);
        CHECK(fpr_at_tpr(msp_scores(tied), msp_scores(tied)) == 1.0);
    }
    SUBCASE("ties at the threshold are accepted") {
        // 95% of 20 = 19 ID samples; the 19th-highest ID score is 0.3, shared
        // with two OOD samples.
        std::vector<double> id(18, 0.9);
        id.push_back(0.3);
        id.push_back(0.1);
        const double fpr = fpr_at_tpr(msp_scores(id), msp_scores({0.3, 0.3, 0.2, 0.0}));
        CHECK(fpr == 0.5);
    }
    SUBCASE("20 vs 20 random scores match the threshold sweep") {
        Rng rng(33);
        for (int trial = 0; trial < 500; ++trial) {
            auto id = tied_scores(rng, 20, 12, 0.05);
            auto ood = tied_scores(rng, 20, 12, 0.0);
            CHECK(fpr_at_tpr(msp_scores(id), msp_scores(ood)) == oracle::sweep_fpr(id, ood, 0.95));
            // Same data expressed as entropy (negated) must agree.
            auto neg = [](std::vector<double> v) {
                for (double& x : v) x = -x;
                return v;
            };
            CHECK(fpr_at_tpr(entropy_scores(neg(id)), entropy_scores(neg(ood))) ==
                  oracle::sweep_fpr(id, ood, 0.95));
        }
    }
}

TEST_CASE("property: fpr falls as OOD scores become more OOD-like") {
    Rng rng(34);
    for (int trial = 0; trial < 200; ++trial) {
        auto id = tied_scores(rng, 1 + rng.index(60), 15, 0.0);
        auto ood = tied_scores(rng, 1 + rng.index(60), 15, 0.0);
        double prev = fpr_at_tpr(msp_scores(id), msp_scores(ood));
        for (int step = 0; step < 5; ++step) {
            for (double& v : ood) v -= 0.05;
            const double now = fpr_at_tpr(msp_scores(id), msp_scores(ood));
            CHECK(now <= prev);
            prev = now;
        }
    }
}

TEST_CASE("aggregate") {
    auto rec = [](OodTag tag, double a) {
        PairRecord r;
        r.tag = tag;
        r.auroc = a;
        return r;
    };
    const auto both = aggregate({rec(OodTag::near, 0.8), rec(OodTag::far, 0.9)});
    CHECK(*both.near_ood == 0.8);
    CHECK(*both.far_ood == 0.9);
    CHECK(*both.avg_ood == doctest::Approx(0.85).epsilon(1e-12));

    const auto far_only = aggregate({rec(OodTag::far, 0.9), rec(OodTag::far, 0.7)});
    CHECK_FALSE(far_only.near_ood.has_value());
    CHECK(*far_only.far_ood == doctest::Approx(0.8).epsilon(1e-12));
    CHECK_FALSE(far_only.avg_ood.has_value());

    // Reported near/far AUROCs for one benchmark row (percent).
    const auto table = aggregate({rec(OodTag::near, 84.32), rec(OodTag::far, 93.75)});
    CHECK(*table.avg_ood == doctest::Approx(89.035).epsilon(1e-12));
    CHECK(std::abs(*table.avg_ood - (*table.near_ood + *table.far_ood) / 2.0) <= 1e-12);
}
