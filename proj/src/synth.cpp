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

#include "oodkit/synth.hpp"

#include <cmath>
#include <numeric>

#include "oodkit/error.hpp"
#include "oodkit/rng.hpp"

namespace oodkit {

namespace {

Matrix<double> draw_centers(Rng& rng, std::size_t count, std::size_t dim, double scale) {
    Matrix<double> centers(count, dim);
    for (double& v : centers.values()) v = scale * rng.normal();
    return centers;
}

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

// Rotates `center` by `angle` towards a random direction orthogonal to it.
std::vector<double> rotate_in_random_plane(Rng& rng, std::span<const double> center, double angle) {
    const std::size_t d = center.size();
    const double len = norm(center);
    std::vector<double> unit(d);
    for (std::size_t j = 0; j < d; ++j) unit[j] = center[j] / len;

    std::vector<double> dir(d);
    double dir_len = 0.0;
    do {
        for (double& v : dir) v = rng.normal();
        const double along = std::inner_product(dir.begin(), dir.end(), unit.begin(), 0.0);
        for (std::size_t j = 0; j < d; ++j) dir[j] -= along * unit[j];
        dir_len = norm(dir);
    } while (dir_len < 1e-9);

    std::vector<double> out(d);
    for (std::size_t j = 0; j < d; ++j) {
        out[j] = len * (std::cos(angle) * unit[j] + std::sin(angle) * dir[j] / dir_len);
    }
    return out;
}

struct Sampled {
    Matrix<double> points;
    std::vector<std::uint32_t> cluster;
};

Sampled sample_clusters(Rng& rng, const Matrix<double>& centers, std::size_t per_cluster,
                        double noise_std) {
    const std::size_t d = centers.cols();
    Sampled s;
    s.points = Matrix<double>(centers.rows() * per_cluster, d);
    s.cluster.reserve(centers.rows() * per_cluster);
    std::size_t r = 0;
    for (std::size_t c = 0; c < centers.rows(); ++c) {
        for (std::size_t i = 0; i < per_cluster; ++i, ++r) {
            auto row = s.points.row(r);
            for (std::size_t j = 0; j < d; ++j) row[j] = centers(c, j) + noise_std * rng.normal();
            s.cluster.push_back(static_cast<std::uint32_t>(c));
        }
    }
    return s;
}

void add_noise(Rng& rng, Matrix<double>& points, double noise_std) {
    for (double& v : points.values()) v += noise_std * rng.normal();
}

EmbeddingSet to_embedding_set(const Matrix<double>& points, std::string id, Role role,
                              std::uint64_t num_classes) {
    std::vector<float> values;
    values.reserve(points.values().size());
    for (double v : points.values()) values.push_back(static_cast<float>(v));
    EmbeddingSet set;
    set.data = Matrix<float>(points.rows(), points.cols(), std::move(values));
    set.dataset_id = std::move(id);
    set.role = role;
    set.num_classes = num_classes;
    return set;
}

// Class posterior logits of a Gaussian model with shared isotropic
// covariance, evaluated on an independently perturbed view of each point.
LogitSet classifier_logits(Rng& rng, const EmbeddingSet& set, const Matrix<double>& centers,
                           const SynthSpec& spec) {
    const std::size_t d = centers.cols();
    const double variance = spec.within_class_std * spec.within_class_std +
                            spec.cls_view_std * spec.cls_view_std;
    const double inv_var = variance > 0.0 ? spec.cls_logit_scale / variance : spec.cls_logit_scale;
    std::vector<double> half_sq(centers.rows());
    for (std::size_t c = 0; c < centers.rows(); ++c) {
        const auto mu = centers.row(c);
        half_sq[c] = 0.5 * std::inner_product(mu.begin(), mu.end(), mu.begin(), 0.0);
    }
    LogitSet logits;
    logits.member = Member::cls;
    logits.source_dataset = set.dataset_id;
    logits.data = Matrix<double>(set.size(), centers.rows());
    std::vector<double> view(d);
    for (std::size_t n = 0; n < set.size(); ++n) {
        const auto x = set.data.row(n);
        for (std::size_t j = 0; j < d; ++j) view[j] = x[j] + spec.cls_view_std * rng.normal();
        for (std::size_t c = 0; c < centers.rows(); ++c) {
            const auto mu = centers.row(c);
            const double dot = std::inner_product(view.begin(), view.end(), mu.begin(), 0.0);
            logits.data(n, c) = inv_var * (dot - half_sq[c]);
        }
    }
    return logits;
}

}  // namespace

SynthBenchmark synth_generate(const SynthSpec& spec) {
    spec.validate();
    Rng rng(spec.rng_seed);
    const std::size_t num_classes = spec.num_classes;
    const std::size_t d = spec.dim;
    const double sigma = spec.within_class_std;

    const Matrix<double> id_centers = draw_centers(rng, num_classes, d, spec.class_center_scale);
    const Matrix<double> near_centers = draw_centers(rng, spec.n_ood_classes, d, spec.class_center_scale);
    const Matrix<double> far_centers = draw_centers(rng, spec.n_ood_classes, d, spec.class_center_scale);

    SynthBenchmark out;

    // Text embeddings: the ID centers, optionally rotated.
    Matrix<double> text(num_classes, d);
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (spec.zero_shot_misalignment_angle == 0.0) {
            std::copy(id_centers.row(c).begin(), id_centers.row(c).end(), text.row(c).begin());
        } else {
            const auto rotated =
                rotate_in_random_plane(rng, id_centers.row(c), spec.zero_shot_misalignment_angle);
            std::copy(rotated.begin(), rotated.end(), text.row(c).begin());
        }
    }
    out.text.data = to_embedding_set(text, "", Role::id_test, num_classes).data;
    out.text.name = "synth";
    for (std::size_t c = 0; c < num_classes; ++c) out.text.class_names.push_back("class_" + std::to_string(c));

    auto labelled = [&](const Sampled& s, const char* id, Role role) {
        EmbeddingSet set = to_embedding_set(s.points, std::string("synth:") + id, role, num_classes);
        set.labels = s.cluster;
        return set;
    };

    Sampled train = sample_clusters(rng, id_centers, spec.n_per_class, sigma);
    Sampled val = sample_clusters(rng, id_centers, spec.n_per_class, sigma);
    Sampled test = sample_clusters(rng, id_centers, spec.n_per_class, sigma);
    Sampled covariate = test;
    add_noise(rng, covariate.points, spec.covariate_shift_std);

    out.id_train_true_labels = train.cluster;
    out.id_train = labelled(train, "id_train", Role::id_train);
    out.id_val = labelled(val, "id_val", Role::id_val);
    out.id_test = labelled(test, "id_test", Role::id_test);
    out.id_test_covariate = labelled(covariate, "id_test_covariate", Role::id_test_covariate);

    if (spec.n_ood_classes > 0) {
        Sampled near = sample_clusters(rng, near_centers, spec.n_per_class, sigma);
        Sampled far = sample_clusters(rng, far_centers, spec.n_per_class, sigma);
        add_noise(rng, far.points, spec.far_ood_shift_std);
        out.ood_near = to_embedding_set(near.points, "synth:ood_near", Role::ood_near, num_classes);
        out.ood_far = to_embedding_set(far.points, "synth:ood_far", Role::ood_far, num_classes);
    }

    // Label noise: exactly round(rate * N) rows get a different class.
    const std::size_t n_train = out.id_train.size();
    const auto flips = static_cast<std::size_t>(std::llround(spec.label_noise_rate * static_cast<double>(n_train)));
    if (flips > 0) {
        std::vector<std::size_t> order(n_train);
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(std::span<std::size_t>(order));
        auto& labels = *out.id_train.labels;
        for (std::size_t i = 0; i < flips; ++i) {
            const std::size_t r = order[i];
            const auto offset = 1 + rng.index(num_classes - 1);
            labels[r] = static_cast<std::uint32_t>((labels[r] + offset) % num_classes);
        }
    }

    out.cls_id_test = classifier_logits(rng, out.id_test, id_centers, spec);
    out.cls_id_test_covariate = classifier_logits(rng, out.id_test_covariate, id_centers, spec);
    if (spec.n_ood_classes > 0) {
        out.cls_ood_near = classifier_logits(rng, out.ood_near, id_centers, spec);
        out.cls_ood_far = classifier_logits(rng, out.ood_far, id_centers, spec);
    }
    return out;
}

}  // namespace oodkit
