#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "gzsl/dataset.hpp"
#include "gzsl/error.hpp"
#include "gzsl/eval.hpp"
#include "gzsl/synth.hpp"

using namespace gzsl;

namespace {

data::SynthSpec default_spec() {
    data::SynthSpec spec;
    spec.seed = 17;
    return spec; // 8 seen + 4 unseen, 32-d visual, 8-d semantic, 50 per class
}

} // namespace

TEST_CASE("same spec and seed give identical datasets") {
    data::Dataset a = data::synth_benchmark(default_spec());
    data::Dataset b = data::synth_benchmark(default_spec());
    CHECK(a.visual == b.visual);
    CHECK(a.semantic == b.semantic);
    CHECK(a.labels == b.labels);
    CHECK(a.train_idx == b.train_idx);

    data::SynthSpec other = default_spec();
    other.seed = 18;
    CHECK(data::synth_benchmark(other).visual != a.visual);
}

TEST_CASE("sample counts follow the spec") {
    data::Dataset ds = data::synth_benchmark(default_spec());
    CHECK(ds.num_classes() == 12);
    CHECK(ds.seen_classes.size() == 8);
    CHECK(ds.unseen_classes.size() == 4);
    CHECK(ds.train_idx.size() == 400);
    CHECK(ds.test_seen_idx.size() == 400);
    CHECK(ds.test_unseen_idx.size() == 200);
    CHECK(ds.n() == 1000);

    auto train_counts = data::class_counts(ds, ds.train_idx);
    for (std::uint32_t c : ds.seen_classes) CHECK(train_counts[c] == 50);
    for (std::uint32_t c : ds.unseen_classes) CHECK(train_counts[c] == 0);
    auto unseen_counts = data::class_counts(ds, ds.test_unseen_idx);
    for (std::uint32_t c : ds.unseen_classes) CHECK(unseen_counts[c] == 50);
}

TEST_CASE("generated datasets pass split validation") {
    CHECK(data::validate_splits(data::synth_benchmark(default_spec())).empty());
    data::SynthSpec noisy = default_spec();
    noisy.semantic_noise = 0.05;
    CHECK(data::validate_splits(data::synth_benchmark(noisy)).empty());
}

TEST_CASE("values are exactly representable in float32") {
    data::Dataset ds = data::synth_benchmark(default_spec());
    for (double x : ds.visual) CHECK(x == static_cast<double>(static_cast<float>(x)));
    for (double x : ds.semantic) CHECK(x == static_cast<double>(static_cast<float>(x)));
}

TEST_CASE("invalid specs are rejected") {
    data::SynthSpec spec = default_spec();
    spec.n_seen = 0;
    CHECK_THROWS_AS(data::synth_benchmark(spec), ContractError);
    spec = default_spec();
    spec.cluster_spread = 0.0;
    CHECK_THROWS_AS(data::synth_benchmark(spec), ContractError);
    spec = default_spec();
    spec.samples_per_class = 0;
    CHECK_THROWS_AS(data::synth_benchmark(spec), ContractError);
}

TEST_CASE("nearest class mean separates the clusters") {
    data::Dataset ds = data::synth_benchmark(default_spec());
    const std::size_t C = ds.num_classes();
    const std::size_t K = ds.visual_dim;

    // Empirical class means over all rows stand in for the generating
    // centers; with 0.1 spread and unit center separation they are close.
    std::vector<double> means(C * K, 0.0);
    std::vector<std::size_t> counts(C, 0);
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const auto row = ds.visual_row(i);
        const std::uint32_t y = ds.labels[i];
        counts[y] += 1;
        for (std::size_t k = 0; k < K; ++k) means[y * K + k] += row[k];
    }
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t k = 0; k < K; ++k) means[c * K + k] /= static_cast<double>(counts[c]);

    std::vector<std::uint32_t> preds;
    preds.reserve(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) {
        const auto row = ds.visual_row(i);
        double best = std::numeric_limits<double>::infinity();
        std::uint32_t best_cls = 0;
        for (std::uint32_t c = 0; c < C; ++c) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                const double d = row[k] - means[c * K + k];
                d2 += d * d;
            }
            if (d2 < best) {
                best = d2;
                best_cls = c;
            }
        }
        preds.push_back(best_cls);
    }

    std::set<std::uint32_t> all_classes;
    for (std::uint32_t c = 0; c < C; ++c) all_classes.insert(c);
    CHECK(eval::per_class_top1(preds, ds.labels, all_classes) > 0.95);
}
