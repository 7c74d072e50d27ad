#include "gzsl/synth.hpp"

#include <cmath>
#include <limits>

#include "gzsl/error.hpp"
#include "gzsl/rng.hpp"

namespace gzsl::data {

namespace {

double f32(double x) { return static_cast<double>(static_cast<float>(x)); }

} // namespace

Dataset synth_benchmark(const SynthSpec& spec) {
    if (spec.n_seen < 1 || spec.n_unseen < 1)
        throw ContractError("synth_benchmark: need at least one seen and one unseen class");
    if (spec.visual_dim < 1 || spec.semantic_dim < 1)
        throw ContractError("synth_benchmark: dimensions must be positive");
    if (spec.samples_per_class < 1)
        throw ContractError("synth_benchmark: samples_per_class must be positive");
    if (!(spec.cluster_spread > 0.0))
        throw ContractError("synth_benchmark: cluster_spread must be positive");
    if (spec.semantic_noise < 0.0)
        throw ContractError("synth_benchmark: semantic_noise must be non-negative");

    const std::size_t C = spec.n_seen + spec.n_unseen;
    const std::size_t K = spec.visual_dim;
    const std::size_t L = spec.semantic_dim;
    const std::size_t spc = spec.samples_per_class;
    Rng rng(spec.seed);

    // Positive prototypes and a nonnegative map keep the visual clusters in
    // the nonnegative orthant, matching the provenance of pooled CNN
    // features.
    std::vector<double> proto(C * L);
    rng.fill_uniform(proto, 0.2, 1.2);
    std::vector<double> map(K * L);
    rng.fill_uniform(map, 0.0, 1.0);

    std::vector<double> centers(C * K, 0.0);
    for (std::size_t c = 0; c < C; ++c)
        for (std::size_t k = 0; k < K; ++k) {
            double acc = 0.0;
            for (std::size_t l = 0; l < L; ++l) acc += map[k * L + l] * proto[c * L + l];
            centers[c * K + k] = acc;
        }

    double min_dist = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < C; ++a)
        for (std::size_t b = a + 1; b < C; ++b) {
            double d2 = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                const double d = centers[a * K + k] - centers[b * K + k];
                d2 += d * d;
            }
            min_dist = std::min(min_dist, std::sqrt(d2));
        }
    if (!(min_dist > 0.0))
        throw NumericError("synth_benchmark: coincident cluster centers; try another seed");
    for (double& x : centers) x /= min_dist;

    Dataset ds;
    ds.visual_dim = K;
    ds.semantic_dim = L;
    ds.semantic.resize(C * L);
    for (std::size_t i = 0; i < C * L; ++i)
        ds.semantic[i] = f32(proto[i] + spec.semantic_noise * rng.normal());

    auto emit_samples = [&](std::uint32_t cls, std::size_t count,
                            std::vector<std::uint32_t>& idx_list) {
        for (std::size_t s = 0; s < count; ++s) {
            idx_list.push_back(static_cast<std::uint32_t>(ds.labels.size()));
            ds.labels.push_back(cls);
            for (std::size_t k = 0; k < K; ++k)
                ds.visual.push_back(
                    f32(centers[cls * K + k] + spec.cluster_spread * rng.normal()));
        }
    };

    for (std::size_t c = 0; c < spec.n_seen; ++c) {
        const auto cls = static_cast<std::uint32_t>(c);
        ds.seen_classes.insert(cls);
        emit_samples(cls, spc, ds.train_idx);
        emit_samples(cls, spc, ds.test_seen_idx);
    }
    for (std::size_t c = spec.n_seen; c < C; ++c) {
        const auto cls = static_cast<std::uint32_t>(c);
        ds.unseen_classes.insert(cls);
        emit_samples(cls, spc, ds.test_unseen_idx);
    }
    return ds;
}

} // namespace gzsl::data
