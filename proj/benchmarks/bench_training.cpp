#include <benchmark/benchmark.h>

#include "gzsl/cada.hpp"
#include "gzsl/eval.hpp"
#include "gzsl/rng.hpp"
#include "gzsl/synth.hpp"

namespace {

using namespace gzsl;

data::SynthSpec bench_spec() {
    data::SynthSpec spec;
    spec.n_seen = 8;
    spec.n_unseen = 4;
    spec.visual_dim = 32;
    spec.semantic_dim = 8;
    spec.samples_per_class = 50;
    spec.seed = 99;
    return spec;
}

cada::CadaConfig small_cada() {
    cada::CadaConfig cfg;
    cfg.latent_dim = 16;
    cfg.enc_hidden_visual = 64;
    cfg.enc_hidden_semantic = 64;
    cfg.dec_hidden_visual = 64;
    cfg.dec_hidden_semantic = 64;
    cfg.batch_size = 52;
    return cfg;
}

void bench_cada_epoch(benchmark::State& state) {
    data::Dataset ds = data::synth_benchmark(bench_spec());
    ds.val_classes = data::derive_val_classes(ds, 0.2, 1);
    cada::CadaConfig cfg = small_cada();
    cfg.epochs = 1;
    for (auto _ : state) {
        cada::CadaTrainResult r = cada::train_cada(ds, cfg);
        benchmark::DoNotOptimize(r.history.back().weighted_total);
    }
}
BENCHMARK(bench_cada_epoch)->Unit(benchmark::kMillisecond);

void bench_ausuc_sweep(benchmark::State& state) {
    const auto grid_points = static_cast<std::size_t>(state.range(0));
    Rng rng(5);
    const std::size_t c = 12, n_seen = 400, n_unseen = 200;
    std::set<std::uint32_t> seen, unseen;
    std::vector<gate::DomainLabel> domains(c);
    for (std::uint32_t y = 0; y < c; ++y) {
        const bool is_seen = y < 8;
        domains[y] = is_seen ? gate::DomainLabel::seen : gate::DomainLabel::unseen;
        (is_seen ? seen : unseen).insert(y);
    }
    auto make_set = [&](std::size_t n, bool seen_side) {
        eval::ScoredSet set;
        set.num_classes = c;
        set.scores.resize(n * c);
        rng.fill_uniform(set.scores, 0.0, 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            set.labels.push_back(
                static_cast<std::uint32_t>(seen_side ? rng.index(8) : 8 + rng.index(4)));
        }
        return set;
    };
    eval::ScoredSet test_seen = make_set(n_seen, true);
    eval::ScoredSet test_unseen = make_set(n_unseen, false);
    const auto grid = eval::make_lambda_grid(1.0, grid_points);
    for (auto _ : state) {
        eval::AusucResult r = eval::ausuc(test_seen, test_unseen, seen, unseen, domains, grid);
        benchmark::DoNotOptimize(r.area);
    }
}
BENCHMARK(bench_ausuc_sweep)->Arg(201)->Arg(1001);

} // namespace
