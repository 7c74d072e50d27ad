#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iterator>
#include <vector>

#include "gzsl/cada.hpp"
#include "gzsl/error.hpp"
#include "gzsl/gate.hpp"
#include "gzsl/latent_space.hpp"
#include "gzsl/synth.hpp"

using namespace gzsl;
using ad::Tensor;
namespace fs = std::filesystem;

namespace {

data::Dataset toy_dataset(std::size_t n_seen = 4, std::size_t n_unseen = 4) {
    data::SynthSpec spec;
    spec.n_seen = n_seen;
    spec.n_unseen = n_unseen;
    spec.visual_dim = 6;
    spec.semantic_dim = 3;
    spec.samples_per_class = 10;
    spec.seed = 2;
    return data::synth_benchmark(spec);
}

cada::CadaModel toy_cada(const data::Dataset& ds, std::uint64_t seed = 21) {
    cada::CadaConfig cfg;
    cfg.latent_dim = 4;
    cfg.enc_hidden_visual = 8;
    cfg.enc_hidden_semantic = 8;
    cfg.dec_hidden_visual = 8;
    cfg.dec_hidden_semantic = 8;
    Rng rng(seed);
    return cada::make_cada_model(ds.visual_dim, ds.semantic_dim, cfg, rng);
}

// Two jittered clusters along the first latent axis, one per domain.
gate::DomainSet separable_set(std::size_t per_domain, double gap, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> buf;
    std::vector<gate::DomainLabel> labels;
    for (std::size_t i = 0; i < 2 * per_domain; ++i) {
        const bool unseen = i >= per_domain;
        buf.push_back((unseen ? -gap : gap) + rng.normal(0.0, 0.2));
        buf.push_back(rng.normal(0.0, 0.2));
        labels.push_back(unseen ? gate::DomainLabel::unseen : gate::DomainLabel::seen);
    }
    gate::DomainSet set;
    set.latents = Tensor::from_data({labels.size(), 2}, std::move(buf));
    set.labels = std::move(labels);
    return set;
}

double domain_accuracy(const gate::DomainClassifier& dc, const gate::DomainSet& set) {
    const std::vector<double> p = gate::domain_probs(dc, set.latents);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < set.labels.size(); ++i) {
        const auto guess =
            p[2 * i] >= p[2 * i + 1] ? gate::DomainLabel::seen : gate::DomainLabel::unseen;
        if (guess == set.labels[i]) hits += 1;
    }
    return static_cast<double>(hits) / static_cast<double>(set.labels.size());
}

// Single linear classifier whose logits are (w*z0, -w*z0); with labels drawn
// from its own T=1 probabilities the NLL-optimal temperature is 1.
gate::DomainClassifier axis_dc(double w) {
    ad::DenseLayer layer;
    layer.weight = Tensor::from_data({2, 2}, {w, 0.0, -w, 0.0});
    layer.bias = Tensor::zeros({2});
    layer.activation = ad::Activation::identity;
    gate::DomainClassifier dc;
    dc.mlp.layers = {layer};
    return dc;
}

gate::DomainSet self_calibrated_set(const gate::DomainClassifier& dc, std::size_t n,
                                    std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> buf(n * 2);
    rng.fill_normal(buf, 0.0, 1.0);
    gate::DomainSet set;
    set.latents = Tensor::from_data({n, 2}, std::move(buf));
    const std::vector<double> p = gate::domain_probs(dc, set.latents);
    for (std::size_t i = 0; i < n; ++i) {
        set.labels.push_back(rng.uniform() < p[2 * i] ? gate::DomainLabel::seen
                                                      : gate::DomainLabel::unseen);
    }
    return set;
}

std::vector<double> dc_param_values(const gate::DomainClassifier& dc) {
    std::vector<double> out;
    for (const Tensor& t : ad::params_of(dc.mlp))
        out.insert(out.end(), t.data().begin(), t.data().end());
    return out;
}

} // namespace

TEST_CASE("dc training set counts rows per domain") {
    data::Dataset ds = toy_dataset();
    LatentSpace space = latent_space_of(toy_cada(ds));
    gate::GateConfig cfg;
    cfg.n_unseen_draws_per_class = 250;
    cfg.class_balance = false;

    Rng rng(50);
    gate::DomainSet set = gate::build_dc_training_set(space, ds, cfg, rng);
    // 4 unseen classes at 250 draws each.
    CHECK(set.count(gate::DomainLabel::unseen) == 1000);
    // 40 encoded training visuals plus one projection per seen class.
    CHECK(set.count(gate::DomainLabel::seen) == 44);
    CHECK(set.latents.dim(0) == 1044);
    CHECK(set.latents.dim(1) == space.latent_dim);
    for (std::size_t i = 0; i < 40; ++i) CHECK(set.labels[i] == gate::DomainLabel::seen);

    SUBCASE("class balancing equalizes the domains") {
        cfg.class_balance = true;
        Rng rng2(51);
        gate::DomainSet balanced = gate::build_dc_training_set(space, ds, cfg, rng2);
        CHECK(balanced.count(gate::DomainLabel::seen) == 44);
        CHECK(balanced.count(gate::DomainLabel::unseen) == 44);
    }
    SUBCASE("zero draw budget is rejected") {
        cfg.n_unseen_draws_per_class = 0;
        Rng rng3(52);
        CHECK_THROWS_AS(gate::build_dc_training_set(space, ds, cfg, rng3), ContractError);
    }
    SUBCASE("a dataset without unseen classes is rejected") {
        data::Dataset crippled = ds;
        crippled.unseen_classes.clear();
        Rng rng4(53);
        CHECK_THROWS_AS(gate::build_dc_training_set(space, crippled, cfg, rng4),
                        ContractError);
    }
}

TEST_CASE("dc separates the domains above chance on the synthetic benchmark") {
    data::Dataset ds = toy_dataset();
    cada::CadaConfig train_cfg;
    train_cfg.latent_dim = 4;
    train_cfg.enc_hidden_visual = 16;
    train_cfg.enc_hidden_semantic = 16;
    train_cfg.dec_hidden_visual = 16;
    train_cfg.dec_hidden_semantic = 16;
    train_cfg.epochs = 5;
    train_cfg.batch_size = 16;
    train_cfg.seed = 23;
    LatentSpace space = latent_space_of(cada::train_cada(ds, train_cfg).model);

    gate::GateConfig cfg;
    cfg.dc_hidden = 16;
    cfg.dc_epochs = 20;
    Rng rng(54);
    gate::DomainSet set = gate::build_dc_training_set(space, ds, cfg, rng);
    gate::DomainClassifier dc = gate::train_dc(set, cfg);
    CHECK(domain_accuracy(dc, set) > 0.5);
}

TEST_CASE("dc training reaches the separable optimum deterministically") {
    gate::GateConfig cfg;
    cfg.dc_hidden = 8;
    cfg.dc_epochs = 30;
    cfg.dc_lr = 1e-2;

    gate::DomainSet set = separable_set(20, 2.0, 55);
    std::vector<double> history;
    gate::DomainClassifier dc = gate::train_dc(set, cfg, &history);
    CHECK(history.size() == cfg.dc_epochs);
    CHECK(domain_accuracy(dc, set) == doctest::Approx(1.0));

    // Swapping every label leaves the problem symmetric.
    gate::DomainSet flipped = set;
    for (auto& l : flipped.labels) {
        l = l == gate::DomainLabel::seen ? gate::DomainLabel::unseen
                                         : gate::DomainLabel::seen;
    }
    gate::DomainClassifier dc_flipped = gate::train_dc(flipped, cfg);
    CHECK(domain_accuracy(dc_flipped, flipped) == doctest::Approx(1.0));

    gate::DomainClassifier again = gate::train_dc(set, cfg);
    CHECK(dc_param_values(dc) == dc_param_values(again));

    SUBCASE("single-domain sets are rejected") {
        gate::DomainSet lop = set;
        for (auto& l : lop.labels) l = gate::DomainLabel::seen;
        CHECK_THROWS_AS(gate::train_dc(lop, cfg), ContractError);
    }
    SUBCASE("label count must match the latent rows") {
        gate::DomainSet bad = set;
        bad.labels.pop_back();
        CHECK_THROWS_AS(gate::train_dc(bad, cfg), ShapeError);
    }
}

TEST_CASE("calibration recovers the generating temperature") {
    gate::DomainClassifier dc = axis_dc(2.0);
    gate::DomainSet val = self_calibrated_set(dc, 20000, 56);
    const double t1 = gate::calibrate(dc, val);
    CHECK(std::fabs(t1 - 1.0) < 0.05);

    // Doubling every logit must double the fitted temperature.
    gate::DomainClassifier doubled = axis_dc(4.0);
    const double t2 = gate::calibrate(doubled, val);
    CHECK(t2 == doctest::Approx(2.0 * t1).epsilon(1e-3));
}

TEST_CASE("degenerate calibration sets leave the temperature at 1") {
    gate::DomainClassifier dc = axis_dc(1.0);
    dc.temperature = 3.0;

    gate::DomainSet empty;
    empty.latents = Tensor::zeros({0, 2});
    CHECK(gate::calibrate(dc, empty) == 1.0);

    dc.temperature = 3.0;
    gate::DomainSet lop = separable_set(5, 1.0, 57);
    for (auto& l : lop.labels) l = gate::DomainLabel::seen;
    CHECK(gate::calibrate(dc, lop) == 1.0);
}

TEST_CASE("temperature rescaling never flips a sample's domain call") {
    gate::GateConfig cfg;
    cfg.dc_hidden = 8;
    cfg.dc_epochs = 10;
    gate::DomainSet set = separable_set(15, 1.0, 58);
    gate::DomainClassifier dc = gate::train_dc(set, cfg);

    const std::vector<double> before = gate::domain_probs(dc, set.latents);
    dc.temperature = 7.3;
    const std::vector<double> after = gate::domain_probs(dc, set.latents);
    for (std::size_t i = 0; i < set.labels.size(); ++i) {
        CHECK((before[2 * i] > before[2 * i + 1]) == (after[2 * i] > after[2 * i + 1]));
    }
}

TEST_CASE("domain probabilities form a two-point distribution") {
    gate::DomainClassifier dc = axis_dc(1.7);
    Rng rng(59);
    std::vector<double> buf(30 * 2);
    rng.fill_normal(buf, 0.0, 2.0);
    Tensor latents = Tensor::from_data({30, 2}, std::move(buf));

    std::vector<double> p = gate::domain_probs(dc, latents);
    for (std::size_t i = 0; i < 30; ++i) {
        CHECK(p[2 * i] + p[2 * i + 1] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(p[2 * i] >= 0.0);
    }

    gate::DomainClassifier numb = axis_dc(0.0);
    auto [ps, pu] = gate::domain_prob(numb, std::vector<double>{5.0, -3.0});
    CHECK(ps == 0.5);
    CHECK(pu == 0.5);

    dc.temperature = 1e6;
    std::vector<double> flat = gate::domain_probs(dc, latents);
    for (std::size_t i = 0; i < flat.size(); ++i)
        CHECK(flat[i] == doctest::Approx(0.5).epsilon(1e-4));

    dc.temperature = -1.0;
    CHECK_THROWS_AS(gate::domain_probs(dc, latents), ContractError);
}

TEST_CASE("gating multiplies class mass by its domain probability") {
    using gate::DomainLabel;
    const std::vector<DomainLabel> domains{DomainLabel::seen, DomainLabel::seen,
                                           DomainLabel::unseen, DomainLabel::unseen};
    const std::vector<double> uniform{0.25, 0.25, 0.25, 0.25};

    std::vector<double> scores = gate::gate(uniform, 0.9, 0.1, domains);
    REQUIRE(scores.size() == 4);
    CHECK(scores[0] == doctest::Approx(0.225).epsilon(1e-12));
    CHECK(scores[1] == doctest::Approx(0.225).epsilon(1e-12));
    CHECK(scores[2] == doctest::Approx(0.025).epsilon(1e-12));
    CHECK(scores[3] == doctest::Approx(0.025).epsilon(1e-12));

    SUBCASE("a vanished domain zeroes its classes exactly") {
        std::vector<double> hard = gate::gate(uniform, 1.0, 0.0, domains);
        CHECK(hard[2] == 0.0);
        CHECK(hard[3] == 0.0);
    }
    SUBCASE("an even gate preserves the class argmax") {
        const std::vector<double> skewed{0.1, 0.2, 0.4, 0.3};
        std::vector<double> even = gate::gate(skewed, 0.5, 0.5, domains);
        const auto arg = [](const std::vector<double>& v) {
            return std::distance(v.begin(), std::max_element(v.begin(), v.end()));
        };
        CHECK(arg(even) == arg(skewed));
    }
    SUBCASE("total gated mass splits by domain") {
        Rng rng(60);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> p(4);
            rng.fill_uniform(p, 0.01, 1.0);
            double sum = p[0] + p[1] + p[2] + p[3];
            for (double& v : p) v /= sum;
            const double ps = rng.uniform();
            std::vector<double> s = gate::gate(p, ps, 1.0 - ps, domains);
            const double expected = ps * (p[0] + p[1]) + (1.0 - ps) * (p[2] + p[3]);
            CHECK(s[0] + s[1] + s[2] + s[3] == doctest::Approx(expected).epsilon(1e-12));
        }
    }
    SUBCASE("contract violations are reported") {
        CHECK_THROWS_AS(gate::gate(uniform, 0.9, 0.1, std::vector<DomainLabel>{
                                                          DomainLabel::seen}),
                        ContractError);
        CHECK_THROWS_AS(gate::gate(std::vector<double>{0.5, 0.3}, 0.9, 0.1,
                                   std::vector<DomainLabel>{DomainLabel::seen,
                                                            DomainLabel::unseen}),
                        ContractError);
        CHECK_THROWS_AS(gate::gate(uniform, 0.7, 0.7, domains), ContractError);
    }
}

TEST_CASE("classifier and temperature survive the disk round trip") {
    auto dir = fs::temp_directory_path() / "gzsl_gate_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto path = dir / "dc.ckpt";

    gate::GateConfig cfg;
    cfg.dc_hidden = 8;
    cfg.dc_epochs = 5;
    gate::DomainClassifier dc = gate::train_dc(separable_set(10, 1.5, 61), cfg);
    dc.temperature = 1.2345678901234567;
    gate::save_dc(path, dc);

    gate::DomainClassifier back = gate::load_dc(path);
    CHECK(back.temperature == dc.temperature);

    // Checkpoints hold f32, so loads agree with each other exactly and with
    // the trained doubles to f32 precision.
    gate::DomainClassifier again = gate::load_dc(path);
    CHECK(dc_param_values(back) == dc_param_values(again));
    const std::vector<double> orig = dc_param_values(dc);
    const std::vector<double> got = dc_param_values(back);
    REQUIRE(got.size() == orig.size());
    for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got[i] == doctest::Approx(orig[i]).epsilon(1e-6));

    fs::remove(path.string() + ".temperature");
    CHECK_THROWS_AS(gate::load_dc(path), DataError);
    fs::remove_all(dir);
}

TEST_CASE("calibration set pairs held-out classes with matched seen rows") {
    data::Dataset ds = toy_dataset();
    ds.val_classes = {0};
    LatentSpace space = latent_space_of(toy_cada(ds));
    gate::GateConfig cfg;

    Rng rng(62);
    gate::DomainSet set = gate::build_calibration_set(space, ds, cfg, rng);
    CHECK(set.count(gate::DomainLabel::seen) == set.count(gate::DomainLabel::unseen));
    CHECK(set.count(gate::DomainLabel::unseen) == 10);
    CHECK(set.latents.dim(1) == space.latent_dim);

    data::Dataset plain = toy_dataset();
    Rng rng2(63);
    gate::DomainSet none = gate::build_calibration_set(space, plain, cfg, rng2);
    CHECK(none.labels.empty());
    CHECK(none.latents.dim(0) == 0);
}
