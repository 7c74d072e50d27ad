#include "gzsl/gradcheck_suite.hpp"

#include <utility>

#include "gzsl/cada.hpp"
#include "gzsl/checkpoint.hpp"
#include "gzsl/cycle.hpp"
#include "gzsl/layers.hpp"
#include "gzsl/net_io.hpp"
#include "gzsl/ops.hpp"
#include "gzsl/rng.hpp"

namespace gzsl {

namespace {

constexpr std::size_t kBatch = 3;
constexpr std::size_t kVisual = 5;
constexpr std::size_t kSemantic = 3;

std::vector<ad::NamedParam> named_of(const ad::Checkpoint& ckpt) {
    std::vector<ad::NamedParam> out;
    out.reserve(ckpt.arrays.size());
    for (const auto& [name, tensor] : ckpt.arrays) out.push_back({name, tensor});
    return out;
}

GradCheckCase make_case(std::string name, std::function<ad::Tensor()> loss,
                        std::vector<ad::NamedParam> params) {
    return {std::move(name), [loss = std::move(loss), params = std::move(params)] {
                return ad::gradcheck(loss, params);
            }};
}

ad::Tensor random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    std::vector<double> v(rows * cols);
    rng.fill_normal(v, 0.0, 1.0);
    return ad::Tensor::from_data({rows, cols}, std::move(v));
}

cada::CadaConfig toy_cada_config() {
    cada::CadaConfig cfg;
    cfg.latent_dim = 2;
    cfg.enc_hidden_visual = 4;
    cfg.enc_hidden_semantic = 4;
    cfg.dec_hidden_visual = 4;
    cfg.dec_hidden_semantic = 4;
    return cfg;
}

} // namespace

std::vector<GradCheckCase> standard_gradcheck_cases(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<GradCheckCase> cases;

    {
        const cada::CadaConfig cfg = toy_cada_config();
        Rng model_rng = rng.fork();
        cada::CadaModel m = cada::make_cada_model(kVisual, kSemantic, cfg, model_rng);
        cada::Batch batch{random_matrix(kBatch, kVisual, rng),
                          random_matrix(kBatch, kSemantic, rng)};
        ad::Tensor eps_x = random_matrix(kBatch, cfg.latent_dim, rng);
        ad::Tensor eps_a = random_matrix(kBatch, cfg.latent_dim, rng);
        auto params = m.named_params();
        // Epoch 50 puts every schedule inside its ramp, so the weighted sum
        // exercises all four terms at once.
        auto losses = [m, batch, cfg, eps_x, eps_a] {
            return cada::total_loss(m, batch, 50, cfg, eps_x, eps_a);
        };
        cases.push_back(make_case(
            "reconstruction", [losses] { return losses().recon; }, params));
        cases.push_back(make_case(
            "kl_divergence", [losses] { return losses().kl; }, params));
        cases.push_back(make_case(
            "cross_alignment", [losses] { return losses().cross; }, params));
        cases.push_back(make_case(
            "distribution_alignment", [losses] { return losses().dist; }, params));
        cases.push_back(make_case(
            "vae_objective", [losses] { return losses().weighted_total; }, params));
    }

    {
        cycle::CycleConfig cfg;
        cfg.gen_hidden = 4;
        cfg.critic_hidden = 4;
        Rng model_rng = rng.fork();
        cycle::CycleModel m = cycle::make_cycle_model(kVisual, kSemantic, cfg, model_rng);
        ad::Tensor real_x = random_matrix(kBatch, kVisual, rng);
        ad::Tensor sem = random_matrix(kBatch, kSemantic, rng);
        ad::Tensor noise = random_matrix(kBatch, m.noise_dim, rng);
        auto params = named_of(cycle::to_checkpoint(m));

        auto critic = [m, real_x, sem, noise] {
            cycle::ConditionedBatch real{real_x, sem};
            cycle::ConditionedBatch fake{cycle::generate(m, sem, noise), sem};
            return cycle::critic_losses(m, real, fake).critic_loss;
        };
        auto generator = [m, sem, noise] {
            ad::Tensor fake = cycle::generate(m, sem, noise);
            return ad::scale(ad::mean_all(cycle::critic_score(m, fake, sem)), -1.0);
        };
        auto cyc = [m, sem, noise] {
            ad::Tensor fake = cycle::generate(m, sem, noise);
            return cycle::cycle_loss(sem, cycle::regress(m, fake));
        };
        const double gamma = cfg.gamma_cyc;
        auto total = [generator, cyc, gamma] {
            return ad::add(generator(), ad::scale(cyc(), gamma));
        };
        cases.push_back(make_case("critic_loss", critic, params));
        cases.push_back(make_case("generator_loss", generator, params));
        cases.push_back(make_case("cycle_consistency", cyc, params));
        cases.push_back(make_case("wgan_objective", total, params));
    }

    {
        Rng model_rng = rng.fork();
        ad::Mlp head = ad::make_mlp({2, 4, 4}, ad::Activation::relu, ad::Activation::identity,
                                    model_rng);
        ad::Tensor x = random_matrix(kBatch, 2, rng);
        std::vector<std::uint32_t> labels{0, 2, 3};
        ad::Checkpoint ckpt;
        ad::checkpoint_add_mlp(ckpt, "head", head);
        cases.push_back(make_case(
            "head_cross_entropy",
            [head, x, labels] { return ad::softmax_cross_entropy(head.forward(x), labels); },
            named_of(ckpt)));
    }

    {
        Rng model_rng = rng.fork();
        ad::Mlp dc = ad::make_mlp({2, 4, 2}, ad::Activation::relu, ad::Activation::identity,
                                  model_rng);
        ad::Tensor x = random_matrix(kBatch, 2, rng);
        std::vector<std::uint32_t> labels{0, 1, 0};
        ad::Checkpoint ckpt;
        ad::checkpoint_add_mlp(ckpt, "dc", dc);
        cases.push_back(make_case(
            "domain_cross_entropy",
            [dc, x, labels] { return ad::softmax_cross_entropy(dc.forward(x), labels); },
            named_of(ckpt)));
    }

    return cases;
}

std::vector<GradCheckOutcome> run_gradcheck_cases(const std::vector<GradCheckCase>& cases,
                                                  double tolerance) {
    std::vector<GradCheckOutcome> outcomes;
    outcomes.reserve(cases.size());
    for (const GradCheckCase& c : cases) {
        ad::GradCheckReport report = c.run();
        outcomes.push_back({c.name, report.max_rel_error, report.worst_param,
                            report.max_rel_error < tolerance});
    }
    return outcomes;
}

} // namespace gzsl
